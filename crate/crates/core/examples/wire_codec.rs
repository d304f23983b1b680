//! Frames a few messages, feeds them through the decoder in awkward chunks,
//! then corrupts one and shows the decoder resynchronizing.

use sumbrella::cable::{CableCommand, WaveParams};
use sumbrella::protocol::{encode, Decoder, Message};
use sumbrella::LeafSet;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02X}")).collect::<Vec<_>>().join(" ")
}

pub fn run_example() -> anyhow::Result<()> {
    let mut messages = vec![Message::pneu_targets(&[25.0, 25.0, 0.0])?];
    messages.extend(Message::cable_command(&CableCommand::Wave { leaves: LeafSet::ALL, params: WaveParams::default() })?);
    messages.push(Message::Heartbeat { seq: 1 });

    let mut stream = Vec::new();
    for m in &messages {
        let frame = encode(m)?;
        println!("{:<40} {}", format!("{m:?}").chars().take(40).collect::<String>(), hex(&frame));
        stream.extend(frame);
    }

    let mut decoder = Decoder::new();
    let mut got = Vec::new();
    for chunk in stream.chunks(7) {
        got.extend(decoder.feed(chunk).messages);
    }
    println!("decoded {} of {} in 7-byte chunks", got.len(), messages.len());

    stream[6] ^= 0x10;
    let out = Decoder::new().feed(&stream);
    println!("after a bit flip: {} messages, errors {:?}", out.messages.len(), out.errors);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
