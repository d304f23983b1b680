//! Seeded fuzzing of the frame codec.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::protocol::{encode, CableLeafStatus, Decoder, Message, PneuLeafStatus};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzFailure {
    pub seed: u64,
    pub index: u64,
    pub what: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub round_trips: u64,
    pub failures: Vec<FuzzFailure>,
    pub resync_trials: u64,
    /// Corrupted frames after which the following frame was not recovered.
    pub resync_failures: u64,
    /// Corrupted frames that decoded to a message other than the original.
    pub undetected_corruptions: u64,
    /// Frames whose corruption happened to decode to the original message.
    pub benign_corruptions: u64,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.resync_failures == 0 && self.undetected_corruptions == 0
    }
}

/// A uniformly chosen message type with uniformly random valid fields.
pub fn random_message<R: Rng>(rng: &mut R) -> Message {
    match rng.gen_range(0..7) {
        0 => Message::CmdCableSetMode { leaf_mask: rng.gen_range(1..=7), mode: rng.gen_range(0..=3) },
        1 => Message::CmdCableWaveParams {
            amplitude: rng.gen(),
            frequency_centi_hz: rng.gen(),
            phase_milli_rad: rng.gen(),
        },
        2 => Message::TlmCableStatus {
            leaves: std::array::from_fn(|_| CableLeafStatus {
                mode: rng.gen_range(0..=4),
                position: rng.gen(),
                torque: rng.gen(),
            }),
        },
        3 => Message::CmdPneuTargets { targets_deci_kpa: rng.gen() },
        4 => Message::TlmPneuStatus {
            leaves: std::array::from_fn(|_| PneuLeafStatus {
                pressure_deci_kpa: rng.gen(),
                route: rng.gen_range(0..=2),
                duty: rng.gen(),
            }),
        },
        5 => Message::Heartbeat { seq: rng.gen() },
        _ => Message::Ack { acked_type: rng.gen(), seq: rng.gen() },
    }
}

/// Round-trips `n` random messages, then flips one random bit after the
/// sync bytes of each frame and checks that the decoder either rejects it
/// or reproduces the original, and recovers the next frame after padding.
pub fn fuzz_protocol(n: u64, seed: u64) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport { seed, ..FuzzReport::default() };
    let fail = |report: &mut FuzzReport, index, what: String| report.failures.push(FuzzFailure { seed, index, what });

    for index in 0..n {
        let m = random_message(&mut rng);
        let frame = match encode(&m) {
            Ok(f) => f,
            Err(e) => {
                fail(&mut report, index, e.to_string());
                continue;
            }
        };
        let out = Decoder::new().feed(&frame);
        if out.messages != [m] || !out.errors.is_empty() {
            fail(&mut report, index, format!("round trip of {m:?} gave {out:?}"));
        } else {
            report.round_trips += 1;
        }

        let bit = rng.gen_range(16..frame.len() * 8);
        let mut corrupted = frame.clone();
        corrupted[bit / 8] ^= 1 << (bit % 8);
        let sentinel = Message::Heartbeat { seq: index as u16 };
        corrupted.extend([0u8; 64]);
        corrupted.extend(encode(&sentinel).expect("heartbeat encodes"));

        report.resync_trials += 1;
        let out = Decoder::new().feed(&corrupted);
        let mut recovered = false;
        for got in out.messages {
            if got == sentinel {
                recovered = true;
            } else if got == m {
                report.benign_corruptions += 1;
            } else {
                report.undetected_corruptions += 1;
                fail(&mut report, index, format!("bit {bit} flip of {m:?} decoded as {got:?}"));
            }
        }
        if !recovered {
            report.resync_failures += 1;
            fail(&mut report, index, format!("no resync after bit {bit} flip of {m:?}"));
        }
    }
    report
}

/// Encodes `frames` random messages as one stream, feeds it in random chunk
/// sizes, and returns the indices of trials where the decoded sequence
/// differs from the one decoded in a single call.
pub fn chunking_trials(trials: u64, frames: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for trial in 0..trials {
        let messages: Vec<Message> = (0..frames).map(|_| random_message(&mut rng)).collect();
        let stream: Vec<u8> = messages.iter().flat_map(|m| encode(m).expect("valid")).collect();
        let whole = Decoder::new().feed(&stream).messages;

        let mut decoder = Decoder::new();
        let mut pieced = Vec::with_capacity(frames);
        let mut rest = &stream[..];
        while !rest.is_empty() {
            let take = rng.gen_range(1..=rest.len().min(97));
            let (chunk, tail) = rest.split_at(take);
            pieced.extend(decoder.feed(chunk).messages);
            rest = tail;
        }
        if pieced != whole || whole != messages {
            bad.push(trial);
        }
    }
    bad
}
