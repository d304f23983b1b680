//! Summarizes detection frames and debounces them: a single visitor, a
//! flicker to two people, then a close object.

use sumbrella::config::PerceptionConfig;
use sumbrella::perception::{sector_of, summarize, Debouncer, Detection};

pub fn run_example() {
    let cfg = PerceptionConfig::default();
    let mut debounce = Debouncer::new(5);

    let visitor = Detection::person(1.4, 0.2, 0.9);
    let passerby = Detection::person(2.2, -1.2, 0.7);
    let post = Detection::object(0.45, 2.0, 0.8);

    let frames: Vec<Vec<Detection>> = [
        vec![visitor],
        vec![visitor],
        vec![visitor, passerby],
        vec![visitor],
        vec![visitor],
        vec![visitor],
        vec![visitor],
        vec![visitor],
        vec![post],
    ]
    .into();
    for (i, frame) in frames.iter().enumerate() {
        let s = summarize(frame, &cfg);
        let stable = debounce.push(s);
        println!(
            "frame {i}: persons={} min={:?} sectors=[{}] -> {}",
            s.persons_within,
            s.min_person_distance,
            s.obstacle_sectors,
            stable.map_or("waiting".to_string(), |st| format!("stable x{}", st.frames_stable)),
        );
    }
    for b in [0.0, 1.0, 2.0, 3.1, -1.0, -2.5] {
        println!("bearing {b:>5.2} rad -> leaf {}", sector_of(b));
    }
}

fn main() {
    run_example();
}
