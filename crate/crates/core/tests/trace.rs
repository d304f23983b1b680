use std::io::BufReader;

use sumbrella::pneumatics::Route;
use sumbrella::scenario::bundled;
use sumbrella::sim;
use sumbrella::trace::{columns, read_jsonl, write_trace, LeafRow, TraceError, TraceFormat, TraceRow};
use sumbrella::{Config, LeafSet};

fn row(tick: u64) -> TraceRow {
    let leaf = |i: usize| LeafRow {
        pressure_kpa: 24.987654321 - i as f64,
        popped: i % 2 == 0,
        winch_pos: 976.0 / (i + 1) as f64,
        curl_rad: 1.0 / 3.0,
        elev_rad: 1e-7 * tick as f64,
        route: [Route::Hold, Route::Inflate, Route::Exhaust][i],
        pump_duty: 0.123456789,
    };
    TraceRow {
        tick,
        t_s: tick as f64 * 0.02,
        fsm_mode: "avoidance[0|2]".into(),
        override_active: tick == 1,
        persons_within: tick as u32,
        min_dist_m: (tick > 0).then_some(1.23456789),
        obstacle_sectors: LeafSet::from_mask(0b101).unwrap(),
        leaves: [leaf(0), leaf(1), leaf(2)],
        entry_timeout: tick == 2,
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 5e-6 * a.abs().max(b.abs())
}

#[test]
fn csv_has_header_plus_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let rows: Vec<_> = (0..3).map(row).collect();
    write_trace(&rows, TraceFormat::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], columns().join(","));
    assert!(lines.iter().all(|l| l.split(',').count() == columns().len()));
    assert!(lines[1].starts_with("0,0,avoidance[0|2],0,0,,0|2,24.9877,1,976,0.333333,0,hold,0.123457,"), "{}", lines[1]);
}

#[test]
fn jsonl_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let rows: Vec<_> = (0..3).map(row).collect();
    write_trace(&rows, TraceFormat::Jsonl, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        let v: serde_json::Map<String, serde_json::Value> = serde_json::from_str(line).unwrap();
        let mut keys: Vec<_> = v.keys().cloned().collect();
        let mut cols = columns();
        keys.sort();
        cols.sort();
        assert_eq!(keys, cols);
    }

    let back = read_jsonl(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!((a.tick, &a.fsm_mode, a.override_active, a.persons_within), (b.tick, &b.fsm_mode, b.override_active, b.persons_within));
        assert_eq!(a.obstacle_sectors, b.obstacle_sectors);
        assert_eq!(a.entry_timeout, b.entry_timeout);
        assert!(close(a.t_s, b.t_s));
        assert_eq!(a.min_dist_m.is_some(), b.min_dist_m.is_some());
        if let (Some(x), Some(y)) = (a.min_dist_m, b.min_dist_m) {
            assert!(close(x, y));
        }
        for (p, q) in a.leaves.iter().zip(&b.leaves) {
            assert_eq!((p.popped, p.route), (q.popped, q.route));
            for (x, y) in [(p.pressure_kpa, q.pressure_kpa), (p.winch_pos, q.winch_pos), (p.curl_rad, q.curl_rad), (p.elev_rad, q.elev_rad), (p.pump_duty, q.pump_duty)] {
                assert!(close(x, y), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn real_run_round_trips_through_jsonl() {
    let out = sim::run(&bundled("manual_presets.json").unwrap(), &Config::default()).unwrap();
    let mut buf = Vec::new();
    sumbrella::trace::write_jsonl(&out.rows, &mut buf).unwrap();
    let back = read_jsonl(&buf[..]).unwrap();
    assert_eq!(back.len(), out.rows.len());
    let mut again = Vec::new();
    sumbrella::trace::write_jsonl(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn unwritable_destination_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("t.csv");
    let err = write_trace(&[row(0)], TraceFormat::Csv, &path).unwrap_err();
    assert!(matches!(err, TraceError::Io { .. }));
    assert!(err.to_string().contains("missing"), "{err}");
}

#[test]
fn empty_trace_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(write_trace(&[], TraceFormat::Jsonl, &dir.path().join("x")), Err(TraceError::Empty)));
}
