//! Per-tick trace rows and their CSV / JSONL encodings.
//!
//! Both encodings carry the same columns in the same order. Reals are
//! printed with six significant digits in `%g` style, independent of locale.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::leaf::{LeafSet, PerLeaf, NUM_LEAVES};
use crate::pneumatics::Route;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafRow {
    pub pressure_kpa: f64,
    pub popped: bool,
    pub winch_pos: f64,
    pub curl_rad: f64,
    pub elev_rad: f64,
    pub route: Route,
    pub pump_duty: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub tick: u64,
    pub t_s: f64,
    pub fsm_mode: String,
    pub override_active: bool,
    pub persons_within: u32,
    pub min_dist_m: Option<f64>,
    pub obstacle_sectors: LeafSet,
    pub leaves: PerLeaf<LeafRow>,
    /// An entry phase of the current mode advanced on timeout.
    pub entry_timeout: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Jsonl,
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" => Ok(TraceFormat::Jsonl),
            other => Err(format!("unknown trace format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("refusing to write an empty trace")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
}

const LEAF_COLUMNS: [&str; 7] = ["pressure_kpa", "popped", "winch_pos", "curl_rad", "elev_rad", "route", "pump_duty"];

pub fn columns() -> Vec<String> {
    let mut cols: Vec<String> =
        ["tick", "t_s", "fsm_mode", "override_active", "persons_within", "min_dist_m", "obstacle_sectors"]
            .map(String::from)
            .into();
    for leaf in 0..NUM_LEAVES {
        cols.extend(LEAF_COLUMNS.iter().map(|c| format!("{c}_{leaf}")));
    }
    cols.push("entry_timeout".into());
    cols
}

/// `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    strip_zeros(&format!("{x:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

enum Cell {
    Int(u64),
    Real(f64),
    Bool(bool),
    Text(String),
    Missing,
}

fn cells(row: &TraceRow) -> Vec<Cell> {
    let mut out = vec![
        Cell::Int(row.tick),
        Cell::Real(row.t_s),
        Cell::Text(row.fsm_mode.clone()),
        Cell::Bool(row.override_active),
        Cell::Int(row.persons_within as u64),
        row.min_dist_m.map_or(Cell::Missing, Cell::Real),
        Cell::Text(row.obstacle_sectors.to_string()),
    ];
    for l in &row.leaves {
        out.extend([
            Cell::Real(l.pressure_kpa),
            Cell::Bool(l.popped),
            Cell::Real(l.winch_pos),
            Cell::Real(l.curl_rad),
            Cell::Real(l.elev_rad),
            Cell::Text(l.route.as_str().to_string()),
            Cell::Real(l.pump_duty),
        ]);
    }
    out.push(Cell::Bool(row.entry_timeout));
    out
}

pub fn write_csv<W: Write>(rows: &[TraceRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", columns().join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (i, cell) in cells(row).into_iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match cell {
                Cell::Int(v) => write!(line, "{v}").unwrap(),
                Cell::Real(v) => line.push_str(&fmt_g6(v)),
                Cell::Bool(v) => line.push(if v { '1' } else { '0' }),
                Cell::Text(s) => line.push_str(&s),
                Cell::Missing => {}
            }
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn write_jsonl<W: Write>(rows: &[TraceRow], mut w: W) -> io::Result<()> {
    let names = columns();
    let mut line = String::new();
    for row in rows {
        line.clear();
        line.push('{');
        for (i, (name, cell)) in names.iter().zip(cells(row)).enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "\"{name}\":").unwrap();
            match cell {
                Cell::Int(v) => write!(line, "{v}").unwrap(),
                Cell::Real(v) if v.is_finite() => line.push_str(&fmt_g6(v)),
                Cell::Real(_) | Cell::Missing => line.push_str("null"),
                Cell::Bool(v) => write!(line, "{v}").unwrap(),
                Cell::Text(s) => line.push_str(&Value::String(s).to_string()),
            }
        }
        line.push('}');
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn write_trace(rows: &[TraceRow], format: TraceFormat, destination: &Path) -> Result<(), TraceError> {
    if rows.is_empty() {
        return Err(TraceError::Empty);
    }
    let io_err = |source| TraceError::Io { path: destination.display().to_string(), source };
    let file = std::fs::File::create(destination).map_err(io_err)?;
    let w = io::BufWriter::new(file);
    match format {
        TraceFormat::Csv => write_csv(rows, w),
        TraceFormat::Jsonl => write_jsonl(rows, w),
    }
    .map_err(io_err)
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<TraceRow>, TraceError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| TraceError::Io { path: "<reader>".into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| TraceError::Parse { line: i + 1, message };
        let obj: Map<String, Value> = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        rows.push(row_from_object(&obj).map_err(parse_err)?);
    }
    Ok(rows)
}

fn row_from_object(obj: &Map<String, Value>) -> Result<TraceRow, String> {
    let get = |k: &str| obj.get(k).ok_or_else(|| format!("missing `{k}`"));
    let real = |k: &str| get(k)?.as_f64().ok_or_else(|| format!("`{k}` is not a number"));
    let int = |k: &str| get(k)?.as_u64().ok_or_else(|| format!("`{k}` is not an integer"));
    let boolean = |k: &str| get(k)?.as_bool().ok_or_else(|| format!("`{k}` is not a bool"));
    let text = |k: &str| get(k)?.as_str().ok_or_else(|| format!("`{k}` is not a string"));

    let mut leaves = [LeafRow {
        pressure_kpa: 0.0,
        popped: false,
        winch_pos: 0.0,
        curl_rad: 0.0,
        elev_rad: 0.0,
        route: Route::Hold,
        pump_duty: 0.0,
    }; NUM_LEAVES];
    for (i, l) in leaves.iter_mut().enumerate() {
        let route = text(&format!("route_{i}"))?;
        *l = LeafRow {
            pressure_kpa: real(&format!("pressure_kpa_{i}"))?,
            popped: boolean(&format!("popped_{i}"))?,
            winch_pos: real(&format!("winch_pos_{i}"))?,
            curl_rad: real(&format!("curl_rad_{i}"))?,
            elev_rad: real(&format!("elev_rad_{i}"))?,
            route: route.parse()?,
            pump_duty: real(&format!("pump_duty_{i}"))?,
        };
    }
    let min_dist_m = match get("min_dist_m")? {
        Value::Null => None,
        v => Some(v.as_f64().ok_or("`min_dist_m` is not a number")?),
    };
    Ok(TraceRow {
        tick: int("tick")?,
        t_s: real("t_s")?,
        fsm_mode: text("fsm_mode")?.to_string(),
        override_active: boolean("override_active")?,
        persons_within: int("persons_within")? as u32,
        min_dist_m,
        obstacle_sectors: text("obstacle_sectors")?.parse()?,
        leaves,
        entry_timeout: boolean("entry_timeout")?,
    })
}
