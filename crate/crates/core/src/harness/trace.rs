//! Simulation traces, their CSV form and summary metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::HarnessError;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: i64,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub y_star: Vec<f64>,
    /// `y* - y`.
    pub e: Vec<f64>,
    /// Cost at the optimum; absent before the first control step.
    pub cost: Option<f64>,
    /// Row-major PJM entries.
    pub phi: Vec<f64>,
    pub max_pole: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub outputs: usize,
    pub inputs: usize,
    pub phi_len: usize,
    pub rows: Vec<TraceRow>,
    /// Step at which the trajectory left the finite bound, if it did.
    pub diverged_at: Option<i64>,
}

impl SimTrace {
    pub fn new(outputs: usize, inputs: usize, phi_len: usize) -> Self {
        SimTrace {
            outputs,
            inputs,
            phi_len,
            rows: Vec::new(),
            diverged_at: None,
        }
    }

    pub fn push(&mut self, row: TraceRow) {
        debug_assert_eq!(row.y.len(), self.outputs);
        debug_assert_eq!(row.u.len(), self.inputs);
        debug_assert_eq!(row.phi.len(), self.phi_len);
        self.rows.push(row);
    }

    pub fn row(&self, k: i64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["k".to_string()];
        for (name, n) in [("y", self.outputs), ("u", self.inputs), ("ystar", self.outputs), ("e", self.outputs)] {
            h.extend((1..=n).map(|i| format!("{name}_{i}")));
        }
        h.push("J".into());
        h.extend((1..=self.phi_len).map(|i| format!("phi_{i}")));
        h.push("max_pole".into());
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![r.k.to_string()];
            for v in [&r.y, &r.u, &r.y_star, &r.e] {
                cells.extend(v.iter().map(|&x| fmt_sig(x)));
            }
            cells.push(r.cost.map(fmt_sig).unwrap_or_default());
            cells.extend(r.phi.iter().map(|&x| fmt_sig(x)));
            cells.push(r.max_pole.map(fmt_sig).unwrap_or_default());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let bad = |line: usize, msg: &str| HarnessError::Config(format!("csv line {line}: {msg}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad(1, "missing header"))?.split(',').collect();
        let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
        let (outputs, inputs, phi_len) = (count("y_"), count("u_"), count("phi_"));
        let mut trace = SimTrace::new(outputs, inputs, phi_len);
        if trace.header() != header {
            return Err(bad(1, "unexpected header"));
        }
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(bad(i + 2, "wrong number of cells"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "bad number"));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            let mut at = 1;
            let mut take = |n: usize| -> Result<Vec<f64>, HarnessError> {
                let v = cells[at..at + n].iter().map(|s| num(s)).collect();
                at += n;
                v
            };
            let y = take(outputs)?;
            let u = take(inputs)?;
            let y_star = take(outputs)?;
            let e = take(outputs)?;
            let cost = opt(cells[1 + 3 * outputs + inputs])?;
            let phi_start = 2 + 3 * outputs + inputs;
            let phi = cells[phi_start..phi_start + phi_len]
                .iter()
                .map(|s| num(s))
                .collect::<Result<_, _>>()?;
            trace.rows.push(TraceRow {
                k: cells[0].parse().map_err(|_| bad(i + 2, "bad step index"))?,
                y,
                u,
                y_star,
                e,
                cost,
                phi,
                max_pole: opt(cells[phi_start + phi_len])?,
            });
        }
        Ok(trace)
    }
}

/// Formats with 12 significant digits, fixed-point where that stays short.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
        s.to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn export_csv(trace: &SimTrace, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, trace.to_csv()).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<SimTrace, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SimTrace::from_csv(&text)
}

/// Rows averaged for the steady-state error of a segment.
pub const STEADY_WINDOW: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentStats {
    pub start: i64,
    pub end: i64,
    pub rms: f64,
    /// Largest per-output mean `|e|` over the last rows of the segment.
    pub steady: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub rms: f64,
    pub segments: Vec<SegmentStats>,
    pub final_steady_error: Option<f64>,
    pub diverged_at: Option<i64>,
    pub max_pole: Option<f64>,
}

fn rms(rows: &[TraceRow]) -> f64 {
    let n: usize = rows.iter().map(|r| r.e.len()).sum();
    if n == 0 {
        return 0.0;
    }
    (rows.iter().flat_map(|r| r.e.iter()).map(|e| e * e).sum::<f64>() / n as f64).sqrt()
}

/// Mean `|e_i|` over `rows`, maximized over outputs.
pub fn mean_abs_error(rows: &[TraceRow]) -> f64 {
    let m = rows.first().map(|r| r.e.len()).unwrap_or(0);
    (0..m)
        .map(|i| rows.iter().map(|r| r.e[i].abs()).sum::<f64>() / rows.len() as f64)
        .fold(0.0, f64::max)
}

/// Per-segment metrics; `segment_starts` are the reference switch times.
pub fn summarize(trace: &SimTrace, segment_starts: &[i64]) -> Summary {
    let last = trace.rows.last().map(|r| r.k).unwrap_or(0);
    let mut segments = Vec::new();
    for (i, &start) in segment_starts.iter().enumerate() {
        if start > last {
            break;
        }
        let end = segment_starts.get(i + 1).map(|s| s - 1).unwrap_or(last).min(last);
        let rows: Vec<TraceRow> = trace.rows.iter().filter(|r| r.k >= start && r.k <= end).cloned().collect();
        let steady = (rows.len() >= STEADY_WINDOW).then(|| mean_abs_error(&rows[rows.len() - STEADY_WINDOW..]));
        segments.push(SegmentStats {
            start,
            end,
            rms: rms(&rows),
            steady,
        });
    }
    let max_pole = trace
        .rows
        .iter()
        .filter_map(|r| r.max_pole)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))));
    Summary {
        rows: trace.rows.len(),
        rms: rms(&trace.rows),
        final_steady_error: segments.last().and_then(|s| s.steady),
        segments,
        diverged_at: trace.diverged_at,
        max_pole,
    }
}

impl Summary {
    pub fn render(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {name}");
        let _ = writeln!(s, "rows: {}", self.rows);
        let _ = writeln!(s, "rms_error: {}", fmt_sig(self.rms));
        match self.final_steady_error {
            Some(e) => {
                let _ = writeln!(s, "final_steady_error: {}", fmt_sig(e));
            }
            None => {
                let _ = writeln!(s, "final_steady_error: n/a");
            }
        }
        match self.diverged_at {
            Some(k) => {
                let _ = writeln!(s, "diverged: yes (step {k})");
            }
            None => {
                let _ = writeln!(s, "diverged: no");
            }
        }
        if let Some(p) = self.max_pole {
            let _ = writeln!(s, "max_pole: {}", fmt_sig(p));
        }
        let _ = writeln!(s, "segments:");
        let _ = writeln!(s, "  start    end  rms           steady");
        for seg in &self.segments {
            let steady = seg.steady.map(fmt_sig).unwrap_or_else(|| "n/a".into());
            let _ = writeln!(s, "  {:>5}  {:>5}  {:<12}  {}", seg.start, seg.end, fmt_sig(seg.rms), steady);
        }
        s
    }
}
