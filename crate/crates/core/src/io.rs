//! Trace, report and table serialization.
//!
//! JSON outputs carry every float as a hex literal. CSV outputs are meant
//! for plotting: decimal floats in shortest round-trip form, a leading
//! `# schema:` comment line, then a header row naming every column.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certificates::CheckReport;
use crate::error::{invalid, Result};
use crate::problem::CompositeProblem;
use crate::solvers::{SolverKind, Trace, DEFAULT_LABEL};

pub const TRACE_CSV_SCHEMA: &str = "proxgrad-trace/1";
pub const BOUNDS_CSV_SCHEMA: &str = "proxgrad-bounds/1";
pub const COMPARE_CSV_SCHEMA: &str = "proxgrad-compare/1";
pub const TRACE_JSON_SCHEMA: &str = "proxgrad-trace/1";
pub const REPORT_SCHEMA: &str = "proxgrad-report/1";

/// Schema name, column names and rows of a parsed table.
pub type ParsedTable = (String, Vec<String>, Vec<Vec<Option<f64>>>);

/// A plain table; `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    fn new(schema: &'static str, columns: &[&str]) -> Self {
        Table {
            schema,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# schema: {}", self.schema)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(
                row.iter()
                    .map(|c| c.map(|x| x.to_string()).unwrap_or_default()),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads back a table written by [`Table::write_csv`].
    pub fn read_csv(text: &str) -> Result<ParsedTable> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let schema = first
            .strip_prefix("# schema: ")
            .ok_or_else(|| invalid("missing schema line"))?
            .trim()
            .to_string();
        let mut r = csv::Reader::from_reader(rest.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| invalid(format!("bad number {c:?}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok((schema, columns, rows))
    }
}

/// Per-iteration trace table: scalars first, then the coordinates of `x^k`.
pub fn trace_table(trace: &Trace) -> Table {
    let mut cols: Vec<String> = [
        "k",
        "map_norm",
        "phi_x",
        "phi_y",
        "potential",
        "a",
        "b",
        "big_b",
        "elapsed_s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((0..trace.dim).map(|i| format!("x_{i}")));
    let rows = trace
        .records
        .iter()
        .map(|r| {
            let mut row = vec![
                Some(r.k as f64),
                Some(r.map_norm),
                Some(r.phi_x),
                r.phi_y,
                r.potential,
                r.weights.map(|w| w.a),
                r.weights.map(|w| w.b),
                r.weights.map(|w| w.big_b),
                Some(r.elapsed_s),
            ];
            row.extend(r.x.iter().map(|&c| Some(c)));
            row
        })
        .collect();
    Table {
        schema: TRACE_CSV_SCHEMA,
        columns: cols,
        rows,
    }
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    schema: String,
    #[serde(flatten)]
    trace: Trace,
}

pub fn trace_to_json(trace: &Trace) -> Result<String> {
    let file = TraceFile {
        schema: TRACE_JSON_SCHEMA.to_string(),
        trace: trace.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn trace_from_json(text: &str) -> Result<Trace> {
    let file: TraceFile = serde_json::from_str(text)?;
    if file.schema != TRACE_JSON_SCHEMA {
        return Err(invalid(format!(
            "unsupported trace schema {:?}",
            file.schema
        )));
    }
    if !file.trace.is_well_formed() {
        return Err(invalid("trace records are not indexed contiguously from 0"));
    }
    Ok(file.trace)
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    trace_from_json(&std::fs::read_to_string(path)?)
}

/// Outcome of one `run` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub fixture: String,
    pub solver: SolverKind,
    pub iterations: usize,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl RunReport {
    pub fn new(fixture: &str, trace: &Trace, checks: Vec<CheckReport>) -> Self {
        RunReport {
            schema: REPORT_SCHEMA.to_string(),
            fixture: fixture.to_string(),
            solver: trace.solver,
            iterations: trace.iterations(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<RunReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Human-readable summary, one line per check and link.
    pub fn render(&self) -> String {
        let mut s = format!(
            "{} on {} ({} iterations): {}\n",
            self.solver.name(),
            self.fixture,
            self.iterations,
            verdict(self.passed)
        );
        for c in &self.checks {
            s.push_str(&format!(
                "  {:<18} {:>6} samples  worst margin {:>12.4e}  {}\n",
                c.name,
                c.samples,
                c.worst_margin,
                verdict(c.passed)
            ));
            for l in &c.links {
                let status = match (&l.skipped, l.informational) {
                    (Some(why), _) => format!("skipped ({why})"),
                    (None, true) => "info".to_string(),
                    (None, false) => verdict(l.passed).to_string(),
                };
                s.push_str(&format!(
                    "    {:<24} {:>6}  {:>12.4e}  {}\n",
                    l.name, l.evaluated, l.worst_margin, status
                ));
            }
        }
        s
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Quantities shared by the bounds and comparison tables for one trace.
struct Envelope {
    /// `min_{i<=k} |G(x^i)|^2`
    min_sq: Vec<f64>,
    /// Squared-norm envelope at each `k`; `None` where undefined.
    bound: Vec<Option<f64>>,
}

fn gap0(trace: &Trace, phi_bar: f64) -> f64 {
    let r0 = &trace.records[0];
    r0.phi_y.unwrap_or(r0.phi_x) - phi_bar
}

/// `C~` from the weights stored on the trace itself.
fn trace_c_tilde(trace: &Trace, p: &CompositeProblem) -> Result<f64> {
    let reference = p.require_reference("accelerated envelope")?;
    let r0 = &trace.records[0];
    let w = r0
        .weights
        .ok_or_else(|| invalid("accelerated trace is missing weights"))?;
    let v0 =
        r0.v.as_ref()
            .ok_or_else(|| invalid("accelerated trace is missing v"))?;
    let phi_y0 = r0
        .phi_y
        .ok_or_else(|| invalid("accelerated trace is missing phi(y)"))?;
    Ok(w.a * r0.map_norm * r0.map_norm
        + w.b * (phi_y0 - reference.phi_bar)
        + trace.lip / 2.0 * (&reference.x_star - v0).norm_squared())
}

fn envelope(trace: &Trace, p: &CompositeProblem) -> Result<Envelope> {
    check_trace_matches(trace, p)?;
    let phi_bar = p.require_reference("rate envelope")?.phi_bar;
    let lip = trace.lip;
    let mut min_sq = Vec::with_capacity(trace.len());
    let mut cur = f64::INFINITY;
    for r in &trace.records {
        cur = cur.min(r.map_norm * r.map_norm);
        min_sq.push(cur);
    }
    let bound = match trace.solver {
        SolverKind::Pgd => {
            let eta = trace
                .eta
                .ok_or_else(|| invalid("pgd trace is missing eta"))?;
            let g0 = gap0(trace, phi_bar);
            trace
                .records
                .iter()
                .map(|r| (r.k > 0).then(|| lip * g0 / (eta * r.k as f64)))
                .collect()
        }
        SolverKind::Fgm | SolverKind::Apg => {
            let ct = trace_c_tilde(trace, p)?;
            let closed = trace.schedule.as_deref() == Some(DEFAULT_LABEL);
            let mut a_sum = 0.0;
            trace
                .records
                .iter()
                .map(|r| {
                    let k = r.k as f64;
                    a_sum += r.weights.map_or(f64::NAN, |w| w.a);
                    Some(if closed {
                        192.0 * lip * ct / ((k + 1.0) * (k + 2.0) * (2.0 * k + 3.0))
                    } else {
                        ct / a_sum
                    })
                })
                .collect()
        }
    };
    Ok(Envelope { min_sq, bound })
}

fn check_trace_matches(trace: &Trace, p: &CompositeProblem) -> Result<()> {
    if trace.problem != p.label {
        return Err(invalid(format!(
            "trace was produced on {:?}, not {:?}",
            trace.problem, p.label
        )));
    }
    if trace.dim != p.dim() || trace.lip != p.lip() {
        return Err(invalid("trace dimension or L does not match the fixture"));
    }
    if trace.is_empty() {
        return Err(invalid("empty trace"));
    }
    Ok(())
}

/// Per-k bound table for a run: the left- and right-hand sides of the rate
/// statements that apply to the trace's solver.
pub fn bounds_table(trace: &Trace, p: &CompositeProblem) -> Result<Table> {
    let env = envelope(trace, p)?;
    let phi_bar = p.require_reference("bounds table")?.phi_bar;
    match trace.solver {
        SolverKind::Pgd => {
            let eta = trace.eta.expect("checked by envelope");
            let g0 = gap0(trace, phi_bar);
            let mut t = Table::new(
                BOUNDS_CSV_SCHEMA,
                &[
                    "k",
                    "potential",
                    "scaled_norm_sq",
                    "initial_gap",
                    "min_norm_sq",
                    "norm_sq_envelope",
                ],
            );
            for (i, r) in trace.records.iter().enumerate() {
                let k = r.k as f64;
                t.rows.push(vec![
                    Some(k),
                    r.potential,
                    Some(eta * k / trace.lip * r.map_norm * r.map_norm),
                    Some(g0),
                    Some(env.min_sq[i]),
                    env.bound[i],
                ]);
            }
            Ok(t)
        }
        SolverKind::Fgm | SolverKind::Apg => {
            let ct = trace_c_tilde(trace, p)?;
            let mut t = Table::new(
                BOUNDS_CSV_SCHEMA,
                &[
                    "k",
                    "potential",
                    "c_tilde",
                    "obj_gap",
                    "obj_bound",
                    "weighted_norm_sum",
                    "min_norm_sq",
                    "norm_sq_envelope",
                ],
            );
            let mut weighted = 0.0;
            for (i, r) in trace.records.iter().enumerate() {
                let w = r.weights.expect("checked by envelope");
                weighted += w.a * r.map_norm * r.map_norm;
                t.rows.push(vec![
                    Some(r.k as f64),
                    r.potential,
                    Some(ct),
                    r.phi_y.map(|v| v - phi_bar),
                    Some(ct / w.big_b),
                    Some(weighted),
                    Some(env.min_sq[i]),
                    env.bound[i],
                ]);
            }
            Ok(t)
        }
    }
}

/// Side-by-side mapping norms, running minima of the squared norms, and the
/// squared-norm envelopes of two runs on the same fixture.
pub fn compare_table(a: &Trace, b: &Trace, p: &CompositeProblem) -> Result<Table> {
    let (ea, eb) = (envelope(a, p)?, envelope(b, p)?);
    let mut t = Table::new(
        COMPARE_CSV_SCHEMA,
        &[
            "k",
            "norm_a",
            "norm_b",
            "min_norm_sq_a",
            "min_norm_sq_b",
            "envelope_a",
            "envelope_b",
        ],
    );
    for k in 0..a.len().max(b.len()) {
        let na = a.records.get(k).map(|r| r.map_norm);
        let nb = b.records.get(k).map(|r| r.map_norm);
        t.rows.push(vec![
            Some(k as f64),
            na,
            nb,
            ea.min_sq.get(k).copied(),
            eb.min_sq.get(k).copied(),
            ea.bound.get(k).copied().flatten(),
            eb.bound.get(k).copied().flatten(),
        ]);
    }
    Ok(t)
}
