//! Line-oriented front ends: streaming monitor, one-shot test, power grid.

use std::io::{BufRead, Write};

use crate::config::{Hypothesis, RunConfig};
use crate::eprocess::{EProcess, StepRecord};
use crate::error::{Error, Result};
use crate::format::fmt12;
use crate::sim::{run_power_grid, PowerGrid, PowerStudy};
use crate::transforms::CalibrationValue;

/// Parses one data row for `hypothesis`.
pub fn parse_row(line: &str, hypothesis: Hypothesis) -> std::result::Result<CalibrationValue, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let float = |s: &str| s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"));
    let unit = |s: &str| {
        let z = float(s)?;
        if (0.0..=1.0).contains(&z) {
            Ok(z)
        } else {
            Err(format!("value {s} outside [0, 1]"))
        }
    };
    match hypothesis {
        Hypothesis::Quantile { .. } => {
            let [u, l] = fields[..] else {
                return Err(format!("expected two columns z_u,z_l, found {}", fields.len()));
            };
            let (upper, lower) = (unit(u)?, unit(l)?);
            if upper > lower {
                return Err(format!("z_u = {u} exceeds z_l = {l}"));
            }
            Ok(CalibrationValue::QuantilePit { upper, lower })
        }
        _ if fields.len() != 1 => Err(format!("expected one column, found {}", fields.len())),
        Hypothesis::Duf { categories } => {
            let r: usize = fields[0].parse().map_err(|_| format!("'{}' is not a rank", fields[0]))?;
            if r == 0 || r > categories {
                return Err(format!("rank {r} outside 1..={categories}"));
            }
            Ok(CalibrationValue::Rank { rank: r, members: categories - 1 })
        }
        _ => Ok(CalibrationValue::Pit(unit(fields[0])?)),
    }
}

fn looks_like_header(line: &str) -> bool {
    line.split(',').next().is_some_and(|f| f.trim().parse::<f64>().is_err())
}

/// Reads rows, skipping blank lines and a leading header. Malformed rows are
/// reported on `diag` and skipped, or abort the run when `strict`.
pub struct RowReader<R, D> {
    input: R,
    diag: D,
    hypothesis: Hypothesis,
    strict: bool,
    line_no: usize,
    seen_data: bool,
    buf: String,
}

impl<R: BufRead, D: Write> RowReader<R, D> {
    pub fn new(input: R, diag: D, hypothesis: Hypothesis, strict: bool) -> Self {
        Self { input, diag, hypothesis, strict, line_no: 0, seen_data: false, buf: String::new() }
    }

    pub fn next_value(&mut self) -> Result<Option<CalibrationValue>> {
        loop {
            self.buf.clear();
            if self.input.read_line(&mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            if !self.seen_data && self.line_no == 1 && looks_like_header(line) {
                continue;
            }
            match parse_row(line, self.hypothesis) {
                Ok(v) => {
                    self.seen_data = true;
                    return Ok(Some(v));
                }
                Err(msg) if self.strict => return Err(Error::Parse { line: self.line_no, msg }),
                Err(msg) => writeln!(self.diag, "line {}: {msg}; row skipped", self.line_no)?,
            }
        }
    }

    pub fn read_all(&mut self) -> Result<Vec<CalibrationValue>> {
        let mut out = Vec::new();
        while let Some(v) = self.next_value()? {
            out.push(v);
        }
        Ok(out)
    }
}

fn value_columns(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::Quantile { .. } => "z_u,z_l",
        _ => "value",
    }
}

fn value_fields(v: CalibrationValue) -> String {
    match v {
        CalibrationValue::Pit(z) => fmt12(z),
        CalibrationValue::Rank { rank, .. } => rank.to_string(),
        CalibrationValue::QuantilePit { upper, lower } => format!("{},{}", fmt12(upper), fmt12(lower)),
    }
}

/// CSV line of one step record.
pub fn record_fields(r: &StepRecord) -> String {
    format!(
        "{},{},{},{},{}",
        fmt12(r.evalue),
        fmt12(r.e),
        fmt12(r.running_max),
        fmt12(r.p),
        r.tau_h_statistic.map(fmt12).unwrap_or_default()
    )
}

/// Streams per-step records of the e-process for each input row, flushing
/// after every row. Returns the number of data rows.
pub fn cmd_monitor<R: BufRead, W: Write, D: Write>(
    cfg: &RunConfig,
    input: R,
    mut output: W,
    diag: D,
    strict: bool,
) -> Result<usize> {
    let mut bettor = cfg.bettor()?;
    let mut process = EProcess::new(cfg.lag)?;
    writeln!(output, "t,{},E_t,e_t,running_max,p_t,tau_h_statistic", value_columns(cfg.hypothesis))?;
    output.flush()?;
    let mut rows = RowReader::new(input, diag, cfg.hypothesis, strict);
    while let Some(v) = rows.next_value()? {
        let rec = process.push(bettor.next(v)?)?;
        writeln!(output, "{},{},{}", rec.t, value_fields(v), record_fields(&rec))?;
        output.flush()?;
    }
    Ok(process.len())
}

/// Single-line result of [`cmd_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub method: String,
    pub n: usize,
    /// Test statistic for baselines, running maximum of `e_t` for e-values.
    pub statistic_or_e: f64,
    pub p: f64,
    /// Final `e_t` for e-value methods.
    pub final_e: Option<f64>,
}

impl TestOutcome {
    pub fn line(&self) -> String {
        format!("{},{},{},{}", self.method, self.n, fmt12(self.statistic_or_e), fmt12(self.p))
    }
}

/// Evaluates a whole file with a baseline or an e-value method.
pub fn cmd_test<R: BufRead, D: Write>(cfg: &RunConfig, input: R, diag: D, strict: bool) -> Result<TestOutcome> {
    let values = RowReader::new(input, diag, cfg.hypothesis, strict).read_all()?;
    let method = cfg.label();
    if !cfg.test.is_evalue() {
        let r = cfg.baseline(&values)?;
        return Ok(TestOutcome { method, n: r.n, statistic_or_e: r.statistic, p: r.p_value, final_e: None });
    }
    let mut bettor = cfg.bettor()?;
    let mut process = EProcess::new(cfg.lag)?;
    for v in &values {
        process.push(bettor.next(*v)?)?;
    }
    Ok(TestOutcome {
        method,
        n: values.len(),
        statistic_or_e: process.running_max(),
        p: process.anytime_p(),
        final_e: Some(process.current()),
    })
}

/// Runs a power study, writes its CSV to `output` and the summary to `diag`.
pub fn cmd_simulate<W: Write, D: Write>(study: &PowerStudy, output: W, mut diag: D) -> Result<PowerGrid> {
    let grid = run_power_grid(study)?;
    grid.write_csv(output)?;
    for line in grid.summary() {
        writeln!(diag, "{line}")?;
    }
    Ok(grid)
}
