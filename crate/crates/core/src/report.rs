//! Run configuration, pipelines and table output for the command-line
//! front end.
//!
//! Every pipeline renders into a `String`; numbers are rounded to 15
//! significant digits and then printed in shortest round-trip form, so
//! equal configurations produce byte-identical artifacts.

use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::checks;
use crate::density::{self, ModelComparison};
use crate::error::{Error, Result};
use crate::mertens::{self, MertensSample};
use crate::prime_count::PrimeCounter;
use crate::rgflow::{self, Anchor, QuadraticVectorField};

/// Exact CSV header of the `report` table.
pub const REPORT_HEADER: &str =
    "n,pi,density,inv_log,li_over_n,fbar,residual,rg_pred,scale_lhs,scale_rhs,scale_rel_err";

/// Counts at or below this are recomputed by the sieve during a run and
/// compared with the sublinear counter.
pub const CROSS_CHECK_BOUND: u64 = 100_000_000;

const FLOW_BATCH: usize = 200;
const GROUP_LAW_BATCH: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Pi,
    Mertens,
    Density,
    Flow,
    ScaleCheck,
    Report,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// Scales to evaluate: an explicit list or `start:stop:points-per-decade`.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    List(Vec<u64>),
    LogSpaced {
        start: u64,
        stop: u64,
        per_decade: u32,
    },
}

fn parse_natural(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    if let Some((base, exp)) = s.split_once('^') {
        let base: u64 = base
            .parse()
            .map_err(|_| Error::Config(format!("bad number {s:?}")))?;
        let exp: u32 = exp
            .parse()
            .map_err(|_| Error::Config(format!("bad number {s:?}")))?;
        return base
            .checked_pow(exp)
            .ok_or_else(|| Error::Config(format!("{s} overflows")));
    }
    // scientific notation such as 1e6 or 2.5e9, accepted only when integral
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Config(format!("bad number {s:?}")))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 {
        Ok(x as u64)
    } else {
        Err(Error::Config(format!("{s:?} is not a natural number")))
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, ppd] => Ok(Self::LogSpaced {
                start: parse_natural(start)?,
                stop: parse_natural(stop)?,
                per_decade: ppd
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad points-per-decade {ppd:?}")))?,
            }),
            [list] => list
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(parse_natural)
                .collect::<Result<Vec<_>>>()
                .map(Self::List),
            _ => Err(Error::Config(format!(
                "grid must be start:stop:ppd or a comma list, got {s:?}"
            ))),
        }
    }
}

impl GridSpec {
    /// Expands to a strictly increasing list of scales.
    ///
    /// Log-spaced points are start·10^{k/ppd} for every k that stays below
    /// `stop`, rounded to the nearest integer and deduplicated.
    pub fn expand(&self) -> Result<Vec<u64>> {
        let grid = match self {
            Self::List(points) => points.clone(),
            Self::LogSpaced {
                start,
                stop,
                per_decade,
            } => {
                if *per_decade < 1 {
                    return Err(Error::Config("points per decade must be >= 1".into()));
                }
                if start == &0 || start > stop {
                    return Err(Error::Config(format!("bad grid range {start}..{stop}")));
                }
                let decades = (*stop as f64 / *start as f64).log10();
                let last = (decades * f64::from(*per_decade) + 1e-9).floor() as u32;
                let mut points: Vec<u64> = (0..=last)
                    .map(|k| {
                        let exponent = f64::from(k) / f64::from(*per_decade);
                        (*start as f64 * 10f64.powf(exponent)).round() as u64
                    })
                    .map(|p| p.min(*stop))
                    .collect();
                points.dedup();
                points
            }
        };
        if grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if let Some(i) = grid.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "grid is not strictly increasing at position {}",
                i + 1
            )));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub n: Option<u64>,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub t: Option<f64>,
    pub d0: Option<f64>,
    pub order: Option<usize>,
    pub grid: Option<GridSpec>,
    pub limits: PrimeCounter,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            n: None,
            n1: None,
            n2: None,
            t: None,
            d0: None,
            order: None,
            grid: None,
            limits: PrimeCounter::default(),
            format: OutputFormat::Csv,
            out: None,
            seed: checks::DEFAULT_SEED,
        }
    }

    /// `--grid` if given, otherwise the single point `--n`.
    fn scales(&self) -> Result<Vec<u64>> {
        match (&self.grid, self.n) {
            (Some(grid), _) => grid.expand(),
            (None, Some(n)) => Ok(vec![n]),
            (None, None) => Err(Error::Config("need --n or --grid".into())),
        }
    }
}

fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing {flag}")))
}

/// Rounds to 15 significant digits.
fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

/// Shortest round-trip text of `x` rounded to 15 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{}", round15(x))
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round15(x)).map_or(Value::Null, Value::Number)
}

/// A rectangular table rendered either as CSV or as a JSON array of objects.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Copy)]
enum Cell {
    Int(u64),
    Real(f64),
    Empty,
}

impl Cell {
    fn csv(self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) => format_number(x),
            Cell::Empty => String::new(),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Int(n) => json!(n),
            Cell::Real(x) => num(x),
            Cell::Empty => Value::Null,
        }
    }
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.csv()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| ((*k).to_string(), c.json()))
                    .collect();
                Value::Object(object)
            })
            .collect()
    }

    /// One object for a single row, an array otherwise.
    fn json(&self) -> Value {
        let mut rows = self.json_rows();
        if rows.len() == 1 {
            rows.pop().expect("one row")
        } else {
            Value::Array(rows)
        }
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.csv(),
            OutputFormat::Json => json_text(&self.json()),
        }
    }
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("values are serializable");
    text.push('\n');
    text
}

fn verify(condition: bool, what: impl FnOnce() -> String) -> Result<()> {
    if condition {
        Ok(())
    } else {
        Err(Error::Verification(what()))
    }
}

/// π at each scale from the sublinear counter, cross-checked against the
/// sieve wherever that is cheap.
fn counts(limits: &PrimeCounter, grid: &[u64]) -> Result<Vec<u64>> {
    let fast: Vec<u64> = grid
        .iter()
        .map(|&n| limits.pi(n).map(|p| p.count))
        .collect::<Result<_>>()?;
    let checked: Vec<u64> = grid
        .iter()
        .copied()
        .filter(|&n| n <= CROSS_CHECK_BOUND.min(limits.sieve_limit))
        .collect();
    let sieved = limits.pi_sieve_many(&checked)?;
    for (pp, fast) in sieved.iter().zip(&fast) {
        verify(pp.count == *fast, || {
            format!("π({}) differs: sieve {} vs fast {}", pp.n, pp.count, fast)
        })?;
    }
    verify(fast.windows(2).all(|w| w[0] <= w[1]), || {
        "π is not monotone along the grid".into()
    })?;
    Ok(fast)
}

fn run_pi(config: &RunConfig) -> Result<String> {
    let grid = config.scales()?;
    let pis = counts(&config.limits, &grid)?;
    let mut table = Table::new(&["n", "pi"]);
    for (n, pi) in grid.iter().zip(pis) {
        table.push(vec![Cell::Int(*n), Cell::Int(pi)]);
    }
    Ok(table.render(config.format))
}

fn mertens_samples(config: &RunConfig, grid: &[u64]) -> Result<Vec<MertensSample<f64>>> {
    if grid[0] < mertens::MIN_LAMBDA {
        return Err(Error::Config(format!(
            "Mertens cutoffs must be >= {}",
            mertens::MIN_LAMBDA
        )));
    }
    let samples = mertens::mertens_residual_curve_with_limit(grid, config.limits.sieve_limit)?;
    verify(samples.windows(2).all(|w| w[0].sum < w[1].sum), || {
        "reciprocal-prime sums are not increasing".into()
    })?;
    Ok(samples)
}

fn run_mertens(config: &RunConfig) -> Result<String> {
    let grid = config.scales()?;
    let mut table = Table::new(&["lambda", "sum", "loglog", "fbar", "residual"]);
    for s in mertens_samples(config, &grid)? {
        table.push(vec![
            Cell::Int(s.lambda),
            Cell::Real(s.sum),
            Cell::Real(s.loglog),
            Cell::Real(s.fbar),
            Cell::Real(s.residual),
        ]);
    }
    Ok(table.render(config.format))
}

fn comparisons(config: &RunConfig, grid: &[u64]) -> Result<Vec<ModelComparison<f64>>> {
    if grid[0] < 3 {
        return Err(Error::Config("density scales must be >= 3".into()));
    }
    let pis = counts(&config.limits, grid)?;
    grid.iter()
        .zip(pis)
        .map(|(&n, count)| {
            let sample =
                density::DensitySample::from_count(crate::prime_count::PrimePi { n, count })?;
            verify(sample.density > 0.0 && sample.density <= 1.0, || {
                format!("density at {n} outside (0, 1]")
            })?;
            ModelComparison::from_sample(sample)
        })
        .collect()
}

fn run_density(config: &RunConfig) -> Result<String> {
    let grid = config.scales()?;
    let mut table = Table::new(&[
        "n",
        "pi",
        "density",
        "inv_density",
        "log_n",
        "inv_log",
        "li_over_n",
        "rel_err_invlog",
        "rel_err_li",
    ]);
    for c in comparisons(config, &grid)? {
        let s = c.sample;
        table.push(vec![
            Cell::Int(s.n),
            Cell::Int(s.pi),
            Cell::Real(s.density),
            Cell::Real(s.inv_density),
            Cell::Real(s.log_n),
            Cell::Real(c.inv_log),
            Cell::Real(c.li_over_n),
            Cell::Real(c.rel_err_invlog),
            Cell::Real(c.rel_err_li),
        ]);
    }
    Ok(table.render(config.format))
}

fn run_flow(config: &RunConfig) -> Result<String> {
    let t = required(config.t, "--t")?;
    let d0 = required(config.d0, "--d0")?;
    let closed = rgflow::flow_closed_form(t, d0)?;
    let series = config
        .order
        .map(|order| rgflow::flow_series(t, d0, order))
        .transpose()?;
    let numeric = rgflow::flow_numeric(
        t,
        d0,
        QuadraticVectorField::prime_density(),
        rgflow::default_steps(t),
    )?;
    let mut table = Table::new(&["t", "d0", "closed_form", "series", "numeric"]);
    table.push(vec![
        Cell::Real(t),
        Cell::Real(d0),
        Cell::Real(closed),
        series.map_or(Cell::Empty, Cell::Real),
        Cell::Real(numeric),
    ]);
    Ok(table.render(config.format))
}

fn run_scale_check(config: &RunConfig) -> Result<String> {
    let n1 = required(config.n1, "--n1")?;
    let n2 = required(config.n2, "--n2")?;
    if n1 == n2 {
        return Err(Error::Config(format!("--n1 and --n2 are both {n1}")));
    }
    let (lo, hi) = (n1.min(n2), n1.max(n2));
    let pis = counts(&config.limits, &[lo, hi])?;
    let sample = |n: u64| {
        let count = if n == lo { pis[0] } else { pis[1] };
        density::DensitySample::<f64>::from_count(crate::prime_count::PrimePi { n, count })
    };
    let record = rgflow::scale_relation_check(&sample(n1)?, &sample(n2)?)?;
    let mut table = Table::new(&["n1", "n2", "lhs", "rhs", "abs_err", "rel_err"]);
    table.push(vec![
        Cell::Int(record.n1),
        Cell::Int(record.n2),
        Cell::Real(record.lhs),
        Cell::Real(record.rhs),
        Cell::Real(record.abs_err),
        Cell::Real(record.rel_err),
    ]);
    Ok(table.render(config.format))
}

/// Per-scale rows of the combined report, in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub comparison: ModelComparison<f64>,
    pub mertens: MertensSample<f64>,
    pub rg_pred: f64,
    /// (lhs, rhs, rel_err) against the previous grid point.
    pub scale: Option<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub grid: Vec<u64>,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub flow: checks::FlowAgreement,
    pub group_law_max: f64,
    pub transitivity_max: f64,
}

/// Builds the multi-section report over an expanded grid and runs the
/// seeded flow verification batches.
pub fn emit_report(config: &RunConfig, grid: &[u64]) -> Result<Report> {
    if grid.is_empty() {
        return Err(Error::Config("grid is empty".into()));
    }
    let comparisons = comparisons(config, grid)?;
    let mertens = mertens_samples(config, grid)?;
    let anchor = Anchor::from(&comparisons[0].sample);

    let mut rows = Vec::with_capacity(grid.len());
    for (i, (comparison, m)) in comparisons.iter().zip(mertens).enumerate() {
        let prediction = rgflow::predict_from(comparison.sample.n, anchor)?;
        let scale = if i == 0 {
            None
        } else {
            let r = rgflow::scale_relation_check(&comparison.sample, &comparisons[i - 1].sample)?;
            Some((r.lhs, r.rhs, r.rel_err))
        };
        verify((m.fbar - m.sum / m.loglog).abs() == 0.0, || {
            format!("F̄ inconsistent at {}", m.lambda)
        })?;
        rows.push(ReportRow {
            comparison: *comparison,
            mertens: m,
            rg_pred: prediction.density,
            scale,
        });
    }

    let flow = checks::flow_agreement(config.seed, FLOW_BATCH, None)?;
    verify(flow.worst() <= 1e-9, || {
        format!("flow realisations disagree by {}", flow.worst())
    })?;
    let group_law_max = checks::group_law_max(config.seed, GROUP_LAW_BATCH)?;
    verify(group_law_max <= 1e-12, || {
        format!("group law residual {group_law_max}")
    })?;
    let transitivity_max = checks::transitivity_max(config.seed, GROUP_LAW_BATCH)?;
    verify(transitivity_max <= 1e-12, || {
        format!("prediction transitivity residual {transitivity_max}")
    })?;

    Ok(Report {
        grid: grid.to_vec(),
        seed: config.seed,
        rows,
        flow,
        group_law_max,
        transitivity_max,
    })
}

impl Report {
    fn table(&self) -> Table {
        let columns: Vec<&'static str> = REPORT_HEADER.split(',').collect();
        let mut table = Table::new(&columns);
        for row in &self.rows {
            let c = &row.comparison;
            let (lhs, rhs, rel) = row
                .scale
                .map_or((Cell::Empty, Cell::Empty, Cell::Empty), |(l, r, e)| {
                    (Cell::Real(l), Cell::Real(r), Cell::Real(e))
                });
            table.push(vec![
                Cell::Int(c.sample.n),
                Cell::Int(c.sample.pi),
                Cell::Real(c.sample.density),
                Cell::Real(c.inv_log),
                Cell::Real(c.li_over_n),
                Cell::Real(row.mertens.fbar),
                Cell::Real(row.mertens.residual),
                Cell::Real(row.rg_pred),
                lhs,
                rhs,
                rel,
            ]);
        }
        table
    }

    pub fn csv(&self) -> String {
        self.table().csv()
    }

    pub fn json(&self) -> Value {
        json!({
            "grid": self.grid,
            "seed": self.seed,
            "rows": self.table().json_rows(),
            "verification": {
                "flow_samples": self.flow.samples,
                "flow_max_disagreement": num(self.flow.worst()),
                "group_law_samples": GROUP_LAW_BATCH,
                "group_law_max_residual": num(self.group_law_max),
                "transitivity_max_residual": num(self.transitivity_max),
            },
        })
    }
}

fn run_report(config: &RunConfig) -> Result<String> {
    let grid = match &config.grid {
        Some(grid) => grid.expand()?,
        None => return Err(Error::Config("report needs --grid".into())),
    };
    let report = emit_report(config, &grid)?;
    Ok(match config.format {
        OutputFormat::Csv => report.csv(),
        OutputFormat::Json => json_text(&report.json()),
    })
}

/// Executes the configured pipeline and returns the rendered artifact.
pub fn render(config: &RunConfig) -> Result<String> {
    match config.subcommand {
        Subcommand::Pi => run_pi(config),
        Subcommand::Mertens => run_mertens(config),
        Subcommand::Density => run_density(config),
        Subcommand::Flow => run_flow(config),
        Subcommand::ScaleCheck => run_scale_check(config),
        Subcommand::Report => run_report(config),
    }
}

/// Renders the artifact and writes it to `config.out`, or returns it for
/// the caller to print when no path is set.
pub fn run(config: &RunConfig) -> Result<Option<String>> {
    let text = render(config)?;
    match &config.out {
        Some(path) => {
            std::fs::write(path, text.as_bytes())?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(4.605_170_185_988_092), "4.60517018598809");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(12_739.178_068_231_04), "12739.178068231");
    }

    #[test]
    fn grid_parsing_and_expansion() {
        let g: GridSpec = "10000:100000000:1".parse().unwrap();
        assert_eq!(
            g.expand().unwrap(),
            vec![10_000, 100_000, 1_000_000, 10_000_000, 100_000_000]
        );
        let g: GridSpec = "1e4:1e5:2".parse().unwrap();
        assert_eq!(g.expand().unwrap(), vec![10_000, 31_623, 100_000]);
        let g: GridSpec = "10^2:10^3:1".parse().unwrap();
        assert_eq!(g.expand().unwrap(), vec![100, 1000]);
        let g: GridSpec = "1:3:10".parse().unwrap();
        // rounding collapses 1.26 → 1 etc.; duplicates removed
        assert_eq!(g.expand().unwrap(), vec![1, 2, 3]);
        let g: GridSpec = "5,7,11".parse().unwrap();
        assert_eq!(g.expand().unwrap(), vec![5, 7, 11]);
        assert!("5,5".parse::<GridSpec>().unwrap().expand().is_err());
        assert!("10:100:0".parse::<GridSpec>().unwrap().expand().is_err());
        assert!("".parse::<GridSpec>().unwrap().expand().is_err());
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("1.5e0:10:1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn pi_json_output() {
        let mut config = RunConfig::new(Subcommand::Pi);
        config.n = Some(1_000_000);
        config.format = OutputFormat::Json;
        let text = render(&config).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value, json!({"n": 1_000_000, "pi": 78_498}));
    }

    #[test]
    fn flow_output() {
        let mut config = RunConfig::new(Subcommand::Flow);
        config.t = Some(0.0);
        config.d0 = Some(0.5);
        assert_eq!(
            render(&config).unwrap(),
            "t,d0,closed_form,series,numeric\n0,0.5,0.5,,0.5\n"
        );
        config.order = Some(3);
        config.t = Some(0.5);
        config.d0 = Some(1.0);
        let text = render(&config).unwrap();
        assert!(
            text.ends_with("0.5,1,0.666666666666667,0.625,0.666666666666667\n"),
            "{text}"
        );
        config.t = Some(-3.0);
        assert!(matches!(render(&config), Err(Error::Singularity { .. })));
    }

    #[test]
    fn report_rows_and_empty_pairs() {
        let mut config = RunConfig::new(Subcommand::Report);
        config.grid = Some("1000".parse().unwrap());
        let text = render(&config).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER);
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("1000,168,0.168,"));
        assert!(lines[1].ends_with(",,,"));

        config.grid = None;
        assert!(matches!(render(&config), Err(Error::Config(_))));
        config.grid = Some(GridSpec::List(vec![]));
        assert!(matches!(render(&config), Err(Error::Config(_))));
    }

    #[test]
    fn limits_map_to_exit_code_two() {
        let mut config = RunConfig::new(Subcommand::Pi);
        config.n = Some(10_000);
        config.limits = PrimeCounter::new(100, 100);
        let err = render(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(Error::Verification("x".into()).exit_code(), 3);
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
    }
}
