//! Aggregate evaluation statistics over runs: interquartile mean, median,
//! mean, stratified bootstrap confidence intervals, performance profiles and
//! sample-efficiency curves.
//!
//! Aggregates are computed over the pooled `run x column` scores. Bootstrap
//! replicates resample runs with replacement independently inside each
//! column, and replicate `b` draws from its own stream so results are
//! reproducible for a given seed.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::{stream, Purpose};
use crate::sac::RunRecord;

pub const DEFAULT_N_BOOT: usize = 2000;
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const MIN_N_BOOT: usize = 100;

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Mean of the sorted values after dropping `floor(n / 4)` from each end.
pub fn iqm(xs: &[f64]) -> Result<f64> {
    let v = sorted(xs)?;
    let cut = v.len() / 4;
    let mid = &v[cut..v.len() - cut];
    Ok(mid.iter().sum::<f64>() / mid.len() as f64)
}

pub fn median(xs: &[f64]) -> Result<f64> {
    let v = sorted(xs)?;
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Iqm,
    Median,
    Mean,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Iqm, Metric::Median, Metric::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Iqm => "iqm",
            Metric::Median => "median",
            Metric::Mean => "mean",
        }
    }

    pub fn apply(self, xs: &[f64]) -> Result<f64> {
        match self {
            Metric::Iqm => iqm(xs),
            Metric::Median => median(xs),
            Metric::Mean => mean(xs),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid("metric", format!("unknown metric `{s}`")))
    }
}

/// Rectangular score table: rows are runs, columns are tasks or
/// checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: Vec<Vec<f64>>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ScoreMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let row_labels = (0..rows.len()).map(|i| format!("run{i}")).collect();
        let col_labels = (0..n_cols).map(|j| format!("col{j}")).collect();
        Self::with_labels(rows, row_labels, col_labels)
    }

    pub fn with_labels(
        rows: Vec<Vec<f64>>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Empty);
        }
        let n_cols = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("scores", "must be finite"));
        }
        if row_labels.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: row_labels.len(),
            });
        }
        if col_labels.len() != n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: col_labels.len(),
            });
        }
        Ok(Self {
            rows,
            row_labels,
            col_labels,
        })
    }

    /// Single-column matrix.
    pub fn column(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn pooled(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_boot: usize,
}

/// `metric,point,lo,hi,level,n_boot`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub metric: String,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_boot: usize,
}

impl AggregateRow {
    pub fn new(metric: Metric, e: &IntervalEstimate) -> Self {
        Self {
            metric: metric.name().to_owned(),
            point: e.point,
            lo: e.lo,
            hi: e.hi,
            level: e.level,
            n_boot: e.n_boot,
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * frac
}

/// One bootstrap replicate: for each column, `n_rows` row indices drawn
/// with replacement, the drawn scores pooled.
fn replicate(m: &ScoreMatrix, seed: u64, b: usize, buf: &mut Vec<f64>) {
    let mut rng = stream(seed, Purpose::Bootstrap, b as u32);
    let n = m.n_rows();
    buf.clear();
    for j in 0..m.n_cols() {
        for _ in 0..n {
            buf.push(m.get(rng.random_range(0..n), j));
        }
    }
}

/// Percentile-method stratified bootstrap interval. The interval is widened
/// to contain the point estimate when the percentile bounds miss it.
pub fn stratified_bootstrap_ci(
    metric: Metric,
    m: &ScoreMatrix,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<IntervalEstimate> {
    if n_boot < MIN_N_BOOT {
        return Err(invalid("n_boot", format!("must be >= {MIN_N_BOOT}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("level", "must lie in (0, 1)"));
    }
    let point = metric.apply(&m.pooled())?;
    let mut stats = Vec::with_capacity(n_boot);
    let mut buf = Vec::with_capacity(m.n_rows() * m.n_cols());
    for b in 0..n_boot {
        replicate(m, seed, b, &mut buf);
        stats.push(metric.apply(&buf)?);
    }
    stats.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&stats, (1.0 - level) / 2.0).min(point);
    let hi = quantile_sorted(&stats, (1.0 + level) / 2.0).max(point);
    Ok(IntervalEstimate {
        point,
        lo,
        hi,
        level,
        n_boot,
    })
}

/// `tau,fraction`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub tau: f64,
    pub fraction: f64,
}

/// Fraction of pooled scores `>= tau` for each threshold.
pub fn performance_profile(m: &ScoreMatrix, taus: &[f64]) -> Result<Vec<ProfileRow>> {
    if taus.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("taus", "must be ascending"));
    }
    let pooled = m.pooled();
    let n = pooled.len() as f64;
    Ok(taus
        .iter()
        .map(|&tau| ProfileRow {
            tau,
            fraction: pooled.iter().filter(|&&x| x >= tau).count() as f64 / n,
        })
        .collect())
}

/// `n` evenly spaced thresholds on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `steps,iqm,lo,hi`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyRow {
    pub steps: usize,
    pub iqm: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Normalized evaluation scores at checkpoint `k`: one row per run, one
/// column per evaluation episode.
pub fn checkpoint_matrix(records: &[RunRecord], k: usize) -> Result<ScoreMatrix> {
    let first = records.first().ok_or(Error::Empty)?;
    let steps = first
        .checkpoints
        .get(k)
        .ok_or(Error::MismatchedCheckpoints)?
        .steps;
    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for r in records {
        let c = r.checkpoints.get(k).ok_or(Error::MismatchedCheckpoints)?;
        if c.steps != steps {
            return Err(Error::MismatchedCheckpoints);
        }
        rows.push(c.normalized.clone());
        labels.push(format!("seed{}", r.seed));
    }
    let n_cols = rows[0].len();
    ScoreMatrix::with_labels(
        rows,
        labels,
        (0..n_cols).map(|j| format!("episode{j}")).collect(),
    )
}

/// Normalized scores at the last checkpoint shared by every record.
pub fn final_matrix(records: &[RunRecord]) -> Result<ScoreMatrix> {
    let n = records.first().ok_or(Error::Empty)?.checkpoints.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    checkpoint_matrix(records, n - 1)
}

fn check_grids(records: &[RunRecord]) -> Result<Vec<usize>> {
    let first = records.first().ok_or(Error::Empty)?;
    let grid: Vec<usize> = first.checkpoints.iter().map(|c| c.steps).collect();
    for r in records {
        if !r
            .checkpoints
            .iter()
            .map(|c| c.steps)
            .eq(grid.iter().copied())
        {
            return Err(Error::MismatchedCheckpoints);
        }
    }
    Ok(grid)
}

pub fn sample_efficiency(records: &[RunRecord]) -> Result<Vec<EfficiencyRow>> {
    sample_efficiency_with(records, DEFAULT_N_BOOT, DEFAULT_LEVEL, 0)
}

/// IQM with a stratified bootstrap interval at every shared checkpoint.
pub fn sample_efficiency_with(
    records: &[RunRecord],
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<EfficiencyRow>> {
    let grid = check_grids(records)?;
    grid.iter()
        .enumerate()
        .map(|(k, &steps)| {
            let m = checkpoint_matrix(records, k)?;
            let e = stratified_bootstrap_ci(Metric::Iqm, &m, n_boot, level, seed)?;
            Ok(EfficiencyRow {
                steps,
                iqm: e.point,
                lo: e.lo,
                hi: e.hi,
            })
        })
        .collect()
}
