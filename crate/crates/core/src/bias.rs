//! Distribution-shift diagnostics: per-dimension action bias and its
//! aggregate over many dimensions, a Monte Carlo check of the analytic
//! density, and the data behind the density/bias figures.

use serde::Serialize;

use crate::dist::{DiagSquashedGaussian, SquashedGaussian1D};
use crate::error::{invalid, Result};
use crate::mode::{action_bias, analytic_mode, joint_mode, naive_action};
use crate::rng::{stream, Purpose};

/// Bias of every dimension plus its norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasProfile {
    pub per_dim_bias: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl BiasProfile {
    pub fn from_biases(per_dim_bias: Vec<f64>) -> Self {
        let l1 = per_dim_bias.iter().sum();
        let l2 = per_dim_bias.iter().map(|b| b * b).sum::<f64>().sqrt();
        let linf = per_dim_bias.iter().copied().fold(0.0, f64::max);
        Self {
            per_dim_bias,
            l1,
            l2,
            linf,
        }
    }
}

pub fn bias_profile(d: &DiagSquashedGaussian) -> Result<BiasProfile> {
    let biases = d
        .components()
        .map(|c| action_bias(&c))
        .collect::<Result<_>>()?;
    Ok(BiasProfile::from_biases(biases))
}

/// One row of the `d,mu,sigma,l1,l2,linf` scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub d: usize,
    pub mu: f64,
    pub sigma: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Bias norms for `d` identical dimensions, for each `d` in `dims`.
pub fn bias_scaling_sweep(dims: &[usize], mu: f64, sigma: f64) -> Result<Vec<ScalingRow>> {
    if dims.is_empty() {
        return Err(invalid("dims", "must not be empty"));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) || dims[0] == 0 {
        return Err(invalid("dims", "must be positive and strictly ascending"));
    }
    dims.iter()
        .map(|&d| {
            let p = bias_profile(&DiagSquashedGaussian::identical(d, mu, sigma)?)?;
            Ok(ScalingRow {
                d,
                mu,
                sigma,
                l1: p.l1,
                l2: p.l2,
                linf: p.linf,
            })
        })
        .collect()
}

/// Histogram comparison between seeded samples and the analytic density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub mu: f64,
    pub sigma: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub n_bins: usize,
    /// Sum over bins of |empirical mass - analytic mass|, in [0, 2].
    pub l1_distance: f64,
    pub empirical_mode_bin_center: f64,
    pub analytic_mode: f64,
    pub sample_mean: f64,
}

/// Flat record for the `mu,sigma,n_samples,n_bins,l1_distance,empirical_mode,analytic_mode,seed` CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub mu: f64,
    pub sigma: f64,
    pub n_samples: usize,
    pub n_bins: usize,
    pub l1_distance: f64,
    pub empirical_mode: f64,
    pub analytic_mode: f64,
    pub seed: u64,
}

impl From<&McReport> for McRow {
    fn from(r: &McReport) -> Self {
        Self {
            mu: r.mu,
            sigma: r.sigma,
            n_samples: r.n_samples,
            n_bins: r.n_bins,
            l1_distance: r.l1_distance,
            empirical_mode: r.empirical_mode_bin_center,
            analytic_mode: r.analytic_mode,
            seed: r.seed,
        }
    }
}

pub const MIN_MC_SAMPLES: usize = 10_000;
pub const MIN_MC_BINS: usize = 20;

/// Analytic mass of each of `n_bins` equal-width bins on (-1, 1), from cdf
/// differences.
pub fn analytic_bin_masses(d: &SquashedGaussian1D, n_bins: usize) -> Result<Vec<f64>> {
    let width = 2.0 / n_bins as f64;
    let mut edges = Vec::with_capacity(n_bins + 1);
    edges.push(0.0);
    for i in 1..n_bins {
        edges.push(d.cdf(-1.0 + width * i as f64)?);
    }
    edges.push(1.0);
    Ok(edges.windows(2).map(|w| w[1] - w[0]).collect())
}

pub fn mc_density_check(
    d: &SquashedGaussian1D,
    n_samples: usize,
    n_bins: usize,
    seed: u64,
) -> Result<McReport> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(invalid("n_samples", format!("must be >= {MIN_MC_SAMPLES}")));
    }
    if n_bins < MIN_MC_BINS {
        return Err(invalid("n_bins", format!("must be >= {MIN_MC_BINS}")));
    }
    let mut rng = stream(seed, Purpose::Sampling, 0);
    let mut counts = vec![0u64; n_bins];
    let mut sum = 0.0;
    for _ in 0..n_samples {
        let y = d.sample(&mut rng);
        sum += y;
        let bin = (((y + 1.0) * 0.5) * n_bins as f64) as usize;
        counts[bin.min(n_bins - 1)] += 1;
    }
    let masses = analytic_bin_masses(d, n_bins)?;
    let l1_distance = counts
        .iter()
        .zip(&masses)
        .map(|(&c, &m)| (c as f64 / n_samples as f64 - m).abs())
        .sum();
    let mode_bin = counts
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best });
    let width = 2.0 / n_bins as f64;
    Ok(McReport {
        mu: d.mu(),
        sigma: d.sigma(),
        seed,
        n_samples,
        n_bins,
        l1_distance,
        empirical_mode_bin_center: -1.0 + width * (mode_bin as f64 + 0.5),
        analytic_mode: analytic_mode(d)?.y_star,
        sample_mean: sum / n_samples as f64,
    })
}

/// Figure data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Gaussian vs. squashed density for mu in {1, 0, -1}, sigma = 0.5. The
    /// parameters of the motivating figure are not published; this reuses
    /// the shift figure's set.
    Motivation,
    /// Gaussian vs. squashed density for mu in {1, 0, -1}, sigma = 0.5.
    Shift,
    /// Original mode, squashed mode and tanh of the original mode for
    /// mu in {1, -1}, sigma = 0.5.
    BiasPoints,
    /// Joint squashed density on a 201 x 201 grid for mu = (1, 1),
    /// sigma = (0.5, 0.5).
    TwoDim,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Motivation,
        Preset::Shift,
        Preset::BiasPoints,
        Preset::TwoDim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Motivation => "motivation",
            Preset::Shift => "shift",
            Preset::BiasPoints => "bias-points",
            Preset::TwoDim => "2d",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid("preset", format!("unknown preset `{s}`")))
    }
}

pub const CURVE_POINTS: usize = 2001;
pub const CURVE_LIMIT: f64 = 0.999;
pub const GRID_2D_POINTS: usize = 201;
const FIGURE_SIGMA: f64 = 0.5;

/// `preset,mu,sigma,y,gaussian_pdf,transformed_pdf`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub preset: String,
    pub mu: f64,
    pub sigma: f64,
    pub y: f64,
    /// The untransformed Gaussian density evaluated at the same abscissa.
    pub gaussian_pdf: f64,
    pub transformed_pdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    OriginalMode,
    TransformedMode,
    TanhOfOriginalMode,
}

/// `preset,mu,sigma,label,x,y`. In 1-D presets `x` is the location and `y`
/// the density there; in the 2-D preset they are the two coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRow {
    pub preset: String,
    pub mu: f64,
    pub sigma: f64,
    pub label: PointLabel,
    pub x: f64,
    pub y: f64,
}

/// `preset,y1,y2,joint_pdf`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub preset: String,
    pub y1: f64,
    pub y2: f64,
    pub joint_pdf: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureData {
    pub curves: Vec<CurveRow>,
    pub points: Vec<PointRow>,
    pub grid: Vec<GridRow>,
}

/// `n` evenly spaced values on `[-CURVE_LIMIT, CURVE_LIMIT]`.
pub fn curve_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let step = 2.0 * CURVE_LIMIT / (n - 1) as f64;
            (0..n).map(|i| -CURVE_LIMIT + step * i as f64).collect()
        }
    }
}

/// Gaussian and squashed density sampled on the curve grid.
pub fn pdf_curve(label: &str, mu: f64, sigma: f64, points: usize) -> Result<Vec<CurveRow>> {
    let d = SquashedGaussian1D::new(mu, sigma)?;
    curve_grid(points)
        .into_iter()
        .map(|y| {
            Ok(CurveRow {
                preset: label.to_owned(),
                mu,
                sigma,
                y,
                gaussian_pdf: d.base().pdf(y),
                transformed_pdf: d.pdf(y)?,
            })
        })
        .collect()
}

fn marked_points(label: &str, mu: f64, sigma: f64) -> Result<Vec<PointRow>> {
    let d = SquashedGaussian1D::new(mu, sigma)?;
    let mode = analytic_mode(&d)?;
    let naive = naive_action(&d);
    let row = |l, x, y| PointRow {
        preset: label.to_owned(),
        mu,
        sigma,
        label: l,
        x,
        y,
    };
    Ok(vec![
        row(PointLabel::OriginalMode, mu, d.base().pdf(mu)),
        row(
            PointLabel::TransformedMode,
            mode.y_star,
            mode.density_at_mode,
        ),
        row(PointLabel::TanhOfOriginalMode, naive, d.pdf(naive)?),
    ])
}

pub fn figure_data(preset: Preset) -> Result<FigureData> {
    let label = preset.name();
    let mut out = FigureData::default();
    match preset {
        Preset::Motivation | Preset::Shift => {
            for mu in [1.0, 0.0, -1.0] {
                out.curves
                    .extend(pdf_curve(label, mu, FIGURE_SIGMA, CURVE_POINTS)?);
            }
        }
        Preset::BiasPoints => {
            for mu in [1.0, -1.0] {
                out.curves
                    .extend(pdf_curve(label, mu, FIGURE_SIGMA, CURVE_POINTS)?);
                out.points.extend(marked_points(label, mu, FIGURE_SIGMA)?);
            }
        }
        Preset::TwoDim => {
            let (mu, sigma) = (1.0, FIGURE_SIGMA);
            let d = DiagSquashedGaussian::identical(2, mu, sigma)?;
            let axis = curve_grid(GRID_2D_POINTS);
            for &y1 in &axis {
                for &y2 in &axis {
                    out.grid.push(GridRow {
                        preset: label.to_owned(),
                        y1,
                        y2,
                        joint_pdf: d.joint_pdf(&[y1, y2])?,
                    });
                }
            }
            let modes = joint_mode(&d)?;
            let row = |l, x, y| PointRow {
                preset: label.to_owned(),
                mu,
                sigma,
                label: l,
                x,
                y,
            };
            out.points.push(row(PointLabel::OriginalMode, mu, mu));
            out.points.push(row(
                PointLabel::TransformedMode,
                modes[0].y_star,
                modes[1].y_star,
            ));
            out.points
                .push(row(PointLabel::TanhOfOriginalMode, mu.tanh(), mu.tanh()));
        }
    }
    Ok(out)
}

/// Number of distinct (mu, curve) series in a set of curve rows; each row
/// carries two series, the Gaussian and the squashed density.
pub fn curve_count(rows: &[CurveRow]) -> usize {
    let mut mus: Vec<f64> = rows.iter().map(|r| r.mu).collect();
    mus.sort_by(f64::total_cmp);
    mus.dedup();
    2 * mus.len()
}
