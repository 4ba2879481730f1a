//! Maximum-likelihood fitting of five positive-support families.
//!
//! Exponential, lognormal and Pareto fits are closed form. Gamma and Weibull
//! reduce to a single monotone estimating equation in the shape parameter,
//! solved by [`solve_decreasing`] on a fixed bracket.

mod special;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use special::{digamma, log_gamma};
pub(crate) use special::{digamma_unchecked, log_gamma_unchecked};

const LN_TWO_PI: f64 = 1.837_877_066_409_345_5;

/// Estimating-equation residual every root-solved fit must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const GAMMA_BRACKET: (f64, f64) = (1e-6, 1e6);
const WEIBULL_BRACKET: (f64, f64) = (1e-3, 1e3);
const MAX_ITERATIONS: usize = 200;

/// A validated collection of strictly positive, finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sum: f64,
    sum_ln: f64,
    min: f64,
    max: f64,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData {
                context: "sample".into(),
                needed: 1,
                got: 0,
            });
        }
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::invalid(
                &format!("sample[{i}]"),
                v,
                "observations must be finite and strictly positive",
            ));
        }
        let sum = compensated_sum(values.iter().copied());
        let sum_ln = compensated_sum(values.iter().map(|v| v.ln()));
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Sample {
            values,
            sum,
            sum_ln,
            min,
            max,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.len() as f64
    }

    pub fn mean_ln(&self) -> f64 {
        self.sum_ln / self.len() as f64
    }

    /// Returns a copy with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Sample> {
        Sample::new(self.values.iter().map(|v| v * c).collect())
    }

    fn is_constant(&self) -> bool {
        self.min == self.max
    }

    fn require(&self, needed: usize, family: Family) -> Result<()> {
        if self.len() < needed {
            return Err(Error::InsufficientData {
                context: format!("{family} fit"),
                needed,
                got: self.len(),
            });
        }
        if needed > 1 && self.is_constant() {
            return Err(Error::degenerate(format!(
                "{family} fit on a sample where every value equals {}",
                self.min
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Lognormal,
    Gamma,
    Pareto,
    Weibull,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Exponential,
        Family::Lognormal,
        Family::Gamma,
        Family::Pareto,
        Family::Weibull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Lognormal => "lognormal",
            Family::Gamma => "gamma",
            Family::Pareto => "pareto",
            Family::Weibull => "weibull",
        }
    }

    pub fn parameter_count(self) -> usize {
        match self {
            Family::Exponential => 1,
            _ => 2,
        }
    }

    pub fn fit(self, sample: &Sample) -> Result<FitResult> {
        match self {
            Family::Exponential => fit_exponential(sample),
            Family::Lognormal => fit_lognormal(sample),
            Family::Gamma => fit_gamma(sample),
            Family::Pareto => fit_pareto(sample),
            Family::Weibull => fit_weibull(sample),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Fitted parameters, one variant per family.
///
/// Gamma uses the rate convention (density ∝ x^(shape-1) e^(-rate x)).
/// Pareto `beta` is the support minimum. Weibull `scale` and `shape` are
/// the α and β of the estimating equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Params {
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Gamma { shape: f64, rate: f64 },
    Pareto { alpha: f64, beta: f64 },
    Weibull { scale: f64, shape: f64 },
}

impl Params {
    pub fn family(&self) -> Family {
        match self {
            Params::Exponential { .. } => Family::Exponential,
            Params::Lognormal { .. } => Family::Lognormal,
            Params::Gamma { .. } => Family::Gamma,
            Params::Pareto { .. } => Family::Pareto,
            Params::Weibull { .. } => Family::Weibull,
        }
    }

    /// Parameter names and values in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Params::Exponential { rate } => vec![("rate", rate)],
            Params::Lognormal { mu, sigma } => vec![("mu", mu), ("sigma", sigma)],
            Params::Gamma { shape, rate } => vec![("shape", shape), ("rate", rate)],
            Params::Pareto { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            Params::Weibull { scale, shape } => vec![("scale", scale), ("shape", shape)],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.named().into_iter().map(|(_, v)| v).collect()
    }

    /// Rebuilds parameters of `family` from values in [`Params::named`] order.
    pub fn from_values(family: Family, v: &[f64]) -> Result<Params> {
        if v.len() != family.parameter_count() {
            return Err(Error::InsufficientData {
                context: format!("{family} parameters"),
                needed: family.parameter_count(),
                got: v.len(),
            });
        }
        Ok(match family {
            Family::Exponential => Params::Exponential { rate: v[0] },
            Family::Lognormal => Params::Lognormal {
                mu: v[0],
                sigma: v[1],
            },
            Family::Gamma => Params::Gamma {
                shape: v[0],
                rate: v[1],
            },
            Family::Pareto => Params::Pareto {
                alpha: v[0],
                beta: v[1],
            },
            Family::Weibull => Params::Weibull {
                scale: v[0],
                shape: v[1],
            },
        })
    }

    /// Log-density at a single point; `-inf` outside the support.
    pub fn log_density(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lx = x.ln();
        match *self {
            Params::Exponential { rate } => rate.ln() - rate * x,
            Params::Lognormal { mu, sigma } => {
                let z = (lx - mu) / sigma;
                -lx - sigma.ln() - 0.5 * LN_TWO_PI - 0.5 * z * z
            }
            Params::Gamma { shape, rate } => {
                shape * rate.ln() - log_gamma_unchecked(shape) + (shape - 1.0) * lx - rate * x
            }
            Params::Pareto { alpha, beta } => {
                if x < beta {
                    f64::NEG_INFINITY
                } else {
                    alpha.ln() + alpha * beta.ln() - (alpha + 1.0) * lx
                }
            }
            Params::Weibull { scale, shape } => {
                shape.ln() - shape * scale.ln() + (shape - 1.0) * lx - (x / scale).powf(shape)
            }
        }
    }

    /// Log-likelihood of the whole sample, summed pointwise.
    pub fn log_likelihood(&self, sample: &Sample) -> f64 {
        compensated_sum(sample.values().iter().map(|&x| self.log_density(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub params: Params,
    pub ll_max: f64,
    pub k: usize,
}

impl FitResult {
    fn new(params: Params, ll_max: f64) -> Result<Self> {
        let family = params.family();
        if !ll_max.is_finite() {
            return Err(Error::degenerate(format!(
                "{family} log-likelihood is not finite"
            )));
        }
        Ok(FitResult {
            family,
            params,
            ll_max,
            k: family.parameter_count(),
        })
    }
}

pub fn fit_exponential(sample: &Sample) -> Result<FitResult> {
    sample.require(1, Family::Exponential)?;
    let n = sample.len() as f64;
    let rate = n / sample.sum;
    let ll = n * rate.ln() - rate * sample.sum;
    FitResult::new(Params::Exponential { rate }, ll)
}

pub fn fit_lognormal(sample: &Sample) -> Result<FitResult> {
    sample.require(2, Family::Lognormal)?;
    let n = sample.len() as f64;
    let mu = sample.mean_ln();
    let var = compensated_sum(sample.values().iter().map(|x| {
        let d = x.ln() - mu;
        d * d
    })) / n;
    if !(var > 0.0) {
        return Err(Error::degenerate("lognormal sigma is zero"));
    }
    let sigma = var.sqrt();
    // The squared-deviation sum over 2σ² is exactly n/2 at the optimum.
    let ll = -sample.sum_ln - n * sigma.ln() - 0.5 * n * LN_TWO_PI - 0.5 * n;
    FitResult::new(Params::Lognormal { mu, sigma }, ll)
}

/// Right-hand side of the gamma shape equation: ln(mean x) - mean(ln x).
fn gamma_log_dispersion(sample: &Sample) -> f64 {
    sample.mean().ln() - sample.mean_ln()
}

/// Gamma shape estimating equation divided by n:
/// ln(n·α / Σx) + (1/n)Σ ln x − ψ(α).
pub fn gamma_shape_residual(sample: &Sample, shape: f64) -> f64 {
    (shape / sample.mean()).ln() + sample.mean_ln() - digamma_unchecked(shape)
}

pub fn fit_gamma(sample: &Sample) -> Result<FitResult> {
    sample.require(2, Family::Gamma)?;
    let target = gamma_log_dispersion(sample);
    if !(target > 0.0) {
        return Err(Error::degenerate("gamma log-dispersion is not positive"));
    }
    let eq = |a: f64| a.ln() - digamma_unchecked(a) - target;
    let slope = |a: f64| {
        let h = 1e-5 * a;
        let dpsi = (digamma_unchecked(a + h) - digamma_unchecked(a - h)) / (2.0 * h);
        1.0 / a - dpsi
    };
    let shape = solve_decreasing(
        "gamma shape",
        |a| (eq(a), slope(a)),
        GAMMA_BRACKET,
        MAX_ITERATIONS,
    )?;
    let residual = gamma_shape_residual(sample, shape);
    if !(residual.abs() < RESIDUAL_TOLERANCE) {
        return Err(Error::NoConvergence {
            what: format!("gamma shape (residual {residual:e})"),
            iterations: MAX_ITERATIONS,
        });
    }
    let n = sample.len() as f64;
    let rate = n * shape / sample.sum;
    let ll = n * shape * rate.ln() - n * log_gamma_unchecked(shape) - rate * sample.sum
        + (shape - 1.0) * sample.sum_ln;
    FitResult::new(Params::Gamma { shape, rate }, ll)
}

/// Which closed form to report as the Pareto maximised log-likelihood.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParetoLikelihood {
    /// n ln α + nα ln β − (α+1) Σ ln x, the log-density sum at the optimum.
    #[default]
    Standard,
    /// nα + nα ln β − (α+1) Σ ln x, kept for comparison with published tables.
    Literal,
}

pub fn fit_pareto(sample: &Sample) -> Result<FitResult> {
    fit_pareto_with(sample, ParetoLikelihood::Standard)
}

pub fn fit_pareto_with(sample: &Sample, variant: ParetoLikelihood) -> Result<FitResult> {
    sample.require(2, Family::Pareto)?;
    let n = sample.len() as f64;
    let beta = sample.min;
    let denom = sample.sum_ln - n * beta.ln();
    if !(denom > 0.0) {
        return Err(Error::degenerate("pareto alpha is unbounded"));
    }
    let alpha = n / denom;
    let lead = match variant {
        ParetoLikelihood::Standard => n * alpha.ln(),
        ParetoLikelihood::Literal => n * alpha,
    };
    let ll = lead + n * alpha * beta.ln() - (alpha + 1.0) * sample.sum_ln;
    FitResult::new(Params::Pareto { alpha, beta }, ll)
}

/// Weighted moments of the centred log-sample under weights x^β.
struct WeibullMoments {
    /// Σ w c / Σ w with c = ln x − mean(ln x).
    mean: f64,
    /// Σ w c² / Σ w − mean².
    var: f64,
    /// ln((1/n) Σ x^β) / β, i.e. ln α̃.
    ln_scale: f64,
}

fn weibull_moments(logs: &[f64], mean_ln: f64, shape: f64) -> WeibullMoments {
    let cmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mean_ln;
    let (mut sw, mut swc, mut swc2) = (0.0, 0.0, 0.0);
    for &l in logs {
        let c = l - mean_ln;
        let w = (shape * (c - cmax)).exp();
        sw += w;
        swc += w * c;
        swc2 += w * c * c;
    }
    let mean = swc / sw;
    let n = logs.len() as f64;
    WeibullMoments {
        mean,
        var: (swc2 / sw - mean * mean).max(0.0),
        ln_scale: mean_ln + cmax + (sw / n).ln() / shape,
    }
}

/// Weibull shape estimating equation:
/// 1/β − Σ x^β ln x / Σ x^β + (1/n) Σ ln x.
pub fn weibull_shape_residual(sample: &Sample, shape: f64) -> f64 {
    let logs: Vec<f64> = sample.values().iter().map(|x| x.ln()).collect();
    1.0 / shape - weibull_moments(&logs, sample.mean_ln(), shape).mean
}

pub fn fit_weibull(sample: &Sample) -> Result<FitResult> {
    sample.require(2, Family::Weibull)?;
    let logs: Vec<f64> = sample.values().iter().map(|x| x.ln()).collect();
    let mean_ln = sample.mean_ln();
    let shape = solve_decreasing(
        "weibull shape",
        |b| {
            let m = weibull_moments(&logs, mean_ln, b);
            (1.0 / b - m.mean, -1.0 / (b * b) - m.var)
        },
        WEIBULL_BRACKET,
        MAX_ITERATIONS,
    )?;
    let residual = weibull_shape_residual(sample, shape);
    if !(residual.abs() < RESIDUAL_TOLERANCE) {
        return Err(Error::NoConvergence {
            what: format!("weibull shape (residual {residual:e})"),
            iterations: MAX_ITERATIONS,
        });
    }
    let ln_scale = weibull_moments(&logs, mean_ln, shape).ln_scale;
    let scale = ln_scale.exp();
    let n = sample.len() as f64;
    let sum_std = compensated_sum(logs.iter().map(|l| (shape * (l - ln_scale)).exp()));
    let ll = n * shape.ln() - n * shape * ln_scale - sum_std + (shape - 1.0) * sample.sum_ln;
    FitResult::new(Params::Weibull { scale, shape }, ll)
}

/// Root of a strictly decreasing function on `bracket` by Newton steps,
/// falling back to bisection whenever a step leaves the current bracket.
///
/// `f` returns the function value and an estimate of its derivative.
pub(crate) fn solve_decreasing<F>(
    what: &str,
    mut f: F,
    bracket: (f64, f64),
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = bracket;
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoConvergence {
            what: format!("{what}: no sign change on [{lo:e}, {hi:e}]"),
            iterations: 0,
        });
    }
    // Geometric midpoint: the brackets span many decades.
    let mut x = (lo * hi).sqrt();
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx.abs() < 1e-15 {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo) <= 4.0 * f64::EPSILON * x {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        x = if dfx < 0.0 && newton > lo && newton < hi {
            newton
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NoConvergence {
        what: what.to_string(),
        iterations: max_iter,
    })
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sample_rejects_bad_values() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, 0.0]).is_err());
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn exponential_examples() {
        let r = fit_exponential(&sample(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.params, Params::Exponential { rate: 0.5 });
        assert!((r.ll_max - -5.079_441_541_679_836).abs() < 1e-12);
        let r = fit_exponential(&sample(&[2.0, 2.0, 2.0])).unwrap();
        assert!((r.ll_max - -5.079_441_541_679_836).abs() < 1e-12);
        let r = fit_exponential(&sample(&[4.0])).unwrap();
        assert_eq!(r.params, Params::Exponential { rate: 0.25 });
        assert!((r.ll_max - (0.25f64.ln() - 1.0)).abs() < 1e-12);
        assert_eq!(r.k, 1);
    }

    #[test]
    fn lognormal_examples() {
        let r = fit_lognormal(&sample(&[E, E, E.powi(3)])).unwrap();
        let Params::Lognormal { mu, sigma } = r.params else {
            panic!()
        };
        assert!((mu - 5.0 / 3.0).abs() < 1e-12);
        assert!((sigma * sigma - 8.0 / 9.0).abs() < 1e-12);
        assert!((r.ll_max - -9.080_140_5).abs() < 1e-6);
        assert!(matches!(
            fit_lognormal(&sample(&[1.0, 1.0, 1.0])),
            Err(Error::DegenerateScale { .. })
        ));
    }

    #[test]
    fn pareto_examples() {
        let r = fit_pareto(&sample(&[1.0, E, E * E])).unwrap();
        let Params::Pareto { alpha, beta } = r.params else {
            panic!()
        };
        assert_eq!(beta, 1.0);
        assert!((alpha - 1.0).abs() < 1e-12);
        assert!((r.ll_max - -6.0).abs() < 1e-12);

        let r = fit_pareto(&sample(&[2.0, 4.0, 8.0])).unwrap();
        let Params::Pareto { alpha, beta } = r.params else {
            panic!()
        };
        assert_eq!(beta, 2.0);
        assert!((alpha - 1.0 / std::f64::consts::LN_2).abs() < 1e-12);

        assert!(fit_pareto(&sample(&[5.0, 5.0, 5.0])).is_err());
    }

    #[test]
    fn pareto_literal_variant_differs_only_in_lead_term() {
        let s = sample(&[1.0, E, E * E]);
        let std = fit_pareto_with(&s, ParetoLikelihood::Standard).unwrap();
        let lit = fit_pareto_with(&s, ParetoLikelihood::Literal).unwrap();
        // alpha = 1, n = 3: n ln α = 0 versus nα = 3.
        assert!((lit.ll_max - std.ll_max - 3.0).abs() < 1e-12);
        assert_eq!(std.params, lit.params);
    }

    #[test]
    fn gamma_and_weibull_reject_constant_samples() {
        let s = sample(&[3.0, 3.0, 3.0]);
        assert!(fit_gamma(&s).is_err());
        assert!(fit_weibull(&s).is_err());
        assert!(fit_gamma(&sample(&[3.0])).is_err());
    }

    #[test]
    fn gamma_small_sample() {
        // Reference: mpmath root of ln α − ψ(α) = ln(7/6).
        let r = fit_gamma(&sample(&[0.5, 1.0, 2.0])).unwrap();
        let Params::Gamma { shape, rate } = r.params else {
            panic!()
        };
        assert!((shape - 3.401_200_587_899_846).abs() < 1e-9);
        assert!((rate - 2.915_314_789_628_44).abs() < 1e-9);
        assert!((r.ll_max - -2.566_811_608_615_295).abs() < 1e-9);
    }

    #[test]
    fn weibull_small_sample() {
        let r = fit_weibull(&sample(&[1.0, 2.0, 3.0])).unwrap();
        let Params::Weibull { scale, shape } = r.params else {
            panic!()
        };
        assert!((shape - 2.738_573_173_595_96).abs() < 1e-9);
        assert!((scale - 2.258_586_246_244_026).abs() < 1e-9);
        assert!((r.ll_max - -3.556_251_540_112_1).abs() < 1e-9);
    }

    #[test]
    fn family_round_trips_through_name() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("cauchy".parse::<Family>().is_err());
    }

    #[test]
    fn solver_reports_missing_sign_change() {
        let err = solve_decreasing("t", |x| (x + 1.0, 1.0), (1.0, 2.0), 10).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
