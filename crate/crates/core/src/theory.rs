//! Monte Carlo check of the predicted Pareto tails of g and f.
//!
//! Each draw picks a GDP `G` from a truncated Pareto ensemble, a diplomatic
//! distance `T` with density ∝ T^(−θ) on `[t_min, t_max]`, and a drift speed
//! `v` with density ∝ exp(−p²v²). The draw maps to `g = G/T` and
//! `f = −G v / T²`. For fixed `G` the survival function of `g` falls off as
//! g^(−(1−θ)) and that of `|f|` as |f|^(−(1−θ)/2); averaging over `G` only
//! changes the prefactor, which [`truncated_power_mean`] gives in closed form.
//!
//! Draws are generated in fixed-size chunks, each from its own ChaCha stream
//! selected by `(seed, chunk index)`, so output is bit-identical regardless of
//! how many worker threads run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distfit::Sample;
use crate::error::{Error, Result};

const CHUNK: usize = 1 << 16;

/// Fewest order statistics the Hill estimator will work with.
pub const MIN_TAIL_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Power of the diplomatic distance in the state density.
    pub theta: f64,
    /// Velocity scale; speeds have variance 1 / (2 p²).
    pub p: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Pareto exponent of the GDP ensemble.
    pub gdp_alpha: f64,
    pub gdp_min: f64,
    /// Equal to `gdp_min` for a single fixed GDP.
    pub gdp_max: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Share of the largest values used by the Hill estimator.
    pub tail_fraction: f64,
    /// Share of the very largest values treated as censored, keeping the
    /// estimate clear of the `g = G / t_min` cap.
    pub trim_fraction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            theta: 0.5,
            p: 1.0,
            t_min: 1.0,
            t_max: 1e6,
            gdp_alpha: 0.135,
            gdp_min: 1.0,
            gdp_max: 100.0,
            n_samples: 1_000_000,
            seed: 1,
            tail_fraction: 0.1,
            trim_fraction: 0.001,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, v, "must be positive and finite"))
            }
        };
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid("theta", self.theta, "must be non-negative"));
        }
        positive("p", self.p)?;
        positive("t_min", self.t_min)?;
        positive("t_max", self.t_max)?;
        if !(self.t_max > self.t_min) {
            return Err(Error::invalid("t_max", self.t_max, "must exceed t_min"));
        }
        positive("gdp_alpha", self.gdp_alpha)?;
        positive("gdp_min", self.gdp_min)?;
        positive("gdp_max", self.gdp_max)?;
        if self.gdp_max < self.gdp_min {
            return Err(Error::invalid("gdp_max", self.gdp_max, "must not be below gdp_min"));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", 0.0, "must be at least 1"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::invalid("tail_fraction", self.tail_fraction, "must lie in (0, 1]"));
        }
        if !(self.trim_fraction >= 0.0 && self.trim_fraction < self.tail_fraction) {
            return Err(Error::invalid(
                "trim_fraction",
                self.trim_fraction,
                "must lie in [0, tail_fraction)",
            ));
        }
        Ok(())
    }

    /// Survival exponent of g predicted for this θ.
    pub fn predicted_g_alpha(&self) -> f64 {
        1.0 - self.theta
    }

    /// Survival exponent of |f| predicted for this θ.
    pub fn predicted_f_alpha(&self) -> f64 {
        (1.0 - self.theta) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiplomaticState {
    pub distance: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub gdp: f64,
    pub distance: f64,
    pub speed: f64,
    pub g: f64,
    pub f: f64,
}

/// Inverse CDF of the density ∝ T^(−θ) truncated to `[t_min, t_max]`.
pub fn distance_from_uniform(u: f64, theta: f64, t_min: f64, t_max: f64) -> f64 {
    let span = (t_max / t_min).ln();
    let e = 1.0 - theta;
    if e.abs() < 1e-12 {
        return t_min * (u * span).exp();
    }
    // t_min · [1 + u((t_max/t_min)^e − 1)]^(1/e), written to stay accurate near θ = 1.
    t_min * ((u * (e * span).exp_m1()).ln_1p() / e).exp()
}

/// Inverse CDF of a Pareto(α) law with minimum `g_min`, truncated at `g_max`
/// (which may be infinite).
pub fn gdp_from_uniform(u: f64, alpha: f64, g_min: f64, g_max: f64) -> f64 {
    let mass = if g_max.is_infinite() {
        1.0
    } else {
        -(-alpha * (g_max / g_min).ln()).exp_m1()
    };
    if mass == 0.0 {
        return g_min;
    }
    let g = g_min * (-(-u * mass).ln_1p() / alpha).exp();
    g.min(g_max)
}

fn speed_std(p: f64) -> f64 {
    1.0 / (std::f64::consts::SQRT_2 * p)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunked<T, F>(n: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

pub fn sample_diplomatic_state(cfg: &SimConfig) -> Result<Vec<DiplomaticState>> {
    cfg.validate()?;
    let sd = speed_std(cfg.p);
    Ok(chunked(cfg.n_samples, cfg.seed, |rng| {
        let u: f64 = rng.random();
        let z: f64 = rng.sample(StandardNormal);
        DiplomaticState {
            distance: distance_from_uniform(u, cfg.theta, cfg.t_min, cfg.t_max),
            speed: z * sd,
        }
    }))
}

pub fn map_to_strength(gdp: f64, distance: f64, speed: f64) -> Result<(f64, f64)> {
    if !(distance > 0.0) {
        return Err(Error::invalid("distance", distance, "must be positive"));
    }
    let g = gdp / distance;
    Ok((g, -g / distance * speed))
}

pub fn sample_gdp_pareto(alpha: f64, g_min: f64, g_max: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_pareto_bounds(alpha, g_min, g_max)?;
    if !(g_max > g_min) {
        return Err(Error::invalid("g_max", g_max, "must exceed g_min"));
    }
    Ok(chunked(n, seed, |rng| {
        gdp_from_uniform(rng.random(), alpha, g_min, g_max)
    }))
}

fn check_pareto_bounds(alpha: f64, g_min: f64, g_max: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", alpha, "must be positive"));
    }
    if !(g_min > 0.0 && g_min.is_finite()) {
        return Err(Error::invalid("g_min", g_min, "must be positive"));
    }
    if !(g_max >= g_min) || g_max.is_nan() {
        return Err(Error::invalid("g_max", g_max, "must not be below g_min"));
    }
    Ok(())
}

/// E[G^s] for G ~ Pareto(α, g_min) truncated to `[g_min, g_max]`:
///
/// ```text
/// α/(s−α) · (g_max^(s−α) − g_min^(s−α)) / (g_min^(−α) − g_max^(−α))
/// ```
///
/// evaluated through `expm1` so that `s = α` (the logarithmic limit) needs no
/// special case.
pub fn truncated_power_mean(s: f64, alpha: f64, g_min: f64, g_max: f64) -> Result<f64> {
    check_pareto_bounds(alpha, g_min, g_max)?;
    if !s.is_finite() {
        return Err(Error::invalid("s", s, "must be finite"));
    }
    if !(g_max > g_min) || g_max.is_infinite() {
        return Err(Error::invalid("g_max", g_max, "must be finite and exceed g_min"));
    }
    let span = (g_max / g_min).ln();
    let d = s - alpha;
    // (g_max^d − g_min^d) / d = g_min^d · expm1(d·span) / d
    let num = if d == 0.0 {
        span
    } else {
        (d * g_min.ln()).exp() * (d * span).exp_m1() / d
    };
    // g_min^(−α) − g_max^(−α) = g_min^(−α) · (−expm1(−α·span))
    let den = (-alpha * g_min.ln()).exp() * -(-alpha * span).exp_m1();
    Ok(alpha * num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha: f64,
    pub stderr: f64,
    /// Order statistics entering the estimate (including censored ones).
    pub k_tail: usize,
    /// Largest values treated as censored at the (m+1)-th largest.
    pub censored: usize,
    /// The (k+1)-th largest value, the tail threshold.
    pub threshold: f64,
}

/// Hill estimator over the largest `tail_fraction` of the sample.
pub fn estimate_tail_exponent(sample: &Sample, tail_fraction: f64) -> Result<TailEstimate> {
    estimate_tail_exponent_trimmed(sample, tail_fraction, 0.0)
}

/// Hill estimator with the top `trim_fraction` of values right-censored.
///
/// With `k` tail points above threshold `u = x_(k+1)` and the `m` largest
/// censored at `x_(m+1)`, the censored-likelihood maximiser is
///
/// ```text
/// α̂ = (k − m) / [ Σ_{i=m+1..k} ln(x_(i)/u) + m · ln(x_(m+1)/u) ]
/// ```
///
/// which is the plain Hill estimator when `m = 0`.
pub fn estimate_tail_exponent_trimmed(
    sample: &Sample,
    tail_fraction: f64,
    trim_fraction: f64,
) -> Result<TailEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::invalid("tail_fraction", tail_fraction, "must lie in (0, 1]"));
    }
    if !(trim_fraction >= 0.0 && trim_fraction < tail_fraction) {
        return Err(Error::invalid(
            "trim_fraction",
            trim_fraction,
            "must lie in [0, tail_fraction)",
        ));
    }
    let n = sample.len();
    let k = ((tail_fraction * n as f64).floor() as usize).min(n.saturating_sub(1));
    let m = (trim_fraction * n as f64).floor() as usize;
    if k < m + MIN_TAIL_POINTS {
        return Err(Error::InsufficientData {
            context: "tail estimate".into(),
            needed: MIN_TAIL_POINTS,
            got: k.saturating_sub(m),
        });
    }
    let mut sorted = sample.values().to_vec();
    // Only the top k+1 order statistics matter.
    let (top, threshold, _) = sorted.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    let threshold = *threshold;
    top.sort_unstable_by(|a, b| b.total_cmp(a));
    let ln_u = threshold.ln();
    let free: f64 = top[m..].iter().map(|x| x.ln() - ln_u).sum();
    let censored = if m > 0 { m as f64 * (top[m].ln() - ln_u) } else { 0.0 };
    let denom = free + censored;
    if !(denom > 0.0) {
        return Err(Error::degenerate("tail values are all equal"));
    }
    let effective = (k - m) as f64;
    let alpha = effective / denom;
    Ok(TailEstimate {
        alpha,
        stderr: alpha / effective.sqrt(),
        k_tail: k,
        censored: m,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub config: SimConfig,
    pub points: Vec<SimPoint>,
    pub g_tail: TailEstimate,
    pub f_tail: TailEstimate,
    /// Draws with f exactly zero, left out of the |f| tail estimate.
    pub f_zero_count: usize,
}

impl SimOutcome {
    pub fn g_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.g).collect()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.f).collect()
    }

    pub fn report(&self) -> SimReport {
        let cfg = &self.config;
        let prefactor = |s: f64| {
            if cfg.gdp_max > cfg.gdp_min {
                truncated_power_mean(s, cfg.gdp_alpha, cfg.gdp_min, cfg.gdp_max).ok()
            } else {
                Some(cfg.gdp_min.powf(s))
            }
        };
        SimReport {
            config: cfg.clone(),
            n_samples: self.points.len(),
            g_tail: self.g_tail,
            f_tail: self.f_tail,
            predicted_g_alpha: cfg.predicted_g_alpha(),
            predicted_f_alpha: cfg.predicted_f_alpha(),
            predicted_g_density_exponent: 2.0 - cfg.theta,
            predicted_f_density_exponent: (3.0 - cfg.theta) / 2.0,
            g_gdp_prefactor: prefactor(1.0 - cfg.theta),
            f_gdp_prefactor: prefactor((1.0 - cfg.theta) / 2.0),
            f_zero_count: self.f_zero_count,
        }
    }
}

/// Serializable summary of a [`SimOutcome`] without the raw draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub n_samples: usize,
    pub g_tail: TailEstimate,
    pub f_tail: TailEstimate,
    pub predicted_g_alpha: f64,
    pub predicted_f_alpha: f64,
    pub predicted_g_density_exponent: f64,
    pub predicted_f_density_exponent: f64,
    /// Mean of G^(1−θ) over the GDP ensemble.
    pub g_gdp_prefactor: Option<f64>,
    /// Mean of G^((1−θ)/2) over the GDP ensemble.
    pub f_gdp_prefactor: Option<f64>,
    pub f_zero_count: usize,
}

pub fn simulate_points(cfg: &SimConfig) -> Result<Vec<SimPoint>> {
    cfg.validate()?;
    let sd = speed_std(cfg.p);
    Ok(chunked(cfg.n_samples, cfg.seed, |rng| {
        let gdp = gdp_from_uniform(rng.random(), cfg.gdp_alpha, cfg.gdp_min, cfg.gdp_max);
        let distance = distance_from_uniform(rng.random(), cfg.theta, cfg.t_min, cfg.t_max);
        let z: f64 = rng.sample(StandardNormal);
        let speed = z * sd;
        let g = gdp / distance;
        SimPoint {
            gdp,
            distance,
            speed,
            g,
            f: -g / distance * speed,
        }
    }))
}

pub fn run_tail_experiment(cfg: &SimConfig) -> Result<SimOutcome> {
    let points = simulate_points(cfg)?;
    let g = Sample::new(points.iter().map(|p| p.g).collect())?;
    let f_abs: Vec<f64> = points.iter().map(|p| p.f.abs()).filter(|&v| v > 0.0).collect();
    let f_zero_count = points.len() - f_abs.len();
    let f = Sample::new(f_abs)?;
    let g_tail = estimate_tail_exponent_trimmed(&g, cfg.tail_fraction, cfg.trim_fraction)?;
    let f_tail = estimate_tail_exponent_trimmed(&f, cfg.tail_fraction, cfg.trim_fraction)?;
    Ok(SimOutcome {
        config: cfg.clone(),
        points,
        g_tail,
        f_tail,
        f_zero_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_median() {
        let t = distance_from_uniform(0.5, 0.5, 1.0, 1e6);
        assert!((t - 250_500.25).abs() < 1e-6, "{t}");
        assert_eq!(distance_from_uniform(0.0, 0.5, 1.0, 1e6), 1.0);
        // θ = 0 is uniform.
        assert!((distance_from_uniform(0.25, 0.0, 2.0, 10.0) - 4.0).abs() < 1e-12);
        // θ = 1 is log-uniform.
        assert!((distance_from_uniform(0.5, 1.0, 1.0, 100.0) - 10.0).abs() < 1e-12);
        // θ = 2 has the general branch with a negative exponent.
        let t = distance_from_uniform(0.5, 2.0, 1.0, 3.0);
        assert!((t - 1.5).abs() < 1e-12, "{t}");
    }

    #[test]
    fn gdp_inverse_cdf() {
        assert_eq!(gdp_from_uniform(0.0, 0.135, 5.0, 500.0), 5.0);
        assert!((gdp_from_uniform(0.5, 1.0, 1.0, f64::INFINITY) - 2.0).abs() < 1e-12);
        assert_eq!(gdp_from_uniform(0.7, 0.135, 5.0, 5.0), 5.0);
    }

    #[test]
    fn map_examples() {
        assert_eq!(map_to_strength(2.0, 4.0, 0.5).unwrap(), (0.5, -0.0625));
        assert_eq!(map_to_strength(2.0, 4.0, 0.0).unwrap().1, 0.0);
        let (g, f) = map_to_strength(0.0, 4.0, 0.3).unwrap();
        assert_eq!(g, 0.0);
        assert_eq!(f, 0.0);
        assert!(map_to_strength(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn power_mean_closed_cases() {
        assert!((truncated_power_mean(0.0, 0.135, 1.0, 1e4).unwrap() - 1.0).abs() < 1e-14);
        // s = α: α ln(g_max/g_min) / (g_min^(−α) − g_max^(−α)).
        let want = 0.5 * 100f64.ln() / (1.0 - 0.1);
        assert!((truncated_power_mean(0.5, 0.5, 1.0, 100.0).unwrap() - want).abs() < 1e-13);
        assert!(truncated_power_mean(0.5, 0.5, 2.0, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let bad = SimConfig { t_max: 0.5, ..SimConfig::default() };
        assert!(bad.validate().unwrap_err().is_config());
        let bad = SimConfig { p: 0.0, ..SimConfig::default() };
        assert!(bad.validate().is_err());
        let fixed = SimConfig { gdp_max: 1.0, ..SimConfig::default() };
        assert!(fixed.validate().is_ok());
    }

    #[test]
    fn hill_needs_enough_points() {
        let s = Sample::new((1..=500).map(f64::from).collect()).unwrap();
        assert!(estimate_tail_exponent(&s, 0.1).is_err());
        let c = Sample::new(vec![3.0; 5000]).unwrap();
        assert!(matches!(
            estimate_tail_exponent(&c, 0.1),
            Err(Error::DegenerateScale { .. })
        ));
    }

    #[test]
    fn chunking_is_thread_independent() {
        let cfg = SimConfig { n_samples: 3 * CHUNK / 2, ..SimConfig::default() };
        let a = simulate_points(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_points(&cfg).unwrap());
        assert_eq!(a, b);
    }
}
