//! Information criteria and ranking across the five fitted families.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::distfit::{Family, FitResult, ParetoLikelihood, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub family: Family,
    pub k: usize,
    pub n: usize,
    pub ll_max: f64,
    pub aic: f64,
    /// Small-sample corrected AIC; absent when n ≤ k + 1.
    pub aicc: Option<f64>,
    pub bic: f64,
}

pub fn score(fit: &FitResult, n: usize) -> ModelScore {
    score_raw(fit.family, fit.k, fit.ll_max, n)
}

/// Scores a bare (family, k, LLmax) triple, e.g. a row from a published table.
pub fn score_raw(family: Family, k: usize, ll_max: f64, n: usize) -> ModelScore {
    let kf = k as f64;
    let aic = 2.0 * kf - 2.0 * ll_max;
    let bic = kf * (n as f64).ln() - 2.0 * ll_max;
    let aicc = (n > k + 1).then(|| aic + 2.0 * kf * (kf + 1.0) / (n as f64 - kf - 1.0));
    ModelScore {
        family,
        k,
        n,
        ll_max,
        aic,
        aicc,
        bic,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    pub family: Family,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub n: usize,
    pub fits: Vec<FitResult>,
    pub scores: Vec<ModelScore>,
    pub failures: Vec<FitFailure>,
    pub winner_aic: Family,
    pub winner_bic: Family,
}

impl SelectionReport {
    pub fn fit_for(&self, family: Family) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.family == family)
    }

    pub fn score_for(&self, family: Family) -> Option<&ModelScore> {
        self.scores.iter().find(|s| s.family == family)
    }
}

/// Smallest criterion wins; ties go to fewer parameters, then family name.
pub fn pick_winner<F>(scores: &[ModelScore], criterion: F) -> Option<Family>
where
    F: Fn(&ModelScore) -> f64,
{
    scores
        .iter()
        .min_by(|a, b| {
            criterion(a)
                .partial_cmp(&criterion(b))
                .unwrap_or(Ordering::Equal)
                .then(a.k.cmp(&b.k))
                .then(a.family.name().cmp(b.family.name()))
        })
        .map(|s| s.family)
}

pub fn select(sample: &Sample) -> Result<SelectionReport> {
    select_with(sample, ParetoLikelihood::Standard)
}

pub fn select_with(sample: &Sample, pareto: ParetoLikelihood) -> Result<SelectionReport> {
    let n = sample.len();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for family in Family::ALL {
        let fitted = match family {
            Family::Pareto => crate::distfit::fit_pareto_with(sample, pareto),
            other => other.fit(sample),
        };
        match fitted {
            Ok(fit) => fits.push(fit),
            Err(e) => failures.push(FitFailure {
                family,
                reason: e.to_string(),
            }),
        }
    }
    if fits.len() < 2 {
        return Err(Error::SelectionFailed { fitted: fits.len() });
    }
    let scores: Vec<ModelScore> = fits.iter().map(|f| score(f, n)).collect();
    let winner_aic = pick_winner(&scores, |s| s.aic).expect("at least two scores");
    let winner_bic = pick_winner(&scores, |s| s.bic).expect("at least two scores");
    Ok(SelectionReport {
        n,
        fits,
        scores,
        failures,
        winner_aic,
        winner_bic,
    })
}

/// Pareto CDF rescaled to reach exactly 1 at the largest observation.
///
/// `g_max` may be `f64::INFINITY`, which recovers the unscaled CDF.
pub fn scaled_pareto_cdf(g: f64, alpha: f64, beta: f64, g_max: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", alpha, "must be positive"));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", beta, "must be positive"));
    }
    if !(g_max > beta) {
        return Err(Error::invalid("g_max", g_max, "must exceed beta"));
    }
    if !(g >= beta && g <= g_max) {
        return Err(Error::invalid("g", g, "outside [beta, g_max]"));
    }
    let cdf = |x: f64| -(alpha * (beta / x).ln()).exp_m1();
    Ok((cdf(g) / cdf(g_max)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub g: f64,
    pub empirical: f64,
    pub scaled_pareto: f64,
}

/// Empirical CDF (i/n on sorted values) paired with the scaled Pareto CDF
/// whose support starts at the sample minimum.
pub fn cdf_comparison(sample: &Sample, alpha: f64) -> Result<Vec<CdfPoint>> {
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let beta = sample.min();
    let g_max = sample.max();
    if !(g_max > beta) {
        return Err(Error::degenerate("cdf comparison needs a non-constant sample"));
    }
    sorted
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            Ok(CdfPoint {
                g,
                empirical: (i + 1) as f64 / n,
                scaled_pareto: scaled_pareto_cdf(g, alpha, beta, g_max)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn score_arithmetic() {
        let s = score_raw(Family::Gamma, 2, -100.0, 100);
        assert_eq!(s.aic, 204.0);
        assert!((s.bic - 209.210_340_371_976_2).abs() < 1e-9);
        assert!((s.aicc.unwrap() - (204.0 + 12.0 / 97.0)).abs() < 1e-12);
    }

    #[test]
    fn aicc_absent_for_tiny_samples() {
        assert!(score_raw(Family::Pareto, 2, -1.0, 3).aicc.is_none());
        assert!(score_raw(Family::Exponential, 1, -1.0, 3).aicc.is_some());
    }

    #[test]
    fn winner_tie_breaks() {
        let a = score_raw(Family::Weibull, 2, -10.0, 50);
        let b = score_raw(Family::Gamma, 2, -10.0, 50);
        assert_eq!(pick_winner(&[a.clone(), b.clone()], |s| s.aic), Some(Family::Gamma));
        // Same AIC with fewer parameters wins.
        let c = score_raw(Family::Exponential, 1, -11.0, 50);
        assert_eq!(c.aic, a.aic);
        assert_eq!(pick_winner(&[a, b, c], |s| s.aic), Some(Family::Exponential));
    }

    #[test]
    fn select_tiny_sample_shape() {
        let s = Sample::new(vec![1.0, E, E * E]).unwrap();
        let r = select(&s).unwrap();
        assert_eq!(r.scores.len() + r.failures.len(), 5);
        assert_eq!(r.fits.len(), r.scores.len());
    }

    #[test]
    fn select_constant_sample_fails() {
        let s = Sample::new(vec![2.0, 2.0, 2.0]).unwrap();
        // Only the exponential family survives.
        assert!(matches!(
            select(&s),
            Err(Error::SelectionFailed { fitted: 1 })
        ));
    }

    #[test]
    fn scaled_cdf_examples() {
        assert_eq!(scaled_pareto_cdf(2.0, 0.5, 2.0, 50.0).unwrap(), 0.0);
        assert!((scaled_pareto_cdf(50.0, 0.5, 2.0, 50.0).unwrap() - 1.0).abs() < 1e-15);
        let v = scaled_pareto_cdf(4.0, 0.5, 1.0, f64::INFINITY).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(scaled_pareto_cdf(1.0, 0.5, 2.0, 50.0).is_err());
        assert!(scaled_pareto_cdf(60.0, 0.5, 2.0, 50.0).is_err());
    }

    #[test]
    fn cdf_comparison_endpoints() {
        let s = Sample::new(vec![3.0, 1.0, 2.0, 10.0]).unwrap();
        let pts = cdf_comparison(&s, 0.5).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].g, 1.0);
        assert_eq!(pts[0].scaled_pareto, 0.0);
        assert_eq!(pts[3].empirical, 1.0);
        assert!((pts[3].scaled_pareto - 1.0).abs() < 1e-15);
    }
}
