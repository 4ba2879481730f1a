#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal, Pareto, Weibull};
use statrs::distribution::Continuous;
use trade_strength::{Family, Params};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws from `params` with rand_distr, which shares no code with the crate.
pub fn draw(params: &Params, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    match *params {
        Params::Exponential { rate } => Exp::new(rate).unwrap().sample_iter(&mut r).take(n).collect(),
        Params::Lognormal { mu, sigma } => LogNormal::new(mu, sigma)
            .unwrap()
            .sample_iter(&mut r)
            .take(n)
            .collect(),
        Params::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
            .unwrap()
            .sample_iter(&mut r)
            .take(n)
            .collect(),
        Params::Pareto { alpha, beta } => Pareto::new(beta, alpha)
            .unwrap()
            .sample_iter(&mut r)
            .take(n)
            .collect(),
        Params::Weibull { scale, shape } => Weibull::new(scale, shape)
            .unwrap()
            .sample_iter(&mut r)
            .take(n)
            .collect(),
    }
}

/// Log-density from statrs.
pub fn oracle_ln_pdf(params: &Params, x: f64) -> f64 {
    use statrs::distribution as sd;
    match *params {
        Params::Exponential { rate } => sd::Exp::new(rate).unwrap().ln_pdf(x),
        Params::Lognormal { mu, sigma } => sd::LogNormal::new(mu, sigma).unwrap().ln_pdf(x),
        Params::Gamma { shape, rate } => sd::Gamma::new(shape, rate).unwrap().ln_pdf(x),
        Params::Pareto { alpha, beta } => {
            if x < beta {
                f64::NEG_INFINITY
            } else {
                sd::Pareto::new(beta, alpha).unwrap().ln_pdf(x)
            }
        }
        Params::Weibull { scale, shape } => sd::Weibull::new(shape, scale).unwrap().ln_pdf(x),
    }
}

pub fn oracle_ll(params: &Params, xs: &[f64]) -> f64 {
    xs.iter().map(|&x| oracle_ln_pdf(params, x)).sum()
}

pub fn truth(family: Family) -> Params {
    match family {
        Family::Exponential => Params::Exponential { rate: 2.5 },
        Family::Lognormal => Params::Lognormal { mu: -1.0, sigma: 0.8 },
        Family::Gamma => Params::Gamma { shape: 2.0, rate: 3.0 },
        Family::Pareto => Params::Pareto { alpha: 1.5, beta: 0.01 },
        Family::Weibull => Params::Weibull { scale: 2.0, shape: 1.5 },
    }
}

/// Maximizes the statrs log-likelihood by a shrinking grid search in log
/// parameter space (location parameters on a linear grid). The Pareto scale
/// is pinned at the sample minimum, where the likelihood is maximal.
pub fn grid_mle(family: Family, xs: &[f64]) -> Params {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_ln = xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64;
    let make = |v: [f64; 2]| -> Params {
        match family {
            Family::Exponential => Params::Exponential { rate: v[0].exp() },
            Family::Lognormal => Params::Lognormal { mu: v[0], sigma: v[1].exp() },
            Family::Gamma => Params::Gamma { shape: v[0].exp(), rate: v[1].exp() },
            Family::Pareto => Params::Pareto { alpha: v[0].exp(), beta: min },
            Family::Weibull => Params::Weibull { scale: v[0].exp(), shape: v[1].exp() },
        }
    };
    let two_d = !matches!(family, Family::Exponential | Family::Pareto);
    let mut centre = match family {
        Family::Exponential => [(1.0 / mean).ln(), 0.0],
        Family::Lognormal => [mean_ln, 0.0],
        Family::Gamma => [0.0, (1.0 / mean).ln()],
        Family::Pareto => [0.0, 0.0],
        Family::Weibull => [mean.ln(), 0.0],
    };
    let mut width = [3.0, if two_d { 3.0 } else { 0.0 }];
    let steps = 8i32;
    for _ in 0..40 {
        let mut best = (f64::NEG_INFINITY, centre);
        for i in -steps..=steps {
            for j in if two_d { -steps..=steps } else { 0..=0 } {
                let v = [
                    centre[0] + width[0] * f64::from(i) / f64::from(steps),
                    centre[1] + width[1] * f64::from(j) / f64::from(steps),
                ];
                let ll = oracle_ll(&make(v), xs);
                if ll > best.0 {
                    best = (ll, v);
                }
            }
        }
        centre = best.1;
        width = [width[0] * 0.5, width[1] * 0.5];
    }
    make(centre)
}

/// Adaptive Simpson quadrature on [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// E[G^s] under the truncated Pareto density, integrated in u = ln G.
pub fn power_mean_by_quadrature(s: f64, alpha: f64, g_min: f64, g_max: f64) -> f64 {
    let mass = 1.0 - (g_min / g_max).powf(alpha);
    // density of u: α g_min^α e^(−α u), times G^s = e^(s u)
    let integrand = |u: f64| alpha * ((s - alpha) * u + alpha * g_min.ln()).exp();
    let (a, b) = (g_min.ln(), g_max.ln());
    let scale = integrand(a).max(integrand(b));
    integrate(&integrand, a, b, 1e-14 * scale * (b - a)) / mass
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
