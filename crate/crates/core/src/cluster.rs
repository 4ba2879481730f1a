//! K-means over z-scored (GDP, trade strength) pairs, with an inertia curve
//! and an automated elbow pick.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{zscore_normalize, CountryPanel};
use crate::error::{Error, Result};

pub const RESTARTS: u64 = 10;
pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub country_code: String,
    /// Normalized GDP.
    pub x: f64,
    /// Normalized trade strength.
    pub y: f64,
}

/// Points kept in country-code order so results do not depend on input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInput {
    points: Vec<ClusterPoint>,
}

impl ClusterInput {
    pub fn new(mut points: Vec<ClusterPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData {
                context: "cluster input".into(),
                needed: 1,
                got: 0,
            });
        }
        for p in &points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::invalid(
                    &format!("point {}", p.country_code),
                    if p.x.is_finite() { p.y } else { p.x },
                    "coordinates must be finite",
                ));
            }
        }
        points.sort_by(|a, b| a.country_code.cmp(&b.country_code));
        if let Some(w) = points.windows(2).find(|w| w[0].country_code == w[1].country_code) {
            return Err(Error::DuplicateKey {
                key: w[0].country_code.clone(),
            });
        }
        Ok(ClusterInput { points })
    }

    /// Z-scores GDP and g across the countries present in `year`.
    pub fn from_panel(panel: &CountryPanel, year: i32) -> Result<Self> {
        let rows: Vec<_> = panel.rows_for_year(year).collect();
        if rows.is_empty() {
            return Err(Error::NoRowsForYear { year });
        }
        let gdp: Vec<f64> = rows.iter().map(|r| r.gdp).collect();
        let g: Vec<f64> = rows.iter().map(|r| r.g).collect();
        let x = zscore_normalize(&gdp)?;
        let y = zscore_normalize(&g)?;
        ClusterInput::new(
            rows.iter()
                .zip(x.into_iter().zip(y))
                .map(|(r, (x, y))| ClusterPoint {
                    country_code: r.country_code.clone(),
                    x,
                    y,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[ClusterPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    /// (country code, cluster id) in country-code order.
    pub assignments: Vec<(String, usize)>,
    pub centroids: Vec<[f64; 2]>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Inertia after each Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

impl ClusterResult {
    pub fn cluster_of(&self, code: &str) -> Option<usize> {
        self.assignments
            .iter()
            .find(|(c, _)| c == code)
            .map(|&(_, id)| id)
    }

    pub fn members(&self, cluster: usize) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|&&(_, id)| id == cluster)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &(_, id) in &self.assignments {
            sizes[id] += 1;
        }
        sizes
    }
}

fn dist2(p: [f64; 2], c: [f64; 2]) -> f64 {
    (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)
}

fn coords(input: &ClusterInput) -> Vec<[f64; 2]> {
    input.points.iter().map(|p| [p.x, p.y]).collect()
}

fn check_k(input: &ClusterInput, k: usize) -> Result<()> {
    if k == 0 || k > input.len() {
        return Err(Error::invalid(
            "k",
            k as f64,
            format!("must be between 1 and the number of points ({})", input.len()),
        ));
    }
    Ok(())
}

fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// k-means++ seeding.
fn init_plus_plus(pts: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = pts.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = pts.iter().map(|&p| dist2(p, pts[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            // Every point coincides with a chosen centroid.
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (d, &p) in d2.iter_mut().zip(pts) {
            *d = d.min(dist2(p, pts[next]));
        }
    }
    chosen.into_iter().map(|i| pts[i]).collect()
}

fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn means(pts: &[[f64; 2]], labels: &[usize], k: usize) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut sums = vec![[0.0; 2]; k];
    let mut counts = vec![0usize; k];
    for (&p, &l) in pts.iter().zip(labels) {
        sums[l][0] += p[0];
        sums[l][1] += p[1];
        counts[l] += 1;
    }
    let centroids = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { [s[0] / c as f64, s[1] / c as f64] } else { [f64::NAN; 2] })
        .collect();
    (centroids, counts)
}

fn inertia_of(pts: &[[f64; 2]], labels: &[usize], centroids: &[[f64; 2]]) -> f64 {
    pts.iter().zip(labels).map(|(&p, &l)| dist2(p, centroids[l])).sum()
}

/// Moves the point farthest from its centroid, taken from a cluster with at
/// least two members, into each empty cluster.
fn repair_empty(pts: &[[f64; 2]], labels: &mut [usize], k: usize) -> bool {
    let mut repaired = false;
    loop {
        let (centroids, counts) = means(pts, labels, k);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return repaired;
        };
        let donor = pts
            .iter()
            .enumerate()
            .filter(|&(i, _)| counts[labels[i]] >= 2)
            .max_by(|&(i, &p), &(j, &q)| {
                dist2(p, centroids[labels[i]])
                    .total_cmp(&dist2(q, centroids[labels[j]]))
                    .then(j.cmp(&i))
            })
            .map(|(i, _)| i)
            .expect("k <= n leaves a cluster with two members");
        labels[donor] = empty;
        repaired = true;
    }
}

fn lloyd(pts: &[[f64; 2]], init: Vec<[f64; 2]>, max_iter: usize, seed: u64) -> ClusterResult {
    let k = init.len();
    let mut centroids = init;
    let mut labels: Vec<usize> = vec![usize::MAX; pts.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let mut next: Vec<usize> = pts.iter().map(|&p| nearest(p, &centroids)).collect();
        repair_empty(pts, &mut next, k);
        iterations += 1;
        let changed = next != labels;
        labels = next;
        centroids = means(pts, &labels, k).0;
        history.push(inertia_of(pts, &labels, &centroids));
        if !changed {
            converged = true;
            break;
        }
    }
    let inertia = history.last().copied().unwrap_or(0.0);
    canonical(pts, labels, centroids, inertia, iterations, converged, seed, history)
}

/// Relabels clusters by descending size, then by centroid coordinates.
#[allow(clippy::too_many_arguments)]
fn canonical(
    pts: &[[f64; 2]],
    labels: Vec<usize>,
    centroids: Vec<[f64; 2]>,
    inertia: f64,
    iterations: usize,
    converged: bool,
    seed: u64,
    inertia_history: Vec<f64>,
) -> ClusterResult {
    let k = centroids.len();
    let counts = means(pts, &labels, k).1;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        counts[b]
            .cmp(&counts[a])
            .then(centroids[a][0].total_cmp(&centroids[b][0]))
            .then(centroids[a][1].total_cmp(&centroids[b][1]))
    });
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    ClusterResult {
        k,
        assignments: Vec::new(),
        centroids: order.iter().map(|&o| centroids[o]).collect(),
        inertia,
        iterations,
        converged,
        seed,
        inertia_history,
    }
    .with_labels(labels.iter().map(|&l| relabel[l]))
}

impl ClusterResult {
    fn with_labels(mut self, labels: impl Iterator<Item = usize>) -> Self {
        self.assignments = labels.enumerate().map(|(i, l)| (i.to_string(), l)).collect();
        self
    }

    fn named(mut self, input: &ClusterInput) -> Self {
        for ((code, _), p) in self.assignments.iter_mut().zip(&input.points) {
            code.clone_from(&p.country_code);
        }
        self
    }
}

fn run(input: &ClusterInput, k: usize, seed: u64, stream: u64, max_iter: usize) -> ClusterResult {
    let pts = coords(input);
    let mut rng = seeded_rng(seed, stream);
    let init = init_plus_plus(&pts, k, &mut rng);
    lloyd(&pts, init, max_iter.max(1), seed).named(input)
}

/// A single seeded k-means run.
pub fn kmeans_fit(input: &ClusterInput, k: usize, seed: u64, max_iter: usize) -> Result<ClusterResult> {
    check_k(input, k)?;
    Ok(run(input, k, seed, 0, max_iter))
}

/// Lowest-inertia result over [`RESTARTS`] seeded runs.
pub fn best_of_restarts(input: &ClusterInput, k: usize, seed: u64, max_iter: usize) -> Result<ClusterResult> {
    check_k(input, k)?;
    let best = (0..RESTARTS)
        .into_par_iter()
        .map(|r| run(input, k, seed, r, max_iter))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.inertia < a.inertia { b } else { a })
        .expect("at least one restart");
    Ok(best)
}

/// Starts from a (k-1)-cluster solution with an extra centroid at the point
/// farthest from its current centroid.
fn split(input: &ClusterInput, prev: &ClusterResult, seed: u64, max_iter: usize) -> ClusterResult {
    let pts = coords(input);
    let far = pts
        .iter()
        .zip(&prev.assignments)
        .map(|(&p, (_, l))| dist2(p, prev.centroids[*l]))
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut init = prev.centroids.clone();
    init.push(pts[far]);
    lloyd(&pts, init, max_iter.max(1), seed).named(input)
}

/// Best-of-restarts inertia for every k in 1..=k_max. A restart that ends
/// worse than the previous k is replaced by a split of the previous solution.
pub fn inertia_curve(input: &ClusterInput, k_max: usize, seed: u64) -> Result<Vec<(usize, f64)>> {
    Ok(fit_curve(input, k_max, seed)?
        .into_iter()
        .map(|r| (r.k, r.inertia))
        .collect())
}

/// Same as [`inertia_curve`] but keeps each k's clustering.
pub fn fit_curve(input: &ClusterInput, k_max: usize, seed: u64) -> Result<Vec<ClusterResult>> {
    check_k(input, k_max)?;
    let mut out: Vec<ClusterResult> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut best = best_of_restarts(input, k, seed, DEFAULT_MAX_ITER)?;
        if let Some(prev) = out.last() {
            if best.inertia > prev.inertia {
                let alt = split(input, prev, seed, DEFAULT_MAX_ITER);
                if alt.inertia < best.inertia {
                    best = alt;
                }
                // Adding a centroid never raises the optimum.
                best.inertia = best.inertia.min(prev.inertia);
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// k with the largest second difference; ties go to the smaller k.
pub fn choose_k_elbow(curve: &[(usize, f64)]) -> Result<usize> {
    if curve.len() < 3 {
        return Err(Error::InsufficientData {
            context: "elbow curve".into(),
            needed: 3,
            got: curve.len(),
        });
    }
    let mut best_k = curve[1].0;
    let mut best = f64::NEG_INFINITY;
    for w in curve.windows(3) {
        let d = w[0].1 - 2.0 * w[1].1 + w[2].1;
        if d > best {
            best = d;
            best_k = w[1].0;
        }
    }
    Ok(best_k)
}

/// Distinct cluster ids that the given countries fall in.
pub fn clusters_of(result: &ClusterResult, codes: &[&str]) -> BTreeSet<usize> {
    codes.iter().filter_map(|c| result.cluster_of(c)).collect()
}
