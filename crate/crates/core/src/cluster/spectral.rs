//! Normalized spectral embedding followed by k-means with restarts.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::random::{rng_for, Rng};

use super::affinity::AffinityMatrix;
use super::metrics::{acc, mean_std, nmi};

/// Guard added to every degree before `D^{-1/2}` is formed.
pub const DEGREE_EPS: f64 = 1e-12;
pub const KMEANS_MAX_ITERS: usize = 300;
pub const DEFAULT_RESTARTS: usize = 50;

/// One k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    /// 1-based cluster labels.
    pub labels: Vec<usize>,
    /// Sum of squared distances to the assigned centers.
    pub distortion: f64,
    pub iterations: usize,
}

/// All restarts of spectral clustering plus the selected one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub k: usize,
    /// Labels of the lowest-distortion restart (first one on ties).
    pub labels: Vec<usize>,
    pub best_run: usize,
    pub runs: Vec<KMeansRun>,
    /// The `k` leading eigenvalues of the normalized affinity.
    pub eigenvalues: Vec<f64>,
}

/// Labels with accuracy statistics against a ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// Labels of the selected restart, in `1..=k`.
    pub labels: Vec<usize>,
    /// ACC of `labels`.
    pub acc: f64,
    /// NMI of `labels`.
    pub nmi: f64,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub restarts: usize,
}

impl SpectralResult {
    /// Scores every restart against `truth`. Statistics are population
    /// mean and standard deviation over restarts.
    pub fn evaluate(&self, truth: &[usize]) -> Result<ClusterResult> {
        let accs = self
            .runs
            .iter()
            .map(|r| acc(&r.labels, truth))
            .collect::<Result<Vec<_>>>()?;
        let nmis = self
            .runs
            .iter()
            .map(|r| nmi(&r.labels, truth))
            .collect::<Result<Vec<_>>>()?;
        let (acc_mean, acc_std) = mean_std(&accs);
        let (nmi_mean, nmi_std) = mean_std(&nmis);
        Ok(ClusterResult {
            labels: self.labels.clone(),
            acc: accs[self.best_run],
            nmi: nmis[self.best_run],
            acc_mean,
            acc_std,
            nmi_mean,
            nmi_std,
            restarts: self.runs.len(),
        })
    }
}

/// Row-normalized embedding from the `k` leading eigenvectors of
/// `D^{-1/2} W D^{-1/2}`. Returns the `n x k` embedding and the eigenvalues.
pub fn spectral_embedding(w: &AffinityMatrix, k: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let w = w.matrix();
    let n = w.nrows();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} must lie in [1, {n}]"
        )));
    }
    let inv_sqrt: Vec<f64> = w
        .row_iter()
        .map(|r| 1.0 / (r.sum() + DEGREE_EPS).sqrt())
        .collect();
    let mut op = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]);
    // Remove rounding asymmetry before the symmetric solver.
    op = (&op + op.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(op, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("normalized affinity eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut emb = DMatrix::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        emb.set_column(c, &eig.eigenvectors.column(idx));
    }
    for mut row in emb.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let values = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
    Ok((emb, values))
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centers.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.nrows() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeanspp_init(points: &DMatrix<f64>, k: usize, rng: &mut Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| {
            let c = chosen[0];
            points.row(i).iter().zip(points.row(c).iter()).map(|(a, b)| (a - b).powi(2)).sum()
        })
        .collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // Every remaining point coincides with a center.
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            let nd: f64 = points
                .row(i)
                .iter()
                .zip(points.row(next).iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            if nd < *d {
                *d = nd;
            }
        }
    }
    DMatrix::from_fn(k, points.ncols(), |c, j| points[(chosen[c], j)])
}

/// Lloyd iterations from a k-means++ seeding. Stops when the assignment is
/// unchanged or after [`KMEANS_MAX_ITERS`] rounds. An empty cluster takes
/// the point farthest from its current center.
pub fn kmeans(points: &DMatrix<f64>, k: usize, rng: &mut Rng) -> Result<KMeansRun> {
    let n = points.nrows();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} must lie in [1, {n}]"
        )));
    }
    let dim = points.ncols();
    let mut centers = kmeanspp_init(points, k, rng);
    let mut assign: Vec<usize> = (0..n).map(|i| nearest(points, i, &centers).0).collect();
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITERS {
        iterations += 1;
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in assign.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mut row = centers.row_mut(c);
                row.copy_from(&(sums.row(c) / counts[c] as f64));
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[assign[i]] > 1)
                    .map(|i| (i, sq_dist(points, i, &centers, assign[i])))
                    .fold((usize::MAX, -1.0), |b, x| if x.1 > b.1 { x } else { b })
                    .0;
                if far != usize::MAX {
                    counts[assign[far]] -= 1;
                    counts[c] = 1;
                    assign[far] = c;
                    centers.row_mut(c).copy_from(&points.row(far));
                }
            }
        }
        let next: Vec<usize> = (0..n).map(|i| nearest(points, i, &centers).0).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    // Centers consistent with the final assignment.
    let mut sums = DMatrix::<f64>::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (i, &c) in assign.iter().enumerate() {
        counts[c] += 1;
        let mut row = sums.row_mut(c);
        row += points.row(i);
    }
    for c in 0..k {
        if counts[c] > 0 {
            centers.row_mut(c).copy_from(&(sums.row(c) / counts[c] as f64));
        }
    }
    let distortion = (0..n).map(|i| sq_dist(points, i, &centers, assign[i])).sum();
    Ok(KMeansRun {
        labels: assign.iter().map(|c| c + 1).collect(),
        distortion,
        iterations,
    })
}

/// Spectral clustering of `w` into `k` groups. Restart `i` draws from RNG
/// stream `i` of `seed`.
pub fn spectral_clustering(w: &AffinityMatrix, k: usize, restarts: usize, seed: u64) -> Result<SpectralResult> {
    if k < 2 || k > w.len() {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} must lie in [2, {}]",
            w.len()
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one k-means restart is required".into()));
    }
    let (emb, eigenvalues) = spectral_embedding(w, k)?;
    let runs = (0..restarts)
        .map(|r| kmeans(&emb, k, &mut rng_for(seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let best_run = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.distortion < runs[b].distortion { i } else { b });
    Ok(SpectralResult {
        k,
        labels: runs[best_run].labels.clone(),
        best_run,
        runs,
        eigenvalues,
    })
}
