use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::matrix::sq_dist;
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng;

pub const MAX_ITER: usize = 100;
pub const TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub centroids: Matrix,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn nearest(c: &Matrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, row) in c.iter_rows().enumerate() {
        let d = sq_dist(x, row);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn fit_kmeans(x: &Matrix, k: usize, seed: u64) -> Result<KMeans> {
    let n = x.rows();
    if k == 0 {
        return Err(Error::invalid_param("k must be positive"));
    }
    if k > n {
        return Err(Error::invalid_param(format!("k={k} exceeds {n} points")));
    }
    let d = x.cols();
    let mut r = rng::rng(seed);

    let mut chosen = vec![false; n];
    let first = r.gen_range(0..n);
    chosen[first] = true;
    let mut centroids = Matrix::zeros(0, d);
    centroids.push_row(x.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    while centroids.rows() < k {
        let total: f64 = (0..n).filter(|&i| !chosen[i]).map(|i| d2[i]).sum();
        let pick = if total > 0.0 {
            let mut u = r.gen::<f64>() * total;
            let mut pick = None;
            for i in (0..n).filter(|&i| !chosen[i]) {
                u -= d2[i];
                if u < 0.0 && d2[i] > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can exhaust `u` without a pick; take the last candidate.
            pick.unwrap_or_else(|| (0..n).rev().find(|&i| !chosen[i] && d2[i] > 0.0).unwrap())
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[r.gen_range(0..free.len())]
        };
        chosen[pick] = true;
        centroids.push_row(x.row(pick));
        for i in 0..n {
            d2[i] = d2[i].min(sq_dist(x.row(i), x.row(pick)));
        }
    }

    let mut assign = vec![0usize; n];
    let mut inertia_history = Vec::new();
    let mut iterations = 0;
    for _ in 0..MAX_ITER {
        iterations += 1;
        let mut inertia = 0.0;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (j, dd) = nearest(&centroids, x.row(i));
            assign[i] = j;
            dists[i] = dd;
            inertia += dd;
        }
        inertia_history.push(inertia);

        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            let row = sums.row_mut(assign[i]);
            for (s, v) in row.iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        let mut next = Matrix::zeros(k, d);
        let mut taken = vec![false; n];
        for j in 0..k {
            if counts[j] > 0 {
                for (dst, s) in next.row_mut(j).iter_mut().zip(sums.row(j)) {
                    *dst = s / counts[j] as f64;
                }
            } else {
                // Empty cluster: move it onto the point farthest from its centroid.
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap();
                taken[far] = true;
                dists[far] = 0.0;
                next.row_mut(j).copy_from_slice(x.row(far));
            }
        }
        let shift = (0..k)
            .map(|j| sq_dist(centroids.row(j), next.row(j)).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < TOL {
            break;
        }
    }
    Ok(KMeans { centroids, inertia_history, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_n_returns_points() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [5.0, 1.0], [-3.0, 2.0]]).unwrap();
        let km = fit_kmeans(&x, 3, 1).unwrap();
        let mut got: Vec<Vec<f64>> = km.centroids.iter_rows().map(|r| r.to_vec()).collect();
        got.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(got, vec![vec![-3.0, 2.0], vec![0.0, 0.0], vec![5.0, 1.0]]);
    }

    #[test]
    fn rejects_bad_k() {
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        assert!(fit_kmeans(&x, 0, 1).is_err());
        assert!(fit_kmeans(&x, 2, 1).is_err());
    }

    #[test]
    fn duplicate_points() {
        let x = Matrix::from_rows(&[[1.0], [1.0], [1.0]]).unwrap();
        let km = fit_kmeans(&x, 2, 4).unwrap();
        assert_eq!(km.centroids.rows(), 2);
        assert!(km.centroids.as_slice().iter().all(|v| *v == 1.0));
    }
}
