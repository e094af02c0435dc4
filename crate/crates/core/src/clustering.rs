//! Similarity transform, k-means, spectral clustering and partition scoring.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dims, input, Error, Result};
use crate::flow::{DistanceMatrix, Metric};
use crate::linalg::Matrix;
use crate::rng::SeededStream;
use crate::spectral::Spectrum;

pub const DEFAULT_RESTARTS: usize = 50;
pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Relative gap under which two eigenvalues of a similarity matrix are
/// treated as one degenerate eigenspace.
const DEGENERATE_REL_TOL: f64 = 1e-9;

/// `S_ij = exp(-d_ij / sigma)` for a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    entries: Matrix,
    sigma: f64,
    source_metric: Metric,
}

impl SimilarityMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn source_metric(&self) -> Metric {
        self.source_metric
    }

    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.rows() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub inertia: f64,
}

/// Population standard deviation of the off-diagonal entries.
pub fn off_diagonal_std(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut count = 0usize;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)];
                count += 1;
            }
        }
    }
    if count == 0 {
        return 0.0;
    }
    let mean = sum / count as f64;
    let mut var = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = m[(i, j)] - mean;
                var += d * d;
            }
        }
    }
    libm::sqrt(var / count as f64)
}

/// Gaussian-type similarity with bandwidth equal to the population standard
/// deviation of the off-diagonal distances.
pub fn similarity_matrix(d: &DistanceMatrix) -> Result<SimilarityMatrix> {
    let m = d.len();
    if m < 2 {
        return Err(input("similarity needs at least two graphs"));
    }
    let sigma = off_diagonal_std(d.matrix());
    if !(sigma > 0.0) {
        return Err(Error::Degenerate(
            "off-diagonal distances have zero spread".into(),
        ));
    }
    let mut entries = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            entries[(i, j)] = if i == j {
                1.0
            } else {
                libm::exp(-d.get(i, j) / sigma)
            };
        }
    }
    Ok(SimilarityMatrix {
        entries,
        sigma,
        source_metric: d.metric(),
    })
}

/// Copy of `d` with each diagonal entry set to the mean of the off-diagonal
/// entries in its row.
pub fn replace_diagonal_with_average(d: &DistanceMatrix) -> Result<Matrix> {
    let m = d.len();
    if m < 2 {
        return Err(input("need at least two rows"));
    }
    let mut out = d.matrix().clone();
    for i in 0..m {
        let sum: f64 = (0..m).filter(|&j| j != i).map(|j| d.get(i, j)).sum();
        out[(i, i)] = sum / (m - 1) as f64;
    }
    Ok(out)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center for every point (ties go to the lower index) and the
/// resulting inertia.
fn assign(points: &Matrix, centers: &[Vec<f64>], labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let p = points.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        *label = best;
        inertia += best_d;
    }
    inertia
}

fn kmeans_pp_seed(points: &Matrix, k: usize, rng: &mut SeededStream) -> Vec<Vec<f64>> {
    let m = points.rows();
    let mut chosen = vec![rng.index(m)];
    let mut nearest: Vec<f64> = (0..m)
        .map(|i| sq_dist(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` just under `target`
            pick.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            (0..m).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, n) in nearest.iter_mut().enumerate() {
            *n = n.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    chosen.into_iter().map(|i| points.row(i).to_vec()).collect()
}

/// One Lloyd run from k-means++ seeds. Also returns the inertia after every
/// assignment step.
pub(crate) fn lloyd(points: &Matrix, k: usize, rng: &mut SeededStream) -> (ClusterAssignment, Vec<f64>) {
    let m = points.rows();
    let dim = points.cols();
    let mut centers = kmeans_pp_seed(points, k, rng);
    let mut labels = vec![usize::MAX; m];
    let mut next = vec![0; m];
    let mut history = Vec::new();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let inertia = assign(points, &centers, &mut next);
        history.push(inertia);
        repair_empty(points, &centers, &mut next, k);
        if next == labels {
            break;
        }
        labels.clone_from(&next);
        centers = centroids(points, &labels, k, dim);
    }
    let centers = centroids(points, &labels, k, dim);
    let inertia = (0..m).map(|i| sq_dist(points.row(i), &centers[labels[i]])).sum();
    (ClusterAssignment { labels, k, inertia }, history)
}

/// Moves the point farthest from its center into each empty cluster.
fn repair_empty(points: &Matrix, centers: &[Vec<f64>], labels: &mut [usize], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for i in 0..labels.len() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(points.row(i), &centers[labels[i]]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        match far {
            Some(i) => labels[i] = empty,
            None => return,
        }
    }
}

fn centroids(points: &Matrix, labels: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(points.row(i)) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            for x in s.iter_mut() {
                *x /= c as f64;
            }
        }
    }
    sums
}

/// Lloyd's k-means on the rows of `points`, best of `restarts` runs.
///
/// Restart `r` seeds k-means++ from stream `r` of `seed`. The lowest inertia
/// wins, ties keep the earlier restart.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<ClusterAssignment> {
    let m = points.rows();
    if k == 0 || k > m {
        return Err(input(format!("k = {k} must be in 1..={m}")));
    }
    if restarts == 0 {
        return Err(input("need at least one restart"));
    }
    if points.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(input("points contain non-finite coordinates"));
    }
    let mut best: Option<ClusterAssignment> = None;
    for r in 0..restarts {
        let mut rng = SeededStream::new(seed, r as u64);
        let (run, _) = lloyd(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// One-dimensional k-means on a single row of a matrix.
pub fn kmeans_on_row(row: &[f64], k: usize, seed: u64, restarts: usize) -> Result<ClusterAssignment> {
    let points = Matrix::from_vec(row.len(), 1, row.to_vec())?;
    kmeans(&points, k, seed, restarts)
}

/// Eigenvectors for the `k` largest eigenvalues of a symmetric matrix, as the
/// columns of an `m x k` matrix.
///
/// Degenerate eigenspaces get a canonical basis: the standard basis vectors
/// are projected onto the eigenspace in index order and orthonormalised.
/// Each column is then signed so its largest-magnitude coordinate (first one
/// on ties) is positive. The result depends only on the matrix, not on the
/// eigensolver's choice of basis.
pub fn top_eigenvectors(matrix: &Matrix, k: usize) -> Result<Matrix> {
    let m = matrix.rows();
    if k == 0 || k > m {
        return Err(input(format!("k = {k} must be in 1..={m}")));
    }
    let spectrum = Spectrum::of_symmetric(matrix)?;
    let values = spectrum.eigenvalues();
    let vectors = spectrum.eigenvectors();
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    // descending order
    let order: Vec<usize> = (0..m).rev().collect();

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut start = 0;
    while columns.len() < k {
        let mut end = start + 1;
        while end < m && (values[order[end - 1]] - values[order[end]]).abs() <= DEGENERATE_REL_TOL * scale {
            end += 1;
        }
        let block: Vec<Vec<f64>> = order[start..end].iter().map(|&c| vectors.column(c)).collect();
        let basis = if block.len() == 1 { block } else { canonical_basis(&block) };
        for v in basis {
            if columns.len() == k {
                break;
            }
            columns.push(v);
        }
        start = end;
    }

    let mut out = Matrix::zeros(m, k);
    for (c, mut v) in columns.into_iter().enumerate() {
        canonicalize_sign(&mut v);
        for (r, x) in v.into_iter().enumerate() {
            out[(r, c)] = x;
        }
    }
    Ok(out)
}

fn canonical_basis(block: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = block[0].len();
    let dim = block.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for i in 0..m {
        if basis.len() == dim {
            break;
        }
        // projection of e_i onto span(block)
        let mut w = vec![0.0; m];
        for v in block {
            let c = v[i];
            for (x, y) in w.iter_mut().zip(v) {
                *x += c * y;
            }
        }
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let norm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-6 {
            w.iter_mut().for_each(|x| *x /= norm);
            basis.push(w);
        }
    }
    basis
}

fn canonicalize_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .expect("max is attained");
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// k-means on the rows of the top-`k` eigenvectors of `S`.
pub fn spectral_cluster(s: &SimilarityMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    spectral_cluster_with_restarts(s, k, seed, DEFAULT_RESTARTS)
}

pub fn spectral_cluster_with_restarts(
    s: &SimilarityMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<ClusterAssignment> {
    let embedding = top_eigenvectors(s.matrix(), k)?;
    kmeans(&embedding, k, seed, restarts)
}

fn choose2(x: usize) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    check_dims(a.len(), b.len()).map_err(|_| input("labelings differ in length"))?;
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0usize; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let rows: f64 = (0..ka)
        .map(|i| choose2(table[i * kb..(i + 1) * kb].iter().sum()))
        .sum();
    let cols: f64 = (0..kb)
        .map(|j| choose2((0..ka).map(|i| table[i * kb + j]).sum()))
        .sum();
    let total = choose2(n);
    let expected = rows * cols / total;
    let max = (rows + cols) / 2.0;
    if max == expected {
        // both partitions trivial in the same way
        return Ok(if index == expected { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Fewest items that must change label for `predicted` to match `truth` up
/// to a relabeling of clusters. Labels must be below 8.
pub fn misclassified(predicted: &[usize], truth: &[usize]) -> Result<usize> {
    check_dims(truth.len(), predicted.len())?;
    let k = predicted.iter().chain(truth).max().map_or(0, |m| m + 1);
    if k > 8 {
        return Err(input("misclassification count supports at most 8 clusters"));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = usize::MAX;
    loop {
        let wrong = predicted.iter().zip(truth).filter(|(&p, &t)| perm[p] != t).count();
        best = best.min(wrong);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Relabels clusters in order of first appearance, so the first item is in
/// cluster 0.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(from, _)| *from == l) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((l, to));
                to
            }
        })
        .collect()
}

/// Same partition up to relabeling.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && misclassified_pairs(a, b) == 0
}

fn misclassified_pairs(a: &[usize], b: &[usize]) -> usize {
    let n = a.len();
    let mut bad = 0;
    for i in 0..n {
        for j in i + 1..n {
            if (a[i] == a[j]) != (b[i] == b[j]) {
                bad += 1;
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::default_labels;

    fn dm(rows: &[&[f64]]) -> DistanceMatrix {
        let m = Matrix::from_rows(rows).unwrap();
        DistanceMatrix::new(default_labels(rows.len()), m, Metric::Nld).unwrap()
    }

    #[test]
    fn similarity_degenerate_cases() {
        let d = dm(&[&[0.0, 2.0, 2.0], &[2.0, 0.0, 2.0], &[2.0, 2.0, 0.0]]);
        assert!(matches!(similarity_matrix(&d), Err(Error::Degenerate(_))));
        let d = dm(&[&[0.0, 4.0], &[4.0, 0.0]]);
        assert!(matches!(similarity_matrix(&d), Err(Error::Degenerate(_))));
    }

    #[test]
    fn similarity_three_graphs() {
        let d = dm(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 3.0], &[2.0, 3.0, 0.0]]);
        let s = similarity_matrix(&d).unwrap();
        // population std of (1,2,3,1,2,3)
        let sigma = libm::sqrt(2.0 / 3.0);
        assert!((s.sigma() - sigma).abs() < 1e-15);
        assert_eq!(s.matrix()[(1, 1)], 1.0);
        assert!((s.matrix()[(1, 2)] - libm::exp(-3.0 / sigma)).abs() < 1e-15);
        assert!(s.matrix()[(0, 1)] > s.matrix()[(0, 2)]);
    }

    #[test]
    fn diagonal_replacement() {
        let d = dm(&[&[0.0, 3.0], &[3.0, 0.0]]);
        assert_eq!(replace_diagonal_with_average(&d).unwrap().as_slice(), &[3.0; 4]);
        let d = dm(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 3.0], &[2.0, 3.0, 0.0]]);
        let r = replace_diagonal_with_average(&d).unwrap();
        assert_eq!(r[(0, 0)], 1.5);
        assert_eq!(r[(2, 2)], 2.5);
        assert_eq!(r[(1, 2)], 3.0);
        let one = dm(&[&[0.0]]);
        assert!(replace_diagonal_with_average(&one).is_err());
    }

    #[test]
    fn kmeans_separated_points() {
        let a = kmeans_on_row(&[0.0, 0.01, 10.0, 10.01], 2, 3, 10).unwrap();
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
    }

    #[test]
    fn kmeans_k_equals_m() {
        let a = kmeans_on_row(&[1.0, 5.0, 2.0], 3, 0, 5).unwrap();
        assert_eq!(a.inertia, 0.0);
        let mut l = a.labels.clone();
        l.sort();
        assert_eq!(l, [0, 1, 2]);
    }

    #[test]
    fn kmeans_errors() {
        assert!(kmeans_on_row(&[1.0, 2.0], 3, 0, 1).is_err());
        assert!(kmeans_on_row(&[1.0, 2.0], 1, 0, 0).is_err());
        assert!(kmeans_on_row(&[1.0, f64::NAN], 1, 0, 1).is_err());
    }

    #[test]
    fn kmeans_duplicate_points() {
        let a = kmeans_on_row(&[1.0, 1.0, 1.0, 1.0], 2, 9, 3).unwrap();
        assert_eq!(a.inertia, 0.0);
        assert!(a.labels.contains(&0) && a.labels.contains(&1));
    }

    #[test]
    fn lloyd_inertia_nonincreasing() {
        let mut coords = Vec::new();
        let mut rng = SeededStream::new(99, 0);
        for _ in 0..60 {
            coords.push(rng.uniform());
            coords.push(rng.uniform() * 3.0);
        }
        let points = Matrix::from_vec(60, 2, coords).unwrap();
        for s in 0..20 {
            let mut rng = SeededStream::new(s, 0);
            let (run, hist) = lloyd(&points, 4, &mut rng);
            assert!(hist.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            assert!(run.inertia <= hist[0] + 1e-12);
        }
    }

    #[test]
    fn spectral_block_constant() {
        let mut s = Matrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                s[(i, j)] = if (i < 3) == (j < 3) { 1.0 } else { 0.1 };
            }
        }
        let sim = SimilarityMatrix {
            entries: s,
            sigma: 1.0,
            source_metric: Metric::Nld,
        };
        let a = spectral_cluster(&sim, 2, 1).unwrap();
        assert!(same_partition(&a.labels, &[0, 0, 0, 1, 1, 1]));
    }

    #[test]
    fn canonical_degenerate_basis() {
        // identity: every basis is an eigenbasis, canonical one is e_0, e_1
        let v = top_eigenvectors(&Matrix::identity(4), 2).unwrap();
        assert_eq!(v.column(0), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.column(1), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn ari_cases() {
        let a = [0, 0, 1, 1, 2];
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        assert!((adjusted_rand_index(&a, &[2, 2, 0, 0, 1]).unwrap() - 1.0).abs() < 1e-15);
        let x = [1, 1, 1, 1, 2, 2, 2, 2];
        assert_eq!(adjusted_rand_index(&x, &[1; 8]).unwrap(), 0.0);
        assert!(adjusted_rand_index(&x, &[1; 3]).is_err());
    }

    #[test]
    fn misclassification_counts() {
        assert_eq!(misclassified(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 0);
        assert_eq!(misclassified(&[0, 1, 1, 1], &[0, 0, 1, 1]).unwrap(), 1);
        assert!(same_partition(&[2, 1, 2], &[0, 1, 0]));
        assert!(!same_partition(&[0, 1, 1], &[0, 0, 1]));
        assert_eq!(canonical_labels(&[3, 3, 1, 0, 1]), [0, 0, 1, 2, 1]);
    }
}
