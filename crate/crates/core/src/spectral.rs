//! Laplacian spectra and heat kernels `exp(-t L)`.
//!
//! A [`Spectrum`] is computed once per graph; every heat kernel afterwards is
//! a weighted outer product of its eigenvectors, so evaluating many time
//! points never multiplies by the Laplacian again.

use alloc::vec::Vec;

use crate::error::{check_dims, input, Error, Result};
use crate::graph::LaplacianMatrix;
use crate::linalg::{symmetric_eigen, Matrix};

/// Symmetry tolerance accepted by [`eigendecompose`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues above `-NEGATIVE_EIG_TOL` are treated as a PSD round-off.
pub const NEGATIVE_EIG_TOL: f64 = 1e-10;

/// Eigenvalues (ascending) and orthonormal eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl Spectrum {
    /// Decomposes any symmetric matrix without Laplacian-specific snapping.
    pub fn of_symmetric(matrix: &Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if !matrix.is_symmetric(SYMMETRY_TOL) {
            return Err(input("matrix is not symmetric"));
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen(matrix)?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    /// `V diag(weights) V^T`, symmetric by construction.
    pub fn weighted_outer(&self, weights: &[f64]) -> Matrix {
        let n = self.n();
        debug_assert_eq!(weights.len(), n);
        let v = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        let mut scaled = alloc::vec![0.0; n];
        for i in 0..n {
            let vi = v.row(i);
            for ((s, &x), &w) in scaled.iter_mut().zip(vi).zip(weights) {
                *s = x * w;
            }
            for j in i..n {
                let vj = v.row(j);
                let mut acc = 0.0;
                for (a, b) in scaled.iter().zip(vj) {
                    acc += a * b;
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        out
    }

    /// Smallest eigenvalue above `threshold`, if any.
    pub fn smallest_above(&self, threshold: f64) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&l| l > threshold)
    }

    /// Multiplicity of the zero eigenvalue (number of connected components
    /// for a graph Laplacian).
    pub fn zero_multiplicity(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() <= tol).count()
    }
}

/// Eigendecomposition of a graph Laplacian.
///
/// Negative round-off eigenvalues are clamped to zero and the smallest
/// eigenvalue is set to exactly zero, so `exp(-t lambda)` never exceeds one.
pub fn eigendecompose(laplacian: &LaplacianMatrix) -> Result<Spectrum> {
    let mut spectrum = Spectrum::of_symmetric(laplacian.matrix())?;
    if let Some(&min) = spectrum.eigenvalues.first() {
        if min < -NEGATIVE_EIG_TOL {
            return Err(Error::Numeric(alloc::format!(
                "Laplacian has negative eigenvalue {min:e}"
            )));
        }
    }
    for l in spectrum.eigenvalues.iter_mut() {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    if let Some(first) = spectrum.eigenvalues.first_mut() {
        *first = 0.0;
    }
    Ok(spectrum)
}

/// `exp(-t L)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernel {
    t: f64,
    entries: Matrix,
}

impl HeatKernel {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// Flow state at time `t` from the initial condition `e_j`.
    pub fn flow_from(&self, j: usize) -> Vec<f64> {
        self.entries.column(j)
    }
}

/// `exp(-t lambda)` for every eigenvalue.
pub(crate) fn decay_weights(spectrum: &Spectrum, t: f64, out: &mut [f64]) {
    for (w, &l) in out.iter_mut().zip(spectrum.eigenvalues()) {
        *w = libm::exp(-t * l);
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(input(alloc::format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Heat kernel through the spectral decomposition `V exp(-t D) V^T`.
pub fn heat_kernel(spectrum: &Spectrum, t: f64) -> Result<HeatKernel> {
    check_time(t)?;
    let mut weights = alloc::vec![0.0; spectrum.n()];
    decay_weights(spectrum, t, &mut weights);
    Ok(HeatKernel {
        t,
        entries: spectrum.weighted_outer(&weights),
    })
}

const MAX_SERIES_TERMS: usize = 200;

/// Heat kernel by scaling and squaring a truncated Taylor series.
///
/// Independent of any eigensolver; used to validate [`heat_kernel`]. The
/// series for `exp(-t L / 2^s)` stops once a term's max-abs entry drops below
/// `tol`, with `s` chosen so the scaled matrix has infinity norm at most 1/2.
pub fn heat_kernel_series_oracle(
    laplacian: &LaplacianMatrix,
    t: f64,
    tol: f64,
) -> Result<HeatKernel> {
    check_time(t)?;
    if !(tol > 0.0) {
        return Err(input("series tolerance must be positive"));
    }
    let n = laplacian.n();
    let a = laplacian.matrix().scale(-t);
    let norm = a.inf_norm();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let b = a.scale(libm::ldexp(1.0, -(squarings as i32)));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=MAX_SERIES_TERMS {
        term = term.matmul(&b)?.scale(1.0 / k as f64);
        sum = sum.add(&term)?;
        if term.max_abs() < tol {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum)?;
    }
    Ok(HeatKernel { t, entries: sum })
}

/// Checks that two spectra act on the same node count.
pub(crate) fn check_same_size(a: &Spectrum, b: &Spectrum) -> Result<()> {
    check_dims(a.n(), b.n())
}
