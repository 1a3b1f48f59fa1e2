//! Dense matrix primitives shared by the rest of the crate.
//!
//! Phase-space vectors use mode-wise ordering `(x1, p1, x2, p2, ...)`, so the
//! symplectic form is block diagonal with one `[[0, -1], [1, 0]]` block per
//! mode. The sign of `J` never matters for the criteria implemented here:
//! for a real matrix `g`, `g - iJ >= 0` holds iff `g + iJ >= 0`.
//!
//! Every matrix handled by this crate is at most 12x12, so everything is
//! dense and built on `nalgebra`'s dynamic matrices.

use nalgebra::{Complex, DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerances used by every numerical verdict in the crate.
///
/// `psd` is relative to `1 + ||H||` in positivity tests, `rank` is relative to
/// the largest eigenvalue or singular value in kernel and rank cutoffs, and
/// `kernel_edge` is the looser kernel threshold used for edge detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceConfig {
    pub psd: f64,
    pub rank: f64,
    pub kernel_edge: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            psd: 1e-9,
            rank: 1e-8,
            kernel_edge: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn new(psd: f64, rank: f64, kernel_edge: f64) -> Result<Self> {
        for (name, v) in [("psd", psd), ("rank", rank), ("kernel_edge", kernel_edge)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            psd,
            rank,
            kernel_edge,
        })
    }

    /// Same configuration with a different positivity tolerance.
    pub fn with_psd(self, psd: f64) -> Self {
        Self { psd, ..self }
    }
}

/// The symplectic form `J` for `n` modes in mode-wise ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: RMat,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes < 1 {
            return Err(Error::InvalidArgument(
                "symplectic form needs at least one mode".into(),
            ));
        }
        Ok(Self {
            n_modes,
            matrix: block_form(n_modes, &[]),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// `J` with the sign of the blocks of `flipped_modes` reversed. This is
    /// `Λ J Λ` for the partial transposition `Λ` on those modes.
    pub fn flipped(&self, flipped_modes: &[usize]) -> RMat {
        block_form(self.n_modes, flipped_modes)
    }
}

fn block_form(n_modes: usize, flipped: &[usize]) -> RMat {
    let mut j = RMat::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        let s = if flipped.contains(&k) { -1.0 } else { 1.0 };
        j[(2 * k, 2 * k + 1)] = -s;
        j[(2 * k + 1, 2 * k)] = s;
    }
    j
}

pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    SymplecticForm::new(n_modes)
}

/// Single-mode `J`.
pub fn j1() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// Outcome of a positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermitianCheck {
    pub min_eigenvalue: f64,
    pub verdict: bool,
    /// Absolute threshold actually applied, `tol * (1 + ||H||)`.
    pub tolerance_used: f64,
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// `g - i j` for real `g` and `j`.
pub fn minus_i(g: &RMat, j: &RMat) -> CMat {
    g.zip_map(j, |a, b| C64::new(a, -b))
}

pub fn hermitian_part(h: &CMat) -> CMat {
    (h + h.adjoint()).scale(0.5)
}

fn hermiticity_defect(h: &CMat) -> f64 {
    (h - h.adjoint()).norm()
}

fn ensure_square(h: &CMat) -> Result<()> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a non-empty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(())
}

fn ensure_hermitian(h: &CMat, tol: f64) -> Result<()> {
    ensure_square(h)?;
    let defect = hermiticity_defect(h);
    let scale = 1.0 + h.norm();
    if defect > tol * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian: ||H - H^dagger|| = {defect:e}"
        )));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(h))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn spectral_radius(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Positivity test `H >= 0` with threshold `tol * (1 + ||H||)`.
pub fn is_psd(h: &CMat, tol: f64) -> Result<HermitianCheck> {
    ensure_hermitian(h, tol.max(1e-12))?;
    let values = hermitian_eigenvalues(h);
    let tolerance_used = tol * (1.0 + spectral_radius(&values));
    let min_eigenvalue = values[0];
    Ok(HermitianCheck {
        min_eigenvalue,
        verdict: min_eigenvalue >= -tolerance_used,
        tolerance_used,
    })
}

pub fn is_psd_real(h: &RMat, tol: f64) -> Result<HermitianCheck> {
    is_psd(&to_complex(h), tol)
}

/// Moore-Penrose inverse of a PSD matrix, inverting only eigenvalues above
/// `tol.rank` times the largest one.
pub fn pseudo_inverse(h: &CMat, tol: &ToleranceConfig) -> Result<CMat> {
    let check = is_psd(h, tol.psd)?;
    if !check.verdict {
        return Err(Error::InvalidArgument(format!(
            "pseudo-inverse requires a PSD matrix, min eigenvalue {:e}",
            check.min_eigenvalue
        )));
    }
    let (values, vectors) = hermitian_eigen(h);
    Ok(pinv_from_eigen(&values, &vectors, tol.rank))
}

fn pinv_from_eigen(values: &[f64], vectors: &CMat, rank_tol: f64) -> CMat {
    let largest = values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = rank_tol * largest;
    let n = values.len();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        if lam > cutoff && lam > 0.0 {
            let v = vectors.column(k);
            out += (&v * v.adjoint()).scale(1.0 / lam);
        }
    }
    hermitian_part(&out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurComplement {
    pub complement: CMat,
    /// Every kernel vector of the inverted block is annihilated by the
    /// off-diagonal block.
    pub kernel_ok: bool,
}

/// `A - C B⁺ C†` for the block matrix `[[A, C], [C†, B]]` with `B >= 0`.
///
/// Kernel vectors of `B` are those cut by the pseudo-inverse (eigenvalues
/// at most `tol.rank` times the largest). The kernel condition is tested as
/// `||C v|| <= tol.rank * s` where `s` is the largest of `||A||`, `||B||`
/// and `||C||`.
pub fn schur_complement(
    a: &CMat,
    b: &CMat,
    c: &CMat,
    tol: &ToleranceConfig,
) -> Result<SchurComplement> {
    ensure_square(a)?;
    ensure_square(b)?;
    if c.nrows() != a.nrows() || c.ncols() != b.nrows() {
        return Err(Error::InvalidArgument(format!(
            "block dimensions inconsistent: A {}x{}, B {}x{}, C {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let check = is_psd(b, tol.psd)?;
    if !check.verdict {
        return Err(Error::InvalidArgument(format!(
            "Schur complement requires B >= 0, min eigenvalue {:e}",
            check.min_eigenvalue
        )));
    }
    let (values, vectors) = hermitian_eigen(b);
    let largest = values.last().copied().unwrap_or(0.0).max(0.0);
    let scale = a.norm().max(b.norm()).max(c.norm());
    let kernel_ok = values.iter().enumerate().all(|(k, &lam)| {
        if lam > tol.rank * largest && lam > 0.0 {
            return true;
        }
        (c * vectors.column(k)).norm() <= tol.rank * scale
    });
    let b_pinv = pinv_from_eigen(&values, &vectors, tol.rank);
    let complement = hermitian_part(&(a - c * b_pinv * c.adjoint()));
    Ok(SchurComplement {
        complement,
        kernel_ok,
    })
}

/// Orthonormal basis of the eigenvectors of `H` with `|λ| <= tol * (1 + ||H||)`.
pub fn kernel_basis(h: &CMat, tol: f64) -> Result<Vec<CVec>> {
    ensure_hermitian(h, tol.max(1e-12))?;
    let (values, vectors) = hermitian_eigen(h);
    let threshold = tol * (1.0 + spectral_radius(&values));
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, lam)| lam.abs() <= threshold)
        .map(|(k, _)| vectors.column(k).into_owned())
        .collect())
}

/// Dimension of the real span of the real and imaginary parts of `vectors`.
///
/// Singular values at most `rank_tol` times the largest count as zero.
pub fn real_span_dim(vectors: &[CVec], rank_tol: f64) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let len = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != len) {
        return Err(Error::InvalidArgument(format!(
            "vectors of mixed length: {} and {}",
            len,
            bad.len()
        )));
    }
    let cols: Vec<DVector<f64>> = vectors
        .iter()
        .flat_map(|v| [v.map(|z| z.re), v.map(|z| z.im)])
        .collect();
    let m = RMat::from_columns(&cols);
    let sv = m.svd(false, false).singular_values;
    let largest = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rank_tol * largest).count())
}

/// Smallest eigenvalue of a 2x2 Hermitian matrix in closed form.
pub fn min_eig_2x2(m: &Matrix2<C64>) -> f64 {
    let a = m[(0, 0)].re;
    let c = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let half_gap = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    0.5 * (a + c) - half_gap
}

/// Direct sum of square real blocks.
pub fn direct_sum(blocks: &[RMat]) -> RMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = RMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

pub fn mat2_to_dyn(m: &Matrix2<f64>) -> RMat {
    RMat::from_fn(2, 2, |i, j| m[(i, j)])
}
