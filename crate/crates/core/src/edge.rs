//! Edge correlation matrices: PPT but not fully separable states from which
//! no positive matrix can be subtracted without leaving the PPT set.
//!
//! Such a matrix is recognized through the real span `K` of the real and
//! imaginary parts of every kernel vector of `γ - iJ̃ₓ`, for `x` ranging over
//! no transpose and the three single-party transposes. It is an edge matrix
//! iff `K = ℝ⁶` and it is not a direct sum of one-mode matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::cm::{require_valid, twisted_heisenberg, twisted_heisenberg_check, CorrelationMatrix, Party};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, real_span_dim, symplectic_form, CVec, RMat, ToleranceConfig};
use crate::sepcrit::is_fully_separable;

/// Which symplectic form: the plain one, or one with a party's sign flipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FormIndex {
    #[serde(rename = "0")]
    Zero,
    A,
    B,
    C,
}

impl FormIndex {
    pub const ALL: [FormIndex; 4] = [FormIndex::Zero, FormIndex::A, FormIndex::B, FormIndex::C];

    pub fn party(self) -> Option<Party> {
        match self {
            FormIndex::Zero => None,
            FormIndex::A => Some(Party::A),
            FormIndex::B => Some(Party::B),
            FormIndex::C => Some(Party::C),
        }
    }
}

impl fmt::Display for FormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.party() {
            None => f.write_str("0"),
            Some(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for FormIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(FormIndex::Zero),
            other => Ok(match other.parse::<Party>()? {
                Party::A => FormIndex::A,
                Party::B => FormIndex::B,
                Party::C => FormIndex::C,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSpace {
    pub k_dim: usize,
    /// Complex kernel dimension of `γ - iJ̃ₓ` for `x = 0, A, B, C`.
    pub kernel_dims: [usize; 4],
    /// Real kernel dimension of `γ + J̃ₓ γ⁻¹ J̃ₓ`, expected to be twice the above.
    pub cross_check_dims: [usize; 4],
    pub basis: Vec<CVec>,
    pub warnings: Vec<String>,
}

fn flipped_form(x: FormIndex) -> Result<RMat> {
    let j = symplectic_form(3)?;
    Ok(match x.party() {
        None => j.matrix().clone(),
        Some(p) => j.flipped(&[p.mode()]),
    })
}

fn inverse(gamma: &CorrelationMatrix) -> Result<RMat> {
    gamma
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("correlation matrix is singular".into()))
}

/// `γ + J̃ₓ γ⁻¹ J̃ₓ`, symmetrized.
fn real_form(gamma: &CorrelationMatrix, inv: &RMat, x: FormIndex) -> Result<RMat> {
    let j = flipped_form(x)?;
    let m = gamma.matrix() + &j * inv * &j;
    Ok((&m + m.transpose()).scale(0.5))
}

fn real_kernel_dim(m: &RMat, tol: f64) -> usize {
    let eig = SymmetricEigen::new(m.clone());
    let threshold = tol * (1.0 + eig.eigenvalues.amax());
    eig.eigenvalues.iter().filter(|l| l.abs() <= threshold).count()
}

fn k_space_unchecked(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<KSpace> {
    let inv = inverse(gamma)?;
    let mut basis = Vec::new();
    let mut kernel_dims = [0; 4];
    let mut cross_check_dims = [0; 4];
    let mut warnings = Vec::new();
    for (k, x) in FormIndex::ALL.into_iter().enumerate() {
        let kernel = kernel_basis(&twisted_heisenberg(gamma, x.party())?, tol.kernel_edge)?;
        kernel_dims[k] = kernel.len();
        cross_check_dims[k] = real_kernel_dim(&real_form(gamma, &inv, x)?, tol.kernel_edge);
        if cross_check_dims[k] != 2 * kernel_dims[k] {
            warnings.push(format!(
                "x = {x}: complex kernel dimension {} but real kernel dimension {} of γ + J̃γ⁻¹J̃",
                kernel_dims[k], cross_check_dims[k]
            ));
        }
        basis.extend(kernel);
    }
    Ok(KSpace {
        k_dim: real_span_dim(&basis, tol.rank)?,
        kernel_dims,
        cross_check_dims,
        basis,
        warnings,
    })
}

fn is_ppt_at(gamma: &CorrelationMatrix, psd_tol: f64) -> Result<bool> {
    for x in FormIndex::ALL {
        if !twisted_heisenberg_check(gamma, x.party(), psd_tol)?.verdict {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Kernels are collected at `tol.kernel_edge`, and PPT is also judged at that
/// threshold.
pub fn k_space(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<KSpace> {
    if !is_ppt_at(gamma, tol.kernel_edge)? {
        return Err(Error::PreconditionViolation("k-space requires a PPT state".into()));
    }
    k_space_unchecked(gamma, tol)
}

/// Largest violation of `f_I = γ⁻¹ J̃ₓ f_R` and `(γ + J̃ₓγ⁻¹J̃ₓ) f_{R,I} = 0`
/// over the kernel basis of `γ - iJ̃ₓ`; zero for an empty kernel.
pub fn verify_char_k(gamma: &CorrelationMatrix, x: FormIndex, tol: &ToleranceConfig) -> Result<f64> {
    let inv = inverse(gamma)?;
    let j = flipped_form(x)?;
    let m = real_form(gamma, &inv, x)?;
    let kernel = kernel_basis(&twisted_heisenberg(gamma, x.party())?, tol.kernel_edge)?;
    let mut worst = 0.0_f64;
    for f in kernel {
        let fr = f.map(|z| z.re);
        let fi = f.map(|z| z.im);
        worst = worst
            .max((&fi - &inv * &j * &fr).norm())
            .max((&m * &fr).norm())
            .max((&m * &fi).norm());
    }
    Ok(worst)
}

/// All inter-party 2x2 blocks vanish within `tol.psd * (1 + ||γ||)`.
pub fn is_direct_sum(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> bool {
    let bound = tol.psd * (1.0 + gamma.matrix().norm());
    let n = gamma.n_modes();
    (0..n).all(|i| (i + 1..n).all(|j| gamma.block(i, j).norm() <= bound))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub k_dim: usize,
    pub kernel_dims: [usize; 4],
    pub is_direct_sum: bool,
    pub ppt_ok: bool,
    pub separable: bool,
    pub is_edge: bool,
    pub kernel_tolerance: f64,
    pub warnings: Vec<String>,
}

/// PPT, separability and kernels are all judged at `tol.kernel_edge`, the
/// looser threshold suited to inputs known to limited precision.
pub fn is_edge_cm(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<EdgeReport> {
    if gamma.n_modes() != 3 {
        return Err(Error::InvalidArgument("edge detection needs three modes".into()));
    }
    require_valid(gamma, tol)?;
    let edge_tol = tol.with_psd(tol.kernel_edge);
    let ppt_ok = is_ppt_at(gamma, edge_tol.psd)?;
    let ks = k_space_unchecked(gamma, tol)?;
    let separable = ppt_ok && is_fully_separable(gamma, &edge_tol)?.separable;
    let direct = is_direct_sum(gamma, tol);
    Ok(EdgeReport {
        k_dim: ks.k_dim,
        kernel_dims: ks.kernel_dims,
        is_direct_sum: direct,
        ppt_ok,
        separable,
        is_edge: ppt_ok && !separable && ks.k_dim == 6 && !direct,
        kernel_tolerance: tol.kernel_edge,
        warnings: ks.warnings,
    })
}
