//! Correlation matrices: validity, partial transposition, local symplectic
//! action and random generation.
//!
//! The vacuum correlation matrix is the identity.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, is_psd, is_psd_real, kernel_basis, minus_i, symplectic_form, CMat,
    HermitianCheck, ToleranceConfig, RMat,
};

/// Real symmetric `2n x 2n` matrix with mode-wise ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n_modes: usize,
    gamma: RMat,
}

impl CorrelationMatrix {
    /// Builds from a matrix symmetric within the default positivity tolerance.
    pub fn new(gamma: RMat) -> Result<Self> {
        Self::with_tolerance(gamma, ToleranceConfig::default().psd)
    }

    /// Rejects asymmetry above `sym_tol * (1 + ||γ||)`; the stored matrix is
    /// the exact symmetric part.
    pub fn with_tolerance(gamma: RMat, sym_tol: f64) -> Result<Self> {
        let (r, c) = gamma.shape();
        if r != c {
            return Err(Error::InvalidArgument(format!("matrix is not square: {r}x{c}")));
        }
        if r == 0 || r % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "dimension must be even and positive, got {r}"
            )));
        }
        if gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let asym = (&gamma - gamma.transpose()).norm();
        if asym > sym_tol * (1.0 + gamma.norm()) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symmetric: ||γ - γᵀ|| = {asym:e}"
            )));
        }
        let gamma = (&gamma + gamma.transpose()).scale(0.5);
        Ok(Self {
            n_modes: r / 2,
            gamma,
        })
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Self::new(RMat::from_row_slice(dim, dim, data))
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            n_modes,
            gamma: RMat::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &RMat {
        &self.gamma
    }

    pub fn into_matrix(self) -> RMat {
        self.gamma
    }

    /// The 2x2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        Matrix2::from_fn(|r, c| self.gamma[(2 * i + r, 2 * j + c)])
    }

    /// Reorders modes: mode `k` of the result is mode `perm[k]` of `self`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_modes];
        if perm.len() != self.n_modes
            || perm.iter().any(|&p| p >= self.n_modes || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a mode permutation")));
        }
        let dim = 2 * self.n_modes;
        let src = |i: usize| 2 * perm[i / 2] + i % 2;
        Ok(Self {
            n_modes: self.n_modes,
            gamma: RMat::from_fn(dim, dim, |i, j| self.gamma[(src(i), src(j))]),
        })
    }
}

/// One of the three parties of a three-mode state; party `A` is mode 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn mode(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 1,
            Party::C => 2,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        };
        f.write_str(s)
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Party::A),
            "B" | "b" => Ok(Party::B),
            "C" | "c" => Ok(Party::C),
            other => Err(Error::InvalidArgument(format!("unknown party {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub symmetric_ok: bool,
    pub positive_ok: bool,
    /// Smallest eigenvalue of `γ - iJ`.
    pub heisenberg_min_eig: f64,
    pub valid: bool,
    /// Smallest eigenvalue of `γ + J γ⁻¹ J`; NaN when γ is not invertible.
    pub cross_check_min_eig: f64,
    pub cross_check_ok: bool,
}

/// Physical validity from `γ - iJ >= 0`, with `γ + Jγ⁻¹J >= 0` reported
/// alongside as an independent cross-check.
pub fn validate_cm(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<ValidityReport> {
    let g = gamma.matrix();
    let j = symplectic_form(gamma.n_modes())?;
    let symmetric_ok = (g - g.transpose()).norm() <= tol.psd * (1.0 + g.norm());

    let g_eigs = hermitian_eigenvalues(&crate::linalg::to_complex(g));
    let g_norm = g_eigs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let positive_ok = g_eigs[0] > tol.psd * (1.0 + g_norm);

    let heis = is_psd(&minus_i(g, j.matrix()), tol.psd)?;

    let (cross_check_min_eig, cross_check_ok) = match g.clone().try_inverse() {
        Some(inv) if positive_ok => {
            let m = g + j.matrix() * inv * j.matrix();
            let m = (&m + m.transpose()).scale(0.5);
            let check = is_psd_real(&m, tol.psd)?;
            (check.min_eigenvalue, check.verdict)
        }
        _ => (f64::NAN, false),
    };

    Ok(ValidityReport {
        symmetric_ok,
        positive_ok,
        heisenberg_min_eig: heis.min_eigenvalue,
        valid: symmetric_ok && positive_ok && heis.verdict,
        cross_check_min_eig,
        cross_check_ok,
    })
}

pub(crate) fn require_valid(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<()> {
    let report = validate_cm(gamma, tol)?;
    if !report.valid {
        return Err(Error::PreconditionViolation(format!(
            "not a physical correlation matrix (min eigenvalue of γ - iJ is {:e})",
            report.heisenberg_min_eig
        )));
    }
    Ok(())
}

/// Purity test `|det γ - 1| <= tol.rank`.
pub fn is_pure(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<bool> {
    require_valid(gamma, tol)?;
    Ok((gamma.matrix().determinant() - 1.0).abs() <= tol.rank)
}

/// Number of zero eigenvalues of `γ - iJ` at the kernel tolerance.
pub fn heisenberg_kernel_dim(gamma: &CorrelationMatrix, tol: f64) -> Result<usize> {
    let j = symplectic_form(gamma.n_modes())?;
    Ok(kernel_basis(&minus_i(gamma.matrix(), j.matrix()), tol)?.len())
}

/// `Λ γ Λ` where `Λ` flips the momentum of every mode in `modes`.
pub fn partial_transpose_modes(gamma: &CorrelationMatrix, modes: &[usize]) -> Result<CorrelationMatrix> {
    if let Some(&m) = modes.iter().find(|&&m| m >= gamma.n_modes()) {
        return Err(Error::InvalidArgument(format!(
            "mode {m} out of range for {} modes",
            gamma.n_modes()
        )));
    }
    let dim = 2 * gamma.n_modes();
    let sign = |i: usize| {
        if i % 2 == 1 && modes.contains(&(i / 2)) {
            -1.0
        } else {
            1.0
        }
    };
    let g = gamma.matrix();
    Ok(CorrelationMatrix {
        n_modes: gamma.n_modes(),
        gamma: RMat::from_fn(dim, dim, |i, j| sign(i) * sign(j) * g[(i, j)]),
    })
}

pub fn partial_transpose(gamma: &CorrelationMatrix, party: Party) -> Result<CorrelationMatrix> {
    partial_transpose_modes(gamma, &[party.mode()])
}

/// `γ - iJ̃` where `J̃` has the sign of `party`'s block flipped, or the plain
/// `γ - iJ` for `None`. Positivity of this matrix for a party is positivity of
/// the partial transpose with respect to that party.
pub fn twisted_heisenberg(gamma: &CorrelationMatrix, party: Option<Party>) -> Result<CMat> {
    let j = symplectic_form(gamma.n_modes())?;
    let jt = match party {
        None => j.matrix().clone(),
        Some(p) => {
            if p.mode() >= gamma.n_modes() {
                return Err(Error::InvalidArgument(format!(
                    "party {p} out of range for {} modes",
                    gamma.n_modes()
                )));
            }
            j.flipped(&[p.mode()])
        }
    };
    Ok(minus_i(gamma.matrix(), &jt))
}

pub fn twisted_heisenberg_check(
    gamma: &CorrelationMatrix,
    party: Option<Party>,
    tol: f64,
) -> Result<HermitianCheck> {
    is_psd(&twisted_heisenberg(gamma, party)?, tol)
}

pub fn is_symplectic_2x2(s: &Matrix2<f64>, tol: f64) -> bool {
    let j = crate::linalg::j1();
    (s.transpose() * j * s - j).norm() <= tol * (1.0 + s.norm_squared())
}

/// `Sᵀ γ S` with `S` the direct sum of one 2x2 symplectic block per mode.
pub fn apply_local_symplectic(
    gamma: &CorrelationMatrix,
    blocks: &[Matrix2<f64>],
    tol: &ToleranceConfig,
) -> Result<CorrelationMatrix> {
    if blocks.len() != gamma.n_modes() {
        return Err(Error::InvalidArgument(format!(
            "need {} local blocks, got {}",
            gamma.n_modes(),
            blocks.len()
        )));
    }
    if let Some(k) = blocks.iter().position(|s| !is_symplectic_2x2(s, tol.psd)) {
        return Err(Error::InvalidArgument(format!("block {k} is not symplectic")));
    }
    let dyn_blocks: Vec<RMat> = blocks.iter().map(crate::linalg::mat2_to_dyn).collect();
    let s = crate::linalg::direct_sum(&dyn_blocks);
    let out = s.transpose() * gamma.matrix() * &s;
    Ok(CorrelationMatrix {
        n_modes: gamma.n_modes(),
        gamma: (&out + out.transpose()).scale(0.5),
    })
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// `R(θ1) diag(e^r, e^-r) R(θ2)`.
pub fn euler_symplectic(theta1: f64, r: f64, theta2: f64) -> Matrix2<f64> {
    rotation(theta1) * Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp()) * rotation(theta2)
}

/// Random one-mode symplectic with angles uniform in `[0, 2π)` and squeezing
/// uniform in `[-r_max, r_max]`.
pub fn sample_symplectic_2x2<R: Rng + ?Sized>(rng: &mut R, r_max: f64) -> Matrix2<f64> {
    let tau = std::f64::consts::TAU;
    let t1 = rng.random_range(0.0..tau);
    let r = if r_max > 0.0 {
        rng.random_range(-r_max..=r_max)
    } else {
        0.0
    };
    let t2 = rng.random_range(0.0..tau);
    euler_symplectic(t1, r, t2)
}

pub fn random_symplectic_2x2(seed: u64) -> Matrix2<f64> {
    sample_symplectic_2x2(&mut ChaCha8Rng::seed_from_u64(seed), 1.0)
}

/// Passive rotation mixing modes `i` and `j` (both `x` and `p` by the same angle).
fn beam_splitter(n_modes: usize, i: usize, j: usize, theta: f64) -> RMat {
    let mut s = RMat::identity(2 * n_modes, 2 * n_modes);
    let (sn, cs) = theta.sin_cos();
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = cs;
        s[(a, b)] = sn;
        s[(b, a)] = -sn;
        s[(b, b)] = cs;
    }
    s
}

/// Parameters for [`random_cm_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCmSpec {
    pub n_modes: usize,
    pub symplectic_depth: usize,
    pub d_max: f64,
    /// Largest one-mode squeezing parameter.
    pub r_max: f64,
}

/// `γ = Sᵀ D S` with `D` carrying one symplectic eigenvalue in `[1, d_max]`
/// per mode and `S` a product of `symplectic_depth` layers, each made of
/// random local symplectics followed by a random pairwise beam splitter.
pub fn random_cm_with<R: Rng + ?Sized>(spec: &RandomCmSpec, rng: &mut R) -> Result<CorrelationMatrix> {
    let n = spec.n_modes;
    if n < 1 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    if !(spec.d_max >= 1.0) || !spec.d_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "d_max must be >= 1, got {}",
            spec.d_max
        )));
    }
    let mut diag = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let d = if spec.d_max > 1.0 {
            rng.random_range(1.0..=spec.d_max)
        } else {
            1.0
        };
        diag.extend([d, d]);
    }
    let mut s = RMat::identity(2 * n, 2 * n);
    for _ in 0..spec.symplectic_depth {
        let locals: Vec<RMat> = (0..n)
            .map(|_| crate::linalg::mat2_to_dyn(&sample_symplectic_2x2(rng, spec.r_max)))
            .collect();
        s = crate::linalg::direct_sum(&locals) * s;
        if n >= 2 {
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            s = beam_splitter(n, i, j, theta) * s;
        }
    }
    let d = RMat::from_diagonal(&nalgebra::DVector::from_vec(diag));
    let g = s.transpose() * d * &s;
    Ok(CorrelationMatrix {
        n_modes: n,
        gamma: (&g + g.transpose()).scale(0.5),
    })
}

/// Seeded random correlation matrix with squeezing bounded by `r_max = 1`.
pub fn random_cm(
    n_modes: usize,
    seed: u64,
    symplectic_depth: usize,
    d_max: f64,
) -> Result<CorrelationMatrix> {
    let spec = RandomCmSpec {
        n_modes,
        symplectic_depth,
        d_max,
        r_max: 1.0,
    };
    random_cm_with(&spec, &mut ChaCha8Rng::seed_from_u64(seed))
}
