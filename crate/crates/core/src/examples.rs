//! Two parametric families of bound-entangled three-mode states, their
//! class boundaries, grid scans, and a Monte Carlo check of the
//! random-displacement preparation recipe.
//!
//! Family 1 adds two rank-one terms to a two-mode squeezed state of A and B
//! with C in vacuum; it never becomes fully separable. Family 2 adds `α𝟙` to
//! a permutation-symmetric matrix and passes through classes 1, 4 and 5 as
//! `α` grows.

use nalgebra::{DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::classify;
use crate::cm::{twisted_heisenberg_check, CorrelationMatrix, Party};
use crate::error::{Error, Result};
use crate::linalg::{RMat, ToleranceConfig};
use crate::sepcrit::is_fully_separable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example1Params {
    pub c: f64,
    pub a1: f64,
    pub a2: f64,
}

/// The edge instance of family 1 (PPT boundary for party A, to 7 digits).
pub const EXAMPLE1_EDGE: Example1Params = Example1Params {
    c: 0.3,
    a1: 1.0,
    a2: 0.5531095,
};

pub const P1_VECTOR: [f64; 6] = [0.0, 1.0, 0.0, 1.0, 1.0, 2.0];
pub const P2_VECTOR: [f64; 6] = [1.0, 0.0, -1.0, 0.0, 0.0, 1.0];

fn outer(v: &[f64; 6]) -> RMat {
    let v = DVector::from_row_slice(v);
    &v * v.transpose()
}

/// Two-mode squeezed state of A and B with squeezing parameter `c`, C in vacuum.
pub fn example1_base(c: f64) -> Result<RMat> {
    if !(c.is_finite() && c != 0.0) {
        return Err(Error::InvalidArgument(format!("c must be finite and non-zero, got {c}")));
    }
    let a = (1.0 + c * c).sqrt();
    let mut g = RMat::identity(6, 6);
    for k in 0..4 {
        g[(k, k)] = a;
    }
    g[(0, 2)] = c;
    g[(2, 0)] = c;
    g[(1, 3)] = -c;
    g[(3, 1)] = -c;
    Ok(g)
}

/// `a1 p1 p1ᵀ + a2 p2 p2ᵀ`, the noise added to the base state.
pub fn example1_noise(a1: f64, a2: f64) -> RMat {
    outer(&P1_VECTOR) * a1 + outer(&P2_VECTOR) * a2
}

pub fn example1_cm(p: &Example1Params) -> Result<CorrelationMatrix> {
    if !(p.a1.is_finite() && p.a2.is_finite() && p.a1 >= 0.0 && p.a2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "a1, a2 must be finite and non-negative, got {}, {}",
            p.a1, p.a2
        )));
    }
    CorrelationMatrix::new(example1_base(p.c)? + example1_noise(p.a1, p.a2))
}

/// The `a2` at which family 1's partial transpose for party A becomes
/// positive, by bisection on its smallest eigenvalue over `[0, a2_max]`.
pub fn example1_ppt_boundary_a2(c: f64, a1: f64, a2_max: f64) -> Result<f64> {
    let min_eig = |a2: f64| -> Result<f64> {
        let cm = example1_cm(&Example1Params { c, a1, a2 })?;
        Ok(twisted_heisenberg_check(&cm, Some(Party::A), 1e-9)?.min_eigenvalue)
    };
    let (mut lo, mut hi) = (0.0, a2_max);
    if min_eig(lo)? >= 0.0 || min_eig(hi)? < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "no PPT boundary for party A in a2 ∈ [0, {a2_max}]"
        )));
    }
    while hi - lo > 1e-15 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if min_eig(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example2Params {
    pub a: f64,
    pub alpha: f64,
}

impl Example2Params {
    fn root(&self) -> f64 {
        (9.0 * self.a * self.a - 8.0).sqrt()
    }

    pub fn b(&self) -> f64 {
        (5.0 * self.a - self.root()) / 4.0
    }

    pub fn c(&self) -> f64 {
        (self.a - self.root()) / 4.0
    }
}

/// Permutation-symmetric matrix with diagonal `(a, b, a, b, a, b)`, position
/// couplings `c` and momentum couplings `-c`, plus `α𝟙`.
pub fn example2_cm(p: &Example2Params) -> Result<CorrelationMatrix> {
    if !(p.a.is_finite() && p.a > 1.0) {
        return Err(Error::InvalidArgument(format!("a must exceed 1, got {}", p.a)));
    }
    if !(p.alpha.is_finite() && p.alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {}", p.alpha)));
    }
    let (a, b, c) = (p.a, p.b(), p.c());
    let mut g = RMat::zeros(6, 6);
    for i in 0..3 {
        g[(2 * i, 2 * i)] = a + p.alpha;
        g[(2 * i + 1, 2 * i + 1)] = b + p.alpha;
        for j in 0..3 {
            if i != j {
                g[(2 * i, 2 * j)] = c;
                g[(2 * i + 1, 2 * j + 1)] = -c;
            }
        }
    }
    CorrelationMatrix::new(g)
}

/// Amount of `α𝟙` needed to make family 2 PPT: the magnitude of the most
/// negative eigenvalue of the partially transposed `γ - iJ` at `α = 0`.
pub fn alpha0(a: f64) -> Result<f64> {
    let cm = example2_cm(&Example2Params { a, alpha: 0.0 })?;
    let check = twisted_heisenberg_check(&cm, Some(Party::A), 1e-9)?;
    Ok((-check.min_eigenvalue).max(0.0))
}

/// Smallest `α` at which family 2 becomes fully separable, to within
/// `bracket_tol`, by bisection of the separability verdict over
/// `[alpha0(a), 1]`. A coarse pre-scan checks that the verdict switches
/// exactly once.
pub fn alpha1(a: f64, bracket_tol: f64, tol: &ToleranceConfig) -> Result<f64> {
    if !(bracket_tol.is_finite() && bracket_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bracket tolerance must be positive, got {bracket_tol}"
        )));
    }
    let lo0 = alpha0(a)?;
    let hi0 = 1.0_f64.max(lo0);
    let verdict = |alpha: f64| -> Result<bool> {
        Ok(is_fully_separable(&example2_cm(&Example2Params { a, alpha })?, tol)?.separable)
    };
    const SCAN: usize = 20;
    let alphas: Vec<f64> = (0..=SCAN)
        .map(|k| lo0 + (hi0 - lo0) * k as f64 / SCAN as f64)
        .collect();
    let verdicts = alphas.iter().map(|&x| verdict(x)).collect::<Result<Vec<_>>>()?;
    if verdicts[0] {
        return Ok(lo0);
    }
    let first_true = verdicts.iter().position(|&v| v).ok_or_else(|| {
        Error::NonMonotone(format!("not fully separable anywhere on [{lo0}, {hi0}]"))
    })?;
    if let Some(k) = verdicts[first_true..].iter().position(|&v| !v) {
        return Err(Error::NonMonotone(format!(
            "verdict returns to inseparable at alpha = {}",
            alphas[first_true + k]
        )));
    }
    let (mut lo, mut hi) = (alphas[first_true - 1], alphas[first_true]);
    while hi - lo > bracket_tol {
        let mid = 0.5 * (lo + hi);
        if verdict(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One grid point of a scan; for family 1 `(param1, param2) = (a1, a2)`,
/// for family 2 `(a, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub param1: f64,
    pub param2: f64,
    pub class: u8,
}

/// `n` equally spaced points `hi/n, 2hi/n, …, hi`.
pub fn open_grid(hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| hi * k as f64 / n as f64).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(v) => Err(Error::InvalidArgument(format!("bad grid value {v}"))),
        None => Ok(()),
    }
}

/// Classes over `a1_grid × a2_grid`, rows ordered `a1`-major.
pub fn scan_example1(
    c: f64,
    a1_grid: &[f64],
    a2_grid: &[f64],
    tol: &ToleranceConfig,
) -> Result<Vec<ScanRow>> {
    check_grid(a1_grid)?;
    check_grid(a2_grid)?;
    let points: Vec<(f64, f64)> = a1_grid
        .iter()
        .flat_map(|&a1| a2_grid.iter().map(move |&a2| (a1, a2)))
        .collect();
    points
        .par_iter()
        .map(|&(a1, a2)| {
            let cm = example1_cm(&Example1Params { c, a1, a2 })?;
            Ok(ScanRow {
                param1: a1,
                param2: a2,
                class: classify(&cm, tol)?.class_label,
            })
        })
        .collect()
}

pub fn scan_example2(a: f64, alpha_grid: &[f64], tol: &ToleranceConfig) -> Result<Vec<ScanRow>> {
    check_grid(alpha_grid)?;
    alpha_grid
        .par_iter()
        .map(|&alpha| {
            let cm = example2_cm(&Example2Params { a, alpha })?;
            Ok(ScanRow {
                param1: a,
                param2: alpha,
                class: classify(&cm, tol)?.class_label,
            })
        })
        .collect()
}

pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("param1,param2,class\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.param1, r.param2, r.class));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub gamma0: CorrelationMatrix,
    /// Covariance added by the displacements; must be PSD.
    pub p: RMat,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureResult {
    pub empirical: RMat,
    /// Frobenius distance from `γ0 + P`.
    pub deviation: f64,
}

/// Mixes copies of `γ0` displaced by `d ~ N(0, P/2)`; the mixture's
/// correlation matrix is `γ0 + 2 E[d dᵀ]`, which tends to `γ0 + P`.
pub fn randomized_mixture_cm(spec: &MixtureSpec) -> Result<MixtureResult> {
    let dim = spec.gamma0.matrix().nrows();
    if spec.p.nrows() != dim || spec.p.ncols() != dim {
        return Err(Error::InvalidArgument(format!(
            "P must be {dim}x{dim}, got {}x{}",
            spec.p.nrows(),
            spec.p.ncols()
        )));
    }
    if spec.n_samples < 2 {
        return Err(Error::InvalidArgument("at least two samples required".into()));
    }
    if (&spec.p - spec.p.transpose()).norm() > 1e-12 * (1.0 + spec.p.norm()) {
        return Err(Error::InvalidArgument("P must be symmetric".into()));
    }
    let eig = SymmetricEigen::new(spec.p.clone());
    let scale = 1.0 + eig.eigenvalues.amax();
    if let Some(neg) = eig.eigenvalues.iter().find(|&&l| l < -1e-12 * scale) {
        return Err(Error::InvalidArgument(format!("P has negative eigenvalue {neg:e}")));
    }
    // d = V sqrt(Λ/2) ξ
    let factor = &eig.eigenvectors * RMat::from_diagonal(&eig.eigenvalues.map(|l| (0.5 * l.max(0.0)).sqrt()));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut second = RMat::zeros(dim, dim);
    let mut xi = DVector::<f64>::zeros(dim);
    for _ in 0..spec.n_samples {
        for v in xi.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let d = &factor * &xi;
        second.ger(1.0, &d, &d, 1.0);
    }
    let empirical = spec.gamma0.matrix() + second * (2.0 / spec.n_samples as f64);
    let deviation = (&empirical - (spec.gamma0.matrix() + &spec.p)).norm();
    Ok(MixtureResult {
        empirical,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cm::validate_cm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn example2_coefficients() {
        let p = Example2Params { a: 1.2, alpha: 0.0 };
        assert_abs_diff_eq!(p.b(), (6.0 - 4.96f64.sqrt()) / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.c(), (1.2 - 4.96f64.sqrt()) / 4.0, epsilon = 1e-15);
        // commonly quoted six-digit values, which are off in the last digit
        assert_abs_diff_eq!(p.b(), 0.943222, epsilon = 5e-6);
        assert_abs_diff_eq!(p.c(), -0.256778, epsilon = 5e-6);
        let near = Example2Params { a: 1.0 + 1e-12, alpha: 0.0 };
        assert_abs_diff_eq!(near.b(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(near.c(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn example2_shift_is_exact() {
        let g0 = example2_cm(&Example2Params { a: 1.2, alpha: 0.0 }).unwrap();
        let g1 = example2_cm(&Example2Params { a: 1.2, alpha: 0.37 }).unwrap();
        assert_eq!(g1.matrix(), &(g0.matrix() + RMat::identity(6, 6) * 0.37));
    }

    #[test]
    fn example2_is_permutation_symmetric() {
        let g = example2_cm(&Example2Params { a: 1.2, alpha: 0.0 }).unwrap();
        for perm in [[1, 0, 2], [0, 2, 1], [2, 0, 1]] {
            assert_eq!(g.permute_modes(&perm).unwrap().matrix(), g.matrix());
        }
    }

    #[test]
    fn example_constructors_reject_bad_params() {
        assert!(example2_cm(&Example2Params { a: 1.0, alpha: 0.0 }).is_err());
        assert!(example2_cm(&Example2Params { a: 1.2, alpha: -0.1 }).is_err());
        assert!(example1_cm(&Example1Params { c: 0.0, a1: 0.0, a2: 0.0 }).is_err());
        assert!(example1_cm(&Example1Params { c: 0.3, a1: -1.0, a2: 0.0 }).is_err());
    }

    #[test]
    fn example1_is_valid() {
        let tol = ToleranceConfig::default();
        for (a1, a2) in [(0.0, 0.0), (1.0, 0.5531095), (2.0, 0.1), (0.3, 1.7)] {
            let cm = example1_cm(&Example1Params { c: 0.3, a1, a2 }).unwrap();
            assert!(validate_cm(&cm, &tol).unwrap().valid);
        }
    }

    #[test]
    fn alpha0_limits() {
        assert_abs_diff_eq!(alpha0(1.2).unwrap(), 0.29756, epsilon = 1e-4);
        assert!(alpha0(1.0 + 1e-9).unwrap() < 1e-3);
        assert!(alpha0(1.5).unwrap() > alpha0(1.2).unwrap());
    }

    #[test]
    fn zero_mixing_is_exact() {
        let spec = MixtureSpec {
            gamma0: CorrelationMatrix::identity(3),
            p: RMat::zeros(6, 6),
            n_samples: 100,
            seed: 1,
        };
        let r = randomized_mixture_cm(&spec).unwrap();
        assert_eq!(r.deviation, 0.0);
        assert_eq!(&r.empirical, spec.gamma0.matrix());
    }

    #[test]
    fn mixing_rejects_negative_p() {
        let spec = MixtureSpec {
            gamma0: CorrelationMatrix::identity(3),
            p: -RMat::identity(6, 6),
            n_samples: 100,
            seed: 1,
        };
        assert!(matches!(randomized_mixture_cm(&spec), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn csv_format() {
        let rows = [ScanRow {
            param1: 0.1,
            param2: 2.0,
            class: 4,
        }];
        assert_eq!(scan_to_csv(&rows), "param1,param2,class\n0.1,2,4\n");
    }
}
