use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use super::geometry::{candidate_points, witness_gamma_a, SepConstraints};
use super::{rows2, ReducedPair, SepDecision};
use crate::cm::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    direct_sum, is_psd_real, j1, mat2_to_dyn, min_eig_2x2, schur_complement, to_complex, CMat, RMat,
    ToleranceConfig, C64,
};

/// Pure one-mode matrices with `γ >= γ_A ⊕ γ_B ⊕ γ_C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductDecomposition {
    pub gamma_a: [[f64; 2]; 2],
    pub gamma_b: [[f64; 2]; 2],
    pub gamma_c: [[f64; 2]; 2],
    /// Smallest eigenvalue of `γ - γ_A ⊕ γ_B ⊕ γ_C`.
    pub certificate_min_eig: f64,
}

impl ProductDecomposition {
    pub fn blocks(&self) -> [Matrix2<f64>; 3] {
        let m = |r: &[[f64; 2]; 2]| Matrix2::new(r[0][0], r[0][1], r[1][0], r[1][1]);
        [m(&self.gamma_a), m(&self.gamma_b), m(&self.gamma_c)]
    }
}

fn internal(msg: impl Into<String>) -> Error {
    Error::InternalInconsistency(format!(
        "{}; retry with a looser tolerance (--tol-psd / --tol-rank)",
        msg.into()
    ))
}

/// `B - Cᵀ (A - γ_x)⁺ C`: what remains for the other modes once a one-mode
/// matrix `γ_x` has been split off the first mode.
fn split_off_first(g: &RMat, gamma_x: &Matrix2<f64>, tol: &ToleranceConfig) -> Result<RMat> {
    let k = g.nrows() - 2;
    let a = g.view((0, 0), (2, 2)).into_owned() - mat2_to_dyn(gamma_x);
    let b = g.view((2, 2), (k, k)).into_owned();
    let ct = g.view((2, 0), (k, 2)).into_owned();
    let s = schur_complement(&to_complex(&b), &to_complex(&a), &to_complex(&ct), tol)
        .map_err(|e| internal(format!("splitting off a mode failed: {e}")))?;
    if !s.kernel_ok {
        return Err(internal("kernel condition fails when splitting off a mode"));
    }
    let out = s.complement.map(|z| z.re);
    Ok((&out + out.transpose()).scale(0.5))
}

fn to_c2(m: &CMat) -> Matrix2<C64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Splits a separable three-mode matrix into a product of pure one-mode
/// matrices. `γ_A` is the decision's witness; the remaining two-mode matrix
/// is split by the same disk-and-ellipse construction, taking the feasible
/// candidate closest to the ellipse center.
pub fn product_decomposition(
    gamma: &CorrelationMatrix,
    decision: &SepDecision,
    tol: &ToleranceConfig,
) -> Result<ProductDecomposition> {
    let point = match (decision.separable, decision.witness_point) {
        (true, Some(p)) => p,
        _ => {
            return Err(Error::PreconditionViolation(
                "product decomposition needs a separable decision with a witness".into(),
            ))
        }
    };
    if gamma.n_modes() != 3 {
        return Err(Error::InvalidArgument("three modes required".into()));
    }
    let g = gamma.matrix();
    let gamma_a = witness_gamma_a(point);
    let rest = split_off_first(g, &gamma_a, tol)?;

    // Two-mode step: for a single remaining partner, the flipped-sign
    // constraint is the complex conjugate of N'.
    let a2 = to_complex(&rest.view((0, 0), (2, 2)).into_owned());
    let b2 = to_complex(&rest.view((2, 2), (2, 2)).into_owned());
    let c2 = to_complex(&rest.view((0, 2), (2, 2)).into_owned());
    let b2_minus = &b2 - to_complex(&mat2_to_dyn(&j1())) * C64::new(0.0, 1.0);
    let s = schur_complement(&a2, &b2_minus, &c2, tol)
        .map_err(|e| internal(format!("two-mode reduction failed: {e}")))?;
    if !s.kernel_ok {
        return Err(internal("kernel condition fails in the two-mode reduction"));
    }
    let n2 = to_c2(&s.complement);
    let pair = ReducedPair::from_matrices(n2, n2.map(|z| z.conj()));
    let set = candidate_points(&pair, tol).map_err(|e| internal(format!("two-mode step: {e}")))?;
    let constraints = SepConstraints::new(&pair);
    let center = Vector2::from(set.geometry.ellipse.center);
    let point_b = set
        .candidates
        .iter()
        .map(|c| Vector2::from(c.point))
        .filter(|p| constraints.holds(p, tol))
        .min_by(|p, q| (p - center).norm().total_cmp(&(q - center).norm()))
        .ok_or_else(|| internal("no feasible point for the second mode"))?;
    let gamma_b = witness_gamma_a(point_b.into());

    let rest_c = split_off_first(&rest, &gamma_b, tol)?;
    let gamma_c = Matrix2::new(rest_c[(0, 0)], rest_c[(0, 1)], rest_c[(1, 0)], rest_c[(1, 1)]);
    let heis = gamma_c.map(|x| C64::new(x, 0.0)) - j1().map(|x| C64::new(0.0, x));
    let scale = 1.0 + gamma_c.trace().abs();
    if min_eig_2x2(&heis) < -tol.rank * scale {
        return Err(internal(format!(
            "remaining one-mode matrix is not a valid correlation matrix (min eigenvalue {:e})",
            min_eig_2x2(&heis)
        )));
    }

    let sum = direct_sum(&[mat2_to_dyn(&gamma_a), mat2_to_dyn(&gamma_b), mat2_to_dyn(&gamma_c)]);
    let check = is_psd_real(&(g - sum), tol.rank)?;
    if !check.verdict {
        return Err(internal(format!(
            "certificate γ - γ_A ⊕ γ_B ⊕ γ_C has min eigenvalue {:e}",
            check.min_eigenvalue
        )));
    }
    Ok(ProductDecomposition {
        gamma_a: rows2(&gamma_a),
        gamma_b: rows2(&gamma_b),
        gamma_c: rows2(&gamma_c),
        certificate_min_eig: check.min_eigenvalue,
    })
}
