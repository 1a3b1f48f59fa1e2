//! Full separability of three-mode states that are PPT across every split.
//!
//! Mode A is reduced out with two Schur complements, `N` (against `J`) and
//! `Ñ` (against `J` with mode C's sign flipped). The state is fully separable
//! iff some pure one-mode correlation matrix lies below both, which in the
//! `(y, z)` plane is a common point of one disk and two ellipses
//! ([`geometry`]). Feasible instances can be split into an explicit product
//! of one-mode matrices ([`product_decomposition`]).

pub mod geometry;
mod decompose;

pub use decompose::{product_decomposition, ProductDecomposition};
pub use geometry::{
    candidate_points, check_point, circle_radius, ellipse_params, witness_gamma_a, Candidate,
    CandidateLabel, CandidateSet, EllipseSet, Entries, SepConstraints, SepGeometry,
};

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::cm::{twisted_heisenberg_check, CorrelationMatrix, Party};
use crate::error::{Error, Result};
use crate::linalg::{min_eig_2x2, schur_complement, symplectic_form, to_complex, ToleranceConfig, C64};

/// The two 2x2 Hermitian matrices that bound mode A's one-mode witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPair {
    pub n: Matrix2<C64>,
    pub n_tilde: Matrix2<C64>,
    /// The off-diagonal block annihilates both kernels, so the
    /// pseudo-inverse Schur complements are the true limits.
    pub kernel_ok: bool,
    pub min_eig_n: f64,
    pub min_eig_n_tilde: f64,
}

impl ReducedPair {
    pub fn from_matrices(n: Matrix2<C64>, n_tilde: Matrix2<C64>) -> Self {
        Self {
            n,
            n_tilde,
            kernel_ok: true,
            min_eig_n: min_eig_2x2(&n),
            min_eig_n_tilde: min_eig_2x2(&n_tilde),
        }
    }

    pub fn entries(&self) -> (Entries, Entries) {
        (Entries::of(&self.n), Entries::of(&self.n_tilde))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    TraceCondition,
    DetCondition,
    MNegative,
    NoCandidateFeasible,
    KernelViolation,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::TraceCondition => "trace_condition",
            FailureReason::DetCondition => "det_condition",
            FailureReason::MNegative => "m_negative",
            FailureReason::NoCandidateFeasible => "no_candidate_feasible",
            FailureReason::KernelViolation => "kernel_violation",
        }
    }
}

fn sub2(m: &crate::linalg::CMat, r: usize, c: usize) -> Matrix2<C64> {
    Matrix2::new(m[(r, c)], m[(r, c + 1)], m[(r + 1, c)], m[(r + 1, c + 1)])
}

/// Schur complements of mode A in `γ - iJ` and `γ - iJ̃` (sign of mode C
/// flipped), using pseudo-inverses for singular blocks.
pub fn compute_reduced_pair(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<ReducedPair> {
    if gamma.n_modes() != 3 {
        return Err(Error::InvalidArgument(format!(
            "three modes required, got {}",
            gamma.n_modes()
        )));
    }
    for party in [None, Some(Party::A), Some(Party::B), Some(Party::C)] {
        let check = twisted_heisenberg_check(gamma, party, tol.psd)?;
        if !check.verdict {
            let which = party.map_or("none".to_string(), |p| p.to_string());
            return Err(Error::PreconditionViolation(format!(
                "state is not PPT (transposed party {which}, min eigenvalue {:e})",
                check.min_eigenvalue
            )));
        }
    }
    let g = to_complex(gamma.matrix());
    let a = g.view((0, 0), (2, 2)).into_owned();
    let b = g.view((2, 2), (4, 4)).into_owned();
    let c = g.view((0, 2), (2, 4)).into_owned();
    let j = symplectic_form(2)?;
    let i = C64::new(0.0, 1.0);
    let b_minus = &b - to_complex(j.matrix()) * i;
    let b_minus_tilde = &b - to_complex(&j.flipped(&[1])) * i;

    let s = schur_complement(&a, &b_minus, &c, tol)?;
    let st = schur_complement(&a, &b_minus_tilde, &c, tol)?;
    if !(s.kernel_ok && st.kernel_ok) {
        return Err(Error::InconsistentInput(
            "kernel of B - iJ not contained in kernel of the A-BC coupling block".into(),
        ));
    }
    let pair = ReducedPair::from_matrices(sub2(&s.complement, 0, 0), sub2(&st.complement, 0, 0));
    for (name, m, e) in [("N", &pair.n, pair.min_eig_n), ("Ñ", &pair.n_tilde, pair.min_eig_n_tilde)] {
        let scale = 1.0 + (m[(0, 0)].re + m[(1, 1)].re).abs();
        if e < -tol.psd * scale {
            return Err(Error::InconsistentInput(format!(
                "{name} is not PSD (min eigenvalue {e:e}) although the input is PPT"
            )));
        }
    }
    Ok(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NecessaryCheck {
    pub pass: bool,
    pub failed: Option<FailureReason>,
}

/// `tr N, tr Ñ >= 2` and `det N, det Ñ > 0`: anything dominating a pure
/// one-mode matrix has trace at least 2 and full rank.
pub fn necessary_conditions(pair: &ReducedPair, tol: &ToleranceConfig) -> NecessaryCheck {
    let (e, et) = pair.entries();
    let trace_ok = [e, et]
        .iter()
        .all(|x| x.trace() >= 2.0 - tol.psd * (1.0 + x.trace().abs()));
    let det_ok = [e, et]
        .iter()
        .all(|x| x.det() > tol.psd * (1.0 + x.trace() * x.trace()));
    let failed = if !trace_ok {
        Some(FailureReason::TraceCondition)
    } else if !det_ok {
        Some(FailureReason::DetCondition)
    } else {
        None
    };
    NecessaryCheck {
        pass: failed.is_none(),
        failed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateCheck {
    pub label: CandidateLabel,
    pub point: [f64; 2],
    pub feasible: bool,
    /// Smallest of the three normalized slacks at `point`.
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SepDecision {
    pub separable: bool,
    pub witness_point: Option<[f64; 2]>,
    pub witness_gamma_a: Option<[[f64; 2]; 2]>,
    pub candidates_tested: Vec<CandidateCheck>,
    pub failure_reason: Option<FailureReason>,
    pub geometry: Option<SepGeometry>,
    /// Largest min-slack over the tested candidates.
    pub best_min_slack: Option<f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub pair: Option<ReducedPair>,
}

impl SepDecision {
    fn rejected(reason: FailureReason, pair: Option<ReducedPair>) -> Self {
        Self {
            separable: false,
            witness_point: None,
            witness_gamma_a: None,
            candidates_tested: Vec::new(),
            failure_reason: Some(reason),
            geometry: None,
            best_min_slack: None,
            notes: Vec::new(),
            pair,
        }
    }
}

pub(crate) fn rows2(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Decides the reduced problem: necessary conditions, empty-ellipse exit,
/// then the candidate points in their fixed order. The first feasible
/// candidate becomes the witness.
pub fn decide_pair(pair: &ReducedPair, tol: &ToleranceConfig) -> Result<SepDecision> {
    let nec = necessary_conditions(pair, tol);
    if let Some(reason) = nec.failed {
        return Ok(SepDecision::rejected(reason, Some(*pair)));
    }
    let ellipse = ellipse_params(&pair.n, tol)?;
    let ellipse_tilde = ellipse_params(&pair.n_tilde, tol)?;
    if ellipse.empty || ellipse_tilde.empty {
        let mut d = SepDecision::rejected(FailureReason::MNegative, Some(*pair));
        d.geometry = Some(SepGeometry {
            r_c: circle_radius(pair, tol)?,
            ellipse,
            ellipse_tilde,
        });
        return Ok(d);
    }
    let set = candidate_points(pair, tol)?;
    let constraints = SepConstraints::new(pair);
    let checks: Vec<CandidateCheck> = set
        .candidates
        .iter()
        .map(|c| {
            let p = Vector2::from(c.point);
            CandidateCheck {
                label: c.label,
                point: c.point,
                feasible: constraints.holds(&p, tol),
                min_slack: constraints.min_slack(&p),
            }
        })
        .collect();
    let witness = checks.iter().find(|c| c.feasible).map(|c| c.point);
    let best = checks.iter().map(|c| c.min_slack).fold(f64::NEG_INFINITY, f64::max);
    Ok(SepDecision {
        separable: witness.is_some(),
        witness_point: witness,
        witness_gamma_a: witness.map(|w| rows2(&witness_gamma_a(w))),
        candidates_tested: checks,
        failure_reason: witness.is_none().then_some(FailureReason::NoCandidateFeasible),
        geometry: Some(set.geometry),
        best_min_slack: Some(best),
        notes: set.notes,
        pair: Some(*pair),
    })
}

pub fn is_fully_separable(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<SepDecision> {
    match compute_reduced_pair(gamma, tol) {
        Ok(pair) => decide_pair(&pair, tol),
        Err(Error::InconsistentInput(msg)) => {
            let mut d = SepDecision::rejected(FailureReason::KernelViolation, None);
            d.notes.push(msg);
            Ok(d)
        }
        Err(e) => Err(e),
    }
}
