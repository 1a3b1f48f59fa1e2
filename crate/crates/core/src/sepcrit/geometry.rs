//! Planar geometry of the full-separability problem.
//!
//! A pure one-mode correlation matrix is parameterized by a point `(y, z)`;
//! it lies below a 2x2 Hermitian `R` iff the point is inside a disk around
//! the origin and inside an ellipse determined by `R`. Full separability asks
//! for a common point of the smaller disk and the two ellipses of `N` and
//! `Ñ`, and a common point exists iff one of at most nine candidates (three
//! centers and up to six pairwise border intersections) is one.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use super::ReducedPair;
use crate::error::{Error, Result};
use crate::linalg::{ToleranceConfig, C64};

/// Entries of a Hermitian `[[a, b], [b*, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entries {
    pub a: f64,
    pub b: C64,
    pub c: f64,
}

impl Entries {
    pub fn of(m: &Matrix2<C64>) -> Self {
        Self {
            a: m[(0, 0)].re,
            b: 0.5 * (m[(0, 1)] + m[(1, 0)].conj()),
            c: m[(1, 1)].re,
        }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b.norm_sqr()
    }

    /// `(a - c, 2 Re b)`.
    pub fn l_vector(&self) -> Vector2<f64> {
        Vector2::new(self.a - self.c, 2.0 * self.b.re)
    }

    fn norm(&self) -> f64 {
        let half_gap = (0.25 * (self.a - self.c).powi(2) + self.b.norm_sqr()).sqrt();
        0.5 * (self.a + self.c).abs() + half_gap
    }
}

/// The set of points `ξ` with `det R + 1 + Lᵀξ >= tr R · sqrt(1 + |ξ|²)`.
///
/// Squared, this reads `(ξ - μL)ᵀ K (ξ - μL) <= m` with
/// `K = k1 P_L + k2 P_L⊥`, an ellipse with semi-axes `sqrt(m/k1)` along `L`
/// and `sqrt(m/k2)` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseSet {
    pub l: [f64; 2],
    pub k1: f64,
    pub k2: f64,
    pub mu: f64,
    pub m: f64,
    pub center: [f64; 2],
    pub degenerate_point: bool,
    pub empty: bool,
    /// `L` vanishes, so the set is a disk around the origin.
    pub is_circle: bool,
    pub det: f64,
    pub trace: f64,
}

impl EllipseSet {
    pub fn center_vec(&self) -> Vector2<f64> {
        Vector2::from(self.center)
    }

    pub fn l_vec(&self) -> Vector2<f64> {
        Vector2::from(self.l)
    }

    /// `(semi-axis along L, semi-axis across L)`, `None` when empty.
    pub fn semi_axes(&self) -> Option<(f64, f64)> {
        if self.empty {
            return None;
        }
        let m = self.m.max(0.0);
        Some(((m / self.k1).sqrt(), (m / self.k2).sqrt()))
    }
}

pub fn ellipse_params(r: &Matrix2<C64>, tol: &ToleranceConfig) -> Result<EllipseSet> {
    let e = Entries::of(r);
    let det = e.det();
    let trace = e.trace();
    if !(det > 0.0) {
        return Err(Error::InvalidArgument(format!("ellipse needs det R > 0, got {det:e}")));
    }
    if trace < 2.0 - tol.psd * (1.0 + trace) {
        return Err(Error::InvalidArgument(format!("ellipse needs tr R >= 2, got {trace}")));
    }
    let l = e.l_vector();
    let d = det + 1.0;
    let k1 = 4.0 * (det + e.b.im * e.b.im);
    let k2 = trace * trace;
    let mu = d / k1;
    let m = (k2 / k1) * (d * d - k1);
    let m_tol = tol.psd * (k2 / k1) * (d * d + k1);
    let center = l * mu;
    Ok(EllipseSet {
        l: l.into(),
        k1,
        k2,
        mu,
        m,
        center: center.into(),
        degenerate_point: m.abs() <= m_tol,
        empty: m < -m_tol,
        is_circle: l.norm() <= tol.psd * (1.0 + e.norm()),
        det,
        trace,
    })
}

/// The three inequalities of the reduced problem, evaluated in units of
/// `x = sqrt(1 + y² + z²)` so that all slacks are comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepConstraints {
    pub trace: f64,
    pub trace_tilde: f64,
    pub det_plus_one: f64,
    pub det_plus_one_tilde: f64,
    pub l: Vector2<f64>,
    pub l_tilde: Vector2<f64>,
}

impl SepConstraints {
    pub fn new(pair: &ReducedPair) -> Self {
        let e = Entries::of(&pair.n);
        let et = Entries::of(&pair.n_tilde);
        Self {
            trace: e.trace(),
            trace_tilde: et.trace(),
            det_plus_one: e.det() + 1.0,
            det_plus_one_tilde: et.det() + 1.0,
            l: e.l_vector(),
            l_tilde: et.l_vector(),
        }
    }

    pub fn min_trace(&self) -> f64 {
        self.trace.min(self.trace_tilde)
    }

    /// `[disk, ellipse of N, ellipse of Ñ]`; a point is feasible iff all are
    /// non-negative. None of these is squared.
    pub fn slacks(&self, p: &Vector2<f64>) -> [f64; 3] {
        let x = (1.0 + p.norm_squared()).sqrt();
        [
            0.5 * self.min_trace() - x,
            (self.det_plus_one + self.l.dot(p)) / self.trace - x,
            (self.det_plus_one_tilde + self.l_tilde.dot(p)) / self.trace_tilde - x,
        ]
    }

    pub fn min_slack(&self, p: &Vector2<f64>) -> f64 {
        let s = self.slacks(p);
        s[0].min(s[1]).min(s[2])
    }

    pub fn holds(&self, p: &Vector2<f64>, tol: &ToleranceConfig) -> bool {
        let x = (1.0 + p.norm_squared()).sqrt();
        self.min_slack(p) >= -tol.psd * (1.0 + x)
    }
}

pub fn check_point(pair: &ReducedPair, point: [f64; 2], tol: &ToleranceConfig) -> bool {
    SepConstraints::new(pair).holds(&Vector2::from(point), tol)
}

/// Radius of the smaller of the two disks `tr R >= 2 sqrt(1 + |ξ|²)`.
pub fn circle_radius(pair: &ReducedPair, tol: &ToleranceConfig) -> Result<f64> {
    let t = SepConstraints::new(pair).min_trace();
    if t < 2.0 - tol.psd * (1.0 + t) {
        return Err(Error::PreconditionViolation(format!(
            "circle radius needs tr N, tr Ñ >= 2, got {t}"
        )));
    }
    Ok((0.25 * t * t - 1.0).max(0.0).sqrt())
}

/// Pure one-mode correlation matrix `[[x + y, z], [z, x - y]]`.
pub fn witness_gamma_a(point: [f64; 2]) -> Matrix2<f64> {
    let [y, z] = point;
    let x = (1.0 + y * y + z * z).sqrt();
    Matrix2::new(x + y, z, z, x - y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CandidateLabel {
    #[serde(rename = "m_c")]
    CircleCenter,
    #[serde(rename = "m_e")]
    EllipseCenter,
    #[serde(rename = "m_et")]
    EllipseTildeCenter,
    #[serde(rename = "i+_eet")]
    EllipsesPlus,
    #[serde(rename = "i-_eet")]
    EllipsesMinus,
    #[serde(rename = "i+_ce")]
    CircleEllipsePlus,
    #[serde(rename = "i-_ce")]
    CircleEllipseMinus,
    #[serde(rename = "i+_cet")]
    CircleEllipseTildePlus,
    #[serde(rename = "i-_cet")]
    CircleEllipseTildeMinus,
}

impl CandidateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateLabel::CircleCenter => "m_c",
            CandidateLabel::EllipseCenter => "m_e",
            CandidateLabel::EllipseTildeCenter => "m_et",
            CandidateLabel::EllipsesPlus => "i+_eet",
            CandidateLabel::EllipsesMinus => "i-_eet",
            CandidateLabel::CircleEllipsePlus => "i+_ce",
            CandidateLabel::CircleEllipseMinus => "i-_ce",
            CandidateLabel::CircleEllipseTildePlus => "i+_cet",
            CandidateLabel::CircleEllipseTildeMinus => "i-_cet",
        }
    }

    pub fn is_intersection(self) -> bool {
        !matches!(
            self,
            CandidateLabel::CircleCenter
                | CandidateLabel::EllipseCenter
                | CandidateLabel::EllipseTildeCenter
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub label: CandidateLabel,
    pub point: [f64; 2],
}

/// The three convex sets whose common point is sought.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SepGeometry {
    /// Radius of the smaller disk.
    pub r_c: f64,
    pub ellipse: EllipseSet,
    pub ellipse_tilde: EllipseSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    pub geometry: SepGeometry,
    /// Degenerate configurations met while building the intersections.
    pub notes: Vec<String>,
}

/// Real roots of `a s² + b s + c` with `a != 0`, larger root first. A
/// slightly negative discriminant (tangency lost to rounding) is clamped.
fn quadratic_roots(a: f64, b: f64, c: f64, rel_tol: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    let scale = b * b + 4.0 * (a * c).abs();
    let disc = if disc < 0.0 {
        if disc >= -rel_tol * scale {
            0.0
        } else {
            return None;
        }
    } else {
        disc
    };
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    Some((r1.max(r2), r1.min(r2)))
}

fn perp_unit(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x) / v.norm()
}

/// Border points shared by the two ellipses.
fn ellipse_ellipse(
    c: &SepConstraints,
    tol: &ToleranceConfig,
    notes: &mut Vec<String>,
) -> Option<(Vector2<f64>, Vector2<f64>)> {
    let (t, tt) = (c.trace, c.trace_tilde);
    let (d, dt) = (c.det_plus_one, c.det_plus_one_tilde);
    let l_prime = c.l_tilde / tt - c.l / t;
    let offset = d / t - dt / tt;
    let scale = 1.0 + c.l.norm() / t + c.l_tilde.norm() / tt;
    if l_prime.norm() <= tol.psd * scale {
        if offset.abs() <= tol.psd * (1.0 + d / t) {
            notes.push("L' = 0 with equal offsets: ellipse borders coincide".into());
        } else {
            notes.push("L' = 0 with distinct offsets: ellipse borders are disjoint".into());
        }
        return None;
    }
    let g = l_prime * (offset / l_prime.norm_squared());
    let f = perp_unit(&l_prime);
    // (Lᵀ(g + s f) + D)² - t² (1 + |g|² + s²), using g ⊥ f
    let lf = c.l.dot(&f);
    let base = c.l.dot(&g) + d;
    let qa = lf * lf - t * t;
    let qb = 2.0 * base * lf;
    let qc = base * base - t * t * (1.0 + g.norm_squared());
    let (sp, sm) = quadratic_roots(qa, qb, qc, tol.psd)?;
    Some((g + f * sp, g + f * sm))
}

/// Border points shared by the disk of radius `r_c` and one ellipse.
fn circle_ellipse(
    r_c: f64,
    l: &Vector2<f64>,
    trace: f64,
    det_plus_one: f64,
    is_circle: bool,
    name: &str,
    notes: &mut Vec<String>,
) -> Option<(Vector2<f64>, Vector2<f64>)> {
    if is_circle {
        notes.push(format!("L = 0 for {name}: concentric with the circle"));
        return None;
    }
    let x_c = (1.0 + r_c * r_c).sqrt();
    let g = l * ((trace * x_c - det_plus_one) / l.norm_squared());
    let f = perp_unit(l);
    let rem = r_c * r_c - g.norm_squared();
    if rem < -1e-12 * (1.0 + r_c * r_c) {
        return None;
    }
    let s = rem.max(0.0).sqrt();
    Some((g + f * s, g - f * s))
}

/// All candidate points, in the fixed order `m_c, m_e, m_et, i±_eet, i±_ce,
/// i±_cet`. Intersections involving a point-like ellipse are omitted since
/// its center already represents it.
pub fn candidate_points(pair: &ReducedPair, tol: &ToleranceConfig) -> Result<CandidateSet> {
    let nec = super::necessary_conditions(pair, tol);
    if let Some(reason) = nec.failed {
        return Err(Error::PreconditionViolation(format!(
            "necessary conditions fail: {reason:?}"
        )));
    }
    let ellipse = ellipse_params(&pair.n, tol)?;
    let ellipse_tilde = ellipse_params(&pair.n_tilde, tol)?;
    if ellipse.empty || ellipse_tilde.empty {
        return Err(Error::PreconditionViolation(
            "candidate points need non-empty ellipses (m >= 0)".into(),
        ));
    }
    let c = SepConstraints::new(pair);
    let r_c = circle_radius(pair, tol)?;
    let mut notes = Vec::new();
    let mut candidates = vec![
        Candidate {
            label: CandidateLabel::CircleCenter,
            point: [0.0, 0.0],
        },
        Candidate {
            label: CandidateLabel::EllipseCenter,
            point: ellipse.center,
        },
        Candidate {
            label: CandidateLabel::EllipseTildeCenter,
            point: ellipse_tilde.center,
        },
    ];
    let mut push_pair = |pts: Option<(Vector2<f64>, Vector2<f64>)>, plus, minus| {
        if let Some((p, m)) = pts {
            candidates.push(Candidate {
                label: plus,
                point: p.into(),
            });
            candidates.push(Candidate {
                label: minus,
                point: m.into(),
            });
        }
    };
    if !ellipse.degenerate_point && !ellipse_tilde.degenerate_point {
        push_pair(
            ellipse_ellipse(&c, tol, &mut notes),
            CandidateLabel::EllipsesPlus,
            CandidateLabel::EllipsesMinus,
        );
    }
    if !ellipse.degenerate_point {
        push_pair(
            circle_ellipse(r_c, &c.l, c.trace, c.det_plus_one, ellipse.is_circle, "N", &mut notes),
            CandidateLabel::CircleEllipsePlus,
            CandidateLabel::CircleEllipseMinus,
        );
    }
    if !ellipse_tilde.degenerate_point {
        push_pair(
            circle_ellipse(
                r_c,
                &c.l_tilde,
                c.trace_tilde,
                c.det_plus_one_tilde,
                ellipse_tilde.is_circle,
                "Ñ",
                &mut notes,
            ),
            CandidateLabel::CircleEllipseTildePlus,
            CandidateLabel::CircleEllipseTildeMinus,
        );
    }
    Ok(CandidateSet {
        candidates,
        geometry: SepGeometry {
            r_c,
            ellipse,
            ellipse_tilde,
        },
        notes,
    })
}
