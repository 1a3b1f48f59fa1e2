//! Brute-force checks of the candidate-point separability decision.
//!
//! Two independent searches over pure one-mode matrices `γ_A(y, z)`:
//!
//! * [`grid_feasible`] maximizes the smallest normalized slack of the three
//!   planar inequalities over a dense grid covering the disk, then refines
//!   around the best grid point;
//! * [`random_gamma_a_search`] never touches the planar inequalities and
//!   tests `N - γ_A >= 0`, `Ñ - γ_A >= 0` by eigenvalues.
//!
//! Both objectives are concave in `(y, z)`, so local refinement around the
//! best coarse point converges to the global optimum.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cm::{
    apply_local_symplectic, random_cm_with, sample_symplectic_2x2, twisted_heisenberg_check,
    CorrelationMatrix, Party, RandomCmSpec,
};
use crate::examples::{alpha0, example2_cm, Example2Params};
use crate::error::{Error, Result};
use crate::linalg::{RMat, ToleranceConfig, C64};
use crate::sepcrit::{
    circle_radius, compute_reduced_pair, decide_pair, necessary_conditions, witness_gamma_a,
    FailureReason, ReducedPair, SepConstraints,
};

/// Decisions closer to zero than this are not counted as disagreements.
pub const MARGIN_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub feasible: bool,
    pub point: Option<[f64; 2]>,
    /// Best objective value found; positive means strictly feasible.
    pub margin: f64,
    pub points_tested: usize,
}

const REFINE_ROUNDS: usize = 30;
const REFINE_SIDE: usize = 21;

fn best_on_grid(
    c: &SepConstraints,
    center: Vector2<f64>,
    half_width: f64,
    side: usize,
) -> (f64, Vector2<f64>) {
    let step = 2.0 * half_width / (side - 1) as f64;
    let coord = |k: usize| -half_width + step * k as f64;
    (0..side)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, center);
            for j in 0..side {
                let p = center + Vector2::new(coord(i), coord(j));
                let s = c.min_slack(&p);
                if s > best.0 {
                    best = (s, p);
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, center), |acc, r| if r.0 > acc.0 { r } else { acc })
}

/// `resolution × resolution` grid over the disk of radius `r_c` plus one
/// cell, followed by zoomed re-gridding around the best point.
pub fn grid_feasible(pair: &ReducedPair, resolution: usize, tol: &ToleranceConfig) -> Result<OracleResult> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be >= 2, got {resolution}")));
    }
    if !necessary_conditions(pair, tol).pass {
        return Ok(OracleResult {
            feasible: false,
            point: None,
            margin: f64::NEG_INFINITY,
            points_tested: 0,
        });
    }
    let c = SepConstraints::new(pair);
    let r_c = circle_radius(pair, tol)?;
    let cell = 2.0 * r_c / (resolution - 1) as f64;
    let (margin, point, tested) = if r_c == 0.0 {
        (c.min_slack(&Vector2::zeros()), Vector2::zeros(), 1)
    } else {
        let (m, p) = best_on_grid(&c, Vector2::zeros(), r_c + cell, resolution + 2);
        let mut width = cell;
        let (mut m, mut p, mut n) = (m, p, (resolution + 2) * (resolution + 2));
        for _ in 0..REFINE_ROUNDS {
            let (m2, p2) = best_on_grid(&c, p, width, REFINE_SIDE);
            n += REFINE_SIDE * REFINE_SIDE;
            if m2 > m {
                m = m2;
                p = p2;
            }
            width /= 4.0;
        }
        (m, p, n)
    };
    let feasible = c.holds(&point, tol);
    Ok(OracleResult {
        feasible,
        point: feasible.then(|| point.into()),
        margin,
        points_tested: tested,
    })
}

fn eig_bounds(m: &Matrix2<C64>) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let c = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let half_gap = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    (0.5 * (a + c) - half_gap, 0.5 * (a + c) + half_gap)
}

/// Smallest eigenvalue of `N - γ_A` and `Ñ - γ_A`, and the threshold it must
/// clear to count as PSD.
fn direct_objective(pair: &ReducedPair, p: [f64; 2], tol: &ToleranceConfig) -> (f64, f64) {
    let g = witness_gamma_a(p).map(|x| C64::new(x, 0.0));
    let (lo1, hi1) = eig_bounds(&(pair.n - g));
    let (lo2, hi2) = eig_bounds(&(pair.n_tilde - g));
    let radius = lo1.abs().max(hi1.abs()).max(lo2.abs()).max(hi2.abs());
    (lo1.min(lo2), -tol.psd * (1.0 + radius))
}

/// Random pure one-mode matrices tested directly against `N` and `Ñ`. Half of
/// the trials are uniform in the disk of radius `r_c`; the rest are uniform
/// in disks around the best point so far, shrinking by 0.7 every 100 draws.
pub fn random_gamma_a_search(
    pair: &ReducedPair,
    trials: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> OracleResult {
    let t = SepConstraints::new(pair).min_trace();
    let r_c = (0.25 * t * t - 1.0).max(0.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disk = |rng: &mut ChaCha8Rng, center: [f64; 2], r: f64| -> [f64; 2] {
        let rho = r * rng.random_range(0.0..=1.0f64).sqrt();
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        [center[0] + rho * th.cos(), center[1] + rho * th.sin()]
    };
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0], f64::NEG_INFINITY);
    let consider = |p: [f64; 2], best: &mut (f64, [f64; 2], f64)| {
        let (v, thr) = direct_objective(pair, p, tol);
        if v > best.0 {
            *best = (v, p, thr);
        }
    };
    let global = trials / 2;
    for _ in 0..global {
        let p = disk(&mut rng, [0.0, 0.0], r_c);
        consider(p, &mut best);
    }
    let mut radius = r_c;
    for k in 0..trials - global {
        if k % 100 == 0 && k > 0 {
            radius *= 0.7;
        }
        let p = disk(&mut rng, best.1, radius);
        consider(p, &mut best);
    }
    let feasible = trials > 0 && best.0 >= best.2;
    OracleResult {
        feasible,
        point: feasible.then_some(best.1),
        margin: best.0,
        points_tested: trials,
    }
}

/// Random three-mode PPT correlation matrices, alternating between two kinds
/// so that both separable and bound entangled states occur:
///
/// * even `k`: a random matrix shifted by the smallest `α𝟙` that makes every
///   partial transpose positive, plus a small random excess;
/// * odd `k`: a member of the permutation-symmetric family just above its PPT
///   threshold, scrambled by random local symplectics and a mode permutation.
///
/// Instance `k` depends only on `(seed, k)`.
pub fn random_ppt_instances(count: usize, seed: u64) -> Result<Vec<CorrelationMatrix>> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            if k % 2 == 0 {
                shifted_random_instance(&mut rng)
            } else {
                scrambled_family_instance(&mut rng)
            }
        })
        .collect()
}

fn shifted_random_instance(rng: &mut ChaCha8Rng) -> Result<CorrelationMatrix> {
    let spec = RandomCmSpec {
        n_modes: 3,
        symplectic_depth: 3,
        d_max: 2.0,
        r_max: 1.0,
    };
    let g = random_cm_with(&spec, rng)?;
    let mut worst = 0.0_f64;
    for p in Party::ALL {
        worst = worst.min(twisted_heisenberg_check(&g, Some(p), 1e-9)?.min_eigenvalue);
    }
    let excess = if rng.random_bool(0.5) {
        rng.random_range(0.0..0.05)
    } else {
        rng.random_range(0.0..0.5)
    };
    CorrelationMatrix::new(g.matrix() + RMat::identity(6, 6) * (excess - worst))
}

fn scrambled_family_instance(rng: &mut ChaCha8Rng) -> Result<CorrelationMatrix> {
    let a = rng.random_range(1.05..2.0);
    let alpha = alpha0(a)? + rng.random_range(1e-9..0.08);
    let g = example2_cm(&Example2Params { a, alpha })?;
    let locals: Vec<_> = (0..3).map(|_| sample_symplectic_2x2(rng, 0.5)).collect();
    let g = apply_local_symplectic(&g, &locals, &ToleranceConfig::default())?;
    let mut perm = [0, 1, 2];
    for i in (1..3).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    g.permute_modes(&perm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementRow {
    pub index: usize,
    pub criterion: bool,
    pub grid: bool,
    pub direct: bool,
    pub criterion_margin: f64,
    pub grid_margin: f64,
    pub direct_margin: f64,
    pub failure_reason: Option<FailureReason>,
    /// Inside the margin band, where finite-resolution verdicts may flip.
    pub excluded: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub rows: Vec<AgreementRow>,
    pub flagged: usize,
    pub excluded: usize,
}

impl AgreementReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,criterion,grid,direct,criterion_margin,grid_margin,direct_margin,failure_reason,excluded,flagged\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.index,
                r.criterion,
                r.grid,
                r.direct,
                r.criterion_margin,
                r.grid_margin,
                r.direct_margin,
                r.failure_reason.map_or("", |f| f.as_str()),
                r.excluded,
                r.flagged
            ));
        }
        out
    }
}

fn compare_one(
    index: usize,
    gamma: &CorrelationMatrix,
    resolution: usize,
    trials: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<AgreementRow> {
    let pair = match compute_reduced_pair(gamma, tol) {
        Ok(p) => p,
        Err(Error::InconsistentInput(_)) => {
            // nothing to search over; all paths report inseparable
            return Ok(AgreementRow {
                index,
                criterion: false,
                grid: false,
                direct: false,
                criterion_margin: f64::NEG_INFINITY,
                grid_margin: f64::NEG_INFINITY,
                direct_margin: f64::NEG_INFINITY,
                failure_reason: Some(FailureReason::KernelViolation),
                excluded: false,
                flagged: false,
            });
        }
        Err(e) => return Err(e),
    };
    let decision = decide_pair(&pair, tol)?;
    let grid = grid_feasible(&pair, resolution, tol)?;
    let direct = random_gamma_a_search(&pair, trials, seed.wrapping_add(index as u64), tol);
    let excluded = grid.margin.abs() < MARGIN_BAND;
    let disagree = decision.separable != grid.feasible || decision.separable != direct.feasible;
    Ok(AgreementRow {
        index,
        criterion: decision.separable,
        grid: grid.feasible,
        direct: direct.feasible,
        criterion_margin: decision.best_min_slack.unwrap_or(f64::NEG_INFINITY),
        grid_margin: grid.margin,
        direct_margin: direct.margin,
        failure_reason: decision.failure_reason,
        excluded,
        flagged: disagree && !excluded,
    })
}

/// Criterion, grid and direct-PSD verdicts side by side for every instance.
/// Instance `k` uses seed `seed + k` for its random search.
pub fn agreement_report(
    instances: &[CorrelationMatrix],
    resolution: usize,
    trials: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<AgreementReport> {
    let rows = instances
        .par_iter()
        .enumerate()
        .map(|(k, g)| compare_one(k, g, resolution, trials, seed, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(AgreementReport {
        flagged: rows.iter().filter(|r| r.flagged).count(),
        excluded: rows.iter().filter(|r| r.excluded).count(),
        rows,
    })
}
