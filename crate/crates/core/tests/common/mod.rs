//! Instances and random generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trimode::cm::{random_cm_with, sample_symplectic_2x2, CorrelationMatrix, RandomCmSpec};
use trimode::examples::{example1_cm, example2_cm, Example1Params, Example2Params};
use trimode::linalg::{CMat, RMat, C64};

pub fn ex2(alpha: f64) -> CorrelationMatrix {
    example2_cm(&Example2Params { a: 1.2, alpha }).unwrap()
}

pub fn ex1(a1: f64, a2: f64) -> CorrelationMatrix {
    example1_cm(&Example1Params { c: 0.3, a1, a2 }).unwrap()
}

/// Two-mode squeezed state of A and B, C in vacuum.
pub fn squeezed_ab_vacuum_c(c: f64) -> CorrelationMatrix {
    CorrelationMatrix::new(trimode::examples::example1_base(c).unwrap()).unwrap()
}

/// One instance per class, 1 through 5.
pub fn class_representatives() -> [(u8, CorrelationMatrix); 5] {
    [
        (1, ex2(0.0)),
        (2, squeezed_ab_vacuum_c(0.3)),
        (3, ex1(0.1, 0.3)),
        (4, ex2(0.305)),
        (5, ex2(0.5)),
    ]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_locals(rng: &mut ChaCha8Rng, n: usize, r_max: f64) -> Vec<Matrix2<f64>> {
    (0..n).map(|_| sample_symplectic_2x2(rng, r_max)).collect()
}

fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// A 6x6 Hermitian block matrix `[[A, C], [C†, B]]` with a 2x2 `A` and a
/// PSD, possibly singular, 4x4 `B`. About a third are PSD, a third have `A`
/// shifted down, and a third break the kernel condition of a singular `B`.
pub fn random_block_matrix(rng: &mut ChaCha8Rng) -> (CMat, CMat, CMat) {
    let rank = rng.random_range(2..=6);
    let x = random_complex(rng, 6, rank);
    let m = &x * x.adjoint();
    let mut a = m.view((0, 0), (2, 2)).into_owned();
    let b = m.view((2, 2), (4, 4)).into_owned();
    let mut c = m.view((0, 2), (2, 4)).into_owned();
    match rng.random_range(0..3) {
        0 => {}
        1 => {
            let t = rng.random_range(0.0..2.0) * a.norm();
            a -= CMat::identity(2, 2) * C64::new(t, 0.0);
        }
        _ => c += random_complex(rng, 2, 4) * C64::new(rng.random_range(0.1..1.0), 0.0),
    }
    (a, b, c)
}

pub fn assemble(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    let mut m = CMat::zeros(6, 6);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((2, 2), (4, 4)).copy_from(b);
    m.view_mut((0, 2), (2, 4)).copy_from(c);
    m.view_mut((2, 0), (4, 2)).copy_from(&c.adjoint());
    m
}

/// Strictly positive symmetric 6x6 matrices, valid or not: a random
/// correlation matrix scaled by a factor in `[0.3, 1.2]`.
pub fn random_positive_symmetric(rng: &mut ChaCha8Rng) -> RMat {
    let spec = RandomCmSpec {
        n_modes: 3,
        symplectic_depth: 2,
        d_max: 3.0,
        r_max: 1.0,
    };
    let g = random_cm_with(&spec, rng).unwrap();
    g.matrix() * rng.random_range(0.3..1.2)
}
