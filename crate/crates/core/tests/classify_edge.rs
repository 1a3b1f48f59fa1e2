mod common;

use approx::assert_abs_diff_eq;
use trimode::classify::{classify, npt_flags};
use trimode::cm::{CorrelationMatrix, Party};
use trimode::edge::{is_direct_sum, is_edge_cm, k_space, verify_char_k, FormIndex};
use trimode::examples::{alpha0, example1_cm, example1_ppt_boundary_a2, EXAMPLE1_EDGE};
use trimode::linalg::ToleranceConfig;

use common::*;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

#[test]
fn each_class_has_a_representative() {
    for (class, g) in class_representatives() {
        assert_eq!(classify(&g, &tol()).unwrap().class_label, class);
    }
}

#[test]
fn symmetric_family_is_npt_in_every_cut_at_zero() {
    let (flags, eigs) = npt_flags(&ex2(0.0), &tol()).unwrap();
    assert_eq!(flags.count(), 3);
    assert_abs_diff_eq!(eigs[0], eigs[1], epsilon = 1e-10);
    assert_abs_diff_eq!(eigs[1], eigs[2], epsilon = 1e-10);
}

#[test]
fn class_never_increases_towards_more_entanglement() {
    // Larger alpha adds noise; the class label must never go down.
    let mut last = 0;
    for k in 0..=240 {
        let class = classify(&ex2(k as f64 * 0.005), &tol()).unwrap().class_label;
        assert!(class >= last, "class dropped to {class} at alpha={}", k as f64 * 0.005);
        last = class;
    }
    assert_eq!(last, 5);
}

#[test]
fn classification_is_covariant_under_mode_permutation() {
    let mut instances: Vec<CorrelationMatrix> =
        class_representatives().into_iter().map(|(_, g)| g).collect();
    instances.push(ex1(0.05, 1.5));
    for g in &instances {
        let base = classify(g, &tol()).unwrap();
        for perm in PERMUTATIONS {
            let p = g.permute_modes(&perm).unwrap();
            let c = classify(&p, &tol()).unwrap();
            assert_eq!(c.class_label, base.class_label, "perm {perm:?}");
            // mode k of the permuted matrix is mode perm[k] of the original
            for (k, party) in [Party::A, Party::B, Party::C].into_iter().enumerate() {
                let original = [Party::A, Party::B, Party::C][perm[k]];
                assert_eq!(c.npt_flags.get(party), base.npt_flags.get(original));
            }
        }
    }
}

#[test]
fn class_two_and_three_name_the_npt_parties() {
    let c = classify(&squeezed_ab_vacuum_c(0.3), &tol()).unwrap();
    assert_eq!(c.npt_flags.npt_parties(), vec![Party::A, Party::B]);
    let c = classify(&ex1(0.1, 0.3), &tol()).unwrap();
    assert_eq!(c.npt_flags.count(), 1);
}

#[test]
fn ppt_threshold_instance_is_edge() {
    let g = ex2(alpha0(1.2).unwrap());
    let r = is_edge_cm(&g, &tol()).unwrap();
    assert!(r.ppt_ok && !r.separable && !r.is_direct_sum);
    assert_eq!(r.k_dim, 6);
    assert!(r.is_edge);
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
}

#[test]
fn quoted_family1_instance_is_edge() {
    let g = example1_cm(&EXAMPLE1_EDGE).unwrap();
    let r = is_edge_cm(&g, &tol()).unwrap();
    assert!(r.is_edge, "{r:?}");
    assert_eq!(r.k_dim, 6);
    let loose = tol().with_psd(tol().kernel_edge);
    assert_eq!(classify(&g, &loose).unwrap().class_label, 4);
}

#[test]
fn exact_family1_boundary_is_class_four_at_default_tolerance() {
    let a2 = example1_ppt_boundary_a2(0.3, 1.0, 2.0).unwrap();
    assert_abs_diff_eq!(a2, EXAMPLE1_EDGE.a2, epsilon = 1e-6);
    let g = ex1(1.0, a2);
    assert_eq!(classify(&g, &tol()).unwrap().class_label, 4);
    assert!(is_edge_cm(&g, &tol()).unwrap().is_edge);
}

#[test]
fn k_dim_is_stable_under_tolerance_scaling() {
    let a2 = example1_ppt_boundary_a2(0.3, 1.0, 2.0).unwrap();
    let instances = [
        ex2(alpha0(1.2).unwrap()),
        ex1(1.0, a2),
        ex2(0.305),
        CorrelationMatrix::identity(3),
    ];
    let base = tol();
    for g in &instances {
        let dims: Vec<usize> = [0.1, 1.0, 10.0]
            .iter()
            .map(|s| {
                let t = ToleranceConfig::new(base.psd, base.rank, base.kernel_edge * s).unwrap();
                k_space(g, &t).unwrap().k_dim
            })
            .collect();
        assert!(dims.windows(2).all(|w| w[0] == w[1]), "{dims:?}");
    }
}

#[test]
fn interior_ppt_instance_has_no_kernel() {
    let r = is_edge_cm(&ex2(0.305), &tol()).unwrap();
    assert_eq!(r.k_dim, 0);
    assert!(!r.is_edge && !r.separable);
}

#[test]
fn kernel_vectors_satisfy_the_real_characterization() {
    let a2 = example1_ppt_boundary_a2(0.3, 1.0, 2.0).unwrap();
    for g in [ex2(alpha0(1.2).unwrap()), ex1(1.0, a2), CorrelationMatrix::identity(3)] {
        let ks = k_space(&g, &tol()).unwrap();
        assert!(ks.warnings.is_empty(), "{:?}", ks.warnings);
        for (k, x) in FormIndex::ALL.into_iter().enumerate() {
            assert_eq!(ks.cross_check_dims[k], 2 * ks.kernel_dims[k]);
            assert!(verify_char_k(&g, x, &tol()).unwrap() <= 1e-7);
        }
    }
}

#[test]
fn edge_instances_are_class_four() {
    let a2 = example1_ppt_boundary_a2(0.3, 1.0, 2.0).unwrap();
    for g in [ex2(alpha0(1.2).unwrap()), ex1(1.0, a2)] {
        let loose = tol().with_psd(tol().kernel_edge);
        if is_edge_cm(&g, &tol()).unwrap().is_edge {
            assert_eq!(classify(&g, &loose).unwrap().class_label, 4);
        }
    }
}

#[test]
fn product_states_are_direct_sums_and_not_edge() {
    let g = CorrelationMatrix::identity(3);
    assert!(is_direct_sum(&g, &tol()));
    assert!(!is_direct_sum(&ex2(0.5), &tol()));
    let r = is_edge_cm(&g, &tol()).unwrap();
    assert!(!r.is_edge);
}
