mod common;

use freelip_core::decomposition::{
    ext_fm_distortion, kalton_check, kalton_split, kalton_weight, orthogonal_union_check, random_gluing,
    random_kalton_instance, random_separated_clusters, random_separated_instance, separated_lower_bound_check,
    separated_union_decompose, two_legs, union2_check, AnnularPart, KALTON_CONSTANT,
};
use freelip_core::error::Error;
use freelip_core::free_norm::{free_norm, FreeVector, NormSolver};
use freelip_core::lip_ops::nearest_point_extension;
use freelip_core::rng::Rng;
use freelip_core::sample;
use freelip_core::PointedMetricSpace;
use proptest::prelude::*;

#[test]
fn weights_form_a_partition_of_unity() {
    let mut rng = Rng::new(41);
    for _ in 0..1_000_000 {
        let r = 2f64.powf(rng.range(-20.0, 20.0));
        let k = r.log2().floor() as i32;
        let total: f64 = (k - 2..=k + 2).map(|j| kalton_weight(r, j).unwrap()).sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn weight_at_half_octave() {
    for k in -5..5 {
        let r = 2f64.powf(k as f64 + 0.5);
        assert!((kalton_weight(r, k).unwrap() - 0.5).abs() < 1e-14);
        assert!((kalton_weight(r, k + 1).unwrap() - 0.5).abs() < 1e-14);
        let edge = 2f64.powi(k);
        assert_eq!(kalton_weight(edge, k).unwrap(), 1.0);
        assert_eq!(kalton_weight(edge, k - 1).unwrap(), 0.0);
        assert_eq!(kalton_weight(edge, k + 1).unwrap(), 0.0);
    }
}

#[test]
fn split_reconstructs_and_sums_below_the_constant() {
    for i in 0..20 {
        let mut rng = Rng::stream(42, i);
        let n = 5 + rng.below(40);
        let (space, mu) = random_kalton_instance(&mut rng, n, -8.0, 8.0);
        let split = kalton_split(&mu, &space).unwrap();
        assert_eq!(split.reconstruct(), mu);
        for (&k, part) in &split.parts {
            for (x, _) in part.iter() {
                let r = space.radius(x);
                assert!(r > 2f64.powi(k - 1) && r <= 2f64.powi(k + 1));
            }
        }
        let report = kalton_check(&mu, &space, NormSolver::Flow).unwrap();
        assert!(report.exact_reconstruction);
        assert!(report.ratio >= 1.0 - 1e-12 && report.ratio <= KALTON_CONSTANT);
    }
}

#[test]
fn half_octave_delta_splits_evenly() {
    let r = 2f64.powf(2.5);
    let s = PointedMetricSpace::from_point_cloud(vec![vec![0.0, 0.0], vec![r, 0.0]], 2.0, 0).unwrap();
    let report = kalton_check(&FreeVector::delta(1), &s, NormSolver::Lp).unwrap();
    assert_eq!(report.parts, 2);
    assert!((report.sum_of_norms - r).abs() <= 1e-12);
}

#[test]
fn separated_parts_respect_the_lower_bound() {
    for i in 0..40 {
        let mut rng = Rng::stream(43, i);
        let parts = 1 + rng.below(4);
        let per_part = 1 + rng.below(4);
        let (space, parts) = random_separated_instance(&mut rng, parts, per_part);
        let r = separated_lower_bound_check(&parts, &space, NormSolver::Flow).unwrap();
        assert!(r.slack >= -1e-9, "instance {i}: {r:?}");
        if parts.len() == 1 {
            assert_eq!(r.theta, None);
            assert_eq!(r.constant, 1.0);
        }
    }
}

#[test]
fn two_far_deltas() {
    // d(x,0) = 1 in (2^-1, 2^0], d(y,0) = 16 in (2^3, 2^4]: theta = 3
    let s = PointedMetricSpace::from_point_cloud(vec![vec![0.0], vec![1.0], vec![-16.0]], 2.0, 0).unwrap();
    let parts = vec![
        AnnularPart { vector: FreeVector::delta(1), inner: -1, outer: 0 },
        AnnularPart { vector: FreeVector::from_pairs([(2, -1.0)]), inner: 3, outer: 4 },
    ];
    let r = separated_lower_bound_check(&parts, &s, NormSolver::Lp).unwrap();
    assert_eq!(r.theta, Some(3));
    assert!((r.constant - 7.0 / 9.0).abs() < 1e-15);
    // δ_x − δ_y moves unit mass across the base: 17
    assert!((r.norm_of_sum - 17.0).abs() < 1e-12 && (r.sum_of_norms - 17.0).abs() < 1e-12);
    let bad = vec![parts[1].clone(), parts[0].clone()];
    assert_eq!(separated_lower_bound_check(&bad, &s, NormSolver::Lp).unwrap_err(), Error::BadExponentSequence);
    let outside = vec![AnnularPart { vector: FreeVector::delta(2), inner: -1, outer: 0 }];
    assert!(matches!(separated_lower_bound_check(&outside, &s, NormSolver::Lp), Err(Error::OutsideAnnulus { .. })));
}

#[test]
fn extension_split_bounds() {
    for i in 0..40 {
        let mut rng = Rng::stream(44, i);
        let n = 2 + rng.below(9);
        let space = sample::random_space(&mut rng, n);
        let k = 1 + rng.below(n);
        let f = sample::random_subset_with(&mut rng, n, k, space.base());
        let e = nearest_point_extension(&space, &f).unwrap();
        let r = ext_fm_distortion(&e, NormSolver::Flow).unwrap();
        assert!(r.phi_norm <= r.factor_bound + 1e-9, "instance {i}: {r:?}");
        assert!(r.phi_inv_norm <= r.factor_bound + 1e-9, "instance {i}: {r:?}");
        assert!(r.distortion <= r.distortion_bound + 1e-9);
        assert!(r.phi_norm >= 1.0 - 1e-9);
    }
}

#[test]
fn extension_split_identity_case() {
    let mut rng = Rng::new(45);
    let space = sample::random_space(&mut rng, 6);
    let all: Vec<usize> = (0..6).collect();
    let e = nearest_point_extension(&space, &all).unwrap();
    let r = ext_fm_distortion(&e, NormSolver::Lp).unwrap();
    assert!((r.phi_norm - 1.0).abs() < 1e-12 && (r.phi_inv_norm - 1.0).abs() < 1e-12);
}

fn cross_constant(space: &PointedMetricSpace, pieces: &[Vec<usize>]) -> f64 {
    let mut c: f64 = 1.0;
    for (g, p) in pieces.iter().enumerate() {
        for q in &pieces[g + 1..] {
            for &x in p.iter().filter(|&&x| x != 0) {
                for &y in q.iter().filter(|&&y| y != 0) {
                    c = c.max((space.d(x, 0) + space.d(y, 0)) / space.d(x, y));
                }
            }
        }
    }
    c
}

#[test]
fn star_graph_splits_additively() {
    let edges: Vec<(usize, usize, f64)> = vec![(0, 1, 1.0), (1, 2, 0.5), (0, 3, 2.0), (0, 4, 1.0), (4, 5, 1.0)];
    let s = PointedMetricSpace::from_graph(6, &edges, 0).unwrap();
    let pieces = vec![vec![0, 1, 2], vec![0, 3], vec![0, 4, 5]];
    let mut rng = Rng::new(46);
    let tests: Vec<FreeVector> = (0..10).map(|_| sample::random_free_vector(&mut rng, 6, 4)).collect();
    let r = orthogonal_union_check(&s, &pieces, &tests, NormSolver::Flow).unwrap();
    assert_eq!(r.c, 1.0);
    for &(a, b, _) in &r.sandwiches {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn narrow_legs_have_large_constant() {
    let (s, pieces) = two_legs(&[0.5, 1.0, 2.0], &[0.7, 1.5], 0.3).unwrap();
    let mut rng = Rng::new(47);
    let tests: Vec<FreeVector> = (0..20).map(|_| sample::random_free_vector(&mut rng, s.len(), 3)).collect();
    let r = orthogonal_union_check(&s, &pieces, &tests, NormSolver::Flow).unwrap();
    let c = cross_constant(&s, &pieces);
    assert!(c > 1.0);
    assert!((r.c - c).abs() <= 1e-12);
    assert!((r.concat_norm - c).abs() <= 1e-9);
    assert!((r.restrict_norm - 1.0).abs() <= 1e-12);
    assert!(r.min_slack() >= -1e-9);
    assert!(matches!(
        orthogonal_union_check(&s, &[vec![0, 1, 2], vec![2, 3]], &[], NormSolver::Flow),
        Err(Error::PiecesOverlap(2))
    ));
}

#[test]
fn godard_norms_match_closed_forms() {
    for i in 0..40 {
        let mut rng = Rng::stream(48, i);
        let clusters = 2 + rng.below(3);
        let (space, pieces) = random_separated_clusters(&mut rng, clusters, 3);
        let r = separated_union_decompose(&space, &pieces, None, NormSolver::Lp).unwrap();
        let scaled = space.scale(r.scale).unwrap();
        for g in &r.pieces {
            let piece = &pieces[g.piece];
            let o = piece[0];
            let fwd = if piece.len() > 1 { scaled.d(o, 0).max(1.0) } else { scaled.d(o, 0) };
            let mut inv: f64 = if piece.len() > 1 { 1.0 } else { 0.0 };
            for &x in piece {
                inv = inv.max((scaled.d(x, o) + 1.0) / scaled.d(x, 0));
            }
            assert!((g.phi_norm - fwd).abs() <= 1e-9, "instance {i}: {} vs {fwd}", g.phi_norm);
            assert!((g.phi_inv_norm - inv).abs() <= 1e-9, "instance {i}: {} vs {inv}", g.phi_inv_norm);
            assert!(g.phi_norm <= r.phi_bound + 1e-9);
            assert!(g.phi_inv_norm <= r.phi_inv_bound + 1e-9);
        }
        assert!(r.a <= 1.0 && 1.0 <= r.b);
        assert!(r.distortion <= r.distortion_bound + 1e-9);
    }
}

#[test]
fn godard_single_point_piece() {
    let s = PointedMetricSpace::from_rows(&[vec![0.0, 1.5], vec![1.5, 0.0]], 0).unwrap();
    let r = separated_union_decompose(&s, &[vec![0], vec![1]], Some((0.5, 2.0)), NormSolver::Lp).unwrap();
    assert_eq!(r.scale, 1.0);
    let g = &r.pieces[0];
    // the scalar f(0_γ) on a two-point domain: |f(x)| ≤ d(x, p)
    assert_eq!(g.phi_norm, 1.5);
    assert!((g.phi_inv_norm - 1.0 / 1.5).abs() < 1e-12);
    // tight bounds A = B = 1.5 force the rescaling to unit distance
    let r = separated_union_decompose(&s, &[vec![0], vec![1]], None, NormSolver::Lp).unwrap();
    assert!((r.scale - 1.0 / 1.5).abs() < 1e-15);
    assert!((r.pieces[0].phi_norm - 1.0).abs() < 1e-12 && (r.pieces[0].phi_inv_norm - 1.0).abs() < 1e-12);
    assert!(matches!(
        separated_union_decompose(&s, &[vec![0], vec![1]], Some((2.0, 3.0)), NormSolver::Lp),
        Err(Error::SeparationViolated(..))
    ));
}

#[test]
fn two_arcs_glued_at_their_ends() {
    let coords = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.25, 0.3],
        vec![0.5, 0.4],
        vec![0.75, 0.3],
        vec![0.25, -0.3],
        vec![0.5, -0.4],
        vec![0.75, -0.3],
    ];
    let s = PointedMetricSpace::from_point_cloud(coords, 2.0, 0).unwrap();
    let m = vec![0, 1, 2, 3, 4];
    let n = vec![0, 1, 5, 6, 7];
    let e = nearest_point_extension(&s, &[0, 1]).unwrap();
    let r = union2_check(&s, &m, &n, &e, NormSolver::Lp).unwrap();
    assert!(r.c >= 1.0);
    assert!(r.distortion <= r.bound + 1e-9, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gluings_stay_within_bound(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let n = 3 + rng.below(8);
        let (space, m, nn) = random_gluing(&mut rng, n);
        let f: Vec<usize> = m.iter().copied().filter(|x| nn.contains(x)).collect();
        let e = nearest_point_extension(&space, &f).unwrap();
        let r = union2_check(&space, &m, &nn, &e, NormSolver::Flow).unwrap();
        prop_assert!(r.distortion <= r.bound + 1e-9, "{:?}", r);
    }

    #[test]
    fn sandwich_on_random_stars(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let legs = 2 + rng.below(3);
        let mut coords = vec![vec![0.0, 0.0]];
        let mut pieces = vec![];
        for l in 0..legs {
            let angle = std::f64::consts::TAU * (l as f64 + rng.range(0.0, 0.5)) / legs as f64;
            let mut piece = vec![0];
            for _ in 0..1 + rng.below(3) {
                let t = rng.range(0.1, 2.0);
                piece.push(coords.len());
                coords.push(vec![t * angle.cos() + rng.range(-0.05, 0.05), t * angle.sin()]);
            }
            pieces.push(piece);
        }
        let space = PointedMetricSpace::from_point_cloud(coords, 2.0, 0).unwrap();
        let tests: Vec<FreeVector> = (0..5).map(|_| sample::random_free_vector(&mut rng, space.len(), 3)).collect();
        let r = orthogonal_union_check(&space, &pieces, &tests, NormSolver::Flow).unwrap();
        prop_assert!(r.min_slack() >= -1e-9);
        prop_assert!((r.concat_norm - cross_constant(&space, &pieces)).abs() <= 1e-9);
        for (&(whole, _, _), mu) in r.sandwiches.iter().zip(&tests) {
            prop_assert!((whole - free_norm(mu, &space, NormSolver::Lp).unwrap()).abs() <= 1e-9);
        }
    }
}
