use std::sync::{Arc, OnceLock};

use approx::assert_relative_eq;
use proptest::prelude::*;

use roedecay::band_operator::{
    random_band_operator, weighted_norm, BandOperator, Decay, Domain, DomainSpec, Kernel, RandomSpec,
};
use roedecay::group_metric::{Element, GroupKind, GroupModel};
use roedecay::linalg::C64;
use roedecay::spectral_engine::{decay_fit_points, neumann_invert, NeumannOptions, BETA_GRID};
use roedecay::weight_system::{scalar_split, SubexpWeight};

fn z1() -> &'static (Arc<Domain>, Arc<GroupModel>) {
    static CELL: OnceLock<(Arc<Domain>, Arc<GroupModel>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = Arc::new(GroupModel::new(GroupKind::FreeAbelian(1), 80, 1 << 20).unwrap());
        (Domain::new(g.clone(), DomainSpec::Interval { len: 30 }).unwrap(), g)
    })
}

fn z2() -> &'static (Arc<Domain>, Arc<GroupModel>) {
    static CELL: OnceLock<(Arc<Domain>, Arc<GroupModel>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = Arc::new(GroupModel::new(GroupKind::FreeAbelian(2), 40, 1 << 20).unwrap());
        (Domain::new(g.clone(), DomainSpec::Ball { radius: 5 }).unwrap(), g)
    })
}

fn weight(g: &Arc<GroupModel>, alpha: f64, beta: f64) -> SubexpWeight {
    SubexpWeight::new(g.clone(), alpha, beta).unwrap()
}

fn op(on_z2: bool, seed: u64, p: u32) -> (BandOperator, Arc<GroupModel>) {
    let (d, g) = if on_z2 { z2() } else { z1() };
    (
        random_band_operator(d.clone(), seed, p, Decay::Flat).unwrap(),
        g.clone(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_adjoint_symmetric(on_z2: bool, seed: u64, p in 0u32..4, beta in 0.1f64..0.95) {
        let (a, g) = op(on_z2, seed, p);
        let w = weight(&g, 1.0, beta);
        assert_relative_eq!(weighted_norm(&a, &w), weighted_norm(&a.adjoint(), &w), max_relative = 1e-14);
    }

    #[test]
    fn triangle_inequality(on_z2: bool, s1: u64, s2: u64, p in 0u32..4) {
        let (a, g) = op(on_z2, s1, p);
        let (b, _) = op(on_z2, s2, 3 - p);
        let w = weight(&g, 1.0, 0.5);
        let lhs = weighted_norm(&a.add(&b).unwrap(), &w);
        prop_assert!(lhs <= (weighted_norm(&a, &w) + weighted_norm(&b, &w)) * (1.0 + 1e-12));
    }

    #[test]
    fn homogeneity(seed: u64, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let (a, g) = op(false, seed, 2);
        let w = weight(&g, 0.7, 0.5);
        let c = C64::new(re, im);
        assert_relative_eq!(
            weighted_norm(&a.scale(c), &w),
            c.norm() * weighted_norm(&a, &w),
            max_relative = 1e-13,
            epsilon = 1e-300
        );
    }

    #[test]
    fn submultiplicative_with_ratio_constant(on_z2: bool, s1: u64, s2: u64, pa in 0u32..4, pb in 0u32..4) {
        let (a, g) = op(on_z2, s1, pa);
        let (b, _) = op(on_z2, s2, pb);
        let w = weight(&g, 1.0, 0.5);
        let k = w.ratio_l2(pa + pb).unwrap();
        let lhs = weighted_norm(&a.compose(&b).unwrap(), &w);
        prop_assert!(lhs <= 2.0 * k * weighted_norm(&a, &w) * weighted_norm(&b, &w) * (1.0 + 1e-12));
    }

    #[test]
    fn splitting_on_random_triples(
        xs in prop::collection::vec(-6i64..=6, 9),
        alpha in 0.1f64..2.0,
        beta in 0.05f64..1.0,
    ) {
        let g = Arc::new(GroupModel::new(GroupKind::FreeAbelian(3), 40, 1 << 21).unwrap());
        let w = weight(&g, alpha, beta);
        let e = |k: usize| Element(xs[3 * k..3 * k + 3].to_vec());
        let (x, y, z) = (e(0), e(1), e(2));
        let wl = |a: &Element, b: &Element| w.eval_w(&g.difference(a, b)).unwrap();
        let vl = |a: &Element, b: &Element| w.eval_v(&g.difference(a, b)).unwrap();
        let rhs = wl(&x, &z) * vl(&z, &y) + vl(&x, &z) * wl(&z, &y);
        prop_assert!(wl(&x, &y) <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn scalar_split_is_at_least_one(s in 0.5f64..=1.0, beta in 0.001f64..0.999) {
        prop_assert!(scalar_split(s, beta) >= 1.0 - 1e-12);
    }

    #[test]
    fn decay_fit_round_trip(alpha in 0.3f64..1.5, k in 0usize..BETA_GRID.len(), c in 0.5f64..2.0) {
        let beta = BETA_GRID[k];
        let pts: Vec<(u32, f64)> = (0..30).map(|l| (l, c * (-alpha * (l as f64).powf(beta)).exp())).collect();
        let fit = decay_fit_points(pts).unwrap();
        prop_assert_eq!(fit.beta, beta);
        prop_assert!((fit.alpha - alpha).abs() < 0.02);
        prop_assert!((fit.c - c).abs() < 1e-6 * c);
    }

    #[test]
    fn generator_is_deterministic(seed: u64, p in 0u32..4) {
        let (a, _) = op(true, seed, p);
        let (b, _) = op(true, seed, p);
        prop_assert_eq!(a.to_matrix(), b.to_matrix());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn neumann_residuals_meet_tolerance(seed: u64, s in 0.1f64..0.7, p in 1u32..3) {
        let (d, g) = z1();
        let spec = RandomSpec { propagation: p, decay: Decay::Flat, perturbation: Some(s), self_adjoint: false };
        let a = spec.generate(d.clone(), seed).unwrap();
        let opts = NeumannOptions { tol: 1e-10, ..NeumannOptions::default() };
        let (_, rep) = neumann_invert(&a, &weight(g, 1.0, 0.5), &opts).unwrap();
        prop_assert!(rep.inverse_residual <= 10.0 * opts.tol);
        prop_assert!(rep.inverse_residual_left <= 10.0 * opts.tol);
        prop_assert!(rep.worst_term_rate(4) <= 1.1);
    }
}
