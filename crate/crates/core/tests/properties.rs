//! Property tests of the invariants that hold for every input, over seeded
//! random instances.

use arveson_core::colligation::{classify_colligation, transfer_eval, BallPoint, Colligation, OperatorTuple, OutputPair};
use arveson_core::completion::{classify_family, parrott_complete, CompletionParameter};
use arveson_core::kernels::{defect_identity_residual, eval_kernel, KernelSpec, SchurEvaluator};
use arveson_core::numerics::{c, from_real_rows, identity, max_abs, operator_norm, vstack, ComplexMatrix};
use arveson_core::realization::example33;
use arveson_core::realization::{
    enumerate_representers, minimal_cholesky_dim, realize_from_pair_cholesky, realize_with_pair,
    relate_by_right_unitary, reproduction_error, ObservabilityData,
};
use arveson_core::sampling::{random_contractive_pair, random_matrix, random_vector, sample_points, stream_rng, SampleConfig};
use arveson_core::subspaces::{domain_subspace, row_function_coefficients};
use proptest::prelude::*;
use rand::Rng;

fn cfg() -> SampleConfig {
    SampleConfig::default()
}

fn random_colligation(seed: u64, norm: f64) -> Colligation {
    let mut rng = stream_rng(seed, 0);
    let d = rng.random_range(1..=3);
    let dim_x = rng.random_range(1..=3);
    let dim_u = rng.random_range(1..=3);
    let dim_y = rng.random_range(1..=3);
    let u = random_matrix(&mut rng, d * dim_x + dim_y, dim_x + dim_u);
    let u = u.scale(norm / operator_norm(&u));
    Colligation::from_matrix(d, dim_x, &u).unwrap()
}

/// A pair together with a coisometric realization of it, so that
/// `K_S = K_{C,A}` holds exactly.
fn realized_pair(seed: u64, d: usize) -> (OutputPair, Colligation) {
    let mut rng = stream_rng(seed, 1);
    let dim_x = rng.random_range(1..=3);
    let dim_y = rng.random_range(1..=2);
    let target = rng.random_range(0.5..0.95);
    let p = random_contractive_pair(&mut rng, d, dim_x, dim_y, target);
    let dim_u = minimal_cholesky_dim(&p, &cfg()).unwrap();
    let u = realize_from_pair_cholesky(&p, dim_u, &cfg()).unwrap();
    (p, u)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn contractive_transfer_functions_are_contractive(seed in any::<u64>(), norm in 0.1f64..1.0) {
        let u = random_colligation(seed, norm);
        let tol = cfg().tolerances;
        prop_assert_eq!(transfer_eval(&u, &BallPoint::origin(u.d())).unwrap(), u.d_block().clone());
        let mut rng = stream_rng(seed, 2);
        for l in sample_points(&mut rng, u.d(), 200, 0.95) {
            prop_assert!(operator_norm(&transfer_eval(&u, &l).unwrap()) <= 1.0 + tol.eq_tol);
        }
    }

    #[test]
    fn classification_is_monotone(seed in any::<u64>(), norm in 0.5f64..1.2) {
        let class = classify_colligation(&random_colligation(seed, norm), &cfg().tolerances);
        prop_assert!(!class.unitary || (class.isometric && class.coisometric));
        prop_assert!(!(class.isometric || class.coisometric) || class.contractive);
    }

    #[test]
    fn kernels_are_hermitian(seed in any::<u64>()) {
        let (p, u) = realized_pair(seed, 2);
        let specs = [
            KernelSpec::Szego,
            KernelSpec::Schur(SchurEvaluator::from_colligation(u)),
            KernelSpec::Pair(p),
        ];
        let mut rng = stream_rng(seed, 3);
        let points = sample_points(&mut rng, 2, 10, 0.9);
        for k in &specs {
            for w in points.windows(2) {
                let a = eval_kernel(k, &w[0], &w[1]).unwrap();
                let b = eval_kernel(k, &w[1], &w[0]).unwrap();
                prop_assert!(max_abs(&(a - b.adjoint())) <= 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_realizations_are_coisometric(seed in any::<u64>(), d in 1usize..=3) {
        let (_, u) = realized_pair(seed, d);
        let tol = cfg().tolerances;
        prop_assert!(classify_colligation(&u, &tol).coisometric);
        let mut rng = stream_rng(seed, 4);
        let points = sample_points(&mut rng, d, 8, 0.9);
        for w in points.windows(2) {
            let r = defect_identity_residual(&u, &w[0], &w[1], &tol).unwrap();
            prop_assert!(r.residual <= tol.eq_tol);
            prop_assert!(r.kernel_gap <= tol.eq_tol);
        }
    }

    #[test]
    fn domain_complement_annihilated_by_row_symbol(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 5);
        let p = random_contractive_pair(&mut rng, 2, 3, 1, 0.9);
        let dsub = domain_subspace(&p, &cfg()).unwrap();
        prop_assert_eq!(dsub.taylor_rank, dsub.sampled_rank);
        let h = &dsub.subspace.complement;
        for (_, coeff) in row_function_coefficients(&p, h, 8) {
            prop_assert!(max_abs(&coeff) <= cfg().tolerances.eq_tol);
        }
    }

    #[test]
    fn completions_are_weakly_coisometric_and_reproduce(seed in any::<u64>()) {
        let cfg = cfg();
        let tol = cfg.tolerances;
        let (p, u) = realized_pair(seed, 2);
        let s = SchurEvaluator::from_colligation(u);
        let out = realize_with_pair(&s, &p, None, &cfg).unwrap();
        let blocks = &out.blocks;
        let (rows, cols) = blocks.parameter_shape();
        let mut rng = stream_rng(seed, 6);
        for _ in 0..3 {
            let m = random_matrix(&mut rng, rows, cols);
            let n = operator_norm(&m);
            let m = if n > 0.0 { m.scale(rng.random_range(0.0..1.0) / n) } else { m };
            let q = CompletionParameter::new(m, &tol).unwrap();
            let comp = parrott_complete(blocks, &q).unwrap();
            prop_assert!(comp.norm <= 1.0 + tol.eq_tol);
            prop_assert!(comp.orthogonality_residual <= tol.eq_tol);
            let tail_start = blocks.dim_complement();
            let tail = comp.u_star.columns(tail_start, comp.u_star.ncols() - tail_start).into_owned();
            for _ in 0..50 {
                let v = random_vector(&mut rng, tail.ncols());
                prop_assert!(((&tail * &v).norm() - v.norm()).abs() <= tol.eq_tol * v.norm());
            }
            let colligation = comp.colligation.unwrap();
            prop_assert!(reproduction_error(&colligation, &s, &cfg).unwrap() <= tol.eq_tol);
        }
    }

    #[test]
    fn ranges_complement_annihilated(seed in any::<u64>()) {
        let cfg = cfg();
        let (p, u) = realized_pair(seed, 2);
        let s = SchurEvaluator::from_colligation(u);
        let out = realize_with_pair(&s, &p, None, &cfg).unwrap();
        let perp = &out.v.range.complement;
        let n = p.dim_x();
        let mut rng = stream_rng(seed, 7);
        for l in sample_points(&mut rng, 2, 20, 0.9) {
            let value = p.resolvent_row(&l).unwrap() * perp.rows(0, n) + s.eval(&l).unwrap() * perp.rows(n, perp.nrows() - n);
            prop_assert!(max_abs(&value) <= cfg.tolerances.eq_tol);
        }
    }

    #[test]
    fn minimal_representers_differ_by_constant_unitary(seed in any::<u64>()) {
        let cfg = cfg();
        let mut rng = stream_rng(seed, 8);
        let p = random_contractive_pair(&mut rng, 2, 2, 1, 0.8);
        let r1 = enumerate_representers(&p, minimal_dim(&p), None, &cfg).unwrap();
        let k = r1.data.minimal_dim_u;
        let (qr, _, _) = arveson_core::numerics::svd_sorted(&random_matrix(&mut rng, k, k));
        let r2 = enumerate_representers(&p, k, Some(&qr), &cfg).unwrap();
        prop_assert!(r1.kernel_gap <= cfg.tolerances.eq_tol);
        prop_assert!(r1.adjoint_form_gap <= cfg.tolerances.eq_tol);
        let (_, rel) = relate_by_right_unitary(&r1.function, &r2.function, &cfg).unwrap();
        prop_assert!(rel.related, "{:?}", rel);
    }
}

fn minimal_dim(p: &OutputPair) -> usize {
    arveson_core::realization::representer_defect(p, &cfg()).unwrap().2
}

#[test]
fn isometric_parameters_give_exactly_the_coisometric_completions() {
    let cfg = cfg();
    let tol = cfg.tolerances;
    let s = example33::schur_function();
    let out = realize_with_pair(&s, &example33::pair_real(0.2), None, &cfg).unwrap();
    assert_eq!(out.blocks.parameter_shape(), (1, 1));
    for (q, isometric) in [(c(1.0, 0.0), true), (c(0.0, -1.0), true), (c(0.6, 0.0), false), (c(0.0, 0.0), false)] {
        let q = CompletionParameter::new(ComplexMatrix::from_element(1, 1, q), &tol).unwrap();
        assert_eq!(q.isometric, isometric);
        let comp = parrott_complete(&out.blocks, &q).unwrap();
        assert_eq!(comp.coisometry_residual <= tol.eq_tol, isometric, "{}", comp.coisometry_residual);
        // unitary parameter, but the pair is strictly contractive
        assert!(comp.unitary_residual > tol.eq_tol);
    }
}

#[test]
fn permutation_completion_is_unitary() {
    let cfg = cfg();
    let p = OutputPair::new(from_real_rows(1, 1, &[1.0]), OperatorTuple::zero(2, 1)).unwrap();
    let s = SchurEvaluator::from_fn(2, "coordinates", |l: &BallPoint| Ok(ComplexMatrix::from_row_slice(1, 2, l.coords()))).unwrap();
    let out = realize_with_pair(&s, &p, None, &cfg).unwrap();
    let fam = classify_family(&out.blocks, &p, &out.domain.subspace, &cfg).unwrap();
    assert!(fam.unique && fam.unitary_achievable);
    assert!(out.completion.unitary_residual <= cfg.tolerances.eq_tol);
}

#[test]
fn example_family_report() {
    let cfg = cfg();
    let p = example33::colligation().pair().clone();
    let out = realize_with_pair(&example33::schur_function(), &p, None, &cfg).unwrap();
    let fam = classify_family(&out.blocks, &p, &out.domain.subspace, &cfg).unwrap();
    assert!(!fam.unique && fam.coisometric_achievable && !fam.unitary_achievable);
    assert_eq!((fam.parameter_rows, fam.parameter_cols, fam.parameter_real_dim), (1, 1, 2));
    assert!(fam.restricted_input.passed, "{:?}", fam.restricted_input);
}

#[test]
fn pipeline_output_is_observable_for_observable_pairs() {
    let cfg = cfg();
    let tol = cfg.tolerances;
    for gamma in [0.0, 0.2] {
        let p = example33::pair_real(gamma);
        assert!(ObservabilityData::compute(&p, &tol).observable);
        let out = realize_with_pair(&example33::schur_function(), &p, None, &cfg).unwrap();
        assert!(ObservabilityData::compute(out.colligation.pair(), &tol).observable);
    }
}

#[test]
fn domain_contains_output_directions() {
    // Z(0)^* = 0, so the generator at the origin is (0; y): D (+) Y always
    // contains {0} (+) Y, i.e. T12 has C^* as its last block.
    let cfg = cfg();
    let p = example33::pair_real(0.1);
    let out = realize_with_pair(&example33::schur_function(), &p, None, &cfg).unwrap();
    let n = out.domain.subspace.dim();
    let tail = out.blocks.t12.columns(n, p.dim_y()).into_owned();
    assert!(max_abs(&(tail - p.c().adjoint())) == 0.0);
    let stacked = vstack(&[&out.blocks.t12, &out.blocks.t22]);
    assert!(max_abs(&(stacked.adjoint() * &stacked - identity(stacked.ncols()))) <= cfg.tolerances.eq_tol);
}
