//! The two-variable example with a seven-dimensional input space whose
//! output pair is not determined by the transfer function: a one-parameter
//! family of pairwise inequivalent pairs `(C, A_gamma)` share the same
//! kernel `K_{C,A_gamma} = K_S`.

use num_complex::Complex64;

use crate::colligation::{classify_colligation, transfer_eval, BallPoint, Colligation, OperatorTuple, OutputPair};
use crate::error::Result;
use crate::kernels::{kernel_gap_on_pairs, KernelSpec, SchurEvaluator};
use crate::numerics::{max_abs, min_eigenvalue, re, zeros, ComplexMatrix};
use crate::realization::{observability_and_equivalence, realize_with_pair, reproduction_error, ObservabilityData};
use crate::report::{Check, Report};
use crate::sampling::{sample_point, sample_points, SampleConfig, Stream};

pub const DIM_X: usize = 3;
pub const DIM_U: usize = 7;

/// `|gamma|` above which `(C, A_gamma)` stops being contractive.
pub fn gamma_threshold() -> f64 {
    1.0 / (2.0 * 2f64.sqrt())
}

pub fn output_matrix() -> ComplexMatrix {
    let mut c = zeros(1, 3);
    c[(0, 0)] = re(0.5);
    c
}

pub fn state_tuple(gamma: Complex64) -> OperatorTuple {
    let mut a1 = zeros(3, 3);
    a1[(0, 1)] = re(0.25);
    a1[(2, 0)] = re(0.5) + gamma;
    let mut a2 = zeros(3, 3);
    a2[(0, 2)] = re(0.25);
    a2[(1, 0)] = re(0.5) - gamma;
    OperatorTuple::new(vec![a1, a2]).expect("square blocks")
}

pub fn pair(gamma: Complex64) -> OutputPair {
    OutputPair::new(output_matrix(), state_tuple(gamma)).expect("consistent dimensions")
}

pub fn pair_real(gamma: f64) -> OutputPair {
    pair(re(gamma))
}

pub fn input_blocks() -> Vec<ComplexMatrix> {
    let s15 = 15f64.sqrt() / 4.0;
    let mut b1 = zeros(3, 7);
    b1[(0, 1)] = re(s15);
    b1[(1, 2)] = re(1.0);
    b1[(2, 0)] = re(-1.0 / (2.0 * 3f64.sqrt()));
    b1[(2, 3)] = re((2.0f64 / 3.0).sqrt());
    let mut b2 = zeros(3, 7);
    b2[(0, 4)] = re(s15);
    b2[(1, 0)] = re(-1.0 / (2.0 * 3f64.sqrt()));
    b2[(1, 3)] = re(-1.0 / 6f64.sqrt());
    b2[(1, 5)] = re(1.0 / 2f64.sqrt());
    b2[(2, 6)] = re(1.0);
    vec![b1, b2]
}

pub fn feedthrough() -> ComplexMatrix {
    let mut d = zeros(1, 7);
    d[(0, 0)] = re(3f64.sqrt() / 2.0);
    d
}

/// The coisometric `7 x 10` colligation `U_0`.
pub fn colligation() -> Colligation {
    Colligation::from_pair(pair(re(0.0)), input_blocks(), feedthrough()).expect("consistent dimensions")
}

/// Closed form of the transfer function of `U_0`.
pub fn closed_form(l: &BallPoint) -> ComplexMatrix {
    let (l1, l2) = (l.coords()[0], l.coords()[1]);
    let p = l1 * l2;
    let den = (re(4.0) - p) * 2.0;
    let entries = [
        (re(12.0) - p * 4.0) / 3f64.sqrt(),
        l1 * 15f64.sqrt(),
        l1 * l1,
        p / 6f64.sqrt(),
        l2 * 15f64.sqrt(),
        p / 2f64.sqrt(),
        l2 * l2,
    ];
    ComplexMatrix::from_fn(1, 7, |_, j| entries[j] / den)
}

/// Closed form of `C (I - l_1 A_{gamma,1} - l_2 A_{gamma,2})^{-1}`, the same
/// for every `gamma`.
pub fn closed_form_resolvent_row(l: &BallPoint) -> ComplexMatrix {
    let (l1, l2) = (l.coords()[0], l.coords()[1]);
    let den = (re(4.0) - l1 * l2) * 2.0;
    let entries = [re(4.0), l1, l2];
    ComplexMatrix::from_fn(1, 3, |_, j| entries[j] / den)
}

/// The transfer function as a closed-form evaluator (independent of any
/// colligation).
pub fn schur_function() -> SchurEvaluator {
    SchurEvaluator::from_fn(2, "example33", |l: &BallPoint| -> Result<ComplexMatrix> { Ok(closed_form(l)) })
        .expect("closed form is total")
}

/// Orthonormal vector spanning the complement of the domain subspace of
/// `(C, A_0)` inside `C^3 (+) C^3`: `(e_3; -e_2) / sqrt 2`.
pub fn domain_complement_witness() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = zeros(6, 1);
    v[(2, 0)] = re(h);
    v[(4, 0)] = re(-h);
    v
}

/// Unit vector spanning the null space of `S`: proportional to
/// `(0, 0, 0, sqrt 3, 0, -1, 0)`.
pub fn multiplier_kernel_witness() -> ComplexMatrix {
    let mut v = zeros(7, 1);
    v[(3, 0)] = re(3f64.sqrt() / 2.0);
    v[(5, 0)] = re(-0.5);
    v
}

/// Regression suite over the example: assembly, closed forms, kernel
/// equalities along the `gamma` family, the contractivity threshold, the
/// completion pipeline and pairwise inequivalence of the family.
pub fn example33_suite(cfg: &SampleConfig) -> Report {
    let tol = &cfg.tolerances;
    let mut report = Report::new("example33");

    let u0 = colligation();
    let class = classify_colligation(&u0, tol);
    report.push(Check::bounded(
        "u0_coisometric",
        class.coisometry_residual,
        1e-12,
        format!("unitary = {}", class.unitary),
    ));

    let mut rng = cfg.rng(Stream::Reproduction);
    let points = sample_points(&mut rng, 2, 100, 0.95);
    let mut transfer_err: f64 = 0.0;
    let mut row_err: f64 = 0.0;
    let mut failure = None;
    for l in &points {
        match transfer_eval(&u0, l) {
            Ok(s) => transfer_err = transfer_err.max(max_abs(&(s - closed_form(l)))),
            Err(e) => failure = Some(e),
        }
        for gamma in [0.0, 0.2, gamma_threshold() - 0.01] {
            match pair_real(gamma).resolvent_row(l) {
                Ok(r) => row_err = row_err.max(max_abs(&(r - closed_form_resolvent_row(l)))),
                Err(e) => failure = Some(e),
            }
        }
    }
    match failure {
        Some(e) => report.push(Check::error("closed_form_transfer", &e)),
        None => {
            report.push(Check::bounded("closed_form_transfer", transfer_err, 1e-12, "100 points, radius 0.95"));
            report.push(Check::bounded("closed_form_resolvent_row", row_err, 1e-12, "gamma in {0, 0.2, threshold - 0.01}"));
        }
    }

    let s = schur_function();
    let mut rng = cfg.rng(Stream::KernelPoints);
    let pairs: Vec<(BallPoint, BallPoint)> = (0..50)
        .map(|_| {
            let l = sample_point(&mut rng, 2, cfg.sample_radius);
            let z = sample_point(&mut rng, 2, cfg.sample_radius);
            (l, z)
        })
        .collect();
    for gamma in [0.0, 0.2, gamma_threshold() - 0.01] {
        let name = format!("kernel_equality_gamma_{gamma:.4}");
        match kernel_gap_on_pairs(&KernelSpec::Schur(s.clone()), &KernelSpec::Pair(pair_real(gamma)), &pairs) {
            Ok(gap) => report.push(Check::bounded(name, gap, 1e-10, "50 point pairs")),
            Err(e) => report.push(Check::error(name, &e)),
        }
    }

    let below = min_eigenvalue(&pair_real(gamma_threshold() - 1e-3).contractivity_defect());
    let above = min_eigenvalue(&pair_real(gamma_threshold() + 1e-3).contractivity_defect());
    report.push(Check::flag(
        "contractivity_threshold",
        below > 0.0 && above < 0.0,
        format!("min defect eigenvalue {below:.3e} below, {above:.3e} above"),
    ));

    match realize_with_pair(&s, &pair_real(0.2), None, cfg) {
        Ok(out) => {
            report.push(Check::bounded(
                "pipeline_gamma_0.2_weakly_coisometric",
                out.completion.weak_isometry_residual,
                tol.eq_tol,
                format!("norm {:.12}", out.completion.norm),
            ));
            match reproduction_error(&out.colligation, &s, cfg) {
                Ok(err) => report.push(Check::bounded("pipeline_gamma_0.2_reproduces", err, tol.eq_tol, "")),
                Err(e) => report.push(Check::error("pipeline_gamma_0.2_reproduces", &e)),
            }
        }
        Err(e) => report.push(Check::error("pipeline_gamma_0.2_weakly_coisometric", &e)),
    }

    let obs = ObservabilityData::compute(&pair_real(0.0), tol);
    report.push(Check::flag("pair_gamma_0_observable", obs.observable, ""));

    let grid = [0.0, 0.1, 0.2, 0.3];
    let mut mismatches = Vec::new();
    for &g1 in &grid {
        for &g2 in &grid {
            let r = observability_and_equivalence(&pair_real(g1), &pair_real(g2), tol);
            if r.equivalent != (g1 == g2) {
                mismatches.push(format!("({g1}, {g2})"));
            }
        }
    }
    report.push(Check::flag(
        "inequivalence_grid",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "equivalent exactly on the diagonal of {0, 0.1, 0.2, 0.3}^2".to_string()
        } else {
            format!("wrong verdict at {}", mismatches.join(", "))
        },
    ));
    report
}
