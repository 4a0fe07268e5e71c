//! Acceptance run: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit
//! status if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use arveson_core::colligation::{classify_colligation, transfer_eval, BallPoint, OperatorTuple, OutputPair};
use arveson_core::completion::{classify_family, parrott_complete, CompletionBlocks, CompletionParameter};
use arveson_core::kernels::{kernel_gap_on_pairs, KernelSpec, SchurEvaluator};
use arveson_core::numerics::{c, from_real_rows, max_abs, min_eigenvalue, operator_norm, ComplexMatrix, Tolerances};
use arveson_core::overlap::example33_overlap;
use arveson_core::realization::example33;
use arveson_core::realization::{
    enumerate_representers, gleason_check, minimal_cholesky_dim, observability_and_equivalence,
    realize_from_pair_cholesky, realize_with_pair, relate_by_right_unitary, reproduction_error, GleasonInput,
    ObservabilityData,
};
use arveson_core::sampling::{random_contractive_pair, random_matrix, sample_point, sample_points, stream_rng, SampleConfig, Stream};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cfg() -> SampleConfig {
    SampleConfig::default()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unit_pair(d: usize) -> OutputPair {
    OutputPair::new(from_real_rows(1, 1, &[1.0]), OperatorTuple::zero(d, 1)).unwrap()
}

fn coordinates() -> SchurEvaluator {
    SchurEvaluator::from_fn(2, "coordinates", |l: &BallPoint| Ok(ComplexMatrix::from_row_slice(1, 2, l.coords()))).unwrap()
}

fn example_assembly() -> Outcome {
    let class = classify_colligation(&example33::colligation(), &Tolerances::default());
    ensure(
        class.coisometry_residual <= 1e-12,
        format!("|U U^* - I| = {:.3e}", class.coisometry_residual),
    )
}

fn example_closed_forms() -> Outcome {
    let u0 = example33::colligation();
    let mut rng = cfg().rng(Stream::Reproduction);
    let points = sample_points(&mut rng, 2, 100, 0.95);
    let mut transfer: f64 = 0.0;
    let mut row: f64 = 0.0;
    for l in &points {
        let s = transfer_eval(&u0, l).map_err(|e| e.to_string())?;
        transfer = transfer.max(max_abs(&(s - example33::closed_form(l))));
        let r = u0.pair().resolvent_row(l).map_err(|e| e.to_string())?;
        row = row.max(max_abs(&(r - example33::closed_form_resolvent_row(l))));
    }
    ensure(
        transfer <= 1e-12 && row <= 1e-12,
        format!("transfer error {transfer:.3e}, resolvent row error {row:.3e} over 100 points"),
    )
}

fn example_kernel_equalities() -> Outcome {
    let s = example33::schur_function();
    let mut rng = cfg().rng(Stream::KernelPoints);
    let pairs: Vec<(BallPoint, BallPoint)> =
        (0..50).map(|_| (sample_point(&mut rng, 2, 0.9), sample_point(&mut rng, 2, 0.9))).collect();
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 0.2, example33::gamma_threshold() - 0.01] {
        let gap = kernel_gap_on_pairs(&KernelSpec::Schur(s.clone()), &KernelSpec::Pair(example33::pair_real(gamma)), &pairs)
            .map_err(|e| e.to_string())?;
        worst = worst.max(gap);
        details.push(format!("gamma={gamma:.4}: {gap:.3e}"));
    }
    ensure(worst <= 1e-10, details.join(", "))
}

fn contractivity_threshold() -> Outcome {
    let t = example33::gamma_threshold();
    let below = min_eigenvalue(&example33::pair_real(t - 1e-3).contractivity_defect());
    let above = min_eigenvalue(&example33::pair_real(t + 1e-3).contractivity_defect());
    ensure(
        below > 0.0 && above < 0.0,
        format!("min defect eigenvalue {below:.3e} below, {above:.3e} above"),
    )
}

fn cholesky_realizations() -> Outcome {
    let cfg = cfg();
    let mut rng = stream_rng(cfg.seed, Stream::Instances as u64);
    let mut worst_coisometry: f64 = 0.0;
    let mut worst_kernel: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=3);
        let dim_x = rng.random_range(1..=6);
        let dim_y = rng.random_range(1..=3);
        let target = rng.random_range(0.5..1.0);
        let p = random_contractive_pair(&mut rng, d, dim_x, dim_y, target);
        let dim_u = minimal_cholesky_dim(&p, &cfg).map_err(|e| e.to_string())?;
        let u = realize_from_pair_cholesky(&p, dim_u, &cfg).map_err(|e| e.to_string())?;
        worst_coisometry = worst_coisometry.max(classify_colligation(&u, &cfg.tolerances).coisometry_residual);
        let pairs: Vec<(BallPoint, BallPoint)> =
            (0..25).map(|_| (sample_point(&mut rng, d, 0.9), sample_point(&mut rng, d, 0.9))).collect();
        let gap = kernel_gap_on_pairs(&KernelSpec::Schur(SchurEvaluator::from_colligation(u)), &KernelSpec::Pair(p), &pairs)
            .map_err(|e| e.to_string())?;
        worst_kernel = worst_kernel.max(gap);
    }
    ensure(
        worst_coisometry <= 1e-10 && worst_kernel <= 1e-8,
        format!("100 pairs: |U U^* - I| <= {worst_coisometry:.3e}, kernel gap <= {worst_kernel:.3e}"),
    )
}

fn example_parrott_family() -> Outcome {
    let cfg = cfg();
    let tol = &cfg.tolerances;
    let s = example33::schur_function();
    let out = realize_with_pair(&s, &example33::pair_real(0.2), None, &cfg).map_err(|e| e.to_string())?;
    let blocks = &out.blocks;
    let (rows, cols) = blocks.parameter_shape();
    let mut rng = cfg.rng(Stream::Parameters);
    let mut weak: f64 = 0.0;
    let mut repro: f64 = 0.0;
    for _ in 0..20 {
        let m = random_matrix(&mut rng, rows, cols);
        let norm = operator_norm(&m);
        let scale = if norm > 0.0 { rng.random_range(0.0..1.0) / norm } else { 0.0 };
        let q = CompletionParameter::new(m.scale(scale), tol).map_err(|e| e.to_string())?;
        let comp = parrott_complete(blocks, &q).map_err(|e| e.to_string())?;
        weak = weak.max(comp.weak_isometry_residual);
        let colligation = comp.colligation.ok_or("completion lacks a frame")?;
        repro = repro.max(reproduction_error(&colligation, &s, &cfg).map_err(|e| e.to_string())?);
    }
    let mut cois: f64 = 0.0;
    for theta in [0.0, 1.0, 2.5] {
        let q = ComplexMatrix::from_fn(rows, cols, |i, j| if i == j { c(f64::cos(theta), f64::sin(theta)) } else { c(0.0, 0.0) });
        let q = CompletionParameter::new(q, tol).map_err(|e| e.to_string())?;
        if !q.isometric {
            return Err(format!("parameter shape {rows}x{cols} admits no isometry"));
        }
        let comp = parrott_complete(blocks, &q).map_err(|e| e.to_string())?;
        cois = cois.max(comp.coisometry_residual);
    }
    ensure(
        weak <= 1e-9 && repro <= 1e-9 && cois <= 1e-9,
        format!("Q is {rows}x{cols}; weak isometry {weak:.3e}, reproduction {repro:.3e}, isometric Q coisometry {cois:.3e}"),
    )
}

fn single_variable_collapse() -> Outcome {
    let cfg = cfg();
    let tol = &cfg.tolerances;
    let mut rng = stream_rng(cfg.seed, Stream::Instances as u64 + 100);
    let mut worst_b: f64 = 0.0;
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < 50 {
        attempts += 1;
        if attempts > 500 {
            return Err("could not draw 50 observable pairs".into());
        }
        let dim_x = rng.random_range(1..=4);
        let dim_y = rng.random_range(1..=2);
        let target = rng.random_range(0.5..0.95);
        let p = random_contractive_pair(&mut rng, 1, dim_x, dim_y, target);
        if !ObservabilityData::compute(&p, tol).observable {
            continue;
        }
        accepted += 1;
        let dim_u = minimal_cholesky_dim(&p, &cfg).map_err(|e| e.to_string())?;
        let chol = realize_from_pair_cholesky(&p, dim_u, &cfg).map_err(|e| e.to_string())?;
        let s = SchurEvaluator::from_colligation(chol.clone());
        let out = realize_with_pair(&s, &p, None, &cfg).map_err(|e| e.to_string())?;
        let complement = out.domain.subspace.complement_dim();
        let family = classify_family(&out.blocks, &p, &out.domain.subspace, &cfg).map_err(|e| e.to_string())?;
        if complement != 0 || !family.unique || family.parameter_real_dim != 0 {
            return Err(format!("pair {accepted}: complement dim {complement}, unique {}", family.unique));
        }
        let b = &out.completion.b.as_ref().ok_or("completion lacks a frame")?[0];
        let cv_star = &out.domain.subspace.basis * out.v.c_v.adjoint();
        worst_b = worst_b.max(max_abs(&(b - cv_star))).max(max_abs(&(b - &chol.b()[0])));
    }
    ensure(
        worst_b <= 1e-10,
        format!("50 observable pairs: empty complement, singleton family, |B - C_V^*| <= {worst_b:.3e}"),
    )
}

fn representers() -> Outcome {
    let cfg = cfg();
    let p = unit_pair(2);
    let r1 = enumerate_representers(&p, 2, None, &cfg).map_err(|e| e.to_string())?;
    let (_, to_coords) = relate_by_right_unitary(&r1.function, &coordinates(), &cfg).map_err(|e| e.to_string())?;
    let t = 0.7f64;
    let g = ComplexMatrix::from_row_slice(2, 2, &[c(t.cos(), 0.0), c(0.0, t.sin()), c(0.0, t.sin()), c(t.cos(), 0.0)]);
    let r2 = enumerate_representers(&p, 2, Some(&g), &cfg).map_err(|e| e.to_string())?;
    let (_, pair) = relate_by_right_unitary(&r1.function, &r2.function, &cfg).map_err(|e| e.to_string())?;
    ensure(
        r1.data.minimal_dim_u == 2
            && to_coords.related
            && pair.related
            && to_coords.fit_residual.max(to_coords.unitarity_residual) <= 1e-9
            && pair.fit_residual.max(pair.unitarity_residual) <= 1e-9,
        format!(
            "minimal dimU {}, against [l1, l2]: fit {:.3e} unitarity {:.3e}; two representers: fit {:.3e} unitarity {:.3e}",
            r1.data.minimal_dim_u, to_coords.fit_residual, to_coords.unitarity_residual, pair.fit_residual, pair.unitarity_residual
        ),
    )
}

fn uniqueness_classification() -> Outcome {
    let cfg = cfg();
    let p = unit_pair(2);
    let out = realize_with_pair(&coordinates(), &p, None, &cfg).map_err(|e| e.to_string())?;
    let fam = classify_family(&out.blocks, &p, &out.domain.subspace, &cfg).map_err(|e| e.to_string())?;
    let permutation = from_real_rows(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    let perm_gap = max_abs(&(out.colligation.matrix() - permutation));

    let p33 = example33::colligation().pair().clone();
    let out33 = realize_with_pair(&example33::schur_function(), &p33, None, &cfg).map_err(|e| e.to_string())?;
    let fam33 = classify_family(&out33.blocks, &p33, &out33.domain.subspace, &cfg).map_err(|e| e.to_string())?;
    ensure(
        fam.unique
            && fam.unitary_achievable
            && perm_gap <= 1e-12
            && !fam33.unique
            && fam33.coisometric_achievable
            && !fam33.unitary_achievable,
        format!(
            "coordinates: unique {} unitary {} permutation gap {perm_gap:.3e}; example: unique {} coisometric {} unitary {}",
            fam.unique, fam.unitary_achievable, fam33.unique, fam33.coisometric_achievable, fam33.unitary_achievable
        ),
    )
}

fn gleason_and_observability() -> Outcome {
    let cfg = cfg();
    let tol = &cfg.tolerances;
    let mut pairs: Vec<OutputPair> = [0.0, 0.1, 0.2, 0.3].iter().map(|&g| example33::pair_real(g)).collect();
    pairs.push(unit_pair(2));
    let mut rng = stream_rng(cfg.seed, Stream::Instances as u64 + 200);
    for d in 1..=3 {
        pairs.push(random_contractive_pair(&mut rng, d, 3, 2, 0.9));
    }
    let mut worst: f64 = 0.0;
    for p in &pairs {
        let r = gleason_check(&GleasonInput::Pair(p.clone()), &cfg).map_err(|e| e.to_string())?;
        let check = r.get("gleason_identity").ok_or("missing gleason_identity check")?;
        worst = worst.max(check.residual.unwrap_or(f64::INFINITY));
    }
    let observable = ObservabilityData::compute(&example33::pair_real(0.0), tol).observable;
    let grid = [0.0, 0.1, 0.2, 0.3];
    let mut wrong = Vec::new();
    for &a in &grid {
        for &b in &grid {
            let r = observability_and_equivalence(&example33::pair_real(a), &example33::pair_real(b), tol);
            if r.equivalent != (a == b) {
                wrong.push(format!("({a}, {b})"));
            }
        }
    }
    ensure(
        worst <= 1e-12 && observable && wrong.is_empty(),
        format!(
            "identity residual {worst:.3e} over {} pairs, gamma=0 observable {observable}, grid errors [{}]",
            pairs.len(),
            wrong.join(", ")
        ),
    )
}

fn overlapping_spaces() -> Outcome {
    let r = example33_overlap(30, &cfg()).map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    for name in [
        "domain_psi_isometry",
        "domain_gamma_unitary",
        "range_psi_isometry",
        "range_gamma_unitary",
        "domain_overlap_dim",
        "domain_witness_in_overlap",
        "domain_witness_cancels",
        "range_overlap_constant_part",
    ] {
        match r.get(name) {
            Some(ch) if ch.passed() && ch.residual.is_none_or(|x| x <= 1e-9) => {}
            _ => bad.push(name),
        }
    }
    let psi = r.get("domain_psi_isometry").and_then(|c| c.residual).unwrap_or(f64::NAN);
    let gamma = r.get("range_gamma_unitary").and_then(|c| c.residual).unwrap_or(f64::NAN);
    ensure(
        bad.is_empty() && r.passed(),
        format!("domain isometry {psi:.3e}, range unitarity {gamma:.3e}; failing [{}]", bad.join(", ")),
    )
}

/// `|M| <= 1` for a 2x2 matrix, decided by positivity of `I - M^*M` through
/// its diagonal and determinant (no square roots).
fn contractive_2x2(m: [[num_complex::Complex64; 2]; 2], tol: f64) -> bool {
    let col = |j: usize| [m[0][j], m[1][j]];
    let dot = |a: [num_complex::Complex64; 2], b: [num_complex::Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
    let h11 = 1.0 - dot(col(0), col(0)).re;
    let h22 = 1.0 - dot(col(1), col(1)).re;
    let h12 = dot(col(0), col(1));
    h11 >= -tol && h22 >= -tol && h11 * h22 - h12.norm_sqr() >= -tol
}

fn scalar_toy_oracle() -> Outcome {
    let tol = Tolerances::default();
    let blocks = CompletionBlocks::from_raw(
        from_real_rows(1, 1, &[0.0]),
        from_real_rows(1, 1, &[1.0]),
        from_real_rows(1, 1, &[0.0]),
        &tol,
    )
    .map_err(|e| e.to_string())?;
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let mut worst_boundary: f64 = 0.0;
    let mut disagreements = 0;
    for k in 0..64 {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
        let dir = c(theta.cos(), theta.sin());
        let mut boundary = 0.0;
        for step in 0..=2000 {
            let r = step as f64 / 1000.0;
            let x = dir * r;
            let brute = contractive_2x2([[zero, one], [x, zero]], 1e-12);
            if brute {
                boundary = r;
            }
            let q = ComplexMatrix::from_element(1, 1, x);
            let family = match CompletionParameter::new(q, &tol) {
                Ok(param) => {
                    let comp = parrott_complete(&blocks, &param).map_err(|e| e.to_string())?;
                    (comp.x[(0, 0)] - x).norm() <= 1e-12 && comp.norm <= 1.0 + 1e-9
                }
                Err(_) => false,
            };
            // the parameter tolerance admits |X| up to 1 + eq_tol, below the grid step
            if brute != family && (r - 1.0).abs() > 1e-3 {
                disagreements += 1;
            }
        }
        worst_boundary = worst_boundary.max((boundary - 1.0).abs());
    }
    ensure(
        disagreements == 0 && worst_boundary <= 1e-3,
        format!("64 directions x 2001 radii: {disagreements} disagreements, boundary error {worst_boundary:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("example colligation is coisometric", example_assembly),
        ("transfer function and resolvent row match closed forms", example_closed_forms),
        ("kernel equalities along the gamma family", example_kernel_equalities),
        ("contractivity threshold of the gamma family", contractivity_threshold),
        ("Cholesky realizations of random contractive pairs", cholesky_realizations),
        ("completion family of the example", example_parrott_family),
        ("single-variable collapse", single_variable_collapse),
        ("representers of the unit pair", representers),
        ("uniqueness classification", uniqueness_classification),
        ("Gleason identity, observability and equivalence grid", gleason_and_observability),
        ("overlapping spaces of the example", overlapping_spaces),
        ("scalar completion against brute-force grid", scalar_toy_oracle),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
