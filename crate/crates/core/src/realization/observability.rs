//! Observability of output pairs, the Gleason identity on the range of the
//! observability map, and unitary equivalence of pairs.
//!
//! For a pair `(C, A)` the observability map is `(O x)(l) = C R(l) x` with
//! `R(l) = (I - Z(l)A)^{-1} = sum_beta l^beta H_beta`. Its range, with the
//! norm `|O x| = |P x|` where `P` projects onto `(Ker O)^perp`, is the
//! reproducing kernel space of `K_{C,A}`.

use serde::{Deserialize, Serialize};

use crate::colligation::{classify_pair, Colligation, OutputPair};
use crate::error::Result;
use crate::kernels::{lower, multi_indices, SchurEvaluator};
use crate::numerics::{
    complement_basis, identity, max_abs, orthonormal_basis, pseudo_inverse, vstack, zeros, BasisMode, ComplexMatrix,
    Tolerances,
};
use crate::report::{Check, Report, Status};
use crate::sampling::{random_vector, SampleConfig, Stream};
use crate::subspaces::ColumnSpan;

/// Taylor data of the observability map.
#[derive(Debug, Clone)]
pub struct ObservabilityData {
    pub pair: OutputPair,
    /// `(beta, C H_beta)` for `|beta| <= degree`, graded.
    pub coefficients: Vec<(Vec<usize>, ComplexMatrix)>,
    pub degree: usize,
    /// True when the row span stopped growing before the cap.
    pub stabilized: bool,
    /// `sum_beta (C H_beta)^* (C H_beta)` over the computed coefficients.
    pub gram: ComplexMatrix,
    pub observable: bool,
    /// Orthonormal basis of the unobservable subspace `Ker O`.
    pub kernel: ComplexMatrix,
    /// Orthogonal projection onto `(Ker O)^perp`.
    pub range_projector: ComplexMatrix,
}

impl ObservabilityData {
    /// Coefficients up to total degree `dim X`, extended until the span of
    /// coefficient rows is unchanged for two consecutive degrees (capped at
    /// `2 d dim X`).
    pub fn compute(p: &OutputPair, tol: &Tolerances) -> Self {
        let d = p.d();
        let n = p.dim_x();
        let min_degree = n.max(1);
        let cap = (2 * d * n).max(min_degree);
        Self::build(p, tol, min_degree, cap)
    }

    /// Coefficients up to exactly `degree`.
    pub fn with_degree(p: &OutputPair, tol: &Tolerances, degree: usize) -> Self {
        Self::build(p, tol, degree, degree)
    }

    fn build(p: &OutputPair, tol: &Tolerances, min_degree: usize, cap: usize) -> Self {
        let d = p.d();
        let n = p.dim_x();
        let mut h: std::collections::HashMap<Vec<usize>, ComplexMatrix> = std::collections::HashMap::new();
        h.insert(vec![0; d], identity(n));
        let mut coefficients = vec![(vec![0; d], p.c().clone())];
        let mut span = ColumnSpan::new(n);
        span.push(&p.c().adjoint());
        let mut ranks = vec![span.rank(tol)];
        let mut degree = 0;
        let mut stabilized = false;
        for k in 1..=cap {
            let mut block = Vec::new();
            for beta in multi_indices(d, k) {
                let mut m = zeros(n, n);
                for (j, a) in p.a().blocks().iter().enumerate() {
                    if let Some(prev) = lower(&beta, j) {
                        m += a * &h[&prev];
                    }
                }
                let row = p.c() * &m;
                block.push(row.adjoint());
                coefficients.push((beta.clone(), row));
                h.insert(beta, m);
            }
            let refs: Vec<&ComplexMatrix> = block.iter().collect();
            span.push(&crate::numerics::hstack(&refs));
            degree = k;
            let r = span.rank(tol);
            ranks.push(r);
            let len = ranks.len();
            let flat = len >= 3 && ranks[len - 1] == ranks[len - 2] && ranks[len - 2] == ranks[len - 3];
            if k >= min_degree && (r == n || flat) {
                stabilized = true;
                break;
            }
        }
        let mut gram = zeros(n, n);
        for (_, c) in &coefficients {
            gram += c.adjoint() * c;
        }
        let range = orthonormal_basis(&span.factor, BasisMode::Range, tol);
        let kernel = complement_basis(&range, n);
        ObservabilityData {
            pair: p.clone(),
            coefficients,
            degree,
            stabilized: stabilized || n == 0,
            gram,
            observable: kernel.ncols() == 0,
            range_projector: &range * range.adjoint(),
            kernel,
        }
    }

    /// All coefficient rows stacked: the finite certificate of `O`.
    pub fn stacked(&self) -> ComplexMatrix {
        let refs: Vec<&ComplexMatrix> = self.coefficients.iter().map(|(_, c)| c).collect();
        vstack(&refs)
    }
}

/// What [`gleason_check`] inspects.
#[derive(Debug, Clone)]
pub enum GleasonInput {
    Pair(OutputPair),
    /// A colligation; kernel sections of its transfer function are also
    /// matched against the observability images.
    Colligation(Colligation),
}

/// Gleason identity `f(l) - f(0) = sum_j l_j (A_j f)(l)` on `f = O x`, its
/// norm inequality (pair contractivity) and the identification of kernel
/// sections with observability images under the lifted norm.
pub fn gleason_check(input: &GleasonInput, cfg: &SampleConfig) -> Result<Report> {
    let tol = &cfg.tolerances;
    let (p, s) = match input {
        GleasonInput::Pair(p) => (p.clone(), None),
        GleasonInput::Colligation(c) => (c.pair().clone(), Some(SchurEvaluator::from_colligation(c.clone()))),
    };
    let mut report = Report::new("gleason");
    let points = cfg.points(p.d(), Stream::Gleason);
    let mut rng = cfg.rng(Stream::TestVectors);
    let xs: Vec<ComplexMatrix> = (0..5)
        .map(|_| {
            let v = random_vector(&mut rng, p.dim_x());
            let nv = v.norm();
            if nv > 0.0 {
                v.unscale(nv)
            } else {
                v
            }
        })
        .collect();

    let mut identity_residual: f64 = 0.0;
    for l in &points {
        let row = p.resolvent_row(l)?;
        for x in &xs {
            let mut rhs = p.c() * x;
            for (lj, a) in l.coords().iter().zip(p.a().blocks()) {
                rhs += (&row * a * x) * *lj;
            }
            identity_residual = identity_residual.max(max_abs(&(&row * x - rhs)));
        }
    }
    report.push(Check::bounded(
        "gleason_identity",
        identity_residual,
        tol.eq_tol,
        format!("{} points x {} state vectors", points.len(), xs.len()),
    ));

    let class = classify_pair(&p, tol);
    report.push(Check {
        name: "gleason_norm_inequality".into(),
        status: Status::from_bool(class.contractive_pair),
        residual: Some(class.min_defect_eig),
        details: "minimum eigenvalue of I - sum A_j^* A_j - C^* C".into(),
    });

    let obs = ObservabilityData::compute(&p, tol);
    let mut section_residual: f64 = 0.0;
    for z in &points {
        let xz = p.adjoint_resolvent_column(z)?;
        let row = p.resolvent_row(z)?;
        for x in &xs {
            let lifted = xz.adjoint() * &obs.range_projector * x;
            section_residual = section_residual.max(max_abs(&(lifted - &row * x)));
        }
    }
    report.push(Check::bounded(
        "kernel_sections_reproduce",
        section_residual,
        tol.eq_tol,
        format!(
            "observable = {}, coefficient degree {}{}",
            obs.observable,
            obs.degree,
            if obs.stabilized { "" } else { " (cap reached)" }
        ),
    ));

    if let Some(s) = s {
        let mut gap: f64 = 0.0;
        for (i, l) in points.iter().enumerate() {
            let row = p.resolvent_row(l)?;
            let sl = s.eval(l)?;
            for z in points.iter().skip(i) {
                let den = crate::kernels::szego_denominator(l, z)?;
                let ks = (identity(p.dim_y()) - &sl * s.eval_adjoint(z)?).map(|v| v / den);
                let image = &row * p.adjoint_resolvent_column(z)?;
                gap = gap.max(max_abs(&(ks - image)));
            }
        }
        report.push(Check::bounded(
            "schur_kernel_sections",
            gap,
            tol.eq_tol,
            "K_S(., z) y against O (I - A^* Z(z)^*)^{-1} C^* y",
        ));
    }
    Ok(report)
}

/// Observability of two pairs and whether they are unitarily equivalent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub observable1: bool,
    pub observable2: bool,
    pub equivalent: bool,
    /// `max(|C2 U - C1|, |U A1_j - A2_j U|)` for the least-squares `U`.
    pub intertwining_residual: f64,
    /// `max |U^* U - I|`.
    pub unitarity_residual: f64,
    /// Accepted unitary `U` with `C2 U = C1`, `U A1_j = A2_j U`.
    #[serde(skip)]
    pub witness: Option<ComplexMatrix>,
    /// For observable pairs: the map `W` with `O_2 W = O_1`, which is
    /// unitary exactly when the kernels agree.
    pub gram_witness: Option<GramWitness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramWitness {
    pub fit_residual: f64,
    pub unitarity_residual: f64,
    pub intertwining_residual: f64,
    /// Fit and unitarity within tolerance: the two kernels coincide.
    pub kernels_equal: bool,
}

fn intertwining_residual(p1: &OutputPair, p2: &OutputPair, u: &ComplexMatrix) -> f64 {
    let mut r = max_abs(&(p2.c() * u - p1.c()));
    for (a1, a2) in p1.a().blocks().iter().zip(p2.a().blocks()) {
        r = r.max(max_abs(&(u * a1 - a2 * u)));
    }
    r
}

pub fn observability_and_equivalence(p1: &OutputPair, p2: &OutputPair, tol: &Tolerances) -> EquivalenceReport {
    let o1 = ObservabilityData::compute(p1, tol);
    let o2 = ObservabilityData::compute(p2, tol);
    let same_shape = p1.d() == p2.d() && p1.dim_x() == p2.dim_x() && p1.dim_y() == p2.dim_y();
    if !same_shape {
        return EquivalenceReport {
            observable1: o1.observable,
            observable2: o2.observable,
            equivalent: false,
            intertwining_residual: f64::INFINITY,
            unitarity_residual: f64::INFINITY,
            witness: None,
            gram_witness: None,
        };
    }
    let n = p1.dim_x();
    let y = p1.dim_y();
    let eye = identity(n);
    // vec(M U N) = (N^T kron M) vec(U), column-major
    let mut rows = vec![eye.kronecker(p2.c())];
    let mut rhs = vec![ComplexMatrix::from_column_slice(n * y, 1, p1.c().as_slice())];
    for (a1, a2) in p1.a().blocks().iter().zip(p2.a().blocks()) {
        rows.push(a1.transpose().kronecker(&eye) - eye.kronecker(a2));
        rhs.push(zeros(n * n, 1));
    }
    let m = vstack(&rows.iter().collect::<Vec<_>>());
    let b = vstack(&rhs.iter().collect::<Vec<_>>());
    let u_vec = pseudo_inverse(&m, tol) * b;
    let u = ComplexMatrix::from_column_slice(n, n, u_vec.as_slice());
    let inter = intertwining_residual(p1, p2, &u);
    let unit = max_abs(&(u.adjoint() * &u - identity(n)));
    let equivalent = inter <= tol.eq_tol && unit <= tol.eq_tol;

    let gram_witness = (o1.observable && o2.observable).then(|| {
        let degree = o1.degree.max(o2.degree);
        let s1 = ObservabilityData::with_degree(p1, tol, degree).stacked();
        let s2 = ObservabilityData::with_degree(p2, tol, degree).stacked();
        let w = pseudo_inverse(&s2, tol) * &s1;
        let fit_residual = max_abs(&(&s2 * &w - &s1));
        let unitarity_residual = max_abs(&(w.adjoint() * &w - identity(n)));
        GramWitness {
            fit_residual,
            unitarity_residual,
            intertwining_residual: intertwining_residual(p1, p2, &w),
            kernels_equal: fit_residual <= tol.eq_tol && unitarity_residual <= tol.eq_tol,
        }
    });

    EquivalenceReport {
        observable1: o1.observable,
        observable2: o2.observable,
        equivalent,
        intertwining_residual: inter,
        unitarity_residual: unit,
        witness: equivalent.then_some(u),
        gram_witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::OperatorTuple;
    use crate::realization::example33;
    use crate::sampling::{random_contractive_pair, stream_rng};

    #[test]
    fn example_pair_is_observable() {
        let o = ObservabilityData::compute(&example33::pair_real(0.0), &Tolerances::default());
        assert!(o.observable);
        assert!(o.stabilized);
    }

    #[test]
    fn zero_output_is_unobservable() {
        let mut rng = stream_rng(1, 0);
        let p = random_contractive_pair(&mut rng, 2, 3, 1, 0.8);
        let p0 = OutputPair::new(zeros(1, 3), p.a().clone()).unwrap();
        let o = ObservabilityData::compute(&p0, &Tolerances::default());
        assert!(!o.observable);
        assert_eq!(o.kernel.ncols(), 3);
    }

    #[test]
    fn unitary_conjugate_is_equivalent() {
        let tol = Tolerances::default();
        let mut rng = stream_rng(8, 0);
        let p = random_contractive_pair(&mut rng, 2, 3, 2, 0.9);
        let u = crate::numerics::svd_sorted(&crate::sampling::random_matrix(&mut rng, 3, 3)).0;
        // p2 = (C U^*, U A U^*) so that U intertwines p -> p2
        let blocks = p.a().blocks().iter().map(|a| &u * a * u.adjoint()).collect();
        let p2 = OutputPair::new(p.c() * u.adjoint(), OperatorTuple::new(blocks).unwrap()).unwrap();
        let r = observability_and_equivalence(&p, &p2, &tol);
        assert!(r.equivalent, "{r:?}");
        assert!(max_abs(&(r.witness.unwrap() - &u)) < 1e-9);
        let g = r.gram_witness.unwrap();
        assert!(g.kernels_equal);
    }

    #[test]
    fn gamma_family_shares_kernel_but_not_equivalence() {
        let tol = Tolerances::default();
        let r = observability_and_equivalence(&example33::pair_real(0.0), &example33::pair_real(0.2), &tol);
        assert!(r.observable1 && r.observable2);
        assert!(!r.equivalent);
        let g = r.gram_witness.unwrap();
        assert!(g.kernels_equal, "{g:?}");
        assert!(g.intertwining_residual > 1e-3);
    }

    #[test]
    fn gleason_reports() {
        let cfg = SampleConfig::default();
        let r = gleason_check(&GleasonInput::Pair(example33::pair_real(0.0)), &cfg).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.get("gleason_identity").unwrap().residual.unwrap() <= 1e-12);
        let r = gleason_check(&GleasonInput::Pair(example33::pair_real(0.5)), &cfg).unwrap();
        assert_eq!(r.get("gleason_norm_inequality").unwrap().status, Status::Fail);
        let r = gleason_check(&GleasonInput::Colligation(example33::colligation()), &cfg).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}
