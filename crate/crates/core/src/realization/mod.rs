//! End-to-end realization workflows.
//!
//! - [`realize_from_pair_cholesky`]: given only a contractive pair, factor
//!   the defect of `[A; C]` to obtain a coisometric colligation.
//! - [`realize_with_pair`]: given `S` and a pair with `K_S = K_{C,A}`, run
//!   the completion pipeline to obtain a weakly coisometric realization.
//! - [`enumerate_representers`]: all functions `S` with `K_S = K_{C,A}` for
//!   a fixed pair, parametrized by an isometry `G`.
//! - [`observability`]: observability data, Gleason checks and unitary
//!   equivalence of pairs.

pub mod example33;
pub mod observability;

pub use observability::{
    gleason_check, observability_and_equivalence, EquivalenceReport, GleasonInput, ObservabilityData,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colligation::{require_contractive_pair, BallPoint, Colligation, OutputPair};
use crate::completion::{
    build_blocks, parrott_complete, Completion, CompletionBlocks, CompletionParameter, DEFECT_FLOOR,
};
use crate::error::{Error, Result};
use crate::kernels::{gram_certify, KernelSpec, SchurEvaluator};
use crate::numerics::{
    hstack, identity, max_abs, orthonormal_basis, pivoted_cholesky, pseudo_inverse, psd_sqrt_with_floor, vstack,
    zeros, BasisMode, ComplexMatrix,
};
use crate::sampling::{SampleConfig, Stream};
use crate::subspaces::{build_v_and_check, domain_subspace, DomainSubspace, IsometryV};

/// Pivot threshold (relative to the largest diagonal entry) below which the
/// Cholesky factorization of the defect stops.
const CHOLESKY_STOP: f64 = 1e-13;

/// `I - [A; C][A; C]^*` on `X^d (+) Y`.
pub fn pair_row_defect(p: &OutputPair) -> ComplexMatrix {
    let col = vstack(&[&p.a().stacked(), p.c()]);
    identity(col.nrows()) - &col * col.adjoint()
}

/// Smallest input dimension admitting a coisometric colligation with
/// output pair `p`: the rank of `I - [A; C][A; C]^*`.
pub fn minimal_cholesky_dim(p: &OutputPair, cfg: &SampleConfig) -> Result<usize> {
    Ok(psd_sqrt_with_floor(&pair_row_defect(p), &cfg.tolerances, DEFECT_FLOOR)?.1)
}

/// Coisometric colligation `[A B; C D]` with `[B; D]` the diagonally pivoted
/// Cholesky factor of `I - [A; C][A; C]^*`, padded with zero columns to
/// `dim_u`.
pub fn realize_from_pair_cholesky(p: &OutputPair, dim_u: usize, cfg: &SampleConfig) -> Result<Colligation> {
    let tol = &cfg.tolerances;
    require_contractive_pair(p, tol)?;
    let required = minimal_cholesky_dim(p, cfg)?;
    if dim_u < required {
        return Err(Error::DimUTooSmall {
            given: dim_u,
            required,
        });
    }
    let defect = pair_row_defect(p);
    let (factor, _) = pivoted_cholesky(&defect, CHOLESKY_STOP)?;
    let keep = factor.ncols().min(dim_u);
    let mut bd = zeros(defect.nrows(), dim_u);
    bd.columns_mut(0, keep).copy_from(&factor.columns(0, keep));
    let n = p.dim_x();
    let b = (0..p.d()).map(|j| bd.rows(j * n, n).into_owned()).collect();
    let d = bd.rows(p.d() * n, p.dim_y()).into_owned();
    Colligation::from_pair(p.clone(), b, d)
}

/// Everything produced by the completion pipeline.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub colligation: Colligation,
    pub domain: DomainSubspace,
    pub v: IsometryV,
    pub blocks: CompletionBlocks,
    pub completion: Completion,
    /// `max |K_S - K_{C,A}|` on the sample that gated the pipeline.
    pub kernel_gap: f64,
}

/// Check `K_S = K_{C,A}` on the configured sample; `KernelMismatch` if not.
pub fn certify_kernel_equality(s: &SchurEvaluator, p: &OutputPair, cfg: &SampleConfig) -> Result<f64> {
    let points = cfg.points(p.d(), Stream::KernelPoints);
    let cert = gram_certify(
        &KernelSpec::Schur(s.clone()),
        &points,
        &cfg.tolerances,
        Some(&KernelSpec::Pair(p.clone())),
    )?;
    let gap = cert.max_diff.unwrap_or(f64::INFINITY);
    if gap > cfg.tolerances.eq_tol {
        return Err(Error::KernelMismatch { max_diff: gap });
    }
    Ok(gap)
}

/// Weakly coisometric realization `[A B; C S(0)]` of `S` with the prescribed
/// pair; `q` selects the member of the family (default: the central one).
pub fn realize_with_pair(
    s: &SchurEvaluator,
    p: &OutputPair,
    q: Option<&CompletionParameter>,
    cfg: &SampleConfig,
) -> Result<PipelineOutcome> {
    if s.d() != p.d() || s.dim_y() != p.dim_y() {
        return Err(Error::DimensionMismatch(format!(
            "function has d = {}, dimY = {}; pair has d = {}, dimY = {}",
            s.d(),
            s.dim_y(),
            p.d(),
            p.dim_y()
        )));
    }
    require_contractive_pair(p, &cfg.tolerances)?;
    let kernel_gap = certify_kernel_equality(s, p, cfg)?;
    let domain = domain_subspace(p, cfg)?;
    let v = build_v_and_check(s, p, &domain.subspace, cfg)?;
    let blocks = build_blocks(s, p, &v, &domain.subspace, cfg)?;
    let param = match q {
        Some(q) => q.clone(),
        None => CompletionParameter::zero(&blocks),
    };
    let completion = parrott_complete(&blocks, &param)?;
    let colligation = completion
        .colligation
        .clone()
        .expect("pipeline blocks carry an ambient frame");
    Ok(PipelineOutcome {
        colligation,
        domain,
        v,
        blocks,
        completion,
        kernel_gap,
    })
}

/// `max |transfer(l) - S(l)|` over the reproduction sample.
pub fn reproduction_error(c: &Colligation, s: &SchurEvaluator, cfg: &SampleConfig) -> Result<f64> {
    let points = cfg.points(c.d(), Stream::Reproduction);
    let errs: Result<Vec<f64>> = points
        .par_iter()
        .map(|l| Ok(max_abs(&(crate::colligation::transfer_eval(c, l)? - s.eval(l)?))))
        .collect();
    Ok(errs?.into_iter().fold(0.0, f64::max))
}

/// Data behind a representer `S(l) = [C R(l) Z(l)|D, I] (I - T^*T)^{1/2} G^*`.
#[derive(Debug, Clone)]
pub struct RepresenterData {
    /// `T = [A^*|D, C^*]`.
    pub t: ComplexMatrix,
    /// `(I - T^*T)^{1/2}`.
    pub defect: ComplexMatrix,
    pub minimal_dim_u: usize,
    /// Isometry from the range of the defect (in orthonormal coordinates)
    /// into the input space.
    pub g: ComplexMatrix,
    /// `G (I - T^*T)^{1/2}` as a map `D (+) Y -> U`.
    pub t_tilde: ComplexMatrix,
    pub domain: DomainSubspace,
}

#[derive(Debug, Clone)]
pub struct Representer {
    pub data: RepresenterData,
    pub function: SchurEvaluator,
    /// `max |S(z)^* - T~ [Qd^* Z(z)^* R(z)^* C^*; I]|` at sampled points:
    /// the direct form against the adjoint generator form.
    pub adjoint_form_gap: f64,
    /// `max |K_S - K_{C,A}|` on the kernel sample.
    pub kernel_gap: f64,
}

/// Minimal input dimension for representers of `p`.
pub fn representer_defect(p: &OutputPair, cfg: &SampleConfig) -> Result<(ComplexMatrix, ComplexMatrix, usize, DomainSubspace)> {
    let domain = domain_subspace(p, cfg)?;
    let qd = &domain.subspace.basis;
    let t = hstack(&[&(p.a().stacked().adjoint() * qd), &p.c().adjoint()]);
    let (defect, rank) = psd_sqrt_with_floor(&(identity(t.ncols()) - t.adjoint() * &t), &cfg.tolerances, DEFECT_FLOOR)?;
    Ok((t, defect, rank, domain))
}

pub fn enumerate_representers(
    p: &OutputPair,
    dim_u: usize,
    g: Option<&ComplexMatrix>,
    cfg: &SampleConfig,
) -> Result<Representer> {
    let tol = &cfg.tolerances;
    require_contractive_pair(p, tol)?;
    let (t, defect, minimal_dim_u, domain) = representer_defect(p, cfg)?;
    if dim_u < minimal_dim_u {
        return Err(Error::DimUTooSmall {
            given: dim_u,
            required: minimal_dim_u,
        });
    }
    let g = match g {
        Some(g) => {
            if g.shape() != (dim_u, minimal_dim_u) {
                return Err(Error::ParameterShapeMismatch {
                    got: g.shape(),
                    expected: (dim_u, minimal_dim_u),
                });
            }
            let gap = max_abs(&(g.adjoint() * g - identity(minimal_dim_u)));
            if gap > tol.eq_tol {
                return Err(Error::InvalidConfig(format!(
                    "G must be an isometry (residual {gap:.3e})"
                )));
            }
            g.clone()
        }
        None => ComplexMatrix::identity(dim_u, minimal_dim_u),
    };
    let range = orthonormal_basis(&defect, BasisMode::Range, tol);
    let t_tilde = &g * range.adjoint() * &defect;

    let qd = domain.subspace.basis.clone();
    let pair = p.clone();
    let tt_adj = t_tilde.adjoint();
    let function = SchurEvaluator::from_fn(p.d(), "representer", move |l: &BallPoint| {
        let row = pair.resolvent_row(l)? * l.row_symbol(pair.dim_x()) * &qd;
        let phi = hstack(&[&row, &identity(pair.dim_y())]);
        Ok(phi * &tt_adj)
    })?;

    let points = cfg.points(p.d(), Stream::Reproduction);
    let qd = &domain.subspace.basis;
    let gaps: Result<Vec<f64>> = points
        .par_iter()
        .map(|z| {
            let gen = vstack(&[&(qd.adjoint() * p.domain_generator(z)?), &identity(p.dim_y())]);
            Ok(max_abs(&(function.eval(z)?.adjoint() - &t_tilde * gen)))
        })
        .collect();
    let adjoint_form_gap = gaps?.into_iter().fold(0.0, f64::max);
    let kernel_points = cfg.points(p.d(), Stream::KernelPoints);
    let cert = gram_certify(
        &KernelSpec::Schur(function.clone()),
        &kernel_points,
        tol,
        Some(&KernelSpec::Pair(p.clone())),
    )?;
    Ok(Representer {
        data: RepresenterData {
            t,
            defect,
            minimal_dim_u,
            g,
            t_tilde,
            domain,
        },
        function,
        adjoint_form_gap,
        kernel_gap: cert.max_diff.unwrap_or(f64::INFINITY),
    })
}

/// A constant right factor `W` with `S2(l) = S1(l) W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RightFactorReport {
    pub fit_residual: f64,
    pub unitarity_residual: f64,
    pub related: bool,
}

/// Solve `S2 = S1 W` by least squares over sampled values and test
/// whether `W` is unitary.
pub fn relate_by_right_unitary(
    s1: &SchurEvaluator,
    s2: &SchurEvaluator,
    cfg: &SampleConfig,
) -> Result<(ComplexMatrix, RightFactorReport)> {
    if s1.dim_u() != s2.dim_u() || s1.dim_y() != s2.dim_y() || s1.d() != s2.d() {
        return Err(Error::DimensionMismatch("functions differ in shape".into()));
    }
    let mut points = vec![BallPoint::origin(s1.d())];
    points.extend(cfg.points(s1.d(), Stream::TestVectors));
    let vals: Result<Vec<(ComplexMatrix, ComplexMatrix)>> =
        points.par_iter().map(|l| Ok((s1.eval(l)?, s2.eval(l)?))).collect();
    let vals = vals?;
    let a = vstack(&vals.iter().map(|v| &v.0).collect::<Vec<_>>());
    let b = vstack(&vals.iter().map(|v| &v.1).collect::<Vec<_>>());
    let w = pseudo_inverse(&a, &cfg.tolerances) * &b;
    let fit_residual = max_abs(&(&a * &w - &b));
    let unitarity_residual = max_abs(&(w.adjoint() * &w - identity(w.ncols())))
        .max(max_abs(&(&w * w.adjoint() - identity(w.nrows()))));
    let related = fit_residual <= cfg.tolerances.eq_tol && unitarity_residual <= cfg.tolerances.eq_tol;
    Ok((
        w,
        RightFactorReport {
            fit_residual,
            unitarity_residual,
            related,
        },
    ))
}
