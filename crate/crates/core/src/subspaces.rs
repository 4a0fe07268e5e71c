//! The domain subspace `D` of an output pair, the isometry `V` defined on
//! `D (+) Y`, and the null space of a multiplier.
//!
//! For a contractive pair `(C, A)` the domain subspace is
//!
//! ```text
//! D = span { Z(z)^* (I - A^* Z(z)^*)^{-1} C^* y : z in the ball, y in Y }  in X^d.
//! ```
//!
//! It is computed twice: from Taylor coefficients of the generator (the
//! primary answer) and from generators sampled at seeded points (the
//! cross-check). The two ranks must agree.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::colligation::{require_contractive_pair, BallPoint, OutputPair};
use crate::error::{Error, Result};
use crate::kernels::{lower, multi_indices, resolvent_coefficients, SchurEvaluator};
use crate::numerics::{
    complement_basis, hstack, identity, max_abs, orthonormal_basis, pseudo_inverse, rank, svd_sorted,
    vstack, zeros, BasisMode, ComplexMatrix, Tolerances,
};
use crate::sampling::{SampleConfig, Stream};

/// Orthonormal basis of a subspace together with one of its orthogonal
/// complement.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub basis: ComplexMatrix,
    pub complement: ComplexMatrix,
}

impl SubspaceBasis {
    /// Wrap orthonormal columns and compute the complement.
    pub fn from_orthonormal(basis: ComplexMatrix) -> Self {
        let ambient_dim = basis.nrows();
        let complement = complement_basis(&basis, ambient_dim);
        SubspaceBasis {
            ambient_dim,
            basis,
            complement,
        }
    }

    pub fn full(n: usize) -> Self {
        SubspaceBasis {
            ambient_dim: n,
            basis: identity(n),
            complement: zeros(n, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn complement_dim(&self) -> usize {
        self.complement.ncols()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// `max |basis^* complement|`.
    pub fn orthogonality_residual(&self) -> f64 {
        max_abs(&(self.basis.adjoint() * &self.complement))
    }
}

/// Accumulates column blocks while keeping only a square-root factor of the
/// Gram `S S^*`, which has the same singular values as the full stack.
pub(crate) struct ColumnSpan {
    pub(crate) factor: ComplexMatrix,
}

impl ColumnSpan {
    pub(crate) fn new(rows: usize) -> Self {
        ColumnSpan {
            factor: zeros(rows, 0),
        }
    }

    pub(crate) fn push(&mut self, block: &ComplexMatrix) {
        if block.ncols() == 0 {
            return;
        }
        let joined = hstack(&[&self.factor, block]);
        let (u, sigma, _) = svd_sorted(&joined);
        let mut f = u;
        for (k, s) in sigma.iter().enumerate() {
            for x in f.column_mut(k).iter_mut() {
                *x *= s;
            }
        }
        self.factor = f;
    }

    pub(crate) fn rank(&self, tol: &Tolerances) -> usize {
        rank(&self.factor, tol)
    }
}

/// The domain subspace with the evidence behind it.
#[derive(Debug, Clone)]
pub struct DomainSubspace {
    pub subspace: SubspaceBasis,
    pub taylor_rank: usize,
    pub sampled_rank: usize,
    /// Highest total degree of Taylor coefficients used.
    pub degree_reached: usize,
    pub degree_cap: usize,
    /// True when the span stopped growing for two consecutive degrees (or
    /// filled the ambient space) before the cap.
    pub stabilized: bool,
    pub sample_points: usize,
}

/// Taylor coefficients `c_beta` of `(I - A^* Z(z)^*)^{-1} C^*` in the
/// conjugate variables: `c_0 = C^*`, `c_beta = sum_j A_j^* c_{beta - e_j}`.
pub fn adjoint_coefficients(p: &OutputPair, max_degree: usize) -> HashMap<Vec<usize>, ComplexMatrix> {
    let d = p.d();
    let mut c = HashMap::new();
    c.insert(vec![0; d], p.c().adjoint());
    let adj: Vec<ComplexMatrix> = p.a().blocks().iter().map(|a| a.adjoint()).collect();
    for k in 1..=max_degree {
        for beta in multi_indices(d, k) {
            let mut m = zeros(p.dim_x(), p.dim_y());
            for (j, aj) in adj.iter().enumerate() {
                if let Some(prev) = lower(&beta, j) {
                    m += aj * &c[&prev];
                }
            }
            c.insert(beta, m);
        }
    }
    c
}

/// Generator coefficient `v_alpha` in `X^d` whose `j`-th block is
/// `c_{alpha - e_j}` (zero when `alpha_j = 0`).
fn generator_coefficient(p: &OutputPair, coeffs: &HashMap<Vec<usize>, ComplexMatrix>, alpha: &[usize]) -> ComplexMatrix {
    let n = p.dim_x();
    let mut v = zeros(p.d() * n, p.dim_y());
    for j in 0..p.d() {
        if let Some(beta) = lower(alpha, j) {
            v.view_mut((j * n, 0), (n, p.dim_y())).copy_from(&coeffs[&beta]);
        }
    }
    v
}

/// Number of sample points used for generator-based cross-checks: at least
/// the configured count and enough to span the ambient space.
pub fn generator_sample_count(cfg: &SampleConfig, ambient: usize, block: usize) -> usize {
    let needed = if block == 0 { 1 } else { ambient.div_ceil(block) + 1 };
    cfg.sample_count.max(needed)
}

fn generator_points(p: &OutputPair, cfg: &SampleConfig) -> Vec<BallPoint> {
    let count = generator_sample_count(cfg, p.d() * p.dim_x(), p.dim_y());
    let mut rng = cfg.rng(Stream::DomainGenerators);
    crate::sampling::sample_points(&mut rng, p.d(), count, cfg.sample_radius)
}

pub fn domain_subspace(p: &OutputPair, cfg: &SampleConfig) -> Result<DomainSubspace> {
    let tol = &cfg.tolerances;
    require_contractive_pair(p, tol)?;
    let d = p.d();
    let n = p.dim_x();
    let ambient = d * n;
    let cap = (2 * d * n).max(2);

    let mut span = ColumnSpan::new(ambient);
    let mut coeffs: HashMap<Vec<usize>, ComplexMatrix> = HashMap::new();
    coeffs.insert(vec![0; d], p.c().adjoint());
    let adj: Vec<ComplexMatrix> = p.a().blocks().iter().map(|a| a.adjoint()).collect();
    let mut ranks = vec![0usize];
    let mut stabilized = false;
    let mut degree_reached = 0;
    for k in 1..=cap {
        // coefficients c_beta with |beta| = k - 1 are already present
        let mut block = Vec::new();
        for alpha in multi_indices(d, k) {
            block.push(generator_coefficient(p, &coeffs, &alpha));
        }
        let refs: Vec<&ComplexMatrix> = block.iter().collect();
        span.push(&hstack(&refs));
        for beta in multi_indices(d, k) {
            let mut m = zeros(n, p.dim_y());
            for (j, aj) in adj.iter().enumerate() {
                if let Some(prev) = lower(&beta, j) {
                    m += aj * &coeffs[&prev];
                }
            }
            coeffs.insert(beta, m);
        }
        degree_reached = k;
        let r = span.rank(tol);
        ranks.push(r);
        let len = ranks.len();
        if r == ambient || (len >= 3 && ranks[len - 1] == ranks[len - 2] && ranks[len - 2] == ranks[len - 3]) {
            stabilized = true;
            break;
        }
    }
    let taylor_rank = *ranks.last().unwrap_or(&0);
    let basis = orthonormal_basis(&span.factor, BasisMode::Range, tol);

    let points = generator_points(p, cfg);
    let gens: Result<Vec<ComplexMatrix>> = points.par_iter().map(|z| p.domain_generator(z)).collect();
    let gens = gens?;
    let refs: Vec<&ComplexMatrix> = gens.iter().collect();
    let sampled_rank = rank(&hstack(&refs), tol);
    if sampled_rank != taylor_rank {
        return Err(Error::RankInstability {
            taylor: taylor_rank,
            sampled: sampled_rank,
        });
    }
    Ok(DomainSubspace {
        subspace: SubspaceBasis::from_orthonormal(basis),
        taylor_rank,
        sampled_rank,
        degree_reached,
        degree_cap: cap,
        stabilized,
        sample_points: points.len(),
    })
}

/// The isometry `V : D (+) Y -> X (+) U`, `V = [A_V B_V; C_V D_V]`, in the
/// orthonormal coordinates of `D`.
#[derive(Debug, Clone)]
pub struct IsometryV {
    pub matrix: ComplexMatrix,
    /// `A^*` restricted to `D`.
    pub a_v: ComplexMatrix,
    /// `C^*`.
    pub b_v: ComplexMatrix,
    /// Fitted from `C_V Z(z)^*(I - A^*Z(z)^*)^{-1}C^* y = (S(z)^* - S(0)^*) y`.
    pub c_v: ComplexMatrix,
    /// `S(0)^*`.
    pub d_v: ComplexMatrix,
    /// Range of `V` inside `X (+) U`.
    pub range: SubspaceBasis,
    pub fit_residual: f64,
    /// `max |V^*V - I|`.
    pub isometry_residual: f64,
    pub isometric: bool,
    pub sample_points: usize,
}

pub fn build_v_and_check(
    s: &SchurEvaluator,
    p: &OutputPair,
    dsub: &SubspaceBasis,
    cfg: &SampleConfig,
) -> Result<IsometryV> {
    let tol = &cfg.tolerances;
    if s.d() != p.d() || s.dim_y() != p.dim_y() {
        return Err(Error::DimensionMismatch(format!(
            "function has d = {}, dimY = {}; pair has d = {}, dimY = {}",
            s.d(),
            s.dim_y(),
            p.d(),
            p.dim_y()
        )));
    }
    if dsub.ambient_dim != p.d() * p.dim_x() {
        return Err(Error::DimensionMismatch("domain subspace lives in the wrong ambient space".into()));
    }
    let qd = &dsub.basis;
    let r = qd.ncols();
    let a_v = p.a().stacked().adjoint() * qd;
    let b_v = p.c().adjoint();
    let d_v = s.at_origin().adjoint();
    let dim_u = s.dim_u();

    let points = generator_points(p, cfg);
    let rows: Result<Vec<(ComplexMatrix, ComplexMatrix, f64)>> = points
        .par_iter()
        .map(|z| {
            let g = p.domain_generator(z)?;
            let coords = qd.adjoint() * &g;
            let outside = max_abs(&(&g - qd * &coords));
            let rhs = s.eval_adjoint(z)? - &d_v;
            Ok((coords, rhs, outside))
        })
        .collect();
    let rows = rows?;
    let coord_refs: Vec<&ComplexMatrix> = rows.iter().map(|r| &r.0).collect();
    let rhs_refs: Vec<&ComplexMatrix> = rows.iter().map(|r| &r.1).collect();
    let x = hstack(&coord_refs);
    let y = hstack(&rhs_refs);
    let outside = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let c_v = if r == 0 { zeros(dim_u, 0) } else { &y * pseudo_inverse(&x, tol) };
    let fit_residual = max_abs(&(&c_v * &x - &y)).max(outside);

    let top = hstack(&[&a_v, &b_v]);
    let bottom = hstack(&[&c_v, &d_v]);
    let matrix = vstack(&[&top, &bottom]);
    let isometry_residual = max_abs(&(matrix.adjoint() * &matrix - identity(matrix.ncols())));
    if fit_residual > tol.eq_tol || isometry_residual > tol.eq_tol {
        return Err(Error::LeastSquaresInconsistent {
            fit_residual,
            isometry_residual,
        });
    }
    let range = SubspaceBasis::from_orthonormal(orthonormal_basis(&matrix, BasisMode::Range, tol));
    Ok(IsometryV {
        matrix,
        a_v,
        b_v,
        c_v,
        d_v,
        range,
        fit_residual,
        isometry_residual,
        isometric: true,
        sample_points: points.len(),
    })
}

/// Null space `{u : S(l) u = 0 for all l}` of the multiplier, from values
/// at seeded points plus Taylor coefficients when `S` comes from a
/// colligation.
pub fn kernel_of_multiplier(s: &SchurEvaluator, cfg: &SampleConfig) -> Result<SubspaceBasis> {
    let tol = &cfg.tolerances;
    let dim_u = s.dim_u();
    let mut span = ColumnSpan::new(dim_u);
    span.push(&s.at_origin().adjoint());
    let points = cfg.points(s.d(), Stream::MultiplierKernel);
    let values: Result<Vec<ComplexMatrix>> = points.par_iter().map(|z| s.eval_adjoint(z)).collect();
    let values = values?;
    let refs: Vec<&ComplexMatrix> = values.iter().collect();
    span.push(&hstack(&refs));
    if let Some(c) = s.colligation() {
        let degree = c.dim_x() + 1;
        if let Some(coeffs) = s.taylor_coefficients(degree) {
            let mut keys: Vec<&Vec<usize>> = coeffs.keys().collect();
            keys.sort();
            let adj: Vec<ComplexMatrix> = keys.iter().map(|k| coeffs[*k].adjoint()).collect();
            let refs: Vec<&ComplexMatrix> = adj.iter().collect();
            span.push(&hstack(&refs));
        }
    }
    // kernel of the stacked S values = complement of the range of S^* stack
    let range = orthonormal_basis(&span.factor, BasisMode::Range, tol);
    let complement = complement_basis(&range, dim_u);
    Ok(SubspaceBasis {
        ambient_dim: dim_u,
        basis: complement,
        complement: range,
    })
}

/// Taylor coefficients of `l -> C (I - Z(l)A)^{-1} Z(l) h` for `h` in `X^d`,
/// i.e. of `sum_j l_j (O_{C,A} h_j)(l)`. Coefficient at `alpha` is
/// `sum_j C H_{alpha - e_j} h_j`.
pub fn row_function_coefficients(p: &OutputPair, h: &ComplexMatrix, max_degree: usize) -> Vec<(Vec<usize>, ComplexMatrix)> {
    let n = p.dim_x();
    let hcoef = resolvent_coefficients(p.a().blocks(), max_degree);
    let mut out = Vec::new();
    for k in 1..=max_degree {
        for alpha in multi_indices(p.d(), k) {
            let mut m = zeros(p.dim_y(), h.ncols());
            for j in 0..p.d() {
                if let Some(beta) = lower(&alpha, j) {
                    m += p.c() * &hcoef[&beta] * h.rows(j * n, n);
                }
            }
            out.push((alpha, m));
        }
    }
    out
}
