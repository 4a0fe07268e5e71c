//! Contractive completion of the adjoint colligation.
//!
//! With `X^d = D_perp (+) D`, the adjoint of a realization `[A B; C S(0)]`
//! consistent with a pair `(C, A)` has the block form
//!
//! ```text
//! U^* = [ T11  T12 ]   D_perp (+) (D (+) Y)  ->  X (+) U
//!       [ X    T22 ]
//! ```
//!
//! where `T11 = A^*|D_perp`, `T12 = [A^*|D, C^*]`, `T22 = [C_V, S(0)^*]` are
//! fixed and only `X : D_perp -> U` is free. Every contractive choice is
//!
//! ```text
//! X = -G2 T12^* G1^* + Q (I - G1 G1^*)^{1/2}
//! ```
//!
//! with `G1 (I - T12 T12^*)^{1/2} = T11^*`, `G2` the polar factor of `T22`
//! and `Q` a contraction from the range of `(I - G1 G1^*)^{1/2}` into the
//! null space of the multiplier. `B` is then read off as `B^* = [X, C_V]`
//! in the `(D_perp, D)` coordinates.

use serde::{Deserialize, Serialize};

use crate::colligation::{classify_pair, transfer_eval, Colligation, OutputPair};
use crate::error::{Error, Result};
use crate::kernels::SchurEvaluator;
use crate::numerics::{
    complement_basis, hstack, identity, max_abs, operator_norm, orthonormal_basis, polar_partial_isometry,
    pseudo_inverse, psd_sqrt_with_floor, rank, vstack, zeros, BasisMode, ComplexMatrix, Tolerances,
};
use crate::sampling::{SampleConfig, Stream};
use crate::subspaces::{kernel_of_multiplier, IsometryV, SubspaceBasis};

/// Eigenvalues of unit-scale defect operators at or below this level are
/// cancellation noise.
pub const DEFECT_FLOOR: f64 = 1e-12;

/// Data tying the abstract blocks back to a concrete state space.
#[derive(Debug, Clone)]
pub struct AmbientFrame {
    pub pair: OutputPair,
    pub domain: SubspaceBasis,
    pub c_v: ComplexMatrix,
    pub s0: ComplexMatrix,
}

/// Fixed blocks of the completion problem and the factors derived from them.
#[derive(Debug, Clone)]
pub struct CompletionBlocks {
    pub t11: ComplexMatrix,
    pub t12: ComplexMatrix,
    pub t22: ComplexMatrix,
    pub g1: ComplexMatrix,
    pub g2: ComplexMatrix,
    /// `(I - G1 G1^*)^{1/2}` on `D_perp`.
    pub defect1: ComplexMatrix,
    /// Orthonormal basis of the range of `defect1`.
    pub defect1_range: ComplexMatrix,
    /// Null space of the multiplier, computed as `Ker T22^*`.
    pub u0: SubspaceBasis,
    /// `max |G1 (I - T12 T12^*)^{1/2} - T11^*|`.
    pub g1_residual: f64,
    /// `max |G2 (I - T12^* T12)^{1/2} - T22|`.
    pub g2_residual: f64,
    /// `max |[T12; T22]^* [T12; T22] - I|`.
    pub column_isometry_residual: f64,
    /// `|| [T11 T12] ||`.
    pub row_norm: f64,
    pub frame: Option<AmbientFrame>,
}

impl CompletionBlocks {
    /// Blocks given directly, without a state-space frame.
    pub fn from_raw(t11: ComplexMatrix, t12: ComplexMatrix, t22: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if t11.nrows() != t12.nrows() || t12.ncols() != t22.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "T11 {:?}, T12 {:?}, T22 {:?} do not form a 2x2 block operator",
                t11.shape(),
                t12.shape(),
                t22.shape()
            )));
        }
        let n = t12.nrows();
        let m = t11.ncols();

        let row_norm = operator_norm(&hstack(&[&t11, &t12]));
        let column = vstack(&[&t12, &t22]);
        let column_isometry_residual = max_abs(&(column.adjoint() * &column - identity(column.ncols())));
        if row_norm > 1.0 + tol.eq_tol {
            return Err(Error::NecessaryConditionsFail(format!("[T11 T12] has norm {row_norm:.6}")));
        }
        if column_isometry_residual > tol.eq_tol {
            return Err(Error::NecessaryConditionsFail(format!(
                "[T12; T22] is not isometric (residual {column_isometry_residual:.3e})"
            )));
        }

        let delta12 = defect_root(&(identity(n) - &t12 * t12.adjoint()), tol)?;
        let g1 = t11.adjoint() * pseudo_inverse(&delta12, tol);
        let g1_residual = max_abs(&(&g1 * &delta12 - t11.adjoint()));
        if g1_residual > tol.eq_tol {
            return Err(Error::NecessaryConditionsFail(format!(
                "T11^* is not in the range of (I - T12 T12^*)^(1/2) (residual {g1_residual:.3e})"
            )));
        }
        let ker_t11 = orthonormal_basis(&t11, BasisMode::Kernel, tol);
        let ker_g1_star = orthonormal_basis(&g1.adjoint(), BasisMode::Kernel, tol);
        if ker_t11.ncols() != ker_g1_star.ncols() || max_abs(&(g1.adjoint() * &ker_t11)) > tol.eq_tol {
            return Err(Error::NecessaryConditionsFail("Ker G1^* differs from Ker T11".into()));
        }
        let g1_norm = operator_norm(&g1);
        if g1_norm > 1.0 + tol.eq_tol {
            return Err(Error::NecessaryConditionsFail(format!("G1 has norm {g1_norm:.6}")));
        }

        let defect1 = defect_root(&(identity(m) - &g1 * g1.adjoint()), tol)?;
        let defect1_range = orthonormal_basis(&defect1, BasisMode::Range, tol);

        let polar = polar_partial_isometry(&t22, tol)?;
        let g2 = polar.isometry;
        let delta21 = defect_root(&(identity(t12.ncols()) - t12.adjoint() * &t12), tol)?;
        let g2_residual = max_abs(&(&g2 * &delta21 - &t22));
        if g2_residual > tol.eq_tol.sqrt() {
            return Err(Error::NecessaryConditionsFail(format!(
                "T22 differs from G2 (I - T12^* T12)^(1/2) (residual {g2_residual:.3e})"
            )));
        }
        let u0 = SubspaceBasis::from_orthonormal(orthonormal_basis(&t22.adjoint(), BasisMode::Kernel, tol));

        Ok(CompletionBlocks {
            t11,
            t12,
            t22,
            g1,
            g2,
            defect1,
            defect1_range,
            u0,
            g1_residual,
            g2_residual,
            column_isometry_residual,
            row_norm,
            frame: None,
        })
    }

    pub fn dim_complement(&self) -> usize {
        self.t11.ncols()
    }

    pub fn dim_u(&self) -> usize {
        self.t22.nrows()
    }

    /// `dim Ran (I - G1 G1^*)^{1/2}`.
    pub fn defect_rank(&self) -> usize {
        self.defect1_range.ncols()
    }

    pub fn u0_dim(&self) -> usize {
        self.u0.dim()
    }

    /// Shape `(dim U0, dim Ran defect1)` of the parameter `Q` in coordinates.
    pub fn parameter_shape(&self) -> (usize, usize) {
        (self.u0_dim(), self.defect_rank())
    }

    /// Blocks for `S W` where `W : F -> U`; `T22` becomes `W^* T22`.
    pub fn with_input_map(&self, w: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let mut out = CompletionBlocks::from_raw(self.t11.clone(), self.t12.clone(), w.adjoint() * &self.t22, tol)?;
        out.frame = self.frame.as_ref().map(|f| AmbientFrame {
            pair: f.pair.clone(),
            domain: f.domain.clone(),
            c_v: w.adjoint() * &f.c_v,
            s0: &f.s0 * w,
        });
        Ok(out)
    }
}

fn defect_root(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(psd_sqrt_with_floor(m, tol, DEFECT_FLOOR)?.0)
}

/// Assemble the fixed blocks from a pair, its domain subspace and the
/// isometry `V`, and cross-check `Ker T22^*` against the sampled null space
/// of the multiplier.
pub fn build_blocks(
    s: &SchurEvaluator,
    p: &OutputPair,
    v: &IsometryV,
    dsub: &SubspaceBasis,
    cfg: &SampleConfig,
) -> Result<CompletionBlocks> {
    let tol = &cfg.tolerances;
    let a_star = p.a().stacked().adjoint();
    let t11 = &a_star * &dsub.complement;
    let t12 = hstack(&[&v.a_v, &v.b_v]);
    let t22 = hstack(&[&v.c_v, &v.d_v]);
    let mut blocks = CompletionBlocks::from_raw(t11, t12, t22, tol)?;
    let sampled = kernel_of_multiplier(s, cfg)?;
    let gap = if sampled.dim() == blocks.u0.dim() {
        operator_norm(&(sampled.projector() - blocks.u0.projector()))
    } else {
        f64::INFINITY
    };
    if gap > tol.eq_tol.sqrt() {
        return Err(Error::NecessaryConditionsFail(format!(
            "Ker T22^* (dim {}) differs from the sampled null space of S (dim {})",
            blocks.u0.dim(),
            sampled.dim()
        )));
    }
    blocks.frame = Some(AmbientFrame {
        pair: p.clone(),
        domain: dsub.clone(),
        c_v: v.c_v.clone(),
        s0: s.at_origin().clone(),
    });
    Ok(blocks)
}

/// The free parameter `Q`, in coordinates: a `dim U0 x dim Ran defect1`
/// matrix acting from the orthonormal basis of `Ran (I - G1 G1^*)^{1/2}` to
/// that of the null space of the multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionParameter {
    pub q: ComplexMatrix,
    pub isometric: bool,
    pub unitary: bool,
}

impl CompletionParameter {
    pub fn new(q: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        crate::numerics::ensure_finite(&q, "Q")?;
        let norm = operator_norm(&q);
        if norm > 1.0 + tol.eq_tol {
            return Err(Error::ParameterNotContractive { norm });
        }
        let isometric = max_abs(&(q.adjoint() * &q - identity(q.ncols()))) <= tol.eq_tol;
        let coisometric = max_abs(&(&q * q.adjoint() - identity(q.nrows()))) <= tol.eq_tol;
        Ok(CompletionParameter {
            q,
            isometric,
            unitary: isometric && coisometric,
        })
    }

    /// The central choice `Q = 0`.
    pub fn zero(blocks: &CompletionBlocks) -> Self {
        let (r, c) = blocks.parameter_shape();
        CompletionParameter {
            q: zeros(r, c),
            isometric: c == 0,
            unitary: r == 0 && c == 0,
        }
    }

    /// `[I; 0]` or `[I 0]`: an isometry when `rows >= cols`.
    pub fn embedding(blocks: &CompletionBlocks) -> Self {
        let (r, c) = blocks.parameter_shape();
        let q = ComplexMatrix::identity(r, c);
        CompletionParameter {
            isometric: r >= c,
            unitary: r == c,
            q,
        }
    }
}

/// One member of the completion family.
#[derive(Debug, Clone)]
pub struct Completion {
    pub x: ComplexMatrix,
    pub u_star: ComplexMatrix,
    /// `B_1, ..., B_d` in ambient coordinates, when the blocks carry a frame.
    pub b: Option<Vec<ComplexMatrix>>,
    pub colligation: Option<Colligation>,
    pub norm: f64,
    /// `max |(U^* E)^*(U^* E) - I|` with `E` the inclusion of `D (+) Y`.
    pub weak_isometry_residual: f64,
    /// `max |U U^* - I|`.
    pub coisometry_residual: f64,
    /// `max(|U U^* - I|, |U^* U - I|)`.
    pub unitary_residual: f64,
    /// `max |G2^* Q (I - G1 G1^*)^{1/2}|`.
    pub orthogonality_residual: f64,
}

pub fn parrott_complete(blocks: &CompletionBlocks, q: &CompletionParameter) -> Result<Completion> {
    let expected = blocks.parameter_shape();
    if q.q.shape() != expected {
        return Err(Error::ParameterShapeMismatch {
            got: q.q.shape(),
            expected,
        });
    }
    let q_op = &blocks.u0.basis * &q.q * blocks.defect1_range.adjoint();
    let x = -(&blocks.g2 * blocks.t12.adjoint() * blocks.g1.adjoint()) + &q_op * &blocks.defect1;
    let orthogonality_residual = max_abs(&(blocks.g2.adjoint() * &q_op * &blocks.defect1));

    let top = hstack(&[&blocks.t11, &blocks.t12]);
    let bottom = hstack(&[&x, &blocks.t22]);
    let u_star = vstack(&[&top, &bottom]);
    let norm = operator_norm(&u_star);
    let m = blocks.dim_complement();
    let tail = u_star.columns(m, u_star.ncols() - m).into_owned();
    let weak_isometry_residual = max_abs(&(tail.adjoint() * &tail - identity(tail.ncols())));
    let coisometry_residual = max_abs(&(u_star.adjoint() * &u_star - identity(u_star.ncols())));
    let isometry_residual = max_abs(&(&u_star * u_star.adjoint() - identity(u_star.nrows())));

    let (b, colligation) = match &blocks.frame {
        None => (None, None),
        Some(f) => {
            let b_amb = &f.domain.complement * x.adjoint() + &f.domain.basis * f.c_v.adjoint();
            let n = f.pair.dim_x();
            let parts: Vec<ComplexMatrix> = (0..f.pair.d()).map(|j| b_amb.rows(j * n, n).into_owned()).collect();
            let c = Colligation::from_pair(f.pair.clone(), parts.clone(), f.s0.clone())?;
            (Some(parts), Some(c))
        }
    };
    Ok(Completion {
        x,
        u_star,
        b,
        colligation,
        norm,
        weak_isometry_residual,
        coisometry_residual,
        unitary_residual: coisometry_residual.max(isometry_residual),
        orthogonality_residual,
    })
}

/// Coisometric (and, when possible, unitary) completion of `S W` for the
/// partial isometry `W` that keeps `(U0)^perp` and adds a copy of
/// `Ran (I - G1 G1^*)^{1/2}` as extra null directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestrictedInputCheck {
    pub input_dim: usize,
    pub partial_isometry_residual: f64,
    pub coisometry_residual: f64,
    pub unitary_residual: Option<f64>,
    /// `max |S_W(l) - S(l) W|` at sampled points, with `S` taken from the
    /// central completion.
    pub reproduction_error: Option<f64>,
    pub passed: bool,
}

/// Classification of the whole completion family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyReport {
    pub dim_domain_complement: usize,
    pub defect_rank: usize,
    pub multiplier_kernel_dim: usize,
    pub isometric_pair: bool,
    /// `dim (Ker A^* intersected with D_perp)`.
    pub kernel_a_star_dim: usize,
    pub coisometric_achievable: bool,
    pub unitary_achievable: bool,
    pub unique: bool,
    /// Shape of `Q` in coordinates.
    pub parameter_rows: usize,
    pub parameter_cols: usize,
    /// Real dimension of the parameter space (a ball in `C^{rows x cols}`).
    pub parameter_real_dim: usize,
    pub restricted_input: RestrictedInputCheck,
}

pub fn classify_family(
    blocks: &CompletionBlocks,
    p: &OutputPair,
    dsub: &SubspaceBasis,
    cfg: &SampleConfig,
) -> Result<FamilyReport> {
    let tol = &cfg.tolerances;
    let rho = blocks.defect_rank();
    let k = blocks.u0_dim();
    let isometric_pair = classify_pair(p, tol).isometric_pair;
    let a_star_perp = p.a().stacked().adjoint() * &dsub.complement;
    let kernel_a_star_dim = dsub.complement_dim() - rank(&a_star_perp, tol);
    let coisometric_achievable = rho <= k;
    let unitary_achievable = isometric_pair && kernel_a_star_dim == k;
    let restricted_input = restricted_input_check(blocks, isometric_pair, cfg)?;
    Ok(FamilyReport {
        dim_domain_complement: blocks.dim_complement(),
        defect_rank: rho,
        multiplier_kernel_dim: k,
        isometric_pair,
        kernel_a_star_dim,
        coisometric_achievable,
        unitary_achievable,
        unique: rho == 0 || k == 0,
        parameter_rows: k,
        parameter_cols: rho,
        parameter_real_dim: 2 * k * rho,
        restricted_input,
    })
}

fn restricted_input_check(blocks: &CompletionBlocks, isometric_pair: bool, cfg: &SampleConfig) -> Result<RestrictedInputCheck> {
    let tol = &cfg.tolerances;
    let rho = blocks.defect_rank();
    let keep = complement_basis(&blocks.u0.basis, blocks.dim_u());
    let w = hstack(&[&keep, &zeros(blocks.dim_u(), rho)]);
    let wstar_w = w.adjoint() * &w;
    let partial_isometry_residual = max_abs(&(&w * &wstar_w - &w));
    let restricted = blocks.with_input_map(&w, tol)?;
    let completion = parrott_complete(&restricted, &CompletionParameter::embedding(&restricted))?;
    let unitary_residual = isometric_pair.then_some(completion.unitary_residual);
    let reproduction_error = match (&completion.colligation, &blocks.frame) {
        (Some(cw), Some(_)) => {
            let central = parrott_complete(blocks, &CompletionParameter::zero(blocks))?;
            let c0 = central.colligation.expect("framed blocks yield a colligation");
            let mut rng = cfg.rng(Stream::Parameters);
            let points = crate::sampling::sample_points(&mut rng, c0.d(), 10, cfg.sample_radius);
            let mut err: f64 = 0.0;
            for l in &points {
                let lhs = transfer_eval(cw, l)?;
                let rhs = transfer_eval(&c0, l)? * &w;
                err = err.max(max_abs(&(lhs - rhs)));
            }
            Some(err)
        }
        _ => None,
    };
    let passed = partial_isometry_residual <= tol.eq_tol
        && completion.coisometry_residual <= tol.eq_tol
        && unitary_residual.is_none_or(|r| r <= tol.eq_tol)
        && reproduction_error.is_none_or(|e| e <= tol.eq_tol);
    Ok(RestrictedInputCheck {
        input_dim: w.ncols(),
        partial_isometry_residual,
        coisometry_residual: completion.coisometry_residual,
        unitary_residual,
        reproduction_error,
        passed,
    })
}
