//! Reproducing kernels on the ball and sampled certificates about them.
//!
//! Three kernels appear throughout:
//!
//! ```text
//! Szego            k(l, z)      = 1 / (1 - <l, z>)
//! de Branges-Rovnyak K_S(l, z)  = (I - S(l) S(z)^*) / (1 - <l, z>)
//! output pair      K_{C,A}(l,z) = C (I - Z(l)A)^{-1} (I - A^* Z(z)^*)^{-1} C^*
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colligation::{
    classify_colligation, transfer_eval, transfer_eval_adjoint, BallPoint, Colligation, OutputPair,
};
use crate::error::{Error, Result};
use crate::numerics::{hstack, identity, max_abs, min_eigenvalue, vstack, zeros, ComplexMatrix, Tolerances};

type SchurFn = dyn Fn(&BallPoint) -> Result<ComplexMatrix> + Send + Sync;

#[derive(Clone)]
enum Source {
    Colligation(Arc<Colligation>),
    Function { label: String, f: Arc<SchurFn> },
}

/// A source of values `S(l)` of a (putative) Schur-class function, with
/// `S(0)` cached.
#[derive(Clone)]
pub struct SchurEvaluator {
    source: Source,
    d: usize,
    at_origin: ComplexMatrix,
}

impl fmt::Debug for SchurEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchurEvaluator")
            .field("source", &self.label())
            .field("d", &self.d)
            .field("dim_y", &self.dim_y())
            .field("dim_u", &self.dim_u())
            .finish()
    }
}

impl SchurEvaluator {
    pub fn from_colligation(c: Colligation) -> Self {
        let at_origin = c.d_block().clone();
        SchurEvaluator {
            d: c.d(),
            source: Source::Colligation(Arc::new(c)),
            at_origin,
        }
    }

    /// Wrap a closure; it is evaluated once at the origin to fix `S(0)`
    /// and the output/input dimensions.
    pub fn from_fn<F>(d: usize, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&BallPoint) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        let at_origin = f(&BallPoint::origin(d))?;
        Ok(SchurEvaluator {
            source: Source::Function {
                label: label.into(),
                f: Arc::new(f),
            },
            d,
            at_origin,
        })
    }

    pub fn label(&self) -> String {
        match &self.source {
            Source::Colligation(_) => "colligation".to_string(),
            Source::Function { label, .. } => label.clone(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim_y(&self) -> usize {
        self.at_origin.nrows()
    }

    pub fn dim_u(&self) -> usize {
        self.at_origin.ncols()
    }

    pub fn at_origin(&self) -> &ComplexMatrix {
        &self.at_origin
    }

    pub fn colligation(&self) -> Option<&Colligation> {
        match &self.source {
            Source::Colligation(c) => Some(c),
            Source::Function { .. } => None,
        }
    }

    pub fn eval(&self, l: &BallPoint) -> Result<ComplexMatrix> {
        if l.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, function has d = {}",
                l.d(),
                self.d
            )));
        }
        if l.is_origin() {
            return Ok(self.at_origin.clone());
        }
        let s = match &self.source {
            Source::Colligation(c) => transfer_eval(c, l)?,
            Source::Function { f, .. } => f(l)?,
        };
        if s.shape() != self.at_origin.shape() {
            return Err(Error::DimensionMismatch(format!(
                "S changed shape from {:?} to {:?}",
                self.at_origin.shape(),
                s.shape()
            )));
        }
        Ok(s)
    }

    /// `S(z)^*`; colligations use the adjoint-form evaluator.
    pub fn eval_adjoint(&self, z: &BallPoint) -> Result<ComplexMatrix> {
        match &self.source {
            Source::Colligation(c) => transfer_eval_adjoint(c, z),
            Source::Function { .. } => Ok(self.eval(z)?.adjoint()),
        }
    }

    /// Taylor coefficients `S_alpha` for `|alpha| <= max_degree`, available
    /// only when the function comes from a colligation.
    pub fn taylor_coefficients(&self, max_degree: usize) -> Option<HashMap<Vec<usize>, ComplexMatrix>> {
        let c = self.colligation()?;
        let resolvent = resolvent_coefficients(c.a().blocks(), max_degree);
        let mut out = HashMap::new();
        out.insert(vec![0; self.d], c.d_block().clone());
        for k in 1..=max_degree {
            for alpha in multi_indices(self.d, k) {
                let mut s = zeros(c.dim_y(), c.dim_u());
                for (j, bj) in c.b().iter().enumerate() {
                    if let Some(beta) = lower(&alpha, j) {
                        s += c.c() * &resolvent[&beta] * bj;
                    }
                }
                out.insert(alpha, s);
            }
        }
        Some(out)
    }
}

/// Multi-indices in `Z_+^d` of total degree exactly `k`, in lexicographic
/// order with the first coordinate most significant (descending).
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(d - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(d, k, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// `alpha - e_j` when `alpha_j >= 1`.
pub fn lower(alpha: &[usize], j: usize) -> Option<Vec<usize>> {
    if alpha[j] == 0 {
        return None;
    }
    let mut beta = alpha.to_vec();
    beta[j] -= 1;
    Some(beta)
}

/// Coefficients `H_beta` of `(I - sum_j l_j A_j)^{-1} = sum_beta l^beta H_beta`,
/// from `H_0 = I`, `H_beta = sum_j A_j H_{beta - e_j}`.
pub fn resolvent_coefficients(blocks: &[ComplexMatrix], max_degree: usize) -> HashMap<Vec<usize>, ComplexMatrix> {
    let d = blocks.len();
    let n = blocks.first().map_or(0, |b| b.nrows());
    let mut h = HashMap::new();
    h.insert(vec![0; d], identity(n));
    for k in 1..=max_degree {
        for alpha in multi_indices(d, k) {
            let mut m = zeros(n, n);
            for (j, a) in blocks.iter().enumerate() {
                if let Some(beta) = lower(&alpha, j) {
                    m += a * &h[&beta];
                }
            }
            h.insert(alpha, m);
        }
    }
    h
}

/// Which kernel to evaluate.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    Szego,
    Schur(SchurEvaluator),
    Pair(OutputPair),
}

impl KernelSpec {
    pub fn block_size(&self) -> usize {
        match self {
            KernelSpec::Szego => 1,
            KernelSpec::Schur(s) => s.dim_y(),
            KernelSpec::Pair(p) => p.dim_y(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Szego => "szego",
            KernelSpec::Schur(_) => "schur",
            KernelSpec::Pair(_) => "pair",
        }
    }
}

/// `1 - <l, z>`, rejecting values too close to zero.
pub fn szego_denominator(l: &BallPoint, z: &BallPoint) -> Result<Complex64> {
    if l.d() != z.d() {
        return Err(Error::DimensionMismatch("kernel points differ in d".into()));
    }
    let den = Complex64::new(1.0, 0.0) - l.inner(z);
    if den.norm() <= 1e-14 {
        return Err(Error::SingularDenominator);
    }
    Ok(den)
}

pub fn eval_kernel(k: &KernelSpec, l: &BallPoint, z: &BallPoint) -> Result<ComplexMatrix> {
    match k {
        KernelSpec::Szego => {
            let den = szego_denominator(l, z)?;
            Ok(ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0) / den))
        }
        KernelSpec::Schur(s) => {
            let den = szego_denominator(l, z)?;
            let num = identity(s.dim_y()) - s.eval(l)? * s.eval_adjoint(z)?;
            Ok(num.map(|x| x / den))
        }
        KernelSpec::Pair(p) => p.kernel(l, z),
    }
}

/// Both sides of the defect identity
///
/// ```text
/// K_S(l,z) = K_{C,A}(l,z)
///          + [C R(l) Z(l), I] (I - U U^*) / (1 - <l,z>) [Z(z)^* R(z)^* C^*; I]
/// ```
///
/// with `R(l) = (I - Z(l)A)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectIdentity {
    /// `max |LHS - RHS|`.
    pub residual: f64,
    /// `max |K_S - K_{C,A}|`, the size of the second right-hand term.
    pub kernel_gap: f64,
}

pub fn defect_identity_residual(c: &Colligation, l: &BallPoint, z: &BallPoint, tol: &Tolerances) -> Result<DefectIdentity> {
    let class = classify_colligation(c, tol);
    if !class.contractive {
        return Err(Error::NotContractive { norm: class.norm });
    }
    let den = szego_denominator(l, z)?;
    let n = c.dim_x();
    let y = c.dim_y();
    let lhs = {
        let sl = transfer_eval(c, l)?;
        let sz = transfer_eval(c, z)?;
        (identity(y) - sl * sz.adjoint()).map(|x| x / den)
    };
    let kca = c.pair().kernel(l, z)?;
    let left = hstack(&[&(c.pair().resolvent_row(l)? * l.row_symbol(n)), &identity(y)]);
    let right = vstack(&[&c.pair().domain_generator(z)?, &identity(y)]);
    let u = c.matrix();
    let defect = identity(u.nrows()) - &u * u.adjoint();
    let second = (left * defect * right).map(|x| x / den);
    let rhs = &kca + second;
    Ok(DefectIdentity {
        residual: max_abs(&(lhs.clone() - rhs)),
        kernel_gap: max_abs(&(lhs - kca)),
    })
}

/// Outcome of a sampled Gram positivity / equality certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub psd: bool,
    pub min_eig: f64,
    /// `max |K_1(l_i, l_j) - K_2(l_i, l_j)|` when a second kernel is given.
    pub max_diff: Option<f64>,
    pub points: usize,
}

pub fn check_distinct(points: &[BallPoint]) -> Result<()> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let gap: f64 = points[i]
                .coords()
                .iter()
                .zip(points[j].coords())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            if gap.sqrt() <= 1e-14 {
                return Err(Error::DuplicatePoints { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// All blocks `K(l_i, l_j)` for `i <= j`, evaluated in parallel and returned
/// in row-major upper-triangle order.
fn upper_blocks(k: &KernelSpec, points: &[BallPoint]) -> Result<Vec<ComplexMatrix>> {
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| eval_kernel(k, &points[i], &points[j]))
        .collect()
}

/// Dense block Gram matrix with `(i, j)` block `K(l_i, l_j)`.
pub fn gram_matrix(k: &KernelSpec, points: &[BallPoint]) -> Result<ComplexMatrix> {
    let b = k.block_size();
    let n = points.len();
    let blocks = upper_blocks(k, points)?;
    let mut g = zeros(n * b, n * b);
    let mut it = blocks.into_iter();
    for i in 0..n {
        for j in i..n {
            let blk = it.next().expect("one block per pair");
            g.view_mut((i * b, j * b), (b, b)).copy_from(&blk);
            if i != j {
                g.view_mut((j * b, i * b), (b, b)).copy_from(&blk.adjoint());
            }
        }
    }
    Ok(g)
}

/// Certify positivity of `k1` on the sample and, optionally, its equality
/// with `k2` at every pair of sample points.
pub fn gram_certify(
    k1: &KernelSpec,
    points: &[BallPoint],
    tol: &Tolerances,
    k2: Option<&KernelSpec>,
) -> Result<GramCertificate> {
    if points.is_empty() {
        return Err(Error::InvalidConfig("gram certificate needs at least one point".into()));
    }
    check_distinct(points)?;
    let g = gram_matrix(k1, points)?;
    let min_eig = min_eigenvalue(&g);
    let max_diff = match k2 {
        None => None,
        Some(k2) => {
            if k2.block_size() != k1.block_size() {
                return Err(Error::DimensionMismatch(format!(
                    "kernels have block sizes {} and {}",
                    k1.block_size(),
                    k2.block_size()
                )));
            }
            let n = points.len();
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
            let diffs: Result<Vec<f64>> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let a = eval_kernel(k1, &points[i], &points[j])?;
                    let b = eval_kernel(k2, &points[i], &points[j])?;
                    Ok(max_abs(&(a - b)))
                })
                .collect();
            Some(diffs?.into_iter().fold(0.0, f64::max))
        }
    };
    Ok(GramCertificate {
        psd: min_eig >= -tol.psd_tol,
        min_eig,
        max_diff,
        points: points.len(),
    })
}

/// `max |K_1(l_i, z_i) - K_2(l_i, z_i)|` over explicit point pairs.
pub fn kernel_gap_on_pairs(k1: &KernelSpec, k2: &KernelSpec, pairs: &[(BallPoint, BallPoint)]) -> Result<f64> {
    let diffs: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|(l, z)| Ok(max_abs(&(eval_kernel(k1, l, z)? - eval_kernel(k2, l, z)?))))
        .collect();
    Ok(diffs?.into_iter().fold(0.0, f64::max))
}
