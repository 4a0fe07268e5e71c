//! Pushforward kernels `F(l) M(l,z) F(z)^*`, the multiplication operator
//! `M_F : H(M) -> H(M_F)` and its kernel (the overlapping space), all
//! computed on the span of kernel sections at sampled points.
//!
//! Coordinates: the Gram `G` of `M` on the sample is range-restricted,
//! `G = W L W^*`, and the columns of `W L^{-1/2}` are section coefficients
//! of an orthonormal basis of the sampled span. A function with values `w`
//! at the sample has orthonormal coordinates `L^{-1/2} W^* w`.

use rayon::prelude::*;

use crate::colligation::{BallPoint, OutputPair};
use crate::error::{Error, Result};
use crate::kernels::{check_distinct, eval_kernel, KernelSpec, SchurEvaluator};
use crate::numerics::{
    block_diag, complement_basis, hermitian_asymmetry, hermitian_eigen, hstack, identity, max_abs,
    orthonormal_basis, svd_sorted, vstack, zeros, BasisMode, ComplexMatrix, Tolerances,
};
use crate::report::{Check, Report};
use crate::sampling::{random_vector, sample_points, SampleConfig, Stream};
use crate::subspaces::{
    build_v_and_check, domain_subspace, kernel_of_multiplier, row_function_coefficients,
};

/// Block kernel `M` on the ball.
#[derive(Debug, Clone)]
pub enum BlockKernel {
    /// `I_copies (x) K`: `copies` independent copies of `K` stacked.
    Diagonal(KernelSpec, usize),
    /// `diag(K, I_n)`: `K` next to the constant identity kernel.
    WithIdentity(KernelSpec, usize),
}

impl BlockKernel {
    pub fn block_size(&self) -> usize {
        match self {
            BlockKernel::Diagonal(k, copies) => k.block_size() * copies,
            BlockKernel::WithIdentity(k, n) => k.block_size() + n,
        }
    }

    pub fn eval(&self, l: &BallPoint, z: &BallPoint) -> Result<ComplexMatrix> {
        match self {
            BlockKernel::Diagonal(k, copies) => {
                let v = eval_kernel(k, l, z)?;
                let blocks: Vec<&ComplexMatrix> = (0..*copies).map(|_| &v).collect();
                Ok(block_diag(&blocks))
            }
            BlockKernel::WithIdentity(k, n) => {
                let v = eval_kernel(k, l, z)?;
                Ok(block_diag(&[&v, &identity(*n)]))
            }
        }
    }
}

/// Operator-valued factor `F` on the ball.
#[derive(Debug, Clone)]
pub enum Factor {
    Identity(usize),
    Zero { rows: usize, cols: usize },
    /// `Z(l) (x) I_n = [l_1 I_n, ..., l_d I_n]`.
    RowSymbol(usize),
    /// `[I_Y, S(l)]`.
    IdentityAndMultiplier(SchurEvaluator),
}

impl Factor {
    pub fn cols(&self, d: usize) -> usize {
        match self {
            Factor::Identity(n) => *n,
            Factor::Zero { cols, .. } => *cols,
            Factor::RowSymbol(n) => d * n,
            Factor::IdentityAndMultiplier(s) => s.dim_y() + s.dim_u(),
        }
    }

    pub fn eval(&self, l: &BallPoint) -> Result<ComplexMatrix> {
        match self {
            Factor::Identity(n) => Ok(identity(*n)),
            Factor::Zero { rows, cols } => Ok(zeros(*rows, *cols)),
            Factor::RowSymbol(n) => Ok(l.row_symbol(*n)),
            Factor::IdentityAndMultiplier(s) => Ok(hstack(&[&identity(s.dim_y()), &s.eval(l)?])),
        }
    }
}

/// `F(l) M(l,z) F(z)^*`.
pub fn pushforward_kernel(m: &BlockKernel, f: &Factor, l: &BallPoint, z: &BallPoint) -> Result<ComplexMatrix> {
    let b = m.block_size();
    if f.cols(l.d()) != b {
        return Err(Error::DimensionMismatch(format!(
            "factor has {} columns, kernel has block size {b}",
            f.cols(l.d())
        )));
    }
    Ok(f.eval(l)? * m.eval(l, z)? * f.eval(z)?.adjoint())
}

/// Range restriction `G = W L W^*` of a Hermitian PSD Gram.
#[derive(Debug, Clone)]
pub struct GramFrame {
    pub gram: ComplexMatrix,
    pub eigvecs: ComplexMatrix,
    pub eigvals: Vec<f64>,
}

impl GramFrame {
    pub fn new(gram: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let asym = hermitian_asymmetry(&gram);
        let scale = max_abs(&gram).max(1.0);
        if asym > tol.psd_tol * scale {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let (vals, vecs) = hermitian_eigen(&gram);
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        let bottom = vals.first().copied().unwrap_or(0.0);
        if bottom < -tol.psd_tol * top.max(1.0) {
            return Err(Error::NotPsd { min_eig: bottom });
        }
        let keep: Vec<usize> = (0..vals.len())
            .rev()
            .filter(|&i| top > 0.0 && vals[i] > tol.rank_tol * top)
            .collect();
        let mut eigvecs = zeros(gram.nrows(), keep.len());
        for (dst, &src) in keep.iter().enumerate() {
            eigvecs.set_column(dst, &vecs.column(src));
        }
        let eigvals = keep.iter().map(|&i| vals[i]).collect();
        Ok(GramFrame { gram, eigvecs, eigvals })
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    fn scaled(&self, power: f64) -> ComplexMatrix {
        let mut m = self.eigvecs.clone();
        for (k, &v) in self.eigvals.iter().enumerate() {
            let s = v.powf(power);
            for x in m.column_mut(k).iter_mut() {
                *x *= s;
            }
        }
        m
    }

    /// Orthonormal coordinates of the function with stacked sample values
    /// `w`, and the part of `w` outside the Gram range.
    pub fn coordinates_of_values(&self, w: &ComplexMatrix) -> (ComplexMatrix, f64) {
        let coords = self.scaled(-0.5).adjoint() * w;
        let outside = max_abs(&(w - &self.eigvecs * (self.eigvecs.adjoint() * w)));
        (coords, outside)
    }

    /// Orthonormal coordinates of the section combination with coefficients `x`.
    pub fn coordinates_of_sections(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.scaled(0.5).adjoint() * x
    }

    /// Section coefficients of the element with orthonormal coordinates `c`.
    pub fn sections_of_coordinates(&self, c: &ComplexMatrix) -> ComplexMatrix {
        self.scaled(-0.5) * c
    }
}

/// Kernel `M`, factor `F` and both Grams on a common sample.
#[derive(Debug, Clone)]
pub struct SampledRkhs {
    pub points: Vec<BallPoint>,
    pub kernel: BlockKernel,
    pub factor: Factor,
    pub frame: GramFrame,
    pub pushforward_frame: GramFrame,
    /// `diag(F(z_k)^*)`, mapping `M_F`-section coefficients to `M`-section
    /// coefficients.
    pub lift: ComplexMatrix,
}

fn block_gram<K>(points: &[BallPoint], b: usize, k: K) -> Result<ComplexMatrix>
where
    K: Fn(&BallPoint, &BallPoint) -> Result<ComplexMatrix> + Sync,
{
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let blocks: Result<Vec<ComplexMatrix>> = pairs.par_iter().map(|&(i, j)| k(&points[i], &points[j])).collect();
    let mut g = zeros(n * b, n * b);
    for (&(i, j), blk) in pairs.iter().zip(blocks?) {
        g.view_mut((i * b, j * b), (b, b)).copy_from(&blk);
        if i != j {
            g.view_mut((j * b, i * b), (b, b)).copy_from(&blk.adjoint());
        }
    }
    Ok(g)
}

impl SampledRkhs {
    pub fn new(kernel: BlockKernel, factor: Factor, points: Vec<BallPoint>, tol: &Tolerances) -> Result<Self> {
        check_distinct(&points)?;
        let d = points.first().map(BallPoint::d).unwrap_or(0);
        let b = kernel.block_size();
        if factor.cols(d) != b {
            return Err(Error::DimensionMismatch(format!(
                "factor has {} columns, kernel has block size {b}",
                factor.cols(d)
            )));
        }
        let gram = block_gram(&points, b, |l, z| kernel.eval(l, z))?;
        let frame = GramFrame::new(gram, tol)?;
        if frame.dim() == 0 {
            return Err(Error::DegenerateGram("kernel Gram vanishes on the sample".into()));
        }
        let values: Result<Vec<ComplexMatrix>> = points.iter().map(|z| factor.eval(z)).collect();
        let values = values?;
        let bf = values.first().map(|v| v.nrows()).unwrap_or(0);
        let adjoints: Vec<ComplexMatrix> = values.iter().map(|v| v.adjoint()).collect();
        let refs: Vec<&ComplexMatrix> = adjoints.iter().collect();
        let lift = block_diag(&refs);
        let pushed = block_gram(&points, bf, |l, z| pushforward_kernel(&kernel, &factor, l, z))?;
        let pushforward_frame = GramFrame::new(pushed, tol)?;
        Ok(SampledRkhs {
            points,
            kernel,
            factor,
            frame,
            pushforward_frame,
            lift,
        })
    }

    /// Stacked values at the sample of the element of `H(M)` with
    /// orthonormal coordinates `c`.
    pub fn sample_values(&self, c: &ComplexMatrix) -> ComplexMatrix {
        &self.frame.gram * self.frame.sections_of_coordinates(c)
    }

    /// Value at `l` of the element of `H(M)` with orthonormal coordinates `c`.
    pub fn evaluate(&self, c: &ComplexMatrix, l: &BallPoint) -> Result<ComplexMatrix> {
        let x = self.frame.sections_of_coordinates(c);
        let b = self.kernel.block_size();
        let mut out = zeros(b, c.ncols());
        for (k, z) in self.points.iter().enumerate() {
            out += self.kernel.eval(l, z)? * x.rows(k * b, b);
        }
        Ok(out)
    }

    /// `Psi` in orthonormal coordinates: `H(M_F)` sample span into `H(M)`.
    pub fn psi(&self) -> ComplexMatrix {
        let x = self.pushforward_frame.sections_of_coordinates(&identity(self.pushforward_frame.dim()));
        self.frame.coordinates_of_sections(&(&self.lift * x))
    }
}

#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub rkhs_dim: usize,
    pub pushforward_dim: usize,
    /// `max |G_F - Lift^* G Lift|`, pushforward Gram against the pulled-back one.
    pub gram_consistency: f64,
    /// `max |Psi^* Psi - I|`.
    pub coisometry_residual: f64,
    /// `max(|Gamma^* Gamma - I|, |Gamma Gamma^* - I|)`.
    pub unitary_residual: f64,
    /// Orthonormal coordinates (columns) of `Ker M_F` in the sampled span.
    pub overlap_basis: ComplexMatrix,
    /// `max |F(l) f(l)|` over overlap basis elements at fresh points.
    pub vanishing_residual: f64,
    /// Largest relative gap between `|F f|` in `H(M_F)` and `|Q f|` in `H(M)`.
    pub lifted_norm_check: f64,
}

impl OverlapReport {
    pub fn overlap_dim(&self) -> usize {
        self.overlap_basis.ncols()
    }
}

pub fn coisometry_and_overlap(srk: &SampledRkhs, cfg: &SampleConfig) -> Result<OverlapReport> {
    let r = srk.frame.dim();
    let rf = srk.pushforward_frame.dim();
    let pulled = srk.lift.adjoint() * &srk.frame.gram * &srk.lift;
    let gram_consistency = max_abs(&(&pulled - &srk.pushforward_frame.gram));

    let psi = srk.psi();
    let coisometry_residual = max_abs(&(psi.adjoint() * &psi - identity(rf)));
    let range = orthonormal_basis(&psi, BasisMode::Range, &cfg.tolerances);
    let overlap_basis = complement_basis(&range, r);
    let gamma = vstack(&[&psi.adjoint(), &overlap_basis.adjoint()]);
    let unitary_residual = if gamma.nrows() == r {
        max_abs(&(gamma.adjoint() * &gamma - identity(r))).max(max_abs(&(&gamma * gamma.adjoint() - identity(r))))
    } else {
        f64::INFINITY
    };

    let d = srk.points.first().map(BallPoint::d).unwrap_or(1);
    let mut rng = cfg.rng(Stream::Overlap);
    let fresh = sample_points(&mut rng, d, 20, cfg.sample_radius);
    let mut vanishing_residual: f64 = 0.0;
    if overlap_basis.ncols() > 0 {
        for l in &fresh {
            let v = srk.factor.eval(l)? * srk.evaluate(&overlap_basis, l)?;
            vanishing_residual = vanishing_residual.max(max_abs(&v));
        }
    }

    // |F f| computed by interpolating the values of F f against the
    // pushforward Gram, compared with |Q f| = |Psi^* f|.
    let mut rng = cfg.rng(Stream::TestVectors);
    let mut lifted_norm_check: f64 = 0.0;
    for _ in 0..5 {
        let c = random_vector(&mut rng, r);
        let values = srk.sample_values(&c);
        let b = srk.kernel.block_size();
        let pushed: Result<Vec<ComplexMatrix>> = srk
            .points
            .iter()
            .enumerate()
            .map(|(k, z)| Ok(srk.factor.eval(z)? * values.rows(k * b, b)))
            .collect();
        let pushed = pushed?;
        let refs: Vec<&ComplexMatrix> = pushed.iter().collect();
        let (coords, _) = srk.pushforward_frame.coordinates_of_values(&vstack(&refs));
        let lhs = coords.norm();
        let rhs = (psi.adjoint() * &c).norm();
        lifted_norm_check = lifted_norm_check.max((lhs - rhs).abs() / c.norm());
    }

    Ok(OverlapReport {
        rkhs_dim: r,
        pushforward_dim: rf,
        gram_consistency,
        coisometry_residual,
        unitary_residual,
        overlap_basis,
        vanishing_residual,
        lifted_norm_check,
    })
}

/// Relative distance of the elements with sample values `w` (columns) from
/// the overlap span, and the largest part of `w` outside the sampled span.
pub fn membership_gap(srk: &SampledRkhs, overlap: &ComplexMatrix, w: &ComplexMatrix) -> (f64, f64) {
    let (coords, outside) = srk.frame.coordinates_of_values(w);
    let mut gap: f64 = 0.0;
    for j in 0..coords.ncols() {
        let c = coords.column(j).into_owned();
        let rest = &c - overlap * (overlap.adjoint() * &c);
        gap = gap.max(rest.norm() / c.norm().max(f64::MIN_POSITIVE));
    }
    (gap, outside)
}

/// `M = I_d (x) K_S`, `F = Z (x) I_Y`; the overlap is `{h : Z h = 0}`.
pub fn domain_overlap_space(s: &SchurEvaluator, points: Vec<BallPoint>, tol: &Tolerances) -> Result<SampledRkhs> {
    let d = s.d();
    SampledRkhs::new(
        BlockKernel::Diagonal(KernelSpec::Schur(s.clone()), d),
        Factor::RowSymbol(s.dim_y()),
        points,
        tol,
    )
}

/// `M = diag(K_S, I_U)`, `F = [I_Y, S]`; the overlap is
/// `{(h, u) : h + S u = 0}`.
pub fn range_overlap_space(s: &SchurEvaluator, points: Vec<BallPoint>, tol: &Tolerances) -> Result<SampledRkhs> {
    SampledRkhs::new(
        BlockKernel::WithIdentity(KernelSpec::Schur(s.clone()), s.dim_u()),
        Factor::IdentityAndMultiplier(s.clone()),
        points,
        tol,
    )
}

/// Stacked sample values of `[C R(z) x_1; ...; C R(z) x_d]` for each column
/// `(x_1; ...; x_d)` of `h`.
fn observed_blocks(p: &OutputPair, h: &ComplexMatrix, points: &[BallPoint]) -> Result<ComplexMatrix> {
    let n = p.dim_x();
    let copies = h.nrows() / n;
    let mut rows = Vec::with_capacity(points.len());
    for z in points {
        let row = p.resolvent_row(z)?;
        let parts: Vec<ComplexMatrix> = (0..copies).map(|j| &row * h.rows(j * n, n)).collect();
        let refs: Vec<&ComplexMatrix> = parts.iter().collect();
        rows.push(vstack(&refs));
    }
    let refs: Vec<&ComplexMatrix> = rows.iter().collect();
    Ok(vstack(&refs))
}

/// Stacked sample values of `(C R(z) x; u)` for each column `(x; u)` of `h`.
fn observed_with_constant(p: &OutputPair, h: &ComplexMatrix, points: &[BallPoint]) -> Result<ComplexMatrix> {
    let n = p.dim_x();
    let u = h.rows(n, h.nrows() - n).into_owned();
    let mut rows = Vec::with_capacity(points.len());
    for z in points {
        let top = p.resolvent_row(z)? * h.rows(0, n);
        rows.push(vstack(&[&top, &u]));
    }
    let refs: Vec<&ComplexMatrix> = rows.iter().collect();
    Ok(vstack(&refs))
}

fn push_common(report: &mut Report, prefix: &str, o: &OverlapReport, tol: &Tolerances) {
    report.push(Check::bounded(
        format!("{prefix}_gram_consistency"),
        o.gram_consistency,
        tol.eq_tol,
        "pushforward Gram against pulled-back Gram",
    ));
    report.push(Check::bounded(
        format!("{prefix}_psi_isometry"),
        o.coisometry_residual,
        tol.eq_tol,
        format!("dim H(M) = {}, dim H(M_F) = {}", o.rkhs_dim, o.pushforward_dim),
    ));
    report.push(Check::bounded(
        format!("{prefix}_gamma_unitary"),
        o.unitary_residual,
        tol.eq_tol,
        format!("overlap dim = {}", o.overlap_dim()),
    ));
    report.push(Check::bounded(
        format!("{prefix}_overlap_vanishes"),
        o.vanishing_residual,
        tol.eq_tol,
        "F f at 20 fresh points",
    ));
    report.push(Check::bounded(
        format!("{prefix}_lifted_norm"),
        o.lifted_norm_check,
        tol.eq_tol,
        "|F f| in H(M_F) against |Q f| in H(M)",
    ));
}

/// Both overlap identifications for a multiplier realized by a colligation
/// whose output pair `p` satisfies `K_S = K_{C,A}`, on `count` sampled points.
///
/// The overlap of `(Z (x) I_Y, I_d (x) K_S)` is compared with the complement
/// of the domain subspace, and the overlap of `([I_Y, S], K_S (+) I_U)` with
/// the complement of the range of `V`, both carried into function space by
/// the observability map.
pub fn overlap_suite(s: &SchurEvaluator, p: &OutputPair, count: usize, cfg: &SampleConfig) -> Result<Report> {
    let tol = &cfg.tolerances;
    let mut report = Report::new("overlap");
    let mut rng = cfg.rng(Stream::Overlap);
    let _ = sample_points(&mut rng, s.d(), 20, cfg.sample_radius);
    let points = sample_points(&mut rng, s.d(), count, cfg.sample_radius);

    let dsub = domain_subspace(p, cfg)?;
    let complement = dsub.subspace.complement.clone();

    let domain = domain_overlap_space(s, points.clone(), tol)?;
    let o1 = coisometry_and_overlap(&domain, cfg)?;
    push_common(&mut report, "domain", &o1, tol);
    report.push(Check::flag(
        "domain_overlap_dim",
        o1.overlap_dim() == complement.ncols(),
        format!("overlap {} vs domain complement {}", o1.overlap_dim(), complement.ncols()),
    ));
    if complement.ncols() > 0 {
        let w = observed_blocks(p, &complement, &points)?;
        let (gap, outside) = membership_gap(&domain, &o1.overlap_basis, &w);
        report.push(Check::bounded(
            "domain_overlap_alignment",
            gap.max(outside),
            tol.eq_tol.sqrt(),
            "domain complement mapped into the overlap",
        ));
    }

    let v = build_v_and_check(s, p, &dsub.subspace, cfg)?;
    let range = &v.range;
    let range_perp = range.complement.clone();
    let space = range_overlap_space(s, points.clone(), tol)?;
    let o2 = coisometry_and_overlap(&space, cfg)?;
    push_common(&mut report, "range", &o2, tol);
    report.push(Check::flag(
        "range_overlap_dim",
        o2.overlap_dim() == range_perp.ncols(),
        format!("overlap {} vs complement of range of V {}", o2.overlap_dim(), range_perp.ncols()),
    ));
    if range_perp.ncols() > 0 {
        let w = observed_with_constant(p, &range_perp, &points)?;
        let (gap, outside) = membership_gap(&space, &o2.overlap_basis, &w);
        report.push(Check::bounded(
            "range_overlap_alignment",
            gap.max(outside),
            tol.eq_tol.sqrt(),
            "complement of range of V mapped into the overlap",
        ));
    }

    let (dim, gap) = constant_part_of_overlap(&space, &o2.overlap_basis, s, cfg)?;
    let u0 = kernel_of_multiplier(s, cfg)?;
    report.push(Check::flag(
        "range_overlap_constant_part",
        dim == u0.dim(),
        format!("overlap meets 0 (+) U in dim {dim}, multiplier kernel dim {}", u0.dim()),
    ));
    report.push(Check::bounded(
        "range_overlap_constant_part_matches_kernel",
        gap,
        tol.eq_tol.sqrt(),
        "projector gap against the multiplier kernel",
    ));
    Ok(report)
}

/// Dimension of `overlap ∩ (0 (+) U)` and the projector gap between its
/// `U`-part and the null space of `S`.
pub fn constant_part_of_overlap(
    space: &SampledRkhs,
    overlap: &ComplexMatrix,
    s: &SchurEvaluator,
    cfg: &SampleConfig,
) -> Result<(usize, f64)> {
    let dim_u = s.dim_u();
    let dim_y = s.dim_y();
    let constants = vstack(&[&zeros(dim_y, dim_u), &identity(dim_u)]);
    let stacked: Vec<&ComplexMatrix> = space.points.iter().map(|_| &constants).collect();
    let (embed, _) = space.frame.coordinates_of_values(&vstack(&stacked));
    if overlap.ncols() == 0 || dim_u == 0 {
        let u0 = kernel_of_multiplier(s, cfg)?;
        return Ok((0, max_abs(&u0.projector())));
    }
    let (_, sigma, v) = svd_sorted(&(overlap.adjoint() * &embed));
    let cutoff = 1.0 - cfg.tolerances.eq_tol.sqrt();
    let dim = sigma.iter().filter(|&&x| x >= cutoff).count();
    let part = v.columns(0, dim).into_owned();
    let u0 = kernel_of_multiplier(s, cfg)?;
    let gap = max_abs(&(&part * part.adjoint() - u0.projector()));
    Ok((dim, gap))
}

/// Overlap checks for the worked example: both identifications, the
/// explicit domain witness `(e3; -e2)/sqrt 2`, and cancellation of
/// `l_1 (O h_1)(l) + l_2 (O h_2)(l)` in Taylor coefficients to degree 8.
pub fn example33_overlap(count: usize, cfg: &SampleConfig) -> Result<Report> {
    use crate::realization::example33;
    let tol = &cfg.tolerances;
    let s = example33::schur_function();
    let p = example33::colligation().pair().clone();
    let mut report = overlap_suite(&s, &p, count, cfg)?;

    let h = example33::domain_complement_witness();
    let mut rng = cfg.rng(Stream::Overlap);
    let _ = sample_points(&mut rng, 2, 20, cfg.sample_radius);
    let points = sample_points(&mut rng, 2, count, cfg.sample_radius);
    let domain = domain_overlap_space(&s, points.clone(), tol)?;
    let o1 = coisometry_and_overlap(&domain, cfg)?;
    let w = observed_blocks(&p, &h, &points)?;
    let (gap, outside) = membership_gap(&domain, &o1.overlap_basis, &w);
    report.push(Check::bounded(
        "domain_witness_in_overlap",
        gap.max(outside),
        tol.eq_tol.sqrt(),
        format!("overlap dim {}", o1.overlap_dim()),
    ));
    let coeffs = row_function_coefficients(&p, &h, 8);
    let largest = coeffs.iter().map(|(_, m)| max_abs(m)).fold(0.0, f64::max);
    report.push(Check::bounded(
        "domain_witness_cancels",
        largest,
        1e-12,
        "Taylor coefficients to degree 8",
    ));
    Ok(report)
}

/// `M_F` for a constant factor on a scalar kernel; used by tests of the
/// degenerate cases.
pub fn scalar_kernel_space(factor: Factor, points: Vec<BallPoint>, tol: &Tolerances) -> Result<SampledRkhs> {
    SampledRkhs::new(BlockKernel::Diagonal(KernelSpec::Szego, 1), factor, points, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::re;
    use crate::realization::example33;

    fn cfg() -> SampleConfig {
        SampleConfig::default()
    }

    fn pts(count: usize, d: usize) -> Vec<BallPoint> {
        let mut rng = cfg().rng(Stream::KernelPoints);
        sample_points(&mut rng, d, count, 0.9)
    }

    #[test]
    fn identity_factor_returns_kernel() {
        let m = BlockKernel::Diagonal(KernelSpec::Schur(example33::schur_function()), 1);
        let f = Factor::Identity(1);
        for w in pts(4, 2).windows(2) {
            let a = pushforward_kernel(&m, &f, &w[0], &w[1]).unwrap();
            let b = m.eval(&w[0], &w[1]).unwrap();
            assert!(max_abs(&(a - b)) < 1e-15);
        }
    }

    #[test]
    fn range_pushforward_at_origin_is_one() {
        let s = example33::schur_function();
        let m = BlockKernel::WithIdentity(KernelSpec::Schur(s.clone()), s.dim_u());
        let o = BallPoint::origin(2);
        let v = pushforward_kernel(&m, &Factor::IdentityAndMultiplier(s), &o, &o).unwrap();
        assert!((v[(0, 0)] - re(1.0)).norm() < 1e-14);
    }

    #[test]
    fn domain_pushforward_on_first_axis() {
        let s = example33::schur_function();
        let m = BlockKernel::Diagonal(KernelSpec::Schur(s.clone()), 2);
        let l = BallPoint::from_real(&[0.5, 0.0]).unwrap();
        let v = pushforward_kernel(&m, &Factor::RowSymbol(1), &l, &l).unwrap();
        let k = eval_kernel(&KernelSpec::Schur(s), &l, &l).unwrap();
        assert!((v[(0, 0)] - k[(0, 0)] * 0.25).norm() < 1e-15);
    }

    #[test]
    fn mismatched_factor_is_rejected() {
        let m = BlockKernel::Diagonal(KernelSpec::Szego, 2);
        let o = BallPoint::origin(2);
        assert!(matches!(
            pushforward_kernel(&m, &Factor::Identity(1), &o, &o),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn zero_factor_overlaps_everything() {
        let srk = scalar_kernel_space(Factor::Zero { rows: 1, cols: 1 }, pts(6, 1), &cfg().tolerances).unwrap();
        let o = coisometry_and_overlap(&srk, &cfg()).unwrap();
        assert_eq!(o.pushforward_dim, 0);
        assert_eq!(o.overlap_dim(), o.rkhs_dim);
        assert!(o.unitary_residual < 1e-12);
    }

    #[test]
    fn identity_factor_has_no_overlap() {
        let srk = scalar_kernel_space(Factor::Identity(1), pts(6, 1), &cfg().tolerances).unwrap();
        let o = coisometry_and_overlap(&srk, &cfg()).unwrap();
        assert_eq!(o.overlap_dim(), 0);
        assert!(o.coisometry_residual < 1e-9, "{}", o.coisometry_residual);
        assert!(o.lifted_norm_check < 1e-9);
    }

    #[test]
    fn example_overlaps() {
        let r = example33_overlap(30, &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}
