//! Dense complex linear algebra with explicit rank and positivity tolerances.
//!
//! Everything here is a thin layer over `nalgebra`'s SVD, Hermitian
//! eigendecomposition and LU, plus the few routines it lacks (canonical
//! subspace bases, partial-isometry polar factor, diagonally pivoted
//! Cholesky). Zero-dimensional matrices are legal inputs everywhere.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Numerical cutoffs shared by every rank, positivity and equality decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff: sigma counts iff sigma > rank_tol * sigma_max.
    pub rank_tol: f64,
    /// Eigenvalue floor for positivity.
    pub psd_tol: f64,
    /// Elementwise / normwise residual bound for asserted identities.
    pub eq_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            psd_tol: 1e-10,
            eq_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, psd_tol: f64, eq_tol: f64) -> Result<Self> {
        let tol = Tolerances {
            rank_tol,
            psd_tol,
            eq_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("psd_tol", self.psd_tol),
            ("eq_tol", self.eq_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Which subspace `orthonormal_basis` should return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    Range,
    Kernel,
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Build a matrix from real row-major data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
    ComplexMatrix::from_fn(rows, cols, |i, j| re(data[i * cols + j]))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { re(0.0) })
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
        })
    }
}

/// Largest entry modulus; 0 for an empty matrix.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks must share the column count.
pub fn vstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// `max |m - m*|`, or infinity when `m` is not square.
pub fn hermitian_asymmetry(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part; 0 for an empty matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Thin SVD with singular values sorted descending: `(u, sigma, v)` with
/// `m = u * diag(sigma) * v^*`.
pub fn svd_sorted(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (zeros(rows, 0), Vec::new(), zeros(cols, 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut us = zeros(rows, k);
    let mut vs = zeros(cols, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v.column(src));
        sigma.push(svd.singular_values[src]);
    }
    (us, sigma, vs)
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows.min(cols) == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value (0 for empty matrices).
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn numerical_rank(sigma: &[f64], tol: &Tolerances) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol.rank_tol * smax).count()
}

pub fn rank(m: &ComplexMatrix, tol: &Tolerances) -> usize {
    numerical_rank(&singular_values(m), tol)
}

/// Rotate a unit vector so its first non-negligible component is real positive.
fn fix_phase(v: &mut ComplexMatrix, col: usize) {
    let lead = v
        .column(col)
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-10);
    if let Some(z) = lead {
        let phase = z.conj() / z.norm();
        for x in v.column_mut(col).iter_mut() {
            *x *= phase;
        }
    }
}

/// Canonical orthonormal basis for the range of an orthogonal projector:
/// pivoted Gram-Schmidt over the projector's own columns, so the result
/// depends only on the subspace and not on how it was computed.
fn canonical_basis(projector: &ComplexMatrix, dim: usize) -> ComplexMatrix {
    let n = projector.nrows();
    let mut basis = zeros(n, dim);
    if dim == 0 {
        return basis;
    }
    let mut residual = projector.clone();
    let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(dim);
    for k in 0..dim {
        let norms: Vec<f64> = (0..n).map(|j| residual.column(j).norm()).collect();
        let best = norms.iter().copied().fold(0.0, f64::max);
        let j = norms
            .iter()
            .position(|&x| x >= (1.0 - 1e-6) * best)
            .unwrap_or(0);
        let mut q = residual.column(j).into_owned();
        for _ in 0..2 {
            for (i, _) in pivots.iter().enumerate() {
                let prev = basis.column(i).into_owned();
                let proj = prev.dotc(&q);
                q -= prev * proj;
            }
        }
        let nq = q.norm();
        if nq > 0.0 {
            q /= re(nq);
        }
        basis.set_column(k, &q);
        pivots.push((j, k));
        let coeffs = q.adjoint() * &residual;
        residual -= &q * coeffs;
    }
    pivots.sort();
    let mut ordered = zeros(n, dim);
    for (dst, &(_, src)) in pivots.iter().enumerate() {
        ordered.set_column(dst, &basis.column(src));
        fix_phase(&mut ordered, dst);
    }
    ordered
}

fn range_projector(u: &ComplexMatrix, r: usize) -> ComplexMatrix {
    let ur = u.columns(0, r).into_owned();
    &ur * ur.adjoint()
}

/// Orthonormal basis for the column space (`Range`) or null space
/// (`Kernel`) of `m`, decided at `rank_tol` relative to the largest
/// singular value. Output is deterministic: columns are a pivoted
/// Gram-Schmidt of the subspace projector, each with its first
/// non-negligible component real positive.
pub fn orthonormal_basis(m: &ComplexMatrix, mode: BasisMode, tol: &Tolerances) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    match mode {
        BasisMode::Range => {
            if rows == 0 || cols == 0 {
                return zeros(rows, 0);
            }
            let (u, sigma, _) = svd_sorted(m);
            let r = numerical_rank(&sigma, tol);
            canonical_basis(&range_projector(&u, r), r)
        }
        BasisMode::Kernel => {
            if cols == 0 {
                return zeros(0, 0);
            }
            if rows == 0 {
                return identity(cols);
            }
            let (_, sigma, v) = svd_sorted(m);
            let r = numerical_rank(&sigma, tol);
            let p = identity(cols) - range_projector(&v, r);
            canonical_basis(&p, cols - r)
        }
    }
}

/// Orthonormal basis for the orthogonal complement of the span of the
/// (orthonormal) columns of `q` inside `C^ambient`.
pub fn complement_basis(q: &ComplexMatrix, ambient: usize) -> ComplexMatrix {
    assert_eq!(q.nrows(), ambient, "basis rows must equal ambient dimension");
    let dim = ambient - q.ncols().min(ambient);
    let p = identity(ambient) - q * q.adjoint();
    canonical_basis(&p, dim)
}

/// Rank-truncated Moore-Penrose pseudo-inverse.
pub fn pseudo_inverse(m: &ComplexMatrix, tol: &Tolerances) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let (u, sigma, v) = svd_sorted(m);
    let r = numerical_rank(&sigma, tol);
    let mut out = zeros(cols, rows);
    for (k, &s) in sigma.iter().enumerate().take(r) {
        let vk = v.column(k);
        let uk = u.column(k);
        out += (vk * uk.adjoint()).scale(1.0 / s);
    }
    out
}

/// Solve `a x = b` by LU; `None` when `a` is numerically singular.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.nrows();
    if n != a.ncols() || b.nrows() != n {
        return None;
    }
    if n == 0 {
        return Some(zeros(0, b.ncols()));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if dmax == 0.0 || dmin <= 1e-14 * dmax {
        return None;
    }
    lu.solve(b).filter(is_finite)
}

/// Hermitian PSD square root with clamping of eigenvalues in `[-psd_tol, 0)`.
/// Returns the root together with the numerical rank of `m`.
pub fn psd_sqrt_and_defect(m: &ComplexMatrix, tol: &Tolerances) -> Result<(ComplexMatrix, usize)> {
    psd_sqrt_with_floor(m, tol, 0.0)
}

/// As [`psd_sqrt_and_defect`], additionally treating eigenvalues at or below
/// the absolute `floor` as zero. Defect operators `I - T T^*` of unit-scale
/// contractions use a floor at roundoff level so that cancellation noise
/// does not surface as spurious rank.
pub fn psd_sqrt_with_floor(m: &ComplexMatrix, tol: &Tolerances, floor: f64) -> Result<(ComplexMatrix, usize)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "psd square root needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_finite(m, "psd square root input")?;
    let asym = hermitian_asymmetry(m);
    if asym > tol.eq_tol {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((zeros(0, 0), 0));
    }
    let (values, vectors) = hermitian_eigen(m);
    if values[0] < -tol.psd_tol {
        return Err(Error::NotPsd { min_eig: values[0] });
    }
    let lmax = values[n - 1].max(0.0);
    let cutoff = (tol.rank_tol * lmax).max(floor);
    let rank = if lmax > floor {
        values.iter().filter(|&&l| l > cutoff).count()
    } else {
        0
    };
    let roots: Vec<f64> = values
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
        .collect();
    let mut scaled = vectors.clone();
    for (k, r) in roots.iter().enumerate() {
        for x in scaled.column_mut(k).iter_mut() {
            *x *= r;
        }
    }
    let mut root = scaled * vectors.adjoint();
    root = (&root + root.adjoint()).scale(0.5);
    Ok((root, rank))
}

/// `t = isometry * modulus` with `modulus = (t^* t)^{1/2}` and `isometry` the
/// partial isometry whose initial space is the range of `modulus`.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub isometry: ComplexMatrix,
    pub modulus: ComplexMatrix,
    pub rank: usize,
}

pub fn polar_partial_isometry(t: &ComplexMatrix, tol: &Tolerances) -> Result<PolarFactors> {
    ensure_finite(t, "polar decomposition input")?;
    let (rows, cols) = t.shape();
    let (u, sigma, v) = svd_sorted(t);
    let norm = sigma.first().copied().unwrap_or(0.0);
    if norm > 1.0 + tol.eq_tol {
        return Err(Error::NormExceedsOne { norm });
    }
    let r = numerical_rank(&sigma, tol);
    let mut isometry = zeros(rows, cols);
    for k in 0..r {
        isometry += u.column(k) * v.column(k).adjoint();
    }
    let mut modulus = zeros(cols, cols);
    for (k, s) in sigma.iter().enumerate() {
        modulus += (v.column(k) * v.column(k).adjoint()).scale(*s);
    }
    Ok(PolarFactors {
        isometry,
        modulus,
        rank: r,
    })
}

/// Diagonally pivoted outer-product Cholesky of a Hermitian PSD matrix.
///
/// Stops once every remaining Schur-complement diagonal is at most
/// `stop_tol * max(diag(m))`. Returns `L` (n x k, columns in pivot order)
/// with `L L^* ~ m` and the pivot sequence.
pub fn pivoted_cholesky(m: &ComplexMatrix, stop_tol: f64) -> Result<(ComplexMatrix, Vec<usize>)> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::DimensionMismatch("Cholesky input must be square".into()));
    }
    let mut work = (m + m.adjoint()).scale(0.5);
    let max_diag = (0..n).map(|i| work[(i, i)].re).fold(0.0, f64::max);
    let threshold = stop_tol * max_diag;
    let mut factor = zeros(n, n);
    let mut remaining: Vec<bool> = vec![true; n];
    let mut pivots = Vec::new();
    for k in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| remaining[i]) {
            let d = work[(i, i)].re;
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((i, d));
            }
        }
        let Some((p, d)) = best else { break };
        if d <= threshold || d <= 0.0 {
            break;
        }
        let root = d.sqrt();
        let mut col = zeros(n, 1);
        for i in 0..n {
            if remaining[i] {
                col[(i, 0)] = work[(i, p)] / root;
            }
        }
        col[(p, 0)] = re(root);
        work -= &col * col.adjoint();
        factor.set_column(k, &col.column(0));
        remaining[p] = false;
        pivots.push(p);
    }
    let k = pivots.len();
    Ok((factor.columns(0, k).into_owned(), pivots))
}
