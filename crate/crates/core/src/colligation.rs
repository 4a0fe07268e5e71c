//! Points of the unit ball, operator tuples, output pairs and colligations.
//!
//! A colligation `U = [A B; C D]` maps `X (+) U` to `X^d (+) Y` where
//! `A = [A_1; ...; A_d]` and `B = [B_1; ...; B_d]` are column stacks. Its
//! transfer function is
//!
//! ```text
//! S(l) = D + C (I - Z(l) A)^{-1} Z(l) B,    Z(l) = [l_1 I ... l_d I].
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    ensure_finite, identity, max_abs, min_eigenvalue, hermitian_eigen, operator_norm, solve,
    vstack, zeros, ComplexMatrix, Tolerances,
};

/// A point `l = (l_1, ..., l_d)` of the open unit ball of `C^d`, or of its
/// closure when built with [`BallPoint::closure`].
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<Complex64>,
}

impl BallPoint {
    /// Interior point: requires `<l, l> < 1`.
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        let p = Self::unchecked(coords)?;
        let n = p.norm_sq();
        if n >= 1.0 {
            return Err(Error::PointOutsideBall { norm_sq: n });
        }
        Ok(p)
    }

    /// Point of the closed ball, for evaluating functions that continue
    /// analytically past the sphere.
    pub fn closure(coords: Vec<Complex64>) -> Result<Self> {
        let p = Self::unchecked(coords)?;
        let n = p.norm_sq();
        if n > 1.0 + 1e-14 {
            return Err(Error::PointOutsideBall { norm_sq: n });
        }
        Ok(p)
    }

    fn unchecked(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch("ball point needs d >= 1".into()));
        }
        if coords.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "ball point".into(),
            });
        }
        Ok(BallPoint { coords })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn origin(d: usize) -> Self {
        BallPoint {
            coords: vec![Complex64::new(0.0, 0.0); d.max(1)],
        }
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// `<l, z> = sum_j l_j conj(z_j)`.
    pub fn inner(&self, other: &BallPoint) -> Complex64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Row symbol `Z(l) = [l_1 I_n ... l_d I_n]`, an `n x dn` matrix.
    pub fn row_symbol(&self, n: usize) -> ComplexMatrix {
        let d = self.d();
        let mut z = zeros(n, d * n);
        for (j, lj) in self.coords.iter().enumerate() {
            for i in 0..n {
                z[(i, j * n + i)] = *lj;
            }
        }
        z
    }
}

/// A `d`-tuple of square operators on the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    blocks: Vec<ComplexMatrix>,
    dim: usize,
}

impl OperatorTuple {
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::DimensionMismatch("operator tuple needs d >= 1 blocks".into()))?;
        let dim = first.nrows();
        for (j, b) in blocks.iter().enumerate() {
            if b.nrows() != dim || b.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "A{} is {}x{}, expected {dim}x{dim}",
                    j + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
            ensure_finite(b, &format!("A{}", j + 1))?;
        }
        Ok(OperatorTuple { blocks, dim })
    }

    pub fn zero(d: usize, dim: usize) -> Self {
        OperatorTuple {
            blocks: vec![zeros(dim, dim); d],
            dim,
        }
    }

    pub fn d(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// Column stack `[A_1; ...; A_d]` (`dn x n`).
    pub fn stacked(&self) -> ComplexMatrix {
        let refs: Vec<&ComplexMatrix> = self.blocks.iter().collect();
        vstack(&refs)
    }

    /// `Z(l) A = sum_j l_j A_j`.
    pub fn pencil(&self, l: &BallPoint) -> ComplexMatrix {
        let mut m = zeros(self.dim, self.dim);
        for (lj, a) in l.coords().iter().zip(&self.blocks) {
            m += a * *lj;
        }
        m
    }
}

fn check_point(d: usize, l: &BallPoint) -> Result<()> {
    if l.d() != d {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, operator tuple has d = {d}",
            l.d()
        )));
    }
    Ok(())
}

/// Output pair `(C, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPair {
    c: ComplexMatrix,
    a: OperatorTuple,
}

impl OutputPair {
    pub fn new(c: ComplexMatrix, a: OperatorTuple) -> Result<Self> {
        if c.ncols() != a.dim() {
            return Err(Error::DimensionMismatch(format!(
                "C has {} columns but the state dimension is {}",
                c.ncols(),
                a.dim()
            )));
        }
        ensure_finite(&c, "C")?;
        Ok(OutputPair { c, a })
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn a(&self) -> &OperatorTuple {
        &self.a
    }

    pub fn d(&self) -> usize {
        self.a.d()
    }

    pub fn dim_x(&self) -> usize {
        self.a.dim()
    }

    pub fn dim_y(&self) -> usize {
        self.c.nrows()
    }

    /// `I - sum_j A_j^* A_j - C^* C`.
    pub fn contractivity_defect(&self) -> ComplexMatrix {
        let mut m = identity(self.dim_x()) - self.c.adjoint() * &self.c;
        for a in self.a.blocks() {
            m -= a.adjoint() * a;
        }
        m
    }

    /// `I - Z(l) A`.
    pub fn resolvent_matrix(&self, l: &BallPoint) -> Result<ComplexMatrix> {
        check_point(self.d(), l)?;
        Ok(identity(self.dim_x()) - self.a.pencil(l))
    }

    /// `C (I - Z(l) A)^{-1}`, the row of the observability map at `l`.
    pub fn resolvent_row(&self, l: &BallPoint) -> Result<ComplexMatrix> {
        let m = self.resolvent_matrix(l)?;
        let x = solve(&m.transpose(), &self.c.transpose()).ok_or(Error::SingularResolvent)?;
        Ok(x.transpose())
    }

    /// `(I - A^* Z(z)^*)^{-1} C^*`, the column `K_{C,A}(., z)`-generator in
    /// state space.
    pub fn adjoint_resolvent_column(&self, z: &BallPoint) -> Result<ComplexMatrix> {
        let m = self.resolvent_matrix(z)?.adjoint();
        solve(&m, &self.c.adjoint()).ok_or(Error::SingularResolvent)
    }

    /// `Z(z)^* (I - A^* Z(z)^*)^{-1} C^*`: its columns generate the domain
    /// subspace as `z` ranges over the ball.
    pub fn domain_generator(&self, z: &BallPoint) -> Result<ComplexMatrix> {
        let col = self.adjoint_resolvent_column(z)?;
        Ok(z.row_symbol(self.dim_x()).adjoint() * col)
    }

    /// `K_{C,A}(l, z) = C (I - Z(l)A)^{-1} (I - A^* Z(z)^*)^{-1} C^*`.
    pub fn kernel(&self, l: &BallPoint, z: &BallPoint) -> Result<ComplexMatrix> {
        Ok(self.resolvent_row(l)? * self.adjoint_resolvent_column(z)?)
    }
}

/// Colligation `U = [A B; C D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    pair: OutputPair,
    b: Vec<ComplexMatrix>,
    d: ComplexMatrix,
}

impl Colligation {
    pub fn new(a: OperatorTuple, b: Vec<ComplexMatrix>, c: ComplexMatrix, d: ComplexMatrix) -> Result<Self> {
        let pair = OutputPair::new(c, a)?;
        Self::from_pair(pair, b, d)
    }

    pub fn from_pair(pair: OutputPair, b: Vec<ComplexMatrix>, d: ComplexMatrix) -> Result<Self> {
        if b.len() != pair.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} B blocks supplied for d = {}",
                b.len(),
                pair.d()
            )));
        }
        let dim_u = d.ncols();
        if d.nrows() != pair.dim_y() {
            return Err(Error::DimensionMismatch(format!(
                "D has {} rows but C has {}",
                d.nrows(),
                pair.dim_y()
            )));
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.nrows() != pair.dim_x() || bj.ncols() != dim_u {
                return Err(Error::DimensionMismatch(format!(
                    "B{} is {}x{}, expected {}x{}",
                    j + 1,
                    bj.nrows(),
                    bj.ncols(),
                    pair.dim_x(),
                    dim_u
                )));
            }
            ensure_finite(bj, &format!("B{}", j + 1))?;
        }
        ensure_finite(&d, "D")?;
        Ok(Colligation { pair, b, d })
    }

    /// Split a full `(dn + dimY) x (n + dimU)` block matrix into a colligation.
    pub fn from_matrix(d: usize, dim_x: usize, u: &ComplexMatrix) -> Result<Self> {
        let rows = d * dim_x;
        if u.nrows() < rows || u.ncols() < dim_x {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot hold a colligation with d = {d}, dimX = {dim_x}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dim_y = u.nrows() - rows;
        let dim_u = u.ncols() - dim_x;
        let a = (0..d)
            .map(|j| u.view((j * dim_x, 0), (dim_x, dim_x)).into_owned())
            .collect();
        let b = (0..d)
            .map(|j| u.view((j * dim_x, dim_x), (dim_x, dim_u)).into_owned())
            .collect();
        let c = u.view((rows, 0), (dim_y, dim_x)).into_owned();
        let dd = u.view((rows, dim_x), (dim_y, dim_u)).into_owned();
        Colligation::new(OperatorTuple::new(a)?, b, c, dd)
    }

    pub fn pair(&self) -> &OutputPair {
        &self.pair
    }

    pub fn a(&self) -> &OperatorTuple {
        self.pair.a()
    }

    pub fn b(&self) -> &[ComplexMatrix] {
        &self.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        self.pair.c()
    }

    pub fn d_block(&self) -> &ComplexMatrix {
        &self.d
    }

    pub fn d(&self) -> usize {
        self.pair.d()
    }

    pub fn dim_x(&self) -> usize {
        self.pair.dim_x()
    }

    pub fn dim_u(&self) -> usize {
        self.d.ncols()
    }

    pub fn dim_y(&self) -> usize {
        self.d.nrows()
    }

    /// Column stack `[B_1; ...; B_d]`.
    pub fn b_stacked(&self) -> ComplexMatrix {
        let refs: Vec<&ComplexMatrix> = self.b.iter().collect();
        vstack(&refs)
    }

    /// The assembled block operator.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.dim_x();
        let rows = self.d() * n;
        let mut u = zeros(rows + self.dim_y(), n + self.dim_u());
        u.view_mut((0, 0), (rows, n)).copy_from(&self.a().stacked());
        u.view_mut((0, n), (rows, self.dim_u())).copy_from(&self.b_stacked());
        u.view_mut((rows, 0), (self.dim_y(), n)).copy_from(self.c());
        u.view_mut((rows, n), (self.dim_y(), self.dim_u())).copy_from(&self.d);
        u
    }

    /// `Z(l) B = sum_j l_j B_j`.
    pub fn input_pencil(&self, l: &BallPoint) -> ComplexMatrix {
        let mut m = zeros(self.dim_x(), self.dim_u());
        for (lj, b) in l.coords().iter().zip(&self.b) {
            m += b * *lj;
        }
        m
    }
}

/// `S(l) = D + C (I - Z(l)A)^{-1} Z(l) B` by a single LU solve.
pub fn transfer_eval(c: &Colligation, l: &BallPoint) -> Result<ComplexMatrix> {
    check_point(c.d(), l)?;
    if l.is_origin() {
        return Ok(c.d_block().clone());
    }
    let m = c.pair().resolvent_matrix(l)?;
    let x = solve(&m, &c.input_pencil(l)).ok_or(Error::SingularResolvent)?;
    Ok(c.d_block() + c.c() * x)
}

/// `S(z)^* = D^* + B^* Z(z)^* (I - A^* Z(z)^*)^{-1} C^*`, evaluated directly
/// in adjoint form.
pub fn transfer_eval_adjoint(c: &Colligation, z: &BallPoint) -> Result<ComplexMatrix> {
    check_point(c.d(), z)?;
    if z.is_origin() {
        return Ok(c.d_block().adjoint());
    }
    let gen = c.pair().domain_generator(z)?;
    Ok(c.d_block().adjoint() + c.b_stacked().adjoint() * gen)
}

/// Operator-class flags of a colligation with the residuals behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColligationClass {
    pub contractive: bool,
    pub isometric: bool,
    pub coisometric: bool,
    pub unitary: bool,
    pub norm: f64,
    /// `max |U^*U - I|`.
    pub isometry_residual: f64,
    /// `max |U U^* - I|`.
    pub coisometry_residual: f64,
}

pub fn classify_colligation(c: &Colligation, tol: &Tolerances) -> ColligationClass {
    let u = c.matrix();
    let norm = operator_norm(&u);
    let iso = max_abs(&(u.adjoint() * &u - identity(u.ncols())));
    let coiso = max_abs(&(&u * u.adjoint() - identity(u.nrows())));
    let isometric = iso <= tol.eq_tol;
    let coisometric = coiso <= tol.eq_tol;
    ColligationClass {
        contractive: norm <= 1.0 + tol.eq_tol,
        isometric,
        coisometric,
        unitary: isometric && coisometric,
        norm,
        isometry_residual: iso,
        coisometry_residual: coiso,
    }
}

/// Contractivity flags of an output pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairClass {
    pub contractive_pair: bool,
    pub isometric_pair: bool,
    /// Smallest eigenvalue of `I - sum A_j^* A_j - C^* C`.
    pub min_defect_eig: f64,
    /// Largest eigenvalue modulus of the same defect.
    pub max_defect_abs: f64,
}

pub fn classify_pair(p: &OutputPair, tol: &Tolerances) -> PairClass {
    let (eig, _) = hermitian_eigen(&p.contractivity_defect());
    let min = eig.first().copied().unwrap_or(0.0);
    let max_abs_eig = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    PairClass {
        contractive_pair: min >= -tol.psd_tol,
        isometric_pair: max_abs_eig <= tol.psd_tol,
        min_defect_eig: min,
        max_defect_abs: max_abs_eig,
    }
}

/// Error unless the pair is contractive.
pub fn require_contractive_pair(p: &OutputPair, tol: &Tolerances) -> Result<()> {
    let m = min_eigenvalue(&p.contractivity_defect());
    if m < -tol.psd_tol {
        return Err(Error::NotContractivePair { min_eig: m });
    }
    Ok(())
}
