//! The correspondence between Q-isotropic n₊-planes and matrices A with
//! A*A = Id, for the indefinite Hermitian form
//! Q(x, y) = Σ|xᵢ|² − Σ|yⱼ|² on ℂ^{n₊+n₋}, n₊ ≤ n₋.
//!
//! A plane H on which Q vanishes identically has its top block B_H
//! invertible, and H ↦ A_H·B_H⁻¹ is a bijection onto
//! U_{n₋,n₊} = {A ∈ M_{n₋×n₊}(ℂ) : A*A = Id}; the inverse sends A to the
//! graph plane with basis columns (Id; A).

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Isotropy test tolerance.
pub const ISOTROPY_TOL: f64 = 1e-10;
/// Tolerance for the A*A = Id defect of produced matrices.
pub const UNITARY_TOL: f64 = 1e-9;
/// Rank tolerance for plane bases (smallest singular value).
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SommerError {
    #[error("dimension mismatch between basis and signature form")]
    DimensionMismatch,
    #[error("basis columns are not linearly independent")]
    RankDeficient,
    #[error("inconsistent input: the top block of an isotropic plane must be invertible")]
    InconsistentInput,
    #[error("matrix is not an isometry (A*A far from Id)")]
    NotIsometric,
}

/// The signature form Q(x,y) = Σ|xᵢ|² − Σ|yⱼ|² on ℂ^{n₊+n₋}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigForm {
    pub n_plus: usize,
    pub n_minus: usize,
}

impl SigForm {
    pub fn new(n_plus: usize, n_minus: usize) -> SigForm {
        assert!(n_plus >= 1 && n_plus <= n_minus, "require 1 ≤ n₊ ≤ n₋");
        SigForm { n_plus, n_minus }
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus
    }

    fn metric_sign(&self, row: usize) -> f64 {
        if row < self.n_plus {
            1.0
        } else {
            -1.0
        }
    }
}

/// A basis of an n₊-plane in ℂ^{n₊+n₋}: the columns of an (n₊+n₋)×n₊ matrix.
#[derive(Debug, Clone)]
pub struct PlaneBasis {
    cols: DMatrix<C64>,
}

impl PlaneBasis {
    pub fn new(cols: DMatrix<C64>) -> Result<PlaneBasis, SommerError> {
        if cols.ncols() == 0 || cols.nrows() < cols.ncols() {
            return Err(SommerError::DimensionMismatch);
        }
        let svd = cols.clone().svd(false, false);
        let min_sv = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min_sv > RANK_TOL) {
            return Err(SommerError::RankDeficient);
        }
        Ok(PlaneBasis { cols })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.cols
    }

    /// Change of basis by an invertible n₊×n₊ matrix (same plane).
    pub fn change_basis(&self, g: &DMatrix<C64>) -> Result<PlaneBasis, SommerError> {
        PlaneBasis::new(&self.cols * g)
    }
}

/// An n₋×n₊ matrix expected to satisfy A*A ≈ Id.
#[derive(Debug, Clone)]
pub struct UnitaryLike {
    pub a: DMatrix<C64>,
}

impl UnitaryLike {
    /// Maximum entry magnitude of A*A − Id.
    pub fn isometry_defect(&self) -> f64 {
        let p = self.a.ncols();
        let gram = self.a.adjoint() * &self.a - DMatrix::<C64>::identity(p, p);
        max_abs(&gram)
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The full sesquilinear Gram matrix of the indefinite form on the basis:
/// G_{ij} = Q(vᵢ, vⱼ) = Σₐ εₐ · conj(vᵢ)ₐ (vⱼ)ₐ.
pub fn indefinite_gram(basis: &PlaneBasis, form: &SigForm) -> Result<DMatrix<C64>, SommerError> {
    let v = basis.matrix();
    if v.nrows() != form.dim() {
        return Err(SommerError::DimensionMismatch);
    }
    let mut ev = v.clone();
    for r in 0..v.nrows() {
        let s = form.metric_sign(r);
        for c in 0..v.ncols() {
            ev[(r, c)] *= C64::new(s, 0.0);
        }
    }
    Ok(v.adjoint() * ev)
}

/// True iff every entry of the Gram matrix of the indefinite form has
/// magnitude at most `tol` (sesquilinear polarization, not just the
/// diagonal).
pub fn is_isotropic(basis: &PlaneBasis, form: &SigForm, tol: f64) -> Result<bool, SommerError> {
    Ok(max_abs(&indefinite_gram(basis, form)?) <= tol)
}

/// Split the basis into its top block B_H and bottom block A_H and return
/// A_H·B_H⁻¹. Isotropy of the plane forces B_H invertible, so a numerically
/// singular top block means the input was not an isotropic plane basis.
pub fn plane_to_unitary(basis: &PlaneBasis, form: &SigForm) -> Result<UnitaryLike, SommerError> {
    let v = basis.matrix();
    if v.nrows() != form.dim() || v.ncols() != form.n_plus {
        return Err(SommerError::DimensionMismatch);
    }
    let p = form.n_plus;
    let b_h = v.rows(0, p).into_owned();
    let a_h = v.rows(p, form.n_minus).into_owned();
    let b_inv = b_h.try_inverse().ok_or(SommerError::InconsistentInput)?;
    let u = UnitaryLike { a: a_h * b_inv };
    if u.isometry_defect() > UNITARY_TOL {
        return Err(SommerError::InconsistentInput);
    }
    Ok(u)
}

/// The graph plane of an isometry: basis columns (Id_{n₊}; U).
pub fn unitary_to_plane(u: &UnitaryLike) -> Result<PlaneBasis, SommerError> {
    if u.isometry_defect() > UNITARY_TOL {
        return Err(SommerError::NotIsometric);
    }
    let p = u.a.ncols();
    let n = p + u.a.nrows();
    let mut cols = DMatrix::<C64>::zeros(n, p);
    for i in 0..p {
        cols[(i, i)] = C64::new(1.0, 0.0);
    }
    for r in 0..u.a.nrows() {
        for c in 0..p {
            cols[(p + r, c)] = u.a[(r, c)];
        }
    }
    PlaneBasis::new(cols)
}

/// Standard complex Gaussian matrix.
pub fn random_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        C64::new(
            r * (2.0 * std::f64::consts::PI * u2).cos(),
            r * (2.0 * std::f64::consts::PI * u2).sin(),
        ) / 2f64.sqrt()
    })
}

/// Haar-ish random unitary: QR of a complex Gaussian with the R diagonal
/// phases absorbed into Q.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let g = random_gaussian(rng, n, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A random isotropic plane: the graph of a random n₋×n₊ isometry, built by
/// truncating a random unitary of size n₋+... no surplus: the first n₊
/// columns of a random U(n₋) work whenever n₊ ≤ n₋.
pub fn random_isotropic_plane(rng: &mut impl Rng, form: &SigForm) -> PlaneBasis {
    let u_big = random_unitary(rng, form.n_minus);
    let a = u_big.columns(0, form.n_plus).into_owned();
    unitary_to_plane(&UnitaryLike { a }).expect("graph of an isometry is isotropic")
}

/// Orthogonal projector onto the column span (thin QR).
pub fn span_projector(basis: &PlaneBasis) -> DMatrix<C64> {
    let qr = basis.matrix().clone().qr();
    let q = qr.q();
    &q * q.adjoint()
}

/// Frobenius distance between the column spans of two bases.
pub fn span_distance(a: &PlaneBasis, b: &PlaneBasis) -> f64 {
    let d = span_projector(a) - span_projector(b);
    d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// exp(M) by scaled Taylor summation; adequate for the small matrices the
/// finite-difference Maurer-Cartan checks use.
pub fn matrix_exp(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm = max_abs(m);
    let scal = norm.log2().ceil().max(0.0) as u32;
    let scaled = m / C64::new(2f64.powi(scal as i32), 0.0);
    let mut acc = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=24 {
        term = (&term * &scaled) / C64::new(k as f64, 0.0);
        acc += &term;
    }
    let mut out = acc;
    for _ in 0..scal {
        out = &out * &out;
    }
    out
}
