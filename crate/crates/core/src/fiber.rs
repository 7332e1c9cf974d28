//! Polynomials in the eight fiber variables P, Q, R, S, P̄, Q̄, R̄, S̄ with
//! [`Series`] coefficients. These house the torsions as functions on the
//! product of the hypersurface with the 2×2 unitary fiber: (P Q; R S) is the
//! fiber matrix, and the barred symbols are its entrywise conjugates, treated
//! as independent polynomial generators. No unitarity relations are imposed
//! at this level.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::context::{check_same_ctx, BaseVar, VarContext};
use crate::error::AlgebraError;
use crate::rational::GaussRational;
use crate::series::Series;

pub const NUM_FIBER_VARS: usize = 8;

/// One of the eight fiber symbols.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FiberVar {
    P,
    Q,
    R,
    S,
    Pb,
    Qb,
    Rb,
    Sb,
}

impl FiberVar {
    pub const ALL: [FiberVar; NUM_FIBER_VARS] = [
        FiberVar::P,
        FiberVar::Q,
        FiberVar::R,
        FiberVar::S,
        FiberVar::Pb,
        FiberVar::Qb,
        FiberVar::Rb,
        FiberVar::Sb,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Conjugation pairing: an involution exchanging barred and unbarred.
    pub fn conj(self) -> FiberVar {
        Self::ALL[(self.index() + 4) % 8]
    }

    pub fn name(self) -> &'static str {
        match self {
            FiberVar::P => "P",
            FiberVar::Q => "Q",
            FiberVar::R => "R",
            FiberVar::S => "S",
            FiberVar::Pb => "Pb",
            FiberVar::Qb => "Qb",
            FiberVar::Rb => "Rb",
            FiberVar::Sb => "Sb",
        }
    }

    /// Entry (row, col) of the fiber matrix U = (P Q; R S).
    pub fn matrix_entry(row: usize, col: usize) -> FiberVar {
        Self::ALL[2 * row + col]
    }
}

/// Exponent vector over the fiber symbols, graded-lexicographically ordered.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FiberExp(pub [u8; NUM_FIBER_VARS]);

impl FiberExp {
    pub fn zero() -> Self {
        FiberExp([0; NUM_FIBER_VARS])
    }

    pub fn var(v: FiberVar) -> Self {
        let mut e = [0u8; NUM_FIBER_VARS];
        e[v.index()] = 1;
        FiberExp(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn plus(&self, other: &FiberExp) -> FiberExp {
        let mut e = [0u8; NUM_FIBER_VARS];
        for i in 0..NUM_FIBER_VARS {
            e[i] = self.0[i] + other.0[i];
        }
        FiberExp(e)
    }

    pub fn conj(&self) -> FiberExp {
        let mut e = self.0;
        for k in 0..4 {
            e.swap(k, k + 4);
        }
        FiberExp(e)
    }
}

impl Ord for FiberExp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for FiberExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in the fiber variables with series coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct UPoly {
    ctx: Arc<VarContext>,
    terms: BTreeMap<FiberExp, Series>,
}

impl UPoly {
    pub fn zero(ctx: &Arc<VarContext>) -> UPoly {
        UPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_series(s: Series) -> UPoly {
        let ctx = s.ctx().clone();
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(FiberExp::zero(), s);
        }
        UPoly { ctx, terms }
    }

    pub fn constant(ctx: &Arc<VarContext>, c: GaussRational) -> UPoly {
        UPoly::from_series(Series::constant(ctx, c))
    }

    pub fn one(ctx: &Arc<VarContext>) -> UPoly {
        UPoly::constant(ctx, GaussRational::from_int(1))
    }

    pub fn var(ctx: &Arc<VarContext>, v: FiberVar) -> UPoly {
        let mut terms = BTreeMap::new();
        terms.insert(FiberExp::var(v), Series::one(ctx));
        UPoly {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn monomial(e: FiberExp, s: Series) -> Result<UPoly, AlgebraError> {
        let ctx = s.ctx().clone();
        if e.total_degree() > ctx.fiber_cap {
            return Err(AlgebraError::FiberDegreeCap(e.total_degree(), ctx.fiber_cap));
        }
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(e, s);
        }
        Ok(UPoly { ctx, terms })
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FiberExp, &Series)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &FiberExp) -> Series {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| Series::zero(&self.ctx))
    }

    /// Minimum verified degree over all series coefficients.
    pub fn verified_degree(&self) -> u32 {
        self.terms
            .values()
            .map(|s| s.verified_degree())
            .min()
            .unwrap_or(self.ctx.order)
    }

    fn add_term(&mut self, e: FiberExp, s: Series) -> Result<(), AlgebraError> {
        if s.is_zero() {
            return Ok(());
        }
        if e.total_degree() > self.ctx.fiber_cap {
            return Err(AlgebraError::FiberDegreeCap(
                e.total_degree(),
                self.ctx.fiber_cap,
            ));
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&s)?;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, rhs: &UPoly) -> Result<UPoly, AlgebraError> {
        check_same_ctx(&self.ctx, &rhs.ctx)?;
        let mut out = self.clone();
        for (e, s) in &rhs.terms {
            out.add_term(*e, s.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &UPoly) -> Result<UPoly, AlgebraError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> UPoly {
        let mut out = self.clone();
        for s in out.terms.values_mut() {
            *s = s.neg();
        }
        out
    }

    pub fn mul(&self, rhs: &UPoly) -> Result<UPoly, AlgebraError> {
        check_same_ctx(&self.ctx, &rhs.ctx)?;
        let mut out = UPoly::zero(&self.ctx);
        for (ea, sa) in &self.terms {
            for (eb, sb) in &rhs.terms {
                out.add_term(ea.plus(eb), sa.mul(sb)?)?;
            }
        }
        Ok(out)
    }

    pub fn mul_series(&self, s: &Series) -> Result<UPoly, AlgebraError> {
        let mut out = UPoly::zero(&self.ctx);
        for (e, c) in &self.terms {
            out.add_term(*e, c.mul(s)?)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussRational) -> UPoly {
        let mut out = UPoly::zero(&self.ctx);
        for (e, s) in &self.terms {
            let scaled = s.scale(c);
            if !scaled.is_zero() {
                out.terms.insert(*e, scaled);
            }
        }
        out
    }

    /// Conjugation: conjugates series coefficients and swaps each fiber
    /// exponent with its conjugate. An involution.
    pub fn conj(&self) -> UPoly {
        let mut out = UPoly::zero(&self.ctx);
        for (e, s) in &self.terms {
            out.terms.insert(e.conj(), s.conj());
        }
        out
    }

    /// Partial derivative with respect to a base variable, applied to every
    /// series coefficient.
    pub fn diff_base(&self, x: BaseVar) -> UPoly {
        let mut out = UPoly::zero(&self.ctx);
        for (e, s) in &self.terms {
            let d = s.diff(x);
            if !d.is_zero() {
                out.terms.insert(*e, d);
            }
        }
        out
    }

    /// Formal polynomial partial with respect to a fiber variable.
    pub fn diff_fiber(&self, u: FiberVar) -> UPoly {
        let idx = u.index();
        let mut out = UPoly::zero(&self.ctx);
        for (e, s) in &self.terms {
            let k = e.0[idx];
            if k == 0 {
                continue;
            }
            let mut d = *e;
            d.0[idx] -= 1;
            let scaled = s.scale(&GaussRational::from_int(k as i64));
            out.add_term(d, scaled).expect("degree only decreases");
        }
        out
    }

    /// Apply a series transformation to every coefficient.
    pub fn map_series<F>(&self, f: F) -> Result<UPoly, AlgebraError>
    where
        F: Fn(&Series) -> Result<Series, AlgebraError>,
    {
        let mut out = UPoly::zero(&self.ctx);
        for (e, s) in &self.terms {
            out.add_term(*e, f(s)?)?;
        }
        Ok(out)
    }

    /// Evaluate every series coefficient at the origin, leaving an exact
    /// polynomial in the fiber variables alone.
    pub fn eval_series_origin(&self) -> BTreeMap<FiberExp, GaussRational> {
        let mut out = BTreeMap::new();
        for (e, s) in &self.terms {
            let c = s.eval_origin();
            if !c.is_zero() {
                out.insert(*e, c);
            }
        }
        out
    }

    pub fn eq_up_to_degree(&self, rhs: &UPoly, d: u32) -> bool {
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(rhs.terms.keys()).collect();
        keys.into_iter()
            .all(|e| self.coeff(e).eq_up_to_degree(&rhs.coeff(e), d))
    }

    /// Canonical text: fiber monomials in graded-lex order, each coefficient
    /// series parenthesized.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (e, s) in &self.terms {
            if e.is_zero() {
                parts.push(format!("({})", s.render()));
            } else {
                parts.push(format!("({})*{}", s.render(), render_fiber_monomial(e)));
            }
        }
        parts.join(" + ")
    }
}

pub fn render_fiber_monomial(e: &FiberExp) -> String {
    let mut parts = Vec::new();
    for v in FiberVar::ALL {
        let k = e.0[v.index()];
        if k == 1 {
            parts.push(v.name().to_string());
        } else if k > 1 {
            parts.push(format!("{}^{}", v.name(), k));
        }
    }
    parts.join("*")
}

/// Render a fiber polynomial with exact scalar coefficients (the shape the
/// report uses for torsions evaluated at the origin).
pub fn render_fiber_poly_origin(p: &BTreeMap<FiberExp, GaussRational>) -> String {
    if p.is_empty() {
        return "0".to_string();
    }
    let mut parts = Vec::with_capacity(p.len());
    for (e, c) in p {
        if e.is_zero() {
            parts.push(c.render());
        } else {
            parts.push(format!("({})*{}", c.render(), render_fiber_monomial(e)));
        }
    }
    parts.join(" + ")
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<VarContext> {
        VarContext::default_ctx()
    }

    #[test]
    fn conj_is_involution_and_swaps_bars() {
        let c = ctx();
        let p = UPoly::var(&c, FiberVar::P);
        let pb = UPoly::var(&c, FiberVar::Pb);
        assert_eq!(p.conj(), pb);
        assert_eq!(p.conj().conj(), p);
        let mixed = p
            .mul(&UPoly::from_series(Series::var(&c, BaseVar::Z1)))
            .unwrap();
        let expect = pb
            .mul(&UPoly::from_series(Series::var(&c, BaseVar::Zb1)))
            .unwrap();
        assert_eq!(mixed.conj(), expect);
    }

    #[test]
    fn fiber_cap_is_enforced() {
        let c = VarContext::with_fiber_cap(4, 2).unwrap();
        let p = UPoly::var(&c, FiberVar::P);
        let p2 = p.mul(&p).unwrap();
        assert_eq!(
            p2.mul(&p).unwrap_err(),
            AlgebraError::FiberDegreeCap(3, 2)
        );
    }

    #[test]
    fn fiber_partials() {
        let c = ctx();
        let p = UPoly::var(&c, FiberVar::P);
        let q = UPoly::var(&c, FiberVar::Q);
        let f = p.mul(&p).unwrap().mul(&q).unwrap(); // P^2 Q
        let fp = f.diff_fiber(FiberVar::P); // 2 P Q
        assert_eq!(fp, p.mul(&q).unwrap().scale(&GaussRational::from_int(2)));
        assert!(f.diff_fiber(FiberVar::Sb).is_zero());
    }

    #[test]
    fn unitary_determinant_conjugation() {
        // conj(PS - QR) = Pb Sb - Qb Rb
        let c = ctx();
        let det = UPoly::var(&c, FiberVar::P)
            .mul(&UPoly::var(&c, FiberVar::S))
            .unwrap()
            .sub(
                &UPoly::var(&c, FiberVar::Q)
                    .mul(&UPoly::var(&c, FiberVar::R))
                    .unwrap(),
            )
            .unwrap();
        let detb = UPoly::var(&c, FiberVar::Pb)
            .mul(&UPoly::var(&c, FiberVar::Sb))
            .unwrap()
            .sub(
                &UPoly::var(&c, FiberVar::Qb)
                    .mul(&UPoly::var(&c, FiberVar::Rb))
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(det.conj(), detb);
    }
}
