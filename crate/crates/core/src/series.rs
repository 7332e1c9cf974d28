//! Truncated multivariate formal power series with exact coefficients.
//!
//! A [`Series`] is a finite sum of monomials in z₁..z₄, z̄₁..z̄₄, v of total
//! degree ≤ N with [`GaussRational`] coefficients. All ring operations are
//! exact on coefficients up to degree N; multiplication discards terms past
//! the truncation. Each series also carries an *effective verified degree*
//! that starts at N and drops by one per formal differentiation, so that
//! identities are never asserted beyond the depth actually computed.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;

use crate::context::{check_same_ctx, BaseExp, BaseVar, VarContext};
use crate::error::AlgebraError;
use crate::rational::GaussRational;

#[derive(Clone)]
pub struct Series {
    ctx: Arc<VarContext>,
    terms: BTreeMap<BaseExp, GaussRational>,
    verified: u32,
}

/// Equality compares the stored terms (and the context), not the verified-
/// degree bookkeeping.
impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.terms == other.terms
    }
}

impl Eq for Series {}

impl Series {
    pub fn zero(ctx: &Arc<VarContext>) -> Series {
        Series {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
            verified: ctx.order,
        }
    }

    pub fn constant(ctx: &Arc<VarContext>, c: GaussRational) -> Series {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(BaseExp::zero(), c);
        }
        Series {
            ctx: ctx.clone(),
            terms,
            verified: ctx.order,
        }
    }

    pub fn one(ctx: &Arc<VarContext>) -> Series {
        Series::constant(ctx, GaussRational::from_int(1))
    }

    pub fn i(ctx: &Arc<VarContext>) -> Series {
        Series::constant(ctx, GaussRational::i())
    }

    pub fn var(ctx: &Arc<VarContext>, v: BaseVar) -> Series {
        let mut terms = BTreeMap::new();
        terms.insert(BaseExp::var(v), GaussRational::from_int(1));
        Series {
            ctx: ctx.clone(),
            terms,
            verified: ctx.order,
        }
    }

    /// Build from raw terms, dropping zeros and over-degree monomials.
    pub fn from_terms<I>(ctx: &Arc<VarContext>, it: I) -> Series
    where
        I: IntoIterator<Item = (BaseExp, GaussRational)>,
    {
        let mut s = Series::zero(ctx);
        for (e, c) in it {
            s.add_term(e, c);
        }
        s
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn verified_degree(&self) -> u32 {
        self.verified
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_zero())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BaseExp, &GaussRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &BaseExp) -> GaussRational {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| GaussRational::from_int(0))
    }

    /// The constant-term coefficient (the value at the origin).
    pub fn eval_origin(&self) -> GaussRational {
        self.coeff(&BaseExp::zero())
    }

    fn add_term(&mut self, e: BaseExp, c: GaussRational) {
        if c.is_zero() || e.total_degree() > self.ctx.order {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn with_verified(mut self, verified: u32) -> Series {
        self.verified = verified.min(self.ctx.order);
        self
    }

    pub fn add(&self, rhs: &Series) -> Result<Series, AlgebraError> {
        check_same_ctx(&self.ctx, &rhs.ctx)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        Ok(out.with_verified(self.verified.min(rhs.verified)))
    }

    pub fn sub(&self, rhs: &Series) -> Result<Series, AlgebraError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Series {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &GaussRational) -> Series {
        if c.is_zero() {
            return Series::zero(&self.ctx).with_verified(self.verified);
        }
        let mut out = Series::zero(&self.ctx);
        for (e, v) in &self.terms {
            out.terms.insert(*e, v * c);
        }
        out.with_verified(self.verified)
    }

    pub fn mul(&self, rhs: &Series) -> Result<Series, AlgebraError> {
        check_same_ctx(&self.ctx, &rhs.ctx)?;
        let order = self.ctx.order;
        let mut out = Series::zero(&self.ctx);
        for (ea, ca) in &self.terms {
            let da = ea.total_degree();
            if da > order {
                continue;
            }
            for (eb, cb) in &rhs.terms {
                if da + eb.total_degree() > order {
                    break; // rhs iterates in graded order
                }
                out.add_term(ea.plus(eb), ca * cb);
            }
        }
        Ok(out.with_verified(self.verified.min(rhs.verified)))
    }

    pub fn pow(&self, n: u32) -> Result<Series, AlgebraError> {
        let mut result = Series::one(&self.ctx).with_verified(self.verified);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Multiplicative inverse by Newton iteration: g ← g(2 − fg), doubling
    /// the correct degree each step. Exact in the truncated ring.
    pub fn inverse(&self) -> Result<Series, AlgebraError> {
        let c0 = self.eval_origin();
        let inv0 = c0.inverse().ok_or(AlgebraError::DegenerateAtOrigin)?;
        let mut g = Series::constant(&self.ctx, inv0);
        let two = Series::constant(&self.ctx, GaussRational::from_int(2));
        let mut correct: u32 = 0;
        while correct < self.ctx.order {
            let fg = self.mul(&g)?;
            g = g.mul(&two.sub(&fg)?)?;
            correct = 2 * correct + 1;
        }
        Ok(g.with_verified(self.verified))
    }

    /// Principal square root. Requires the constant term to be real, strictly
    /// positive, and a perfect rational square; s(0) = +√(f(0)) and s·s = f
    /// exactly up to the truncation degree.
    pub fn sqrt(&self) -> Result<Series, AlgebraError> {
        let c0 = self.eval_origin();
        if !c0.is_real() {
            return Err(AlgebraError::BranchError);
        }
        use num_traits::Signed;
        if !c0.re().is_positive() {
            return Err(AlgebraError::BranchError);
        }
        let root = GaussRational::sqrt_exact_rational(c0.re()).ok_or(AlgebraError::BranchError)?;
        // Newton for y = 1/√f: y ← y(3 − f y²)/2; then s = f·y.
        let inv_root = GaussRational::from_rational(root)
            .inverse()
            .expect("positive root");
        let mut y = Series::constant(&self.ctx, inv_root);
        let three = Series::constant(&self.ctx, GaussRational::from_int(3));
        let half = GaussRational::from_ratio(1, 2);
        let mut correct: u32 = 0;
        while correct < self.ctx.order {
            let fyy = self.mul(&y.mul(&y)?)?;
            y = y.mul(&three.sub(&fyy)?)?.scale(&half);
            correct = 2 * correct + 1;
        }
        Ok(self.mul(&y)?.with_verified(self.verified))
    }

    /// Formal partial derivative with respect to a base variable. Consumes one
    /// order of verified depth.
    pub fn diff(&self, x: BaseVar) -> Series {
        let idx = x.index();
        let mut out = Series::zero(&self.ctx);
        for (e, c) in &self.terms {
            let k = e.0[idx];
            if k == 0 {
                continue;
            }
            let mut d = *e;
            d.0[idx] -= 1;
            out.add_term(d, c.scale(&BigRational::from_integer(k.into())));
        }
        out.with_verified(self.verified.saturating_sub(1))
    }

    /// Conjugation: swaps each zₖ-exponent with its z̄ₖ-exponent (v fixed)
    /// and conjugates every coefficient. A ring involution.
    pub fn conj(&self) -> Series {
        let mut out = Series::zero(&self.ctx);
        for (e, c) in &self.terms {
            out.terms.insert(e.conj(), c.conj());
        }
        out.with_verified(self.verified)
    }

    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    pub fn depends_on(&self, v: BaseVar) -> bool {
        self.terms.keys().any(|e| e.get(v) > 0)
    }

    /// Largest total degree with a nonzero stored coefficient.
    pub fn max_degree(&self) -> u32 {
        self.terms
            .keys()
            .next_back()
            .map(|e| e.total_degree())
            .unwrap_or(0)
    }

    /// Equality of all stored coefficients of total degree ≤ d.
    pub fn eq_up_to_degree(&self, rhs: &Series, d: u32) -> bool {
        let keys: std::collections::BTreeSet<_> = self
            .terms
            .keys()
            .chain(rhs.terms.keys())
            .filter(|e| e.total_degree() <= d)
            .collect();
        keys.into_iter().all(|e| self.coeff(e) == rhs.coeff(e))
    }

    /// Re-embed the stored terms into another context, truncating to its
    /// order. Errors if a nonzero term exceeds the target order.
    pub fn reinterpret(&self, ctx: &Arc<VarContext>) -> Result<Series, AlgebraError> {
        for e in self.terms.keys() {
            if e.total_degree() > ctx.order {
                return Err(AlgebraError::OrderTooSmall(ctx.order));
            }
        }
        let mut out = Series::zero(ctx);
        for (e, c) in &self.terms {
            out.terms.insert(*e, c.clone());
        }
        Ok(out)
    }

    /// Canonical text rendering: terms sorted by (total degree, lexicographic
    /// exponent); every non-constant term as `(coeff)*mono`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if e.is_zero() {
                parts.push(c.render());
            } else {
                parts.push(format!("({})*{}", c.render(), render_base_monomial(e)));
            }
        }
        parts.join(" + ")
    }
}

pub fn render_base_monomial(e: &BaseExp) -> String {
    let mut parts = Vec::new();
    for v in BaseVar::ALL {
        let k = e.get(v);
        if k == 1 {
            parts.push(v.name().to_string());
        } else if k > 1 {
            parts.push(format!("{}^{}", v.name(), k));
        }
    }
    parts.join("*")
}

impl std::fmt::Debug for Series {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render())
    }
}
