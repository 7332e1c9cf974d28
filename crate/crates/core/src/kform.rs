//! Exterior algebra of differential forms with [`UPoly`] coefficients.
//!
//! Forms of degree 0..3 live over a declared covector alphabet: the base
//! covectors dz₁..dz₄, dz̄₁..dz̄₄, dv; the coframe covectors θ, α¹..α⁴,
//! ᾱ¹..ᾱ⁴; and the fiber differentials dP..dS̄ which may extend either
//! basis. Anticommutativity is structural: keys are strictly increasing
//! covector tuples, with sign tracking on every reordering.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::context::{check_same_ctx, BaseVar, VarContext};
use crate::error::AlgebraError;
use crate::fiber::{FiberVar, UPoly};
use crate::rational::GaussRational;
use crate::series::Series;

/// A covector symbol. The discriminant order is the canonical covector
/// ordering: θ < α¹ < … < ᾱ⁴ in the coframe basis, dz₁ < … < dz̄₄ < dv in
/// the base basis, and fiber differentials after everything else.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Covector {
    Theta,
    A1,
    A2,
    A3,
    A4,
    Ab1,
    Ab2,
    Ab3,
    Ab4,
    Dz1,
    Dz2,
    Dz3,
    Dz4,
    Dzb1,
    Dzb2,
    Dzb3,
    Dzb4,
    Dv,
    DP,
    DQ,
    DR,
    DS,
    DPb,
    DQb,
    DRb,
    DSb,
}

impl Covector {
    /// α¹..α⁴ indexed 0..3.
    pub fn alpha(i: usize) -> Covector {
        debug_assert!(i < 4);
        [Covector::A1, Covector::A2, Covector::A3, Covector::A4][i]
    }

    /// ᾱ¹..ᾱ⁴ indexed 0..3.
    pub fn alpha_bar(i: usize) -> Covector {
        debug_assert!(i < 4);
        [Covector::Ab1, Covector::Ab2, Covector::Ab3, Covector::Ab4][i]
    }

    /// dz₁..dz₄ indexed 0..3.
    pub fn dz(i: usize) -> Covector {
        debug_assert!(i < 4);
        [Covector::Dz1, Covector::Dz2, Covector::Dz3, Covector::Dz4][i]
    }

    /// dz̄₁..dz̄₄ indexed 0..3.
    pub fn dzb(i: usize) -> Covector {
        debug_assert!(i < 4);
        [Covector::Dzb1, Covector::Dzb2, Covector::Dzb3, Covector::Dzb4][i]
    }

    pub fn base_differential(v: BaseVar) -> Covector {
        match v {
            BaseVar::Z1 => Covector::Dz1,
            BaseVar::Z2 => Covector::Dz2,
            BaseVar::Z3 => Covector::Dz3,
            BaseVar::Z4 => Covector::Dz4,
            BaseVar::Zb1 => Covector::Dzb1,
            BaseVar::Zb2 => Covector::Dzb2,
            BaseVar::Zb3 => Covector::Dzb3,
            BaseVar::Zb4 => Covector::Dzb4,
            BaseVar::V => Covector::Dv,
        }
    }

    pub fn fiber_differential(u: FiberVar) -> Covector {
        match u {
            FiberVar::P => Covector::DP,
            FiberVar::Q => Covector::DQ,
            FiberVar::R => Covector::DR,
            FiberVar::S => Covector::DS,
            FiberVar::Pb => Covector::DPb,
            FiberVar::Qb => Covector::DQb,
            FiberVar::Rb => Covector::DRb,
            FiberVar::Sb => Covector::DSb,
        }
    }

    /// Conjugate partner; θ and dv are self-conjugate.
    pub fn conj(self) -> Covector {
        use Covector::*;
        match self {
            Theta => Theta,
            A1 => Ab1,
            A2 => Ab2,
            A3 => Ab3,
            A4 => Ab4,
            Ab1 => A1,
            Ab2 => A2,
            Ab3 => A3,
            Ab4 => A4,
            Dz1 => Dzb1,
            Dz2 => Dzb2,
            Dz3 => Dzb3,
            Dz4 => Dzb4,
            Dzb1 => Dz1,
            Dzb2 => Dz2,
            Dzb3 => Dz3,
            Dzb4 => Dz4,
            Dv => Dv,
            DP => DPb,
            DQ => DQb,
            DR => DRb,
            DS => DSb,
            DPb => DP,
            DQb => DQ,
            DRb => DR,
            DSb => DS,
        }
    }

    pub fn is_coframe(self) -> bool {
        use Covector::*;
        matches!(self, Theta | A1 | A2 | A3 | A4 | Ab1 | Ab2 | Ab3 | Ab4)
    }

    pub fn is_base(self) -> bool {
        use Covector::*;
        matches!(
            self,
            Dz1 | Dz2 | Dz3 | Dz4 | Dzb1 | Dzb2 | Dzb3 | Dzb4 | Dv
        )
    }

    pub fn is_fiber(self) -> bool {
        !self.is_coframe() && !self.is_base()
    }

    pub fn name(self) -> &'static str {
        use Covector::*;
        match self {
            Theta => "theta",
            A1 => "a1",
            A2 => "a2",
            A3 => "a3",
            A4 => "a4",
            Ab1 => "ab1",
            Ab2 => "ab2",
            Ab3 => "ab3",
            Ab4 => "ab4",
            Dz1 => "dz1",
            Dz2 => "dz2",
            Dz3 => "dz3",
            Dz4 => "dz4",
            Dzb1 => "dzb1",
            Dzb2 => "dzb2",
            Dzb3 => "dzb3",
            Dzb4 => "dzb4",
            Dv => "dv",
            DP => "dP",
            DQ => "dQ",
            DR => "dR",
            DS => "dS",
            DPb => "dPb",
            DQb => "dQb",
            DRb => "dRb",
            DSb => "dSb",
        }
    }
}

/// Which declared basis a form lives over (fiber differentials extend both).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BasisKind {
    Base,
    Coframe,
}

/// An ordered covector alphabet. Mostly informational; operations validate
/// basis compatibility structurally.
#[derive(Clone, Debug)]
pub struct CovectorBasis {
    pub kind: BasisKind,
    pub symbols: Vec<Covector>,
}

impl CovectorBasis {
    pub fn base() -> CovectorBasis {
        use Covector::*;
        CovectorBasis {
            kind: BasisKind::Base,
            symbols: vec![Dz1, Dz2, Dz3, Dz4, Dzb1, Dzb2, Dzb3, Dzb4, Dv],
        }
    }

    pub fn coframe() -> CovectorBasis {
        use Covector::*;
        CovectorBasis {
            kind: BasisKind::Coframe,
            symbols: vec![Theta, A1, A2, A3, A4, Ab1, Ab2, Ab3, Ab4],
        }
    }

    /// Either basis extended by the eight fiber differentials.
    pub fn with_fiber(mut self) -> CovectorBasis {
        use Covector::*;
        self.symbols
            .extend([DP, DQ, DR, DS, DPb, DQb, DRb, DSb]);
        self
    }
}

/// Sort a covector tuple into strictly increasing order, tracking the sign of
/// the permutation. `None` when a covector repeats (the wedge vanishes).
fn canonical_key(mut key: Vec<Covector>) -> Option<(Vec<Covector>, i8)> {
    let mut sign = 1i8;
    // insertion sort, counting swaps
    for i in 1..key.len() {
        let mut j = i;
        while j > 0 && key[j - 1] > key[j] {
            key.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in key.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((key, sign))
}

/// Exterior form of degree 0..3 with `UPoly` coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct KForm {
    ctx: Arc<VarContext>,
    degree: u8,
    terms: BTreeMap<Vec<Covector>, UPoly>,
}

impl KForm {
    pub fn zero(ctx: &Arc<VarContext>, degree: u8) -> KForm {
        assert!(degree <= 3, "forms of degree > 3 are not supported");
        KForm {
            ctx: ctx.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 form from a coefficient.
    pub fn scalar(c: UPoly) -> KForm {
        let ctx = c.ctx().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        KForm {
            ctx,
            degree: 0,
            terms,
        }
    }

    pub fn one_form(cov: Covector, c: UPoly) -> KForm {
        let ctx = c.ctx().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![cov], c);
        }
        KForm {
            ctx,
            degree: 1,
            terms,
        }
    }

    /// A monomial form with the key put in canonical order (sign absorbed).
    pub fn monomial(ctx: &Arc<VarContext>, key: &[Covector], c: UPoly) -> KForm {
        let mut out = KForm::zero(ctx, key.len() as u8);
        out.add_term(key.to_vec(), c).expect("monomial within caps");
        out
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Covector>, &UPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Which basis the form's non-fiber covectors belong to; `None` when the
    /// form uses only fiber covectors (compatible with both).
    pub fn basis_kind(&self) -> Result<Option<BasisKind>, AlgebraError> {
        let mut kind = None;
        for key in self.terms.keys() {
            for c in key {
                let k = if c.is_coframe() {
                    Some(BasisKind::Coframe)
                } else if c.is_base() {
                    Some(BasisKind::Base)
                } else {
                    None
                };
                match (kind, k) {
                    (None, some) => kind = some,
                    (Some(a), Some(b)) if a != b => return Err(AlgebraError::MixedBasis),
                    _ => {}
                }
            }
        }
        Ok(kind)
    }

    fn add_term(&mut self, key: Vec<Covector>, c: UPoly) -> Result<(), AlgebraError> {
        if c.is_zero() {
            return Ok(());
        }
        debug_assert_eq!(key.len(), self.degree as usize);
        let (key, sign) = match canonical_key(key) {
            Some(ks) => ks,
            None => return Ok(()),
        };
        let c = if sign < 0 { c.neg() } else { c };
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&c)?;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, rhs: &KForm) -> Result<KForm, AlgebraError> {
        check_same_ctx(&self.ctx, &rhs.ctx)?;
        assert_eq!(self.degree, rhs.degree, "cannot add forms of unequal degree");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &KForm) -> Result<KForm, AlgebraError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> KForm {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, c: &UPoly) -> Result<KForm, AlgebraError> {
        let mut out = KForm::zero(&self.ctx, self.degree);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.mul(c)?)?;
        }
        Ok(out)
    }

    pub fn scale_series(&self, s: &Series) -> Result<KForm, AlgebraError> {
        self.scale(&UPoly::from_series(s.clone()))
    }

    pub fn scale_gauss(&self, g: &GaussRational) -> KForm {
        let mut out = KForm::zero(&self.ctx, self.degree);
        for (k, v) in &self.terms {
            let scaled = v.scale(g);
            if !scaled.is_zero() {
                out.terms.insert(k.clone(), scaled);
            }
        }
        out
    }

    /// Graded wedge product with exact sign bookkeeping.
    pub fn wedge(&self, rhs: &KForm) -> Result<KForm, AlgebraError> {
        check_same_ctx(&self.ctx, &rhs.ctx)?;
        let deg = self.degree as u32 + rhs.degree as u32;
        if deg > 3 {
            return Err(AlgebraError::DegreeOverflow);
        }
        // reject cross-basis products eagerly
        match (self.basis_kind()?, rhs.basis_kind()?) {
            (Some(a), Some(b)) if a != b => return Err(AlgebraError::MixedBasis),
            _ => {}
        }
        let mut out = KForm::zero(&self.ctx, deg as u8);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                out.add_term(key, ca.mul(cb)?)?;
            }
        }
        Ok(out)
    }

    /// Conjugation: conjugates coefficients and maps each covector to its
    /// conjugate partner, recanonicalizing with signs.
    pub fn conj_form(&self) -> KForm {
        let mut out = KForm::zero(&self.ctx, self.degree);
        for (k, c) in &self.terms {
            let key: Vec<Covector> = k.iter().map(|cv| cv.conj()).collect();
            out.add_term(key, c.conj()).expect("conjugation preserves caps");
        }
        out
    }

    /// Exterior derivative of a form over base covectors (possibly extended
    /// by fiber covectors): d(f·dx^I) = Σₓ (∂ₓf) dx∧dx^I over the nine base
    /// variables plus Σᵤ (∂f/∂u) du∧dx^I over the eight fiber variables.
    /// Every basis covector is closed.
    pub fn ext_d(&self) -> Result<KForm, AlgebraError> {
        if self.degree >= 3 {
            return Err(AlgebraError::DegreeOverflow);
        }
        if self.basis_kind()? == Some(BasisKind::Coframe) {
            return Err(AlgebraError::NotBaseBasis);
        }
        let mut out = KForm::zero(&self.ctx, self.degree + 1);
        for (key, coeff) in &self.terms {
            for (_, s) in coeff.iter() {
                if s.verified_degree() == 0 && !s.is_constant() {
                    return Err(AlgebraError::VerifiedDegreeExhausted);
                }
            }
            for x in BaseVar::ALL {
                let d = coeff.diff_base(x);
                if d.is_zero() {
                    continue;
                }
                let mut k = vec![Covector::base_differential(x)];
                k.extend_from_slice(key);
                out.add_term(k, d)?;
            }
            for u in FiberVar::ALL {
                let d = coeff.diff_fiber(u);
                if d.is_zero() {
                    continue;
                }
                let mut k = vec![Covector::fiber_differential(u)];
                k.extend_from_slice(key);
                out.add_term(k, d)?;
            }
        }
        Ok(out)
    }

    /// Replace covectors by 1-forms, multilinearly. Covectors not in the map
    /// stay themselves. The replacement forms must all share one basis.
    pub fn substitute(&self, map: &BTreeMap<Covector, KForm>) -> Result<KForm, AlgebraError> {
        let mut out = KForm::zero(&self.ctx, self.degree);
        for (key, coeff) in &self.terms {
            let mut acc = KForm::scalar(coeff.clone());
            for cov in key {
                let factor = match map.get(cov) {
                    Some(f) => {
                        assert_eq!(f.degree, 1, "substitution target must be a 1-form");
                        f.clone()
                    }
                    None => KForm::one_form(*cov, UPoly::one(&self.ctx)),
                };
                acc = acc.wedge(&factor)?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// The coefficient at a (possibly unordered) covector tuple, with the
    /// canonical sign; zero if absent or if the tuple repeats a covector.
    pub fn collect_coefficient(&self, key: &[Covector]) -> UPoly {
        assert_eq!(key.len(), self.degree as usize, "key degree mismatch");
        match canonical_key(key.to_vec()) {
            None => UPoly::zero(&self.ctx),
            Some((k, sign)) => {
                let c = self
                    .terms
                    .get(&k)
                    .cloned()
                    .unwrap_or_else(|| UPoly::zero(&self.ctx));
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    pub fn contains_covector(&self, pred: impl Fn(Covector) -> bool) -> bool {
        self.terms.keys().any(|k| k.iter().any(|&c| pred(c)))
    }

    pub fn eq_up_to_degree(&self, rhs: &KForm, d: u32) -> bool {
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(rhs.terms.keys()).collect();
        keys.into_iter().all(|k| {
            self.collect_coefficient(k)
                .eq_up_to_degree(&rhs.collect_coefficient(k), d)
        })
    }

    /// Canonical text rendering: sorted keys, signed coefficients.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            if k.is_empty() {
                parts.push(format!("({})", c.render()));
            } else {
                let covs: Vec<&str> = k.iter().map(|cv| cv.name()).collect();
                parts.push(format!("({})*{}", c.render(), covs.join("∧")));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for KForm {
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

    fn dz(c: &Arc<VarContext>, i: usize) -> KForm {
        KForm::one_form(Covector::dz(i), UPoly::one(c))
    }

    fn dzb(c: &Arc<VarContext>, i: usize) -> KForm {
        KForm::one_form(Covector::dzb(i), UPoly::one(c))
    }

    #[test]
    fn wedge_squares_to_zero_and_anticommutes() {
        let c = ctx();
        let a = dz(&c, 0);
        let b = dzb(&c, 0);
        assert!(a.wedge(&a).unwrap().is_zero());
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn wedge_coefficient_product() {
        let c = ctx();
        let f = UPoly::from_series(Series::var(&c, BaseVar::Z1));
        let g = UPoly::from_series(Series::var(&c, BaseVar::Zb2));
        let w = KForm::one_form(Covector::Dz1, f.clone())
            .wedge(&KForm::one_form(Covector::Dz2, g.clone()))
            .unwrap();
        assert_eq!(
            w.collect_coefficient(&[Covector::Dz1, Covector::Dz2]),
            f.mul(&g).unwrap()
        );
    }

    #[test]
    fn ext_d_examples() {
        let c = ctx();
        // d(z1 dz2) = dz1 ∧ dz2
        let w = KForm::one_form(Covector::Dz2, UPoly::from_series(Series::var(&c, BaseVar::Z1)));
        let d = w.ext_d().unwrap();
        assert_eq!(
            d,
            KForm::monomial(&c, &[Covector::Dz1, Covector::Dz2], UPoly::one(&c))
        );
        // d(P dz1) = dP ∧ dz1
        let w2 = KForm::one_form(Covector::Dz1, UPoly::var(&c, FiberVar::P));
        let d2 = w2.ext_d().unwrap();
        assert_eq!(
            d2,
            KForm::monomial(&c, &[Covector::DP, Covector::Dz1], UPoly::one(&c))
        );
    }

    #[test]
    fn d_squared_is_zero_scalar() {
        let c = ctx();
        let f = Series::var(&c, BaseVar::Z1)
            .mul(&Series::var(&c, BaseVar::Zb2))
            .unwrap()
            .add(&Series::var(&c, BaseVar::V).pow(2).unwrap())
            .unwrap();
        let w = KForm::scalar(UPoly::from_series(f));
        let dd = w.ext_d().unwrap().ext_d().unwrap();
        assert!(dd.is_zero());
    }

    #[test]
    fn conj_form_is_involution() {
        let c = ctx();
        let w = KForm::one_form(Covector::Dz1, UPoly::from_series(Series::i(&c)))
            .add(&KForm::one_form(
                Covector::Dzb2,
                UPoly::var(&c, FiberVar::P),
            ))
            .unwrap();
        assert_eq!(w.conj_form().conj_form(), w);
        // conj(i dz1∧dzb1) = i dz1∧dzb1
        let two = KForm::monomial(
            &c,
            &[Covector::Dz1, Covector::Dzb1],
            UPoly::from_series(Series::i(&c)),
        );
        assert_eq!(two.conj_form(), two);
    }

    #[test]
    fn collect_respects_sign_convention() {
        let c = ctx();
        let w = KForm::monomial(
            &c,
            &[Covector::A1, Covector::Ab1],
            UPoly::from_series(Series::i(&c)),
        );
        let pos = w.collect_coefficient(&[Covector::A1, Covector::Ab1]);
        let neg = w.collect_coefficient(&[Covector::Ab1, Covector::A1]);
        assert_eq!(pos, UPoly::from_series(Series::i(&c)));
        assert_eq!(neg, pos.neg());
    }

    #[test]
    fn mixed_basis_rejected() {
        let c = ctx();
        let a = KForm::one_form(Covector::A1, UPoly::one(&c));
        let b = dz(&c, 0);
        assert_eq!(a.wedge(&b).unwrap_err(), AlgebraError::MixedBasis);
        assert_eq!(a.ext_d().unwrap_err(), AlgebraError::NotBaseBasis);
    }

    #[test]
    fn degree_overflow_rejected() {
        let c = ctx();
        let w = dz(&c, 0)
            .wedge(&dz(&c, 1))
            .unwrap()
            .wedge(&dz(&c, 2))
            .unwrap();
        assert_eq!(w.degree(), 3);
        assert_eq!(w.wedge(&dz(&c, 3)).unwrap_err(), AlgebraError::DegreeOverflow);
    }
}
