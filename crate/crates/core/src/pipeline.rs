//! The geometric computation chain for a rigid hypersurface u = F(z, z̄) of
//! Levi signature (2,2): contact form, Levi matrix, adapted coframe and dual
//! frame, structure 2-forms, torsion extraction, absorption, the obstruction
//! pair, and the τ/Σ matrices with their structural identities.
//!
//! Conventions. The contact form is normalized as
//!   θ = −½·(dv + i·Σₖ F_{zₖ} dzᵏ − i·Σₖ F_{z̄ₖ} dz̄ᵏ),
//! so that dθ = i·Σ H_{jk} dzʲ∧dz̄ᵏ holds exactly with H the complex Hessian
//! of F (rigid case: no dv correction). The adapted coframe αⁱ = Σⱼ T_{ij} dzʲ
//! then satisfies dθ = i(α¹∧ᾱ¹ + α²∧ᾱ² − α³∧ᾱ³ − α⁴∧ᾱ⁴) on the nose.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::context::{BaseVar, VarContext};
use crate::error::{AlgebraError, PipelineError};
use crate::fiber::{FiberVar, UPoly};
use crate::kform::{Covector, KForm};
use crate::rational::GaussRational;
use crate::series::Series;

/// A validated rigid defining function: real, vanishing at the origin, with
/// no v-dependence. The Levi signature is checked later in the pipeline.
#[derive(Clone, Debug)]
pub struct DefiningFunction {
    f: Series,
}

impl DefiningFunction {
    pub fn new(f: Series) -> Result<DefiningFunction, PipelineError> {
        if !f.is_real() {
            return Err(PipelineError::NotReal);
        }
        if !f.eval_origin().is_zero() {
            return Err(PipelineError::NonzeroAtOrigin);
        }
        if f.depends_on(BaseVar::V) {
            return Err(PipelineError::NotRigid);
        }
        Ok(DefiningFunction { f })
    }

    pub fn series(&self) -> &Series {
        &self.f
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        self.f.ctx()
    }
}

/// The contact form θ as a 1-form in the dz basis (including dv).
#[derive(Clone, Debug)]
pub struct ContactForm {
    pub theta: KForm,
}

/// θ = −½·(dv + i·Σ F_{zₖ} dzᵏ − i·Σ F_{z̄ₖ} dz̄ᵏ). Real, with constant dv
/// coefficient −1/2.
pub fn build_theta(df: &DefiningFunction) -> ContactForm {
    let ctx = df.ctx();
    let minus_half = GaussRational::from_ratio(-1, 2);
    let minus_i_half = GaussRational::i().scale(&num_rational::BigRational::new(
        (-1).into(),
        2.into(),
    ));
    let mut theta = KForm::one_form(
        Covector::Dv,
        UPoly::constant(ctx, minus_half),
    );
    for k in 0..4 {
        let fz = df.f.diff(BaseVar::z(k));
        let fzb = df.f.diff(BaseVar::zbar(k));
        let holo = KForm::one_form(
            Covector::dz(k),
            UPoly::from_series(fz.scale(&minus_i_half)),
        );
        let anti = KForm::one_form(
            Covector::dzb(k),
            UPoly::from_series(fzb.scale(&minus_i_half.conj())),
        );
        theta = theta.add(&holo).unwrap().add(&anti).unwrap();
    }
    ContactForm { theta }
}

/// The 4×4 complex Hessian H_{jk} = ∂²F/∂z_j∂z̄_k as series.
#[derive(Clone, Debug)]
pub struct LeviMatrix {
    pub h: [[Series; 4]; 4],
}

pub fn levi_matrix(df: &DefiningFunction) -> LeviMatrix {
    let h = std::array::from_fn(|j| {
        std::array::from_fn(|k| df.f.diff(BaseVar::z(j)).diff(BaseVar::zbar(k)))
    });
    LeviMatrix { h }
}

/// Exact signature (n₊, n₋) of the constant-term Hermitian matrix, by
/// congruence pivoting. Errors with `LeviDegenerate` when singular.
pub fn signature_at_origin(levi: &LeviMatrix) -> Result<(u32, u32), PipelineError> {
    let mut m: Vec<Vec<GaussRational>> = (0..4)
        .map(|j| (0..4).map(|k| levi.h[j][k].eval_origin()).collect())
        .collect();
    for j in 0..4 {
        for k in 0..4 {
            if m[j][k].conj() != m[k][j] {
                return Err(PipelineError::Internal(
                    "Levi matrix is not Hermitian at the origin".into(),
                ));
            }
        }
    }
    let mut active: Vec<usize> = (0..4).collect();
    let (mut pos, mut neg) = (0u32, 0u32);
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&k| !m[k][k].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                // all active diagonal entries vanish: bring a nonzero
                // off-diagonal entry onto the diagonal by e_j ← e_j + t·e_k
                let mut found = None;
                'outer: for &j in &active {
                    for &k in &active {
                        if j != k && !m[j][k].is_zero() {
                            found = Some((j, k));
                            break 'outer;
                        }
                    }
                }
                let (j, k) = match found {
                    Some(jk) => jk,
                    None => return Err(PipelineError::LeviDegenerate),
                };
                let t = if !m[j][k].re().is_zero() {
                    GaussRational::from_int(1)
                } else {
                    GaussRational::i()
                };
                // M'_{jb} = M_{jb} + t̄·M_{kb};  M'_{aj} = M_{aj} + t·M_{ak}
                let tb = t.conj();
                for b in 0..4 {
                    let add = &tb * &m[k][b];
                    m[j][b] += &add;
                }
                for a in 0..4 {
                    let add = &m[a][k] * &t;
                    m[a][j] += &add;
                }
                continue;
            }
        };
        let d = m[p][p].clone();
        if !d.is_real() {
            return Err(PipelineError::Internal("non-real congruence pivot".into()));
        }
        if d.re().is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        let dinv = d.inverse().expect("nonzero pivot");
        active.retain(|&k| k != p);
        for &j in &active {
            for &k in &active {
                let corr = &(&m[j][p] * &m[p][k]) * &dinv;
                m[j][k] -= &corr;
            }
        }
        for &j in &active.clone() {
            m[j][p] = GaussRational::from_int(0);
            m[p][j] = GaussRational::from_int(0);
        }
    }
    Ok((pos, neg))
}

/// The coframe-change data: αⁱ = Σⱼ T_{ij} dzʲ, its inverse, the signature
/// ordering, and the dual-frame coefficients (𝒜_i = Σₖ dual[k][i]·∂_{zₖ}).
#[derive(Clone, Debug)]
pub struct CoframeData {
    pub t: [[Series; 4]; 4],
    pub t_inv: [[Series; 4]; 4],
    pub signs: [i8; 4],
    pub dual: [[Series; 4]; 4],
}

/// Hermitian congruence diagonalization of the Levi matrix with series
/// entries: elimination in index order 1..4 on nonvanishing origin pivots,
/// then a stable column permutation ordering the signs as (+,+,−,−).
pub fn diagonalize_coframe(levi: &LeviMatrix) -> Result<CoframeData, PipelineError> {
    let ctx = levi.h[0][0].ctx().clone();
    let (np, nn) = signature_at_origin(levi)?;
    if (np, nn) != (2, 2) {
        return Err(PipelineError::WrongSignature(np, nn));
    }

    let mut w = levi.h.clone();
    let zero = Series::zero(&ctx);
    let mut ltilde: [[Series; 4]; 4] = std::array::from_fn(|j| {
        std::array::from_fn(|k| if j == k { Series::one(&ctx) } else { zero.clone() })
    });
    let mut pivots: Vec<Series> = Vec::with_capacity(4);
    for k in 0..4 {
        let d = w[k][k].clone();
        if d.eval_origin().is_zero() {
            return Err(PipelineError::PivotDegenerate(k + 1));
        }
        let dinv = d.inverse().map_err(AlgebraError::from)?;
        for j in (k + 1)..4 {
            ltilde[j][k] = w[j][k].mul(&dinv).map_err(AlgebraError::from)?;
        }
        for j in (k + 1)..4 {
            for l in (k + 1)..4 {
                let corr = ltilde[j][k]
                    .mul(&ltilde[l][k].conj())
                    .and_then(|x| x.mul(&d))
                    .map_err(AlgebraError::from)?;
                w[j][l] = w[j][l].sub(&corr).map_err(AlgebraError::from)?;
            }
        }
        pivots.push(d);
    }

    // scale columns by √|d_k| and record the signs
    let mut eps = [0i8; 4];
    let mut t_pre: [[Series; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for k in 0..4 {
        let c0 = pivots[k].eval_origin();
        let positive = c0.re().is_positive();
        eps[k] = if positive { 1 } else { -1 };
        let abs_d = if positive {
            pivots[k].clone()
        } else {
            pivots[k].neg()
        };
        let s = abs_d.sqrt().map_err(AlgebraError::from)?;
        for j in k..4 {
            // T_pre = (L̃·diag(s))ᵀ, upper triangular
            t_pre[k][j] = ltilde[j][k].mul(&s).map_err(AlgebraError::from)?;
        }
    }

    // invert the upper-triangular T_pre by back substitution (rows bottom-up
    // so the needed entries are already available)
    let mut t_pre_inv: [[Series; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for i in (0..4).rev() {
        let dii = t_pre[i][i].inverse().map_err(AlgebraError::from)?;
        t_pre_inv[i][i] = dii.clone();
        for j in (i + 1)..4 {
            let mut acc = Series::zero(&ctx);
            for k in (i + 1)..=j {
                let term = t_pre[i][k].mul(&t_pre_inv[k][j]).map_err(AlgebraError::from)?;
                acc = acc.add(&term).map_err(AlgebraError::from)?;
            }
            t_pre_inv[i][j] = acc.neg().mul(&dii).map_err(AlgebraError::from)?;
        }
    }

    // stable permutation sorting signs to (+,+,−,−)
    let mut perm: Vec<usize> = Vec::with_capacity(4);
    perm.extend((0..4).filter(|&k| eps[k] > 0));
    perm.extend((0..4).filter(|&k| eps[k] < 0));

    let t: [[Series; 4]; 4] = std::array::from_fn(|i| t_pre[perm[i]].clone());
    let t_inv: [[Series; 4]; 4] =
        std::array::from_fn(|j| std::array::from_fn(|i| t_pre_inv[j][perm[i]].clone()));
    let signs: [i8; 4] = std::array::from_fn(|i| eps[perm[i]]);

    // T·T_inv = Id is a structural invariant of the construction
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Series::zero(&ctx);
            for k in 0..4 {
                acc = acc
                    .add(&t[i][k].mul(&t_inv[k][j]).map_err(AlgebraError::from)?)
                    .map_err(AlgebraError::from)?;
            }
            let expect = if i == j {
                Series::one(&ctx)
            } else {
                Series::zero(&ctx)
            };
            if !acc.eq_up_to_degree(&expect, acc.verified_degree()) {
                return Err(PipelineError::Internal("T·T⁻¹ ≠ Id".into()));
            }
        }
    }

    let dual = t_inv.clone();
    Ok(CoframeData {
        t,
        t_inv,
        signs,
        dual,
    })
}

/// Apply the dual-frame vector field 𝒜_{i+1} = Σₖ (T⁻¹)_{k,i+1}·∂_{zₖ} to a
/// series (i is 0-based).
pub fn dual_frame_apply(cf: &CoframeData, f: &Series, i: usize) -> Series {
    let ctx = f.ctx();
    let mut acc = Series::zero(ctx);
    for k in 0..4 {
        let term = cf.dual[k][i]
            .mul(&f.diff(BaseVar::z(k)))
            .expect("same context");
        acc = acc.add(&term).expect("same context");
    }
    acc
}

/// Apply the conjugate frame 𝒜̄_{i+1}(f) = conj(𝒜_{i+1}(conj f)).
pub fn dual_frame_apply_conj(cf: &CoframeData, f: &Series, i: usize) -> Series {
    dual_frame_apply(cf, &f.conj(), i).conj()
}

/// Direction of a coframe change.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChangeDirection {
    DzToAlpha,
    AlphaToDz,
}

/// Rewrite a form between the dz and α bases. θ is a basis covector on the
/// α side and the concrete 1-form `theta` on the dz side; dv on the dz side
/// is eliminated through θ when changing toward the coframe basis.
pub fn coframe_change(
    w: &KForm,
    cf: &CoframeData,
    theta: &ContactForm,
    direction: ChangeDirection,
) -> Result<KForm, AlgebraError> {
    let ctx = w.ctx().clone();
    let mut map: BTreeMap<Covector, KForm> = BTreeMap::new();
    match direction {
        ChangeDirection::DzToAlpha => {
            for j in 0..4 {
                let mut hol = KForm::zero(&ctx, 1);
                let mut anti = KForm::zero(&ctx, 1);
                for i in 0..4 {
                    hol = hol.add(&KForm::one_form(
                        Covector::alpha(i),
                        UPoly::from_series(cf.t_inv[j][i].clone()),
                    ))?;
                    anti = anti.add(&KForm::one_form(
                        Covector::alpha_bar(i),
                        UPoly::from_series(cf.t_inv[j][i].conj()),
                    ))?;
                }
                map.insert(Covector::dz(j), hol);
                map.insert(Covector::dzb(j), anti);
            }
            if w.contains_covector(|c| c == Covector::Dv) {
                // dv = (1/c_v)·(θ − Σ c_k dz^k − Σ c̄_k dz̄^k), with the dz
                // parts already rewritten into the α basis
                let cv = theta.theta.collect_coefficient(&[Covector::Dv]);
                let cv_series = cv.coeff(&crate::fiber::FiberExp::zero());
                if cv_series.eval_origin().is_zero() {
                    return Err(AlgebraError::DegenerateAtOrigin);
                }
                let cv_inv = cv_series.inverse()?;
                let mut rest = KForm::zero(&ctx, 1);
                for (key, coeff) in theta.theta.iter() {
                    if key[0] == Covector::Dv {
                        continue;
                    }
                    rest = rest.add(&KForm::one_form(key[0], coeff.clone()))?;
                }
                let rest_alpha = rest.substitute(&map)?;
                let dv_repl = KForm::one_form(Covector::Theta, UPoly::one(&ctx))
                    .sub(&rest_alpha)?
                    .scale_series(&cv_inv)?;
                map.insert(Covector::Dv, dv_repl);
            }
        }
        ChangeDirection::AlphaToDz => {
            for i in 0..4 {
                let mut hol = KForm::zero(&ctx, 1);
                let mut anti = KForm::zero(&ctx, 1);
                for j in 0..4 {
                    hol = hol.add(&KForm::one_form(
                        Covector::dz(j),
                        UPoly::from_series(cf.t[i][j].clone()),
                    ))?;
                    anti = anti.add(&KForm::one_form(
                        Covector::dzb(j),
                        UPoly::from_series(cf.t[i][j].conj()),
                    ))?;
                }
                map.insert(Covector::alpha(i), hol);
                map.insert(Covector::alpha_bar(i), anti);
            }
            map.insert(Covector::Theta, theta.theta.clone());
        }
    }
    w.substitute(&map)
}

/// Substitute dv = (solve θ = 0 for dv) into w; the result contains no dv.
pub fn mod_theta_reduce(w: &KForm, theta: &ContactForm) -> Result<KForm, AlgebraError> {
    let ctx = w.ctx().clone();
    if !w.contains_covector(|c| c == Covector::Dv) {
        return Ok(w.clone());
    }
    let cv = theta.theta.collect_coefficient(&[Covector::Dv]);
    let cv_series = cv.coeff(&crate::fiber::FiberExp::zero());
    if cv_series.eval_origin().is_zero() {
        return Err(AlgebraError::DegenerateAtOrigin);
    }
    let neg_inv = cv_series.inverse()?.neg();
    let mut repl = KForm::zero(&ctx, 1);
    for (key, coeff) in theta.theta.iter() {
        if key[0] == Covector::Dv {
            continue;
        }
        repl = repl.add(&KForm::one_form(key[0], coeff.mul_series(&neg_inv)?))?;
    }
    let mut map = BTreeMap::new();
    map.insert(Covector::Dv, repl);
    w.substitute(&map)
}

/// Reduction modulo the Pfaffian ideal: θ ↦ 0, α³ ↦ Pα¹+Qα², α⁴ ↦ Rα¹+Sα²,
/// and the conjugate substitutions on ᾱ³, ᾱ⁴.
pub fn reduce_mod_ideal(w: &KForm) -> Result<KForm, AlgebraError> {
    let ctx = w.ctx().clone();
    let mut map: BTreeMap<Covector, KForm> = BTreeMap::new();
    map.insert(Covector::Theta, KForm::zero(&ctx, 1));
    let pair = |u1: FiberVar, u2: FiberVar, c1: Covector, c2: Covector| -> KForm {
        KForm::one_form(c1, UPoly::var(&ctx, u1))
            .add(&KForm::one_form(c2, UPoly::var(&ctx, u2)))
            .expect("same context")
    };
    map.insert(
        Covector::A3,
        pair(FiberVar::P, FiberVar::Q, Covector::A1, Covector::A2),
    );
    map.insert(
        Covector::A4,
        pair(FiberVar::R, FiberVar::S, Covector::A1, Covector::A2),
    );
    map.insert(
        Covector::Ab3,
        pair(FiberVar::Pb, FiberVar::Qb, Covector::Ab1, Covector::Ab2),
    );
    map.insert(
        Covector::Ab4,
        pair(FiberVar::Rb, FiberVar::Sb, Covector::Ab1, Covector::Ab2),
    );
    w.substitute(&map)
}

/// The four structure 2-forms dα¹..dα⁴, computed in the dz basis, reduced
/// modulo θ, and rewritten in the α basis. Each contains only α∧α and α∧ᾱ
/// monomials.
pub fn structure_two_forms(
    cf: &CoframeData,
    theta: &ContactForm,
) -> Result<[KForm; 4], PipelineError> {
    let ctx = cf.t[0][0].ctx().clone();
    let mut out: Vec<KForm> = Vec::with_capacity(4);
    for i in 0..4 {
        let mut alpha_i = KForm::zero(&ctx, 1);
        for j in 0..4 {
            alpha_i = alpha_i
                .add(&KForm::one_form(
                    Covector::dz(j),
                    UPoly::from_series(cf.t[i][j].clone()),
                ))
                .map_err(AlgebraError::from)?;
        }
        let d = alpha_i.ext_d().map_err(AlgebraError::from)?;
        let d = mod_theta_reduce(&d, theta).map_err(AlgebraError::from)?;
        let d = coframe_change(&d, cf, theta, ChangeDirection::DzToAlpha)
            .map_err(AlgebraError::from)?;
        for (key, _) in d.iter() {
            let is_anti = |c: &Covector| {
                matches!(c, Covector::Ab1 | Covector::Ab2 | Covector::Ab3 | Covector::Ab4)
            };
            if key.iter().all(is_anti) {
                return Err(PipelineError::Internal(format!(
                    "dα{} contains an ᾱ∧ᾱ monomial",
                    i + 1
                )));
            }
        }
        out.push(d);
    }
    Ok(out.try_into().expect("four forms"))
}

/// The ten torsion coefficients of the reduced 2-forms
/// Ω = U*·(dα³, dα⁴)ᵀ − (dα¹, dα²)ᵀ (fiber entries symbolic, reduction
/// modulo the ideal), read off the wedge monomials
/// (α¹∧ᾱ¹, α¹∧ᾱ², α²∧ᾱ¹, α²∧ᾱ², α¹∧α²).
#[derive(Clone, Debug)]
pub struct TorsionSet {
    pub a: UPoly,
    pub b: UPoly,
    pub c: UPoly,
    pub d: UPoly,
    pub e: UPoly,
    pub f: UPoly,
    pub g: UPoly,
    pub h: UPoly,
    pub i: UPoly,
    pub j: UPoly,
}

impl TorsionSet {
    pub fn all(&self) -> [(&'static str, &UPoly); 10] {
        [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("D", &self.d),
            ("E", &self.e),
            ("F", &self.f),
            ("G", &self.g),
            ("H", &self.h),
            ("I", &self.i),
            ("J", &self.j),
        ]
    }
}

/// The five wedge monomials carrying torsion, in reading order.
pub const TORSION_KEYS: [[Covector; 2]; 5] = [
    [Covector::A1, Covector::Ab1],
    [Covector::A1, Covector::Ab2],
    [Covector::A2, Covector::Ab1],
    [Covector::A2, Covector::Ab2],
    [Covector::A1, Covector::A2],
];

/// The two reduced torsion 2-forms (the components of Ω).
pub fn torsion_two_forms(dalphas: &[KForm; 4]) -> Result<[KForm; 2], PipelineError> {
    let ctx = dalphas[0].ctx().clone();
    let ustar_row = |r: usize| -> [UPoly; 2] {
        match r {
            0 => [
                UPoly::var(&ctx, FiberVar::Pb),
                UPoly::var(&ctx, FiberVar::Rb),
            ],
            _ => [
                UPoly::var(&ctx, FiberVar::Qb),
                UPoly::var(&ctx, FiberVar::Sb),
            ],
        }
    };
    let mut out = Vec::with_capacity(2);
    for r in 0..2 {
        let [u1, u2] = ustar_row(r);
        let om = dalphas[2]
            .scale(&u1)
            .and_then(|x| dalphas[3].scale(&u2).and_then(|y| x.add(&y)))
            .and_then(|x| x.sub(&dalphas[r]))
            .map_err(AlgebraError::from)?;
        out.push(reduce_mod_ideal(&om).map_err(AlgebraError::from)?);
    }
    Ok(out.try_into().expect("two forms"))
}

pub fn extract_torsions(dalphas: &[KForm; 4]) -> Result<TorsionSet, PipelineError> {
    let omegas = torsion_two_forms(dalphas)?;
    let ctx = dalphas[0].ctx().clone();
    let mut coeffs: Vec<UPoly> = Vec::with_capacity(10);
    for om in &omegas {
        let mut residual = om.clone();
        for key in TORSION_KEYS {
            let c = om.collect_coefficient(&key);
            residual = residual
                .sub(&KForm::monomial(&ctx, &key, c.clone()))
                .map_err(AlgebraError::from)?;
            coeffs.push(c);
        }
        if !residual.is_zero() {
            return Err(PipelineError::Internal(format!(
                "torsion extraction left a residual: {}",
                residual.render()
            )));
        }
    }
    let mut it = coeffs.into_iter();
    Ok(TorsionSet {
        a: it.next().unwrap(),
        b: it.next().unwrap(),
        c: it.next().unwrap(),
        d: it.next().unwrap(),
        e: it.next().unwrap(),
        f: it.next().unwrap(),
        g: it.next().unwrap(),
        h: it.next().unwrap(),
        i: it.next().unwrap(),
        j: it.next().unwrap(),
    })
}

/// Re-assemble the two torsion 2-forms from a torsion set.
pub fn reconstruct_torsion_forms(ts: &TorsionSet) -> Result<[KForm; 2], PipelineError> {
    let ctx = ts.a.ctx().clone();
    let build = |cs: [&UPoly; 5]| -> Result<KForm, AlgebraError> {
        let mut acc = KForm::zero(&ctx, 2);
        for (key, c) in TORSION_KEYS.iter().zip(cs) {
            acc = acc.add(&KForm::monomial(&ctx, key, (*c).clone()))?;
        }
        Ok(acc)
    };
    Ok([
        build([&ts.a, &ts.b, &ts.c, &ts.d, &ts.e]).map_err(AlgebraError::from)?,
        build([&ts.f, &ts.g, &ts.h, &ts.i, &ts.j]).map_err(AlgebraError::from)?,
    ])
}

/// The fixed absorption representative: W₂ = E, X₁ = 0, Y₂ = J, Z₁ = 0,
/// together with L = −(B̄ + W₂) and Q = −(D̄ + Y₂).
#[derive(Clone, Debug)]
pub struct AbsorptionSolution {
    pub w2f: UPoly,
    pub x1f: UPoly,
    pub y2f: UPoly,
    pub z1f: UPoly,
    pub l: UPoly,
    pub qfun: UPoly,
}

pub fn absorb_torsions(ts: &TorsionSet) -> Result<AbsorptionSolution, PipelineError> {
    let ctx = ts.a.ctx().clone();
    let w2f = ts.e.clone();
    let x1f = UPoly::zero(&ctx);
    let y2f = ts.j.clone();
    let z1f = UPoly::zero(&ctx);
    let l = ts.b.conj().add(&w2f).map_err(AlgebraError::from)?.neg();
    let qfun = ts.d.conj().add(&y2f).map_err(AlgebraError::from)?.neg();
    Ok(AbsorptionSolution {
        w2f,
        x1f,
        y2f,
        z1f,
        l,
        qfun,
    })
}

/// The two obstruction functions of the torsion compatibility system:
/// T₁ = B̄ + E − F̄ and T₂ = D̄ + J − H̄.
#[derive(Clone, Debug)]
pub struct ObstructionPair {
    pub t1: UPoly,
    pub t2: UPoly,
}

pub fn obstruction_functions(ts: &TorsionSet) -> Result<ObstructionPair, PipelineError> {
    let t1 = ts
        .b
        .conj()
        .add(&ts.e)
        .and_then(|x| x.sub(&ts.f.conj()))
        .map_err(AlgebraError::from)?;
    let t2 = ts
        .d
        .conj()
        .add(&ts.j)
        .and_then(|x| x.sub(&ts.h.conj()))
        .map_err(AlgebraError::from)?;
    Ok(ObstructionPair { t1, t2 })
}

/// The skew-hermitian Σ matrix of 1-forms built from the torsions.
pub fn build_sigma(ts: &TorsionSet) -> Result<[[KForm; 2]; 2], PipelineError> {
    let entry = |cb1: &UPoly, cb2: &UPoly, c1: &UPoly, c2: &UPoly| -> Result<KForm, AlgebraError> {
        KForm::one_form(Covector::A1, cb1.conj())
            .add(&KForm::one_form(Covector::A2, cb2.conj()))?
            .add(&KForm::one_form(Covector::Ab1, c1.neg()))?
            .add(&KForm::one_form(Covector::Ab2, c2.neg()))
    };
    Ok([
        [
            entry(&ts.a, &ts.b, &ts.a, &ts.b).map_err(AlgebraError::from)?,
            entry(&ts.f, &ts.g, &ts.c, &ts.d).map_err(AlgebraError::from)?,
        ],
        [
            entry(&ts.c, &ts.d, &ts.f, &ts.g).map_err(AlgebraError::from)?,
            entry(&ts.h, &ts.i, &ts.h, &ts.i).map_err(AlgebraError::from)?,
        ],
    ])
}

/// τ together with the resolved prolongation parameters (κ̂ᵢ, σ̂ᵢ).
#[derive(Clone, Debug)]
pub struct TauData {
    pub tau: [[KForm; 2]; 2],
    pub kappa: [UPoly; 3],
    pub sigma_params: [UPoly; 3],
    /// True when the obstruction pair does not vanish identically, in which
    /// case τ is a formal construction only.
    pub formal: bool,
}

/// τ = −(U*dU) + Σ. The Maurer-Cartan block is represented by its
/// skew-hermitian symmetrization ½(U*dU − dU*·U), which coincides with
/// U*dU on the unitary fiber and makes τ* = −τ an exact symbolic identity.
pub fn build_tau(
    ts: &TorsionSet,
    absorbed: &AbsorptionSolution,
    obs: &ObstructionPair,
) -> Result<TauData, PipelineError> {
    let sigma = build_sigma(ts)?;
    let ctx = ts.a.ctx().clone();
    let half = GaussRational::from_ratio(1, 2);
    // ν_{rc} = ½ Σ_k (ū_{kr}·du_{kc} − u_{kc}·dū_{kr})
    let nu = |r: usize, c: usize| -> Result<KForm, AlgebraError> {
        let mut acc = KForm::zero(&ctx, 1);
        for k in 0..2 {
            let u_kr = FiberVar::matrix_entry(k, r);
            let u_kc = FiberVar::matrix_entry(k, c);
            let plus = KForm::one_form(
                Covector::fiber_differential(u_kc),
                UPoly::var(&ctx, u_kr.conj()),
            );
            let minus = KForm::one_form(
                Covector::fiber_differential(u_kr.conj()),
                UPoly::var(&ctx, u_kc),
            );
            acc = acc.add(&plus.sub(&minus)?)?;
        }
        Ok(acc.scale_gauss(&half))
    };
    let mut tau_rows = Vec::with_capacity(2);
    for r in 0..2 {
        let mut row = Vec::with_capacity(2);
        for c in 0..2 {
            let mc = nu(r, c).map_err(AlgebraError::from)?;
            row.push(sigma[r][c].sub(&mc).map_err(AlgebraError::from)?);
        }
        tau_rows.push(row);
    }
    let tau: [[KForm; 2]; 2] = [
        tau_rows[0].clone().try_into().expect("two entries"),
        tau_rows[1].clone().try_into().expect("two entries"),
    ];
    let kappa = [ts.a.conj().neg(), absorbed.l.clone(), ts.g.conj().neg()];
    let sigma_params = [ts.c.conj().neg(), absorbed.qfun.clone(), ts.i.conj().neg()];
    Ok(TauData {
        tau,
        kappa,
        sigma_params,
        formal: !(obs.t1.is_zero() && obs.t2.is_zero()),
    })
}

/// Eliminate the fiber differentials via dU = U·Σ and dU* = −Σ·U*
/// (the Maurer-Cartan relation U*dU = Σ on the zero set of τ).
pub fn fiber_d_reduce(w: &KForm, sigma: &[[KForm; 2]; 2]) -> Result<KForm, AlgebraError> {
    let ctx = w.ctx().clone();
    let mut map: BTreeMap<Covector, KForm> = BTreeMap::new();
    // dU entries: du_{rc} = Σ_k u_{rk}·Σ_{kc}
    for r in 0..2 {
        for c in 0..2 {
            let u_rc = FiberVar::matrix_entry(r, c);
            let mut repl = KForm::zero(&ctx, 1);
            for k in 0..2 {
                let u_rk = FiberVar::matrix_entry(r, k);
                repl = repl.add(&sigma[k][c].scale(&UPoly::var(&ctx, u_rk))?)?;
            }
            map.insert(Covector::fiber_differential(u_rc), repl);
            // dU* entries: dū_{cr} sits at (r,c) of U*; dū_{cr} = −Σ_k Σ_{rk}·ū_{ck}
            let mut replb = KForm::zero(&ctx, 1);
            for k in 0..2 {
                let u_ck = FiberVar::matrix_entry(c, k);
                replb = replb.add(&sigma[r][k].scale(&UPoly::var(&ctx, u_ck.conj()))?)?;
            }
            map.insert(
                Covector::fiber_differential(u_cr_conj(r, c)),
                replb.neg(),
            );
        }
    }
    w.substitute(&map)
}

/// The barred fiber differential at position (r,c) of dU*: that is dū where
/// u = U_{c,r}.
fn u_cr_conj(r: usize, c: usize) -> FiberVar {
    FiberVar::matrix_entry(c, r).conj()
}

/// Exterior derivative of an α-basis 1-form with UPoly coefficients:
/// d(f·ω) = df∧ω + f·dω, where df expands through the dual frame over the
/// base directions (dA = Σ 𝒜ᵢ(A)αⁱ + Σ 𝒜̄ᵢ(A)ᾱⁱ for v-independent A) plus
/// formal fiber differentials, and dω is the matching structure 2-form.
fn d_alpha_basis_one_form(
    w: &KForm,
    cf: &CoframeData,
    dalphas: &[KForm; 4],
) -> Result<KForm, PipelineError> {
    let ctx = w.ctx().clone();
    assert_eq!(w.degree(), 1);
    let mut out = KForm::zero(&ctx, 2);
    for (key, coeff) in w.iter() {
        let cov = key[0];
        // df part
        let mut df = KForm::zero(&ctx, 1);
        for i in 0..4 {
            let ai = coeff
                .map_series(|s| Ok(dual_frame_apply(cf, s, i)))
                .map_err(AlgebraError::from)?;
            let abi = coeff
                .map_series(|s| Ok(dual_frame_apply_conj(cf, s, i)))
                .map_err(AlgebraError::from)?;
            df = df
                .add(&KForm::one_form(Covector::alpha(i), ai))
                .and_then(|x| x.add(&KForm::one_form(Covector::alpha_bar(i), abi)))
                .map_err(AlgebraError::from)?;
        }
        for u in FiberVar::ALL {
            let du = coeff.diff_fiber(u);
            if !du.is_zero() {
                df = df
                    .add(&KForm::one_form(Covector::fiber_differential(u), du))
                    .map_err(AlgebraError::from)?;
            }
        }
        let term1 = df
            .wedge(&KForm::one_form(cov, UPoly::one(&ctx)))
            .map_err(AlgebraError::from)?;
        // f·dω part
        let dcov = match cov {
            Covector::A1 => dalphas[0].clone(),
            Covector::A2 => dalphas[1].clone(),
            Covector::A3 => dalphas[2].clone(),
            Covector::A4 => dalphas[3].clone(),
            Covector::Ab1 => dalphas[0].conj_form(),
            Covector::Ab2 => dalphas[1].conj_form(),
            Covector::Ab3 => dalphas[2].conj_form(),
            Covector::Ab4 => dalphas[3].conj_form(),
            other => {
                return Err(PipelineError::Internal(format!(
                    "unexpected covector {} in α-basis derivative",
                    other.name()
                )))
            }
        };
        let term2 = dcov.scale(coeff).map_err(AlgebraError::from)?;
        out = out
            .add(&term1)
            .and_then(|x| x.add(&term2))
            .map_err(AlgebraError::from)?;
    }
    Ok(out)
}

/// K = dΣ + Σ∧Σ with fiber differentials reduced via [`fiber_d_reduce`] and
/// base differentials expanded through the dual frame, everything reduced
/// modulo the ideal. K is skew-hermitian and free of fiber covectors.
pub fn dtau_structure(
    sigma: &[[KForm; 2]; 2],
    cf: &CoframeData,
    dalphas: &[KForm; 4],
) -> Result<[[KForm; 2]; 2], PipelineError> {
    let mut rows = Vec::with_capacity(2);
    for r in 0..2 {
        let mut row = Vec::with_capacity(2);
        for c in 0..2 {
            let dsig = d_alpha_basis_one_form(&sigma[r][c], cf, dalphas)?;
            let mut quad = KForm::zero(sigma[r][c].ctx(), 2);
            for k in 0..2 {
                quad = quad
                    .add(&sigma[r][k].wedge(&sigma[k][c]).map_err(AlgebraError::from)?)
                    .map_err(AlgebraError::from)?;
            }
            let total = dsig.add(&quad).map_err(AlgebraError::from)?;
            let reduced = fiber_d_reduce(&total, sigma).map_err(AlgebraError::from)?;
            let reduced = reduce_mod_ideal(&reduced).map_err(AlgebraError::from)?;
            row.push(reduced);
        }
        rows.push(row);
    }
    Ok([
        rows[0].clone().try_into().expect("two entries"),
        rows[1].clone().try_into().expect("two entries"),
    ])
}

/// Everything the analysis of one defining function produces.
#[derive(Clone, Debug)]
pub struct PipelineData {
    pub df: DefiningFunction,
    pub theta: ContactForm,
    pub levi: LeviMatrix,
    pub signature: (u32, u32),
    pub coframe: CoframeData,
    pub dalphas: [KForm; 4],
    pub torsions: TorsionSet,
    pub absorption: AbsorptionSolution,
    pub obstruction: ObstructionPair,
}

/// Run the full chain from a validated defining function.
pub fn run_pipeline(df: DefiningFunction) -> Result<PipelineData, PipelineError> {
    let theta = build_theta(&df);
    let levi = levi_matrix(&df);
    let signature = signature_at_origin(&levi)?;
    if signature != (2, 2) {
        return Err(PipelineError::WrongSignature(signature.0, signature.1));
    }
    let coframe = diagonalize_coframe(&levi)?;
    let dalphas = structure_two_forms(&coframe, &theta)?;
    let torsions = extract_torsions(&dalphas)?;
    let absorption = absorb_torsions(&torsions)?;
    let obstruction = obstruction_functions(&torsions)?;
    Ok(PipelineData {
        df,
        theta,
        levi,
        signature,
        coframe,
        dalphas,
        torsions,
        absorption,
        obstruction,
    })
}
