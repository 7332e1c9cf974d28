//! Coordinate conventions for the symbolic kernel.
//!
//! All series live in the nine base variables z₁..z₄, z̄₁..z̄₄, v at the
//! origin, truncated at a fixed total degree. The barred variables are
//! independent formal symbols; reality of a series means being a fixed
//! point of the conjugation involution (which swaps zₖ ↔ z̄ₖ and fixes v).

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::AlgebraError;

/// Number of base variables: z₁..z₄, z̄₁..z̄₄, v.
pub const NUM_BASE_VARS: usize = 9;

/// One of the nine base variables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BaseVar {
    Z1,
    Z2,
    Z3,
    Z4,
    Zb1,
    Zb2,
    Zb3,
    Zb4,
    V,
}

impl BaseVar {
    pub const ALL: [BaseVar; NUM_BASE_VARS] = [
        BaseVar::Z1,
        BaseVar::Z2,
        BaseVar::Z3,
        BaseVar::Z4,
        BaseVar::Zb1,
        BaseVar::Zb2,
        BaseVar::Zb3,
        BaseVar::Zb4,
        BaseVar::V,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> BaseVar {
        Self::ALL[i]
    }

    /// z₁..z₄ indexed 0..3.
    pub fn z(k: usize) -> BaseVar {
        debug_assert!(k < 4);
        Self::ALL[k]
    }

    /// z̄₁..z̄₄ indexed 0..3.
    pub fn zbar(k: usize) -> BaseVar {
        debug_assert!(k < 4);
        Self::ALL[k + 4]
    }

    /// The conjugation pairing: zₖ ↔ z̄ₖ, v ↦ v. An involution.
    pub fn conj(self) -> BaseVar {
        match self {
            BaseVar::Z1 => BaseVar::Zb1,
            BaseVar::Z2 => BaseVar::Zb2,
            BaseVar::Z3 => BaseVar::Zb3,
            BaseVar::Z4 => BaseVar::Zb4,
            BaseVar::Zb1 => BaseVar::Z1,
            BaseVar::Zb2 => BaseVar::Z2,
            BaseVar::Zb3 => BaseVar::Z3,
            BaseVar::Zb4 => BaseVar::Z4,
            BaseVar::V => BaseVar::V,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseVar::Z1 => "z1",
            BaseVar::Z2 => "z2",
            BaseVar::Z3 => "z3",
            BaseVar::Z4 => "z4",
            BaseVar::Zb1 => "zb1",
            BaseVar::Zb2 => "zb2",
            BaseVar::Zb3 => "zb3",
            BaseVar::Zb4 => "zb4",
            BaseVar::V => "v",
        }
    }
}

impl fmt::Display for BaseVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector over the nine base variables, graded-lexicographically
/// ordered so that BTreeMap iteration is the canonical term order
/// (total degree first, then lexicographic).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BaseExp(pub [u8; NUM_BASE_VARS]);

impl BaseExp {
    pub fn zero() -> Self {
        BaseExp([0; NUM_BASE_VARS])
    }

    pub fn var(v: BaseVar) -> Self {
        let mut e = [0u8; NUM_BASE_VARS];
        e[v.index()] = 1;
        BaseExp(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Product of monomials = sum of exponents.
    pub fn plus(&self, other: &BaseExp) -> BaseExp {
        let mut e = [0u8; NUM_BASE_VARS];
        for i in 0..NUM_BASE_VARS {
            e[i] = self.0[i] + other.0[i];
        }
        BaseExp(e)
    }

    /// Swap each zₖ exponent with its z̄ₖ exponent; v fixed.
    pub fn conj(&self) -> BaseExp {
        let mut e = self.0;
        for k in 0..4 {
            e.swap(k, k + 4);
        }
        BaseExp(e)
    }

    pub fn get(&self, v: BaseVar) -> u8 {
        self.0[v.index()]
    }
}

impl Ord for BaseExp {
    fn cmp(&self, other: &Self) -> Ordering {
        // graded lexicographic: total degree first, then a higher power of an
        // earlier variable sorts first (z1^2 before z1*z2 before z2^2)
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for BaseExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shared truncation context. Every [`crate::series::Series`] holds an
/// `Arc<VarContext>`; binary operations require the same context.
#[derive(Debug, PartialEq, Eq)]
pub struct VarContext {
    /// Truncation degree N: terms of total degree > N are discarded.
    pub order: u32,
    /// Cap on the total fiber degree of a `UPoly`; exceeding it is an error.
    pub fiber_cap: u32,
}

/// Default truncation degree.
pub const DEFAULT_ORDER: u32 = 8;
/// Default fiber-degree cap; pipeline outputs stay well below it.
pub const DEFAULT_FIBER_CAP: u32 = 6;

impl VarContext {
    /// A context of truncation degree `order`. Orders below 2 are rejected:
    /// second derivatives must survive truncation.
    pub fn new(order: u32) -> Result<Arc<VarContext>, AlgebraError> {
        if order < 2 {
            return Err(AlgebraError::OrderTooSmall(order));
        }
        Ok(Arc::new(VarContext {
            order,
            fiber_cap: DEFAULT_FIBER_CAP,
        }))
    }

    pub fn with_fiber_cap(order: u32, fiber_cap: u32) -> Result<Arc<VarContext>, AlgebraError> {
        if order < 2 {
            return Err(AlgebraError::OrderTooSmall(order));
        }
        Ok(Arc::new(VarContext { order, fiber_cap }))
    }

    pub fn default_ctx() -> Arc<VarContext> {
        VarContext::new(DEFAULT_ORDER).expect("default order is valid")
    }

    /// Ordered list of the base variable symbols.
    pub fn base_vars(&self) -> &'static [BaseVar; NUM_BASE_VARS] {
        &BaseVar::ALL
    }
}

/// Two series (or forms) may be combined only when they share a context.
pub fn check_same_ctx(a: &Arc<VarContext>, b: &Arc<VarContext>) -> Result<(), AlgebraError> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(AlgebraError::ContextMismatch)
    }
}
