//! Exact Gaussian-rational arithmetic.
//!
//! A [`GaussRational`] is a complex number whose real and imaginary parts are
//! arbitrary-precision rationals. Both parts are kept in lowest terms with
//! positive denominators (the invariant `num-rational` maintains), so equality
//! is structural and rendering is canonical.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    re: BigRational,
    im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// Exact rational `num/den`. Panics on zero denominator.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_rational(re: BigRational) -> Self {
        GaussRational {
            re,
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit √−1.
    pub fn i() -> Self {
        GaussRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|² = z·z̄, an exact nonnegative rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sq();
        Some(GaussRational {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        GaussRational {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    /// Lossy conversion to double-precision complex.
    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Exact principal square root of a positive rational, if the reduced
    /// numerator and denominator are both perfect squares.
    pub fn sqrt_exact_rational(r: &BigRational) -> Option<BigRational> {
        if r.is_negative() {
            return None;
        }
        let num = r.numer().sqrt();
        let den = r.denom().sqrt();
        if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
            Some(BigRational::new(num, den))
        } else {
            None
        }
    }

    /// Canonical text form: `a/b` for reals, `c/d*i` for pure imaginaries,
    /// `a/b+c/d*i` (or `a/b-c/d*i`) otherwise. Denominators are always printed.
    pub fn render(&self) -> String {
        fn rat(r: &BigRational) -> String {
            format!("{}/{}", r.numer(), r.denom())
        }
        if self.im.is_zero() {
            rat(&self.re)
        } else if self.re.is_zero() {
            format!("{}*i", rat(&self.im))
        } else if self.im.is_negative() {
            format!("{}-{}*i", rat(&self.re), rat(&(-self.im.clone())))
        } else {
            format!("{}+{}*i", rat(&self.re), rat(&self.im))
        }
    }
}

impl Add for GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: Self) -> Self {
        GaussRational {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<'a> Add<&'a GaussRational> for GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &'a Self) -> Self {
        GaussRational {
            re: self.re + &rhs.re,
            im: self.im + &rhs.im,
        }
    }
}

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Sub for GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: Self) -> Self {
        GaussRational {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, rhs: &Self) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Mul for GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<'a, 'b> Mul<&'b GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &'b GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl MulAssign<&GaussRational> for GaussRational {
    fn mul_assign(&mut self, rhs: &Self) {
        *self = &*self * rhs;
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> Self {
        GaussRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conj_is_involution_and_multiplicative() {
        let x = GaussRational::from_ratio(3, 2) + GaussRational::i();
        let y = GaussRational::from_ratio(-1, 5) + GaussRational::i().scale(&BigRational::new(BigInt::from(2), BigInt::from(7)));
        assert_eq!(x.conj().conj(), x);
        assert_eq!((&x * &y).conj(), &x.conj() * &y.conj());
    }

    #[test]
    fn inverse_multiplies_to_one() {
        let x = GaussRational::from_ratio(3, 4) + GaussRational::i().scale(&BigRational::new(BigInt::from(-5), BigInt::from(6)));
        let inv = x.inverse().unwrap();
        assert!((&x * &inv).is_one());
        assert!(GaussRational::from_int(0).inverse().is_none());
    }

    #[test]
    fn sqrt_exact_rational_cases() {
        let four = BigRational::from_integer(BigInt::from(4));
        assert_eq!(
            GaussRational::sqrt_exact_rational(&four).unwrap(),
            BigRational::from_integer(BigInt::from(2))
        );
        let nine_quarters = BigRational::new(BigInt::from(9), BigInt::from(4));
        assert_eq!(
            GaussRational::sqrt_exact_rational(&nine_quarters).unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
        let two = BigRational::from_integer(BigInt::from(2));
        assert!(GaussRational::sqrt_exact_rational(&two).is_none());
        let neg = BigRational::from_integer(BigInt::from(-4));
        assert!(GaussRational::sqrt_exact_rational(&neg).is_none());
    }

    #[test]
    fn rendering_is_canonical() {
        assert_eq!(GaussRational::from_ratio(1, 2).render(), "1/2");
        assert_eq!(GaussRational::i().render(), "1/1*i");
        let z = GaussRational::from_ratio(1, 2) + GaussRational::i().scale(&BigRational::new(BigInt::from(-3), BigInt::from(4)));
        assert_eq!(z.render(), "1/2-3/4*i");
    }
}
