//! Commutative bicomplex numbers `c1 + ci·i + cj·j + ck·k` with `k = ij`.
//!
//! The ring has two imaginary units (`i² = j² = −1`) and a hyperbolic unit
//! (`k² = +1`). It is not a field: `(1 + k)(1 − k) = 0`. Every bicomplex
//! number decomposes uniquely along the idempotents `(1 ± k)/2` into two
//! j-complex numbers, the projections obtained by `i → −j` ([`IdempotentPair::plus`])
//! and `i → +j` ([`IdempotentPair::minus`]). Both projections are ring
//! homomorphisms, which is what makes the linear algebra in
//! [`crate::matrix_model`] reduce to two ordinary complex problems.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::Error;

/// A j-complex scalar `re + j·im`.
pub type JComplex = Complex64;

/// Idempotent components with magnitude below this are treated as zero divisors.
pub const ZERO_DIVISOR_EPS: f64 = 1e-300;

/// Four-real bicomplex number. Field order follows the unit names, not the
/// `ψ₁, ψ_j, ψ_i, ψ_k` column layout used by the CSV writers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bicomplex {
    pub c1: f64,
    pub ci: f64,
    pub cj: f64,
    pub ck: f64,
}

/// The two j-complex projections of a bicomplex number.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdempotentPair {
    /// Image under `i → −j`.
    pub plus: JComplex,
    /// Image under `i → +j`.
    pub minus: JComplex,
}

/// Which complex conjugation to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Conjugation {
    /// `i → −i` (time reversal).
    Ti,
    /// `j → −j`.
    Tj,
    /// Both; flips the i- and j-components and leaves k unchanged.
    TiTj,
}

/// Imaginary unit selector for [`Bicomplex::unit_circle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ImagUnit {
    I,
    J,
}

impl Bicomplex {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(c1: f64, ci: f64, cj: f64, ck: f64) -> Self {
        Self { c1, ci, cj, ck }
    }

    pub const fn real(x: f64) -> Self {
        Self::new(x, 0.0, 0.0, 0.0)
    }

    /// Embeds the j-complex number `z.re + j·z.im`.
    pub const fn from_j(z: JComplex) -> Self {
        Self::new(z.re, 0.0, z.im, 0.0)
    }

    /// Embeds an ordinary complex number using the i-unit: `re + i·im`.
    pub const fn from_i(re: f64, im: f64) -> Self {
        Self::new(re, im, 0.0, 0.0)
    }

    /// Builds `a + i·b` from two j-complex numbers (the real and imaginary parts
    /// of the analytically continued complex value).
    pub fn from_parts(re: JComplex, im: JComplex) -> Self {
        Self::new(re.re, im.re, re.im, im.im)
    }

    /// j-complex "real part" `c1 + j·cj`.
    pub fn re_part(self) -> JComplex {
        JComplex::new(self.c1, self.cj)
    }

    /// j-complex "imaginary part" `ci + j·ck`.
    pub fn im_part(self) -> JComplex {
        JComplex::new(self.ci, self.ck)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.c1, self.ci, self.cj, self.ck]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.c1 * s, self.ci * s, self.cj * s, self.ck * s)
    }

    pub fn conj(self, which: Conjugation) -> Self {
        match which {
            Conjugation::Ti => Self::new(self.c1, -self.ci, self.cj, -self.ck),
            Conjugation::Tj => Self::new(self.c1, self.ci, -self.cj, -self.ck),
            Conjugation::TiTj => Self::new(self.c1, -self.ci, -self.cj, self.ck),
        }
    }

    pub fn split(self) -> IdempotentPair {
        IdempotentPair {
            plus: JComplex::new(self.c1 + self.ck, self.cj - self.ci),
            minus: JComplex::new(self.c1 - self.ck, self.cj + self.ci),
        }
    }

    pub fn join(pair: IdempotentPair) -> Self {
        let IdempotentPair { plus: p, minus: m } = pair;
        Self::new(
            0.5 * (p.re + m.re),
            0.5 * (m.im - p.im),
            0.5 * (p.im + m.im),
            0.5 * (p.re - m.re),
        )
    }

    /// `cos θ + unit·sin θ`.
    pub fn unit_circle(theta: f64, unit: ImagUnit) -> Self {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        match unit {
            ImagUnit::I => Self::new(c, s, 0.0, 0.0),
            ImagUnit::J => Self::new(c, 0.0, s, 0.0),
        }
    }

    /// Euclidean norm of the four real coefficients.
    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn norm_sqr(self) -> f64 {
        self.c1 * self.c1 + self.ci * self.ci + self.cj * self.cj + self.ck * self.ck
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(self) -> f64 {
        self.c1.abs().max(self.ci.abs()).max(self.cj.abs()).max(self.ck.abs())
    }

    pub fn is_finite(self) -> bool {
        self.c1.is_finite() && self.ci.is_finite() && self.cj.is_finite() && self.ck.is_finite()
    }

    /// True when either idempotent component vanishes.
    pub fn is_zero_divisor(self) -> bool {
        let IdempotentPair { plus, minus } = self.split();
        plus.norm() < ZERO_DIVISOR_EPS || minus.norm() < ZERO_DIVISOR_EPS
    }

    pub fn checked_inv(self) -> Result<Self, Error> {
        let IdempotentPair { plus, minus } = self.split();
        if plus.norm() < ZERO_DIVISOR_EPS || minus.norm() < ZERO_DIVISOR_EPS {
            return Err(Error::ZeroDivisor);
        }
        Ok(Self::join(IdempotentPair {
            plus: plus.inv(),
            minus: minus.inv(),
        }))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, Error> {
        Ok(self * rhs.checked_inv()?)
    }

    /// Principal square root taken separately in each idempotent component.
    pub fn sqrt(self) -> Self {
        self.map_components(|z| z.sqrt())
    }

    /// Applies a j-complex function to each idempotent component.
    pub fn map_components(self, f: impl Fn(JComplex) -> JComplex) -> Self {
        let p = self.split();
        Self::join(IdempotentPair {
            plus: f(p.plus),
            minus: f(p.minus),
        })
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Self::ONE;
        for _ in 0..n {
            acc *= self;
        }
        acc
    }
}

impl IdempotentPair {
    pub fn new(plus: JComplex, minus: JComplex) -> Self {
        Self { plus, minus }
    }
}

impl From<f64> for Bicomplex {
    fn from(x: f64) -> Self {
        Self::real(x)
    }
}

impl Add for Bicomplex {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.c1 + r.c1, self.ci + r.ci, self.cj + r.cj, self.ck + r.ck)
    }
}

impl Sub for Bicomplex {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.c1 - r.c1, self.ci - r.ci, self.cj - r.cj, self.ck - r.ck)
    }
}

impl Neg for Bicomplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.c1, -self.ci, -self.cj, -self.ck)
    }
}

impl Mul for Bicomplex {
    type Output = Self;
    #[inline]
    fn mul(self, r: Self) -> Self {
        let (a, b, c, d) = (self.c1, self.ci, self.cj, self.ck);
        let (e, f, g, h) = (r.c1, r.ci, r.cj, r.ck);
        Self::new(
            a * e - b * f - c * g + d * h,
            a * f + b * e - c * h - d * g,
            a * g + c * e - b * h - d * f,
            a * h + d * e + b * g + c * f,
        )
    }
}

impl Mul<f64> for Bicomplex {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Mul<Bicomplex> for f64 {
    type Output = Bicomplex;
    fn mul(self, z: Bicomplex) -> Bicomplex {
        z.scale(self)
    }
}

/// Panics on zero divisors; use [`Bicomplex::checked_div`] where the divisor
/// is not known to be invertible.
impl Div for Bicomplex {
    type Output = Self;
    fn div(self, r: Self) -> Self {
        self.checked_div(r).expect("bicomplex division by a zero divisor")
    }
}

impl AddAssign for Bicomplex {
    fn add_assign(&mut self, r: Self) {
        *self = *self + r;
    }
}

impl SubAssign for Bicomplex {
    fn sub_assign(&mut self, r: Self) {
        *self = *self - r;
    }
}

impl MulAssign for Bicomplex {
    fn mul_assign(&mut self, r: Self) {
        *self = *self * r;
    }
}

impl core::iter::Sum for Bicomplex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

/// Text form `"c1 ci cj ck"`, full round-trip precision.
impl fmt::Display for Bicomplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {:e} {:e} {:e}", self.c1, self.ci, self.cj, self.ck)
    }
}

impl FromStr for Bicomplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut out = [0.0; 4];
        let mut fields = s.split_whitespace();
        for slot in out.iter_mut() {
            let field = fields
                .next()
                .ok_or(Error::Parse("bicomplex needs four fields"))?;
            *slot = field
                .parse()
                .map_err(|_| Error::Parse("bicomplex field is not a number"))?;
        }
        if fields.next().is_some() {
            return Err(Error::Parse("bicomplex has more than four fields"));
        }
        Ok(Self::from_array(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::string::ToString;

    fn close(a: Bicomplex, b: Bicomplex, tol: f64) -> bool {
        (a - b).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
    }

    #[test]
    fn multiplication_table() {
        let (one, i, j, k) = (Bicomplex::ONE, Bicomplex::I, Bicomplex::J, Bicomplex::K);
        assert_eq!(i * i, -one);
        assert_eq!(j * j, -one);
        assert_eq!(k * k, one);
        assert_eq!(i * j, k);
        assert_eq!(i * k, -j);
        assert_eq!(j * k, -i);
        assert_eq!((one + i) * (one + j), Bicomplex::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!((one + k) * (one - k), Bicomplex::ZERO);
    }

    #[test]
    fn conjugations() {
        let z = Bicomplex::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(z.conj(Conjugation::Ti), Bicomplex::new(1.0, -2.0, 3.0, -4.0));
        assert_eq!(z.conj(Conjugation::Tj), Bicomplex::new(1.0, 2.0, -3.0, -4.0));
        assert_eq!(z.conj(Conjugation::TiTj), Bicomplex::new(1.0, -2.0, -3.0, 4.0));
    }

    #[test]
    fn split_examples() {
        let p = Bicomplex::new(2.0, 3.0, 5.0, 7.0).split();
        assert_eq!(p.plus, JComplex::new(9.0, 2.0));
        assert_eq!(p.minus, JComplex::new(-5.0, 8.0));
        let q = Bicomplex::new(1.5, 0.0, -2.5, 0.0).split();
        assert_eq!(q.plus, q.minus);
        assert_eq!(q.plus, JComplex::new(1.5, -2.5));
    }

    #[test]
    fn unit_circle_points() {
        let pi = core::f64::consts::PI;
        assert!(close(Bicomplex::unit_circle(0.0, ImagUnit::J), Bicomplex::ONE, 1e-15));
        assert!(close(Bicomplex::unit_circle(pi / 2.0, ImagUnit::J), Bicomplex::J, 1e-15));
        assert!(close(Bicomplex::unit_circle(pi, ImagUnit::I), -Bicomplex::ONE, 1e-15));
    }

    #[test]
    fn zero_divisors_refuse_inversion() {
        let z = Bicomplex::ONE + Bicomplex::K;
        assert!(z.is_zero_divisor());
        assert_eq!(z.checked_inv(), Err(Error::ZeroDivisor));
        let w = Bicomplex::new(2.0, 1.0, -0.5, 0.25);
        assert!(close(w * w.checked_inv().unwrap(), Bicomplex::ONE, 1e-15));
    }

    #[test]
    fn text_round_trip() {
        let z = Bicomplex::new(0.1, -2.5e-17, 3.0, 1.0 / 3.0);
        let back: Bicomplex = z.to_string().parse().unwrap();
        assert_eq!(back, z);
        assert!("1 2 3".parse::<Bicomplex>().is_err());
        assert!("1 2 3 4 5".parse::<Bicomplex>().is_err());
    }

    fn arb() -> impl Strategy<Value = Bicomplex> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Bicomplex::from_array)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ring_axioms(a in arb(), b in arb(), c in arb()) {
            prop_assert!(close(a * b, b * a, 1e-14));
            prop_assert!(close((a * b) * c, a * (b * c), 1e-13));
            prop_assert!(close(a * (b + c), a * b + a * c, 1e-13));
        }

        #[test]
        fn split_join_round_trip(z in arb()) {
            prop_assert!(close(Bicomplex::join(z.split()), z, 1e-15));
        }

        #[test]
        fn split_is_a_homomorphism(a in arb(), b in arb()) {
            let (pa, pb, pab) = (a.split(), b.split(), (a * b).split());
            prop_assert!((pab.plus - pa.plus * pb.plus).norm() <= 1e-12 * (1.0 + pab.plus.norm()));
            prop_assert!((pab.minus - pa.minus * pb.minus).norm() <= 1e-12 * (1.0 + pab.minus.norm()));
        }

        #[test]
        fn conjugations_are_multiplicative_involutions(a in arb(), b in arb()) {
            for t in [Conjugation::Ti, Conjugation::Tj, Conjugation::TiTj] {
                prop_assert_eq!(a.conj(t).conj(t), a);
                prop_assert!(close((a * b).conj(t), a.conj(t) * b.conj(t), 1e-14));
            }
        }
    }
}
