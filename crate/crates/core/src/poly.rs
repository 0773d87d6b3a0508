//! Dense univariate polynomials over the integers.
//!
//! Coefficients are stored in ascending degree order with trailing zeros
//! trimmed, so the zero polynomial is the empty vector. Besides ring
//! arithmetic this module provides the exact elimination tools the rest of
//! the crate leans on: primitive gcd, resultants (Sylvester matrix with
//! fraction-free Bareiss elimination) and discriminants.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn x() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as degree 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Lowest-order nonzero coefficient (zero for the zero polynomial).
    pub fn trailing_nonzero(&self) -> BigInt {
        self.coeffs
            .iter()
            .find(|c| !c.is_zero())
            .cloned()
            .unwrap_or_default()
    }

    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPoly { coeffs }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from(c.clone()))
    }

    /// Evaluate the degree-`d` homogenization `sum c_i a^i b^(d-i)`.
    ///
    /// Panics if `d` is smaller than the degree.
    pub fn homog_eval(&self, a: &BigInt, b: &BigInt, d: usize) -> BigInt {
        assert!(self.coeffs.len() <= d + 1, "homogenization degree too small");
        let mut total = BigInt::zero();
        let mut a_pow = BigInt::one();
        let mut b_pows = Vec::with_capacity(d + 1);
        let mut bp = BigInt::one();
        for _ in 0..=d {
            b_pows.push(bp.clone());
            bp *= b;
        }
        for i in 0..=d {
            let c = self.coeff(i);
            if !c.is_zero() {
                total += c * &a_pow * &b_pows[d - i];
            }
            if i < d {
                a_pow *= a;
            }
        }
        total
    }

    /// Evaluate modulo `m`, returning the canonical residue in `[0, m)`.
    pub fn eval_mod(&self, x: &BigInt, m: &BigInt) -> BigInt {
        let r = self
            .coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| (acc * x + c) % m);
        r.mod_floor(m)
    }

    /// Nonnegative gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Remainder of `f` by `g` after scaling `f` by some power of `lc(g)`.
    /// Only meaningful up to that unit factor; used for primitive gcds.
    pub fn pseudo_rem(&self, g: &IntPoly) -> IntPoly {
        let dg = g.degree().expect("pseudo-remainder by zero polynomial");
        let lc = g.leading();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dg {
                break;
            }
            let lr = r.leading();
            r = &r.scale(&lc) - &g.shift(dr - dg).scale(&lr);
        }
        r
    }

    /// Primitive gcd with positive leading coefficient; the gcd of a
    /// polynomial with zero is its primitive part.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }

    /// Exact division in `Q[x]` when the quotient has integer coefficients.
    pub fn div_exact(&self, g: &IntPoly) -> Option<IntPoly> {
        let dg = g.degree()?;
        let lc = g.leading();
        let mut r = self.clone();
        let mut q = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dg).max(1)];
        while let Some(dr) = r.degree() {
            if dr < dg {
                return None;
            }
            let (t, rem) = r.leading().div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            q[dr - dg] = t.clone();
            r = &r - &g.shift(dr - dg).scale(&t);
        }
        Some(IntPoly::new(q))
    }

    /// Primitive squarefree part `f / gcd(f, f')`.
    pub fn squarefree_part(&self) -> IntPoly {
        if self.deg() == 0 {
            return self.primitive_part();
        }
        let g = self.gcd(&self.derivative());
        self.primitive_part()
            .div_exact(&g)
            .expect("gcd divides the polynomial")
            .primitive_part()
    }

    /// Resultant `Res(f, g) = lc(f)^deg g * prod g(roots of f)`.
    pub fn resultant(&self, other: &IntPoly) -> BigInt {
        let (m, n) = match (self.degree(), other.degree()) {
            (Some(m), Some(n)) => (m, n),
            _ => return BigInt::zero(),
        };
        if m == 0 {
            return num_traits::pow(self.leading(), n);
        }
        if n == 0 {
            return num_traits::pow(other.leading(), m);
        }
        let size = m + n;
        let mut mat = vec![vec![BigInt::zero(); size]; size];
        for i in 0..n {
            for (j, c) in self.coeffs.iter().rev().enumerate() {
                mat[i][i + j] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in other.coeffs.iter().rev().enumerate() {
                mat[n + i][i + j] = c.clone();
            }
        }
        bareiss_determinant(mat)
    }

    /// Discriminant `(-1)^(n(n-1)/2) Res(f, f') / lc(f)`; 1 for degree ≤ 1.
    pub fn discriminant(&self) -> BigInt {
        let n = match self.degree() {
            Some(n) if n >= 2 => n,
            Some(_) => return BigInt::one(),
            None => return BigInt::zero(),
        };
        let r = self.resultant(&self.derivative()) / self.leading();
        if (n * (n - 1) / 2) % 2 == 1 {
            -r
        } else {
            r
        }
    }

    /// Compose `self(g(x))`.
    pub fn compose(&self, g: &IntPoly) -> IntPoly {
        self.coeffs
            .iter()
            .rev()
            .fold(IntPoly::zero(), |acc, c| &(&acc * g) + &IntPoly::constant(c.clone()))
    }
}

fn bareiss_determinant(mut mat: Vec<Vec<BigInt>>) -> BigInt {
    let n = mat.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if mat[k][k].is_zero() {
            match (k + 1..n).find(|&r| !mat[r][k].is_zero()) {
                Some(r) => {
                    mat.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                mat[i][j] = v / &prev;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    sign * &mat[n - 1][n - 1]
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{}", mag)?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{}", if show_coeff { "*" } else { "" }, i)?,
            }
        }
        Ok(())
    }
}

/// Bivariate integer polynomial in `x` and `y`, stored sparsely by
/// `(deg_x, deg_y)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), BigInt>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn constant(c: BigInt) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    pub fn x() -> Self {
        Self::from_terms([((1, 0), BigInt::one())])
    }

    pub fn y() -> Self {
        Self::from_terms([((0, 1), BigInt::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((usize, usize), BigInt)>) -> Self {
        let mut out = BiPoly::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// Embed a univariate polynomial in `x`.
    pub fn from_x_poly(f: &IntPoly) -> Self {
        Self::from_terms(f.coeffs().iter().enumerate().map(|(i, c)| ((i, 0), c.clone())))
    }

    fn add_term(&mut self, k: (usize, usize), c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &BigInt)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_x(&self) -> usize {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> usize {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(BigInt::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Bihomogeneous evaluation at `([a1:b1], [a2:b2])` in bidegree
    /// `(deg_x, deg_y)`.
    pub fn eval_bihomog(&self, a1: &BigInt, b1: &BigInt, a2: &BigInt, b2: &BigInt) -> BigInt {
        self.eval_bihomog_in((self.deg_x(), self.deg_y()), a1, b1, a2, b2)
    }

    /// Bihomogeneous evaluation in an explicit bidegree `(dx, dy)`, which
    /// must dominate the degrees of `self`.
    pub fn eval_bihomog_in(&self, (dx, dy): (usize, usize), a1: &BigInt, b1: &BigInt, a2: &BigInt, b2: &BigInt) -> BigInt {
        assert!(self.deg_x() <= dx && self.deg_y() <= dy, "bidegree too small");
        let mut acc = BigInt::zero();
        for (&(i, j), c) in &self.terms {
            let t = c
                * num_traits::pow(a1.clone(), i)
                * num_traits::pow(b1.clone(), dx - i)
                * num_traits::pow(a2.clone(), j)
                * num_traits::pow(b2.clone(), dy - j);
            acc += t;
        }
        acc
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, o: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, o: &BiPoly) -> BiPoly {
        self + &(-o)
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, o: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &o.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut parts = Vec::new();
            if !mag.is_one() || (i == 0 && j == 0) {
                parts.push(mag.to_string());
            }
            for (v, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => parts.push(v.to_string()),
                    _ => parts.push(format!("{v}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl serde::Serialize for BiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for BiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        crate::parse::parse_curve(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(lc: i64, roots: &[i64]) -> IntPoly {
        roots
            .iter()
            .fold(IntPoly::from_i64s(&[lc]), |acc, &r| &acc * &IntPoly::from_i64s(&[-r, 1]))
    }

    // lc(f)^deg g lc(g)^deg f prod (r_i - s_j)
    fn root_resultant(lf: i64, rf: &[i64], lg: i64, rg: &[i64]) -> BigInt {
        let mut acc = num_traits::pow(BigInt::from(lf), rg.len()) * num_traits::pow(BigInt::from(lg), rf.len());
        for r in rf {
            for s in rg {
                acc *= BigInt::from(r - s);
            }
        }
        acc
    }

    #[test]
    fn resultant_matches_root_products() {
        let cases: [(i64, &[i64], i64, &[i64]); 4] = [
            (1, &[1, 2], 1, &[3]),
            (2, &[0, -1, 4], 3, &[5, 7]),
            (-1, &[2], 5, &[-3, 1, 6]),
            (1, &[1, 1, 2], 1, &[2, 9]),
        ];
        for (lf, rf, lg, rg) in cases {
            let f = from_roots(lf, rf);
            let g = from_roots(lg, rg);
            assert_eq!(f.resultant(&g), root_resultant(lf, rf, lg, rg), "{rf:?} {rg:?}");
        }
    }

    #[test]
    fn discriminant_matches_root_differences() {
        for roots in [&[1i64, 2][..], &[0, 3, -5], &[2, 7, 11, 13]] {
            let f = from_roots(1, roots);
            let mut want = BigInt::one();
            for (i, r) in roots.iter().enumerate() {
                for s in &roots[i + 1..] {
                    want *= BigInt::from((r - s) * (r - s));
                }
            }
            assert_eq!(f.discriminant(), want);
        }
        // x^2 + x + 1
        assert_eq!(IntPoly::from_i64s(&[1, 1, 1]).discriminant(), BigInt::from(-3));
        assert!(from_roots(1, &[4, 4, 1]).discriminant().is_zero());
    }

    #[test]
    fn gcd_and_exact_division() {
        let f = from_roots(1, &[1, 2, 3]);
        let g = from_roots(2, &[2, 3, 5]);
        assert_eq!(f.gcd(&g), from_roots(1, &[2, 3]));
        assert_eq!(f.div_exact(&from_roots(1, &[2])).unwrap(), from_roots(1, &[1, 3]));
        assert!(f.div_exact(&from_roots(1, &[7])).is_none());
        assert_eq!(from_roots(1, &[4, 4, 1]).squarefree_part(), from_roots(1, &[4, 1]));
    }

    #[test]
    fn compose_and_homogeneous_evaluation() {
        let f = IntPoly::from_i64s(&[1, 0, 1]);
        let g = IntPoly::from_i64s(&[2, 3]);
        // (3x + 2)^2 + 1
        assert_eq!(f.compose(&g), IntPoly::from_i64s(&[5, 12, 9]));
        // b^3 f(a/b) for a/b = 2/3 at degree 3
        assert_eq!(f.homog_eval(&BigInt::from(2), &BigInt::from(3), 3), BigInt::from(3 * (9 + 4)));
    }

    #[test]
    fn bihomogeneous_evaluation() {
        let f = crate::parse::parse_curve("x*y - 2").unwrap();
        let two = BigInt::from(2);
        let one = BigInt::one();
        assert!(f.eval_bihomog(&two, &one, &one, &one).is_zero());
        assert_eq!(f.eval_bihomog_in((2, 1), &one, &one, &one, &BigInt::from(3)), BigInt::from(1 - 6));
    }
}
