//! Dense univariate polynomials over a [`FieldDesc`].

use std::fmt;

use thiserror::Error;

use crate::combinatorics::lucas_binomial;
use crate::field::{Elem, FieldDesc, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomials live over different fields ({0} vs {1})")]
    FieldMismatch(FieldDesc, FieldDesc),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("operation needs a non-constant polynomial")]
    Constant,
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// A dense polynomial; `coeffs[i]` is the coefficient of `x^i`.
///
/// The coefficient vector never ends in a zero, so the zero polynomial has
/// an empty vector and no degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    field: FieldDesc,
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(field: FieldDesc, coeffs: Vec<Elem>) -> Result<Self, PolyError> {
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(Self::from_raw(field, coeffs))
    }

    pub(crate) fn from_raw(field: FieldDesc, mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    /// Polynomial with prime-field integer coefficients, lowest degree first.
    pub fn from_ints(field: FieldDesc, coeffs: &[i64]) -> Self {
        Self::from_raw(field, coeffs.iter().map(|&c| field.from_int(c)).collect())
    }

    pub fn zero(field: FieldDesc) -> Self {
        Poly {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(field: FieldDesc, c: Elem) -> Self {
        Self::from_raw(field, vec![c])
    }

    /// `c * x^n`.
    pub fn monomial(field: FieldDesc, n: usize, c: Elem) -> Self {
        let mut coeffs = vec![Elem::ZERO; n + 1];
        coeffs[n] = c;
        Self::from_raw(field, coeffs)
    }

    pub fn x(field: FieldDesc) -> Self {
        Self::monomial(field, 1, Elem::ONE)
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(Elem::ZERO)
    }

    /// Sparse `(exponent, coefficient)` pairs, ascending.
    pub fn terms(&self) -> Vec<(usize, Elem)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (i, c))
            .collect()
    }

    fn same_field(&self, other: &Poly) -> Result<(), PolyError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(PolyError::FieldMismatch(self.field, other.field))
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Elem) -> Result<Elem, PolyError> {
        self.field.check(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: Elem) -> Elem {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.same_field(other)?;
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.add(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(Self::from_raw(f, coeffs))
    }

    pub fn neg(&self) -> Poly {
        let f = self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Elem) -> Poly {
        let f = self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.same_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Poly) -> Poly {
        let f = self.field;
        if self.is_zero() || other.is_zero() {
            return Poly::zero(f);
        }
        let mut out = vec![Elem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        let rhs = other.terms();
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &(j, b) in &rhs {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::from_raw(f, out)
    }

    /// The polynomial `f(x + a)`, expanded with binomial coefficients
    /// reduced modulo p.
    pub fn shift_compose(&self, a: Elem) -> Result<Poly, PolyError> {
        let f = self.field;
        f.check(a)?;
        let Some(deg) = self.degree() else {
            return Ok(self.clone());
        };
        let p = f.characteristic();
        let mut a_pows = Vec::with_capacity(deg + 1);
        let mut acc = Elem::ONE;
        for _ in 0..=deg {
            a_pows.push(acc);
            acc = f.mul(acc, a);
        }
        let mut out = vec![Elem::ZERO; deg + 1];
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, slot) in out.iter_mut().enumerate().take(n + 1) {
                let b = lucas_binomial(n as u64, i as u64, p);
                if b == 0 {
                    continue;
                }
                let term = f.mul(f.scale(c, b as i64), a_pows[n - i]);
                *slot = f.add(*slot, term);
            }
        }
        Ok(Self::from_raw(f, out))
    }

    /// The representative of degree < q of the same function on GF(q):
    /// exponent 0 stays, `e >= 1` folds to `((e - 1) mod (q - 1)) + 1`.
    pub fn reduce_mod_field(&self) -> Poly {
        let f = self.field;
        let q1 = (f.order() - 1) as usize;
        if self.coeffs.len() <= q1 + 1 {
            return self.clone();
        }
        let mut out = vec![Elem::ZERO; q1 + 1];
        for (e, &c) in self.coeffs.iter().enumerate() {
            let slot = fold_exponent(e as u64, q1 as u64) as usize;
            out[slot] = f.add(out[slot], c);
        }
        Self::from_raw(f, out)
    }

    /// `f^t` reduced modulo `x^q - x`, by square-and-multiply with a
    /// reduction after every product. `t = 0` gives the constant 1.
    pub fn powmod(&self, mut t: u64) -> Poly {
        let f = self.field;
        let mut base = self.reduce_mod_field();
        let mut acc = Poly::constant(f, Elem::ONE);
        while t > 0 {
            if t & 1 == 1 {
                acc = acc.mul_unchecked(&base).reduce_mod_field();
            }
            t >>= 1;
            if t > 0 {
                base = base.mul_unchecked(&base).reduce_mod_field();
            }
        }
        acc
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self
            .field
            .inv(self.leading())
            .expect("leading coefficient is nonzero");
        self.scale(inv)
    }

    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly), PolyError> {
        self.same_field(divisor)?;
        let f = self.field;
        let Some(dd) = divisor.degree() else {
            return Err(PolyError::DivisionByZero);
        };
        let lead_inv = f.inv(divisor.leading())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut quot = vec![Elem::ZERO; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = f.mul(rem[i], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[i - dd] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] = f.sub(rem[i - dd + j], f.mul(c, d));
            }
        }
        rem.truncate(dd);
        Ok((Self::from_raw(f, quot), Self::from_raw(f, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly, PolyError> {
        Ok(self.div_rem(divisor)?.1)
    }

    /// `self^e mod modulus`.
    pub fn pow_mod_poly(&self, mut e: u64, modulus: &Poly) -> Result<Poly, PolyError> {
        let mut base = self.rem(modulus)?;
        let mut acc = Poly::constant(self.field, Elem::ONE).rem(modulus)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?.rem(modulus)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?.rem(modulus)?;
            }
        }
        Ok(acc)
    }

    /// Distinct-degree irreducibility test.
    pub fn is_irreducible(&self) -> Result<bool, PolyError> {
        let deg = match self.degree() {
            None | Some(0) => return Err(PolyError::Constant),
            Some(d) => d,
        };
        if deg == 1 {
            return Ok(true);
        }
        let q = self.field.order();
        let x = Poly::x(self.field);
        let mut h = x.clone();
        for _ in 1..=deg / 2 {
            h = h.pow_mod_poly(q, self)?;
            let g = gcd_poly(&h.sub(&x)?, self)?;
            if g.degree() != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distinct roots in the coefficient field, ascending.
    pub fn roots(&self) -> Result<Vec<Elem>, PolyError> {
        let f = self.field;
        if self.is_zero() {
            return Err(PolyError::Constant);
        }
        if self.degree() == Some(0) {
            return Ok(Vec::new());
        }
        let mut roots = if f.order() <= 1 << 16 {
            f.elements()
                .filter(|&x| self.eval_unchecked(x).is_zero())
                .collect()
        } else {
            let x = Poly::x(f);
            let split = gcd_poly(&x.pow_mod_poly(f.order(), self)?.sub(&x)?, self)?;
            let mut out = Vec::new();
            split_linear(&split, &mut out)?;
            out
        };
        roots.sort();
        Ok(roots)
    }
}

/// Cantor-Zassenhaus splitting of a squarefree product of linear factors.
fn split_linear(g: &Poly, out: &mut Vec<Elem>) -> Result<(), PolyError> {
    let f = *g.field();
    match g.degree() {
        None | Some(0) => return Ok(()),
        Some(1) => {
            let m = g.monic();
            out.push(f.neg(m.coeff(0)));
            return Ok(());
        }
        Some(_) => {}
    }
    let half = (f.order() - 1) / 2;
    for delta in f.elements() {
        let shifted = Poly::new(f, vec![delta, Elem::ONE])?;
        let h = shifted
            .pow_mod_poly(half, g)?
            .sub(&Poly::constant(f, Elem::ONE))?;
        let d = gcd_poly(&h, g)?;
        let dd = d.degree().unwrap_or(0);
        if dd > 0 && Some(dd) < g.degree() {
            let (other, _) = g.div_rem(&d)?;
            split_linear(&d, out)?;
            split_linear(&other, out)?;
            return Ok(());
        }
    }
    unreachable!("splitting a product of distinct linear factors always succeeds")
}

/// Maps an exponent to its representative in `[0, q-1]` under `x^q = x`.
pub fn fold_exponent(e: u64, q_minus_1: u64) -> u64 {
    if e == 0 {
        0
    } else {
        (e - 1) % q_minus_1 + 1
    }
}

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd_poly(a: &Poly, b: &Poly) -> Result<Poly, PolyError> {
    a.same_field(b)?;
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    while !r1.is_zero() {
        let r = r0.rem(&r1)?;
        r0 = r1;
        r1 = r;
    }
    Ok(r0.monic())
}

/// Coefficient of `x^(q-1)` in the reduced polynomial of `h`, via
/// `-sum_{c in GF(q)} h(c)`.
pub fn top_coeff_sum(field: &FieldDesc, h: impl Fn(Elem) -> Elem) -> Elem {
    let sum = field
        .elements()
        .fold(Elem::ZERO, |acc, c| field.add(acc, h(c)));
    field.neg(sum)
}

impl fmt::Display for Poly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let f = &self.field;
        let terms: Vec<String> = self
            .terms()
            .into_iter()
            .rev()
            .map(|(e, c)| {
                let c = if f.degree() == 1 {
                    f.format(c)
                } else {
                    format!("({})", f.format(c))
                };
                match e {
                    0 => c,
                    1 => format!("{c}*x"),
                    _ => format!("{c}*x^{e}"),
                }
            })
            .collect();
        write!(out, "{}", terms.join(" + "))
    }
}
