//! Exact arithmetic in GF(p), GF(p^2) and GF(p^4).
//!
//! The extensions are built as a tower of quadratic extensions:
//!
//! * GF(p^2) = GF(p)[s] / (s^2 - t) with `t` a non-residue of GF(p),
//! * GF(p^4) = GF(p^2)[u] / (u^2 - m) with `m` a non-square of GF(p^2).
//!
//! An element is a flat coefficient vector over GF(p) in the basis
//! `(1)`, `(1, s)` or `(1, s, u, su)`. Elements do not carry their field;
//! every operation goes through a [`FieldDesc`], which is a small `Copy`
//! value. Because of the tower basis, GF(p) and GF(p^2) sit inside GF(p^4)
//! as the elements whose trailing coefficients vanish.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest characteristic accepted. Products of two reduced coefficients
/// must fit comfortably in a `u64`.
pub const MAX_CHARACTERISTIC: u64 = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("characteristic {0} exceeds the supported maximum")]
    TooLarge(u64),
    #[error("{0} is a square (or zero) and cannot define a quadratic extension")]
    SquareParameter(String),
    #[error("extension degree {0} is not supported (expected 1, 2 or 4)")]
    UnsupportedDegree(u32),
    #[error("subfield degree {sub} does not divide the extension degree {degree}")]
    BadSubDegree { sub: u32, degree: u32 },
    #[error("zero is neither a square nor a non-square")]
    ZeroSquareClass,
    #[error("division by zero")]
    DivisionByZero,
    #[error("element does not belong to GF({p}^{degree})")]
    Mismatch { p: u64, degree: u32 },
    #[error("malformed field element `{0}`")]
    Parse(String),
}

/// A field element as a coefficient vector over GF(p) in the tower basis.
///
/// Coefficients past the field degree are always zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Elem(pub(crate) [u32; 4]);

impl Elem {
    pub const ZERO: Elem = Elem([0; 4]);
    pub const ONE: Elem = Elem([1, 0, 0, 0]);

    pub fn coeffs(&self) -> [u32; 4] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// True when the element lies in the prime field.
    pub fn is_prime_field(&self) -> bool {
        self.0[1] == 0 && self.0[2] == 0 && self.0[3] == 0
    }
}

// Enumeration order: the coefficient of the highest basis element is the
// most significant digit, so `Ord` agrees with `FieldDesc::index`.
impl Ord for Elem {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.0;
        let b = other.0;
        (a[3], a[2], a[1], a[0]).cmp(&(b[3], b[2], b[1], b[0]))
    }
}

impl PartialOrd for Elem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Descriptor of GF(p^e) for e in {1, 2, 4}, including its tower parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldDesc {
    p: u32,
    degree: u32,
    /// s^2 = t; zero for the prime field.
    t: u32,
    /// u^2 = m0 + m1 s; zero below degree 4.
    m: [u32; 2],
    /// m^((p-1)/2), so that u^p = u_frob * u.
    u_frob: [u32; 2],
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for d in [2u64, 3, 5, 7, 11, 13] {
        if n.is_multiple_of(d) {
            return n == d;
        }
    }
    let mut d = 17u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldDesc {
    /// GF(p) for an odd prime `p`.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if p == 2 {
            return Err(FieldError::EvenCharacteristic);
        }
        if p > MAX_CHARACTERISTIC {
            return Err(FieldError::TooLarge(p));
        }
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldDesc {
            p: p as u32,
            degree: 1,
            t: 0,
            m: [0, 0],
            u_frob: [0, 0],
        })
    }

    /// GF(p) for any prime, including 2. Only prime-field arithmetic and
    /// polynomial work over it are meaningful when `p = 2`.
    pub(crate) fn prime_any(p: u64) -> Result<Self, FieldError> {
        if p == 2 {
            return Ok(FieldDesc {
                p: 2,
                degree: 1,
                t: 0,
                m: [0, 0],
                u_frob: [0, 0],
            });
        }
        Self::prime(p)
    }

    /// GF(p^degree) with the default tower: at each level the first
    /// non-square in enumeration order is adjoined.
    pub fn new(p: u64, degree: u32) -> Result<Self, FieldError> {
        let mut field = Self::prime(p)?;
        match degree {
            1 => {}
            2 | 4 => {
                while field.degree < degree {
                    let d = field.smallest_nonresidue();
                    field = field.extend_quadratic(d)?;
                }
            }
            d => return Err(FieldError::UnsupportedDegree(d)),
        }
        Ok(field)
    }

    /// Adjoins a square root of the non-square `d`.
    pub fn extend_quadratic(&self, d: Elem) -> Result<Self, FieldError> {
        if self.degree >= 4 {
            return Err(FieldError::UnsupportedDegree(self.degree * 2));
        }
        self.check(d)?;
        if d.is_zero() || self.is_square(d)? {
            return Err(FieldError::SquareParameter(self.format(d)));
        }
        let mut next = *self;
        match self.degree {
            1 => {
                next.degree = 2;
                next.t = d.0[0];
            }
            _ => {
                next.degree = 4;
                next.m = [d.0[0], d.0[1]];
                let half = (self.p as u64 - 1) / 2;
                let g = self.pow(d, half);
                next.u_frob = [g.0[0], g.0[1]];
            }
        }
        Ok(next)
    }

    pub fn characteristic(&self) -> u64 {
        self.p as u64
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Cardinality q = p^e.
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.degree)
    }

    /// The parameter t with s^2 = t (degree >= 2).
    pub fn tower_t(&self) -> Option<Elem> {
        (self.degree >= 2).then_some(Elem([self.t, 0, 0, 0]))
    }

    /// The parameter m with u^2 = m (degree 4).
    pub fn tower_m(&self) -> Option<Elem> {
        (self.degree == 4).then_some(Elem([self.m[0], self.m[1], 0, 0]))
    }

    /// The subfield of the given degree, sharing this tower.
    pub fn subfield(&self, degree: u32) -> Result<Self, FieldError> {
        if degree == 0 || !self.degree.is_multiple_of(degree) {
            return Err(FieldError::BadSubDegree {
                sub: degree,
                degree: self.degree,
            });
        }
        let mut sub = *self;
        sub.degree = degree;
        if degree < 4 {
            sub.m = [0, 0];
            sub.u_frob = [0, 0];
        }
        if degree < 2 {
            sub.t = 0;
        }
        Ok(sub)
    }

    /// Degrees of the proper subfields, smallest first.
    pub fn proper_subfield_degrees(&self) -> Vec<u32> {
        [1, 2].into_iter().filter(|&d| d < self.degree).collect()
    }

    pub fn contains(&self, x: Elem) -> bool {
        let e = self.degree as usize;
        x.0[..e].iter().all(|&c| c < self.p) && x.0[e..].iter().all(|&c| c == 0)
    }

    pub fn check(&self, x: Elem) -> Result<Elem, FieldError> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(FieldError::Mismatch {
                p: self.p as u64,
                degree: self.degree,
            })
        }
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem([n.rem_euclid(self.p as i64) as u32, 0, 0, 0])
    }

    /// Builds an element from coefficients, reducing each modulo p.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<Elem, FieldError> {
        if coeffs.len() > self.degree as usize {
            return Err(FieldError::Mismatch {
                p: self.p as u64,
                degree: self.degree,
            });
        }
        let mut c = [0u32; 4];
        for (slot, &v) in c.iter_mut().zip(coeffs) {
            *slot = v.rem_euclid(self.p as i64) as u32;
        }
        Ok(Elem(c))
    }

    /// Position of `x` in enumeration order.
    pub fn index(&self, x: Elem) -> u64 {
        let p = self.p as u64;
        let c = x.0;
        c[0] as u64 + p * (c[1] as u64 + p * (c[2] as u64 + p * c[3] as u64))
    }

    /// Inverse of [`FieldDesc::index`].
    pub fn element(&self, mut index: u64) -> Elem {
        let p = self.p as u64;
        let mut c = [0u32; 4];
        for slot in c.iter_mut().take(self.degree as usize) {
            *slot = (index % p) as u32;
            index /= p;
        }
        Elem(c)
    }

    /// All elements, each once, in enumeration order starting from 0.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    /// All nonzero elements in enumeration order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (1..self.order()).map(move |i| self.element(i))
    }

    #[inline]
    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        let p = self.p;
        Elem(std::array::from_fn(|i| {
            let s = x.0[i] + y.0[i];
            if s >= p {
                s - p
            } else {
                s
            }
        }))
    }

    #[inline]
    pub fn neg(&self, x: Elem) -> Elem {
        let p = self.p;
        Elem(x.0.map(|c| if c == 0 { 0 } else { p - c }))
    }

    #[inline]
    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    /// Multiplies by an integer.
    pub fn scale(&self, x: Elem, n: i64) -> Elem {
        self.mul(x, self.from_int(n))
    }

    #[inline]
    fn mul2(&self, x: [u32; 2], y: [u32; 2]) -> [u32; 2] {
        let p = self.p as u64;
        let (x0, x1, y0, y1) = (x[0] as u64, x[1] as u64, y[0] as u64, y[1] as u64);
        let r0 = (x0 * y0 + self.t as u64 * (x1 * y1 % p)) % p;
        let r1 = (x0 * y1 + x1 * y0) % p;
        [r0 as u32, r1 as u32]
    }

    #[inline]
    fn add2(&self, x: [u32; 2], y: [u32; 2]) -> [u32; 2] {
        let p = self.p;
        let a = x[0] + y[0];
        let b = x[1] + y[1];
        [
            if a >= p { a - p } else { a },
            if b >= p { b - p } else { b },
        ]
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        let p = self.p as u64;
        match self.degree {
            1 => Elem([(x.0[0] as u64 * y.0[0] as u64 % p) as u32, 0, 0, 0]),
            2 => {
                let r = self.mul2([x.0[0], x.0[1]], [y.0[0], y.0[1]]);
                Elem([r[0], r[1], 0, 0])
            }
            _ => {
                let (a0, a1) = ([x.0[0], x.0[1]], [x.0[2], x.0[3]]);
                let (b0, b1) = ([y.0[0], y.0[1]], [y.0[2], y.0[3]]);
                let low = self.add2(self.mul2(a0, b0), self.mul2(self.m, self.mul2(a1, b1)));
                let high = self.add2(self.mul2(a0, b1), self.mul2(a1, b0));
                Elem([low[0], low[1], high[0], high[1]])
            }
        }
    }

    pub fn square(&self, x: Elem) -> Elem {
        self.mul(x, x)
    }

    /// x^n by square-and-multiply; x^0 = 1 for every x, including 0.
    pub fn pow(&self, x: Elem, mut n: u64) -> Elem {
        let mut base = x;
        let mut acc = Elem::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    pub fn inv(&self, x: Elem) -> Result<Elem, FieldError> {
        if x.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(x, self.order() - 2))
    }

    pub fn div(&self, x: Elem, y: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// One application of x -> x^p, as a GF(p)-linear map on coefficients.
    fn frobenius_once(&self, x: Elem) -> Elem {
        let p = self.p;
        let negate = |c: u32| if c == 0 { 0 } else { p - c };
        match self.degree {
            1 => x,
            // s^p = t^((p-1)/2) s = -s
            2 => Elem([x.0[0], negate(x.0[1]), 0, 0]),
            _ => {
                let a0 = [x.0[0], negate(x.0[1])];
                let a1 = [x.0[2], negate(x.0[3])];
                let h = self.mul2(a1, self.u_frob);
                Elem([a0[0], a0[1], h[0], h[1]])
            }
        }
    }

    /// x^(p^i).
    pub fn frobenius(&self, x: Elem, i: u64) -> Elem {
        let steps = i % self.degree as u64;
        (0..steps).fold(x, |acc, _| self.frobenius_once(acc))
    }

    /// Norm down to the subfield of degree `sub_degree`: the product of the
    /// conjugates x^(p^(j * sub_degree)).
    pub fn norm(&self, x: Elem, sub_degree: u32) -> Result<Elem, FieldError> {
        if sub_degree == 0 || !self.degree.is_multiple_of(sub_degree) {
            return Err(FieldError::BadSubDegree {
                sub: sub_degree,
                degree: self.degree,
            });
        }
        let count = self.degree / sub_degree;
        let mut acc = x;
        let mut conj = x;
        for _ in 1..count {
            conj = self.frobenius(conj, sub_degree as u64);
            acc = self.mul(acc, conj);
        }
        Ok(acc)
    }

    /// Euler's criterion: x^((q-1)/2) = 1.
    pub fn is_square(&self, x: Elem) -> Result<bool, FieldError> {
        if x.is_zero() {
            return Err(FieldError::ZeroSquareClass);
        }
        Ok(self.pow(x, (self.order() - 1) / 2) == Elem::ONE)
    }

    /// Non-squares in enumeration order.
    pub fn nonresidues(&self) -> impl Iterator<Item = Elem> + '_ {
        self.nonzero_elements()
            .filter(move |&x| !self.is_square(x).unwrap_or(true))
    }

    /// The first non-square in enumeration order.
    pub fn smallest_nonresidue(&self) -> Elem {
        self.nonresidues()
            .next()
            .expect("a field of odd order has non-squares")
    }

    /// Square root in the prime field (Tonelli-Shanks); the smaller root.
    pub fn sqrt_prime(&self, a: u64) -> Option<u64> {
        sqrt_mod(a, self.p as u64)
    }

    /// Comma-separated coefficients, e.g. `3,1,0,0`.
    pub fn format(&self, x: Elem) -> String {
        x.0[..self.degree as usize]
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the comma-separated coefficient format. Fewer than `e`
    /// coefficients are padded with zeros; every coefficient must be in
    /// `[0, p)`.
    pub fn parse(&self, text: &str) -> Result<Elem, FieldError> {
        let err = || FieldError::Parse(text.to_string());
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.is_empty() || parts.len() > self.degree as usize {
            return Err(err());
        }
        let mut c = [0u32; 4];
        for (slot, part) in c.iter_mut().zip(&parts) {
            let v: u64 = part.parse().map_err(|_| err())?;
            if v >= self.p as u64 {
                return Err(err());
            }
            *slot = v as u32;
        }
        Ok(Elem(c))
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.degree)
        }
    }
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128 % m as u128;
    let mut b = base as u128 % m as u128;
    let m128 = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Square root modulo an odd prime; returns the smaller of the two roots.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let root = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut r = pow_mod(a, q.div_ceil(2), p);
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = mulm(tt, tt);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = mulm(b, b);
            t = mulm(t, c);
            r = mulm(r, b);
        }
        r
    };
    Some(root.min(p - root))
}
