//! Exact polynomial algebra over the rationals and integer factorization.
//!
//! The resultant of two integer polynomials is divisible by exactly those
//! primes where their reductions share a root over the algebraic closure of
//! GF(p) (or where both leading coefficients vanish). [`exceptional_primes`]
//! uses this to locate every prime at which two polynomial families can have
//! a common zero, then inspects the gcd over GF(p) at each such prime.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{Elem, FieldDesc, FieldError};
use crate::poly::{gcd_poly, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("resultant needs at least one non-constant polynomial")]
    BothConstant,
    #[error("cannot factor zero")]
    FactorZero,
    #[error("the prime {0} divides a denominator")]
    DenominatorVanishes(u64),
    #[error("polynomials share a factor over the rationals (resultant is zero)")]
    NotCoprime,
    #[error("exceptional-prime analysis needs two non-constant polynomials")]
    ConstantInput,
    #[error("malformed polynomial `{0}`")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Univariate polynomial with rational coefficients; `coeffs[i]` multiplies
/// `x^i`. Trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZPoly {
    coeffs: Vec<BigRational>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn from_bigints(coeffs: Vec<BigInt>) -> Self {
        Self::new(coeffs.into_iter().map(BigRational::from_integer).collect())
    }

    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^n`.
    pub fn monomial(n: usize, c: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &ZPoly) -> ZPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> ZPoly {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() || other.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> ZPoly {
        (0..e).fold(ZPoly::constant(BigRational::one()), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Splits into `(F, d)` with `self = F / d`, `F` integral and `d > 0` the
    /// lcm of the denominators.
    pub fn to_integer(&self) -> (Vec<BigInt>, BigInt) {
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        (ints, den)
    }

    /// Renders with the given variable name, e.g. `4/9*b^4 - 2*b + 1`.
    pub fn display_in(&self, var: char) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let unit = abs.is_one();
            if !unit || e == 0 {
                out.push_str(&abs.to_string());
            }
            if e > 0 {
                if !unit {
                    out.push('*');
                }
                out.push(var);
                if e > 1 {
                    out.push_str(&format!("^{e}"));
                }
            }
        }
        out
    }

    /// Parses a sum of terms `[coef][*][var[^e]]`; the coefficient may be an
    /// integer or a fraction `a/b`. Any single letter is accepted as the
    /// variable, but only one variable may appear.
    pub fn parse(text: &str) -> Result<ZPoly, ExactError> {
        let err = || ExactError::Parse(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err());
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && !(i > 0 && current.ends_with('^')) {
                if !current.is_empty() {
                    terms.push((negative, std::mem::take(&mut current)));
                } else if i > 0 {
                    return Err(err());
                }
                negative = ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(err());
        }
        terms.push((negative, current));

        let mut var: Option<char> = None;
        let mut acc = ZPoly::zero();
        for (negative, term) in terms {
            let split = term.find(|c: char| c.is_ascii_alphabetic());
            let (coef_txt, var_txt) = match split {
                Some(pos) => (&term[..pos], &term[pos..]),
                None => (term.as_str(), ""),
            };
            let coef_txt = coef_txt.strip_suffix('*').unwrap_or(coef_txt);
            let mut coef = if coef_txt.is_empty() {
                if var_txt.is_empty() {
                    return Err(err());
                }
                BigRational::one()
            } else {
                parse_rational(coef_txt).ok_or_else(err)?
            };
            if negative {
                coef = -coef;
            }
            let exponent = if var_txt.is_empty() {
                0
            } else {
                let mut chars = var_txt.chars();
                let v = chars.next().ok_or_else(err)?;
                if var.is_some_and(|w| w != v) {
                    return Err(err());
                }
                var = Some(v);
                let rest: String = chars.collect();
                if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .and_then(|e| e.parse::<usize>().ok())
                        .ok_or_else(err)?
                }
            };
            acc = acc.add(&ZPoly::monomial(exponent, coef));
        }
        Ok(acc)
    }
}

impl FromStr for ZPoly {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ZPoly::parse(s)
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in('x'))
    }
}

pub(crate) fn parse_rational(text: &str) -> Option<BigRational> {
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(text.parse().ok()?)),
    }
}

fn int_degree(a: &[BigInt]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

fn trim(mut a: Vec<BigInt>) -> Vec<BigInt> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

/// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) a = b q + r`.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = int_degree(b).expect("nonzero divisor");
    let lcb = &b[db];
    let mut r = trim(a.to_vec());
    let mut e = r.len() as i64 - db as i64;
    while let Some(dr) = int_degree(&r) {
        if dr < db {
            break;
        }
        let lead = r[dr].clone();
        for c in r.iter_mut() {
            *c *= lcb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[dr - db + j] -= &lead * bj;
        }
        r = trim(r);
        e -= 1;
    }
    let factor = num_traits::pow(lcb.clone(), e.max(0) as usize);
    trim(r.into_iter().map(|c| c * &factor).collect())
}

/// Subresultant resultant of two integer polynomials.
fn resultant_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    let (Some(da), Some(db)) = (int_degree(&a), int_degree(&b)) else {
        return BigInt::zero();
    };
    if da == 0 {
        return num_traits::pow(a[0].clone(), db);
    }
    if db == 0 {
        return num_traits::pow(b[0].clone(), da);
    }
    let ca = content(&a);
    let cb = content(&b);
    a = a.into_iter().map(|c| c / &ca).collect();
    b = b.into_iter().map(|c| c / &cb).collect();
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    let mut s = BigInt::one();
    let t = num_traits::pow(ca, db) * num_traits::pow(cb, da);
    if da < db {
        std::mem::swap(&mut a, &mut b);
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
    }
    loop {
        let da = int_degree(&a).unwrap();
        let db = int_degree(&b).unwrap();
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = pseudo_rem(&a, &b);
        a = b;
        let divisor = &g * num_traits::pow(h.clone(), delta);
        b = r.into_iter().map(|c| c / &divisor).collect();
        g = a[int_degree(&a).unwrap()].clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => num_traits::pow(g.clone(), d) / num_traits::pow(h, d - 1),
        };
        match int_degree(&b) {
            None => return BigInt::zero(),
            Some(0) => break,
            Some(_) => {}
        }
    }
    let da = int_degree(&a).unwrap();
    let lb = b[0].clone();
    let h = num_traits::pow(lb, da) / num_traits::pow(h, da - 1);
    s * t * h
}

/// Resultant over the rationals.
pub fn resultant(f: &ZPoly, g: &ZPoly) -> Result<BigRational, ExactError> {
    let (df, dg) = (f.degree(), g.degree());
    if df.unwrap_or(0) == 0 && dg.unwrap_or(0) == 0 {
        return Err(ExactError::BothConstant);
    }
    if f.is_zero() || g.is_zero() {
        return Ok(BigRational::zero());
    }
    let (df, dg) = (df.unwrap(), dg.unwrap());
    let (fi, fd) = f.to_integer();
    let (gi, gd) = g.to_integer();
    let num = resultant_int(&fi, &gi);
    let den = num_traits::pow(fd, dg) * num_traits::pow(gd, df);
    Ok(BigRational::new(num, den))
}

/// Sign and prime-power decomposition of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    /// Increasing primes with multiplicities.
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    pub fn product(&self) -> BigInt {
        let mag = self.factors.iter().fold(BigUint::one(), |acc, (p, e)| {
            acc * num_traits::pow(p.clone(), *e as usize)
        });
        let sign = if self.sign < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        };
        BigInt::from_biguint(sign, mag)
    }

    pub fn primes(&self) -> Vec<BigUint> {
        self.factors.iter().map(|(p, _)| p.clone()).collect()
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.sign < 0 {
            parts.push("-1".into());
        }
        for (p, e) in &self.factors {
            if *e == 1 {
                parts.push(p.to_string());
            } else {
                parts.push(format!("{p}^{e}"));
            }
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        f.write_str(&parts.join(" * "))
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;
const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller-Rabin with the first thirteen prime bases; deterministic below
/// 3.3 * 10^24.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in &MR_BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'bases: for &b in &MR_BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho; returns a nontrivial factor of the
/// odd composite `n`.
fn pollard_brent(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        const BATCH: u64 = 128;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(&n);
    let rest = &n / &d;
    split_into(d, out);
    split_into(rest, out);
}

/// Complete factorization: trial division up to 10^6, then Pollard-Brent
/// rho on the cofactor with Miller-Rabin on every piece.
pub fn factor_integer(n: &BigInt) -> Result<Factorization, ExactError> {
    if n.is_zero() {
        return Err(ExactError::FactorZero);
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut m = n.magnitude().clone();
    let mut primes: Vec<BigUint> = Vec::new();
    let mut d: u64 = 2;
    while d <= TRIAL_LIMIT {
        if BigUint::from(d) * BigUint::from(d) > m {
            break;
        }
        while (&m % d).is_zero() {
            primes.push(BigUint::from(d));
            m /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    split_into(m, &mut primes);
    primes.sort();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { sign, factors })
}

fn mod_u64(x: &BigInt, p: u64) -> u64 {
    crate::combinatorics::big_mod(x, p)
}

/// Coefficientwise image in GF(p); denominators are inverted modulo p.
pub fn reduce_mod_p(f: &ZPoly, p: u64) -> Result<Poly, ExactError> {
    let field = FieldDesc::prime_any(p)?;
    let mut coeffs = Vec::with_capacity(f.coeffs.len());
    for c in &f.coeffs {
        let den = mod_u64(c.denom(), p);
        if den == 0 {
            return Err(ExactError::DenominatorVanishes(p));
        }
        let num = Elem([mod_u64(c.numer(), p) as u32, 0, 0, 0]);
        let den = Elem([den as u32, 0, 0, 0]);
        coeffs.push(field.div(num, den)?);
    }
    Ok(Poly::new(field, coeffs)?)
}

/// What happens to a pair of polynomials at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalPrime {
    pub prime: u64,
    /// Monic gcd of the reductions; the constant 1 when they are coprime.
    pub gcd: Poly,
    /// `None` when the gcd is constant.
    pub irreducible: Option<bool>,
    /// Roots of the gcd in GF(p), ascending.
    pub roots: Vec<u64>,
}

impl ExceptionalPrime {
    pub fn is_nontrivial(&self) -> bool {
        self.gcd.degree().unwrap_or(0) > 0
    }

    /// The gcd as a product of linear factors `(v+c)` when it splits
    /// completely, otherwise its expanded form.
    pub fn factored(&self, var: char) -> String {
        let deg = self.gcd.degree().unwrap_or(0);
        if deg > 0 && self.roots.len() == deg {
            self.roots
                .iter()
                .rev()
                .map(|&r| {
                    let c = (self.prime - r) % self.prime;
                    if c == 0 {
                        format!("{var}")
                    } else {
                        format!("({var}+{c})")
                    }
                })
                .collect()
        } else {
            self.expanded(var)
        }
    }

    /// Monic gcd rendered as `v^2 + 30*v + 15` with residues in `[0, p)`.
    pub fn expanded(&self, var: char) -> String {
        let terms: Vec<String> = self
            .gcd
            .terms()
            .into_iter()
            .rev()
            .map(|(e, c)| {
                let c = c.coeffs()[0];
                let coef = if c == 1 && e > 0 {
                    String::new()
                } else {
                    c.to_string()
                };
                let sep = if coef.is_empty() || e == 0 { "" } else { "*" };
                match e {
                    0 => coef,
                    1 => format!("{coef}{sep}{var}"),
                    _ => format!("{coef}{sep}{var}^{e}"),
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Full exceptional-prime analysis of a coprime pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalAnalysis {
    pub resultant: BigRational,
    pub factorization: Factorization,
    pub primes: Vec<ExceptionalPrime>,
}

impl ExceptionalAnalysis {
    /// Primes at which the reductions have a nonconstant common factor.
    pub fn nontrivial_primes(&self) -> Vec<u64> {
        self.primes
            .iter()
            .filter(|e| e.is_nontrivial())
            .map(|e| e.prime)
            .collect()
    }

    pub fn at(&self, prime: u64) -> Option<&ExceptionalPrime> {
        self.primes.iter().find(|e| e.prime == prime)
    }
}

/// Inspects the gcd of the reductions modulo one prime.
pub fn gcd_at_prime(f: &ZPoly, g: &ZPoly, prime: u64) -> Result<ExceptionalPrime, ExactError> {
    let (fi, _) = f.to_integer();
    let (gi, _) = g.to_integer();
    let fp = reduce_mod_p(&ZPoly::from_bigints(fi), prime)?;
    let gp = reduce_mod_p(&ZPoly::from_bigints(gi), prime)?;
    let field = *fp.field();
    let mut gcd = gcd_poly(&fp, &gp)?;
    if gcd.is_zero() || gcd.degree() == Some(0) {
        gcd = Poly::constant(field, Elem::ONE);
    }
    let (irreducible, roots) = if gcd.degree().unwrap_or(0) > 0 {
        let roots = gcd.roots()?.iter().map(|r| r.coeffs()[0] as u64).collect();
        (Some(gcd.is_irreducible()?), roots)
    } else {
        (None, Vec::new())
    };
    Ok(ExceptionalPrime {
        prime,
        gcd,
        irreducible,
        roots,
    })
}

/// Every prime dividing the resultant or a leading coefficient, each with
/// the gcd of the reductions, its irreducibility and its roots.
pub fn exceptional_primes(f: &ZPoly, g: &ZPoly) -> Result<ExceptionalAnalysis, ExactError> {
    if f.degree().unwrap_or(0) == 0 || g.degree().unwrap_or(0) == 0 {
        return Err(ExactError::ConstantInput);
    }
    let res = resultant(f, g)?;
    if res.is_zero() {
        return Err(ExactError::NotCoprime);
    }
    let (fi, _) = f.to_integer();
    let (gi, _) = g.to_integer();
    let mut candidates: Vec<u64> = Vec::new();
    let numer = res.numer().clone();
    let factorization = factor_integer(&numer)?;
    for source in [
        numer,
        fi.last().unwrap().clone(),
        gi.last().unwrap().clone(),
    ] {
        for p in factor_integer(&source)?.primes() {
            candidates.push(p.to_u64().expect("exceptional primes fit in u64"));
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let primes = candidates
        .into_iter()
        .map(|p| gcd_at_prime(f, g, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExceptionalAnalysis {
        resultant: res,
        factorization,
        primes,
    })
}
