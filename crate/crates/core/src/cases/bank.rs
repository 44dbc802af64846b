//! The coefficient formula bank: exponent families with claimed closed
//! forms for the top coefficient of a norm of their difference.
//!
//! The bank is a line-oriented text file shipped with the crate. Its
//! SHA-256 digest is pinned in [`BANK_CHECKSUM`] so that reports can record
//! exactly which formulas they were checked against.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exact::{parse_rational, ZPoly};

pub const BANK_TEXT: &str = include_str!("../../data/coeff_bank.txt");

/// SHA-256 of [`BANK_TEXT`].
pub const BANK_CHECKSUM: &str = "5e1965715fe2e2ecd90345b472e43b66cb4001b98ce077036b66152e09927ae0";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BankError {
    #[error("bank line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("case `{case}` has no formula for t = {t}")]
    UnknownT { case: String, t: i64 },
    #[error("the prime {0} divides a formula denominator")]
    DenominatorVanishes(u64),
    #[error("digit {index} of case `{case}` is {value}, outside [0, p-1]")]
    DigitOutOfRange {
        case: String,
        index: usize,
        value: i64,
    },
}

pub fn checksum(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `constant + p_coeff * p + a_coeff * a + b_coeff * b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub constant: i64,
    pub p: i64,
    pub a: i64,
    pub b: i64,
}

impl LinExpr {
    pub fn parse(text: &str) -> Option<LinExpr> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return None;
        }
        let mut out = LinExpr::default();
        let mut rest = compact.as_str();
        let mut first = true;
        while !rest.is_empty() {
            let mut sign = 1;
            if let Some(r) = rest.strip_prefix('-') {
                sign = -1;
                rest = r;
            } else if let Some(r) = rest.strip_prefix('+') {
                rest = r;
            } else if !first {
                return None;
            }
            first = false;
            let end = rest.find(['+', '-']).unwrap_or(rest.len());
            let term = &rest[..end];
            rest = &rest[end..];
            let (coef, var) = match term.find(|c: char| c.is_ascii_alphabetic()) {
                Some(pos) => {
                    let c = term[..pos].trim_end_matches('*');
                    let c = if c.is_empty() { 1 } else { c.parse().ok()? };
                    (c, &term[pos..])
                }
                None => (term.parse().ok()?, ""),
            };
            let slot = match var {
                "" => &mut out.constant,
                "p" => &mut out.p,
                "a" => &mut out.a,
                "b" => &mut out.b,
                _ => return None,
            };
            *slot += sign * coef;
        }
        Some(out)
    }

    pub fn eval(&self, p: i64, a: i64, b: i64) -> i64 {
        self.constant + self.p * p + self.a * a + self.b * b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirEntry {
    Int(i64),
    T,
}

/// Which norm of the difference is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormPower {
    /// `1 + p + p^2 + p^3`, the norm down to GF(p).
    Full,
    /// `1 + p^2`, the norm down to GF(p^2).
    Half,
}

impl NormPower {
    /// Degree of the subfield the norm lands in.
    pub fn sub_degree(&self) -> u32 {
        match self {
            NormPower::Full => 1,
            NormPower::Half => 2,
        }
    }

    pub fn exponent(&self, p: u64) -> u64 {
        match self {
            NormPower::Full => 1 + p + p * p + p * p * p,
            NormPower::Half => 1 + p * p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormPower::Full => "full",
            NormPower::Half => "half",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorBase {
    Const(BigRational),
    Poly {
        var: char,
        poly: ZPoly,
    },
    /// `binom(var + offset, k)` as the polynomial `v (v-1) ... (v-k+1) / k!`.
    Binom {
        var: char,
        offset: i64,
        k: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub base: FactorBase,
    pub exp: u32,
}

fn var_value(var: char, a: i64, b: i64) -> i64 {
    if var == 'a' {
        a
    } else {
        b
    }
}

impl Factor {
    fn eval(&self, a: i64, b: i64) -> BigRational {
        let base = match &self.base {
            FactorBase::Const(c) => c.clone(),
            FactorBase::Poly { var, poly } => {
                poly.eval(&BigRational::from_integer(var_value(*var, a, b).into()))
            }
            FactorBase::Binom { var, offset, k } => {
                let v = var_value(*var, a, b) + offset;
                let mut num = BigInt::one();
                let mut den = BigInt::one();
                for i in 0..*k as i64 {
                    num *= v - i;
                    den *= i + 1;
                }
                BigRational::new(num, den)
            }
        };
        num_traits::pow(base, self.exp as usize)
    }

    fn degree(&self) -> usize {
        match &self.base {
            FactorBase::Const(_) => 0,
            FactorBase::Poly { poly, .. } => poly.degree().unwrap_or(0) * self.exp as usize,
            FactorBase::Binom { k, .. } => *k as usize * self.exp as usize,
        }
    }
}

/// Splits `text` at `sep` outside parentheses.
fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn poly_variable(text: &str) -> Option<char> {
    text.chars().find(|c| c.is_ascii_alphabetic())
}

fn parse_factor(text: &str) -> Option<Factor> {
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(inner) = text.strip_prefix("binom(") {
        let close = inner.find(')')?;
        let (args, tail) = (&inner[..close], &inner[close + 1..]);
        let exp = match tail.strip_prefix('^') {
            Some(e) => e.parse().ok()?,
            None if tail.is_empty() => 1,
            None => return None,
        };
        let (top, k) = args.split_once(',')?;
        let top = LinExpr::parse(top)?;
        let var = if top.a != 0 { 'a' } else { 'b' };
        if top.p != 0 || (top.a != 0 && top.b != 0) || top.a.max(top.b) != 1 {
            return None;
        }
        return Some(Factor {
            base: FactorBase::Binom {
                var,
                offset: top.constant,
                k: k.parse().ok()?,
            },
            exp,
        });
    }
    if let Some(inner) = text.strip_prefix('(') {
        let close = inner.rfind(')')?;
        let (body, tail) = (&inner[..close], &inner[close + 1..]);
        let exp = match tail.strip_prefix('^') {
            Some(e) => e.parse().ok()?,
            None if tail.is_empty() => 1,
            None => return None,
        };
        let var = poly_variable(body)?;
        return Some(Factor {
            base: FactorBase::Poly {
                var,
                poly: ZPoly::parse(body).ok()?,
            },
            exp,
        });
    }
    if let Some(c) = parse_rational(&text) {
        return Some(Factor {
            base: FactorBase::Const(c),
            exp: 1,
        });
    }
    let var = poly_variable(&text)?;
    Some(Factor {
        base: FactorBase::Poly {
            var,
            poly: ZPoly::parse(&text).ok()?,
        },
        exp: 1,
    })
}

/// A product of factors in the case variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    text: String,
    factors: Vec<Factor>,
}

impl Formula {
    pub fn parse(text: &str) -> Option<Formula> {
        let factors = split_top_level(text, '*')
            .into_iter()
            .map(parse_factor)
            .collect::<Option<Vec<_>>>()?;
        Some(Formula {
            text: text.trim().to_string(),
            factors,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn eval(&self, a: i64, b: i64) -> BigRational {
        self.factors
            .iter()
            .fold(BigRational::one(), |acc, f| acc * f.eval(a, b))
    }

    /// Exact value reduced modulo `p`.
    pub fn eval_mod(&self, a: i64, b: i64, p: u64) -> Result<u64, BankError> {
        reduce_rational(&self.eval(a, b), p)
    }

    fn main_index(&self) -> Option<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| match &f.base {
                FactorBase::Poly { poly, .. } => {
                    f.exp == 1
                        && f.degree() >= 2
                        && poly.coeffs().iter().filter(|c| !c.is_zero()).count() > 1
                }
                _ => false,
            })
            .max_by_key(|(i, f)| (f.degree(), usize::MAX - i))
            .map(|(i, _)| i)
    }

    /// The polynomial factor of highest degree (at least 2), whose common
    /// roots with a sibling formula decide the exceptional primes.
    pub fn main_factor(&self) -> Option<&ZPoly> {
        self.main_index().map(|i| match &self.factors[i].base {
            FactorBase::Poly { poly, .. } => poly,
            _ => unreachable!(),
        })
    }

    /// True when the product of all factors other than the main one is zero
    /// modulo `p` at `(a, b)`.
    pub fn prefactor_vanishes(&self, a: i64, b: i64, p: u64) -> Result<bool, BankError> {
        let skip = self.main_index();
        let value = self
            .factors
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .fold(BigRational::one(), |acc, (_, f)| acc * f.eval(a, b));
        Ok(reduce_rational(&value, p)? == 0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn reduce_rational(x: &BigRational, p: u64) -> Result<u64, BankError> {
    let num = crate::combinatorics::big_mod(x.numer(), p);
    let den = crate::combinatorics::big_mod(x.denom(), p);
    if den == 0 {
        return Err(BankError::DenominatorVanishes(p));
    }
    let inv = crate::field::pow_mod(den, p - 2, p);
    Ok((num as u128 * inv as u128 % p as u128) as u64)
}

/// One exponent family with its direction pattern and formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffCase {
    pub id: String,
    pub k: usize,
    pub digits: [LinExpr; 4],
    /// Inclusive ranges for the case variables; `a` is 0 when absent.
    pub ranges: Vec<(char, LinExpr, LinExpr)>,
    pub dirs: Vec<DirEntry>,
    pub power: NormPower,
    pub formulas: Vec<(i64, Formula)>,
}

impl CoeffCase {
    fn range_of(&self, var: char, p: i64) -> (i64, i64) {
        self.ranges
            .iter()
            .find(|(v, _, _)| *v == var)
            .map(|(_, lo, hi)| (lo.eval(p, 0, 0), hi.eval(p, 0, 0)))
            .unwrap_or((0, 0))
    }

    /// Whether the case uses the variable `a`.
    pub fn uses_a(&self) -> bool {
        self.ranges.iter().any(|(v, _, _)| *v == 'a')
    }

    /// Admissible `(a, b)` pairs at `p`, `a` outermost.
    pub fn params(&self, p: u64) -> Vec<(i64, i64)> {
        let p = p as i64;
        let (alo, ahi) = self.range_of('a', p);
        let (blo, bhi) = self.range_of('b', p);
        (alo..=ahi)
            .flat_map(|a| (blo..=bhi).map(move |b| (a, b)))
            .collect()
    }

    pub fn digit_values(&self, p: u64, a: i64, b: i64) -> Result<[u64; 4], BankError> {
        let mut out = [0u64; 4];
        for (i, d) in self.digits.iter().enumerate() {
            let v = d.eval(p as i64, a, b);
            if v < 0 || v >= p as i64 {
                return Err(BankError::DigitOutOfRange {
                    case: self.id.clone(),
                    index: i,
                    value: v,
                });
            }
            out[i] = v as u64;
        }
        Ok(out)
    }

    pub fn exponent(&self, p: u64, a: i64, b: i64) -> Result<u64, BankError> {
        let d = self.digit_values(p, a, b)?;
        Ok(d[0] + p * (d[1] + p * (d[2] + p * d[3])))
    }

    /// The direction tuple with `t` substituted, as small integers.
    pub fn directions(&self, t: i64) -> Vec<i64> {
        self.dirs
            .iter()
            .map(|d| match d {
                DirEntry::Int(v) => *v,
                DirEntry::T => t,
            })
            .collect()
    }

    pub fn formula(&self, t: i64) -> Result<&Formula, BankError> {
        self.formulas
            .iter()
            .find(|(tt, _)| *tt == t)
            .map(|(_, f)| f)
            .ok_or_else(|| BankError::UnknownT {
                case: self.id.clone(),
                t,
            })
    }

    pub fn t_values(&self) -> Vec<i64> {
        self.formulas.iter().map(|(t, _)| *t).collect()
    }

    /// Main factors of the `t = 1` and `t = 2` formulas, when both exist.
    pub fn exceptional_pair(&self) -> Option<(ZPoly, ZPoly)> {
        let f1 = self.formula(1).ok()?.main_factor()?.clone();
        let f2 = self.formula(2).ok()?.main_factor()?.clone();
        Some((f1, f2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseBank {
    pub version: u32,
    pub checksum: String,
    pub cases: Vec<CoeffCase>,
}

#[derive(Default)]
struct PartialCase {
    id: String,
    k: Option<usize>,
    digits: Option<[LinExpr; 4]>,
    ranges: Vec<(char, LinExpr, LinExpr)>,
    dirs: Option<Vec<DirEntry>>,
    power: Option<NormPower>,
    formulas: Vec<(i64, Formula)>,
}

impl CaseBank {
    pub fn builtin() -> CaseBank {
        Self::parse(BANK_TEXT).expect("shipped bank parses")
    }

    pub fn parse(text: &str) -> Result<CaseBank, BankError> {
        let mut version = None;
        let mut cases = Vec::new();
        let mut current: Option<PartialCase> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let err = |msg: &str| BankError::Parse {
                line,
                msg: msg.to_string(),
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k, v.trim()))
                .unwrap_or((content, ""));
            match (key, current.as_mut()) {
                ("bank-version", None) => {
                    version = Some(value.parse().map_err(|_| err("bad version"))?);
                }
                ("case", None) => {
                    if value.is_empty() {
                        return Err(err("case needs an id"));
                    }
                    current = Some(PartialCase {
                        id: value.to_string(),
                        ..Default::default()
                    });
                }
                ("end", Some(_)) => {
                    let c = current.take().unwrap();
                    let missing = |what: &str| err(&format!("case `{}` lacks `{what}`", c.id));
                    cases.push(CoeffCase {
                        k: c.k.ok_or_else(|| missing("k"))?,
                        digits: c.digits.ok_or_else(|| missing("digits"))?,
                        dirs: c.dirs.clone().ok_or_else(|| missing("dirs"))?,
                        power: c.power.ok_or_else(|| missing("power"))?,
                        ranges: c.ranges.clone(),
                        formulas: c.formulas.clone(),
                        id: c.id.clone(),
                    });
                }
                ("k", Some(c)) => c.k = Some(value.parse().map_err(|_| err("bad k"))?),
                ("digits", Some(c)) => {
                    let parts = value
                        .split(';')
                        .map(LinExpr::parse)
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| err("bad digit expression"))?;
                    c.digits = Some(parts.try_into().map_err(|_| err("expected four digits"))?);
                }
                ("range", Some(c)) => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    let [var, lo, hi] = parts[..] else {
                        return Err(err("expected `range VAR LO HI`"));
                    };
                    let var = match var {
                        "a" => 'a',
                        "b" => 'b',
                        _ => return Err(err("range variable must be a or b")),
                    };
                    let lo = LinExpr::parse(lo).ok_or_else(|| err("bad range bound"))?;
                    let hi = LinExpr::parse(hi).ok_or_else(|| err("bad range bound"))?;
                    c.ranges.push((var, lo, hi));
                }
                ("dirs", Some(c)) => {
                    let dirs = value
                        .split(';')
                        .map(|s| match s.trim() {
                            "t" => Some(DirEntry::T),
                            v => v.parse().ok().map(DirEntry::Int),
                        })
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| err("bad direction"))?;
                    c.dirs = Some(dirs);
                }
                ("power", Some(c)) => {
                    c.power = Some(match value {
                        "full" => NormPower::Full,
                        "half" => NormPower::Half,
                        _ => return Err(err("power must be full or half")),
                    });
                }
                ("formula", Some(c)) => {
                    let (t, body) = value
                        .split_once('=')
                        .ok_or_else(|| err("expected `formula T = ...`"))?;
                    let t = t.trim().parse().map_err(|_| err("bad t"))?;
                    let f = Formula::parse(body).ok_or_else(|| err("bad formula"))?;
                    c.formulas.push((t, f));
                }
                (other, _) => return Err(err(&format!("unexpected `{other}`"))),
            }
        }
        if current.is_some() {
            return Err(BankError::Parse {
                line: text.lines().count(),
                msg: "unterminated case".into(),
            });
        }
        Ok(CaseBank {
            version: version.ok_or(BankError::Parse {
                line: 0,
                msg: "missing bank-version".into(),
            })?,
            checksum: checksum(text),
            cases,
        })
    }

    pub fn get(&self, id: &str) -> Result<&CoeffCase, BankError> {
        self.cases
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| BankError::UnknownCase(id.to_string()))
    }
}
