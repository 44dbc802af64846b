//! Dedicated verifiers for the special constructions used when ruling out
//! exponents over GF(p^2) and GF(p^4): a non-square with a prescribed norm,
//! a Fermat-type equation, a projective point count, top-coefficient
//! identities, the coefficient formula bank, and explicit collisions.

pub mod bank;

use rayon::prelude::*;
use thiserror::Error;

pub use bank::{BankError, CaseBank, CoeffCase, NormPower, BANK_CHECKSUM};

use crate::combinatorics::{big_mod, binomial_big, s_closed};
use crate::difference::{
    nabla_eval, DifferenceError, PointwiseEvaluator, PowerTable, SubsetSums, MAX_TABLE_ORDER,
};
use crate::exact::{exceptional_primes, ExactError, ExceptionalAnalysis};
use crate::field::{pow_mod, sqrt_mod, Elem, FieldDesc, FieldError};
use crate::kpn::{find_collision, is_permutation, CollisionStrategy, KpnError};
use crate::poly::top_coeff_sum;

/// Fields above this order are out of reach for collision search.
pub const MAX_COLLISION_ORDER: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CasesError {
    #[error("p = {0} is below the smallest supported prime 5")]
    PrimeTooSmall(u64),
    #[error("p = {0} is not supported here")]
    UnsupportedPrime(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Difference(#[from] DifferenceError),
    #[error(transparent)]
    Kpn(#[from] KpnError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn require_at_least_5(p: u64) -> Result<(), CasesError> {
    FieldDesc::prime(p)?;
    if p < 5 {
        return Err(CasesError::PrimeTooSmall(p));
    }
    Ok(())
}

fn legendre_is_nonsquare(x: u64, p: u64) -> bool {
    !x.is_multiple_of(p) && pow_mod(x, (p - 1) / 2, p) == p - 1
}

/// A non-square `m = m1 + m2 s` of GF(p^2) with `Norm(1 + m) = 4`, where
/// `s^2 = t` and `Norm(m) = k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonquadWitness {
    pub p: u64,
    pub t: u64,
    pub k: u64,
    pub m1: u64,
    pub m2: u64,
    pub field: FieldDesc,
    pub m: Elem,
}

impl NonquadWitness {
    /// Re-checks every defining property with field arithmetic.
    pub fn check(&self) -> bool {
        let p = self.p;
        let f = &self.field;
        let prime = match FieldDesc::prime(p) {
            Ok(f) => f,
            Err(_) => return false,
        };
        let k_nonsquare = prime.is_square(prime.from_int(self.k as i64)) == Ok(false);
        let m_nonsquare = f.is_square(self.m) == Ok(false);
        let norm_ok = f.norm(f.add(Elem::ONE, self.m), 1) == Ok(f.from_int(4));
        let linear = (2 * self.m1 + self.k + p - 3).is_multiple_of(p);
        let quadratic = (self.m1 * self.m1 % p + p * p - self.t * (self.m2 * self.m2 % p) % p) % p
            == self.k % p;
        let shape = self.m == Elem([self.m1 as u32, self.m2 as u32, 0, 0])
            && f.tower_t() == Some(Elem([self.t as u32, 0, 0, 0]));
        k_nonsquare && m_nonsquare && norm_ok && linear && quadratic && shape
    }
}

/// Smallest non-square `k` of GF(p) for which `k^2 - 10k + 9` is also a
/// non-square; then `m1 = (3 - k) / 2` and `m2` is the smaller square root
/// of `(k^2 - 10k + 9) / (4t)`.
pub fn nonquad_search(p: u64) -> Result<NonquadWitness, CasesError> {
    require_at_least_5(p)?;
    let field = FieldDesc::new(p, 2)?;
    let t = field.tower_t().expect("degree 2").coeffs()[0] as u64;
    let inv = |x: u64| pow_mod(x % p, p - 2, p);
    for k in 1..p {
        let d = (k * k + 9 + p * p - 10 * k % p) % p;
        if !legendre_is_nonsquare(k, p) || !legendre_is_nonsquare(d, p) {
            continue;
        }
        let m1 = (3 + p - k) % p * inv(2) % p;
        let m2_sq = d * inv(4 * t % p) % p;
        let m2 = sqrt_mod(m2_sq, p).ok_or_else(|| {
            CasesError::SearchFailed(format!("{m2_sq} has no square root mod {p}"))
        })?;
        let w = NonquadWitness {
            p,
            t,
            k,
            m1,
            m2,
            field,
            m: Elem([m1 as u32, m2 as u32, 0, 0]),
        };
        if !w.check() {
            return Err(CasesError::SearchFailed(format!(
                "witness for p = {p} fails its invariants"
            )));
        }
        return Ok(w);
    }
    Err(CasesError::SearchFailed(format!(
        "no admissible k for p = {p}"
    )))
}

/// Values `(z1, z2)` of `u^(p-1)` and `y^(p-1)` with `z1 + z2 + 1 = 0` for
/// some nonzero `u, y` in GF(p^2), searched over the norm-one subgroup
/// (which is exactly the set of (p-1)-th powers).
pub fn fermat_like_solution(p: u64) -> Result<Option<(Elem, Elem)>, CasesError> {
    require_at_least_5(p)?;
    let f = FieldDesc::new(p, 2)?;
    for z in f.nonzero_elements() {
        if f.norm(z, 1)? != Elem::ONE {
            continue;
        }
        let w = f.sub(f.neg(Elem::ONE), z);
        if !w.is_zero() && f.norm(w, 1)? == Elem::ONE {
            return Ok(Some((z, w)));
        }
    }
    Ok(None)
}

pub fn fermat_like_has_solution(p: u64) -> Result<bool, CasesError> {
    Ok(fermat_like_solution(p)?.is_some())
}

/// Projective points of `y^(p-1) + z^(p-1) + t^(p-1) = 0` over GF(p^4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FermatCount {
    pub p: u64,
    pub total: u64,
    /// Points with some coordinate equal to zero.
    pub on_axes: u64,
    /// Points with all coordinates nonzero, counted separately.
    pub all_nonzero: u64,
    /// Points on `y^(p-1) + z^(p-1) = 0` in one coordinate plane.
    pub per_axis: u64,
    /// `5p^3 - 6p^2 + 1`.
    pub weil_lower_bound: u64,
}

impl FermatCount {
    pub fn meets_bound(&self) -> bool {
        self.total >= self.weil_lower_bound
            && self.all_nonzero > 0
            && self.all_nonzero + self.on_axes == self.total
    }
}

pub const FERMAT_MAX_PRIME: u64 = 31;

/// Exact count over the charts `(1 : z : t)` and `(0 : 1 : t)`; the point
/// `(0 : 0 : 1)` never lies on the curve.
pub fn count_fermat_projective(p: u64) -> Result<FermatCount, CasesError> {
    require_at_least_5(p)?;
    if p > FERMAT_MAX_PRIME {
        return Err(CasesError::UnsupportedPrime(p));
    }
    let f = FieldDesc::new(p, 4)?;
    let q = f.order() as usize;
    let powers: Vec<u64> = (0..q as u64)
        .into_par_iter()
        .map(|i| f.index(f.pow(f.element(i), p - 1)))
        .collect();
    let mut count = vec![0u64; q];
    for &v in &powers {
        count[v as usize] += 1;
    }
    let minus_one = f.neg(Elem::ONE);
    let target = |v: u64| f.index(f.sub(minus_one, f.element(v))) as usize;
    let affine: u64 = powers.iter().map(|&v| count[target(v)]).sum();
    let per_axis = count[f.index(minus_one) as usize];
    let at_infinity = per_axis;
    let total = affine + at_infinity;
    // t ranges over nonzero elements only; the value 0 comes from t = 0 alone
    let all_nonzero: u64 = powers
        .iter()
        .skip(1)
        .map(|&v| {
            let tgt = target(v);
            if tgt == 0 {
                0
            } else {
                count[tgt]
            }
        })
        .sum();
    Ok(FermatCount {
        p,
        total,
        on_axes: 3 * per_axis,
        all_nonzero,
        per_axis,
        weil_lower_bound: 5 * p * p * p + 1 - 6 * p * p,
    })
}

/// Both sides of the top-coefficient identity for `x^(a + b p)` over
/// GF(p^2) with all directions equal to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSumIdentity {
    pub p: u64,
    pub k: u64,
    pub a: u64,
    pub b: u64,
    pub n: u64,
    /// `-sum_c Norm(nabla f(c))`, the coefficient of `x^(p^2-1)` in
    /// `(nabla f)^(1+p)`.
    pub point_sum: u64,
    /// `(-1)^(k+1) C(a, k+1)^2 S(k, 2k+2) mod p`.
    pub formula: u64,
}

impl NormSumIdentity {
    pub fn holds(&self) -> bool {
        self.point_sum == self.formula && self.formula != 0
    }
}

pub fn verify_norm_sum_identity(
    p: u64,
    k: u64,
    a: u64,
    b: u64,
) -> Result<NormSumIdentity, CasesError> {
    FieldDesc::prime(p)?;
    if k == 0 || p < 2 * k + 2 {
        return Err(CasesError::Precondition(format!(
            "need k >= 1 and p >= 2k+2, got p = {p}, k = {k}"
        )));
    }
    if a + b != p + k || a >= p || b >= p {
        return Err(CasesError::Precondition(format!(
            "need a + b = p + k with a, b <= p-1, got a = {a}, b = {b}"
        )));
    }
    let f = FieldDesc::new(p, 2)?;
    let n = a + b * p;
    let dirs = vec![Elem::ONE; k as usize];
    let table = PowerTable::new(f, n)?;
    let ev = PointwiseEvaluator::new(&table, &dirs)?;
    let sum = top_coeff_sum(&f, |c| f.norm(ev.eval(c), 1).expect("degree 1 divides 2"));
    let point_sum = sum.coeffs()[0] as u64;
    let sign = if (k + 1).is_multiple_of(2) { 1 } else { -1 };
    let s = s_closed(k, 2 * k as u32 + 2).expect("closed form at r = 2k+2");
    let exact = binomial_big(a, k + 1).pow(2) * s * sign;
    Ok(NormSumIdentity {
        p,
        k,
        a,
        b,
        n,
        point_sum,
        formula: big_mod(&exact, p),
    })
}

/// The bank formula for `case` at `t`, evaluated at `(a, b)` and reduced
/// modulo `p`.
pub fn coeff_formula(case: &CoeffCase, t: i64, a: i64, b: i64, p: u64) -> Result<u64, CasesError> {
    Ok(case.formula(t)?.eval_mod(a, b, p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoeffRow {
    pub a: i64,
    pub b: i64,
    pub n: u64,
    /// `-sum_c N(nabla f(c))` with `N` the case's norm.
    pub numeric: Elem,
    pub formula: u64,
    pub prefactor_vanishes: bool,
    /// Whether the difference itself permutes GF(p^4).
    pub is_permutation: bool,
}

impl CoeffRow {
    pub fn matches(&self) -> bool {
        self.numeric == Elem([self.formula as u32, 0, 0, 0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffCheck {
    pub case_id: String,
    pub p: u64,
    pub t: i64,
    pub power: NormPower,
    pub rows: Vec<CoeffRow>,
}

impl CoeffCheck {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(CoeffRow::matches)
    }

    /// Agreement on every row where the formula's prefactor is nonzero.
    pub fn matches_off_vanishing(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| !r.prefactor_vanishes)
            .all(CoeffRow::matches)
    }

    /// A nonzero top coefficient rules out a permutation, so a nonzero
    /// formula value must come with a non-bijective difference.
    pub fn consistent(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.formula != 0 && r.matches())
            .all(|r| !r.is_permutation)
    }
}

pub const COEFF_PRIMES: [u64; 4] = [5, 7, 11, 13];

/// Computes the top coefficient numerically for every admissible parameter
/// of `case` at `p` and compares it with the bank formula.
pub fn verify_coeff_numeric(case: &CoeffCase, p: u64, t: i64) -> Result<CoeffCheck, CasesError> {
    if !COEFF_PRIMES.contains(&p) {
        return Err(CasesError::UnsupportedPrime(p));
    }
    let formula = case.formula(t)?;
    let field = FieldDesc::new(p, 4)?;
    let dirs: Vec<Elem> = case
        .directions(t)
        .iter()
        .map(|&d| field.from_int(d))
        .collect();
    if dirs.iter().any(|d| d.is_zero()) {
        return Err(CasesError::Precondition(format!(
            "direction t = {t} vanishes mod {p}"
        )));
    }
    let sub = case.power.sub_degree();
    let rows = case
        .params(p)
        .into_par_iter()
        .map(|(a, b)| -> Result<CoeffRow, CasesError> {
            let n = case.exponent(p, a, b)?;
            let table = PowerTable::new(field, n)?;
            let ev = PointwiseEvaluator::new(&table, &dirs)?;
            let numeric = top_coeff_sum(&field, |c| {
                field.norm(ev.eval(c), sub).expect("sub divides 4")
            });
            let mut seen = Vec::new();
            Ok(CoeffRow {
                a,
                b,
                n,
                numeric,
                formula: formula.eval_mod(a, b, p)?,
                prefactor_vanishes: formula.prefactor_vanishes(a, b, p)?,
                is_permutation: ev.first_repeat(&mut seen).is_none(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoeffCheck {
        case_id: case.id.clone(),
        p,
        t,
        power: case.power,
        rows,
    })
}

/// Exceptional-prime analysis of the case's `t = 1` / `t = 2` main factors.
pub fn case_exceptional_primes(
    case: &CoeffCase,
) -> Result<Option<ExceptionalAnalysis>, CasesError> {
    match case.exceptional_pair() {
        None => Ok(None),
        Some((f, g)) => Ok(Some(exceptional_primes(&f, &g)?)),
    }
}

/// Two points with equal values of the second difference of
/// `x^(1+p+p^2)` over GF(p^4) built as GF(p^2)[u] with `u^2 = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counterexample {
    pub p: u64,
    pub field: FieldDesc,
    pub m: Elem,
    pub n: u64,
    /// Directions are `(1, v)`.
    pub v: Elem,
    /// The nonzero solution of `(1+m) x1^p + 2 x1 = 0` in GF(p^2).
    pub x1: Elem,
    pub x: Elem,
    pub x_prime: Elem,
    pub value: Elem,
}

impl Counterexample {
    pub fn verify(&self) -> bool {
        let f = &self.field;
        let h = |y: Elem| {
            nabla_eval(f, |z| f.pow(z, self.n), &[Elem::ONE, self.v], y).expect("two directions")
        };
        let sub = match f.subfield(2) {
            Ok(s) => s,
            Err(_) => return false,
        };
        let one_plus_m = sub.add(Elem::ONE, self.m);
        let ratio_norm = sub
            .div(sub.from_int(2), one_plus_m)
            .and_then(|r| sub.norm(r, 1));
        let x1p = sub.frobenius(self.x1, 1);
        let equation = sub
            .add(sub.mul(one_plus_m, x1p), sub.scale(self.x1, 2))
            .is_zero();
        self.x != self.x_prime
            && !self.x1.is_zero()
            && equation
            && ratio_norm == Ok(Elem::ONE)
            && h(self.x) == h(self.x_prime)
            && h(self.x) == self.value
    }
}

pub fn counterexample_1pp2(p: u64) -> Result<Counterexample, CasesError> {
    let w = nonquad_search(p)?;
    let sub = w.field;
    let field = sub.extend_quadratic(w.m)?;
    let one_plus_m = sub.add(Elem::ONE, w.m);
    let x1 = sub
        .nonzero_elements()
        .find(|&x| {
            let xp = sub.frobenius(x, 1);
            sub.add(sub.mul(one_plus_m, xp), sub.scale(x, 2)).is_zero()
        })
        .ok_or_else(|| CasesError::SearchFailed(format!("no nonzero x1 for p = {p}")))?;
    let x1p = sub.neg(sub.frobenius(x1, 1)).coeffs();
    let x = Elem([x1.coeffs()[0], x1.coeffs()[1], x1p[0], x1p[1]]);
    let v = Elem([1, 0, 1, 0]);
    let n = 1 + p + p * p;
    let value = nabla_eval(&field, |z| field.pow(z, n), &[Elem::ONE, v], x)?;
    let c = Counterexample {
        p,
        field,
        m: w.m,
        n,
        v,
        x1,
        x,
        x_prime: Elem::ZERO,
        value,
    };
    if !c.verify() {
        return Err(CasesError::SearchFailed(format!(
            "constructed points do not collide for p = {p}"
        )));
    }
    Ok(c)
}

/// A collision of `nabla_{1,w,w} x^(3+p^2)` over GF(p^4) between 0 and 1,
/// where `w^(p^2-1) = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearizedCollision {
    pub p: u64,
    pub field: FieldDesc,
    pub n: u64,
    pub w: Elem,
    pub x1: Elem,
    pub x2: Elem,
}

impl LinearizedCollision {
    pub fn dirs(&self) -> [Elem; 3] {
        [Elem::ONE, self.w, self.w]
    }

    pub fn verify(&self) -> bool {
        let f = &self.field;
        let p2 = self.p * self.p;
        let h = |y: Elem| {
            nabla_eval(f, |z| f.pow(z, self.n), &self.dirs(), y).expect("three directions")
        };
        f.pow(self.w, p2 - 1) == f.neg(Elem::ONE) && self.x1 != self.x2 && h(self.x1) == h(self.x2)
    }
}

pub fn collision_3_plus_p2(p: u64) -> Result<LinearizedCollision, CasesError> {
    require_at_least_5(p)?;
    let field = FieldDesc::new(p, 4)?;
    let p2 = p * p;
    let minus_one = field.neg(Elem::ONE);
    let w = field
        .nonzero_elements()
        .find(|&w| field.pow(w, p2 - 1) == minus_one)
        .ok_or_else(|| CasesError::SearchFailed("no w with w^(p^2-1) = -1".into()))?;
    let c = LinearizedCollision {
        p,
        field,
        n: 3 + p2,
        w,
        x1: Elem::ZERO,
        x2: Elem::ONE,
    };
    if !c.verify() {
        return Err(CasesError::SearchFailed(format!(
            "no collision at 0, 1 for p = {p}"
        )));
    }
    Ok(c)
}

/// `nabla_{1,1,1} x^(2+2p^2)` against `12 x^(p^2) + 12 x + 36` over GF(p^4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearFormCheck {
    pub p: u64,
    pub n: u64,
    pub matches_linear_form: bool,
    /// Collision of `x^(p^2) + x`, when it is not a permutation.
    pub kernel_collision: Option<(Elem, Elem)>,
}

pub fn check_2_plus_2p2(p: u64) -> Result<LinearFormCheck, CasesError> {
    require_at_least_5(p)?;
    let f = FieldDesc::new(p, 4)?;
    let p2 = p * p;
    let n = 2 + 2 * p2;
    let table = PowerTable::new(f, n)?;
    let ev = PointwiseEvaluator::new(&table, &[Elem::ONE; 3])?;
    let matches_linear_form = f.elements().all(|x| {
        let lin = f.add(
            f.add(f.scale(f.frobenius(x, 2), 12), f.scale(x, 12)),
            f.from_int(36),
        );
        ev.eval(x) == lin
    });
    let perm = is_permutation(&f, |x| f.add(f.frobenius(x, 2), x));
    let kernel_collision = match perm.witness {
        Some(crate::kpn::PermWitness::Collision { x1, x2 }) => Some((x1, x2)),
        _ => None,
    };
    Ok(LinearFormCheck {
        p,
        n,
        matches_linear_form,
        kernel_collision,
    })
}

/// A certified collision of a bank case's difference at one parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionCertificate {
    pub case_id: String,
    pub p: u64,
    pub b: i64,
    pub n: u64,
    pub t: i64,
    pub dirs: Vec<i64>,
    pub x1: Elem,
    pub x2: Elem,
    /// Evaluations over all directions tried.
    pub probes: u64,
    pub strategy: CollisionStrategy,
}

impl CollisionCertificate {
    /// Recomputes both values with plain exponentiation.
    pub fn verify(&self) -> bool {
        let Ok(f) = FieldDesc::new(self.p, 4) else {
            return false;
        };
        let dirs: Vec<Elem> = self.dirs.iter().map(|&d| f.from_int(d)).collect();
        let h = |y: Elem| nabla_eval(&f, |z| f.pow(z, self.n), &dirs, y);
        match (h(self.x1), h(self.x2)) {
            (Ok(a), Ok(b)) => self.x1 != self.x2 && a == b,
            _ => false,
        }
    }
}

/// Searches for a collision of the difference of `x^n`, `n` from `case` at
/// `(a = 0, b)`, trying `t = 1, 2, ..., max_t` in the direction pattern.
pub fn certify_case_collision(
    case: &CoeffCase,
    p: u64,
    b: i64,
    strategy: CollisionStrategy,
    budget_per_t: u64,
    max_t: i64,
) -> Result<Option<CollisionCertificate>, CasesError> {
    require_at_least_5(p)?;
    let field = FieldDesc::new(p, 4)?;
    if field.order() > MAX_COLLISION_ORDER {
        return Err(CasesError::UnsupportedPrime(p));
    }
    let n = case.exponent(p, 0, b)?;
    let table = if field.order() <= MAX_TABLE_ORDER {
        Some(PowerTable::new(field, n)?)
    } else {
        None
    };
    let mut probes = 0;
    for t in 1..=max_t {
        let ints = case.directions(t);
        let dirs: Vec<Elem> = ints.iter().map(|&d| field.from_int(d)).collect();
        if dirs.iter().any(|d| d.is_zero()) {
            continue;
        }
        let search = match &table {
            Some(table) => {
                let ev = PointwiseEvaluator::new(table, &dirs)?;
                find_collision(&field, |x| ev.eval(x), budget_per_t, strategy)?
            }
            None => {
                let sums = SubsetSums::new(field, &dirs)?;
                find_collision(
                    &field,
                    |x| sums.eval(|y| field.pow(y, n), x),
                    budget_per_t,
                    strategy,
                )?
            }
        };
        probes += search.probes;
        if let Some((x1, x2)) = search.collision {
            return Ok(Some(CollisionCertificate {
                case_id: case.id.clone(),
                p,
                b,
                n,
                t,
                dirs: ints,
                x1,
                x2,
                probes,
                strategy,
            }));
        }
    }
    Ok(None)
}
