//! The k-th finite difference in directions `a_1, ..., a_k`.
//!
//! Two routes compute the same thing. [`nabla_poly`] transforms a polynomial
//! by iterating `g(x + a) - g(x)`. The pointwise route expands the iteration
//! by inclusion-exclusion,
//! `sum_{S} (-1)^(k - |S|) f(x + sum_{i in S} a_i)`, groups equal subset
//! sums, and for monomials evaluates `f` through a precomputed table of
//! `x^n` over the whole field.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::field::{Elem, FieldDesc, FieldError};
use crate::poly::{Poly, PolyError};

pub const MAX_DIRECTIONS: usize = 8;

/// Largest field for which a full power table is built.
pub const MAX_TABLE_ORDER: u64 = 1 << 23;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DifferenceError {
    #[error("direction {0} is zero")]
    ZeroDirection(usize),
    #[error("at least one direction is required")]
    NoDirections,
    #[error("{0} directions exceed the supported maximum of {MAX_DIRECTIONS}")]
    TooManyDirections(usize),
    #[error("field of order {0} is too large for a power table")]
    TableTooLarge(u64),
    #[error("packed evaluation would overflow 16-bit lanes")]
    LaneOverflow,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Nonzero directions `(a_1, ..., a_k)` over one field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectionTuple {
    field: FieldDesc,
    dirs: Vec<Elem>,
}

impl DirectionTuple {
    pub fn new(field: FieldDesc, dirs: Vec<Elem>) -> Result<Self, DifferenceError> {
        if dirs.len() > MAX_DIRECTIONS {
            return Err(DifferenceError::TooManyDirections(dirs.len()));
        }
        for (i, &a) in dirs.iter().enumerate() {
            field.check(a)?;
            if a.is_zero() {
                return Err(DifferenceError::ZeroDirection(i));
            }
        }
        Ok(DirectionTuple { field, dirs })
    }

    /// Small integers `t_i` taken as field elements `t_i * 1`.
    pub fn from_ints(field: FieldDesc, dirs: &[i64]) -> Result<Self, DifferenceError> {
        Self::new(field, dirs.iter().map(|&d| field.from_int(d)).collect())
    }

    /// Parses `e1;e2;...` with each entry in the field element text format.
    pub fn parse(field: FieldDesc, text: &str) -> Result<Self, DifferenceError> {
        let dirs = text
            .split(';')
            .map(|s| field.parse(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(field, dirs)
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn dirs(&self) -> &[Elem] {
        &self.dirs
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn format(&self) -> String {
        self.dirs
            .iter()
            .map(|&a| self.field.format(a))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Iterated difference as a polynomial transform.
pub fn nabla_poly(f: &Poly, dirs: &DirectionTuple) -> Result<Poly, DifferenceError> {
    if dirs.is_empty() {
        return Err(DifferenceError::NoDirections);
    }
    if f.field() != dirs.field() {
        return Err(PolyError::FieldMismatch(*f.field(), *dirs.field()).into());
    }
    let mut g = f.clone();
    for &a in dirs.dirs() {
        g = g.shift_compose(a)?.sub(&g)?;
    }
    Ok(g)
}

/// The inclusion-exclusion expansion with equal subset sums merged:
/// `nabla f(x) = sum_j coeff_j * f(x + shift_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSums {
    field: FieldDesc,
    terms: Vec<(Elem, i64)>,
}

impl SubsetSums {
    pub fn new(field: FieldDesc, dirs: &[Elem]) -> Result<Self, DifferenceError> {
        if dirs.len() > MAX_DIRECTIONS {
            return Err(DifferenceError::TooManyDirections(dirs.len()));
        }
        for &a in dirs {
            field.check(a)?;
        }
        let k = dirs.len();
        let mut grouped: BTreeMap<Elem, i64> = BTreeMap::new();
        for mask in 0u32..(1 << k) {
            let shift = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .fold(Elem::ZERO, |acc, i| field.add(acc, dirs[i]));
            let sign = if (k as u32 - mask.count_ones()).is_multiple_of(2) {
                1
            } else {
                -1
            };
            *grouped.entry(shift).or_insert(0) += sign;
        }
        let terms = grouped.into_iter().filter(|&(_, c)| c != 0).collect();
        Ok(SubsetSums { field, terms })
    }

    pub fn of(dirs: &DirectionTuple) -> Self {
        Self::new(dirs.field, &dirs.dirs).expect("validated tuple")
    }

    /// `(shift, coefficient)` pairs in enumeration order of the shift.
    pub fn terms(&self) -> &[(Elem, i64)] {
        &self.terms
    }

    pub fn eval(&self, f: impl Fn(Elem) -> Elem, x: Elem) -> Elem {
        let field = &self.field;
        self.terms.iter().fold(Elem::ZERO, |acc, &(s, c)| {
            let v = f(field.add(x, s));
            field.add(acc, field.scale(v, c))
        })
    }
}

/// Pointwise value of the k-th difference of `f` at `x`; with no directions
/// this is `f(x)`.
pub fn nabla_eval(
    field: &FieldDesc,
    f: impl Fn(Elem) -> Elem,
    dirs: &[Elem],
    x: Elem,
) -> Result<Elem, DifferenceError> {
    Ok(SubsetSums::new(*field, dirs)?.eval(f, x))
}

/// `x^n` for every `x`, in enumeration order, stored with the coefficients
/// packed into the four 16-bit lanes of a `u64`.
#[derive(Debug, Clone)]
pub struct PowerTable {
    field: FieldDesc,
    n: u64,
    values: Vec<u64>,
}

const LANE_LOW_BITS: u64 = 0x0001_0001_0001_0001;
const LANE_MASK: u64 = 0xffff;

fn pack(x: Elem) -> u64 {
    let c = x.coeffs();
    c[0] as u64 | (c[1] as u64) << 16 | (c[2] as u64) << 32 | (c[3] as u64) << 48
}

fn unpack(v: u64) -> Elem {
    Elem([
        (v & LANE_MASK) as u32,
        (v >> 16 & LANE_MASK) as u32,
        (v >> 32 & LANE_MASK) as u32,
        (v >> 48 & LANE_MASK) as u32,
    ])
}

impl PowerTable {
    pub fn new(field: FieldDesc, n: u64) -> Result<Self, DifferenceError> {
        let q = field.order();
        if q > MAX_TABLE_ORDER || field.characteristic() >= 1 << 15 {
            return Err(DifferenceError::TableTooLarge(q));
        }
        let mut values = vec![0u64; q as usize];
        for (i, v) in values.iter_mut().enumerate() {
            *v = pack(field.pow(field.element(i as u64), n));
        }
        Ok(PowerTable { field, n, values })
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn exponent(&self) -> u64 {
        self.n
    }

    pub fn get(&self, x: Elem) -> Elem {
        unpack(self.values[self.field.index(x) as usize])
    }
}

/// Fast evaluator of one difference of a tabulated monomial.
#[derive(Debug, Clone)]
pub struct PointwiseEvaluator<'a> {
    table: &'a PowerTable,
    p: u64,
    degree: u32,
    adjust: u64,
    bias: u64,
    pos: Vec<(u64, u64)>,
    neg: Vec<(u64, u64)>,
}

impl<'a> PointwiseEvaluator<'a> {
    pub fn new(table: &'a PowerTable, dirs: &[Elem]) -> Result<Self, DifferenceError> {
        let sums = SubsetSums::new(table.field, dirs)?;
        let p = table.field.characteristic();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &(s, c) in sums.terms() {
            if c > 0 {
                pos.push((pack(s), c as u64));
            } else {
                neg.push((pack(s), c.unsigned_abs()));
            }
        }
        let weight: u64 = pos.iter().chain(&neg).map(|&(_, c)| c).sum();
        if weight.max(2) * p >= 1 << 16 {
            return Err(DifferenceError::LaneOverflow);
        }
        let neg_weight: u64 = neg.iter().map(|&(_, c)| c).sum();
        Ok(PointwiseEvaluator {
            table,
            p,
            degree: table.field.degree(),
            adjust: ((1 << 15) - p) * LANE_LOW_BITS,
            bias: neg_weight * p * LANE_LOW_BITS,
            pos,
            neg,
        })
    }

    #[inline]
    fn add_packed(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        let over = ((s + self.adjust) >> 15) & LANE_LOW_BITS;
        s - over * self.p
    }

    #[inline]
    fn dense(&self, v: u64) -> u64 {
        let p = self.p;
        let c0 = v & LANE_MASK;
        match self.degree {
            1 => c0,
            2 => c0 + p * (v >> 16 & LANE_MASK),
            _ => {
                c0 + p
                    * ((v >> 16 & LANE_MASK)
                        + p * ((v >> 32 & LANE_MASK) + p * (v >> 48 & LANE_MASK)))
            }
        }
    }

    #[inline]
    fn pack_index(&self, mut i: u64) -> u64 {
        let p = self.p;
        let mut v = 0;
        for lane in 0..self.degree {
            v |= (i % p) << (16 * lane);
            i /= p;
        }
        v
    }

    #[inline]
    fn eval_packed(&self, x: u64) -> u64 {
        let values = &self.table.values;
        let mut acc = self.bias;
        for &(s, c) in &self.pos {
            acc += c * values[self.dense(self.add_packed(x, s)) as usize];
        }
        for &(s, c) in &self.neg {
            acc -= c * values[self.dense(self.add_packed(x, s)) as usize];
        }
        let p = self.p;
        let mut out = 0;
        for lane in 0..self.degree {
            out |= ((acc >> (16 * lane) & LANE_MASK) % p) << (16 * lane);
        }
        out
    }

    pub fn eval(&self, x: Elem) -> Elem {
        unpack(self.eval_packed(pack(x)))
    }

    /// Enumeration index of the value at the point with index `i`.
    #[inline]
    pub fn eval_index(&self, i: u64) -> u64 {
        self.dense(self.eval_packed(self.pack_index(i)))
    }

    /// Scans the field in enumeration order and returns the index of the
    /// first point whose value was already taken, or `None` for a
    /// permutation. `seen` is scratch space and is resized as needed.
    pub fn first_repeat(&self, seen: &mut Vec<u64>) -> Option<u64> {
        let q = self.table.field.order();
        let words = q.div_ceil(64) as usize;
        seen.clear();
        seen.resize(words, 0);
        let p = self.p;
        let mut digits = [0u64; 4];
        let mut x = 0u64;
        for i in 0..q {
            let v = self.dense(self.eval_packed(x)) as usize;
            let (w, b) = (v / 64, v % 64);
            if seen[w] >> b & 1 == 1 {
                return Some(i);
            }
            seen[w] |= 1 << b;
            // odometer increment of the packed point
            for (lane, d) in digits.iter_mut().enumerate() {
                *d += 1;
                if *d < p {
                    x += 1 << (16 * lane);
                    break;
                }
                *d = 0;
                x -= (p - 1) << (16 * lane);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u64, e: u32) -> FieldDesc {
        FieldDesc::new(p, e).unwrap()
    }

    fn random_elem(f: &FieldDesc, rng: &mut ChaCha8Rng) -> Elem {
        f.element(rng.random_range(0..f.order()))
    }

    fn random_nonzero(f: &FieldDesc, rng: &mut ChaCha8Rng) -> Elem {
        f.element(rng.random_range(1..f.order()))
    }

    #[test]
    fn examples() {
        let f7 = gf(7, 1);
        let cube = Poly::monomial(f7, 3, Elem::ONE);
        let d = nabla_poly(&cube, &DirectionTuple::from_ints(f7, &[1, 1]).unwrap()).unwrap();
        assert_eq!(d, Poly::from_ints(f7, &[6, 6]));
        let c = Poly::constant(f7, f7.from_int(4));
        assert!(
            nabla_poly(&c, &DirectionTuple::from_ints(f7, &[3]).unwrap())
                .unwrap()
                .is_zero()
        );
        assert_eq!(
            DirectionTuple::from_ints(f7, &[1, 0]),
            Err(DifferenceError::ZeroDirection(1))
        );
        assert_eq!(
            nabla_poly(&cube, &DirectionTuple::new(f7, vec![]).unwrap()),
            Err(DifferenceError::NoDirections)
        );
        // k = 0 returns f(x); k = 1 is f(x+a) - f(x)
        let sq = |x: Elem| f7.mul(x, x);
        assert_eq!(
            nabla_eval(&f7, sq, &[], f7.from_int(3)).unwrap(),
            f7.from_int(2)
        );
        let a = f7.from_int(2);
        let x = f7.from_int(5);
        assert_eq!(
            nabla_eval(&f7, sq, &[a], x).unwrap(),
            f7.sub(sq(f7.add(x, a)), sq(x))
        );
    }

    #[test]
    fn general_two_direction_cube() {
        // 6abx + 3ab(a+b)
        let f = gf(11, 1);
        let cube = Poly::monomial(f, 3, Elem::ONE);
        for a in 1..11 {
            for b in 1..11 {
                let d = nabla_poly(&cube, &DirectionTuple::from_ints(f, &[a, b]).unwrap()).unwrap();
                assert_eq!(d, Poly::from_ints(f, &[3 * a * b * (a + b), 6 * a * b]));
            }
        }
    }

    #[test]
    fn next_power_gives_linear_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, e) in [(7u64, 1u32), (11, 1), (5, 2), (7, 2)] {
            let f = gf(p, e);
            for k in 1..=4usize {
                if k + 1 >= p as usize {
                    continue;
                }
                let dirs: Vec<Elem> = (0..k).map(|_| random_nonzero(&f, &mut rng)).collect();
                let g = Poly::monomial(f, k + 1, Elem::ONE);
                let d = nabla_poly(&g, &DirectionTuple::new(f, dirs.clone()).unwrap()).unwrap();
                let fact = (1..=k as i64 + 1).product::<i64>();
                let expected = dirs.iter().fold(f.from_int(fact), |acc, &a| f.mul(acc, a));
                assert_eq!(d.degree(), Some(1));
                assert_eq!(d.coeff(1), expected);
            }
        }
    }

    #[test]
    fn pointwise_matches_transform_gf25() {
        let f = gf(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let deg = rng.random_range(0..25);
            let coeffs: Vec<Elem> = (0..=deg).map(|_| random_elem(&f, &mut rng)).collect();
            let g = Poly::new(f, coeffs).unwrap();
            let k = rng.random_range(1..=4);
            let dirs: Vec<Elem> = (0..k).map(|_| random_nonzero(&f, &mut rng)).collect();
            let d = nabla_poly(&g, &DirectionTuple::new(f, dirs.clone()).unwrap()).unwrap();
            for x in f.elements() {
                let lhs = nabla_eval(&f, |y| g.eval(y).unwrap(), &dirs, x).unwrap();
                assert_eq!(lhs, d.eval(x).unwrap());
            }
        }
    }

    #[test]
    fn packed_matches_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, e) in [(5u64, 1u32), (7, 2), (5, 4), (3, 4), (7, 4)] {
            let f = gf(p, e);
            for _ in 0..6 {
                let n = rng.random_range(1..f.order());
                let table = PowerTable::new(f, n).unwrap();
                let k = rng.random_range(1..=4);
                let dirs: Vec<Elem> = (0..k).map(|_| random_nonzero(&f, &mut rng)).collect();
                let ev = PointwiseEvaluator::new(&table, &dirs).unwrap();
                let sums = SubsetSums::new(f, &dirs).unwrap();
                for i in 0..f.order() {
                    let x = f.element(i);
                    let want = sums.eval(|y| f.pow(y, n), x);
                    assert_eq!(ev.eval(x), want);
                    assert_eq!(ev.eval_index(i), f.index(want));
                }
            }
        }
    }

    #[test]
    fn first_repeat_agrees_with_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = gf(5, 4);
        let mut seen = Vec::new();
        for _ in 0..30 {
            let n = rng.random_range(1..f.order());
            let table = PowerTable::new(f, n).unwrap();
            let dirs = [Elem::ONE, random_nonzero(&f, &mut rng)];
            let ev = PointwiseEvaluator::new(&table, &dirs).unwrap();
            let sums = SubsetSums::new(f, &dirs).unwrap();
            let mut taken = std::collections::HashSet::new();
            let mut expected = None;
            for (i, x) in f.elements().enumerate() {
                if !taken.insert(sums.eval(|y| f.pow(y, n), x)) {
                    expected = Some(i as u64);
                    break;
                }
            }
            assert_eq!(ev.first_repeat(&mut seen), expected);
        }
    }

    #[test]
    fn grouped_sums_for_repeated_directions() {
        let f = gf(7, 1);
        let s = SubsetSums::new(f, &[Elem::ONE, Elem::ONE]).unwrap();
        let t: Vec<(u32, i64)> = s.terms().iter().map(|&(e, c)| (e.coeffs()[0], c)).collect();
        assert_eq!(t, vec![(0, 1), (1, -2), (2, 1)]);
    }

    fn permutations(v: &[Elem]) -> Vec<Vec<Elem>> {
        if v.len() <= 1 {
            return vec![v.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..v.len() {
            let mut rest = v.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn direction_order_invariance_gf9() {
        let f = gf(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let deg = rng.random_range(1..9);
            let g = Poly::new(f, (0..=deg).map(|_| random_elem(&f, &mut rng)).collect()).unwrap();
            for k in 1..=3usize {
                let dirs: Vec<Elem> = (0..k).map(|_| random_nonzero(&f, &mut rng)).collect();
                let base = nabla_poly(&g, &DirectionTuple::new(f, dirs.clone()).unwrap()).unwrap();
                for perm in permutations(&dirs) {
                    assert_eq!(
                        nabla_poly(&g, &DirectionTuple::new(f, perm).unwrap()).unwrap(),
                        base
                    );
                }
            }
        }
        // every tuple for one polynomial at k = 2
        let g = Poly::monomial(f, 5, Elem::ONE);
        for a in f.nonzero_elements() {
            for b in f.nonzero_elements() {
                let ab = nabla_poly(&g, &DirectionTuple::new(f, vec![a, b]).unwrap()).unwrap();
                let ba = nabla_poly(&g, &DirectionTuple::new(f, vec![b, a]).unwrap()).unwrap();
                assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn degree_drop_gf25() {
        let f = gf(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 0..25usize {
            let g = Poly::monomial(f, n, Elem::ONE);
            for k in 1..=3usize {
                let dirs: Vec<Elem> = (0..k).map(|_| random_nonzero(&f, &mut rng)).collect();
                let d = nabla_poly(&g, &DirectionTuple::new(f, dirs).unwrap()).unwrap();
                if let Some(dd) = d.degree() {
                    assert!(dd + k <= n, "n={n} k={k} deg={dd}");
                }
            }
        }
    }

    #[test]
    fn monomial_scaling_law() {
        // nabla_{c a} x^n (x) = c^n nabla_a x^n (x / c)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, e) in [(3u64, 2u32), (5, 2)] {
            let f = gf(p, e);
            for _ in 0..12 {
                let n = rng.random_range(1..f.order());
                let k = rng.random_range(1..=3);
                let dirs: Vec<Elem> = (0..k).map(|_| random_nonzero(&f, &mut rng)).collect();
                let mono = |y: Elem| f.pow(y, n);
                for c in f.nonzero_elements() {
                    let scaled: Vec<Elem> = dirs.iter().map(|&a| f.mul(c, a)).collect();
                    let cinv = f.inv(c).unwrap();
                    for x in f.elements() {
                        let lhs = nabla_eval(&f, mono, &scaled, x).unwrap();
                        let rhs = f.mul(
                            f.pow(c, n),
                            nabla_eval(&f, mono, &dirs, f.mul(x, cinv)).unwrap(),
                        );
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn linearity() {
        let f = gf(7, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let g = Poly::new(f, (0..12).map(|_| random_elem(&f, &mut rng)).collect()).unwrap();
            let h = Poly::new(f, (0..9).map(|_| random_elem(&f, &mut rng)).collect()).unwrap();
            let dirs = DirectionTuple::new(
                f,
                vec![random_nonzero(&f, &mut rng), random_nonzero(&f, &mut rng)],
            )
            .unwrap();
            let lhs = nabla_poly(&g.add(&h).unwrap(), &dirs).unwrap();
            let rhs = nabla_poly(&g, &dirs)
                .unwrap()
                .add(&nabla_poly(&h, &dirs).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn parse_tuple() {
        let f = gf(5, 2);
        let d = DirectionTuple::parse(f, "1;0,1;3,2").unwrap();
        assert_eq!(
            d.dirs(),
            &[Elem::ONE, Elem([0, 1, 0, 0]), Elem([3, 2, 0, 0])]
        );
        assert_eq!(d.format(), "1,0;0,1;3,2");
        assert!(DirectionTuple::parse(f, "1;0").is_err());
        assert!(DirectionTuple::parse(f, "1;x").is_err());
    }
}
