use kpnlab::difference::{nabla_eval, PointwiseEvaluator, PowerTable};
use kpnlab::exact::{factor_integer, resultant, ZPoly};
use kpnlab::{Elem, FieldDesc};
use num_bigint::BigInt;
use proptest::prelude::*;

fn fields() -> impl Strategy<Value = FieldDesc> {
    prop_oneof![
        Just(FieldDesc::new(7, 1).unwrap()),
        Just(FieldDesc::new(5, 2).unwrap()),
        Just(FieldDesc::new(3, 4).unwrap()),
        Just(FieldDesc::new(5, 4).unwrap()),
    ]
}

fn field_and_elems(count: usize) -> impl Strategy<Value = (FieldDesc, Vec<Elem>)> {
    fields().prop_flat_map(move |f| {
        let q = f.order();
        (Just(f), prop::collection::vec(0..q, count))
            .prop_map(|(f, idx)| (f, idx.into_iter().map(|i| f.element(i)).collect()))
    })
}

/// The k-th difference by its recursive definition.
fn nabla_recursive(f: &FieldDesc, n: u64, dirs: &[Elem], x: Elem) -> Elem {
    match dirs.split_last() {
        None => f.pow(x, n),
        Some((&a, rest)) => f.sub(
            nabla_recursive(f, n, rest, f.add(x, a)),
            nabla_recursive(f, n, rest, x),
        ),
    }
}

proptest! {
    #[test]
    fn frobenius_is_a_ring_map((f, v) in field_and_elems(2), i in 0u64..4) {
        let (x, y) = (v[0], v[1]);
        prop_assert_eq!(f.frobenius(f.add(x, y), i), f.add(f.frobenius(x, i), f.frobenius(y, i)));
        prop_assert_eq!(f.frobenius(f.mul(x, y), i), f.mul(f.frobenius(x, i), f.frobenius(y, i)));
        prop_assert_eq!(f.frobenius(x, i), f.pow(x, f.characteristic().pow(i as u32)));
    }

    #[test]
    fn inverse_and_norm((f, v) in field_and_elems(2)) {
        let (x, y) = (v[0], v[1]);
        if !x.is_zero() {
            prop_assert_eq!(f.mul(x, f.inv(x).unwrap()), Elem::ONE);
        }
        for sub in f.proper_subfield_degrees() {
            let n = f.norm(f.mul(x, y), sub).unwrap();
            prop_assert_eq!(n, f.mul(f.norm(x, sub).unwrap(), f.norm(y, sub).unwrap()));
            prop_assert!(f.subfield(sub).unwrap().contains(n));
        }
    }

    #[test]
    fn difference_matches_recursion((f, v) in field_and_elems(4), n in 1u64..700) {
        let n = 1 + (n - 1) % (f.order() - 1);
        let x = v[0];
        let dirs: Vec<Elem> = v[1..].iter().map(|&d| if d.is_zero() { Elem::ONE } else { d }).collect();
        let expected = nabla_recursive(&f, n, &dirs, x);
        prop_assert_eq!(nabla_eval(&f, |y| f.pow(y, n), &dirs, x).unwrap(), expected);
        let table = PowerTable::new(f, n).unwrap();
        let ev = PointwiseEvaluator::new(&table, &dirs).unwrap();
        prop_assert_eq!(ev.eval(x), expected);
    }

    #[test]
    fn factorization_multiplies_back(n in any::<i64>().prop_filter("nonzero", |n| *n != 0)) {
        let fac = factor_integer(&BigInt::from(n)).unwrap();
        prop_assert_eq!(fac.product(), BigInt::from(n));
    }

    #[test]
    fn resultant_antisymmetry(
        a in prop::collection::vec(-9i64..10, 2..5),
        b in prop::collection::vec(-9i64..10, 2..5),
    ) {
        let f = ZPoly::from_ints(&a);
        let g = ZPoly::from_ints(&b);
        prop_assume!(f.degree().unwrap_or(0) > 0 && g.degree().unwrap_or(0) > 0);
        let fg = resultant(&f, &g).unwrap();
        let gf = resultant(&g, &f).unwrap();
        let sign = if f.degree().unwrap() * g.degree().unwrap() % 2 == 1 { -1 } else { 1 };
        prop_assert_eq!(fg, gf * BigInt::from(sign));
    }
}
