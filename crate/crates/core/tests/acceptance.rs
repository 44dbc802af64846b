//! Acceptance gate: runs every criterion at its stated time limit and
//! prints one PASS/FAIL line each.
//!
//! Set `KPNLAB_LONG=1` to add the GF(2401) 3-PN classification.
//!
//! Criterion 8 is expected to report FAIL: two published irreducibility
//! claims do not hold (see `KNOWN_RED`). The process exits nonzero on any
//! other failure, or if a known red item starts passing.

use std::time::{Duration, Instant};

use kpnlab::cases::{
    certify_case_collision, coeff_formula, count_fermat_projective, counterexample_1pp2,
    nonquad_search, verify_coeff_numeric, verify_norm_sum_identity, CaseBank,
};
use kpnlab::combinatorics::{s_closed, s_direct};
use kpnlab::exact::{exceptional_primes, factor_integer, gcd_at_prime, ZPoly};
use kpnlab::kpn::{classify, hermite_dickson, is_kpn, is_permutation, CollisionStrategy};
use kpnlab::{Elem, FieldDesc, Poly};
use num_bigint::BigInt;
use num_rational::BigRational;

const KNOWN_RED: &[u32] = &[8];

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi)
        .filter(|&n| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

fn s_suite(o: &mut Outcome) {
    for k in 0..=6u64 {
        for r in [2 * k as u32, 2 * k as u32 + 2] {
            o.check(
                Some(s_direct(k, r)) == s_closed(k, r),
                format!("S({k},{r}) closed form"),
            );
        }
        for r in 0..(2 * k as u32 + 4) {
            if r % 2 == 1 || r < 2 * k as u32 {
                o.check(
                    s_direct(k, r) == BigInt::from(0),
                    format!("S({k},{r}) should vanish"),
                );
            }
        }
    }
    o.check(s_direct(2, 6) == BigInt::from(120), "S(2,6) = 120");
    o.check(s_direct(3, 8) == BigInt::from(-10080), "S(3,8) = -10080");
}

fn prime_field_classes(o: &mut Outcome) {
    for p in [5u64, 7, 11, 13] {
        let f = FieldDesc::prime(p).unwrap();
        for k in 1..=3usize {
            if p < k as u64 + 2 {
                continue;
            }
            let c = classify(&f, k, false, false).unwrap();
            let got: Vec<u64> = c.exponents.iter().copied().filter(|&n| n < p).collect();
            o.check(got == vec![k as u64 + 1], format!("GF({p}) k={k}: {got:?}"));
        }
    }
}

fn quadratic_classes(o: &mut Outcome) {
    let expect: [(u64, usize, &[u64]); 4] = [
        (5, 2, &[3, 15]),
        (7, 2, &[3, 9, 15, 21]),
        (5, 3, &[4, 20]),
        (7, 3, &[4, 28]),
    ];
    for (p, k, want) in expect {
        let f = FieldDesc::new(p, 2).unwrap();
        let c = classify(&f, k, false, false).unwrap();
        o.check(
            c.exponents == want,
            format!("GF({}) k={k}: {:?}", p * p, c.exponents),
        );
    }
}

fn norm_sum_identity(o: &mut Outcome) {
    for (p, k) in [(7u64, 2u64), (11, 2), (11, 3)] {
        for a in (k + 1)..p {
            let b = p + k - a;
            if b >= p {
                continue;
            }
            let r = verify_norm_sum_identity(p, k, a, b).unwrap();
            o.check(
                r.holds(),
                format!("p={p} k={k} a={a} b={b}: {} vs {}", r.point_sum, r.formula),
            );
        }
    }
}

fn gf625_two(o: &mut Outcome) -> Vec<u64> {
    let f = FieldDesc::new(5, 4).unwrap();
    let c = classify(&f, 2, true, true).unwrap();
    o.check(
        c.exponents == [3, 27, 51],
        format!("GF(625) k=2: {:?}", c.exponents),
    );
    o.note(format!("representatives {:?}", c.class_representatives));
    c.exponents
}

fn gf_p4_three(o: &mut Outcome, p: u64) {
    let f = FieldDesc::new(p, 4).unwrap();
    let c = classify(&f, 3, true, true).unwrap();
    o.check(
        c.exponents == [4],
        format!("GF({}) k=3: {:?}", f.order(), c.exponents),
    );
}

fn nonquad(o: &mut Outcome) {
    for p in primes_in(5, 499) {
        match nonquad_search(p) {
            Ok(w) => {
                o.check(w.check(), format!("p={p}: invariants"));
                if p <= 31 {
                    // brute force over GF(p^2): non-squares with Norm(1+m) = 4
                    let f = w.field;
                    let half = (f.order() - 1) / 2;
                    let four = f.from_int(4);
                    let ok = f.pow(w.m, half) != Elem::ONE
                        && f.mul(f.add(Elem::ONE, w.m), f.frobenius(f.add(Elem::ONE, w.m), 1))
                            == four;
                    let found = f.nonzero_elements().any(|m| {
                        f.pow(m, half) != Elem::ONE
                            && f.mul(f.add(Elem::ONE, m), f.frobenius(f.add(Elem::ONE, m), 1))
                                == four
                    });
                    o.check(ok && found, format!("p={p}: brute-force oracle"));
                }
            }
            Err(e) => o.check(false, format!("p={p}: {e}")),
        }
    }
}

fn exceptional(o: &mut Outcome) {
    let bank = CaseBank::builtin();
    let pair = |id: &str| bank.get(id).unwrap().exceptional_pair().unwrap();
    let roots_of = |p: u64, shifts: &[u64]| -> Vec<u64> {
        let mut r: Vec<u64> = shifts.iter().map(|c| (p - c % p) % p).collect();
        r.sort_unstable();
        r
    };

    // the elimination behind the first pair
    let p1 = ZPoly::parse("25x^2-25x-59").unwrap();
    let p2 = ZPoly::parse("1250x^4-2500x^3-4362x^2+5612x+5981").unwrap();
    let p3 = p2.sub(&ZPoly::parse("50x^2-50x").unwrap().mul(&p1));
    let c = ZPoly::from_ints(&[2662])
        .mul(&p1)
        .add(&ZPoly::from_ints(&[25]).mul(&p3));
    o.check(
        c == ZPoly::from_ints(&[-7533]),
        format!("elimination gives {c}"),
    );
    let fac = factor_integer(&BigInt::from(-7533)).unwrap();
    o.check(
        fac.to_string() == "-1 * 3^5 * 31",
        format!("factorization {fac}"),
    );

    let (f, g) = pair("k2-d1");
    o.check(
        (f.clone(), g.clone()) == (p1, p2),
        "first pair from the bank",
    );
    let a = exceptional_primes(&f, &g).unwrap();
    for p in [5u64, 11] {
        let e = gcd_at_prime(&f, &g, p).unwrap();
        o.check(!e.is_nontrivial(), format!("pair 1 coprime at {p}"));
    }
    let nt: Vec<u64> = a
        .nontrivial_primes()
        .into_iter()
        .filter(|&p| p >= 5)
        .collect();
    o.check(nt == [31], format!("pair 1 nontrivial primes {nt:?}"));
    let e = a.at(31).unwrap();
    o.check(
        e.irreducible == Some(true) && e.roots.is_empty(),
        "pair 1 gcd at 31 root-free",
    );
    o.note(format!("pair 1 gcd at 31 is {}", e.expanded('x')));

    let (f, g) = pair("k2-d2");
    let a = exceptional_primes(&f, &g).unwrap();
    let nt: Vec<u64> = a
        .nontrivial_primes()
        .into_iter()
        .filter(|&p| p >= 5)
        .collect();
    o.check(nt == [19, 156797], format!("pair 2 primes {nt:?}"));
    for (p, text) in [(19u64, "x^2 + 5"), (156797, "x^2 + 79228")] {
        let e = gcd_at_prime(&f, &g, p).unwrap();
        o.check(
            e.expanded('x') == text,
            format!("pair 2 gcd at {p}: {}", e.expanded('x')),
        );
        o.check(
            e.irreducible == Some(true),
            format!("pair 2 gcd at {p} irreducible"),
        );
    }

    let (f, g) = pair("k2-d3");
    let a = exceptional_primes(&f, &g).unwrap();
    let nt: Vec<u64> = a
        .nontrivial_primes()
        .into_iter()
        .filter(|&p| p >= 5)
        .collect();
    o.check(nt == [12497], format!("pair 3 primes {nt:?}"));
    let e = gcd_at_prime(&f, &g, 12497).unwrap();
    o.check(
        e.expanded('x') == "x^2 + 9356",
        format!("pair 3 gcd {}", e.expanded('x')),
    );
    o.check(
        e.irreducible == Some(true),
        format!(
            "pair 3 gcd x^2 + 9356 claimed irreducible over GF(12497), roots {:?}",
            e.roots
        ),
    );

    let (f, g) = pair("k3-e1");
    let a = exceptional_primes(&f, &g).unwrap();
    let nt: Vec<u64> = a
        .nontrivial_primes()
        .into_iter()
        .filter(|&p| p >= 5)
        .collect();
    o.check(
        nt == [5, 7, 17, 233, 239, 937, 28933, 323339],
        format!("pair 4 primes {nt:?}"),
    );
    for p in [5u64, 7, 239, 28933] {
        let e = a.at(p).unwrap();
        o.check(e.roots.is_empty(), format!("pair 4 gcd at {p} root-free"));
        o.check(
            e.irreducible == Some(true),
            format!("pair 4 gcd at {p} claimed irreducible: {}", e.expanded('b')),
        );
    }
    let e = a.at(17).unwrap();
    o.check(
        e.expanded('b') == "b^2 + 9" && e.roots == [5, 12],
        format!("pair 4 at 17: {}", e.expanded('b')),
    );
    for (p, shifts) in [
        (233u64, &[2u64, 231][..]),
        (937, &[533, 404]),
        (323339, &[9299, 314040]),
    ] {
        let e = a.at(p).unwrap();
        let deg = e.gcd.degree().unwrap_or(0);
        o.check(
            deg == 2 && e.roots == roots_of(p, shifts),
            format!("pair 4 at {p}: {}", e.factored('b')),
        );
    }

    let (f, g) = pair("k3-e2");
    let a = exceptional_primes(&f, &g).unwrap();
    let nt: Vec<u64> = a
        .nontrivial_primes()
        .into_iter()
        .filter(|&p| p >= 5)
        .collect();
    o.check(
        nt == [5, 7, 19, 29, 101, 41051, 15052321],
        format!("pair 5 primes {nt:?}"),
    );
    for p in [5u64, 7] {
        o.check(
            a.at(p).unwrap().roots.is_empty(),
            format!("pair 5 gcd at {p} root-free"),
        );
    }
    for (p, shifts) in [
        (19u64, &[3u64, 16][..]),
        (29, &[27, 2]),
        (101, &[34, 67]),
        (41051, &[17388, 23663]),
        (15052321, &[3670586, 11381735]),
    ] {
        let e = a.at(p).unwrap();
        let deg = e.gcd.degree().unwrap_or(0);
        o.check(
            deg == 2 && e.roots == roots_of(p, shifts),
            format!("pair 5 at {p}: {}", e.factored('b')),
        );
    }
}

fn weil(o: &mut Outcome, gf625_two: &[u64]) {
    let c = count_fermat_projective(5).unwrap();
    o.check(c.meets_bound(), format!("{c:?}"));
    o.note(format!(
        "N = {}, all-nonzero points {}",
        c.total, c.all_nonzero
    ));
    o.check(!gf625_two.contains(&7), "7 in the GF(625) 2-PN set");
    let r = is_kpn(7, 2, &FieldDesc::new(5, 4).unwrap(), true).unwrap();
    o.check(!r.verdict && r.verify(), "x^7 is 2-PN over GF(625)");
}

fn counterexamples(o: &mut Outcome) {
    for p in [5u64, 7, 11, 13] {
        match counterexample_1pp2(p) {
            Ok(c) => o.check(c.verify(), format!("p={p}: witness does not verify")),
            Err(e) => o.check(false, format!("p={p}: {e}")),
        }
    }
}

fn coeff_bank(o: &mut Outcome) {
    let bank = CaseBank::builtin();
    let mut skipped = 0;
    for case in &bank.cases {
        for p in [5u64, 7] {
            for t in case.t_values() {
                let c = verify_coeff_numeric(case, p, t).unwrap();
                o.check(
                    c.matches_off_vanishing() && c.consistent(),
                    format!("{} p={p} t={t}", case.id),
                );
                skipped += c.rows.iter().filter(|r| r.prefactor_vanishes).count();
                for r in c.rows.iter().filter(|r| r.prefactor_vanishes) {
                    // covered by an exact spot value or a direct check of the exponent
                    if r.matches() && r.formula != 0 {
                        continue;
                    }
                    let f = FieldDesc::new(p, 4).unwrap();
                    let v = is_kpn(r.n, case.k, &f, true).unwrap();
                    o.check(
                        !v.verdict,
                        format!("{} p={p} b={}: exponent {} is k-PN", case.id, r.b, r.n),
                    );
                }
            }
        }
    }
    o.note(format!(
        "{skipped} vanishing-prefactor rows checked directly"
    ));
    let spot = |id: &str, t: i64, b: i64| bank.get(id).unwrap().formula(t).unwrap().eval(0, b);
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    for b in [2, -1] {
        o.check(spot("k2-d1", 2, b) == int(-3456), format!("k2-d1 r2({b})"));
    }
    for b in [1, -1] {
        o.check(spot("k2-d2", 2, b) == int(3456), format!("k2-d2 r2({b})"));
        o.check(spot("k2-d3", 2, b) == int(3456), format!("k2-d3 r2({b})"));
    }
    for b in [2, -2] {
        o.check(spot("k2-d2", 2, b) == int(55296), format!("k2-d2 r2({b})"));
    }
    let d1 = bank.get("k2-d1").unwrap();
    o.check(
        coeff_formula(d1, 2, 0, 2, 7).unwrap() == 7 - 3456 % 7,
        "k2-d1 r2(2) mod 7",
    );
}

fn oracle_equivalences(o: &mut Outcome) {
    for (p, d) in [(3u64, 2u32), (5, 2), (7, 2)] {
        let f = FieldDesc::new(p, d).unwrap();
        for n in 1..f.order() {
            let poly = Poly::monomial(f, n as usize, Elem::ONE);
            let hd = hermite_dickson(&poly).unwrap().verdict;
            let direct = is_permutation(&f, |x| f.pow(x, n)).verdict;
            o.check(
                hd == direct,
                format!(
                    "GF({}) x^{n}: Hermite-Dickson {hd}, direct {direct}",
                    f.order()
                ),
            );
        }
    }
    for (p, d) in [(3u64, 2u32), (5, 2)] {
        let f = FieldDesc::new(p, d).unwrap();
        for k in 1..=2usize {
            for n in 1..f.order() {
                let a = is_kpn(n, k, &f, true).unwrap().verdict;
                let b = is_kpn(n, k, &f, false).unwrap().verdict;
                o.check(
                    a == b,
                    format!("GF({}) n={n} k={k}: normalized {a}, full {b}", f.order()),
                );
            }
        }
    }
    let base = FieldDesc::new(5, 2).unwrap();
    let alt = FieldDesc::prime(5)
        .unwrap()
        .extend_quadratic(Elem::ONE)
        .ok();
    o.check(alt.is_none(), "1 accepted as a non-square");
    let alt = FieldDesc::prime(5)
        .unwrap()
        .extend_quadratic(FieldDesc::prime(5).unwrap().from_int(3))
        .unwrap();
    for k in 1..=3 {
        let a = classify(&base, k, false, false).unwrap().exponents;
        let b = classify(&alt, k, false, false).unwrap().exponents;
        o.check(a == b, format!("GF(25) k={k} tower: {a:?} vs {b:?}"));
    }
    let big = FieldDesc::new(5, 4).unwrap();
    let m_default = big.tower_m().unwrap();
    let alt_m = base
        .nonzero_elements()
        .find(|&m| m != m_default && base.is_square(m) == Ok(false))
        .unwrap();
    let alt_big = base.extend_quadratic(alt_m).unwrap();
    let a = classify(&big, 2, true, true).unwrap().exponents;
    let b = classify(&alt_big, 2, true, true).unwrap().exponents;
    o.check(a == b, format!("GF(625) k=2 tower: {a:?} vs {b:?}"));
}

fn collisions(o: &mut Outcome) {
    let bank = CaseBank::builtin();
    let runs: [(&str, u64, [i64; 2], CollisionStrategy); 5] = [
        ("k3-e1", 17, [5, 12], CollisionStrategy::Exhaustive),
        ("k3-e2", 19, [3, 16], CollisionStrategy::Exhaustive),
        ("k3-e2", 29, [2, 27], CollisionStrategy::Exhaustive),
        (
            "k3-e2",
            101,
            [34, 67],
            CollisionStrategy::Birthday {
                table_size: 1 << 20,
                seed: 0x6b70_6e6c,
            },
        ),
        (
            "k3-e1",
            233,
            [2, 231],
            CollisionStrategy::Birthday {
                table_size: 1 << 20,
                seed: 0x6b70_6e6c,
            },
        ),
    ];
    for (id, p, bs, strategy) in runs {
        let case = bank.get(id).unwrap();
        for b in bs {
            let budget = match strategy {
                CollisionStrategy::Exhaustive => p.pow(4),
                CollisionStrategy::Birthday { .. } => 1_000_000,
            };
            match certify_case_collision(case, p, b, strategy, budget, 4) {
                Ok(Some(c)) => {
                    o.check(c.verify(), format!("{id} p={p} b={b}: witness fails"));
                    o.note(format!("{id} p={p} b={b} t={} probes={}", c.t, c.probes));
                }
                Ok(None) => o.check(false, format!("{id} p={p} b={b}: no collision")),
                Err(e) => o.check(false, format!("{id} p={p} b={b}: {e}")),
            }
        }
    }
    let case = bank.get("k3-e1").unwrap();
    let out = certify_case_collision(case, 28933, 1, CollisionStrategy::Exhaustive, 1, 1);
    o.check(out.is_err(), "p = 28933 should be out of scope");
}

fn main() {
    let mut unexpected = Vec::new();
    let mut gf625 = Vec::new();
    let long = std::env::var("KPNLAB_LONG").is_ok_and(|v| v == "1");
    let mut run = |id: u32, name: &str, limit: Duration, f: &mut dyn FnMut(&mut Outcome)| {
        let mut o = Outcome::new();
        let start = Instant::now();
        f(&mut o);
        let took = start.elapsed();
        o.check(took <= limit, format!("took {took:?}, limit {limit:?}"));
        let pass = o.failures.is_empty();
        println!(
            "criterion {id:>2} {} {name} ({:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        for n in &o.notes {
            println!("    note: {n}");
        }
        for f in &o.failures {
            println!("    fail: {f}");
        }
        if pass == KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    };
    let secs = Duration::from_secs;
    run(1, "S(k,r) closed forms", secs(1), &mut s_suite);
    run(
        2,
        "prime field classification",
        secs(1),
        &mut prime_field_classes,
    );
    run(
        3,
        "GF(p^2) classification",
        secs(10),
        &mut quadratic_classes,
    );
    run(4, "norm-sum identity", secs(5), &mut norm_sum_identity);
    run(5, "GF(625) 2-PN exponents", secs(60), &mut |o| {
        gf625 = gf625_two(o)
    });
    run(6, "GF(625) 3-PN exponents", secs(300), &mut |o| {
        gf_p4_three(o, 5)
    });
    if long {
        run(6, "GF(2401) 3-PN exponents", secs(3600), &mut |o| {
            gf_p4_three(o, 7)
        });
    }
    run(7, "non-square search", secs(5), &mut nonquad);
    run(8, "exceptional primes", secs(30), &mut exceptional);
    let two_pn = gf625.clone();
    run(9, "Fermat curve count", secs(10), &mut |o| weil(o, &two_pn));
    run(10, "1+p+p^2 counterexample", secs(1), &mut counterexamples);
    run(11, "coefficient bank", secs(120), &mut coeff_bank);
    run(
        12,
        "oracle equivalences",
        secs(120),
        &mut oracle_equivalences,
    );
    run(13, "collision certificates", secs(600), &mut collisions);
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
