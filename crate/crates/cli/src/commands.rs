use std::path::PathBuf;

use anyhow::{bail, ensure, Context};
use clap::{Args, Subcommand, ValueEnum};
use kpnlab::cases::{
    self, bank, certify_case_collision, count_fermat_projective, counterexample_1pp2,
    nonquad_search, verify_coeff_numeric, CaseBank,
};
use kpnlab::combinatorics::{big_mod, binomial_big, lucas_binomial, s_closed, s_direct};
use kpnlab::difference::{
    DirectionTuple, PointwiseEvaluator, PowerTable, SubsetSums, MAX_TABLE_ORDER,
};
use kpnlab::exact::{exceptional_primes, ExceptionalAnalysis, ZPoly};
use kpnlab::kpn::{classify, find_collision, is_kpn, CollisionStrategy, PermWitness};
use kpnlab::{Elem, FieldDesc};
use serde::Serialize;
use serde_json::Value;

use crate::report::{big_value, object};

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// List every k-PN exponent of a field.
    Classify(ClassifyArgs),
    /// Decide whether x^n is k-PN.
    Test(TestArgs),
    /// Auxiliary number-theoretic facts.
    #[command(subcommand)]
    Lemma(Lemma),
    /// Compare a bank coefficient formula with the numeric top coefficient.
    Coeff(CoeffArgs),
    /// Primes at which two integer polynomials acquire a common factor.
    Exceptional(ExceptionalArgs),
    /// Count projective points of y^(p-1) + z^(p-1) + t^(p-1) = 0 over GF(p^4).
    Weil(PrimeArgs),
    /// Search for a collision of a k-th difference of x^n.
    Collide(CollideArgs),
    /// Build the explicit collision for x^(1+p+p^2) over GF(p^4).
    Counterexample(PrimeArgs),
    /// Record or check the golden report corpus.
    Goldens(GoldensArgs),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Classify(_) => "classify".into(),
            Command::Test(_) => "test".into(),
            Command::Lemma(l) => format!("lemma {}", l.name()),
            Command::Coeff(_) => "coeff".into(),
            Command::Exceptional(_) => "exceptional".into(),
            Command::Weil(_) => "weil".into(),
            Command::Collide(_) => "collide".into(),
            Command::Counterexample(_) => "counterexample".into(),
            Command::Goldens(_) => "goldens".into(),
        }
    }

    /// Parameter echo for the report.
    pub fn params(&self) -> Value {
        let v = serde_json::to_value(self).expect("arguments serialize");
        match v {
            Value::Object(map) => map
                .into_iter()
                .next()
                .map(|(_, v)| v)
                .unwrap_or(Value::Null),
            other => other,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    pub p: u64,
    /// Extension degree: 1, 2 or 4.
    #[arg(long, default_value_t = 1)]
    pub ext: u32,
}

impl FieldArgs {
    fn field(&self) -> anyhow::Result<FieldDesc> {
        Ok(FieldDesc::new(self.p, self.ext)?)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub k: usize,
    /// Only report exponents not divisible by p.
    #[arg(long)]
    pub coprime: bool,
    /// Sweep one exponent per Frobenius class.
    #[arg(long)]
    pub frobenius: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: u64,
    /// Sweep every direction tuple instead of normalized ones.
    #[arg(long)]
    pub full: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// S(k, r) by the double sum and the closed form.
    Skr {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        r: u32,
    },
    /// Non-square m of GF(p^2) with Norm(1+m) = 4.
    Nonquad {
        #[arg(long)]
        p: u64,
    },
    /// C(alpha, beta) mod p by Lucas' theorem and by exact arithmetic.
    Lucas {
        #[arg(long)]
        alpha: u64,
        #[arg(long)]
        beta: u64,
        #[arg(long)]
        p: u64,
    },
}

impl Lemma {
    fn name(&self) -> &'static str {
        match self {
            Lemma::Skr { .. } => "skr",
            Lemma::Nonquad { .. } => "nonquad",
            Lemma::Lucas { .. } => "lucas",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CoeffArgs {
    /// Case id from the bank.
    #[arg(long = "case")]
    pub case_id: String,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub t: i64,
    /// Bank file to use instead of the built-in one; refused unless its
    /// checksum matches.
    #[arg(long)]
    pub bank: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExceptionalArgs {
    /// Take the pair from a bank case.
    #[arg(long = "case", conflicts_with_all = ["f", "g"])]
    pub case_id: Option<String>,
    #[arg(long, requires = "g")]
    pub f: Option<String>,
    #[arg(long, requires = "f")]
    pub g: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PrimeArgs {
    #[arg(long)]
    pub p: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Exhaustive,
    Birthday,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CollideArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    /// Exponent, with `--dirs`.
    #[arg(long, requires = "dirs", conflicts_with = "case_id")]
    pub n: Option<u64>,
    /// Directions as `e1;e2;...`, each element `c0,c1,...`.
    #[arg(long, requires = "n")]
    pub dirs: Option<String>,
    /// Bank case, with `--b`; directions run through t = 1..=max-t.
    #[arg(long = "case", requires = "b")]
    pub case_id: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<i64>,
    #[arg(long, default_value_t = 4)]
    pub max_t: i64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
    pub strategy: StrategyArg,
    /// Evaluations per direction tuple; defaults to the field order.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 1 << 20)]
    pub table_size: usize,
    #[arg(long, default_value_t = 0x6b70_6e6c)]
    pub seed: u64,
}

impl CollideArgs {
    fn strategy(&self) -> CollisionStrategy {
        match self.strategy {
            StrategyArg::Exhaustive => CollisionStrategy::Exhaustive,
            StrategyArg::Birthday => CollisionStrategy::Birthday {
                table_size: self.table_size,
                seed: self.seed,
            },
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GoldensArgs {
    #[arg(value_enum)]
    pub mode: GoldensMode,
    /// Golden directory.
    #[arg(long, default_value = "goldens")]
    pub dir: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoldensMode {
    Record,
    Check,
}

/// Whether the claim examined by a command survived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    /// Refuted, normally with a witness.
    Falsified,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub payload: Value,
    pub witnesses: Vec<String>,
}

impl Outcome {
    fn new(holds: bool, payload: Value, witnesses: Vec<String>) -> Self {
        Outcome {
            status: if holds {
                Status::Holds
            } else {
                Status::Falsified
            },
            payload,
            witnesses,
        }
    }
}

fn replayed(ok: bool, verify: bool) -> anyhow::Result<()> {
    ensure!(!verify || ok, "witness failed to re-verify");
    Ok(())
}

fn bank_case<'a>(bank: &'a CaseBank, id: &str) -> anyhow::Result<&'a cases::CoeffCase> {
    Ok(bank.get(id)?)
}

pub fn execute(cmd: &Command, verify: bool) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Classify(a) => run_classify(a),
        Command::Test(a) => run_test(a, verify),
        Command::Lemma(l) => run_lemma(l),
        Command::Coeff(a) => run_coeff(a),
        Command::Exceptional(a) => run_exceptional(a),
        Command::Weil(a) => run_weil(a),
        Command::Collide(a) => run_collide(a, verify),
        Command::Counterexample(a) => run_counterexample(a, verify),
        Command::Goldens(_) => bail!("goldens is not a report command"),
    }
}

fn run_classify(a: &ClassifyArgs) -> anyhow::Result<Outcome> {
    let f = a.field.field()?;
    let c = classify(&f, a.k, a.coprime, a.frobenius)?;
    let reps = if a.frobenius {
        Value::from(c.class_representatives.clone())
    } else {
        Value::Null
    };
    let payload = object([
        ("exponents", Value::from(c.exponents.clone())),
        ("class_representatives", reps),
        ("swept", c.swept.into()),
        ("rejected_by_subfield", c.rejected_by_subfield.into()),
    ]);
    Ok(Outcome::new(true, payload, Vec::new()))
}

fn run_test(a: &TestArgs, verify: bool) -> anyhow::Result<Outcome> {
    let f = a.field.field()?;
    let r = is_kpn(a.n, a.k, &f, !a.full)?;
    replayed(r.verify(), verify)?;
    let mut witnesses = Vec::new();
    if let Some(PermWitness::Collision { x1, x2 }) = r.perm.and_then(|p| p.witness) {
        witnesses.push(format!("x1={}", f.format(x1)));
        witnesses.push(format!("x2={}", f.format(x2)));
    }
    let payload = object([
        ("kpn", r.verdict.into()),
        (
            "failing_dirs",
            r.failing_dirs.as_ref().map(DirectionTuple::format).into(),
        ),
        ("normalized", r.normalized.into()),
        ("tuples_total", r.stats.tuples_total.into()),
        ("tuples_tested", r.stats.tuples_tested.into()),
        ("early_exit", r.stats.early_exit.into()),
    ]);
    Ok(Outcome::new(r.verdict, payload, witnesses))
}

/// Largest `alpha` for which `lemma lucas` also computes the exact binomial.
const LUCAS_EXACT_LIMIT: u64 = 100_000;

fn run_lemma(l: &Lemma) -> anyhow::Result<Outcome> {
    match *l {
        Lemma::Skr { k, r } => {
            let direct = s_direct(k, r);
            let closed = s_closed(k, r);
            let holds = closed.as_ref().is_none_or(|c| *c == direct);
            let payload = object([
                ("value", big_value(&direct)),
                ("closed_form", closed.as_ref().map(big_value).into()),
            ]);
            Ok(Outcome::new(holds, payload, Vec::new()))
        }
        Lemma::Nonquad { p } => {
            let w = nonquad_search(p)?;
            let payload = object([
                ("t", w.t.into()),
                ("k", w.k.into()),
                ("m1", w.m1.into()),
                ("m2", w.m2.into()),
                ("invariants", w.check().into()),
            ]);
            let witnesses = vec![format!("m={}", w.field.format(w.m))];
            Ok(Outcome::new(w.check(), payload, witnesses))
        }
        Lemma::Lucas { alpha, beta, p } => {
            FieldDesc::prime(p)?;
            ensure!(
                alpha <= LUCAS_EXACT_LIMIT,
                "alpha = {alpha} exceeds {LUCAS_EXACT_LIMIT} for the exact comparison"
            );
            let lucas = lucas_binomial(alpha, beta, p);
            let direct = if beta > alpha {
                0
            } else {
                big_mod(&binomial_big(alpha, beta), p)
            };
            let payload = object([("lucas", lucas.into()), ("direct", direct.into())]);
            Ok(Outcome::new(lucas == direct, payload, Vec::new()))
        }
    }
}

fn run_coeff(a: &CoeffArgs) -> anyhow::Result<Outcome> {
    let bank = match &a.bank {
        None => CaseBank::builtin(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let sum = bank::checksum(&text);
            ensure!(
                sum == cases::BANK_CHECKSUM,
                "bank checksum mismatch: {} has {sum}, this build expects {}",
                path.display(),
                cases::BANK_CHECKSUM
            );
            CaseBank::parse(&text)?
        }
    };
    let case = bank_case(&bank, &a.case_id)?;
    let check = verify_coeff_numeric(case, a.p, a.t)?;
    let f = FieldDesc::new(a.p, 4)?;
    let rows: Vec<Value> = check
        .rows
        .iter()
        .map(|r| {
            object([
                ("a", r.a.into()),
                ("b", r.b.into()),
                ("n", r.n.into()),
                ("numeric", f.format(r.numeric).into()),
                ("formula", r.formula.into()),
                ("matches", r.matches().into()),
                ("prefactor_vanishes", r.prefactor_vanishes.into()),
                ("is_permutation", r.is_permutation.into()),
            ])
        })
        .collect();
    let holds = check.matches_off_vanishing() && check.consistent();
    let payload = object([
        ("formula", case.formula(a.t)?.text().into()),
        ("power", check.power.name().into()),
        ("all_match", check.all_match().into()),
        ("consistent", check.consistent().into()),
        ("rows", rows.into()),
    ]);
    Ok(Outcome::new(holds, payload, Vec::new()))
}

fn analysis_value(a: &ExceptionalAnalysis, var: char) -> Value {
    let primes: Vec<Value> = a
        .primes
        .iter()
        .map(|e| {
            object([
                ("prime", e.prime.into()),
                ("nontrivial", e.is_nontrivial().into()),
                ("gcd", e.expanded(var).into()),
                ("factored", e.factored(var).into()),
                ("irreducible", e.irreducible.into()),
                ("roots", e.roots.clone().into()),
            ])
        })
        .collect();
    object([
        ("resultant", a.resultant.to_string().into()),
        ("factorization", a.factorization.to_string().into()),
        ("nontrivial_primes", a.nontrivial_primes().into()),
        ("primes", primes.into()),
    ])
}

fn run_exceptional(a: &ExceptionalArgs) -> anyhow::Result<Outcome> {
    let ((f, g), var) = match (&a.case_id, &a.f, &a.g) {
        (Some(id), _, _) => {
            let bank = CaseBank::builtin();
            let pair = bank_case(&bank, id)?
                .exceptional_pair()
                .with_context(|| format!("case {id} has no formula pair"))?;
            (pair, 'b')
        }
        (None, Some(f), Some(g)) => {
            let var = f
                .chars()
                .chain(g.chars())
                .find(char::is_ascii_alphabetic)
                .unwrap_or('x');
            ((f.parse::<ZPoly>()?, g.parse::<ZPoly>()?), var)
        }
        _ => bail!("give either --case or both --f and --g"),
    };
    let analysis = exceptional_primes(&f, &g)?;
    Ok(Outcome::new(
        true,
        analysis_value(&analysis, var),
        Vec::new(),
    ))
}

fn run_weil(a: &PrimeArgs) -> anyhow::Result<Outcome> {
    let c = count_fermat_projective(a.p)?;
    let payload = object([
        ("total", c.total.into()),
        ("on_axes", c.on_axes.into()),
        ("all_nonzero", c.all_nonzero.into()),
        ("per_axis", c.per_axis.into()),
        ("weil_lower_bound", c.weil_lower_bound.into()),
        ("meets_bound", c.meets_bound().into()),
    ]);
    Ok(Outcome::new(c.meets_bound(), payload, Vec::new()))
}

fn run_collide(a: &CollideArgs, verify: bool) -> anyhow::Result<Outcome> {
    let strategy = a.strategy();
    if let Some(id) = &a.case_id {
        ensure!(
            a.field.ext == 4,
            "bank cases live over GF(p^4); pass --ext 4"
        );
        let bank = CaseBank::builtin();
        let case = bank_case(&bank, id)?;
        let budget = a.budget.unwrap_or_else(|| a.field.p.pow(4));
        let b = a.b.expect("clap enforces --b with --case");
        let cert = certify_case_collision(case, a.field.p, b, strategy, budget, a.max_t)?;
        let Some(c) = cert else {
            let payload = object([("collision", Value::Null), ("budget_per_t", budget.into())]);
            return Ok(Outcome::new(true, payload, Vec::new()));
        };
        replayed(c.verify(), verify)?;
        let f = FieldDesc::new(a.field.p, 4)?;
        let payload = object([
            ("collision", true.into()),
            ("n", c.n.into()),
            ("t", c.t.into()),
            ("dirs", Value::from(c.dirs.clone())),
            ("probes", c.probes.into()),
        ]);
        let witnesses = vec![
            format!("x1={}", f.format(c.x1)),
            format!("x2={}", f.format(c.x2)),
        ];
        return Ok(Outcome::new(false, payload, witnesses));
    }
    let (Some(n), Some(dirs)) = (a.n, &a.dirs) else {
        bail!("give either --n with --dirs or --case with --b");
    };
    let f = a.field.field()?;
    let dirs = DirectionTuple::parse(f, dirs)?;
    let budget = a.budget.unwrap_or(f.order());
    let search = if f.order() <= MAX_TABLE_ORDER {
        let table = PowerTable::new(f, n)?;
        let ev = PointwiseEvaluator::new(&table, dirs.dirs())?;
        find_collision(&f, |x| ev.eval(x), budget, strategy)?
    } else {
        let sums = SubsetSums::of(&dirs);
        find_collision(&f, |x| sums.eval(|y| f.pow(y, n), x), budget, strategy)?
    };
    let exhausted = strategy == CollisionStrategy::Exhaustive && budget >= f.order();
    match search.collision {
        Some((x1, x2)) => {
            let sums = SubsetSums::of(&dirs);
            let h = |x: Elem| sums.eval(|y| f.pow(y, n), x);
            replayed(h(x1) == h(x2), verify)?;
            let payload = object([
                ("collision", true.into()),
                ("dirs", dirs.format().into()),
                ("probes", search.probes.into()),
            ]);
            let witnesses = vec![
                format!("x1={}", f.format(x1)),
                format!("x2={}", f.format(x2)),
            ];
            Ok(Outcome::new(false, payload, witnesses))
        }
        None => {
            let payload = object([
                ("collision", Value::Null),
                ("dirs", dirs.format().into()),
                ("probes", search.probes.into()),
                ("bijective", exhausted.into()),
            ]);
            Ok(Outcome::new(true, payload, Vec::new()))
        }
    }
}

fn run_counterexample(a: &PrimeArgs, verify: bool) -> anyhow::Result<Outcome> {
    let c = counterexample_1pp2(a.p)?;
    replayed(c.verify(), verify)?;
    let f = c.field;
    let sub = f.subfield(2)?;
    let payload = object([
        ("n", c.n.into()),
        ("m", sub.format(c.m).into()),
        ("v", f.format(c.v).into()),
        ("x1", sub.format(c.x1).into()),
        ("value", f.format(c.value).into()),
    ]);
    let witnesses = vec![
        format!("x={}", f.format(c.x)),
        format!("x'={}", f.format(c.x_prime)),
    ];
    Ok(Outcome::new(false, payload, witnesses))
}
