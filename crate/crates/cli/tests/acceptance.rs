//! One PASS/FAIL line per acceptance criterion. The test itself asserts the
//! verdict table we currently expect, so an unexpected change in either
//! direction shows up as a failure.

use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use twistlab::bimodule::Atom;
use twistlab::complex::{cone, dualize, find_chain_iso, tensor, Complex};
use twistlab::named::{gamma, linear_orientation, preprojective};
use twistlab::report::TriangleReport;
use twistlab::suites::{run_suite, RunConfig};
use twistlab::triangles::{random_map, random_small_complex};
use twistlab::{Alg, Field, Matrix};

struct Outcome {
    ok: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, notes: Vec::new() }
    }

    fn record(&mut self, label: &str, rep: &TriangleReport) {
        if !rep.passed() {
            self.ok = false;
            let names: Vec<_> = rep.failures().iter().map(|c| c.name.clone()).collect();
            self.notes.push(format!("{label}: {}", names.join("; ")));
        }
    }

    fn require(&mut self, label: &str, ok: bool) {
        if !ok {
            self.ok = false;
            self.notes.push(label.to_string());
        }
    }
}

fn cfg(p: u32) -> RunConfig {
    RunConfig { p, ..RunConfig::default() }
}

fn suite(s: &str, n: usize, p: u32) -> TriangleReport {
    run_suite(s, n, &cfg(p)).unwrap_or_else(|e| panic!("{s} --n {n}: {e}"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twistlab"))
}

fn cli_verify(s: &str, n: usize, p: u32) -> (i32, Value) {
    let out = bin()
        .args(["verify", s, "--n", &n.to_string(), "--p", &p.to_string()])
        .output()
        .expect("binary runs");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), v)
}

/// Verdict of every check, in order, for cross-field comparison.
fn verdicts(rep: &TriangleReport) -> Vec<(String, String)> {
    rep.checks.iter().map(|c| (c.name.clone(), format!("{:?}", c.verdict))).collect()
}

fn criterion1(p: u32, cross: &mut Vec<Vec<(String, String)>>) -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=4 {
        let (code, v) = cli_verify("longest", n, p);
        o.require(&format!("longest n={n} exit {code}"), code == 0);
        let rep = suite("longest", n, p);
        o.require(&format!("longest n={n} cli and library disagree"), v["verdict"] == rep.to_json()["verdict"]);
        o.record(&format!("n={n}"), &rep);
        cross.push(verdicts(&rep));
    }
    o
}

fn criterion2(p: u32, cross: &mut Vec<Vec<(String, String)>>) -> Outcome {
    let mut o = Outcome::new();
    for n in 2..=4 {
        let rep = suite("braid", n, p);
        o.record(&format!("n={n}"), &rep);
        cross.push(verdicts(&rep));
    }
    o
}

fn criterion3(p: u32, cross: &mut Vec<Vec<(String, String)>>) -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=4 {
        let rep = suite("h-complex", n, p);
        if n == 4 {
            o.require("atom multiset of H_4 not checked", rep.checks.iter().any(|c| c.name.ends_with("atom multiset")));
        }
        o.record(&format!("n={n}"), &rep);
        cross.push(verdicts(&rep));
    }
    o
}

fn criterion4(p: u32, cross: &mut Vec<Vec<(String, String)>>) -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=4 {
        let rep = suite("periodicity", n, p);
        o.record(&format!("periodicity n={n}"), &rep);
        cross.push(verdicts(&rep));
    }
    for n in 3..=4 {
        let rep = suite("truncated", n, p);
        o.record(&format!("truncated n={n}"), &rep);
        cross.push(verdicts(&rep));
    }
    o
}

fn criterion5() -> Outcome {
    let mut o = Outcome::new();
    for n in 2..=3 {
        o.record(&format!("composition n={n}"), &suite("composition", n, 32003));
        o.record(&format!("pdnp n={n}"), &suite("pdnp", n, 32003));
    }
    o
}

fn criterion6() -> Outcome {
    let mut o = Outcome::new();
    let mut corpus = 0;
    for n in 3..=4 {
        corpus += twistlab::koszul::preprojective_corpus(&preprojective(Field::default(), n)).unwrap().len();
        o.record(&format!("koszul-q n={n}"), &suite("koszul-q", n, 32003));
    }
    o.require(&format!("graded corpus has {corpus} < 20 bimodules"), corpus >= 20);
    for n in 2..=5 {
        o.record(&format!("prep-ses n={n}"), &suite("prep-ses", n, 32003));
    }
    for n in 3..=5 {
        // The frobenius suite builds the signed identification and fails to
        // construct if it is not an isomorphism onto the realized dual.
        o.record(&format!("frobenius n={n}"), &suite("frobenius", n, 32003));
    }
    o
}

fn criterion7() -> Outcome {
    let mut o = Outcome::new();
    let mut pairs = 0;
    for n in 2..=3 {
        for s in ["kappa", "grid"] {
            let rep = suite(s, n, 32003);
            pairs += RunConfig::default().corpus;
            o.record(&format!("{s} n={n}"), &rep);
            if s == "grid" {
                o.require(
                    &format!("negative control missing at n={n}"),
                    rep.checks.iter().any(|c| c.name == "unsigned control fails" && c.verdict == twistlab::report::Verdict::Pass),
                );
            }
        }
    }
    o.require(&format!("only {pairs} pairs"), pairs >= 50);
    o
}

fn associative(a: &Alg, r: &mut ChaCha8Rng) -> bool {
    (0..6).all(|_| {
        let (x, y, z) = (a.random_element(r), a.random_element(r), a.random_element(r));
        a.mul(&a.mul(&x, &y), &z) == a.mul(&x, &a.mul(&y, &z))
    })
}

/// Seeded rerun of the property corpus; the full proptest version lives in
/// the core crate.
fn criterion8() -> Outcome {
    let mut o = Outcome::new();
    let f = Field::default();
    for seed in 0..30u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a = gamma(f, 2 + (seed % 2) as usize);
        let m = random_map(&a, &mut r);
        let x = random_small_complex(&a, &mut r);
        let c = cone(&m);
        let built = [cone(&m), tensor(&m.src, &x), x.shift(1), m.src.direct_sum(&x), dualize(&x), c.minimize()];
        o.require(&format!("d^2 at seed {seed}"), built.iter().all(|c| c.check().is_ok()));
        let nz = |c: &Complex| c.homology_dims().into_iter().filter(|&(_, h)| h > 0).collect::<Vec<_>>();
        o.require(&format!("minimize homology at seed {seed}"), nz(&c) == nz(&c.minimize()));
        let unit = Complex::stalk(&a, &a, 0, vec![Atom::regular(&a)]);
        o.require(
            &format!("tensor unit at seed {seed}"),
            find_chain_iso(&tensor(&unit, &x), &x, &mut r, 8).is_some() && find_chain_iso(&tensor(&x, &unit), &x, &mut r, 8).is_some(),
        );
        let (rows, k, cols) = (1 + (seed % 7) as usize, (seed % 5) as usize, 1 + (seed % 9) as usize);
        let mm = Matrix::random(f, rows, k, &mut r).mul(&Matrix::random(f, k, cols, &mut r));
        o.require(&format!("rank-nullity at seed {seed}"), mm.rank() + mm.nullspace().cols() == cols);
    }
    let mut r = ChaCha8Rng::seed_from_u64(99);
    for n in 1..=5 {
        for a in [gamma(f, n), preprojective(f, n), linear_orientation(f, n)] {
            o.require(&format!("associativity of {}", a.name()), associative(&a, &mut r));
        }
    }
    o
}

fn print(k: usize, o: &Outcome) {
    let tag = if o.ok { "PASS" } else { "FAIL" };
    if o.notes.is_empty() {
        println!("criterion {k}: {tag}");
    } else {
        println!("criterion {k}: {tag} ({})", o.notes.join(" | "));
    }
}

#[test]
fn acceptance() {
    let mut first = Vec::new();
    let outcomes = vec![
        criterion1(32003, &mut first),
        criterion2(32003, &mut first),
        criterion3(32003, &mut first),
        criterion4(32003, &mut first),
        criterion5(),
        criterion6(),
        criterion7(),
        criterion8(),
    ];
    let mut second = Vec::new();
    criterion1(31013, &mut second);
    criterion2(31013, &mut second);
    criterion3(31013, &mut second);
    criterion4(31013, &mut second);
    let mut c9 = Outcome::new();
    c9.require("verdicts differ at 31013", first == second);

    for (k, o) in outcomes.iter().chain(std::iter::once(&c9)).enumerate() {
        print(k + 1, o);
    }
    let table: Vec<bool> = outcomes.iter().chain(std::iter::once(&c9)).map(|o| o.ok).collect();
    // 1, 4 and 6 fail on the sign of the tau twist for odd n >= 3; see README.
    assert_eq!(table, vec![false, true, true, false, true, false, true, true, true]);
    assert_eq!(outcomes[0].notes.len(), 2, "{:?}", outcomes[0].notes);
    assert!(outcomes[0].notes.iter().all(|s| s.contains("n=3")), "{:?}", outcomes[0].notes);
    assert!(outcomes[3].notes.iter().all(|s| s.contains("n=3")), "{:?}", outcomes[3].notes);
    assert!(
        outcomes[5].notes.iter().all(|s| s.starts_with("frobenius n=3") || s.starts_with("frobenius n=5")),
        "{:?}",
        outcomes[5].notes
    );
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "longest", "--n", "0"],
        vec!["verify", "nonsense", "--n", "2"],
        vec!["verify", "frobenius", "--n", "2"],
        vec!["verify", "braid", "--n", "2", "--p", "32004"],
        vec!["verify", "braid", "--n", "2", "--trials", "0"],
        vec!["dump", "algebra"],
    ] {
        let st = bin().args(&args).output().unwrap().status;
        assert_eq!(st.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reports_are_deterministic() {
    let run = |jobs: &str| {
        let out = bin().args(["verify", "kappa", "--n", "2", "--corpus", "6", "--seed", "4", "--jobs", jobs]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        v["config"].as_object_mut().unwrap().remove("jobs");
        v
    };
    assert_eq!(run("1"), run("1"));
    assert_eq!(run("1"), run("3"));
}

#[test]
fn dumps() {
    let out = bin().args(["dump", "algebra", "--gamma", "3"]).output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["dump"]["dim"], 10);
    let out = bin().args(["dump", "word-complex", "--n", "3", "--word", "3,2,1"]).output().unwrap();
    assert!(out.status.success());
    let out = bin().args(["dump", "complex", "--h", "4"]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!v["dump"]["complex"]["edges"].as_array().unwrap().is_empty());
}
