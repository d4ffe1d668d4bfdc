use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use twistlab::complex::Complex;
use twistlab::named::{gamma, preprojective};
use twistlab::suites::{run_suite, RunConfig, SUITES};
use twistlab::twist::{apply_word, h_complex, BraidWord};
use twistlab::Field;

#[derive(Parser)]
#[command(name = "twistlab", version, about = "Exact checks of braid group actions and periodic twists on zigzag algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Odd prime for the ground field.
    #[arg(long, default_value_t = 32003)]
    p: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random trials for isomorphism searches.
    #[arg(long, default_value_t = 16)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite.
    Verify {
        /// One of: braid, longest, periodicity, h-complex, composition, pdnp,
        /// koszul-q, truncated, prep-ses, frobenius, kappa, grid.
        suite: String,
        #[arg(long)]
        n: usize,
        /// Random map pairs for kappa and grid.
        #[arg(long, default_value_t = 25)]
        corpus: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Print an object as JSON.
    Dump {
        #[command(subcommand)]
        what: Dump,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Dump {
    /// Basis and corner dimensions of Gamma_n or Pi_n.
    Algebra {
        #[arg(long, conflicts_with = "pi")]
        gamma: Option<usize>,
        #[arg(long)]
        pi: Option<usize>,
    },
    /// The closed form H_m over Gamma_n (n defaults to m).
    Complex {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        n: Option<usize>,
    },
    /// The minimized tilting complex of a braid word.
    WordComplex {
        #[arg(long)]
        n: usize,
        /// Comma separated generator indices, 1-based.
        #[arg(long)]
        word: String,
    },
}

fn emit(v: &Value, out: Option<&std::path::Path>) -> Result<(), String> {
    let s = serde_json::to_string_pretty(v).expect("reports serialize");
    // A closed pipe downstream is not an error of the run.
    let _ = writeln!(std::io::stdout(), "{s}");
    if let Some(path) = out {
        std::fs::write(path, s + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn dump(what: &Dump, f: Field) -> Result<Value, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    Ok(match what {
        Dump::Algebra { gamma: g, pi } => match (*g, *pi) {
            (Some(n), None) if n >= 1 => gamma(f, n).structure_summary(),
            (None, Some(n)) if n >= 1 => preprojective(f, n).structure_summary(),
            _ => return Err("give one of --gamma N or --pi N with N >= 1".into()),
        },
        Dump::Complex { h, n } => {
            let n = n.unwrap_or(*h);
            if n == 0 {
                return Err("n must be at least 1".into());
            }
            let c: Complex = h_complex(&gamma(f, n), *h).map_err(|e| err(&e))?;
            json!({ "object": "h-complex", "m": h, "n": n, "complex": c.describe() })
        }
        Dump::WordComplex { n, word } => {
            if *n == 0 {
                return Err("n must be at least 1".into());
            }
            let a = gamma(f, *n);
            let w = BraidWord::parse(*n, word).map_err(|e| err(&e))?;
            let c = apply_word(&a, &w).map_err(|e| err(&e))?;
            json!({ "object": "word-complex", "n": n, "word": w.to_string(), "complex": c.describe() })
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Verify { suite, n, corpus, common } => {
            let cfg = RunConfig { p: common.p, seed: common.seed, trials: common.trials, jobs: common.jobs, corpus: *corpus };
            if !SUITES.contains(&suite.as_str()) {
                return usage(format!("unknown suite {suite}; expected one of {}", SUITES.join(", ")));
            }
            let start = Instant::now();
            let rep = match run_suite(suite, *n, &cfg) {
                Ok(r) => r,
                Err(e) => return usage(e),
            };
            let mut v = rep.to_json();
            v["command"] = json!(["verify", suite, "--n", n.to_string()]);
            v["config"] = json!(cfg);
            v["timing"] = json!({ "elapsed_ms": start.elapsed().as_millis() as u64 });
            if let Err(e) = emit(&v, common.out.as_deref()) {
                return usage(e);
            }
            if rep.passed() {
                ExitCode::SUCCESS
            } else {
                for c in rep.failures() {
                    eprintln!("{:?}: {}", c.verdict, c.name);
                }
                ExitCode::from(1)
            }
        }
        Cmd::Dump { what, common } => {
            let f = match Field::new(common.p) {
                Ok(f) => f,
                Err(e) => return usage(e),
            };
            match dump(what, f).and_then(|v| emit(&json!({ "schema": 1, "dump": v }), common.out.as_deref())) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => usage(e),
            }
        }
    }
}
