//! Named verification suites, shared by the command line driver and the
//! acceptance test.

use crate::algebra::corner_algebra;
use crate::field::{Field, FieldError};
use crate::koszul::{
    verify_frobenius, verify_inflation_instance, verify_prep_ses, verify_q_corpus, verify_truncated, KoszulError,
};
use crate::named::gamma;
use crate::report::TriangleReport;
use crate::triangles::{braid_grid_check, braid_grid_check_unsigned, kappa, random_map};
use crate::twist::{
    detect_periodicity, verify_braid_relations, verify_composition, verify_h_complex, verify_longest, verify_pdnp,
    verify_periodicity, TwistData, TwistError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

pub const SUITES: &[&str] = &[
    "braid",
    "longest",
    "periodicity",
    "h-complex",
    "composition",
    "pdnp",
    "koszul-q",
    "truncated",
    "prep-ses",
    "frobenius",
    "kappa",
    "grid",
];

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub p: u32,
    pub seed: u64,
    pub trials: usize,
    pub jobs: usize,
    /// Random map pairs for the kappa and grid suites.
    pub corpus: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { p: 32003, seed: 0, trials: 16, jobs: 1, corpus: 25 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite {0}")]
    UnknownSuite(String),
    #[error("suite {suite} needs n >= {min}, got {n}")]
    NOutOfRange { suite: String, n: usize, min: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
}

fn min_n(suite: &str) -> usize {
    match suite {
        "longest" | "periodicity" | "h-complex" => 1,
        "braid" | "composition" | "pdnp" | "prep-ses" | "kappa" | "grid" => 2,
        _ => 3,
    }
}

pub fn run_suite(suite: &str, n: usize, cfg: &RunConfig) -> Result<TriangleReport, SuiteError> {
    if !SUITES.contains(&suite) {
        return Err(SuiteError::UnknownSuite(suite.into()));
    }
    if n < min_n(suite) {
        return Err(SuiteError::NOutOfRange { suite: suite.into(), n, min: min_n(suite) });
    }
    if cfg.trials == 0 {
        return Err(SuiteError::NoTrials);
    }
    let f = Field::new(cfg.p)?;
    let t = cfg.trials;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rng = &mut rng;
    let rep = match suite {
        "braid" => verify_braid_relations(&gamma(f, n), rng, t)?,
        "longest" => verify_longest(&gamma(f, n), rng, t)?,
        "periodicity" => verify_periodicity(&gamma(f, n), rng, t)?,
        "h-complex" => {
            let a = gamma(f, n);
            let mut rep = TriangleReport::new(format!("h-complex/n={n}"));
            for m in 1..=n {
                rep.absorb(&format!("m={m}"), verify_h_complex(&a, m, rng, t)?);
            }
            rep
        }
        "composition" => {
            let a = gamma(f, n);
            let mut rep = TriangleReport::new(format!("composition/n={n}"));
            let (s1, s2) = (TwistData::spherical(&a, 0)?, TwistData::spherical(&a, 1)?);
            rep.absorb("P1+P2", verify_composition(&s1, &s2, rng, t)?);
            if n >= 3 {
                let c = corner_algebra(&a, &[0, 1]);
                let p = detect_periodicity(&c.alg, 4, rng, t)?.ok_or(TwistError::NotSpherical(0))?;
                let td = TwistData::from_periodicity(c, &p)?;
                rep.absorb("P1+P2+P3", verify_composition(&td, &TwistData::spherical(&a, 2)?, rng, t)?);
            }
            rep
        }
        "pdnp" => {
            let a = gamma(f, n);
            let mut rep = TriangleReport::new(format!("pdnp/n={n}"));
            let s = TwistData::spherical(&a, 0)?;
            rep.absorb("P=P1", verify_pdnp(&corner_algebra(&a, &[0]), &s, rng, t)?);
            if n == 2 {
                rep.absorb("P=A", verify_pdnp(&corner_algebra(&a, &[0, 1]), &s, rng, t)?);
            }
            rep
        }
        "koszul-q" => {
            let mut rep = verify_q_corpus(f, n, rng, t)?;
            let verts: Vec<usize> = if n >= 4 { (0..n - 1).collect() } else { (0..n).collect() };
            rep.absorb("inflation", verify_inflation_instance(f, n, &verts, rng, t)?);
            rep
        }
        "truncated" => verify_truncated(f, n, rng, t)?,
        "prep-ses" => verify_prep_ses(f, n)?,
        "frobenius" => verify_frobenius(f, n, rng, t)?,
        "kappa" | "grid" => corpus_suite(suite, f, n, cfg),
        _ => unreachable!(),
    };
    Ok(rep)
}

/// Seeded random map pairs over `Gamma_n`, pair `k` drawn from seed
/// `seed + k` so the result does not depend on the job count.
fn corpus_suite(suite: &str, f: Field, n: usize, cfg: &RunConfig) -> TriangleReport {
    let a = gamma(f, n);
    let run = || {
        (0..cfg.corpus)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
                let fx = random_map(&a, &mut rng);
                let fy = random_map(&a, &mut rng);
                if suite == "kappa" {
                    (kappa(&fx, &fy).1, true)
                } else {
                    (braid_grid_check(&fx, &fy), !braid_grid_check_unsigned(&fx, &fy).passed())
                }
            })
            .collect::<Vec<_>>()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    let mut rep = TriangleReport::new(format!("{suite}/n={n}"));
    let mut caught = 0;
    for (k, (r, control)) in results.into_iter().enumerate() {
        rep.absorb(&format!("pair{k}"), r);
        caught += usize::from(control);
    }
    if suite == "grid" {
        rep.check(
            "unsigned control fails",
            caught == cfg.corpus,
            json!({ "caught": caught, "pairs": cfg.corpus }),
        );
    }
    rep
}
