use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistlab::algebra::corner_algebra;
use twistlab::complex::find_chain_iso;
use twistlab::named::gamma;
use twistlab::report::TriangleReport;
use twistlab::twist::*;
use twistlab::Field;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn assert_pass(rep: &TriangleReport) {
    assert!(rep.passed(), "{}", serde_json::to_string_pretty(&rep.to_json()).unwrap());
}

#[test]
fn braid_relations_gamma3() {
    let a = gamma(Field::default(), 3);
    assert_pass(&verify_braid_relations(&a, &mut rng(3), 8).unwrap());
}

/// The syzygy class is `tau` for even `n` and `tau` composed with the sign
/// flip for odd `n >= 3`; `tau` on `k[x]/x^2` already carries the sign.
fn expected_class(n: usize) -> &'static str {
    if n == 1 || n % 2 == 0 {
        "tau"
    } else {
        "tau*sign_flip"
    }
}

fn class_of(rep: &TriangleReport) -> String {
    let c = rep.checks.iter().find(|c| c.name.starts_with("automorphism")).unwrap();
    c.witness["class"].as_str().unwrap().to_string()
}

#[test]
fn longest_words() {
    for n in 1..=4 {
        let t = Instant::now();
        let a = gamma(Field::default(), n);
        let rep = verify_longest(&a, &mut rng(n as u64), 8).unwrap();
        assert_eq!(rep.checks[0].verdict, twistlab::report::Verdict::Pass, "n={n}");
        assert_eq!(class_of(&rep), expected_class(n), "n={n}");
        eprintln!("longest n={n}: {:?}", t.elapsed());
    }
}

#[test]
fn periodicity_of_zigzag() {
    let f = Field::default();
    for n in 1..=5 {
        let a = gamma(f, n);
        let rep = verify_periodicity(&a, &mut rng(7), 8).unwrap();
        assert_eq!(rep.checks[0].verdict, twistlab::report::Verdict::Pass, "n={n}");
        assert_eq!(class_of(&rep), expected_class(n), "n={n}");
    }
}

#[test]
fn corner_periodicity() {
    let a = gamma(Field::default(), 4);
    for m in 1..4 {
        let c = corner_algebra(&a, &(0..m).collect::<Vec<_>>());
        let p = detect_periodicity(&c.alg, 2 * m + 2, &mut rng(m as u64), 8).unwrap().unwrap();
        assert_eq!(p.period, m);
        assert_eq!(tau_class(&c.alg, &p.automorphism, &mut rng(1), 8), expected_class(m));
    }
}

#[test]
fn spherical_data_gives_spherical_twist() {
    let a = gamma(Field::default(), 3);
    for v in 0..3 {
        let td = TwistData::spherical(&a, v).unwrap();
        let x = periodic_twist(&td).unwrap();
        let s = spherical_twist_complex(&a, v).unwrap();
        assert!(find_chain_iso(&x, &s, &mut rng(v as u64), 8).is_some());
    }
}

#[test]
fn period_two_twist_is_word_121() {
    let f = Field::default();
    let a = gamma(f, 3);
    let c = corner_algebra(&a, &[0, 1]);
    let p = detect_periodicity(&c.alg, 4, &mut rng(5), 8).unwrap().unwrap();
    assert_eq!(p.period, 2);
    let td = TwistData::from_periodicity(c, &p).unwrap();
    let x = periodic_twist(&td).unwrap();
    let w = apply_word(&a, &BraidWord::parse(3, "1,2,1").unwrap()).unwrap();
    let mut rep = TriangleReport::new("121");
    compare_to_identity(&mut rep, "agree", &x, &w, &mut rng(6), 8);
    assert_pass(&rep);
}

#[test]
fn composition_instances() {
    let f = Field::default();
    for n in 2..=3 {
        let a = gamma(f, n);
        let td1 = TwistData::spherical(&a, 0).unwrap();
        let td2 = TwistData::spherical(&a, 1).unwrap();
        assert_pass(&verify_composition(&td1, &td2, &mut rng(n as u64), 8).unwrap());
    }
    let a = gamma(f, 3);
    let c = corner_algebra(&a, &[0, 1]);
    let p = detect_periodicity(&c.alg, 4, &mut rng(5), 8).unwrap().unwrap();
    let td1 = TwistData::from_periodicity(c, &p).unwrap();
    let td2 = TwistData::spherical(&a, 2).unwrap();
    assert_pass(&verify_composition(&td1, &td2, &mut rng(9), 8).unwrap());
}

#[test]
fn pdnp_instances() {
    let f = Field::default();
    let a = gamma(f, 2);
    let pc = corner_algebra(&a, &[0, 1]);
    assert_pass(&verify_pdnp(&pc, &TwistData::spherical(&a, 0).unwrap(), &mut rng(1), 8).unwrap());
    let a = gamma(f, 3);
    let pc = corner_algebra(&a, &[0]);
    assert_pass(&verify_pdnp(&pc, &TwistData::spherical(&a, 0).unwrap(), &mut rng(2), 8).unwrap());
}

#[test]
fn h_complexes_match_words() {
    for n in 2..=4 {
        let a = gamma(Field::default(), n);
        for m in 1..=n {
            assert_pass(&verify_h_complex(&a, m, &mut rng(m as u64), 8).unwrap());
        }
    }
    let a = gamma(Field::default(), 4);
    assert!(verify_h_complex(&a, 5, &mut rng(0), 8).is_err());
}

#[test]
fn tilting_comparison_degrees() {
    let a = gamma(Field::default(), 2);
    let mut r = rng(2);
    let w = apply_word(&a, &BraidWord::parse(2, "1,2,1").unwrap()).unwrap();
    let v = apply_word(&a, &BraidWord::parse(2, "2,1,2").unwrap()).unwrap();
    let same = twistlab::complex::compare_tilting(&w, &v, &mut r, 8).unwrap();
    assert_eq!(same.degree, 0);
    assert!(twistlab::bimodule::conjugating_unit(&same.invertible.automorphism, &twistlab::AlgebraMap::identity(&a), &mut r, 8).is_some());
    let unit = twistlab::complex::Complex::stalk(&a, &a, 0, vec![twistlab::bimodule::Atom::regular(&a)]);
    // Homological degree: the longest word is A_tau placed in degree +2.
    let c = twistlab::complex::compare_tilting(&w, &unit, &mut r, 8).unwrap();
    assert_eq!(c.degree, 2);
    let t = twistlab::named::tau(&a);
    assert!(twistlab::bimodule::conjugating_unit(&c.invertible.automorphism, &t, &mut r, 8).is_some());
    assert_eq!(twistlab::complex::compare_tilting(&w, &w, &mut r, 8).unwrap().degree, 0);
}
