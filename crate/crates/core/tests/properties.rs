use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistlab::algebra::{corner_algebra, quotient_by_vertices};
use twistlab::bimodule::Atom;
use twistlab::complex::{cone, dualize, find_chain_iso, tensor, Complex};
use twistlab::koszul::{q_functor, ZigzagPair};
use twistlab::named::{gamma, gamma_presentation, linear_orientation, preprojective, quadratic_dual, realize};
use twistlab::triangles::{random_map, random_small_complex};
use twistlab::twist::{apply_word, g_complex, h_complex, BraidWord};
use twistlab::{Alg, Field, Matrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn field(second: bool) -> Field {
    if second {
        Field::new(31013).unwrap()
    } else {
        Field::default()
    }
}

fn homology(c: &Complex) -> Vec<(i32, usize)> {
    c.homology_dims().into_iter().filter(|&(_, h)| h > 0).collect()
}

fn associative(a: &Alg, r: &mut ChaCha8Rng) -> bool {
    (0..4).all(|_| {
        let (x, y, z) = (a.random_element(r), a.random_element(r), a.random_element(r));
        a.mul(&a.mul(&x, &y), &z) == a.mul(&x, &a.mul(&y, &z))
    }) && a.mul(&a.unit(), &a.random_element(r)).len() == a.dim()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn constructors_give_complexes(seed in any::<u64>(), n in 2usize..=3, second in any::<bool>()) {
        let a = gamma(field(second), n);
        let mut r = rng(seed);
        let f = random_map(&a, &mut r);
        let x = random_small_complex(&a, &mut r);
        for c in [
            f.src.clone(),
            cone(&f),
            tensor(&f.src, &x),
            f.tgt.shift(1),
            f.src.direct_sum(&x),
            dualize(&x),
            cone(&f).minimize(),
        ] {
            prop_assert!(c.check().is_ok(), "{:?}", c);
        }
    }

    #[test]
    fn minimize_keeps_homology(seed in any::<u64>(), n in 2usize..=3) {
        let a = gamma(Field::default(), n);
        let mut r = rng(seed);
        let c = cone(&random_map(&a, &mut r));
        let m = c.minimize();
        prop_assert_eq!(homology(&c), homology(&m));
        prop_assert!(m.total_dim() <= c.total_dim());
    }

    #[test]
    fn tensor_units(seed in any::<u64>(), n in 2usize..=3) {
        let a = gamma(Field::default(), n);
        let mut r = rng(seed);
        let x = random_small_complex(&a, &mut r);
        let unit = Complex::stalk(&a, &a, 0, vec![Atom::regular(&a)]);
        prop_assert!(find_chain_iso(&tensor(&unit, &x), &x, &mut r, 8).is_some());
        prop_assert!(find_chain_iso(&tensor(&x, &unit), &x, &mut r, 8).is_some());
    }

    #[test]
    fn rank_nullity(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12, rank_cap in 0usize..12) {
        let f = Field::default();
        let mut r = rng(seed);
        // A product through a thin middle bounds the rank.
        let k = rank_cap.min(rows).min(cols);
        let m = Matrix::random(f, rows, k, &mut r).mul(&Matrix::random(f, k, cols, &mut r));
        let ns = m.nullspace();
        prop_assert_eq!(m.rank() + ns.cols(), cols);
        prop_assert!(m.mul(&ns).is_zero());
        prop_assert!(m.rank() <= k);
    }

    #[test]
    fn word_complexes(seed in any::<u64>(), len in 0usize..5) {
        let a = gamma(Field::default(), 3);
        let mut r = rng(seed);
        use rand::Rng;
        let letters: Vec<usize> = (0..len).map(|_| r.gen_range(1..=3)).collect();
        let c = apply_word(&a, &BraidWord::new(3, letters).unwrap()).unwrap();
        prop_assert!(c.check().is_ok());
        // Tilting complexes of words are invertible: homology is never all zero.
        prop_assert!(!homology(&c).is_empty());
    }
}

#[test]
fn closed_forms_are_complexes() {
    let f = Field::default();
    for n in 1..=4 {
        let a = gamma(f, n);
        for m in 1..=n {
            assert!(g_complex(&a, m).unwrap().check().is_ok());
            assert!(h_complex(&a, m).unwrap().check().is_ok());
        }
    }
    for n in 3..=4 {
        let z = ZigzagPair::new(f, n).unwrap();
        let reg = twistlab::bimodule::Bimodule::regular(&z.kp.dual);
        assert!(q_functor(&z.kp, &reg).unwrap().complex.check().is_ok());
    }
}

#[test]
fn constructed_algebras_are_associative() {
    let mut r = rng(3);
    for second in [false, true] {
        let f = field(second);
        let mut algs: Vec<Alg> = Vec::new();
        for n in 1..=5 {
            algs.push(gamma(f, n));
            algs.push(preprojective(f, n));
            algs.push(linear_orientation(f, n));
        }
        for n in 3..=5 {
            algs.push(realize(f, "dual", quadratic_dual(f, &gamma_presentation(n)).unwrap()).unwrap());
        }
        let g4 = gamma(f, 4);
        algs.push(corner_algebra(&g4, &[0, 2]).alg.clone());
        algs.push(corner_algebra(&g4, &[1, 2, 3]).alg.clone());
        algs.push(quotient_by_vertices(&preprojective(f, 4), &[0, 1, 2]).tgt);
        for a in &algs {
            assert!(associative(a, &mut r), "{}", a.name());
            // Basis triples for the small ones.
            if a.dim() <= 12 {
                for i in 0..a.dim() {
                    for j in 0..a.dim() {
                        for k in 0..a.dim() {
                            let (x, y, z) = (a.basis_vector(i), a.basis_vector(j), a.basis_vector(k));
                            assert_eq!(a.mul(&a.mul(&x, &y), &z), a.mul(&x, &a.mul(&y, &z)), "{}", a.name());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn gamma3_has_ten_paths() {
    let a = gamma(Field::default(), 3);
    assert_eq!(a.dim(), 10);
    assert_eq!(a.basis().iter().filter(|b| b.deg == 1).count(), 4);
    assert_eq!(a.basis().iter().filter(|b| b.deg == 2).count(), 3);
}
