use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistlab::bimodule::Atom;
use twistlab::complex::{ChainMap, Complex};
use twistlab::named::gamma;
use twistlab::report::TriangleReport;
use twistlab::triangles::*;
use twistlab::twist::spherical_twist_complex;
use twistlab::Field;

fn assert_pass(rep: &TriangleReport) {
    assert!(rep.passed(), "{}", serde_json::to_string_pretty(&rep.to_json()).unwrap());
}

#[test]
fn evaluation_maps_over_gamma3() {
    let a = gamma(Field::default(), 3);
    let ev = |v| {
        let x = spherical_twist_complex(&a, v).unwrap();
        let stalk = Complex::stalk(&a, &a, 0, vec![Atom::regular(&a)]);
        let mut m = ChainMap::zero(&stalk, &x);
        m.set(0, twistlab::Matrix::identity(a.field(), a.dim()));
        m
    };
    let (fx, fy) = (ev(0), ev(1));
    let (_, rep) = kappa(&fx, &fy);
    assert_pass(&rep);
    assert_pass(&braid_grid_check(&fx, &fy));
}

#[test]
fn identity_maps() {
    let a = gamma(Field::default(), 2);
    let x = spherical_twist_complex(&a, 0).unwrap();
    let id = x.identity_map();
    assert_pass(&kappa(&id, &id).1);
    assert_pass(&braid_grid_check(&id, &id));
}

#[test]
fn zero_maps_and_negative_control() {
    let a = gamma(Field::default(), 2);
    let x = spherical_twist_complex(&a, 0).unwrap();
    let y = spherical_twist_complex(&a, 1).unwrap();
    let fx = ChainMap::zero(&x, &y);
    let fy = ChainMap::zero(&y, &x);
    let (k, rep) = kappa(&fx, &fy);
    assert_pass(&rep);
    assert_eq!(k.total_dim(), 2 * twistlab::complex::tensor(&x, &x).total_dim() + twistlab::complex::tensor(&y, &x).total_dim());
    assert_pass(&braid_grid_check(&fx, &fy));
    assert!(!braid_grid_check_unsigned(&fx, &fy).passed());
}

#[test]
fn random_corpus() {
    let t = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let a = gamma(Field::default(), 2 + k % 2);
        let fx = random_map(&a, &mut rng);
        let fy = random_map(&a, &mut rng);
        assert_pass(&kappa(&fx, &fy).1);
        assert_pass(&braid_grid_check(&fx, &fy));
    }
    eprintln!("20 pairs: {:?}", t.elapsed());
}
