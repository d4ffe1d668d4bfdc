//! Spherical twists, braid words, the periodic twist of a corner with a
//! periodic resolution, and periodicity detection for symmetric algebras.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::algebra::{corner_algebra, Alg, AlgebraMap, Corner};
use crate::bimodule::{
    conjugating_unit, identify_invertible, proj_map, subquotient_of, top_lifts, Atom, AtomKind, Bimodule,
};
use crate::complex::{
    act_on_sum, compare_tilting, cone, find_chain_iso, homotopic, tensor, tensor_map_between, tensor_with_layout, ChainMap,
    Complex, ComplexError,
};
use crate::field::Matrix;
use crate::named::{gamma_beta, sign_flip, tau};
use crate::report::TriangleReport;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwistError {
    #[error("vertex {0} does not carry a spherical projective")]
    NotSpherical(usize),
    #[error("not an A_n configuration: {0}")]
    NotAnConfiguration(String),
    #[error("braid letter {letter} outside 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },
    #[error("m = {m} outside 1..={n}")]
    MOutOfRange { m: usize, n: usize },
    #[error("algebra is not symmetric")]
    NotSymmetric,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A positive braid word in the generators `sigma_1 .. sigma_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BraidWord {
    pub n: usize,
    pub letters: Vec<usize>,
}

impl BraidWord {
    pub fn new(n: usize, letters: Vec<usize>) -> Result<Self, TwistError> {
        if let Some(&letter) = letters.iter().find(|&&l| l == 0 || l > n) {
            return Err(TwistError::LetterOutOfRange { letter, n });
        }
        Ok(BraidWord { n, letters })
    }

    /// Parses `"1,2,1"`; the empty string is the empty word.
    pub fn parse(n: usize, s: &str) -> Result<Self, TwistError> {
        let s = s.trim();
        if s.is_empty() {
            return Self::new(n, vec![]);
        }
        let letters = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| TwistError::Malformed(format!("bad braid letter {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &BraidWord) -> BraidWord {
        assert_eq!(self.n, other.n);
        BraidWord { n: self.n, letters: [self.letters.clone(), other.letters.clone()].concat() }
    }

    /// Image in the symmetric group on `1..=n+1`, as the list of images.
    pub fn permutation(&self) -> Vec<usize> {
        let mut p: Vec<usize> = (1..=self.n + 1).collect();
        for &l in self.letters.iter().rev() {
            for x in p.iter_mut() {
                if *x == l {
                    *x = l + 1;
                } else if *x == l + 1 {
                    *x = l;
                }
            }
        }
        p
    }
}

impl std::fmt::Display for BraidWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

/// The reduced word `(1)(2,1)(3,2,1)...(n,...,1)` for the half twist.
pub fn longest_word(n: usize) -> BraidWord {
    let mut letters = Vec::new();
    for k in 1..=n {
        letters.extend((1..=k).rev());
    }
    BraidWord { n, letters }
}

fn square_zero_local(a: &Alg, v: usize) -> bool {
    let c = corner_algebra(a, &[v]);
    let e = &c.alg;
    if e.dim() != 2 {
        return false;
    }
    let x = if e.idempotent(0) == 0 { 1 } else { 0 };
    let xv = e.basis_vector(x);
    e.mul(&xv, &xv).iter().all(|&c| c == 0)
}

/// `End(P_v)` is two dimensional with square zero radical. Vertices are 0-based.
pub fn check_spherical(a: &Alg, v: usize) -> Result<(), TwistError> {
    if v >= a.nvert() || !square_zero_local(a, v) {
        return Err(TwistError::NotSpherical(v));
    }
    Ok(())
}

/// Vertices `0..n` are spherical with one dimensional homs between neighbours
/// and none between the rest.
pub fn check_an_configuration(a: &Alg, n: usize) -> Result<(), TwistError> {
    if n > a.nvert() {
        return Err(TwistError::NotAnConfiguration(format!("{} vertices, {} needed", a.nvert(), n)));
    }
    for v in 0..n {
        check_spherical(a, v)?;
    }
    for i in 0..n {
        for j in 0..n {
            let want = match i.abs_diff(j) {
                0 => continue,
                1 => 1,
                _ => 0,
            };
            let got = a.corner_indices(i, j).len();
            if got != want {
                return Err(TwistError::NotAnConfiguration(format!(
                    "dim Hom(P{}, P{}) = {got}, expected {want}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// `P_v (x) P_v^* -> A` with `A` in degree 0.
pub fn spherical_twist_complex(a: &Alg, v: usize) -> Result<Complex, TwistError> {
    check_spherical(a, v)?;
    let p = Atom::proj(a, a, v, v);
    let reg = Atom::regular(a);
    let ev = proj_map(&p, &reg.module, &a.basis_vector(a.idempotent(v)));
    let mut c = Complex::zero(a, a);
    c.set_term(1, vec![p]);
    c.set_term(0, vec![reg]);
    c.set_diff(1, ev);
    Ok(c)
}

/// The tilting complex of a braid word, tensoring left to right and
/// minimizing after each letter.
pub fn apply_word(a: &Alg, w: &BraidWord) -> Result<Complex, TwistError> {
    check_an_configuration(a, w.n)?;
    let twists: Vec<Complex> = (0..w.n).map(|v| spherical_twist_complex(a, v)).collect::<Result<_, _>>()?;
    let mut t = Complex::stalk(a, a, 0, vec![Atom::regular(a)]);
    for &l in &w.letters {
        t = tensor(&t, &twists[l - 1]).minimize();
    }
    Ok(t)
}

/// Coordinates of `x (x) y` in the projective `L e_i (x) e_j R`.
pub fn proj_element(l: &Alg, r: &Alg, i: usize, j: usize, x: usize, y: usize) -> Vec<u32> {
    let xs = l.left_projective_indices(i);
    let ys = r.right_projective_indices(j);
    let xi = xs.iter().position(|&b| b == x).expect("x lies in L e_i");
    let yi = ys.iter().position(|&b| b == y).expect("y lies in e_j R");
    let mut v = vec![0; xs.len() * ys.len()];
    v[xi * ys.len() + yi] = 1;
    v
}

fn zigzag_check(a: &Alg, m: usize) -> Result<(), TwistError> {
    let n = a.nvert();
    if m == 0 || m > n {
        return Err(TwistError::MOutOfRange { m, n });
    }
    check_an_configuration(a, n)?;
    if n >= 2 && a.presentation().map_or(true, |p| p.arrows.len() != 2 * (n - 1)) {
        return Err(TwistError::Malformed("expected a zigzag algebra with its arrows".into()));
    }
    Ok(())
}

/// The complex with `P_{i+j} (x) P_j^*` for `1 <= j <= m - i` in degree `i`.
/// Differentials are right multiplication by `b_{i+j}` and, with sign
/// `(-1)^i`, left multiplication by `b_{j+1}` on the second factor.
pub fn g_complex(a: &Alg, m: usize) -> Result<Complex, TwistError> {
    zigzag_check(a, m)?;
    let n = a.nvert();
    let f = a.field();
    let mut c = Complex::zero(a, a);
    for i in 0..m {
        c.set_term(i as i32, (1..=m - i).map(|j| Atom::proj(a, a, i + j - 1, j - 1)).collect());
    }
    for i in 1..m {
        let (src, tgt) = (c.term(i as i32).to_vec(), c.term(i as i32 - 1).to_vec());
        let (so, to) = (c.offsets(i as i32), c.offsets(i as i32 - 1));
        let mut d = Matrix::zeros(f, c.dim(i as i32 - 1), c.dim(i as i32));
        for j in 1..=m - i {
            let s = &src[j - 1];
            let (p, q) = (i + j, j);
            let b_p = a.generators()[gamma_beta(n, p)];
            let down = proj_element(a, a, p - 2, q - 1, b_p, a.idempotent(q - 1));
            d.set_block(to[j - 1], so[j - 1], &proj_map(s, &tgt[j - 1].module, &down));
            let b_q = a.generators()[gamma_beta(n, q + 1)];
            let right = proj_element(a, a, p - 1, q, a.idempotent(p - 1), b_q);
            d.set_block(to[j], so[j - 1], &proj_map(s, &tgt[j].module, &right).scale(f.sign(i % 2 == 1)));
        }
        c.set_diff(i as i32, d);
    }
    Ok(c)
}

/// Multiplication `G_m -> A` on the degree zero summands `P_j (x) P_j^*`.
pub fn g_evaluation(a: &Alg, g: &Complex) -> ChainMap {
    let stalk = Complex::stalk(a, a, 0, vec![Atom::regular(a)]);
    let reg = Bimodule::regular(a);
    let cols: Vec<Matrix> = g
        .term(0)
        .iter()
        .map(|atom| match atom.kind {
            AtomKind::Proj(v, _) => proj_map(atom, &reg, &a.basis_vector(a.idempotent(v))),
            _ => panic!("degree zero of G is projective"),
        })
        .collect();
    let mut ev = ChainMap::zero(g, &stalk);
    ev.set(0, hstack_all(a.field(), a.dim(), &cols));
    ev
}

/// `cone(G_m -> A)`, a closed form for the word `(m, m-1, ..., 1)`.
pub fn h_complex(a: &Alg, m: usize) -> Result<Complex, TwistError> {
    let g = g_complex(a, m)?;
    Ok(cone(&g_evaluation(a, &g)))
}

fn hstack_all(f: crate::Field, rows: usize, cols: &[Matrix]) -> Matrix {
    cols.iter().fold(Matrix::zeros(f, rows, 0), |acc, m| acc.hstack(m))
}

/// A corner `E = eAe` of `A` with a complex `Y` of `E`-bimodules and an
/// augmentation `f: Y -> E` (the target a stalk of the regular bimodule).
#[derive(Clone, Debug)]
pub struct TwistData {
    pub corner: Arc<Corner>,
    pub resolution: Complex,
    pub augmentation: ChainMap,
}

impl TwistData {
    pub fn ambient(&self) -> &Alg {
        &self.corner.ambient
    }

    pub fn local(&self) -> &Alg {
        &self.corner.alg
    }

    /// The one-term resolution `E (x) E -> E` of `End(P_v)`; its periodic twist
    /// is the spherical twist at `v`.
    pub fn spherical(a: &Alg, v: usize) -> Result<Self, TwistError> {
        check_spherical(a, v)?;
        let corner = corner_algebra(a, &[v]);
        let e = corner.alg.clone();
        let y = Complex::stalk(&e, &e, 0, vec![Atom::proj(&e, &e, 0, 0)]);
        let stalk = Complex::stalk(&e, &e, 0, vec![Atom::regular(&e)]);
        let mut f = ChainMap::zero(&y, &stalk);
        f.set(0, proj_map(&y.term(0)[0], &stalk.term(0)[0].module, &e.unit()));
        Ok(TwistData { corner, resolution: y, augmentation: f })
    }

    /// Twist data from a periodicity certificate computed on the corner algebra.
    pub fn from_periodicity(corner: Arc<Corner>, p: &Periodicity) -> Result<Self, TwistError> {
        let e = corner.alg.clone();
        if !p.resolution.left().same_structure(&e) {
            return Err(TwistError::Malformed("resolution lives over a different algebra".into()));
        }
        let y = p.resolution.rebase(&e, &e);
        let stalk = Complex::stalk(&e, &e, 0, vec![Atom::regular(&e)]);
        let f = p.augmentation.retarget(&y, &stalk);
        Ok(TwistData { corner, resolution: y, augmentation: f })
    }

    /// The same data over another corner with identical structure.
    pub fn rebase(&self, corner: Arc<Corner>) -> Result<Self, TwistError> {
        let e = corner.alg.clone();
        if !self.local().same_structure(&e) {
            return Err(TwistError::Malformed("corner algebras differ".into()));
        }
        let y = self.resolution.rebase(&e, &e);
        let stalk = self.augmentation.tgt.rebase(&e, &e);
        Ok(TwistData { corner, augmentation: self.augmentation.retarget(&y, &stalk), resolution: y })
    }

    pub fn check(&self) -> Result<(), TwistError> {
        let e = self.local();
        let (y, t) = (&self.resolution, &self.augmentation.tgt);
        if !y.left().is_same(e) || !y.right().is_same(e) || !self.augmentation.src.left().is_same(e) {
            return Err(TwistError::Malformed("resolution is not over the corner algebra".into()));
        }
        if t.degrees() != vec![0] || t.term(0).len() != 1 || !matches!(t.term(0)[0].kind, AtomKind::Regular) {
            return Err(TwistError::Malformed("augmentation target must be the regular bimodule in degree 0".into()));
        }
        y.check()?;
        self.augmentation.check()?;
        Ok(())
    }
}

/// `g: P (x)_E Y (x)_E P^* -> A` and its cone, the periodic twist.
#[derive(Clone, Debug)]
pub struct TwistEvaluation {
    pub source: Complex,
    pub map: ChainMap,
    pub twist: Complex,
}

/// Multiplication `Ae (x)_E eA -> A` on the tensor of the two corner atoms.
fn corner_multiplication(c: &Corner, t: &crate::bimodule::AtomTensor) -> Matrix {
    let a = &c.ambient;
    let f = a.field();
    let (li, ri) = (c.left_indices(), c.right_indices());
    let mut m = Matrix::zeros(f, a.dim(), li.len() * ri.len());
    for (x, &u) in li.iter().enumerate() {
        for (y, &v) in ri.iter().enumerate() {
            for &(k, coef) in a.product(u, v) {
                m.set(k, x * ri.len() + y, coef);
            }
        }
    }
    m.mul(&t.sigma)
}

pub fn twist_evaluation(td: &TwistData) -> Result<TwistEvaluation, TwistError> {
    td.check()?;
    let c = &td.corner;
    let a = c.ambient.clone();
    let e = c.alg.clone();
    let p = Complex::stalk(&a, &e, 0, vec![Atom::left_corner(c)]);
    let pv = Complex::stalk(&e, &a, 0, vec![Atom::right_corner(c)]);
    let py = tensor_with_layout(&p, &td.resolution);
    let pe = tensor_with_layout(&p, &td.augmentation.tgt);
    let m1 = tensor_map_between(&py, &pe, &p.identity_map(), &td.augmentation);
    let v = tensor_with_layout(&py.complex, &pv);
    let w = tensor_with_layout(&pe.complex, &pv);
    let m2 = tensor_map_between(&v, &w, &m1, &pv.identity_map());
    let stalk = Complex::stalk(&a, &a, 0, vec![Atom::regular(&a)]);
    let mut map = ChainMap::zero(&v.complex, &stalk);
    if v.complex.dim(0) > 0 {
        let mut ev = Matrix::zeros(a.field(), a.dim(), w.complex.dim(0));
        for (k, blk) in w.blocks[&0].iter().enumerate() {
            let piece = corner_multiplication(c, &blk.t);
            ev.set_block(0, w.block_offset(0, k), &piece);
        }
        map.set(0, ev.mul(&m2.at(0)));
    }
    let twist = cone(&map);
    Ok(TwistEvaluation { source: v.complex, map, twist })
}

pub fn periodic_twist(td: &TwistData) -> Result<Complex, TwistError> {
    Ok(twist_evaluation(td)?.twist)
}

/// A truncated bimodule resolution of a symmetric algebra whose next syzygy
/// is invertible.
#[derive(Clone, Debug)]
pub struct Periodicity {
    /// Number of terms of the truncated resolution.
    pub period: usize,
    /// `s` with the syzygy isomorphic to `E_s`.
    pub automorphism: AlgebraMap,
    /// Generator `h` of the syzygy (`h b = s(b) h`), in the coordinates of
    /// the top term of the resolution.
    pub generator: Vec<u32>,
    pub resolution: Complex,
    pub augmentation: ChainMap,
}

fn vertex_pair(m: &Bimodule, v: &[u32]) -> (usize, usize) {
    let (l, r) = (m.left(), m.right());
    let vm = Matrix::column_vector(m.field(), v);
    for a in 0..l.nvert() {
        if m.lact(l.idempotent(a)).mul(&vm) != vm {
            continue;
        }
        for b in 0..r.nvert() {
            if m.ract(r.idempotent(b)).mul(&vm) == vm {
                return (a, b);
            }
        }
    }
    panic!("element is not vertex homogeneous")
}

/// Builds the minimal projective bimodule resolution of `E` term by term and
/// stops at the first syzygy isomorphic to a twisted regular bimodule.
pub fn detect_periodicity<R: Rng>(
    e: &Alg,
    max_period: usize,
    rng: &mut R,
    trials: usize,
) -> Result<Option<Periodicity>, TwistError> {
    if e.symmetric_form().is_none() {
        return Err(TwistError::NotSymmetric);
    }
    let f = e.field();
    let reg = Bimodule::regular(e);
    let stalk = Complex::stalk(e, e, 0, vec![Atom::regular(e)]);
    let atoms0: Vec<Atom> = (0..e.nvert()).map(|v| Atom::proj(e, e, v, v)).collect();
    let cols: Vec<Matrix> =
        atoms0.iter().enumerate().map(|(v, p)| proj_map(p, &reg, &e.basis_vector(e.idempotent(v)))).collect();
    let aug = hstack_all(f, e.dim(), &cols);
    let mut d_prev = aug.clone();
    let mut y = Complex::stalk(e, e, 0, atoms0);
    for k in 0..max_period {
        let term = y.term(k as i32).to_vec();
        let ker = d_prev.nullspace();
        let none = Matrix::zeros(f, ker.rows(), 0);
        let km = subquotient_of(e, e, &ker, &none, |side, g, x| act_on_sum(&term, side, g, x));
        if km.dim() == e.dim() {
            if let Ok(inv) = identify_invertible(&km, rng, trials) {
                let mut augmentation = ChainMap::zero(&y, &stalk);
                augmentation.set(0, aug);
                return Ok(Some(Periodicity {
                    period: k + 1,
                    automorphism: inv.automorphism,
                    generator: ker.mul_vec(&inv.generator),
                    resolution: y,
                    augmentation,
                }));
            }
        }
        let sum = Bimodule::direct_sum(&term.iter().map(|a| a.module.as_ref()).collect::<Vec<_>>());
        let mut atoms = Vec::new();
        let mut cols = Vec::new();
        for g in top_lifts(&km) {
            let (a, b) = vertex_pair(&km, &g);
            let atom = Atom::proj(e, e, a, b);
            cols.push(proj_map(&atom, &sum, &ker.mul_vec(&g)));
            atoms.push(atom);
        }
        let d = hstack_all(f, sum.dim(), &cols);
        y.set_term(k as i32 + 1, atoms);
        y.set_diff(k as i32 + 1, d.clone());
        d_prev = d;
    }
    Ok(None)
}

fn describe(s: &AlgebraMap) -> serde_json::Value {
    json!({
        "vertex_permutation": s.vertex_permutation(),
        "generators": s.describe(),
    })
}

/// Which of `tau` and `tau` followed by [`sign_flip`] the automorphism `s`
/// agrees with up to an inner automorphism.
pub fn tau_class<R: Rng>(a: &Alg, s: &AlgebraMap, rng: &mut R, trials: usize) -> &'static str {
    let t = tau(a);
    if conjugating_unit(s, &t, rng, trials).is_some() {
        "tau"
    } else if conjugating_unit(s, &sign_flip(a).compose(&t), rng, trials).is_some() {
        "tau*sign_flip"
    } else {
        "other"
    }
}

fn check_tau<R: Rng>(rep: &mut TriangleReport, a: &Alg, h: &Bimodule, rng: &mut R, trials: usize) {
    match identify_invertible(h, rng, trials) {
        Ok(inv) => {
            let class = tau_class(a, &inv.automorphism, rng, trials);
            rep.check(
                "automorphism is tau up to inner automorphism",
                class == "tau",
                json!({ "class": class, "automorphism": describe(&inv.automorphism) }),
            );
        }
        Err(err) => {
            rep.check("bimodule is invertible", false, json!({ "error": err.to_string() }));
        }
    }
}

/// The longest word on `Gamma_n` should be a shifted twist by `tau`: its
/// tilting complex has homology in degree `n` only, isomorphic to `A_tau`.
pub fn verify_longest<R: Rng>(a: &Alg, rng: &mut R, trials: usize) -> Result<TriangleReport, TwistError> {
    let n = a.nvert();
    let w = longest_word(n);
    let mut rep = TriangleReport::new(format!("longest/n={n}"));
    let t = apply_word(a, &w)?;
    let conc = t.concentrated();
    rep.check(
        "homology concentrated in degree n",
        matches!(conc, Ok((k, _)) if k == n as i32),
        json!({ "word": w.to_string(), "homology": t.homology_dims(), "atoms": t.atom_count() }),
    );
    if let Ok((k, _)) = conc {
        check_tau(&mut rep, a, &t.homology(k), rng, trials);
    }
    Ok(rep)
}

/// `Gamma_n` should be twisted periodic of period `n` with automorphism `tau`.
pub fn verify_periodicity<R: Rng>(a: &Alg, rng: &mut R, trials: usize) -> Result<TriangleReport, TwistError> {
    let n = a.nvert();
    let mut rep = TriangleReport::new(format!("periodicity/n={n}"));
    let Some(p) = detect_periodicity(a, 2 * n + 2, rng, trials)? else {
        rep.check("periodic", false, json!({ "searched": 2 * n + 2 }));
        return Ok(rep);
    };
    rep.check("period is n", p.period == n, json!({ "period": p.period, "resolution": p.resolution.summary() }));
    let class = tau_class(a, &p.automorphism, rng, trials);
    rep.check(
        "automorphism is tau up to inner automorphism",
        class == "tau",
        json!({ "class": class, "automorphism": describe(&p.automorphism) }),
    );
    Ok(rep)
}

/// `w1` and `w2` give isomorphic tilting complexes.
pub fn verify_words_agree<R: Rng>(
    a: &Alg,
    w1: &BraidWord,
    w2: &BraidWord,
    rng: &mut R,
    trials: usize,
) -> Result<TriangleReport, TwistError> {
    let mut rep = TriangleReport::new(format!("words/{w1}~{w2}"));
    let (x, y) = (apply_word(a, w1)?, apply_word(a, w2)?);
    compare_to_identity(&mut rep, "tilting complexes agree", &x, &y, rng, trials);
    Ok(rep)
}

/// Records whether `c (x) d^*` is `A` in degree 0 up to inner automorphism.
pub fn compare_to_identity<R: Rng>(
    rep: &mut TriangleReport,
    name: &str,
    c: &Complex,
    d: &Complex,
    rng: &mut R,
    trials: usize,
) -> bool {
    match compare_tilting(c, d, rng, trials) {
        Ok(cmp) => {
            let id = AlgebraMap::identity(c.left());
            let unit = conjugating_unit(&cmp.invertible.automorphism, &id, rng, trials);
            rep.check(
                name,
                cmp.degree == 0 && unit.is_some(),
                json!({
                    "degree": cmp.degree,
                    "homology": cmp.homology,
                    "automorphism": describe(&cmp.invertible.automorphism),
                    "inner": unit.is_some(),
                }),
            )
        }
        Err(err) => rep.check(name, false, json!({ "error": err.to_string() })),
    }
}

/// Braid relations among the spherical twists of `Gamma_n`: far commutation
/// and the three-term relation for neighbours.
pub fn verify_braid_relations<R: Rng>(a: &Alg, rng: &mut R, trials: usize) -> Result<TriangleReport, TwistError> {
    let n = a.nvert();
    check_an_configuration(a, n)?;
    let mut rep = TriangleReport::new(format!("braid/n={n}"));
    for i in 1..=n {
        for j in i + 1..=n {
            let (w1, w2) = if j == i + 1 {
                (BraidWord::new(n, vec![i, j, i])?, BraidWord::new(n, vec![j, i, j])?)
            } else {
                (BraidWord::new(n, vec![i, j])?, BraidWord::new(n, vec![j, i])?)
            };
            rep.absorb(&format!("{w1}~{w2}"), verify_words_agree(a, &w1, &w2, rng, trials)?);
        }
    }
    Ok(rep)
}

/// `H_m` agrees with the word `(m, ..., 1)` and has the expected summands.
pub fn verify_h_complex<R: Rng>(a: &Alg, m: usize, rng: &mut R, trials: usize) -> Result<TriangleReport, TwistError> {
    let mut rep = TriangleReport::new(format!("h/m={m}"));
    let h = h_complex(a, m)?;
    rep.check("H is a complex", h.check().is_ok(), json!(null));
    let counts: Vec<(i32, usize)> = h.degrees().iter().map(|&i| (i, h.term(i).len())).collect();
    let want: Vec<(i32, usize)> = (0..=m as i32).map(|i| (i, if i == 0 { 1 } else { m + 1 - i as usize })).collect();
    rep.check("summand counts", counts == want, json!({ "counts": counts }));
    // P_{i+j} (x) P_j^* in degree i + 1 and A in degree 0, 1-based labels.
    let mut got: Vec<(i32, String)> = Vec::new();
    for i in h.degrees() {
        for atom in h.term(i) {
            got.push((
                i,
                match atom.kind {
                    AtomKind::Proj(x, y) => format!("P{},{}", x + 1, y + 1),
                    AtomKind::Regular => "A".into(),
                    _ => "other".into(),
                },
            ));
        }
    }
    let mut expect = vec![(0, "A".to_string())];
    for i in 0..m {
        for j in 1..=m - i {
            expect.push((i as i32 + 1, format!("P{},{}", i + j, j)));
        }
    }
    got.sort();
    expect.sort();
    rep.check("atom multiset", got == expect, json!({ "atoms": got }));
    let w = BraidWord::new(a.nvert(), (1..=m).rev().collect())?;
    let x = apply_word(a, &w)?;
    compare_to_identity(&mut rep, "H agrees with the word", &h, &x, rng, trials);
    Ok(rep)
}

/// `(Y, f)` is a resolution truncation: `f` is onto in degree 0 and the
/// augmented complex is exact below the top degree.
pub fn check_truncated_resolution(td: &TwistData) -> Result<serde_json::Value, TwistError> {
    td.check()?;
    let cone_f = cone(&td.augmentation);
    let dims = cone_f.homology_dims();
    Ok(json!({ "cone_homology": dims }))
}

/// Building blocks of the composition check, exposed for tests.
#[derive(Clone, Debug)]
pub struct Composite {
    pub data: TwistData,
    pub parts: [TwistEvaluation; 2],
    pub lifts: [ChainMap; 2],
}

/// Combines two twist data on disjoint vertex sets into twist data on the
/// union: `Y = cone(E -> W_1 (x) W_2)[-1]` where `W_i` is the twist of `E`
/// by the `i`-th data, with `f` the projection onto `E`.
pub fn compose_twist_data(td1: &TwistData, td2: &TwistData) -> Result<Composite, TwistError> {
    let a = td1.ambient().clone();
    if !td2.ambient().is_same(&a) {
        return Err(TwistError::Malformed("twist data over different algebras".into()));
    }
    let (s1, s2) = (&td1.corner.verts, &td2.corner.verts);
    if s1.iter().any(|v| s2.contains(v)) {
        return Err(TwistError::Malformed("vertex sets overlap".into()));
    }
    let verts = [s1.clone(), s2.clone()].concat();
    let c = corner_algebra(&a, &verts);
    let e = c.alg.clone();
    let f = e.field();
    let mut parts = Vec::new();
    for td in [td1, td2] {
        let local: Vec<usize> = td.corner.verts.iter().map(|&v| c.local_vertex(v).unwrap()).collect();
        let q = corner_algebra(&e, &local);
        parts.push(twist_evaluation(&td.rebase(q)?)?);
    }
    let (w1, w2) = (&parts[0].twist, &parts[1].twist);
    let ww = tensor_with_layout(w1, w2);
    let eidx = |w: &Complex| -> Result<usize, TwistError> {
        let t = w.term(0);
        match t.last() {
            Some(atom) if matches!(atom.kind, AtomKind::Regular) => Ok(t.len() - 1),
            _ => Err(TwistError::Malformed("twist has no regular summand in degree 0".into())),
        }
    };
    let (e1, e2) = (eidx(w1)?, eidx(w2)?);
    let unit = e.unit();
    let kron = |x: &[u32], y: &[u32]| -> Vec<u32> {
        let mut v = Vec::with_capacity(x.len() * y.len());
        for &a in x {
            for &b in y {
                v.push(f.mul(a, b));
            }
        }
        v
    };
    // h(x) = x (x) 1 lands in the product of the two regular summands.
    let stalk = Complex::stalk(&e, &e, 0, vec![Atom::regular(&e)]);
    let k0 = ww.find(0, 0, e1, e2).unwrap();
    let blk = &ww.blocks[&0][k0];
    let mut hm = Matrix::zeros(f, ww.complex.dim(0), e.dim());
    for x in 0..e.dim() {
        let col = blk.t.pi.mul_vec(&kron(&e.basis_vector(x), &unit));
        let off = ww.block_offset(0, k0);
        for (r, &val) in col.iter().enumerate() {
            hm.set(off + r, x, val);
        }
    }
    let mut h = ChainMap::zero(&stalk, &ww.complex);
    h.set(0, hm);
    let y = cone(&h).shift(-1);
    let mut fm = Matrix::zeros(f, e.dim(), y.dim(0));
    fm.set_block(0, 0, &Matrix::identity(f, e.dim()));
    let mut f12 = ChainMap::zero(&y, &parts[0].map.tgt);
    f12.set(0, fm);

    // Lifts p_i(z) = (g_i(z), -iota_i(z)) of the maps g_i through f.
    let mut lifts = Vec::new();
    for (side, part) in parts.iter().enumerate() {
        let z = &part.source;
        let mut p = ChainMap::zero(z, &y);
        for k in z.degrees() {
            let mut m = Matrix::zeros(f, y.dim(k), z.dim(k));
            let base = if k == 0 {
                m.set_block(0, 0, &part.map.at(0));
                e.dim()
            } else {
                0
            };
            let zo = z.offsets(k);
            for u in 0..z.term(k).len() {
                let (i, uu, vv) = if side == 0 { (k + 1, u, e2) } else { (0, e1, u) };
                let kb = ww.find(k + 1, i, uu, vv).unwrap();
                let t = &ww.blocks[&(k + 1)][kb].t;
                let off = base + ww.block_offset(k + 1, kb);
                for b in 0..zo[u + 1] - zo[u] {
                    let zb: Vec<u32> = (0..zo[u + 1] - zo[u]).map(|r| (r == b) as u32).collect();
                    let pure = if side == 0 { kron(&zb, &unit) } else { kron(&unit, &zb) };
                    for (r, val) in t.pi.mul_vec(&pure).into_iter().enumerate() {
                        m.set(off + r, zo[u] + b, f.neg(val));
                    }
                }
            }
            p.set(k, m);
        }
        lifts.push(p);
    }
    let data = TwistData { corner: c, resolution: y, augmentation: f12 };
    let parts: [TwistEvaluation; 2] = parts.try_into().unwrap();
    let lifts: [ChainMap; 2] = lifts.try_into().unwrap();
    Ok(Composite { data, parts, lifts })
}

/// Twisting by the combined data agrees with twisting by each in turn.
pub fn verify_composition<R: Rng>(
    td1: &TwistData,
    td2: &TwistData,
    rng: &mut R,
    trials: usize,
) -> Result<TriangleReport, TwistError> {
    let mut rep = TriangleReport::new("composition");
    let comp = compose_twist_data(td1, td2)?;
    rep.check("combined resolution is a complex", comp.data.resolution.check().is_ok(), json!(null));
    rep.check("combined augmentation is a chain map", comp.data.augmentation.check().is_ok(), json!(null));
    for (i, (p, part)) in comp.lifts.iter().zip(&comp.parts).enumerate() {
        rep.check(format!("lift {} is a chain map", i + 1), p.check().is_ok(), json!(null));
        let through = p.compose(&comp.data.augmentation);
        rep.check(format!("lift {} factors g through f", i + 1), homotopic(&through, &part.map), json!(null));
    }
    let x1 = periodic_twist(td1)?;
    let x2 = periodic_twist(td2)?;
    let x12 = periodic_twist(&comp.data)?.minimize();
    rep.check("combined twist is a complex", x12.check().is_ok(), x12.summary());
    let lhs = tensor(&x1, &x2).minimize();
    compare_to_identity(&mut rep, "X1 (x) X2 agrees with X12", &lhs, &x12, rng, trials);
    Ok(rep)
}

/// Compatibility of a twist on `A` with the matching twist on a larger
/// corner `E = e'Ae'` containing it, along `P = Ae'`.
pub fn verify_pdnp<R: Rng>(
    p_corner: &Arc<Corner>,
    td: &TwistData,
    rng: &mut R,
    trials: usize,
) -> Result<TriangleReport, TwistError> {
    let a = td.ambient().clone();
    if !p_corner.ambient.is_same(&a) {
        return Err(TwistError::Malformed("corner of a different algebra".into()));
    }
    let e = p_corner.alg.clone();
    let local: Vec<usize> = td
        .corner
        .verts
        .iter()
        .map(|&v| p_corner.local_vertex(v).ok_or_else(|| TwistError::Malformed(format!("vertex {} not in P", v + 1))))
        .collect::<Result<_, _>>()?;
    let q = corner_algebra(&e, &local);
    let inner = twist_evaluation(&td.rebase(q)?)?;
    let outer = twist_evaluation(td)?;
    let (w, x) = (&inner.twist, &outer.twist);
    let mut rep = TriangleReport::new("pdnp");
    let p = Complex::stalk(&a, &e, 0, vec![Atom::left_corner(p_corner)]);
    let pv = Complex::stalk(&e, &a, 0, vec![Atom::right_corner(p_corner)]);

    let lhs = tensor(&p, w);
    let rhs = tensor(x, &p);
    let (hl, hr) = (lhs.homology_dims(), rhs.homology_dims());
    rep.check("P (x) W and X (x) P have equal homology", hl == hr, json!({ "lhs": hl, "rhs": hr }));
    let iso = find_chain_iso(&lhs, &rhs, rng, trials);
    rep.check("P (x) W is isomorphic to X (x) P", iso.is_some(), json!({ "atoms": lhs.atom_count() }));

    let back = tensor(&tensor(&pv, x), &p);
    let iso2 = find_chain_iso(&back, w, rng, trials);
    rep.check("P^* (x) X (x) P is isomorphic to W", iso2.is_some(), json!({ "atoms": back.atom_count() }));

    // g on A is the image of g' on E under P (x) - (x) P^* followed by multiplication.
    let pushed = twist_evaluation(&TwistData {
        corner: p_corner.clone(),
        resolution: inner.source.clone(),
        augmentation: inner.map.clone(),
    })?;
    let same_source = pushed.source.degrees() == outer.source.degrees()
        && outer.source.degrees().iter().all(|&i| pushed.source.d(i) == outer.source.d(i));
    let same_map = same_source && outer.source.degrees().iter().all(|&i| pushed.map.at(i) == outer.map.at(i));
    rep.check("g factors through g' at chain level", same_map, json!({ "same_source": same_source }));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::gamma;
    use crate::Field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn words() {
        assert_eq!(longest_word(3).letters, vec![1, 2, 1, 3, 2, 1]);
        assert_eq!(longest_word(3).permutation(), vec![4, 3, 2, 1]);
        assert_eq!(BraidWord::parse(2, "1, 2,1").unwrap().letters, vec![1, 2, 1]);
        assert!(BraidWord::parse(2, "3").is_err());
    }

    #[test]
    fn spherical_twist_dims() {
        let a = gamma(Field::default(), 2);
        let x = spherical_twist_complex(&a, 0).unwrap();
        assert_eq!((x.dim(1), x.dim(0)), (9, 6));
        x.check().unwrap();
    }

    #[test]
    fn small_longest_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=2 {
            let a = gamma(Field::default(), n);
            let rep = verify_longest(&a, &mut rng, 8).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures());
        }
    }

    #[test]
    fn period_of_dual_numbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = gamma(Field::default(), 1);
        let p = detect_periodicity(&a, 4, &mut rng, 8).unwrap().unwrap();
        assert_eq!(p.period, 1);
        assert!(conjugating_unit(&p.automorphism, &tau(&a), &mut rng, 8).is_some());
    }
}
