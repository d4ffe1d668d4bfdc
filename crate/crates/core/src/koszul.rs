//! Quadratic duality and the functor `Q` from graded bimodules over the
//! quadratic dual to linear complexes of projective bimodules.
//!
//! For a quadratic `L` with dual `D`, an arrow `g` of `L` pairs with the dual
//! arrow `g*` of `D`. A graded `D`-bimodule `M` gives `Q(M)_i`, one projective
//! `L e_b (x) e_a L` in internal degree `i` per basis element of `e_a M_i e_b`
//! (its dual vector sits in `e_b M_i^* e_a`), with differential
//! `d = d^l + (-1)^i d^r`:
//!
//! `d^l(x (x) f (x) y) = sum f(g* m) x (x) m^* (x) g y`,
//! `d^r(x (x) f (x) y) = sum f(m g*) x g (x) m^* (x) y`.

use crate::algebra::{
    build_path_algebra, corner_algebra, find_frobenius_form, quotient_by_vertices, Alg, AlgebraError, AlgebraMap,
    Arrow, Corner, Presentation, Relation,
};
use crate::bimodule::{conjugating_unit, identify_invertible, matches_twist, proj_map, Atom, Bimodule};
use crate::complex::{dualize, find_chain_iso, tensor, ChainMap, Complex, ComplexError};
use crate::field::{Field, Matrix};
use crate::named::{
    gamma, gamma_presentation, pi_x, pi_y, preprojective, preprojective_to_dual, preprojective_to_linear,
    quadratic_dual, realize, sign_flip, tau, tau_dual, linear_orientation,
};
use crate::report::TriangleReport;
use crate::twist::{detect_periodicity, g_complex, proj_element, tau_class, TwistError};
use rand::Rng;
use serde_json::json;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum KoszulError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error("bimodule carries no internal grading")]
    Ungraded,
    #[error("grading is incompatible with the actions: {0}")]
    GradingMismatch(String),
    #[error("automorphism is not graded: {0}")]
    NotGraded(String),
    #[error("corner algebra is not quadratic: {0}")]
    CornerNotQuadratic(String),
    #[error("n = {0} is out of range")]
    NOutOfRange(usize),
}

/// A quadratic algebra with its presentation, the basis index of each arrow,
/// and the realized quadratic dual whose arrow `g` is `g*`.
#[derive(Clone, Debug)]
pub struct KoszulPair {
    pub lambda: Alg,
    pub pres: Presentation,
    pub arrows: Vec<usize>,
    pub dual: Alg,
}

impl KoszulPair {
    pub fn new(lambda: Alg, pres: Presentation, arrows: Vec<usize>) -> Result<Self, KoszulError> {
        let f = lambda.field();
        let dual = realize(f, format!("{}!", lambda.name()), quadratic_dual(f, &pres)?)?;
        Ok(KoszulPair { lambda, pres, arrows, dual })
    }

    pub fn from_presentation(field: Field, name: &str, pres: Presentation) -> Result<Self, KoszulError> {
        let lambda = realize(field, name, pres.clone())?;
        let arrows = lambda.generators().to_vec();
        Self::new(lambda, pres, arrows)
    }

    pub fn dual_arrow(&self, g: usize) -> usize {
        self.dual.generators()[g]
    }
}

/// `Gamma_n` (n >= 3) with `Pi_n` and the identification of `Pi_n` with the
/// realized dual.
#[derive(Clone, Debug)]
pub struct ZigzagPair {
    pub kp: KoszulPair,
    pub pi: Alg,
    pub to_dual: AlgebraMap,
    pub from_dual: AlgebraMap,
}

impl ZigzagPair {
    pub fn new(field: Field, n: usize) -> Result<Self, KoszulError> {
        if n < 3 {
            return Err(KoszulError::NOutOfRange(n));
        }
        let lambda = gamma(field, n);
        let arrows = lambda.generators().to_vec();
        let kp = KoszulPair::new(lambda, gamma_presentation(n), arrows)?;
        let pi = preprojective(field, n);
        let to_dual = preprojective_to_dual(&pi, &kp.dual)?;
        let from_dual = to_dual.inverse().ok_or_else(|| KoszulError::NotGraded("identification is not bijective".into()))?;
        Ok(ZigzagPair { kp, pi, to_dual, from_dual })
    }

    pub fn n(&self) -> usize {
        self.pi.nvert()
    }

    /// A `Pi_n`-bimodule viewed over the realized dual.
    pub fn over_dual(&self, m: &Bimodule) -> Bimodule {
        m.restrict(&self.from_dual, &self.from_dual)
    }
}

/// Coefficient vectors of the relations on composable arrow pairs.
pub fn relation_matrix(field: Field, pres: &Presentation) -> (Vec<(usize, usize)>, Matrix) {
    let mut pairs = Vec::new();
    for (i, a) in pres.arrows.iter().enumerate() {
        for (j, b) in pres.arrows.iter().enumerate() {
            if a.tgt == b.src {
                pairs.push((i, j));
            }
        }
    }
    let mut m = Matrix::zeros(field, pairs.len(), pres.relations.len());
    for (r, rel) in pres.relations.iter().enumerate() {
        for (c, path) in rel {
            if let Some(k) = pairs.iter().position(|&(x, y)| path.len() == 2 && x == path[0] && y == path[1]) {
                m.add_at(k, r, field.elt(*c));
            }
        }
    }
    (pairs, m)
}

/// Same quiver and the same relation space.
pub fn same_quadratic_presentation(field: Field, p: &Presentation, q: &Presentation) -> bool {
    if p.nvert != q.nvert
        || p.arrows.len() != q.arrows.len()
        || p.arrows.iter().zip(&q.arrows).any(|(a, b)| (a.src, a.tgt) != (b.src, b.tgt))
    {
        return false;
    }
    let (_, rp) = relation_matrix(field, p);
    let (_, rq) = relation_matrix(field, q);
    let (sp, sq) = (rp.column_space(), rq.column_space());
    sp.cols() == sq.cols() && sp.hstack(&sq).rank() == sp.cols()
}

/// `tau^! = (tau_1^{-1})^*` on the dual, for `tau` preserving the vertex
/// idempotents and the span of the arrows.
pub fn dual_automorphism(kp: &KoszulPair, t: &AlgebraMap) -> Result<AlgebraMap, KoszulError> {
    let f = kp.lambda.field();
    let verts = t.vertex_permutation().ok_or_else(|| KoszulError::NotGraded("vertices are not permuted".into()))?;
    let k = kp.arrows.len();
    let mut m = Matrix::zeros(f, k, k);
    for (g, &bg) in kp.arrows.iter().enumerate() {
        for (b, &c) in t.image_of_basis(bg).iter().enumerate() {
            if c == 0 {
                continue;
            }
            let h = kp.arrows.iter().position(|&x| x == b).ok_or_else(|| {
                KoszulError::NotGraded(format!("image of {} leaves the arrows", kp.lambda.basis()[bg].label))
            })?;
            m.set(h, g, c);
        }
    }
    let dual_m = m.inverse().map_err(|_| KoszulError::NotGraded("not invertible on arrows".into()))?.transpose();
    let imgs: Vec<Vec<u32>> = (0..k)
        .map(|g| {
            let mut v = vec![0; kp.dual.dim()];
            for h in 0..k {
                v[kp.dual_arrow(h)] = dual_m.get(h, g);
            }
            v
        })
        .collect();
    Ok(AlgebraMap::from_generator_images(&kp.dual, &kp.dual, &verts, &imgs)?)
}

/// A basis of `M` adapted to `M = (+) e_a M_i e_b`, with the coordinate change.
#[derive(Clone, Debug)]
pub struct HomogeneousBasis {
    pub vectors: Vec<Vec<u32>>,
    pub degree: Vec<i32>,
    pub ends: Vec<(usize, usize)>,
    pub by_degree: BTreeMap<i32, Vec<usize>>,
    coords: Matrix,
}

impl HomogeneousBasis {
    /// Coordinates of `x` in this basis.
    pub fn coordinates(&self, x: &[u32]) -> Vec<u32> {
        self.coords.mul_vec(x)
    }
}

fn homogeneous_degree(v: &[u32], grading: &[i32]) -> Result<Option<i32>, KoszulError> {
    let mut d = None;
    for (k, &x) in v.iter().enumerate() {
        if x != 0 {
            match d {
                None => d = Some(grading[k]),
                Some(e) if e != grading[k] => {
                    return Err(KoszulError::GradingMismatch("vector mixes internal degrees".into()))
                }
                _ => {}
            }
        }
    }
    Ok(d)
}

pub fn homogeneous_basis(m: &Bimodule) -> Result<HomogeneousBasis, KoszulError> {
    let grading = m.grading().ok_or(KoszulError::Ungraded)?.to_vec();
    let (l, r) = (m.left(), m.right());
    // Idempotents fix degrees, generators raise them by their own degree.
    for (alg, left) in [(l, true), (r, false)] {
        for &g in alg.generators() {
            let dg = alg.basis()[g].deg;
            let act = if left { m.lact(g) } else { m.ract(g) };
            for c in 0..m.dim() {
                if let Some(d) = homogeneous_degree(&act.column(c), &grading)? {
                    if d != grading[c] + dg {
                        return Err(KoszulError::GradingMismatch(format!(
                            "{} moves degree {} to {}",
                            alg.basis()[g].label,
                            grading[c],
                            d
                        )));
                    }
                }
            }
        }
    }
    let mut vectors = Vec::new();
    let mut degree = Vec::new();
    let mut ends = Vec::new();
    let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let mut degs: Vec<i32> = grading.clone();
    degs.sort_unstable();
    degs.dedup();
    for &d in &degs {
        let idx: Vec<usize> = (0..m.dim()).filter(|&k| grading[k] == d).collect();
        for a in 0..l.nvert() {
            for b in 0..r.nvert() {
                let p = m.lact(l.idempotent(a)).mul(m.ract(r.idempotent(b)));
                let sp = p.submatrix(&(0..m.dim()).collect::<Vec<_>>(), &idx).column_space();
                for c in 0..sp.cols() {
                    by_degree.entry(d).or_default().push(vectors.len());
                    vectors.push(sp.column(c));
                    degree.push(d);
                    ends.push((a, b));
                }
            }
        }
    }
    if vectors.len() != m.dim() {
        return Err(KoszulError::GradingMismatch("vertex components do not span".into()));
    }
    let coords = Matrix::from_columns(m.field(), m.dim(), &vectors)
        .inverse()
        .map_err(|_| KoszulError::GradingMismatch("vertex components are dependent".into()))?;
    Ok(HomogeneousBasis { vectors, degree, ends, by_degree, coords })
}

/// `Q(M)` together with the basis of `M` its atoms are dual to.
#[derive(Clone, Debug)]
pub struct QComplex {
    pub complex: Complex,
    pub basis: HomogeneousBasis,
    /// Atom position `(degree, index in term)` of each basis element.
    pub position: Vec<(i32, usize)>,
}

pub fn q_functor(kp: &KoszulPair, m: &Bimodule) -> Result<QComplex, KoszulError> {
    if !m.left().is_same(&kp.dual) || !m.right().is_same(&kp.dual) {
        return Err(KoszulError::GradingMismatch("bimodule is not over the quadratic dual".into()));
    }
    let lam = &kp.lambda;
    let f = lam.field();
    let hb = homogeneous_basis(m)?;
    let mut c = Complex::zero(lam, lam);
    let mut position = vec![(0, 0); hb.vectors.len()];
    for (&d, ids) in &hb.by_degree {
        let atoms = ids
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                position[e] = (d, k);
                let (a, b) = hb.ends[e];
                Atom::proj(lam, lam, b, a).with_grade(d)
            })
            .collect();
        c.set_term(d, atoms);
    }
    for (&d, src_ids) in &hb.by_degree {
        let Some(tgt_ids) = hb.by_degree.get(&(d - 1)) else { continue };
        let (so, to) = (c.offsets(d), c.offsets(d - 1));
        let (src, tgt) = (c.term(d).to_vec(), c.term(d - 1).to_vec());
        let mut dm = Matrix::zeros(f, c.dim(d - 1), c.dim(d));
        let sign = f.sign(d.rem_euclid(2) == 1);
        for (g, &gl) in kp.arrows.iter().enumerate() {
            let gd = kp.dual_arrow(g);
            for (ti, &me) in tgt_ids.iter().enumerate() {
                let (am, bm) = hb.ends[me];
                let left = hb.coordinates(&m.lact(gd).mul_vec(&hb.vectors[me]));
                let right = hb.coordinates(&m.ract(gd).mul_vec(&hb.vectors[me]));
                for (si, &phi) in src_ids.iter().enumerate() {
                    let mut blk = None;
                    if left[phi] != 0 {
                        let v = proj_element(lam, lam, bm, am, lam.idempotent(bm), gl);
                        blk = Some(proj_map(&src[si], &tgt[ti].module, &v).scale(left[phi]));
                    }
                    if right[phi] != 0 {
                        let v = proj_element(lam, lam, bm, am, gl, lam.idempotent(am));
                        let x = proj_map(&src[si], &tgt[ti].module, &v).scale(f.mul(sign, right[phi]));
                        blk = Some(blk.map_or(x.clone(), |b: Matrix| b.add(&x)));
                    }
                    if let Some(b) = blk {
                        dm.add_block(to[ti], so[si], &b);
                    }
                }
            }
        }
        c.set_diff(d, dm);
    }
    c.check()?;
    Ok(QComplex { complex: c, basis: hb, position })
}

/// `Q(phi): Q(N) -> Q(M)` for a degree-preserving bimodule map `phi: M -> N`,
/// sending `psi` to `psi o phi`.
pub fn q_map(qm: &QComplex, qn: &QComplex, phi: &Matrix) -> Result<ChainMap, KoszulError> {
    let (cm, cn) = (&qm.complex, &qn.complex);
    let f = cm.field();
    let mut out = ChainMap::zero(cn, cm);
    for (&d, ids_m) in &qm.basis.by_degree {
        let empty = Vec::new();
        let ids_n = qn.basis.by_degree.get(&d).unwrap_or(&empty);
        let (om, on) = (cm.offsets(d), cn.offsets(d));
        let mut x = Matrix::zeros(f, cm.dim(d), cn.dim(d));
        for (mi, &me) in ids_m.iter().enumerate() {
            let img = qn.basis.coordinates(&phi.mul_vec(&qm.basis.vectors[me]));
            if img.iter().enumerate().any(|(ne, &c)| c != 0 && qn.basis.degree[ne] != d) {
                return Err(KoszulError::GradingMismatch("map changes internal degree".into()));
            }
            for (ni, &ne) in ids_n.iter().enumerate() {
                let coef = img[ne];
                if coef == 0 {
                    continue;
                }
                if qm.basis.ends[me] != qn.basis.ends[ne] {
                    return Err(KoszulError::GradingMismatch("map does not preserve vertex components".into()));
                }
                let size = cm.term(d)[mi].dim();
                x.add_block(om[mi], on[ni], &Matrix::identity(f, size).scale(coef));
            }
        }
        out.set(d, x);
    }
    out.check()?;
    Ok(out)
}

/// A graded subquotient with its inclusion (columns in the ambient space) and,
/// when the subspace is everything, the projection onto it.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    pub module: Bimodule,
    pub inclusion: Matrix,
    pub projection: Option<Matrix>,
}

pub fn graded_subquotient(m: &Bimodule, s: &Matrix, t: &Matrix) -> Result<GradedPiece, KoszulError> {
    let grading = m.grading().ok_or(KoszulError::Ungraded)?;
    let ambient = m.dim();
    let module = m.subquotient(s, t);
    // The same basis choice as the subquotient itself.
    let comb = t.hstack(s);
    let piv = comb.pivot_columns();
    let tr = t.cols();
    let quot: Vec<usize> = piv.iter().copied().filter(|&c| c >= tr).collect();
    let tb: Vec<usize> = piv.iter().copied().filter(|&c| c < tr).collect();
    let basis = comb.submatrix(&(0..ambient).collect::<Vec<_>>(), &[tb.clone(), quot.clone()].concat());
    let inclusion = basis.block(0, tb.len(), ambient, quot.len());
    let mut g = Vec::with_capacity(quot.len());
    for c in 0..inclusion.cols() {
        g.push(homogeneous_degree(&inclusion.column(c), grading)?.unwrap_or(0));
    }
    let projection = basis.inverse().ok().map(|inv| inv.block(tb.len(), 0, quot.len(), ambient));
    Ok(GradedPiece { module: module.with_grading(Some(g)), inclusion, projection })
}

pub fn graded_submodule(m: &Bimodule, s: &Matrix) -> Result<GradedPiece, KoszulError> {
    graded_subquotient(m, s, &Matrix::zeros(m.field(), m.dim(), 0))
}

pub fn graded_quotient(m: &Bimodule, t: &Matrix) -> Result<GradedPiece, KoszulError> {
    graded_subquotient(m, &Matrix::identity(m.field(), m.dim()), t)
}

/// Column basis of the two-sided ideal generated by `gens`.
pub fn ideal(a: &Alg, gens: &[Vec<u32>]) -> Matrix {
    let mut cols = Vec::new();
    for g in gens {
        for b in 0..a.dim() {
            let bg = a.mul(&a.basis_vector(b), g);
            for c in 0..a.dim() {
                let x = a.mul(&bg, &a.basis_vector(c));
                if x.iter().any(|&v| v != 0) {
                    cols.push(x);
                }
            }
        }
    }
    Matrix::from_columns(a.field(), a.dim(), &cols).column_space()
}

/// Span of the basis elements of positive degree.
pub fn radical(a: &Alg) -> Matrix {
    let cols: Vec<Vec<u32>> = (0..a.dim()).filter(|&b| a.basis()[b].deg > 0).map(|b| a.basis_vector(b)).collect();
    Matrix::from_columns(a.field(), a.dim(), &cols)
}

/// Extends images of vertices (possibly zero) and generators along the
/// generator words of `src`, without checking multiplicativity.
fn linear_from_words(src: &Alg, tgt: &Alg, vertex: &[Option<usize>], gens: &[Vec<u32>]) -> Result<Matrix, KoszulError> {
    let f = src.field();
    let mut cols = Vec::with_capacity(src.dim());
    for b in 0..src.dim() {
        let w = src.word(b).ok_or_else(|| AlgebraError::NoWord(src.basis()[b].label.clone()))?;
        let col = if w.gens.is_empty() {
            vertex[src.basis()[b].src].map_or(vec![0; tgt.dim()], |v| tgt.basis_vector(tgt.idempotent(v)))
        } else {
            let mut v = gens[w.gens[0]].clone();
            for &g in &w.gens[1..] {
                v = tgt.mul(&v, &gens[g]);
            }
            let s = f.inv(w.coef).expect("word coefficients are nonzero");
            v.iter().map(|&x| f.mul(x, s)).collect()
        };
        cols.push(col);
    }
    Ok(Matrix::from_columns(f, tgt.dim(), &cols))
}

/// `Pi_n -> Pi_{n-1}` killing vertex 1 (`first`) or vertex `n`, renumbering
/// the remaining vertices in order.
pub fn preprojective_collapse(pi: &Alg, small: &Alg, first: bool) -> Result<AlgebraMap, KoszulError> {
    let n = pi.nvert();
    let gen_img = |g: Option<usize>| g.map_or(vec![0; small.dim()], |g| small.basis_vector(small.generators()[g]));
    let shift = usize::from(first);
    let vertex: Vec<Option<usize>> =
        (0..n).map(|v| if (first && v == 0) || (!first && v == n - 1) { None } else { Some(v - shift) }).collect();
    let mut gens = Vec::new();
    for i in 1..n {
        let keep = if first { i >= 2 } else { i <= n - 2 };
        gens.push(gen_img(keep.then(|| pi_x(i - shift))));
    }
    for j in 2..=n {
        let keep = if first { j >= 3 } else { j <= n - 1 };
        gens.push(gen_img(keep.then(|| pi_y(n - 1, j - shift))));
    }
    let m = AlgebraMap { src: pi.clone(), tgt: small.clone(), matrix: linear_from_words(pi, small, &vertex, &gens)? };
    m.check_homomorphism()?;
    Ok(m)
}

/// The pieces of `0 -> infl(Pi_{n-1})<-1> -> Pi_n -> kA_n -> 0`.
#[derive(Clone, Debug)]
pub struct PreprojectiveSequence {
    pub kernel: Bimodule,
    pub middle: Bimodule,
    pub quotient: Bimodule,
    pub inclusion: Matrix,
    pub projection: Matrix,
}

pub fn preprojective_sequence(pi: &Alg) -> Result<PreprojectiveSequence, KoszulError> {
    let (field, n) = (pi.field(), pi.nvert());
    if n < 2 {
        return Err(KoszulError::NOutOfRange(n));
    }
    let pi = pi.clone();
    let small = preprojective(field, n - 1);
    let lin = linear_orientation(field, n);
    let to_lin = preprojective_to_linear(&pi, &lin);
    let middle = Bimodule::regular(&pi);
    let quotient = Bimodule::regular(&lin).restrict(&to_lin, &to_lin);
    let kernel = Bimodule::regular(&small)
        .restrict(&preprojective_collapse(&pi, &small, true)?, &preprojective_collapse(&pi, &small, false)?)
        .shift_grading(1);
    // e_i -> y_{i+1}, extended along the right action.
    let vertex: Vec<Option<usize>> = (0..n - 1).map(Some).collect();
    let mut gens = Vec::new();
    for i in 1..n - 1 {
        gens.push(pi.basis_vector(pi.generators()[pi_x(i)]));
    }
    for j in 2..n {
        gens.push(pi.basis_vector(pi.generators()[pi_y(n, j)]));
    }
    let lift = linear_from_words(&small, &pi, &vertex, &gens)?;
    let cols: Vec<Vec<u32>> = (0..small.dim())
        .map(|u| {
            let i = small.basis()[u].src;
            let y = pi.basis_vector(pi.generators()[pi_y(n, i + 2)]);
            pi.mul(&y, &lift.column(u))
        })
        .collect();
    let inclusion = Matrix::from_columns(field, pi.dim(), &cols);
    Ok(PreprojectiveSequence { kernel, middle, quotient, inclusion, projection: to_lin.matrix })
}

fn graded_dims(m: &Bimodule) -> BTreeMap<i32, usize> {
    let mut out = BTreeMap::new();
    for &d in m.grading().unwrap_or(&[]) {
        *out.entry(d).or_insert(0) += 1;
    }
    out
}

/// Checks that `0 -> K -> L -> M -> 0` is a short exact sequence of graded
/// bimodules.
pub fn check_short_exact(rep: &mut TriangleReport, k: &Bimodule, l: &Bimodule, m: &Bimodule, i: &Matrix, p: &Matrix) {
    rep.check("inclusion is a bimodule map", k.is_hom(l, i), json!(null));
    rep.check("projection is a bimodule map", l.is_hom(m, p), json!(null));
    rep.check("inclusion is injective", i.rank() == k.dim(), json!({ "rank": i.rank(), "dim": k.dim() }));
    rep.check("projection is surjective", p.rank() == m.dim(), json!({ "rank": p.rank(), "dim": m.dim() }));
    rep.check("composite is zero", p.mul(i).is_zero(), json!(null));
    rep.check(
        "dimensions add up",
        l.dim() == k.dim() + m.dim(),
        json!({ "kernel": k.dim(), "middle": l.dim(), "quotient": m.dim() }),
    );
    let (dk, dl, dm) = (graded_dims(k), graded_dims(l), graded_dims(m));
    let ok = dl.iter().all(|(d, &x)| x == dk.get(d).unwrap_or(&0) + dm.get(d).unwrap_or(&0))
        && dk.keys().chain(dm.keys()).all(|d| dl.contains_key(d));
    rep.check("graded dimensions add up", ok, json!({ "kernel": dk, "middle": dl, "quotient": dm }));
    if let (Some(gk), Some(gl)) = (k.grading(), l.grading()) {
        let ok = (0..k.dim()).all(|c| homogeneous_degree(&i.column(c), gl).ok().flatten().map_or(true, |d| d == gk[c]));
        rep.check("inclusion preserves degree", ok, json!(null));
    }
}

pub fn verify_prep_ses(field: Field, n: usize) -> Result<TriangleReport, KoszulError> {
    if n < 2 {
        return Err(KoszulError::NOutOfRange(n));
    }
    let s = preprojective_sequence(&preprojective(field, n))?;
    let mut rep = TriangleReport::new(format!("prep-ses/n={n}"));
    check_short_exact(&mut rep, &s.kernel, &s.middle, &s.quotient, &s.inclusion, &s.projection);
    let small = preprojective(field, n - 1);
    let shifted = graded_dims(&s.kernel)
        .iter()
        .all(|(&d, &x)| small.basis().iter().filter(|b| b.deg == d - 1).count() == x);
    rep.check("kernel is the shifted smaller algebra", shifted, json!({ "kernel": graded_dims(&s.kernel) }));
    rep.check(
        "dimension recurrence",
        s.middle.dim() == small.dim() + n * (n + 1) / 2,
        json!({ "pi_n": s.middle.dim(), "pi_n-1": small.dim() }),
    );
    Ok(rep)
}

/// `Q` applied to a short exact sequence gives a degreewise exact sequence
/// `0 -> Q(M) -> Q(L) -> Q(K) -> 0`.
pub fn verify_q_exact(
    kp: &KoszulPair,
    k: &Bimodule,
    l: &Bimodule,
    m: &Bimodule,
    i: &Matrix,
    p: &Matrix,
) -> Result<TriangleReport, KoszulError> {
    let mut rep = TriangleReport::new("q-exact");
    let (qk, ql, qm) = (q_functor(kp, k)?, q_functor(kp, l)?, q_functor(kp, m)?);
    let qi = q_map(&qk, &ql, i)?;
    let qp = q_map(&ql, &qm, p)?;
    let mut ranks = Vec::new();
    let mut ok = true;
    for &d in &ql.complex.degrees() {
        let (a, b) = (qp.at(d), qi.at(d));
        let good = a.rank() == qm.complex.dim(d)
            && b.rank() == qk.complex.dim(d)
            && b.mul(&a).is_zero()
            && ql.complex.dim(d) == qm.complex.dim(d) + qk.complex.dim(d);
        ok &= good;
        ranks.push(json!({ "degree": d, "q_quotient": qm.complex.dim(d), "q_middle": ql.complex.dim(d), "q_kernel": qk.complex.dim(d) }));
    }
    rep.check("degreewise exact", ok, json!(ranks));
    Ok(rep)
}

/// `Q(M<i>) = Q(M)<i>[-i]`, `Q(M_{tau!}) = _tau Q(M)` and
/// `Q(M^*) = _nu (Q(M)^*)_{nu^-1}`, each by an explicit chain isomorphism.
pub fn verify_q_properties<R: Rng>(
    kp: &KoszulPair,
    m: &Bimodule,
    i: i32,
    t: &AlgebraMap,
    rng: &mut R,
    trials: usize,
) -> Result<TriangleReport, KoszulError> {
    let mut rep = TriangleReport::new("q-properties");
    let q = q_functor(kp, m)?.complex;
    let shifted = q_functor(kp, &m.shift_grading(-i))?.complex;
    let target = q.shift(-i);
    let iso = find_chain_iso(&shifted, &target, rng, trials);
    let grades = target.degrees().iter().all(|&d| target.term(d).iter().all(|a| a.grade - i == d))
        && shifted.degrees().iter().all(|&d| shifted.term(d).iter().all(|a| a.grade == d));
    rep.check("grading shift", iso.is_some() && grades, json!({ "i": i }));

    let td = dual_automorphism(kp, t)?;
    let lhs = q_functor(kp, &m.twist_right(&td))?.complex;
    let rhs = q.twist(Some(t), None);
    rep.check("twist", find_chain_iso(&lhs, &rhs, rng, trials).is_some(), json!({ "tau": t.describe() }));

    match find_frobenius_form(&kp.lambda, rng, trials) {
        Ok(fr) => {
            let nu = &fr.nakayama;
            let lhs = q_functor(kp, &m.dual())?.complex;
            let dq = dualize(&q);
            let rhs = if nu.is_identity() {
                dq
            } else {
                let inv = nu.inverse().expect("Nakayama automorphism is invertible");
                dq.twist(Some(nu), Some(&inv))
            };
            rep.check(
                "duality",
                find_chain_iso(&lhs, &rhs, rng, trials).is_some(),
                json!({ "gorenstein": fr.gorenstein, "nakayama_identity": nu.is_identity() }),
            );
        }
        Err(e) => rep.inconclusive("duality", json!({ "skipped": e.to_string() })),
    }
    Ok(rep)
}

/// Graded `Pi_n`-bimodules used to exercise `Q`: the regular bimodule, its
/// shifts, twists, dual, radical, top, simples, `kA_n` and the inflation.
pub fn preprojective_corpus(pi: &Alg) -> Result<Vec<(String, Bimodule)>, KoszulError> {
    let s = preprojective_sequence(pi)?;
    let (field, n) = (pi.field(), pi.nvert());
    let pi = pi.clone();
    let reg = s.middle.clone();
    let top = graded_quotient(&reg, &radical(&pi))?.module;
    let rad = graded_submodule(&reg, &radical(&pi))?.module;
    let mut out = vec![
        ("regular".to_string(), reg.clone()),
        ("linear".to_string(), s.quotient.clone()),
        ("inflation".to_string(), s.kernel.clone()),
        ("top".to_string(), top.clone()),
        ("radical".to_string(), rad),
        ("regular<1>".to_string(), reg.shift_grading(-1)),
        ("regular twisted".to_string(), reg.twist_right(&tau_dual(&pi))),
        ("dual".to_string(), reg.dual()),
        ("linear+top".to_string(), Bimodule::direct_sum(&[&s.quotient, &top])),
    ];
    for v in 0..n {
        let others: Vec<Vec<u32>> = (0..pi.dim())
            .filter(|&b| pi.basis()[b].deg > 0 || pi.basis()[b].src != v)
            .map(|b| pi.basis_vector(b))
            .collect();
        let t = Matrix::from_columns(field, pi.dim(), &others);
        out.push((format!("simple{}", v + 1), graded_quotient(&reg, &t)?.module));
    }
    Ok(out)
}

pub fn verify_q_corpus<R: Rng>(field: Field, n: usize, rng: &mut R, trials: usize) -> Result<TriangleReport, KoszulError> {
    let z = ZigzagPair::new(field, n)?;
    let mut rep = TriangleReport::new(format!("koszul-q/n={n}"));
    let t = tau(&z.kp.lambda);
    for (name, m) in preprojective_corpus(&z.pi)? {
        let md = z.over_dual(&m);
        for i in [0, 1, -1] {
            rep.absorb(&format!("{name}/i={i}"), verify_q_properties(&z.kp, &md, i, &t, rng, trials)?);
        }
    }
    let s = preprojective_sequence(&z.pi)?;
    let (k, l, m) = (z.over_dual(&s.kernel), z.over_dual(&s.middle), z.over_dual(&s.quotient));
    rep.absorb("prep-ses", verify_q_exact(&z.kp, &k, &l, &m, &s.inclusion, &s.projection)?);
    let reg = Bimodule::regular(&z.kp.dual);
    let rad = graded_submodule(&reg, &radical(&z.kp.dual))?;
    let top = graded_quotient(&reg, &radical(&z.kp.dual))?;
    rep.absorb(
        "radical",
        verify_q_exact(&z.kp, &rad.module, &reg, &top.module, &rad.inclusion, top.projection.as_ref().unwrap())?,
    );
    let q_lin = q_functor(&z.kp, &m)?.complex;
    let g = g_complex(&z.kp.lambda, n)?;
    rep.check("Q(kA_n) is G_n", find_chain_iso(&q_lin, &g, rng, trials).is_some(), json!(q_lin.summary()));
    Ok(rep)
}

/// `Y_n = Q(Pi_n)`.
pub fn truncated_resolution(field: Field, n: usize) -> Result<Complex, KoszulError> {
    let z = ZigzagPair::new(field, n)?;
    Ok(q_functor(&z.kp, &z.over_dual(&Bimodule::regular(&z.pi)))?.complex)
}

/// Homology of `Y_n`: `Gamma_n` in degree 0, a twist of `Gamma_n` by `tau`
/// in degree `n - 1`, nothing else; the twist is compared with the one found
/// by periodicity detection.
pub fn verify_truncated<R: Rng>(field: Field, n: usize, rng: &mut R, trials: usize) -> Result<TriangleReport, KoszulError> {
    let z = ZigzagPair::new(field, n)?;
    let a = &z.kp.lambda;
    let y = q_functor(&z.kp, &z.over_dual(&Bimodule::regular(&z.pi)))?.complex;
    let top = n as i32 - 1;
    let mut rep = TriangleReport::new(format!("truncated/n={n}"));
    let h = y.homology_dims();
    rep.check(
        "terms in degrees 0..n-1",
        y.degrees() == (0..=top).collect::<Vec<_>>(),
        json!({ "atoms": y.degrees().iter().map(|&d| y.term(d).len()).collect::<Vec<_>>() }),
    );
    rep.check(
        "middle homology vanishes",
        h.iter().all(|&(d, x)| d == 0 || d == top || x == 0),
        json!(h),
    );
    let h0 = y.homology(0);
    let iso = h0.find_isomorphism(&Bimodule::regular(a), rng, trials).is_some();
    rep.check("H_0 is the algebra", iso, json!({ "dim": h0.dim() }));
    let hn = y.homology(top);
    let class = match identify_invertible(&hn, rng, trials) {
        Ok(inv) => tau_class(a, &inv.automorphism, rng, trials),
        Err(_) => "not invertible",
    };
    rep.check(
        "H_{n-1} is the tau twist",
        matches_twist(&hn, &tau(a), rng, trials).is_some(),
        json!({ "class": class }),
    );
    let per = detect_periodicity(a, n + 1, rng, trials)?;
    let (period, pclass) = match &per {
        Some(p) => (Some(p.period), tau_class(a, &p.automorphism, rng, trials)),
        None => (None, "none"),
    };
    rep.check(
        "agrees with periodicity detection",
        period == Some(n) && pclass == class,
        json!({ "period": period, "class": pclass }),
    );
    Ok(rep)
}

/// Which of `tau!` and `tau!` followed by the dual of the sign flip the
/// automorphism `s` of `Pi_n` agrees with up to an inner automorphism.
pub fn dual_class<R: Rng>(z: &ZigzagPair, s: &AlgebraMap, rng: &mut R, trials: usize) -> Result<&'static str, KoszulError> {
    let td = tau_dual(&z.pi);
    let flip = dual_automorphism(&z.kp, &sign_flip(&z.kp.lambda))?;
    // Carry the flip over to Pi_n.
    let flip_pi = z.to_dual.compose(&flip).compose(&z.from_dual);
    Ok(if conjugating_unit(s, &td, rng, trials).is_some() {
        "tau!"
    } else if conjugating_unit(s, &flip_pi.compose(&td), rng, trials).is_some() {
        "tau!*sign_flip!"
    } else {
        "other"
    })
}

/// Frobenius parameters: `Pi_n` has Gorenstein parameter `n - 1` with Nakayama
/// automorphism `tau!` up to inner automorphisms, and `Gamma_n` has parameter
/// 2 with trivial Nakayama automorphism.
pub fn verify_frobenius<R: Rng>(field: Field, n: usize, rng: &mut R, trials: usize) -> Result<TriangleReport, KoszulError> {
    let z = ZigzagPair::new(field, n)?;
    let mut rep = TriangleReport::new(format!("frobenius/n={n}"));
    let fp = find_frobenius_form(&z.pi, rng, trials)?;
    rep.check("preprojective parameter", fp.gorenstein == n as i32 - 1, json!({ "gorenstein": fp.gorenstein }));
    let td = tau_dual(&z.pi);
    let class = dual_class(&z, &fp.nakayama, rng, trials)?;
    rep.check(
        "preprojective Nakayama is tau!",
        class == "tau!",
        json!({ "class": class, "nakayama": fp.nakayama.describe() }),
    );
    let via_dual = dual_automorphism(&z.kp, &tau(&z.kp.lambda))?;
    rep.check(
        "tau! matches the identification",
        z.to_dual.compose(&via_dual).matrix == td.compose(&z.to_dual).matrix,
        json!(null),
    );
    let fg = find_frobenius_form(&z.kp.lambda, rng, trials)?;
    rep.check("zigzag parameter", fg.gorenstein == 2, json!({ "gorenstein": fg.gorenstein }));
    let id = AlgebraMap::identity(&z.kp.lambda);
    rep.check(
        "zigzag Nakayama is inner",
        conjugating_unit(&fg.nakayama, &id, rng, trials).is_some(),
        json!({ "identity": fg.nakayama.is_identity() }),
    );
    Ok(rep)
}

/// Quadratic presentation of a corner `e L e`, checking that it is generated
/// in degree 1 with relations in degree 2. Returns the presentation and the
/// corner basis index of each arrow.
pub fn corner_presentation(c: &Corner) -> Result<(Presentation, Vec<usize>), KoszulError> {
    let e = &c.alg;
    let f = e.field();
    let bad = |s: String| KoszulError::CornerNotQuadratic(s);
    let deg0 = (0..e.dim()).filter(|&b| e.basis()[b].deg == 0).count();
    if deg0 != e.nvert() {
        return Err(bad("degree zero part is not semisimple".into()));
    }
    let ones: Vec<usize> = (0..e.dim()).filter(|&b| e.basis()[b].deg == 1).collect();
    for d in 2..=e.top_degree() {
        let target = (0..e.dim()).filter(|&b| e.basis()[b].deg == d).count();
        let lower: Vec<usize> = (0..e.dim()).filter(|&b| e.basis()[b].deg == d - 1).collect();
        let mut cols = Vec::new();
        for &g in &ones {
            for &h in &lower {
                cols.push(e.mul(&e.basis_vector(g), &e.basis_vector(h)));
            }
        }
        let span = Matrix::from_columns(f, e.dim(), &cols).rank();
        if span != target {
            return Err(bad(format!("degree {d} has dimension {target} but degree one generates {span}")));
        }
    }
    let arrows: Vec<Arrow> = ones
        .iter()
        .map(|&b| {
            let x = &e.basis()[b];
            Arrow { name: x.label.clone(), src: x.src, tgt: x.tgt, deg: 1 }
        })
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in arrows.iter().enumerate() {
        for (j, b) in arrows.iter().enumerate() {
            if a.tgt == b.src {
                pairs.push((i, j));
            }
        }
    }
    let cols: Vec<Vec<u32>> =
        pairs.iter().map(|&(i, j)| e.mul(&e.basis_vector(ones[i]), &e.basis_vector(ones[j]))).collect();
    let ker = Matrix::from_columns(f, e.dim(), &cols).nullspace();
    let relations: Vec<Relation> = (0..ker.cols())
        .map(|c| {
            (0..pairs.len())
                .filter(|&k| ker.get(k, c) != 0)
                .map(|k| (f.signed(ker.get(k, c)), vec![pairs[k].0, pairs[k].1]))
                .collect()
        })
        .collect();
    let pres = Presentation { nvert: e.nvert(), arrows, relations };
    match build_path_algebra(f, "quadratic closure", pres.clone(), e.top_degree() + 2) {
        Ok(q) if q.dim() == e.dim() => Ok((pres, ones)),
        Ok(q) => Err(bad(format!("quadratic relations give dimension {} instead of {}", q.dim(), e.dim()))),
        Err(_) => Err(bad("quadratic relations give an infinite dimensional algebra".into())),
    }
}

/// Data for comparing `Q` of an inflated module with `L e (x) Q'(M') (x) e L`.
#[derive(Clone, Debug)]
pub struct Inflation {
    pub corner: Arc<Corner>,
    pub local: KoszulPair,
    /// `D -> D / D(1-e)D`.
    pub quotient: AlgebraMap,
    /// The dual of the corner onto that quotient.
    pub identification: AlgebraMap,
}

pub fn inflation_setup(kp: &KoszulPair, verts: &[usize]) -> Result<Inflation, KoszulError> {
    let corner = corner_algebra(&kp.lambda, verts);
    let (pres, ones) = corner_presentation(&corner)?;
    let local = KoszulPair::new(corner.alg.clone(), pres, ones.clone())?;
    let quotient = quotient_by_vertices(&kp.dual, verts);
    let mut imgs = Vec::new();
    for &b in &ones {
        let amb = corner.basis_map[b];
        let g = kp
            .arrows
            .iter()
            .position(|&x| x == amb)
            .ok_or_else(|| KoszulError::CornerNotQuadratic("degree one element is not an arrow".into()))?;
        imgs.push(quotient.image_of_basis(kp.dual_arrow(g)));
    }
    let identification = AlgebraMap::from_generator_images(
        &local.dual,
        &quotient.tgt,
        &(0..verts.len()).collect::<Vec<_>>(),
        &imgs,
    )?;
    if !identification.is_bijective() {
        return Err(KoszulError::CornerNotQuadratic("dual of the corner differs from the quotient".into()));
    }
    Ok(Inflation { corner, local, quotient, identification })
}

/// `M'` over the quotient, inflated to the dual of the whole algebra.
pub fn inflate(m: &Bimodule, quotient: &AlgebraMap) -> Bimodule {
    m.restrict(quotient, quotient)
}

pub fn verify_q_inflation<R: Rng>(
    kp: &KoszulPair,
    inf: &Inflation,
    m: &Bimodule,
    rng: &mut R,
    trials: usize,
) -> Result<TriangleReport, KoszulError> {
    let mut rep = TriangleReport::new("q-inflation");
    let q = q_functor(kp, &inflate(m, &inf.quotient))?.complex;
    let local = m.restrict(&inf.identification, &inf.identification);
    let ql = q_functor(&inf.local, &local)?.complex;
    let lam = &kp.lambda;
    let e = &inf.corner.alg;
    let le = Complex::stalk(lam, e, 0, vec![Atom::left_corner(&inf.corner)]);
    let el = Complex::stalk(e, lam, 0, vec![Atom::right_corner(&inf.corner)]);
    let sandwich = tensor(&tensor(&le, &ql), &el);
    rep.check(
        "Q of the inflation is the sandwich",
        find_chain_iso(&q, &sandwich, rng, trials).is_some(),
        json!({ "q": q.summary(), "sandwich": sandwich.summary() }),
    );
    Ok(rep)
}

/// `Gamma_n` with `e` the first `n - 1` vertices and `M'` the regular
/// bimodule of the quotient (a copy of `Pi_{n-1}`).
pub fn verify_inflation_instance<R: Rng>(
    field: Field,
    n: usize,
    verts: &[usize],
    rng: &mut R,
    trials: usize,
) -> Result<TriangleReport, KoszulError> {
    let z = ZigzagPair::new(field, n)?;
    let inf = inflation_setup(&z.kp, verts)?;
    let m = Bimodule::regular(&inf.quotient.tgt);
    verify_q_inflation(&z.kp, &inf, &m, rng, trials)
}
