//! Finite dimensional basic algebras given by a quiver with relations.
//!
//! Paths compose left to right: for arrows `a: i -> j` and `b: j -> k` the
//! product `ab` is the path `i -> j -> k`, and `e_i a = a = a e_j`. Every basis
//! element is homogeneous for the path grading and lives in a single
//! `e_i A e_j`; everything downstream relies on that.

use crate::field::{dense_to_sparse, Field, Matrix, SparseVec};
use rand::Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("quotient is not finite dimensional below degree {0}")]
    NotFiniteDimensional(i32),
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("presentation is not quadratic: {0}")]
    NotQuadratic(String),
    #[error("map is not an algebra homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("no nondegenerate form found after {0} candidates")]
    NotFrobenius(usize),
    #[error("algebra is not symmetric")]
    NotSymmetric,
    #[error("basis element {0} has no generator word")]
    NoWord(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
    pub deg: i32,
}

/// Linear combination of paths, each path a sequence of arrow indices.
pub type Relation = Vec<(i64, Vec<usize>)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub nvert: usize,
    pub arrows: Vec<Arrow>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone)]
pub struct BasisElt {
    pub src: usize,
    pub tgt: usize,
    pub deg: i32,
    pub label: String,
}

/// A product of generators equal to `coef` times a basis element.
#[derive(Debug, Clone)]
pub struct Word {
    pub gens: Vec<usize>,
    pub coef: u32,
}

pub struct Algebra {
    id: u64,
    field: Field,
    name: String,
    nvert: usize,
    basis: Vec<BasisElt>,
    mult: Vec<Vec<SparseVec>>,
    idem: Vec<usize>,
    gens: Vec<usize>,
    words: Vec<Option<Word>>,
    presentation: Option<Presentation>,
    lmul: Vec<Matrix>,
    rmul: Vec<Matrix>,
    symmetric_form: OnceLock<Option<Vec<u32>>>,
}

pub type Alg = Arc<Algebra>;

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra({}, dim {}, {} vertices)", self.name, self.dim(), self.nvert)
    }
}

impl Algebra {
    /// Assembles an algebra from a full multiplication table. Generators are
    /// chosen as basis elements spanning the radical modulo its square.
    pub fn from_table(
        field: Field,
        name: impl Into<String>,
        nvert: usize,
        basis: Vec<BasisElt>,
        mult: Vec<Vec<SparseVec>>,
        presentation: Option<Presentation>,
        gens_hint: Option<Vec<usize>>,
    ) -> Alg {
        let n = basis.len();
        let mut idem = vec![usize::MAX; nvert];
        for (i, b) in basis.iter().enumerate() {
            if b.deg == 0 && b.src == b.tgt {
                idem[b.src] = i;
            }
        }
        assert!(idem.iter().all(|&i| i != usize::MAX), "missing idempotent");
        let mut lmul = Vec::with_capacity(n);
        let mut rmul = Vec::with_capacity(n);
        for i in 0..n {
            let mut l = Matrix::zeros(field, n, n);
            let mut r = Matrix::zeros(field, n, n);
            for j in 0..n {
                for &(k, c) in &mult[i][j] {
                    l.set(k, j, c);
                }
                for &(k, c) in &mult[j][i] {
                    r.set(k, j, c);
                }
            }
            lmul.push(l);
            rmul.push(r);
        }
        let mut alg = Algebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            field,
            name: name.into(),
            nvert,
            basis,
            mult,
            idem,
            gens: Vec::new(),
            words: Vec::new(),
            presentation,
            lmul,
            rmul,
            symmetric_form: OnceLock::new(),
        };
        alg.gens = gens_hint.unwrap_or_else(|| alg.radical_generators());
        alg.words = alg.compute_words();
        Arc::new(alg)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nvert(&self) -> usize {
        self.nvert
    }

    pub fn basis(&self) -> &[BasisElt] {
        &self.basis
    }

    pub fn idempotent(&self, v: usize) -> usize {
        self.idem[v]
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn presentation(&self) -> Option<&Presentation> {
        self.presentation.as_ref()
    }

    pub fn word(&self, b: usize) -> Option<&Word> {
        self.words[b].as_ref()
    }

    pub fn product(&self, i: usize, j: usize) -> &SparseVec {
        &self.mult[i][j]
    }

    /// Left multiplication by basis element `i`, as a matrix on the basis.
    pub fn lmul(&self, i: usize) -> &Matrix {
        &self.lmul[i]
    }

    pub fn rmul(&self, i: usize) -> &Matrix {
        &self.rmul[i]
    }

    /// Basis elements together with the generators used to test linearity:
    /// idempotents first, then radical generators.
    pub fn algebra_generators(&self) -> Vec<usize> {
        let mut v = self.idem.clone();
        v.extend_from_slice(&self.gens);
        v
    }

    pub fn basis_index(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.label == label)
    }

    pub fn unit(&self) -> Vec<u32> {
        let mut u = vec![0; self.dim()];
        for &i in &self.idem {
            u[i] = 1;
        }
        u
    }

    pub fn basis_vector(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut out = vec![0u32; self.dim()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let c = f.mul(x, y);
                for &(k, z) in &self.mult[i][j] {
                    out[k] = f.add(out[k], f.mul(c, z));
                }
            }
        }
        out
    }

    /// Left multiplication by an arbitrary element.
    pub fn lmul_elt(&self, a: &[u32]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.dim(), self.dim());
        for (i, &x) in a.iter().enumerate() {
            if x != 0 {
                m.add_assign(&self.lmul[i].scale(x));
            }
        }
        m
    }

    pub fn rmul_elt(&self, a: &[u32]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.dim(), self.dim());
        for (i, &x) in a.iter().enumerate() {
            if x != 0 {
                m.add_assign(&self.rmul[i].scale(x));
            }
        }
        m
    }

    pub fn is_unit(&self, a: &[u32]) -> bool {
        self.lmul_elt(a).is_invertible()
    }

    pub fn inverse_elt(&self, a: &[u32]) -> Option<Vec<u32>> {
        self.lmul_elt(a).solve(&self.unit())
    }

    /// Indices of basis elements lying in `e_i A e_j`.
    pub fn corner_indices(&self, i: usize, j: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&b| self.basis[b].src == i && self.basis[b].tgt == j).collect()
    }

    /// Basis of the projective `A e_i` (paths ending at `i`).
    pub fn left_projective_indices(&self, i: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&b| self.basis[b].tgt == i).collect()
    }

    /// Basis of `e_j A` (paths starting at `j`).
    pub fn right_projective_indices(&self, j: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&b| self.basis[b].src == j).collect()
    }

    pub fn top_degree(&self) -> i32 {
        self.basis.iter().map(|b| b.deg).max().unwrap_or(0)
    }

    pub fn is_same(&self, other: &Algebra) -> bool {
        self.id == other.id
    }

    /// Same basis, grading and structure constants.
    pub fn same_structure(&self, other: &Algebra) -> bool {
        self.field == other.field
            && self.nvert == other.nvert
            && self.dim() == other.dim()
            && self.idem == other.idem
            && self.basis.iter().zip(&other.basis).all(|(a, b)| a.src == b.src && a.tgt == b.tgt && a.deg == b.deg)
            && self.mult == other.mult
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Vec<u32> {
        (0..self.dim()).map(|_| self.field.random(rng)).collect()
    }

    fn radical_generators(&self) -> Vec<usize> {
        let n = self.dim();
        let rad: Vec<usize> = (0..n).filter(|&i| self.basis[i].deg > 0).collect();
        let mut sq_cols = Vec::new();
        for &i in &rad {
            for &j in &rad {
                if !self.mult[i][j].is_empty() {
                    let mut v = vec![0; n];
                    for &(k, c) in &self.mult[i][j] {
                        v[k] = c;
                    }
                    sq_cols.push(v);
                }
            }
        }
        let mut order = rad.clone();
        order.sort_by_key(|&i| self.basis[i].deg);
        let mut span = Matrix::from_columns(self.field, n, &sq_cols);
        let mut rank = span.rank();
        let mut gens = Vec::new();
        for i in order {
            let cand = span.hstack(&Matrix::column_vector(self.field, &self.basis_vector(i)));
            let r = cand.rank();
            if r > rank {
                gens.push(i);
                span = cand;
                rank = r;
            }
        }
        gens
    }

    fn compute_words(&self) -> Vec<Option<Word>> {
        let n = self.dim();
        let mut words: Vec<Option<Word>> = vec![None; n];
        for &i in &self.idem {
            words[i] = Some(Word { gens: vec![], coef: 1 });
        }
        for (g, &b) in self.gens.iter().enumerate() {
            words[b] = Some(Word { gens: vec![g], coef: 1 });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| self.basis[i].deg);
        loop {
            let mut progress = false;
            for &b in &order {
                if words[b].is_some() {
                    continue;
                }
                'search: for (g, &gb) in self.gens.iter().enumerate() {
                    for c in 0..n {
                        let Some(w) = &words[c] else { continue };
                        if self.basis[c].deg == 0 {
                            continue;
                        }
                        let prod = &self.mult[gb][c];
                        if prod.len() == 1 && prod[0].0 == b {
                            let mut gens = vec![g];
                            gens.extend_from_slice(&w.gens);
                            words[b] = Some(Word { gens, coef: self.field.mul(prod[0].1, w.coef) });
                            progress = true;
                            break 'search;
                        }
                    }
                }
            }
            if !progress {
                break;
            }
        }
        words
    }

    pub fn structure_summary(&self) -> serde_json::Value {
        let dims: Vec<Vec<usize>> =
            (0..self.nvert).map(|i| (0..self.nvert).map(|j| self.corner_indices(i, j).len()).collect()).collect();
        serde_json::json!({
            "name": self.name,
            "prime": self.field.p(),
            "dim": self.dim(),
            "vertices": self.nvert,
            "corner_dims": dims,
            "basis": self.basis.iter().map(|b| serde_json::json!({
                "label": b.label, "src": b.src + 1, "tgt": b.tgt + 1, "deg": b.deg
            })).collect::<Vec<_>>(),
        })
    }

    /// Symmetric nondegenerate form supported in top degree, if one exists
    /// among the candidates tried by [`find_frobenius_form`].
    pub fn symmetric_form(&self) -> Option<&Vec<u32>> {
        self.symmetric_form
            .get_or_init(|| {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
                let (form, nu, _) = frobenius_search(self, &mut rng, 16).ok()?;
                nu.is_identity().then_some(form)
            })
            .as_ref()
    }

    /// `lambda(a b)` for basis elements, the Gram matrix of a form.
    pub fn gram(&self, form: &[u32]) -> Matrix {
        let n = self.dim();
        let f = self.field;
        let mut g = Matrix::zeros(f, n, n);
        for i in 0..n {
            for j in 0..n {
                let v = self.mult[i][j].iter().fold(0, |acc, &(k, c)| f.add(acc, f.mul(c, form[k])));
                g.set(i, j, v);
            }
        }
        g
    }
}

/// Builds the path algebra of a quiver modulo homogeneous relations.
pub fn build_path_algebra(
    field: Field,
    name: impl Into<String>,
    pres: Presentation,
    max_degree: i32,
) -> Result<Alg, AlgebraError> {
    let arrows = &pres.arrows;
    for a in arrows {
        if a.src >= pres.nvert || a.tgt >= pres.nvert || a.deg < 1 {
            return Err(AlgebraError::Malformed(format!("arrow {}", a.name)));
        }
    }
    let path_deg = |p: &[usize]| p.iter().map(|&a| arrows[a].deg).sum::<i32>();
    let mut rel_by_deg: HashMap<i32, Vec<&Relation>> = HashMap::new();
    for r in &pres.relations {
        let Some((_, first)) = r.first() else { continue };
        if first.is_empty() {
            return Err(AlgebraError::Malformed("relation contains an idempotent".into()));
        }
        let d = path_deg(first);
        let (s, t) = (arrows[first[0]].src, arrows[*first.last().unwrap()].tgt);
        for (_, p) in r {
            if p.is_empty() || path_deg(p) != d || arrows[p[0]].src != s || arrows[*p.last().unwrap()].tgt != t {
                return Err(AlgebraError::Malformed("relation is not homogeneous".into()));
            }
            if p.windows(2).any(|w| arrows[w[0]].tgt != arrows[w[1]].src) {
                return Err(AlgebraError::Malformed("relation contains a non-path".into()));
            }
        }
        rel_by_deg.entry(d).or_default().push(r);
    }
    let maxarrow = arrows.iter().map(|a| a.deg).max().unwrap_or(1);

    struct Level {
        paths: Vec<Vec<usize>>,
        index: HashMap<Vec<usize>, usize>,
        ideal: Matrix,
        pivot_row: Vec<Option<usize>>,
    }
    let f = field;
    let mut levels: Vec<Level> = vec![Level {
        paths: vec![],
        index: HashMap::new(),
        ideal: Matrix::zeros(f, 0, 0),
        pivot_row: vec![],
    }];
    let mut zero_run = 0;
    let mut d = 0;
    while zero_run < maxarrow {
        d += 1;
        if d > max_degree {
            return Err(AlgebraError::NotFiniteDimensional(max_degree));
        }
        let mut paths: Vec<Vec<usize>> = Vec::new();
        for (ai, a) in arrows.iter().enumerate() {
            if a.deg == d {
                paths.push(vec![ai]);
            } else if a.deg < d {
                for p in &levels[(d - a.deg) as usize].paths {
                    if arrows[*p.last().unwrap()].tgt == a.src {
                        let mut q = p.clone();
                        q.push(ai);
                        paths.push(q);
                    }
                }
            }
        }
        paths.sort();
        let index: HashMap<Vec<usize>, usize> = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let np = paths.len();
        let mut rows: Vec<Vec<u32>> = Vec::new();
        if let Some(rs) = rel_by_deg.get(&d) {
            for r in rs {
                let mut v = vec![0u32; np];
                for (c, p) in r.iter() {
                    let k = index[p];
                    v[k] = f.add(v[k], f.elt(*c));
                }
                rows.push(v);
            }
        }
        for (ai, a) in arrows.iter().enumerate() {
            if a.deg >= d {
                continue;
            }
            let lv = &levels[(d - a.deg) as usize];
            let r = lv.pivot_row.iter().filter(|x| x.is_some()).count();
            for row in 0..r {
                let mut left = vec![0u32; np];
                let mut right = vec![0u32; np];
                let (mut lnz, mut rnz) = (false, false);
                for (k, &c) in lv.ideal.row(row).iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let p = &lv.paths[k];
                    if arrows[p[0]].src == a.tgt {
                        let mut q = vec![ai];
                        q.extend_from_slice(p);
                        left[index[&q]] = c;
                        lnz = true;
                    }
                    if arrows[*p.last().unwrap()].tgt == a.src {
                        let mut q = p.clone();
                        q.push(ai);
                        right[index[&q]] = c;
                        rnz = true;
                    }
                }
                if lnz {
                    rows.push(left);
                }
                if rnz {
                    rows.push(right);
                }
            }
        }
        let mut ideal = Matrix::zeros(f, rows.len(), np);
        for (i, r) in rows.iter().enumerate() {
            ideal.row_mut(i).copy_from_slice(r);
        }
        let rr = ideal.rref();
        let rank = rr.rank();
        let ideal = rr.matrix.block(0, 0, rank, np);
        let mut pivot_row = vec![None; np];
        for (i, &c) in rr.pivots.iter().enumerate() {
            pivot_row[c] = Some(i);
        }
        if rank == np {
            zero_run += 1;
        } else {
            zero_run = 0;
        }
        levels.push(Level { paths, index, ideal, pivot_row });
    }
    let top = levels.len() as i32 - 1;

    // Basis: idempotents, then non-pivot paths by degree.
    let mut basis = Vec::new();
    let mut words_of: Vec<Vec<usize>> = Vec::new();
    let mut basis_of_path: HashMap<(i32, usize), usize> = HashMap::new();
    for v in 0..pres.nvert {
        basis.push(BasisElt { src: v, tgt: v, deg: 0, label: format!("e{}", v + 1) });
        words_of.push(vec![]);
    }
    for dd in 1..=top {
        let lv = &levels[dd as usize];
        for (k, p) in lv.paths.iter().enumerate() {
            if lv.pivot_row[k].is_none() {
                basis_of_path.insert((dd, k), basis.len());
                let label = p.iter().map(|&a| arrows[a].name.as_str()).collect::<Vec<_>>().join("");
                basis.push(BasisElt { src: arrows[p[0]].src, tgt: arrows[*p.last().unwrap()].tgt, deg: dd, label });
                words_of.push(p.clone());
            }
        }
    }
    // Normal form of a path of degree dd in terms of basis elements.
    let reduce = |dd: i32, p: &Vec<usize>| -> SparseVec {
        if dd > top {
            return vec![];
        }
        let lv = &levels[dd as usize];
        let Some(&k) = lv.index.get(p) else { return vec![] };
        match lv.pivot_row[k] {
            None => vec![(basis_of_path[&(dd, k)], 1)],
            Some(row) => {
                let mut out: SparseVec = Vec::new();
                for (c, &x) in lv.ideal.row(row).iter().enumerate() {
                    if x != 0 && c != k {
                        out.push((basis_of_path[&(dd, c)], f.neg(x)));
                    }
                }
                out.sort();
                out
            }
        }
    };
    let n = basis.len();
    let mut mult = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let (bi, bj) = (&basis[i], &basis[j]);
            if bi.tgt != bj.src {
                continue;
            }
            mult[i][j] = if bi.deg == 0 {
                vec![(j, 1)]
            } else if bj.deg == 0 {
                vec![(i, 1)]
            } else {
                let mut p = words_of[i].clone();
                p.extend_from_slice(&words_of[j]);
                reduce(bi.deg + bj.deg, &p)
            };
        }
    }
    let gens: Vec<usize> = arrows
        .iter()
        .enumerate()
        .map(|(ai, a)| {
            reduce(a.deg, &vec![ai])
                .first()
                .filter(|(b, c)| *c == 1 && words_of[*b] == vec![ai])
                .map(|(b, _)| *b)
                .ok_or_else(|| AlgebraError::Malformed(format!("arrow {} is not a basis element", a.name)))
        })
        .collect::<Result<_, _>>()?;
    Ok(Algebra::from_table(f, name, pres.nvert, basis, mult, Some(pres), Some(gens)))
}

/// Linear map between algebras given on bases: column `j` is the image of
/// basis element `j` of `src`.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    pub src: Alg,
    pub tgt: Alg,
    pub matrix: Matrix,
}

impl AlgebraMap {
    pub fn identity(a: &Alg) -> Self {
        AlgebraMap { src: a.clone(), tgt: a.clone(), matrix: Matrix::identity(a.field(), a.dim()) }
    }

    /// Extends images of vertices (a map on idempotents) and of generators
    /// multiplicatively along the generator words of `src`.
    pub fn from_generator_images(
        src: &Alg,
        tgt: &Alg,
        vertex_images: &[usize],
        gen_images: &[Vec<u32>],
    ) -> Result<Self, AlgebraError> {
        let f = src.field();
        assert_eq!(gen_images.len(), src.generators().len());
        let mut cols = Vec::with_capacity(src.dim());
        for b in 0..src.dim() {
            let w = src.word(b).ok_or_else(|| AlgebraError::NoWord(src.basis()[b].label.clone()))?;
            let col = if w.gens.is_empty() {
                tgt.basis_vector(tgt.idempotent(vertex_images[src.basis()[b].src]))
            } else {
                let mut v = gen_images[w.gens[0]].clone();
                for &g in &w.gens[1..] {
                    v = tgt.mul(&v, &gen_images[g]);
                }
                let s = f.inv(w.coef).unwrap();
                v.iter().map(|&x| f.mul(x, s)).collect()
            };
            cols.push(col);
        }
        let m = AlgebraMap { src: src.clone(), tgt: tgt.clone(), matrix: Matrix::from_columns(f, tgt.dim(), &cols) };
        m.check_homomorphism()?;
        Ok(m)
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        self.matrix.mul_vec(v)
    }

    pub fn image_of_basis(&self, b: usize) -> Vec<u32> {
        self.matrix.column(b)
    }

    pub fn check_homomorphism(&self) -> Result<(), AlgebraError> {
        let (s, t) = (&self.src, &self.tgt);
        if self.apply(&s.unit()) != t.unit() {
            return Err(AlgebraError::NotHomomorphism("unit not preserved".into()));
        }
        let images: Vec<Vec<u32>> = (0..s.dim()).map(|b| self.image_of_basis(b)).collect();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                let mut prod = vec![0; s.dim()];
                for &(k, c) in s.product(i, j) {
                    prod[k] = c;
                }
                if self.apply(&prod) != t.mul(&images[i], &images[j]) {
                    return Err(AlgebraError::NotHomomorphism(format!(
                        "fails on {} * {}",
                        s.basis()[i].label,
                        s.basis()[j].label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_bijective(&self) -> bool {
        self.matrix.is_invertible()
    }

    pub fn is_identity(&self) -> bool {
        self.src.is_same(&self.tgt) && self.matrix.is_identity()
    }

    pub fn compose(&self, after: &AlgebraMap) -> AlgebraMap {
        assert!(after.src.is_same(&self.tgt));
        AlgebraMap { src: self.src.clone(), tgt: after.tgt.clone(), matrix: after.matrix.mul(&self.matrix) }
    }

    pub fn inverse(&self) -> Option<AlgebraMap> {
        let inv = self.matrix.inverse().ok()?;
        Some(AlgebraMap { src: self.tgt.clone(), tgt: self.src.clone(), matrix: inv })
    }

    /// Image vertex of each vertex, when idempotents go to idempotents.
    pub fn vertex_permutation(&self) -> Option<Vec<usize>> {
        (0..self.src.nvert())
            .map(|v| {
                let img = self.image_of_basis(self.src.idempotent(v));
                (0..self.tgt.nvert()).find(|&w| img == self.tgt.basis_vector(self.tgt.idempotent(w)))
            })
            .collect()
    }

    /// Images of the basis elements written with labels, for reports.
    pub fn describe(&self) -> Vec<(String, String)> {
        let f = self.src.field();
        (0..self.src.dim())
            .map(|b| {
                let col = self.image_of_basis(b);
                let terms: Vec<String> = col
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(k, &c)| match f.signed(c) {
                        1 => self.tgt.basis()[k].label.clone(),
                        -1 => format!("-{}", self.tgt.basis()[k].label),
                        s => format!("{}{}", s, self.tgt.basis()[k].label),
                    })
                    .collect();
                (self.src.basis()[b].label.clone(), if terms.is_empty() { "0".into() } else { terms.join("+") })
            })
            .collect()
    }
}

/// `e A e` for `e` the sum of the listed vertices, with the vertex order kept.
#[derive(Debug, Clone)]
pub struct Corner {
    pub alg: Alg,
    pub ambient: Alg,
    pub verts: Vec<usize>,
    pub basis_map: Vec<usize>,
}

impl Corner {
    pub fn local_vertex(&self, ambient_vertex: usize) -> Option<usize> {
        self.verts.iter().position(|&v| v == ambient_vertex)
    }

    /// Ambient basis index of each corner basis element, inverted.
    pub fn local_basis(&self, ambient_basis: usize) -> Option<usize> {
        self.basis_map.iter().position(|&b| b == ambient_basis)
    }

    pub fn embed(&self, v: &[u32]) -> Vec<u32> {
        let mut out = vec![0; self.ambient.dim()];
        for (k, &x) in v.iter().enumerate() {
            out[self.basis_map[k]] = x;
        }
        out
    }

    pub fn restrict(&self, v: &[u32]) -> Vec<u32> {
        self.basis_map.iter().map(|&b| v[b]).collect()
    }

    /// Basis indices of `A e` (paths ending in the corner vertices).
    pub fn left_indices(&self) -> Vec<usize> {
        (0..self.ambient.dim()).filter(|&b| self.verts.contains(&self.ambient.basis()[b].tgt)).collect()
    }

    pub fn right_indices(&self) -> Vec<usize> {
        (0..self.ambient.dim()).filter(|&b| self.verts.contains(&self.ambient.basis()[b].src)).collect()
    }
}

pub fn corner_algebra(a: &Alg, verts: &[usize]) -> Arc<Corner> {
    let basis_map: Vec<usize> = (0..a.dim())
        .filter(|&b| verts.contains(&a.basis()[b].src) && verts.contains(&a.basis()[b].tgt))
        .collect();
    let local: HashMap<usize, usize> = basis_map.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let vpos = |v: usize| verts.iter().position(|&w| w == v).unwrap();
    let basis: Vec<BasisElt> = basis_map
        .iter()
        .map(|&b| {
            let e = &a.basis()[b];
            BasisElt { src: vpos(e.src), tgt: vpos(e.tgt), deg: e.deg, label: e.label.clone() }
        })
        .collect();
    let mult: Vec<Vec<SparseVec>> = basis_map
        .iter()
        .map(|&i| basis_map.iter().map(|&j| a.product(i, j).iter().map(|&(k, c)| (local[&k], c)).collect()).collect())
        .collect();
    let names: Vec<String> = verts.iter().map(|v| (v + 1).to_string()).collect();
    let alg = Algebra::from_table(
        a.field(),
        format!("e{{{}}}({})e", names.join(","), a.name()),
        verts.len(),
        basis,
        mult,
        None,
        None,
    );
    Arc::new(Corner { alg, ambient: a.clone(), verts: verts.to_vec(), basis_map })
}

/// `A / A(1-e)A` for `e` the sum of the kept vertices, with the quotient map.
pub fn quotient_by_vertices(a: &Alg, keep: &[usize]) -> AlgebraMap {
    let f = a.field();
    let n = a.dim();
    let mut cols = Vec::new();
    for v in (0..a.nvert()).filter(|v| !keep.contains(v)) {
        let ev = a.idempotent(v);
        for b in (0..n).filter(|&b| a.basis()[b].tgt == v) {
            for c in (0..n).filter(|&c| a.basis()[c].src == v) {
                let x = a.mul(&a.mul(&a.basis_vector(b), &a.basis_vector(ev)), &a.basis_vector(c));
                if x.iter().any(|&y| y != 0) {
                    cols.push(x);
                }
            }
        }
    }
    let ideal = Matrix::from_columns(f, n, &cols).transpose().rref();
    let r = ideal.rank();
    let mut is_piv = vec![false; n];
    // Pivot on the latest columns so lower-degree basis elements survive.
    let rev: Vec<usize> = (0..n).rev().collect();
    let rows = ideal.matrix.block(0, 0, r, n).submatrix(&(0..r).collect::<Vec<_>>(), &rev).rref();
    let piv: Vec<usize> = rows.pivots.iter().map(|&c| rev[c]).collect();
    for &c in &piv {
        is_piv[c] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&b| !is_piv[b]).collect();
    let pos: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    // Projection: basis element b maps to itself if kept, else to minus the
    // non-pivot part of its reducing row.
    let mut proj = Matrix::zeros(f, kept.len(), n);
    for &b in &kept {
        proj.set(pos[&b], b, 1);
    }
    for (row, &pc) in piv.iter().enumerate() {
        for (ci, &c) in rev.iter().enumerate() {
            let x = rows.matrix.get(row, ci);
            if x != 0 && c != pc {
                proj.set(pos[&c], pc, f.neg(x));
            }
        }
    }
    let vpos = |v: usize| keep.iter().position(|&w| w == v).unwrap();
    let basis: Vec<BasisElt> = kept
        .iter()
        .map(|&b| {
            let e = &a.basis()[b];
            BasisElt { src: vpos(e.src), tgt: vpos(e.tgt), deg: e.deg, label: e.label.clone() }
        })
        .collect();
    let mult: Vec<Vec<SparseVec>> = kept
        .iter()
        .map(|&i| {
            kept.iter()
                .map(|&j| {
                    let mut v = vec![0; n];
                    for &(k, c) in a.product(i, j) {
                        v[k] = c;
                    }
                    dense_to_sparse(&proj.mul_vec(&v))
                })
                .collect()
        })
        .collect();
    let names: Vec<String> = keep.iter().map(|v| (v + 1).to_string()).collect();
    let q = Algebra::from_table(f, format!("{}/<{}>", a.name(), names.join(",")), keep.len(), basis, mult, None, None);
    AlgebraMap { src: a.clone(), tgt: q, matrix: proj }
}

/// Nondegenerate form, its Nakayama automorphism `nu` with
/// `lambda(a b) = lambda(b nu(a))`, and the top degree.
#[derive(Clone, Debug)]
pub struct Frobenius {
    pub form: Vec<u32>,
    pub nakayama: AlgebraMap,
    pub gorenstein: i32,
}

pub fn find_frobenius_form<R: Rng>(a: &Alg, rng: &mut R, trials: usize) -> Result<Frobenius, AlgebraError> {
    let (form, nu, gorenstein) = frobenius_search(a, rng, trials)?;
    Ok(Frobenius { form, nakayama: AlgebraMap { src: a.clone(), tgt: a.clone(), matrix: nu }, gorenstein })
}

/// Candidates: the sum of the top-degree dual basis, each dual basis vector,
/// then random combinations. A candidate with identity Nakayama map wins,
/// otherwise the first nondegenerate one.
fn frobenius_search<R: Rng>(a: &Algebra, rng: &mut R, trials: usize) -> Result<(Vec<u32>, Matrix, i32), AlgebraError> {
    let f = a.field();
    let top = a.top_degree();
    let tops: Vec<usize> = (0..a.dim()).filter(|&b| a.basis()[b].deg == top).collect();
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    let mut ones = vec![0; a.dim()];
    for &t in &tops {
        ones[t] = 1;
    }
    candidates.push(ones);
    for &t in &tops {
        candidates.push(a.basis_vector(t));
    }
    for _ in 0..trials {
        let mut v = vec![0; a.dim()];
        for &t in &tops {
            v[t] = f.random(rng);
        }
        candidates.push(v);
    }
    let count = candidates.len();
    let mut first = None;
    for form in candidates {
        let g = a.gram(&form);
        let Ok(ginv) = g.inverse() else { continue };
        // nu(b_i) = sum_k c_k b_k where G c is column i of G^T.
        let nu = ginv.mul(&g.transpose());
        if nu.is_identity() {
            return Ok((form, nu, top));
        }
        first.get_or_insert((form, nu, top));
    }
    first.ok_or(AlgebraError::NotFrobenius(count))
}
