//! Finite dimensional bimodules given by action matrices, and the special
//! "atoms" (projective bimodules, regular bimodules, corner bimodules) that
//! make up terms of complexes, with closed-form tensor products between them.

use crate::algebra::{Alg, AlgebraMap, Corner};
use crate::field::{Field, Matrix};
use rand::Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BimoduleError {
    #[error("algebras do not match: {0}")]
    AlgebraMismatch(String),
    #[error("action axioms fail: {0}")]
    NotBimodule(String),
    #[error("not isomorphic: {0}")]
    NotIsomorphic(String),
    #[error("no invertible bimodule structure: {0}")]
    NotInvertible(String),
}

/// An `A`-`B` bimodule. `lact[a]` is left multiplication by basis element `a`
/// of `A`, `ract[b]` right multiplication by basis element `b` of `B`.
#[derive(Clone)]
pub struct Bimodule {
    left: Alg,
    right: Alg,
    dim: usize,
    lact: Vec<Matrix>,
    ract: Vec<Matrix>,
    grading: Option<Vec<i32>>,
}

impl fmt::Debug for Bimodule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bimodule({}-{}, dim {})", self.left.name(), self.right.name(), self.dim)
    }
}

impl Bimodule {
    pub fn from_actions(left: Alg, right: Alg, lact: Vec<Matrix>, ract: Vec<Matrix>, grading: Option<Vec<i32>>) -> Self {
        let dim = lact.first().or(ract.first()).map_or(0, |m| m.rows());
        assert_eq!(lact.len(), left.dim());
        assert_eq!(ract.len(), right.dim());
        Bimodule { left, right, dim, lact, ract, grading }
    }

    pub fn left(&self) -> &Alg {
        &self.left
    }

    pub fn right(&self) -> &Alg {
        &self.right
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.left.field()
    }

    pub fn lact(&self, a: usize) -> &Matrix {
        &self.lact[a]
    }

    pub fn ract(&self, b: usize) -> &Matrix {
        &self.ract[b]
    }

    pub fn grading(&self) -> Option<&[i32]> {
        self.grading.as_deref()
    }

    pub fn with_grading(mut self, g: Option<Vec<i32>>) -> Self {
        self.grading = g;
        self
    }

    pub fn lact_elt(&self, a: &[u32]) -> Matrix {
        let mut m = Matrix::zeros(self.field(), self.dim, self.dim);
        for (i, &x) in a.iter().enumerate() {
            if x != 0 {
                m.add_assign(&self.lact[i].scale(x));
            }
        }
        m
    }

    pub fn ract_elt(&self, b: &[u32]) -> Matrix {
        let mut m = Matrix::zeros(self.field(), self.dim, self.dim);
        for (i, &x) in b.iter().enumerate() {
            if x != 0 {
                m.add_assign(&self.ract[i].scale(x));
            }
        }
        m
    }

    pub fn regular(a: &Alg) -> Self {
        let grading = Some(a.basis().iter().map(|b| b.deg).collect());
        Bimodule {
            left: a.clone(),
            right: a.clone(),
            dim: a.dim(),
            lact: (0..a.dim()).map(|i| a.lmul(i).clone()).collect(),
            ract: (0..a.dim()).map(|i| a.rmul(i).clone()).collect(),
            grading,
        }
    }

    /// `L e_i (x) e_j R`, basis `x (x) y` at index `x_pos * |e_j R| + y_pos`.
    pub fn projective(l: &Alg, r: &Alg, i: usize, j: usize) -> Self {
        let xs = l.left_projective_indices(i);
        let ys = r.right_projective_indices(j);
        let f = l.field();
        let (nx, ny) = (xs.len(), ys.len());
        let xpos: HashMap<usize, usize> = xs.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let ypos: HashMap<usize, usize> = ys.iter().enumerate().map(|(k, &y)| (y, k)).collect();
        let lact = (0..l.dim())
            .map(|a| {
                let mut m = Matrix::zeros(f, nx * ny, nx * ny);
                for (xi, &x) in xs.iter().enumerate() {
                    for &(k, c) in l.product(a, x) {
                        let ki = xpos[&k];
                        for yi in 0..ny {
                            m.set(ki * ny + yi, xi * ny + yi, c);
                        }
                    }
                }
                m
            })
            .collect();
        let ract = (0..r.dim())
            .map(|b| {
                let mut m = Matrix::zeros(f, nx * ny, nx * ny);
                for (yi, &y) in ys.iter().enumerate() {
                    for &(k, c) in r.product(y, b) {
                        let ki = ypos[&k];
                        for xi in 0..nx {
                            m.set(xi * ny + ki, xi * ny + yi, c);
                        }
                    }
                }
                m
            })
            .collect();
        let grading = Some(
            xs.iter().flat_map(|&x| ys.iter().map(move |&y| l.basis()[x].deg + r.basis()[y].deg)).collect(),
        );
        Bimodule { left: l.clone(), right: r.clone(), dim: nx * ny, lact, ract, grading }
    }

    /// `A e` as an `A`-`eAe` bimodule.
    pub fn left_corner(c: &Corner) -> Self {
        let a = &c.ambient;
        let idx = c.left_indices();
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let f = a.field();
        let n = idx.len();
        let lact = (0..a.dim())
            .map(|g| {
                let mut m = Matrix::zeros(f, n, n);
                for (xi, &x) in idx.iter().enumerate() {
                    for &(k, v) in a.product(g, x) {
                        m.set(pos[&k], xi, v);
                    }
                }
                m
            })
            .collect();
        let ract = c
            .basis_map
            .iter()
            .map(|&g| {
                let mut m = Matrix::zeros(f, n, n);
                for (xi, &x) in idx.iter().enumerate() {
                    for &(k, v) in a.product(x, g) {
                        m.set(pos[&k], xi, v);
                    }
                }
                m
            })
            .collect();
        let grading = Some(idx.iter().map(|&x| a.basis()[x].deg).collect());
        Bimodule { left: a.clone(), right: c.alg.clone(), dim: n, lact, ract, grading }
    }

    /// `e A` as an `eAe`-`A` bimodule.
    pub fn right_corner(c: &Corner) -> Self {
        let a = &c.ambient;
        let idx = c.right_indices();
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let f = a.field();
        let n = idx.len();
        let lact = c
            .basis_map
            .iter()
            .map(|&g| {
                let mut m = Matrix::zeros(f, n, n);
                for (xi, &x) in idx.iter().enumerate() {
                    for &(k, v) in a.product(g, x) {
                        m.set(pos[&k], xi, v);
                    }
                }
                m
            })
            .collect();
        let ract = (0..a.dim())
            .map(|g| {
                let mut m = Matrix::zeros(f, n, n);
                for (xi, &x) in idx.iter().enumerate() {
                    for &(k, v) in a.product(x, g) {
                        m.set(pos[&k], xi, v);
                    }
                }
                m
            })
            .collect();
        let grading = Some(idx.iter().map(|&x| a.basis()[x].deg).collect());
        Bimodule { left: c.alg.clone(), right: a.clone(), dim: n, lact, ract, grading }
    }

    /// `_s M`: the left action is precomposed with `s`.
    pub fn twist_left(&self, s: &AlgebraMap) -> Self {
        assert!(s.src.is_same(&self.left) && s.tgt.is_same(&self.left));
        let lact = (0..self.left.dim()).map(|a| self.lact_elt(&s.image_of_basis(a))).collect();
        Bimodule { lact, ..self.clone() }
    }

    /// `M_s`: the right action is precomposed with `s`.
    pub fn twist_right(&self, s: &AlgebraMap) -> Self {
        assert!(s.src.is_same(&self.right) && s.tgt.is_same(&self.right));
        let ract = (0..self.right.dim()).map(|b| self.ract_elt(&s.image_of_basis(b))).collect();
        Bimodule { ract, ..self.clone() }
    }

    /// The `k`-dual as a `B`-`A` bimodule, `(b f a)(m) = f(a m b)`, in the dual basis.
    pub fn dual(&self) -> Self {
        Bimodule {
            left: self.right.clone(),
            right: self.left.clone(),
            dim: self.dim,
            lact: self.ract.iter().map(|m| m.transpose()).collect(),
            ract: self.lact.iter().map(|m| m.transpose()).collect(),
            grading: self.grading.as_ref().map(|g| g.iter().map(|d| -d).collect()),
        }
    }

    /// Internal grading shifted so that degree `d` becomes `d + k`.
    pub fn shift_grading(&self, k: i32) -> Self {
        let mut m = self.clone();
        m.grading = m.grading.map(|g| g.iter().map(|d| d + k).collect());
        m
    }

    /// Restriction of scalars along algebra maps into the current algebras.
    pub fn restrict(&self, left: &AlgebraMap, right: &AlgebraMap) -> Self {
        assert!(left.tgt.is_same(&self.left) && right.tgt.is_same(&self.right));
        Bimodule {
            left: left.src.clone(),
            right: right.src.clone(),
            dim: self.dim,
            lact: (0..left.src.dim()).map(|a| self.lact_elt(&left.image_of_basis(a))).collect(),
            ract: (0..right.src.dim()).map(|b| self.ract_elt(&right.image_of_basis(b))).collect(),
            grading: self.grading.clone(),
        }
    }

    pub fn direct_sum(parts: &[&Bimodule]) -> Self {
        let first = parts[0];
        let f = first.field();
        let lact = (0..first.left.dim())
            .map(|a| Matrix::block_diag(f, &parts.iter().map(|m| &m.lact[a]).collect::<Vec<_>>()))
            .collect();
        let ract = (0..first.right.dim())
            .map(|b| Matrix::block_diag(f, &parts.iter().map(|m| &m.ract[b]).collect::<Vec<_>>()))
            .collect();
        let grading = parts
            .iter()
            .map(|m| m.grading.clone())
            .collect::<Option<Vec<_>>>()
            .map(|v| v.concat());
        Bimodule {
            left: first.left.clone(),
            right: first.right.clone(),
            dim: parts.iter().map(|m| m.dim).sum(),
            lact,
            ract,
            grading,
        }
    }

    /// Checks associativity and commutation of the actions on generators,
    /// and that the units act as the identity.
    pub fn check_axioms(&self) -> Result<(), BimoduleError> {
        let id = Matrix::identity(self.field(), self.dim);
        if self.lact_elt(&self.left.unit()) != id || self.ract_elt(&self.right.unit()) != id {
            return Err(BimoduleError::NotBimodule("unit does not act as identity".into()));
        }
        for i in 0..self.left.dim() {
            for j in 0..self.left.dim() {
                let mut prod = vec![0; self.left.dim()];
                for &(k, c) in self.left.product(i, j) {
                    prod[k] = c;
                }
                if self.lact[i].mul(&self.lact[j]) != self.lact_elt(&prod) {
                    return Err(BimoduleError::NotBimodule("left action is not associative".into()));
                }
            }
        }
        for i in 0..self.right.dim() {
            for j in 0..self.right.dim() {
                let mut prod = vec![0; self.right.dim()];
                for &(k, c) in self.right.product(i, j) {
                    prod[k] = c;
                }
                if self.ract[j].mul(&self.ract[i]) != self.ract_elt(&prod) {
                    return Err(BimoduleError::NotBimodule("right action is not associative".into()));
                }
            }
        }
        for l in &self.lact {
            for r in &self.ract {
                if l.mul(r) != r.mul(l) {
                    return Err(BimoduleError::NotBimodule("actions do not commute".into()));
                }
            }
        }
        Ok(())
    }

    /// Subspace `M e_v` (columns form a basis) for each vertex of the right algebra.
    pub fn right_vertex_spaces(&self) -> Vec<Matrix> {
        (0..self.right.nvert()).map(|v| self.ract[self.right.idempotent(v)].column_space()).collect()
    }

    pub fn left_vertex_spaces(&self) -> Vec<Matrix> {
        (0..self.left.nvert()).map(|v| self.lact[self.left.idempotent(v)].column_space()).collect()
    }

    /// Basis of `e_a M e_b` as columns.
    pub fn corner_space(&self, a: usize, b: usize) -> Matrix {
        self.lact[self.left.idempotent(a)].mul(&self.ract[self.right.idempotent(b)]).column_space()
    }

    /// Bimodule homomorphisms `self -> other`, each as a `dim other x dim self` matrix.
    pub fn hom_space(&self, other: &Bimodule) -> Vec<Matrix> {
        assert!(self.left.is_same(&other.left) && self.right.is_same(&other.right));
        let f = self.field();
        let (dm, dn) = (self.dim, other.dim);
        if dm == 0 || dn == 0 {
            return vec![];
        }
        let mut eqs: Vec<Vec<u32>> = Vec::new();
        let mut push_eqs = |mm: &Matrix, nn: &Matrix| {
            // nn X - X mm = 0, X indexed (r, c) -> r * dm + c.
            for r in 0..dn {
                for c in 0..dm {
                    let mut row = vec![0u32; dn * dm];
                    for k in 0..dn {
                        let v = nn.get(r, k);
                        if v != 0 {
                            row[k * dm + c] = f.add(row[k * dm + c], v);
                        }
                    }
                    for k in 0..dm {
                        let v = mm.get(k, c);
                        if v != 0 {
                            row[r * dm + k] = f.sub(row[r * dm + k], v);
                        }
                    }
                    if row.iter().any(|&x| x != 0) {
                        eqs.push(row);
                    }
                }
            }
        };
        for g in self.left.algebra_generators() {
            push_eqs(&self.lact[g], &other.lact[g]);
        }
        for g in self.right.algebra_generators() {
            push_eqs(&self.ract[g], &other.ract[g]);
        }
        let mut sys = Matrix::zeros(f, eqs.len(), dn * dm);
        for (i, r) in eqs.iter().enumerate() {
            sys.row_mut(i).copy_from_slice(r);
        }
        let ns = sys.nullspace();
        (0..ns.cols()).map(|c| Matrix::from_data(f, dn, dm, ns.column(c))).collect()
    }

    pub fn is_hom(&self, other: &Bimodule, x: &Matrix) -> bool {
        self.left
            .algebra_generators()
            .iter()
            .all(|&g| other.lact[g].mul(x) == x.mul(&self.lact[g]))
            && self.right.algebra_generators().iter().all(|&g| other.ract[g].mul(x) == x.mul(&self.ract[g]))
    }

    /// An explicit isomorphism found as a random combination of a hom basis.
    pub fn find_isomorphism<R: Rng>(&self, other: &Bimodule, rng: &mut R, trials: usize) -> Option<Matrix> {
        if self.dim != other.dim {
            return None;
        }
        if self.dim == 0 {
            return Some(Matrix::zeros(self.field(), 0, 0));
        }
        let homs = self.hom_space(other);
        if homs.is_empty() {
            return None;
        }
        let f = self.field();
        for _ in 0..trials.max(1) {
            let mut x = Matrix::zeros(f, other.dim, self.dim);
            for h in &homs {
                x.add_assign(&h.scale(f.random(rng)));
            }
            if x.is_invertible() {
                return Some(x);
            }
        }
        None
    }

    /// The bimodule with the actions transported along an invertible change of basis
    /// `t: self -> new` (new coordinates are `t` applied to old ones).
    pub fn transport(&self, t: &Matrix, tinv: &Matrix) -> Self {
        Bimodule {
            left: self.left.clone(),
            right: self.right.clone(),
            dim: self.dim,
            lact: self.lact.iter().map(|m| t.mul(m).mul(tinv)).collect(),
            ract: self.ract.iter().map(|m| t.mul(m).mul(tinv)).collect(),
            grading: None,
        }
    }

    /// Subquotient `S / T` of this bimodule, given column bases with `T` inside `S`
    /// and both stable under the actions.
    pub fn subquotient(&self, s: &Matrix, t: &Matrix) -> Self {
        subquotient_of(&self.left, &self.right, s, t, |side, g, x| match side {
            Side::Left => self.lact[g].mul(x),
            Side::Right => self.ract[g].mul(x),
        })
    }

    pub fn with_algebras(&self, left: &Alg, right: &Alg) -> Self {
        assert!(left.same_structure(&self.left) && right.same_structure(&self.right));
        Bimodule { left: left.clone(), right: right.clone(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Subquotient of an ambient space carrying actions given by `act`, which
/// applies basis element `g` of the left or right algebra to a block of columns.
pub fn subquotient_of(
    left: &Alg,
    right: &Alg,
    s: &Matrix,
    t: &Matrix,
    act: impl Fn(Side, usize, &Matrix) -> Matrix,
) -> Bimodule {
    let ambient = s.rows();
    // Complete a basis of T to a basis of S; the new columns span the quotient.
    let comb = t.hstack(s);
    let piv = comb.pivot_columns();
    let tr = t.cols();
    let quot: Vec<usize> = piv.iter().copied().filter(|&c| c >= tr).collect();
    let tb: Vec<usize> = piv.iter().copied().filter(|&c| c < tr).collect();
    let basis = comb.submatrix(&(0..ambient).collect::<Vec<_>>(), &[tb.clone(), quot.clone()].concat());
    let qdim = quot.len();
    let tdim = tb.len();
    let coords = |m: &Matrix| -> Matrix {
        let x = basis.solve_matrix(m).expect("subspace is not stable under the action");
        x.block(tdim, 0, qdim, m.cols())
    };
    let qcols = basis.block(0, tdim, ambient, qdim);
    let lact = (0..left.dim()).map(|g| coords(&act(Side::Left, g, &qcols))).collect();
    let ract = (0..right.dim()).map(|g| coords(&act(Side::Right, g, &qcols))).collect();
    Bimodule { left: left.clone(), right: right.clone(), dim: qdim, lact, ract, grading: None }
}

/// How an atom is built, which decides the tensor fast paths available.
#[derive(Clone)]
pub enum AtomKind {
    /// `L e_i (x) e_j R`.
    Proj(usize, usize),
    Regular,
    /// `A e` as an `A`-`eAe` bimodule.
    LeftCorner(Arc<Corner>),
    /// `e A` as an `eAe`-`A` bimodule.
    RightCorner(Arc<Corner>),
    General,
}

impl fmt::Debug for AtomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomKind::Proj(i, j) => write!(f, "P({},{})", i + 1, j + 1),
            AtomKind::Regular => write!(f, "A"),
            AtomKind::LeftCorner(_) => write!(f, "Ae"),
            AtomKind::RightCorner(_) => write!(f, "eA"),
            AtomKind::General => write!(f, "M"),
        }
    }
}

/// A direct summand of a complex term. `grade` records an internal degree
/// shift of the generator, used only by graded constructions.
#[derive(Clone, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub module: Arc<Bimodule>,
    pub grade: i32,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum KindKey {
    Proj(u64, u64, usize, usize),
    Regular(u64),
    LeftCorner(u64),
    RightCorner(u64),
}

impl Atom {
    fn cached(key: KindKey, build: impl FnOnce() -> Bimodule) -> Arc<Bimodule> {
        static CACHE: OnceLock<Mutex<HashMap<KindKey, Arc<Bimodule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(m) = cache.lock().unwrap().get(&key) {
            return m.clone();
        }
        let m = Arc::new(build());
        cache.lock().unwrap().entry(key).or_insert(m).clone()
    }

    pub fn proj(l: &Alg, r: &Alg, i: usize, j: usize) -> Atom {
        let module = Self::cached(KindKey::Proj(l.id(), r.id(), i, j), || Bimodule::projective(l, r, i, j));
        Atom { kind: AtomKind::Proj(i, j), module, grade: 0 }
    }

    pub fn regular(a: &Alg) -> Atom {
        let module = Self::cached(KindKey::Regular(a.id()), || Bimodule::regular(a));
        Atom { kind: AtomKind::Regular, module, grade: 0 }
    }

    pub fn left_corner(c: &Arc<Corner>) -> Atom {
        let module = Self::cached(KindKey::LeftCorner(c.alg.id()), || Bimodule::left_corner(c));
        Atom { kind: AtomKind::LeftCorner(c.clone()), module, grade: 0 }
    }

    pub fn right_corner(c: &Arc<Corner>) -> Atom {
        let module = Self::cached(KindKey::RightCorner(c.alg.id()), || Bimodule::right_corner(c));
        Atom { kind: AtomKind::RightCorner(c.clone()), module, grade: 0 }
    }

    pub fn general(m: Bimodule) -> Atom {
        Atom { kind: AtomKind::General, module: Arc::new(m), grade: 0 }
    }

    pub fn with_grade(mut self, g: i32) -> Atom {
        self.grade = g;
        self
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn left(&self) -> &Alg {
        self.module.left()
    }

    pub fn right(&self) -> &Alg {
        self.module.right()
    }

    fn key(&self) -> Option<KindKey> {
        let (l, r) = (self.left().id(), self.right().id());
        match &self.kind {
            AtomKind::Proj(i, j) => Some(KindKey::Proj(l, r, *i, *j)),
            AtomKind::Regular => Some(KindKey::Regular(l)),
            AtomKind::LeftCorner(c) => Some(KindKey::LeftCorner(c.alg.id())),
            AtomKind::RightCorner(c) => Some(KindKey::RightCorner(c.alg.id())),
            AtomKind::General => None,
        }
    }

    /// Elements whose images determine a bimodule map out of this atom.
    pub fn generators(&self) -> Vec<Vec<u32>> {
        let m = &self.module;
        match &self.kind {
            AtomKind::Proj(i, j) => {
                let (l, r) = (m.left(), m.right());
                let xs = l.left_projective_indices(*i);
                let ys = r.right_projective_indices(*j);
                let xi = xs.iter().position(|&x| x == l.idempotent(*i)).unwrap();
                let yi = ys.iter().position(|&y| y == r.idempotent(*j)).unwrap();
                let mut v = vec![0; m.dim()];
                v[xi * ys.len() + yi] = 1;
                vec![v]
            }
            AtomKind::Regular => vec![m.left().unit()],
            AtomKind::LeftCorner(c) => {
                let idx = c.left_indices();
                let mut v = vec![0; m.dim()];
                for &vert in &c.verts {
                    v[idx.iter().position(|&x| x == c.ambient.idempotent(vert)).unwrap()] = 1;
                }
                vec![v]
            }
            AtomKind::RightCorner(c) => {
                let idx = c.right_indices();
                let mut v = vec![0; m.dim()];
                for &vert in &c.verts {
                    v[idx.iter().position(|&x| x == c.ambient.idempotent(vert)).unwrap()] = 1;
                }
                vec![v]
            }
            AtomKind::General => top_lifts(m),
        }
    }

    /// Basis of bimodule maps from this atom to `tgt`.
    pub fn hom_basis(&self, tgt: &Atom) -> Vec<Matrix> {
        match &self.kind {
            AtomKind::Proj(i, j) => {
                let t = &tgt.module;
                let sp = t.corner_space(*i, *j);
                (0..sp.cols()).map(|c| proj_map(self, t, &sp.column(c))).collect()
            }
            _ => self.module.hom_space(&tgt.module),
        }
    }
}

/// The map `x (x) y -> x v y` out of a projective atom, for `v` in `e_i M e_j`.
pub fn proj_map(src: &Atom, tgt: &Bimodule, v: &[u32]) -> Matrix {
    let AtomKind::Proj(i, j) = src.kind else { panic!("proj_map needs a projective atom") };
    let (l, r) = (src.left(), src.right());
    let xs = l.left_projective_indices(i);
    let ys = r.right_projective_indices(j);
    let f = l.field();
    let mut m = Matrix::zeros(f, tgt.dim(), xs.len() * ys.len());
    let vm = Matrix::column_vector(f, v);
    for (yi, &y) in ys.iter().enumerate() {
        let ry = tgt.ract(y).mul(&vm);
        for (xi, &x) in xs.iter().enumerate() {
            let col = tgt.lact(x).mul(&ry);
            for r in 0..tgt.dim() {
                m.set(r, xi * ys.len() + yi, col.get(r, 0));
            }
        }
    }
    m
}

/// Vertex-homogeneous elements spanning `M / (rad M + M rad)`.
pub fn top_lifts(m: &Bimodule) -> Vec<Vec<u32>> {
    let f = m.field();
    let mut radcols: Vec<Vec<u32>> = Vec::new();
    for &g in m.left().generators() {
        radcols.extend(m.lact(g).columns());
    }
    for &g in m.right().generators() {
        radcols.extend(m.ract(g).columns());
    }
    let rad = Matrix::from_columns(f, m.dim(), &radcols);
    let mut span = rad.column_space();
    let mut out = Vec::new();
    for a in 0..m.left().nvert() {
        for b in 0..m.right().nvert() {
            let sp = m.corner_space(a, b);
            for c in 0..sp.cols() {
                let col = Matrix::column_vector(f, &sp.column(c));
                let cand = span.hstack(&col);
                if cand.rank() > span.cols() {
                    span = cand;
                    out.push(sp.column(c));
                }
            }
        }
    }
    out
}

/// `U (x)_B V` of two atoms: the summands, the projection `pi` from
/// `U (x)_k V` (index `u * dim V + v`) onto their direct sum, and a section
/// `sigma` with `pi sigma = 1`.
#[derive(Clone, Debug)]
pub struct AtomTensor {
    pub atoms: Vec<Atom>,
    pub pi: Matrix,
    pub sigma: Matrix,
}

pub fn tensor_atoms(u: &Atom, v: &Atom) -> Arc<AtomTensor> {
    assert!(u.right().is_same(v.left()), "tensor over mismatched algebras");
    static CACHE: OnceLock<Mutex<HashMap<(KindKey, KindKey), Arc<AtomTensor>>>> = OnceLock::new();
    let key = u.key().zip(v.key());
    if let Some(k) = key {
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&k) {
            return t.clone();
        }
        let t = Arc::new(tensor_atoms_uncached(u, v));
        return cache.lock().unwrap().entry(k).or_insert(t).clone();
    }
    Arc::new(tensor_atoms_uncached(u, v))
}

fn tensor_atoms_uncached(u: &Atom, v: &Atom) -> AtomTensor {
    let f = u.module.field();
    let (du, dv) = (u.dim(), v.dim());
    let mid = u.right().clone();
    match (&u.kind, &v.kind) {
        (AtomKind::Regular, _) => {
            let mut pi = Matrix::zeros(f, dv, du * dv);
            for b in 0..du {
                let l = v.module.lact(b);
                for j in 0..dv {
                    for r in 0..dv {
                        pi.set(r, b * dv + j, l.get(r, j));
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, dv);
            for vert in 0..mid.nvert() {
                let e = mid.idempotent(vert);
                for j in 0..dv {
                    sigma.set(e * dv + j, j, 1);
                }
            }
            AtomTensor { atoms: vec![v.clone()], pi, sigma }
        }
        (_, AtomKind::Regular) => {
            let mut pi = Matrix::zeros(f, du, du * dv);
            for b in 0..dv {
                let r = u.module.ract(b);
                for i in 0..du {
                    for row in 0..du {
                        pi.set(row, i * dv + b, r.get(row, i));
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, du);
            for vert in 0..mid.nvert() {
                let e = mid.idempotent(vert);
                for i in 0..du {
                    sigma.set(i * dv + e, i, 1);
                }
            }
            AtomTensor { atoms: vec![u.clone()], pi, sigma }
        }
        (AtomKind::Proj(a, b), AtomKind::Proj(c, d)) => {
            let (l, r) = (u.left().clone(), v.right().clone());
            let xs = l.left_projective_indices(*a);
            let ys = mid.right_projective_indices(*b);
            let zs = mid.left_projective_indices(*c);
            let ws = r.right_projective_indices(*d);
            let copies = mid.corner_indices(*b, *c);
            let out = Atom::proj(&l, &r, *a, *d);
            let od = out.dim();
            let nw = ws.len();
            let total = od * copies.len();
            let mut pi = Matrix::zeros(f, total, du * dv);
            let cpos: HashMap<usize, usize> = copies.iter().enumerate().map(|(k, &p)| (p, k)).collect();
            for (yi, &y) in ys.iter().enumerate() {
                for (zi, &z) in zs.iter().enumerate() {
                    for &(p, coef) in mid.product(y, z) {
                        let k = cpos[&p];
                        for xi in 0..xs.len() {
                            for wi in 0..nw {
                                let ui = xi * ys.len() + yi;
                                let vi = zi * nw + wi;
                                pi.set(k * od + xi * nw + wi, ui * dv + vi, coef);
                            }
                        }
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, total);
            let eb = ys.iter().position(|&y| y == mid.idempotent(*b)).unwrap();
            for (k, &p) in copies.iter().enumerate() {
                let zi = zs.iter().position(|&z| z == p).unwrap();
                for xi in 0..xs.len() {
                    for wi in 0..nw {
                        let ui = xi * ys.len() + eb;
                        let vi = zi * nw + wi;
                        sigma.set(ui * dv + vi, k * od + xi * nw + wi, 1);
                    }
                }
            }
            AtomTensor { atoms: vec![out; copies.len()], pi, sigma }
        }
        (AtomKind::LeftCorner(cn), AtomKind::Proj(c, d)) => {
            let a = &cn.ambient;
            let r = v.right().clone();
            let us = cn.left_indices();
            let zs = mid.left_projective_indices(*c);
            let ws = r.right_projective_indices(*d);
            let ic = cn.verts[*c];
            let out = Atom::proj(a, &r, ic, *d);
            let xs = a.left_projective_indices(ic);
            let xpos: HashMap<usize, usize> = xs.iter().enumerate().map(|(k, &x)| (x, k)).collect();
            let nw = ws.len();
            let mut pi = Matrix::zeros(f, out.dim(), du * dv);
            for (ui, &uu) in us.iter().enumerate() {
                for (zi, &z) in zs.iter().enumerate() {
                    for &(k, coef) in a.product(uu, cn.basis_map[z]) {
                        for wi in 0..nw {
                            pi.set(xpos[&k] * nw + wi, ui * dv + zi * nw + wi, coef);
                        }
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, out.dim());
            let ec = zs.iter().position(|&z| z == mid.idempotent(*c)).unwrap();
            for (xi, &x) in xs.iter().enumerate() {
                let ui = us.iter().position(|&y| y == x).unwrap();
                for wi in 0..nw {
                    sigma.set(ui * dv + ec * nw + wi, xi * nw + wi, 1);
                }
            }
            AtomTensor { atoms: vec![out], pi, sigma }
        }
        (AtomKind::Proj(a0, b), AtomKind::RightCorner(cn)) => {
            let amb = &cn.ambient;
            let l = u.left().clone();
            let xs = l.left_projective_indices(*a0);
            let ys = mid.right_projective_indices(*b);
            let vs = cn.right_indices();
            let ib = cn.verts[*b];
            let out = Atom::proj(&l, amb, *a0, ib);
            let ws = amb.right_projective_indices(ib);
            let wpos: HashMap<usize, usize> = ws.iter().enumerate().map(|(k, &w)| (w, k)).collect();
            let nw = ws.len();
            let mut pi = Matrix::zeros(f, out.dim(), du * dv);
            for (yi, &y) in ys.iter().enumerate() {
                for (vi, &vv) in vs.iter().enumerate() {
                    for &(k, coef) in amb.product(cn.basis_map[y], vv) {
                        for xi in 0..xs.len() {
                            pi.set(xi * nw + wpos[&k], (xi * ys.len() + yi) * dv + vi, coef);
                        }
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, out.dim());
            let eb = ys.iter().position(|&y| y == mid.idempotent(*b)).unwrap();
            for (wi, &w) in ws.iter().enumerate() {
                let vi = vs.iter().position(|&x| x == w).unwrap();
                for xi in 0..xs.len() {
                    sigma.set((xi * ys.len() + eb) * dv + vi, xi * nw + wi, 1);
                }
            }
            AtomTensor { atoms: vec![out], pi, sigma }
        }
        (AtomKind::RightCorner(cn), AtomKind::Proj(c, d)) if cn.local_vertex(*c).is_some() => {
            let amb = &cn.ambient;
            let e = &cn.alg;
            let r = v.right().clone();
            let lc = cn.local_vertex(*c).unwrap();
            let us = cn.right_indices();
            let zs = amb.left_projective_indices(*c);
            let ws = r.right_projective_indices(*d);
            let out = Atom::proj(e, &r, lc, *d);
            let xs = e.left_projective_indices(lc);
            let nw = ws.len();
            let mut pi = Matrix::zeros(f, out.dim(), du * dv);
            for (ui, &uu) in us.iter().enumerate() {
                for (zi, &z) in zs.iter().enumerate() {
                    for &(k, coef) in amb.product(uu, z) {
                        let local = cn.local_basis(k).expect("product stays in the corner");
                        let xi = xs.iter().position(|&x| x == local).unwrap();
                        for wi in 0..nw {
                            pi.set(xi * nw + wi, ui * dv + zi * nw + wi, coef);
                        }
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, out.dim());
            let ec = zs.iter().position(|&z| z == amb.idempotent(*c)).unwrap();
            for (xi, &x) in xs.iter().enumerate() {
                let ui = us.iter().position(|&y| y == cn.basis_map[x]).unwrap();
                for wi in 0..nw {
                    sigma.set(ui * dv + ec * nw + wi, xi * nw + wi, 1);
                }
            }
            AtomTensor { atoms: vec![out], pi, sigma }
        }
        (AtomKind::Proj(a0, b), AtomKind::LeftCorner(cn)) if cn.local_vertex(*b).is_some() => {
            let amb = &cn.ambient;
            let e = &cn.alg;
            let l = u.left().clone();
            let lb = cn.local_vertex(*b).unwrap();
            let xs = l.left_projective_indices(*a0);
            let ys = amb.right_projective_indices(*b);
            let vs = cn.left_indices();
            let out = Atom::proj(&l, e, *a0, lb);
            let ws = e.right_projective_indices(lb);
            let nw = ws.len();
            let mut pi = Matrix::zeros(f, out.dim(), du * dv);
            for (yi, &y) in ys.iter().enumerate() {
                for (vi, &vv) in vs.iter().enumerate() {
                    for &(k, coef) in amb.product(y, vv) {
                        let local = cn.local_basis(k).expect("product stays in the corner");
                        let wi = ws.iter().position(|&w| w == local).unwrap();
                        for xi in 0..xs.len() {
                            pi.set(xi * nw + wi, (xi * ys.len() + yi) * dv + vi, coef);
                        }
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, out.dim());
            let eb = ys.iter().position(|&y| y == amb.idempotent(*b)).unwrap();
            for (wi, &w) in ws.iter().enumerate() {
                let vi = vs.iter().position(|&x| x == cn.basis_map[w]).unwrap();
                for xi in 0..xs.len() {
                    sigma.set((xi * ys.len() + eb) * dv + vi, xi * nw + wi, 1);
                }
            }
            AtomTensor { atoms: vec![out], pi, sigma }
        }
        (AtomKind::RightCorner(c1), AtomKind::LeftCorner(c2)) if c1.alg.is_same(&c2.alg) => {
            let amb = &c1.ambient;
            let e = &c1.alg;
            let us = c1.right_indices();
            let vs = c2.left_indices();
            let out = Atom::regular(e);
            let mut pi = Matrix::zeros(f, e.dim(), du * dv);
            for (ui, &uu) in us.iter().enumerate() {
                for (vi, &vv) in vs.iter().enumerate() {
                    for &(k, coef) in amb.product(uu, vv) {
                        pi.set(c1.local_basis(k).expect("product stays in the corner"), ui * dv + vi, coef);
                    }
                }
            }
            let mut sigma = Matrix::zeros(f, du * dv, e.dim());
            for (x, &amb_x) in c1.basis_map.iter().enumerate() {
                let ui = us.iter().position(|&y| y == amb_x).unwrap();
                for &vert in &c1.verts {
                    let vi = vs.iter().position(|&y| y == amb.idempotent(vert)).unwrap();
                    sigma.set(ui * dv + vi, x, 1);
                }
            }
            AtomTensor { atoms: vec![out], pi, sigma }
        }
        _ => {
            let (m, pi, sigma) = tensor_general(&u.module, &v.module);
            AtomTensor { atoms: vec![Atom::general(m)], pi, sigma }
        }
    }
}

/// `M (x)_B N` as the quotient of `sum_v M e_v (x) e_v N` by the relations
/// `(m a) (x) n - m (x) (a n)` for radical generators `a`.
pub fn tensor_general(m: &Bimodule, n: &Bimodule) -> (Bimodule, Matrix, Matrix) {
    let f = m.field();
    let b = m.right().clone();
    assert!(b.is_same(n.left()));
    let (dm, dn) = (m.dim(), n.dim());
    let mspaces = m.right_vertex_spaces();
    let nspaces = n.left_vertex_spaces();
    let mut offs = Vec::new();
    let mut total = 0;
    for v in 0..b.nvert() {
        offs.push(total);
        total += mspaces[v].cols() * nspaces[v].cols();
    }
    // Coordinates of a vector of M e_v (resp. e_v N) in the chosen basis.
    let mcoord = |v: usize, x: &Matrix| mspaces[v].solve_matrix(x).expect("vector lies in M e_v");
    let ncoord = |v: usize, x: &Matrix| nspaces[v].solve_matrix(x).expect("vector lies in e_v N");
    let mut rels: Vec<Vec<u32>> = Vec::new();
    for &g in b.generators() {
        let (s, t) = (b.basis()[g].src, b.basis()[g].tgt);
        let ma = mcoord(t, &m.ract(g).mul(&mspaces[s]));
        let an = ncoord(s, &n.lact(g).mul(&nspaces[t]));
        let (ms, nt) = (mspaces[s].cols(), nspaces[t].cols());
        let (mt, ns) = (mspaces[t].cols(), nspaces[s].cols());
        for i in 0..ms {
            for j in 0..nt {
                let mut row = vec![0u32; total];
                for k in 0..mt {
                    let c = ma.get(k, i);
                    if c != 0 {
                        row[offs[t] + k * nt + j] = f.add(row[offs[t] + k * nt + j], c);
                    }
                }
                for k in 0..ns {
                    let c = an.get(k, j);
                    if c != 0 {
                        row[offs[s] + i * ns + k] = f.sub(row[offs[s] + i * ns + k], c);
                    }
                }
                if row.iter().any(|&x| x != 0) {
                    rels.push(row);
                }
            }
        }
    }
    let mut rm = Matrix::zeros(f, rels.len(), total);
    for (i, r) in rels.iter().enumerate() {
        rm.row_mut(i).copy_from_slice(r);
    }
    let rr = rm.rref();
    let mut is_piv = vec![false; total];
    for &c in &rr.pivots {
        is_piv[c] = true;
    }
    let free: Vec<usize> = (0..total).filter(|&c| !is_piv[c]).collect();
    let q = free.len();
    // reduce: free coordinates of x - sum_p x_p row_p.
    let mut red = Matrix::zeros(f, q, total);
    for (k, &c) in free.iter().enumerate() {
        red.set(k, c, 1);
    }
    for (row, &pc) in rr.pivots.iter().enumerate() {
        for (k, &c) in free.iter().enumerate() {
            let x = rr.matrix.get(row, c);
            if x != 0 {
                red.set(k, pc, f.neg(x));
            }
        }
    }
    // From U (x)_k V coordinates to the free space: m (x) n -> sum_v m e_v (x) e_v n.
    let mut to_free = Matrix::zeros(f, total, dm * dn);
    for v in 0..b.nvert() {
        let ev = b.idempotent(v);
        let mc = mcoord(v, m.ract(ev));
        let nc = ncoord(v, n.lact(ev));
        let nv = nspaces[v].cols();
        for i in 0..dm {
            for j in 0..dn {
                for k in 0..mspaces[v].cols() {
                    let a = mc.get(k, i);
                    if a == 0 {
                        continue;
                    }
                    for l in 0..nv {
                        let c = nc.get(l, j);
                        if c != 0 {
                            to_free.set(offs[v] + k * nv + l, i * dn + j, f.mul(a, c));
                        }
                    }
                }
            }
        }
    }
    let pi = red.mul(&to_free);
    let mut sigma = Matrix::zeros(f, dm * dn, q);
    for (col, &c) in free.iter().enumerate() {
        let v = (0..b.nvert()).rev().find(|&v| offs[v] <= c).unwrap();
        let nv = nspaces[v].cols();
        let (k, l) = ((c - offs[v]) / nv, (c - offs[v]) % nv);
        let mk = mspaces[v].column(k);
        let nl = nspaces[v].column(l);
        for i in 0..dm {
            if mk[i] == 0 {
                continue;
            }
            for j in 0..dn {
                if nl[j] != 0 {
                    sigma.set(i * dn + j, col, f.mul(mk[i], nl[j]));
                }
            }
        }
    }
    let idm = Matrix::identity(f, dm);
    let idn = Matrix::identity(f, dn);
    let lact = (0..m.left().dim()).map(|a| pi.mul(&m.lact(a).kron(&idn)).mul(&sigma)).collect();
    let ract = (0..n.right().dim()).map(|c| pi.mul(&idm.kron(n.ract(c))).mul(&sigma)).collect();
    let grading = match (m.grading(), n.grading()) {
        (Some(gm), Some(gn)) => {
            let g: Vec<i32> = (0..q)
                .map(|col| {
                    let c = free[col];
                    let v = (0..b.nvert()).rev().find(|&v| offs[v] <= c).unwrap();
                    let nv = nspaces[v].cols();
                    let (k, l) = ((c - offs[v]) / nv, (c - offs[v]) % nv);
                    let dk = mspaces[v].column(k).iter().position(|&x| x != 0).map_or(0, |i| gm[i]);
                    let dl = nspaces[v].column(l).iter().position(|&x| x != 0).map_or(0, |i| gn[i]);
                    dk + dl
                })
                .collect();
            Some(g)
        }
        _ => None,
    };
    let out = Bimodule::from_actions(m.left().clone(), n.right().clone(), lact, ract, None).with_grading(grading);
    (out, pi, sigma)
}

/// Matrix of `f (x) g` from `U (x)_B V` to `U' (x)_B V'`, between the chosen
/// decompositions of both products.
pub fn tensor_maps(src: &AtomTensor, tgt: &AtomTensor, fm: &Matrix, gm: &Matrix) -> Matrix {
    let f = fm.field();
    let (du, dv) = (fm.cols(), gm.cols());
    let (du2, dv2) = (fm.rows(), gm.rows());
    let ncols = src.sigma.cols();
    let g_id = gm.is_identity();
    let f_id = fm.is_identity();
    let mut img = Matrix::zeros(f, du2 * dv2, ncols);
    for col in 0..ncols {
        // Column of sigma reshaped to a du x dv matrix S; image is f S g^T.
        let mut s = Matrix::zeros(f, du, dv);
        let mut any = false;
        for i in 0..du * dv {
            let x = src.sigma.get(i, col);
            if x != 0 {
                s.set(i / dv, i % dv, x);
                any = true;
            }
        }
        if !any {
            continue;
        }
        let fs = if f_id { s } else { fm.mul(&s) };
        let out = if g_id { fs } else { fs.mul(&gm.transpose()) };
        for i in 0..du2 {
            for j in 0..dv2 {
                let x = out.get(i, j);
                if x != 0 {
                    img.set(i * dv2 + j, col, x);
                }
            }
        }
    }
    tgt.pi.mul(&img)
}

/// Identifies `M` with a twisted regular bimodule `A_s`: finds `h` with
/// `A h = M = h A` and `s` with `h b = s(b) h`.
#[derive(Clone, Debug)]
pub struct Invertible {
    pub automorphism: AlgebraMap,
    pub generator: Vec<u32>,
}

pub fn identify_invertible<R: Rng>(m: &Bimodule, rng: &mut R, trials: usize) -> Result<Invertible, BimoduleError> {
    let a = m.left().clone();
    if !a.is_same(m.right()) {
        return Err(BimoduleError::NotInvertible("left and right algebras differ".into()));
    }
    if m.dim() != a.dim() {
        return Err(BimoduleError::NotInvertible(format!("dimension {} differs from {}", m.dim(), a.dim())));
    }
    let f = a.field();
    for _ in 0..trials.max(1) {
        let h: Vec<u32> = (0..m.dim()).map(|_| f.random(rng)).collect();
        let hm = Matrix::column_vector(f, &h);
        // Columns: b h and h b for basis elements b.
        let mut lh = Matrix::zeros(f, m.dim(), a.dim());
        let mut rh = Matrix::zeros(f, m.dim(), a.dim());
        for b in 0..a.dim() {
            let l = m.lact(b).mul(&hm);
            let r = m.ract(b).mul(&hm);
            for i in 0..m.dim() {
                lh.set(i, b, l.get(i, 0));
                rh.set(i, b, r.get(i, 0));
            }
        }
        if !lh.is_invertible() || !rh.is_invertible() {
            continue;
        }
        let s = lh.solve_matrix(&rh).expect("left map is invertible");
        let auto = AlgebraMap { src: a.clone(), tgt: a.clone(), matrix: s };
        if auto.check_homomorphism().is_ok() {
            return Ok(Invertible { automorphism: auto, generator: h });
        }
    }
    Err(BimoduleError::NotInvertible(format!("no generator found in {trials} trials")))
}

/// A unit `u` with `u s(b) = t(b) u` for all `b`, witnessing that `A_s` and
/// `A_t` are isomorphic bimodules (`s` and `t` differ by an inner automorphism).
pub fn conjugating_unit<R: Rng>(s: &AlgebraMap, t: &AlgebraMap, rng: &mut R, trials: usize) -> Option<Vec<u32>> {
    let a = s.src.clone();
    let f = a.field();
    let n = a.dim();
    let mut blocks: Vec<Matrix> = Vec::new();
    for g in a.algebra_generators() {
        // u s(g) - t(g) u = (R_{s(g)} - L_{t(g)}) u.
        blocks.push(a.rmul_elt(&s.image_of_basis(g)).sub(&a.lmul_elt(&t.image_of_basis(g))));
    }
    let mut sys = Matrix::zeros(f, 0, n);
    for b in blocks {
        sys = sys.vstack(&b);
    }
    let ns = sys.nullspace();
    if ns.cols() == 0 {
        return None;
    }
    for _ in 0..trials.max(1) {
        let coeffs: Vec<u32> = (0..ns.cols()).map(|_| f.random(rng)).collect();
        let u = ns.mul_vec(&coeffs);
        if a.is_unit(&u) {
            return Some(u);
        }
    }
    None
}

/// Whether `M` is isomorphic to `A_s`, with the generator `h` (`h b = s(b) h`)
/// when it is.
pub fn matches_twist<R: Rng>(m: &Bimodule, s: &AlgebraMap, rng: &mut R, trials: usize) -> Option<Vec<u32>> {
    let a = s.src.clone();
    if !m.left().is_same(&a) || !m.right().is_same(&a) || m.dim() != a.dim() {
        return None;
    }
    let f = a.field();
    let n = m.dim();
    let mut sys = Matrix::zeros(f, 0, n);
    for g in a.algebra_generators() {
        sys = sys.vstack(&m.ract(g).sub(&m.lact_elt(&s.image_of_basis(g))));
    }
    let ns = sys.nullspace();
    if ns.cols() == 0 {
        return None;
    }
    for _ in 0..trials.max(1) {
        let coeffs: Vec<u32> = (0..ns.cols()).map(|_| f.random(rng)).collect();
        let h = ns.mul_vec(&coeffs);
        let hm = Matrix::column_vector(f, &h);
        let mut lh = Matrix::zeros(f, n, n);
        for b in 0..n {
            let l = m.lact(b).mul(&hm);
            for i in 0..n {
                lh.set(i, b, l.get(i, 0));
            }
        }
        if lh.is_invertible() {
            return Some(h);
        }
    }
    None
}
