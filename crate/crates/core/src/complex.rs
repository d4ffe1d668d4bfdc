//! Bounded complexes of bimodules whose terms are direct sums of atoms.
//!
//! Complexes are homological: `d_i: C_i -> C_{i-1}`. The shift `C[k]` has
//! `C[k]_i = C_{i-k}` with differential `(-1)^k d`. The cone of `f: C -> D`
//! has `cone_i = C_{i-1} (+) D_i` with differential `[[-d, 0], [f, d]]`, and
//! tensor products use `d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy`.

use crate::algebra::{Alg, AlgebraMap};
use crate::bimodule::{
    identify_invertible, tensor_atoms, tensor_maps, Atom, AtomKind, AtomTensor, Bimodule, Invertible, Side,
};
use crate::field::{Field, Matrix};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexError {
    #[error("differential squares to nonzero in degree {0}")]
    NotComplex(i32),
    #[error("differential in degree {0} is not a bimodule map")]
    NotBimoduleMap(i32),
    #[error("not a chain map in degree {0}")]
    NotChainMap(i32),
    #[error("homology is not concentrated in one degree: {0:?}")]
    NotConcentrated(Vec<(i32, usize)>),
    #[error("algebras do not match: {0}")]
    AlgebraMismatch(String),
    #[error("{0}")]
    Bimodule(#[from] crate::bimodule::BimoduleError),
}

#[derive(Clone)]
pub struct Complex {
    left: Alg,
    right: Alg,
    terms: BTreeMap<i32, Vec<Atom>>,
    diffs: BTreeMap<i32, Matrix>,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Complex[{}-{}]", self.left.name(), self.right.name())?;
        for (i, t) in &self.terms {
            write!(f, " {}:{:?}", i, t.iter().map(|a| &a.kind).collect::<Vec<_>>())?;
        }
        Ok(())
    }
}

/// Applies the action of basis element `g` to a block of column vectors in a
/// direct sum of atoms.
pub fn act_on_sum(atoms: &[Atom], side: Side, g: usize, x: &Matrix) -> Matrix {
    let f = x.field();
    let mut out = Matrix::zeros(f, x.rows(), x.cols());
    let mut o = 0;
    for a in atoms {
        let d = a.dim();
        let blk = x.block(o, 0, d, x.cols());
        let m = match side {
            Side::Left => a.module.lact(g),
            Side::Right => a.module.ract(g),
        };
        out.set_block(o, 0, &m.mul(&blk));
        o += d;
    }
    out
}

fn offsets(atoms: &[Atom]) -> Vec<usize> {
    let mut v = Vec::with_capacity(atoms.len() + 1);
    let mut o = 0;
    for a in atoms {
        v.push(o);
        o += a.dim();
    }
    v.push(o);
    v
}

impl Complex {
    pub fn zero(left: &Alg, right: &Alg) -> Self {
        Complex { left: left.clone(), right: right.clone(), terms: BTreeMap::new(), diffs: BTreeMap::new() }
    }

    pub fn stalk(left: &Alg, right: &Alg, degree: i32, atoms: Vec<Atom>) -> Self {
        let mut c = Self::zero(left, right);
        c.set_term(degree, atoms);
        c
    }

    pub fn left(&self) -> &Alg {
        &self.left
    }

    pub fn right(&self) -> &Alg {
        &self.right
    }

    pub fn field(&self) -> Field {
        self.left.field()
    }

    pub fn set_term(&mut self, degree: i32, atoms: Vec<Atom>) {
        for a in &atoms {
            assert!(a.left().is_same(&self.left) && a.right().is_same(&self.right), "atom over wrong algebras");
        }
        if atoms.is_empty() {
            self.terms.remove(&degree);
        } else {
            self.terms.insert(degree, atoms);
        }
    }

    /// Sets `d_i: C_i -> C_{i-1}`.
    pub fn set_diff(&mut self, degree: i32, d: Matrix) {
        assert_eq!(d.shape(), (self.dim(degree - 1), self.dim(degree)), "differential shape in degree {degree}");
        if d.is_zero() {
            self.diffs.remove(&degree);
        } else {
            self.diffs.insert(degree, d);
        }
    }

    pub fn term(&self, i: i32) -> &[Atom] {
        self.terms.get(&i).map_or(&[], |v| v.as_slice())
    }

    pub fn dim(&self, i: i32) -> usize {
        self.term(i).iter().map(|a| a.dim()).sum()
    }

    pub fn total_dim(&self) -> usize {
        self.terms.keys().map(|&i| self.dim(i)).sum()
    }

    pub fn atom_count(&self) -> usize {
        self.terms.values().map(|v| v.len()).sum()
    }

    pub fn offsets(&self, i: i32) -> Vec<usize> {
        offsets(self.term(i))
    }

    pub fn d(&self, i: i32) -> Matrix {
        self.diffs.get(&i).cloned().unwrap_or_else(|| Matrix::zeros(self.field(), self.dim(i - 1), self.dim(i)))
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.terms.keys().copied().collect()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Block of `d_i` from atom `src` of `C_i` to atom `tgt` of `C_{i-1}`.
    pub fn d_block(&self, i: i32, tgt: usize, src: usize) -> Matrix {
        let (oi, oj) = (self.offsets(i - 1), self.offsets(i));
        self.d(i).block(oi[tgt], oj[src], oi[tgt + 1] - oi[tgt], oj[src + 1] - oj[src])
    }

    pub fn check(&self) -> Result<(), ComplexError> {
        for &i in self.terms.keys() {
            let d = self.d(i);
            if !self.d(i - 1).mul(&d).is_zero() {
                return Err(ComplexError::NotComplex(i));
            }
            if d.is_zero() {
                continue;
            }
            for g in self.left.algebra_generators() {
                if act_on_sum(self.term(i - 1), Side::Left, g, &d) != d_after(&d, self.term(i), Side::Left, g) {
                    return Err(ComplexError::NotBimoduleMap(i));
                }
            }
            for g in self.right.algebra_generators() {
                if act_on_sum(self.term(i - 1), Side::Right, g, &d) != d_after(&d, self.term(i), Side::Right, g) {
                    return Err(ComplexError::NotBimoduleMap(i));
                }
            }
        }
        Ok(())
    }

    /// `C[k]`.
    pub fn shift(&self, k: i32) -> Complex {
        let sign = self.field().sign(k.rem_euclid(2) == 1);
        Complex {
            left: self.left.clone(),
            right: self.right.clone(),
            terms: self.terms.iter().map(|(&i, t)| (i + k, t.clone())).collect(),
            diffs: self.diffs.iter().map(|(&i, d)| (i + k, d.scale(sign))).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Complex) -> Complex {
        let mut c = Complex::zero(&self.left, &self.right);
        let degs: std::collections::BTreeSet<i32> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        for &i in &degs {
            c.set_term(i, [self.term(i), other.term(i)].concat());
        }
        for &i in &degs {
            let d = Matrix::block_diag(self.field(), &[&self.d(i), &other.d(i)]);
            c.set_diff(i, d);
        }
        c
    }

    pub fn homology_dims(&self) -> Vec<(i32, usize)> {
        let mut out = Vec::new();
        for &i in self.terms.keys() {
            let n = self.dim(i);
            let k = n - self.d(i).rank();
            let b = self.d(i + 1).rank();
            out.push((i, k - b));
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.homology_dims().iter().all(|&(_, h)| h == 0)
    }

    /// `H_i` as a bimodule.
    pub fn homology(&self, i: i32) -> Bimodule {
        let ker = self.d(i).nullspace();
        let im = self.d(i + 1).column_space();
        let atoms = self.term(i);
        crate::bimodule::subquotient_of(&self.left, &self.right, &ker, &im, |side, g, x| {
            act_on_sum(atoms, side, g, x)
        })
    }

    /// Degree and dimension of the unique nonzero homology, if there is one.
    pub fn concentrated(&self) -> Result<(i32, usize), ComplexError> {
        let nz: Vec<(i32, usize)> = self.homology_dims().into_iter().filter(|&(_, h)| h > 0).collect();
        if nz.len() == 1 {
            Ok(nz[0])
        } else {
            Err(ComplexError::NotConcentrated(nz))
        }
    }

    pub fn summary(&self) -> serde_json::Value {
        let terms: BTreeMap<String, Vec<String>> = self
            .terms
            .iter()
            .map(|(i, t)| (i.to_string(), t.iter().map(|a| format!("{:?}", a.kind)).collect()))
            .collect();
        let dims: BTreeMap<String, usize> = self.terms.keys().map(|&i| (i.to_string(), self.dim(i))).collect();
        serde_json::json!({
            "left": self.left.name(),
            "right": self.right.name(),
            "terms": terms,
            "dims": dims,
            "homology": self.homology_dims().iter().map(|&(i, h)| (i.to_string(), h)).collect::<BTreeMap<_, _>>(),
        })
    }

    /// [`Complex::summary`] plus the nonzero blocks of the differential as
    /// edges between atom positions.
    pub fn describe(&self) -> serde_json::Value {
        let mut edges = Vec::new();
        for &i in self.terms.keys() {
            for s in 0..self.term(i).len() {
                for t in 0..self.term(i - 1).len() {
                    if !self.d_block(i, t, s).is_zero() {
                        edges.push(serde_json::json!({ "degree": i, "src": s, "tgt": t }));
                    }
                }
            }
        }
        let mut v = self.summary();
        v["edges"] = serde_json::Value::Array(edges);
        v
    }

    /// Replaces the algebras by structurally identical ones.
    pub fn rebase(&self, left: &Alg, right: &Alg) -> Complex {
        let mut c = Complex::zero(left, right);
        for (&i, t) in &self.terms {
            let atoms = t
                .iter()
                .map(|a| match &a.kind {
                    AtomKind::Proj(x, y) => Atom::proj(left, right, *x, *y).with_grade(a.grade),
                    AtomKind::Regular => Atom::regular(left).with_grade(a.grade),
                    _ => Atom::general(a.module.with_algebras(left, right)).with_grade(a.grade),
                })
                .collect();
            c.set_term(i, atoms);
        }
        c.diffs = self.diffs.clone();
        c
    }

    /// Twists every term on both sides; the differentials stay bimodule maps.
    pub fn twist(&self, left: Option<&AlgebraMap>, right: Option<&AlgebraMap>) -> Complex {
        let mut c = Complex::zero(&self.left, &self.right);
        for (&i, t) in &self.terms {
            let atoms = t
                .iter()
                .map(|a| {
                    let mut m = (*a.module).clone();
                    if let Some(s) = left {
                        m = m.twist_left(s);
                    }
                    if let Some(s) = right {
                        m = m.twist_right(s);
                    }
                    Atom::general(m).with_grade(a.grade)
                })
                .collect();
            c.set_term(i, atoms);
        }
        c.diffs = self.diffs.clone();
        c
    }

    /// Removes pairs of atoms joined by an invertible component of the
    /// differential (Gaussian elimination) until none is left. The result is
    /// homotopy equivalent to the input.
    pub fn minimize(&self) -> Complex {
        let mut c = self.clone();
        loop {
            let mut changed = false;
            let degs = c.degrees();
            for &k in &degs {
                while let Some((b, bp)) = c.find_invertible_block(k) {
                    c.eliminate(k, b, bp);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        c
    }

    fn find_invertible_block(&self, k: i32) -> Option<(usize, usize)> {
        let d = self.diffs.get(&k)?;
        let (src, tgt) = (self.term(k), self.term(k - 1));
        let (os, ot) = (offsets(src), offsets(tgt));
        for (b, ab) in src.iter().enumerate() {
            for (bp, abp) in tgt.iter().enumerate() {
                if ab.dim() != abp.dim() || !compatible(ab, abp) {
                    continue;
                }
                let blk = d.block(ot[bp], os[b], abp.dim(), ab.dim());
                if !blk.is_zero() && blk.is_invertible() {
                    return Some((b, bp));
                }
            }
        }
        None
    }

    fn eliminate(&mut self, k: i32, b: usize, bp: usize) {
        let src = self.term(k).to_vec();
        let tgt = self.term(k - 1).to_vec();
        let (os, ot) = (offsets(&src), offsets(&tgt));
        let d = self.d(k);
        let (n, m) = (src[b].dim(), tgt[bp].dim());
        let phi = d.block(ot[bp], os[b], m, n);
        let phi_inv = phi.inverse().expect("block is invertible");
        let rows_bp = d.block(ot[bp], 0, m, d.cols());
        let y = phi_inv.mul(&rows_bp);
        let col_b = d.block(0, os[b], d.rows(), n);
        let newd = d.sub(&col_b.mul(&y));
        let mut drop_rows = vec![false; d.rows()];
        let mut drop_cols = vec![false; d.cols()];
        drop_rows[ot[bp]..ot[bp] + m].iter_mut().for_each(|x| *x = true);
        drop_cols[os[b]..os[b] + n].iter_mut().for_each(|x| *x = true);
        let dk = newd.remove_rows_cols(&drop_rows, &drop_cols);
        let up = self.d(k + 1);
        let dup = up.remove_rows_cols(&drop_cols, &vec![false; up.cols()]);
        let down = self.d(k - 1);
        let ddown = down.remove_rows_cols(&vec![false; down.rows()], &drop_rows);
        let mut s2 = src;
        s2.remove(b);
        let mut t2 = tgt;
        t2.remove(bp);
        self.diffs.remove(&k);
        self.diffs.remove(&(k + 1));
        self.diffs.remove(&(k - 1));
        self.set_term(k, s2);
        self.set_term(k - 1, t2);
        self.set_diff(k, dk);
        self.set_diff(k + 1, dup);
        self.set_diff(k - 1, ddown);
    }

    pub fn identity_map(&self) -> ChainMap {
        ChainMap {
            src: self.clone(),
            tgt: self.clone(),
            maps: self.terms.keys().map(|&i| (i, Matrix::identity(self.field(), self.dim(i)))).collect(),
        }
    }
}

fn compatible(a: &Atom, b: &Atom) -> bool {
    match (&a.kind, &b.kind) {
        (AtomKind::Proj(i, j), AtomKind::Proj(k, l)) => i == k && j == l,
        (AtomKind::Regular, AtomKind::Regular) => true,
        (AtomKind::LeftCorner(_), AtomKind::LeftCorner(_)) => true,
        (AtomKind::RightCorner(_), AtomKind::RightCorner(_)) => true,
        (AtomKind::General, _) | (_, AtomKind::General) => true,
        _ => false,
    }
}

fn d_after(d: &Matrix, src: &[Atom], side: Side, g: usize) -> Matrix {
    // d composed with the action on the source: act on the identity, then multiply.
    let id = Matrix::identity(d.field(), d.cols());
    d.mul(&act_on_sum(src, side, g, &id))
}

/// Degree zero chain map `src -> tgt`; missing degrees are zero.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub src: Complex,
    pub tgt: Complex,
    pub maps: BTreeMap<i32, Matrix>,
}

impl ChainMap {
    pub fn zero(src: &Complex, tgt: &Complex) -> Self {
        ChainMap { src: src.clone(), tgt: tgt.clone(), maps: BTreeMap::new() }
    }

    pub fn at(&self, i: i32) -> Matrix {
        self.maps
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.src.field(), self.tgt.dim(i), self.src.dim(i)))
    }

    pub fn set(&mut self, i: i32, m: Matrix) {
        assert_eq!(m.shape(), (self.tgt.dim(i), self.src.dim(i)));
        self.maps.insert(i, m);
    }

    fn degrees(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.src.terms.keys().chain(self.tgt.terms.keys()).copied().collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn check(&self) -> Result<(), ComplexError> {
        for i in self.degrees() {
            let lhs = self.tgt.d(i).mul(&self.at(i));
            let rhs = self.at(i - 1).mul(&self.src.d(i));
            if lhs != rhs {
                return Err(ComplexError::NotChainMap(i));
            }
        }
        Ok(())
    }

    pub fn compose(&self, after: &ChainMap) -> ChainMap {
        let mut out = ChainMap::zero(&self.src, &after.tgt);
        for i in self.degrees() {
            if self.src.dim(i) > 0 && after.tgt.dim(i) > 0 {
                out.maps.insert(i, after.at(i).mul(&self.at(i)));
            }
        }
        out
    }

    pub fn add(&self, other: &ChainMap) -> ChainMap {
        let mut out = ChainMap::zero(&self.src, &self.tgt);
        for i in self.degrees() {
            out.maps.insert(i, self.at(i).add(&other.at(i)));
        }
        out
    }

    pub fn scale(&self, s: u32) -> ChainMap {
        ChainMap { maps: self.maps.iter().map(|(&i, m)| (i, m.scale(s))).collect(), ..self.clone() }
    }

    pub fn neg(&self) -> ChainMap {
        self.scale(self.src.field().p() - 1)
    }

    pub fn is_zero(&self) -> bool {
        self.maps.values().all(|m| m.is_zero())
    }

    pub fn shift(&self, k: i32) -> ChainMap {
        ChainMap {
            src: self.src.shift(k),
            tgt: self.tgt.shift(k),
            maps: self.maps.iter().map(|(&i, m)| (i + k, m.clone())).collect(),
        }
    }

    /// The same matrices read as a map between complexes with the same term
    /// dimensions.
    pub fn retarget(&self, src: &Complex, tgt: &Complex) -> ChainMap {
        for (&i, m) in &self.maps {
            assert_eq!(m.shape(), (tgt.dim(i), src.dim(i)), "retarget changes dimensions in degree {i}");
        }
        ChainMap { src: src.clone(), tgt: tgt.clone(), maps: self.maps.clone() }
    }

    /// Whether every component is invertible.
    pub fn is_isomorphism(&self) -> bool {
        self.degrees().iter().all(|&i| self.at(i).is_invertible())
    }

    /// Whether the map induces isomorphisms on homology, via acyclicity of the cone.
    pub fn is_quasi_isomorphism(&self) -> bool {
        cone(self).is_acyclic()
    }
}

/// `cone(f)_i = C_{i-1} (+) D_i`, source atoms first.
pub fn cone(f: &ChainMap) -> Complex {
    let (c, d) = (&f.src, &f.tgt);
    let mut out = Complex::zero(&c.left, &c.right);
    let degs: std::collections::BTreeSet<i32> = c.terms.keys().map(|i| i + 1).chain(d.terms.keys().copied()).collect();
    for &i in &degs {
        out.set_term(i, [c.term(i - 1), d.term(i)].concat());
    }
    let fl = c.field();
    for &i in &degs {
        let (cs, ds) = (c.dim(i - 1), d.dim(i));
        let (ct, dt) = (c.dim(i - 2), d.dim(i - 1));
        let mut m = Matrix::zeros(fl, ct + dt, cs + ds);
        m.set_block(0, 0, &c.d(i - 1).neg());
        m.set_block(ct, 0, &f.at(i - 1));
        m.set_block(ct, cs, &d.d(i));
        out.set_diff(i, m);
    }
    out
}

/// Inclusion `D -> cone(f)` and projection `cone(f) -> C[1]`.
pub fn cone_maps(f: &ChainMap) -> (ChainMap, ChainMap) {
    let k = cone(f);
    let (c, d) = (&f.src, &f.tgt);
    let fl = c.field();
    let mut inc = ChainMap::zero(d, &k);
    let sc = c.shift(1);
    let mut proj = ChainMap::zero(&k, &sc);
    for i in k.degrees() {
        let (cs, ds) = (c.dim(i - 1), d.dim(i));
        if ds > 0 {
            let mut m = Matrix::zeros(fl, cs + ds, ds);
            m.set_block(cs, 0, &Matrix::identity(fl, ds));
            inc.set(i, m);
        }
        if cs > 0 {
            let mut m = Matrix::zeros(fl, cs, cs + ds);
            m.set_block(0, 0, &Matrix::identity(fl, cs));
            proj.set(i, m);
        }
    }
    (inc, proj)
}

/// Position of one atom-pair product inside a tensor complex.
#[derive(Clone, Debug)]
pub struct TensorBlock {
    pub i: i32,
    pub u: usize,
    pub v: usize,
    /// Index of the first resulting atom in the output term.
    pub first_atom: usize,
    pub t: Arc<AtomTensor>,
}

#[derive(Clone, Debug)]
pub struct TensorComplex {
    pub complex: Complex,
    /// For each output degree, the blocks in order.
    pub blocks: BTreeMap<i32, Vec<TensorBlock>>,
}

impl TensorComplex {
    pub fn block_offset(&self, n: i32, k: usize) -> usize {
        let offs = self.complex.offsets(n);
        offs[self.blocks[&n][k].first_atom]
    }

    pub fn find(&self, n: i32, i: i32, u: usize, v: usize) -> Option<usize> {
        self.blocks.get(&n)?.iter().position(|b| b.i == i && b.u == u && b.v == v)
    }
}

pub fn tensor(c: &Complex, d: &Complex) -> Complex {
    tensor_with_layout(c, d).complex
}

pub fn tensor_with_layout(c: &Complex, d: &Complex) -> TensorComplex {
    assert!(c.right.is_same(&d.left), "tensor over mismatched algebras");
    let f = c.field();
    let mut out = Complex::zero(&c.left, &d.right);
    let mut blocks: BTreeMap<i32, Vec<TensorBlock>> = BTreeMap::new();
    for (&i, ct) in &c.terms {
        for (&j, dt) in &d.terms {
            let n = i + j;
            let entry = blocks.entry(n).or_default();
            let mut atoms = out.terms.remove(&n).unwrap_or_default();
            for (u, au) in ct.iter().enumerate() {
                for (v, av) in dt.iter().enumerate() {
                    let t = tensor_atoms(au, av);
                    entry.push(TensorBlock { i, u, v, first_atom: atoms.len(), t: t.clone() });
                    atoms.extend(t.atoms.iter().cloned());
                }
            }
            out.set_term(n, atoms);
        }
    }
    let mut tc = TensorComplex { complex: out, blocks };
    let degs: Vec<i32> = tc.blocks.keys().copied().collect();
    for &n in &degs {
        let mut m = Matrix::zeros(f, tc.complex.dim(n - 1), tc.complex.dim(n));
        let nb = tc.blocks[&n].len();
        for k in 0..nb {
            let blk = tc.blocks[&n][k].clone();
            let (i, j) = (blk.i, n - blk.i);
            let col0 = tc.block_offset(n, k);
            let du = c.term(i)[blk.u].dim();
            let dv = d.term(j)[blk.v].dim();
            // d_C (x) 1
            if c.diffs.contains_key(&i) {
                for u2 in 0..c.term(i - 1).len() {
                    let dm = c.d_block(i, u2, blk.u);
                    if dm.is_zero() {
                        continue;
                    }
                    let k2 = tc.find(n - 1, i - 1, u2, blk.v).unwrap();
                    let t2 = tc.blocks[&(n - 1)][k2].t.clone();
                    let piece = tensor_maps(&blk.t, &t2, &dm, &Matrix::identity(f, dv));
                    m.add_block(tc.block_offset(n - 1, k2), col0, &piece);
                }
            }
            // (-1)^i 1 (x) d_D
            if d.diffs.contains_key(&j) {
                let sign = f.sign(i.rem_euclid(2) == 1);
                for v2 in 0..d.term(j - 1).len() {
                    let dm = d.d_block(j, v2, blk.v);
                    if dm.is_zero() {
                        continue;
                    }
                    let k2 = tc.find(n - 1, i, blk.u, v2).unwrap();
                    let t2 = tc.blocks[&(n - 1)][k2].t.clone();
                    let piece = tensor_maps(&blk.t, &t2, &Matrix::identity(f, du), &dm).scale(sign);
                    m.add_block(tc.block_offset(n - 1, k2), col0, &piece);
                }
            }
        }
        tc.complex.set_diff(n, m);
    }
    tc
}

/// `f (x) g` for degree zero chain maps (or graded maps) `f: C -> C'`, `g: D -> D'`.
pub fn tensor_map(f: &ChainMap, g: &ChainMap) -> ChainMap {
    let src = tensor_with_layout(&f.src, &g.src);
    let tgt = tensor_with_layout(&f.tgt, &g.tgt);
    tensor_map_between(&src, &tgt, f, g)
}

pub fn tensor_map_between(src: &TensorComplex, tgt: &TensorComplex, f: &ChainMap, g: &ChainMap) -> ChainMap {
    let fl = f.src.field();
    let mut out = ChainMap::zero(&src.complex, &tgt.complex);
    for (&n, blocks) in &src.blocks {
        if tgt.complex.dim(n) == 0 {
            continue;
        }
        let mut m = Matrix::zeros(fl, tgt.complex.dim(n), src.complex.dim(n));
        for (k, blk) in blocks.iter().enumerate() {
            let (i, j) = (blk.i, n - blk.i);
            let col0 = src.block_offset(n, k);
            let fi = f.at(i);
            let gj = g.at(j);
            let (fo_src, fo_tgt) = (f.src.offsets(i), f.tgt.offsets(i));
            let (go_src, go_tgt) = (g.src.offsets(j), g.tgt.offsets(j));
            for u2 in 0..f.tgt.term(i).len() {
                let fb = fi.block(fo_tgt[u2], fo_src[blk.u], fo_tgt[u2 + 1] - fo_tgt[u2], fo_src[blk.u + 1] - fo_src[blk.u]);
                if fb.is_zero() {
                    continue;
                }
                for v2 in 0..g.tgt.term(j).len() {
                    let gb = gj.block(go_tgt[v2], go_src[blk.v], go_tgt[v2 + 1] - go_tgt[v2], go_src[blk.v + 1] - go_src[blk.v]);
                    if gb.is_zero() {
                        continue;
                    }
                    let k2 = tgt.find(n, i, u2, v2).unwrap();
                    let piece = tensor_maps(&blk.t, &tgt.blocks[&n][k2].t, &fb, &gb);
                    m.add_block(tgt.block_offset(n, k2), col0, &piece);
                }
            }
        }
        out.set(n, m);
    }
    out
}

/// Unknowns for a space of graded maps `C_i -> D_{i + shift}` built from
/// per-atom-pair hom bases.
struct HomUnknowns {
    // (degree i, src atom, tgt atom, basis matrix)
    vars: Vec<(i32, usize, usize, Matrix)>,
}

impl HomUnknowns {
    fn new(c: &Complex, d: &Complex, shift: i32) -> Self {
        let mut vars = Vec::new();
        for (&i, ct) in &c.terms {
            for (u, au) in ct.iter().enumerate() {
                for (v, av) in d.term(i + shift).iter().enumerate() {
                    for h in au.hom_basis(av) {
                        vars.push((i, u, v, h));
                    }
                }
            }
        }
        HomUnknowns { vars }
    }

    fn assemble(&self, c: &Complex, d: &Complex, shift: i32, x: &[u32]) -> BTreeMap<i32, Matrix> {
        let f = c.field();
        let mut maps: BTreeMap<i32, Matrix> = BTreeMap::new();
        for (k, (i, u, v, h)) in self.vars.iter().enumerate() {
            if x[k] == 0 {
                continue;
            }
            let m = maps.entry(*i).or_insert_with(|| Matrix::zeros(f, d.dim(i + shift), c.dim(*i)));
            let (oc, od) = (c.offsets(*i), d.offsets(i + shift));
            m.add_block(od[*v], oc[*u], &h.scale(x[k]));
        }
        maps
    }
}

/// Evaluations on atom generators: for each degree, list of (atom, generator column in term coordinates).
fn generator_columns(c: &Complex, i: i32) -> Vec<Vec<u32>> {
    let offs = c.offsets(i);
    let n = c.dim(i);
    let mut out = Vec::new();
    for (u, a) in c.term(i).iter().enumerate() {
        for g in a.generators() {
            let mut v = vec![0; n];
            v[offs[u]..offs[u] + a.dim()].copy_from_slice(&g);
            out.push(v);
        }
    }
    out
}

/// Linear map sending unknown degree zero maps `h` to the values of
/// `d h - h d` on atom generators, one block of `D_{i-1}` per generator of `C_i`.
fn chain_equations(c: &Complex, d: &Complex, unk: &HomUnknowns) -> Matrix {
    let f = c.field();
    let shift = 0;
    let mut eq_rows: BTreeMap<i32, (usize, Vec<Vec<u32>>)> = BTreeMap::new();
    let mut total = 0;
    for &i in c.terms.keys() {
        let gens = generator_columns(c, i);
        let tdim = d.dim(i + shift - 1);
        if tdim == 0 {
            continue;
        }
        eq_rows.insert(i, (total, gens.clone()));
        total += gens.len() * tdim;
    }
    let mut m = Matrix::zeros(f, total, unk.vars.len());
    for (k, (i, u, v, h)) in unk.vars.iter().enumerate() {
        let (oc, od) = (c.offsets(*i), d.offsets(i + shift));
        // Term d_D h evaluated at generators of C_i.
        if let Some((start, gens)) = eq_rows.get(i) {
            let dd = d.d(i + shift);
            let tdim = d.dim(i + shift - 1);
            let dcol = dd.block(0, od[*v], tdim, od[*v + 1] - od[*v]);
            let dh = dcol.mul(h);
            for (gi, g) in gens.iter().enumerate() {
                let part = &g[oc[*u]..oc[*u + 1]];
                if part.iter().all(|&x| x == 0) {
                    continue;
                }
                let val = dh.mul_vec(part);
                for (r, &x) in val.iter().enumerate() {
                    if x != 0 {
                        m.add_at(start + gi * tdim + r, k, x);
                    }
                }
            }
        }
        // Term (+/-) h d_C evaluated at generators of C_{i+1}.
        if let Some((start, gens)) = eq_rows.get(&(i + 1)) {
            let dc = c.d(i + 1);
            let tdim = d.dim(i + shift);
            let drow = dc.block(oc[*u], 0, oc[*u + 1] - oc[*u], dc.cols());
            let sign = f.p() - 1;
            for (gi, g) in gens.iter().enumerate() {
                let dg = drow.mul_vec(g);
                if dg.iter().all(|&x| x == 0) {
                    continue;
                }
                let val = h.mul_vec(&dg);
                for (r, &x) in val.iter().enumerate() {
                    if x != 0 {
                        m.add_at(start + gi * tdim + od[*v] + r, k, f.mul(x, sign));
                    }
                }
            }
        }
    }
    m
}

/// Basis of the space of degree zero chain maps `c -> d`.
pub fn chain_map_space(c: &Complex, d: &Complex) -> Vec<ChainMap> {
    let unk = HomUnknowns::new(c, d, 0);
    if unk.vars.is_empty() {
        return vec![];
    }
    let m = chain_equations(c, d, &unk);
    let ns = m.nullspace();
    (0..ns.cols())
        .map(|k| ChainMap { src: c.clone(), tgt: d.clone(), maps: unk.assemble(c, d, 0, &ns.column(k)) })
        .collect()
}

/// A chain isomorphism `c -> d` (every component invertible), searched as a
/// random element of the chain map space.
pub fn find_chain_iso<R: Rng>(c: &Complex, d: &Complex, rng: &mut R, trials: usize) -> Option<ChainMap> {
    if c.degrees().iter().chain(d.degrees().iter()).any(|&i| c.dim(i) != d.dim(i)) {
        return None;
    }
    let basis = chain_map_space(c, d);
    if basis.is_empty() {
        return if c.is_zero() && d.is_zero() { Some(ChainMap::zero(c, d)) } else { None };
    }
    let f = c.field();
    for _ in 0..trials.max(1) {
        let mut m = ChainMap::zero(c, d);
        for b in &basis {
            m = m.add(&b.scale(f.random(rng)));
        }
        if m.is_isomorphism() {
            return Some(m);
        }
    }
    None
}

/// A homotopy `h` with `f - g = d h + h d`, if one exists.
pub fn homotopy(f: &ChainMap, g: &ChainMap) -> Option<BTreeMap<i32, Matrix>> {
    let (c, d) = (&f.src, &f.tgt);
    let diff = f.add(&g.neg());
    let unk = HomUnknowns::new(c, d, 1);
    // Right-hand side: (f - g) on generators.
    let mut rhs = Vec::new();
    for &i in c.terms.keys() {
        let tdim = d.dim(i);
        if tdim == 0 {
            continue;
        }
        let di = diff.at(i);
        for g in generator_columns(c, i) {
            rhs.extend(di.mul_vec(&g));
        }
    }
    if rhs.iter().all(|&x| x == 0) {
        return Some(BTreeMap::new());
    }
    if unk.vars.is_empty() {
        return None;
    }
    // equation_matrix with shift 1 evaluates d h on C_i into D_i and h d into D_i.
    let m = equation_matrix_homotopy(c, d, &unk);
    let x = m.solve(&rhs)?;
    Some(unk.assemble(c, d, 1, &x))
}

fn equation_matrix_homotopy(c: &Complex, d: &Complex, unk: &HomUnknowns) -> Matrix {
    // Equations live in D_i for generators of C_i, matching the rhs layout of `homotopy`.
    let f = c.field();
    let mut starts: BTreeMap<i32, (usize, Vec<Vec<u32>>)> = BTreeMap::new();
    let mut total = 0;
    for &i in c.terms.keys() {
        let tdim = d.dim(i);
        if tdim == 0 {
            continue;
        }
        let gens = generator_columns(c, i);
        starts.insert(i, (total, gens.clone()));
        total += gens.len() * tdim;
    }
    let mut m = Matrix::zeros(f, total, unk.vars.len());
    for (k, (i, u, v, h)) in unk.vars.iter().enumerate() {
        // h: C_i -> D_{i+1}, atom u -> atom v.
        let (oc, od) = (c.offsets(*i), d.offsets(i + 1));
        // d_D h on generators of C_i, landing in D_i.
        if let Some((start, gens)) = starts.get(i) {
            let tdim = d.dim(*i);
            let dd = d.d(i + 1);
            let dcol = dd.block(0, od[*v], tdim, od[*v + 1] - od[*v]);
            let dh = dcol.mul(h);
            for (gi, g) in gens.iter().enumerate() {
                let part = &g[oc[*u]..oc[*u + 1]];
                if part.iter().all(|&x| x == 0) {
                    continue;
                }
                for (r, &x) in dh.mul_vec(part).iter().enumerate() {
                    if x != 0 {
                        m.add_at(start + gi * tdim + r, k, x);
                    }
                }
            }
        }
        // h d_C on generators of C_{i+1}, landing in D_{i+1}.
        if let Some((start, gens)) = starts.get(&(i + 1)) {
            let tdim = d.dim(i + 1);
            let dc = c.d(i + 1);
            let drow = dc.block(oc[*u], 0, oc[*u + 1] - oc[*u], dc.cols());
            for (gi, g) in gens.iter().enumerate() {
                let dg = drow.mul_vec(g);
                if dg.iter().all(|&x| x == 0) {
                    continue;
                }
                for (r, &x) in h.mul_vec(&dg).iter().enumerate() {
                    if x != 0 {
                        m.add_at(start + gi * tdim + od[*v] + r, k, x);
                    }
                }
            }
        }
    }
    m
}

pub fn homotopic(f: &ChainMap, g: &ChainMap) -> bool {
    homotopy(f, g).is_some()
}

/// Per-atom duality data: the dual atom and `theta: dual atom -> (atom)^*`
/// (in the dual basis of the atom).
fn dual_atom(a: &Atom) -> (Atom, Matrix) {
    let m = &a.module;
    let f = m.field();
    let (l, r) = (m.left().clone(), m.right().clone());
    let literal = || (Atom::general(m.dual()).with_grade(-a.grade), Matrix::identity(f, m.dim()));
    match &a.kind {
        AtomKind::Proj(i, j) => {
            let (Some(fl), Some(fr)) = (l.symmetric_form(), r.symmetric_form()) else { return literal() };
            let out = Atom::proj(&r, &l, *j, *i).with_grade(-a.grade);
            // theta(u (x) v)(x (x) y) = lambda_L(v x) lambda_R(y u).
            let xs = l.left_projective_indices(*i);
            let ys = r.right_projective_indices(*j);
            let us = r.left_projective_indices(*j);
            let vs = l.right_projective_indices(*i);
            let gl = l.gram(fl);
            let gr = r.gram(fr);
            let mut theta = Matrix::zeros(f, xs.len() * ys.len(), us.len() * vs.len());
            for (xi, &x) in xs.iter().enumerate() {
                for (yi, &y) in ys.iter().enumerate() {
                    for (ui, &u) in us.iter().enumerate() {
                        let b = gr.get(y, u);
                        if b == 0 {
                            continue;
                        }
                        for (vi, &v) in vs.iter().enumerate() {
                            let c = gl.get(v, x);
                            if c != 0 {
                                theta.set(xi * ys.len() + yi, ui * vs.len() + vi, f.mul(b, c));
                            }
                        }
                    }
                }
            }
            (out, theta)
        }
        AtomKind::Regular => {
            let Some(fa) = l.symmetric_form() else { return literal() };
            (Atom::regular(&l).with_grade(-a.grade), l.gram(fa).transpose())
        }
        AtomKind::LeftCorner(c) => {
            let Some(fa) = c.ambient.symmetric_form() else { return literal() };
            let g = c.ambient.gram(fa);
            let (xs, us) = (c.left_indices(), c.right_indices());
            let mut theta = Matrix::zeros(f, xs.len(), us.len());
            for (xi, &x) in xs.iter().enumerate() {
                for (ui, &u) in us.iter().enumerate() {
                    theta.set(xi, ui, g.get(u, x));
                }
            }
            (Atom::right_corner(c).with_grade(-a.grade), theta)
        }
        AtomKind::RightCorner(c) => {
            let Some(fa) = c.ambient.symmetric_form() else { return literal() };
            let g = c.ambient.gram(fa);
            let (us, xs) = (c.right_indices(), c.left_indices());
            let mut theta = Matrix::zeros(f, us.len(), xs.len());
            for (ui, &u) in us.iter().enumerate() {
                for (xi, &x) in xs.iter().enumerate() {
                    theta.set(ui, xi, g.get(x, u));
                }
            }
            (Atom::left_corner(c).with_grade(-a.grade), theta)
        }
        AtomKind::General => literal(),
    }
}

/// The `k`-dual complex: `(C^*)_{-i} = (C_i)^*` with transposed differentials,
/// expressed in dual atoms of the same kind when symmetric forms are available.
pub fn dualize(c: &Complex) -> Complex {
    let f = c.field();
    let mut out = Complex::zero(&c.right, &c.left);
    let mut thetas: BTreeMap<i32, (Vec<Matrix>, Vec<Matrix>)> = BTreeMap::new();
    for (&i, t) in &c.terms {
        let mut atoms = Vec::new();
        let mut th = Vec::new();
        let mut thinv = Vec::new();
        for a in t {
            let (da, theta) = dual_atom(a);
            thinv.push(theta.inverse().expect("duality pairing is nondegenerate"));
            th.push(theta);
            atoms.push(da);
        }
        out.set_term(-i, atoms);
        thetas.insert(-i, (th, thinv));
    }
    for &i in c.terms.keys() {
        // d_i: C_i -> C_{i-1} dualizes to (C_{i-1})^* -> (C_i)^*, degree 1-i -> -i.
        let d = c.d(i);
        if d.is_zero() || c.dim(i - 1) == 0 {
            continue;
        }
        let dt = d.transpose();
        let (th_src, _) = &thetas[&(1 - i)];
        let (_, thinv_tgt) = &thetas[&(-i)];
        let theta_src = Matrix::block_diag(f, &th_src.iter().collect::<Vec<_>>());
        let thinv_t = Matrix::block_diag(f, &thinv_tgt.iter().collect::<Vec<_>>());
        out.set_diff(1 - i, thinv_t.mul(&dt).mul(&theta_src));
    }
    out
}

#[derive(Clone, Debug)]
pub struct TiltingComparison {
    pub degree: i32,
    pub invertible: Invertible,
    pub homology: Vec<(i32, usize)>,
}

/// Compares two two-sided tilting complexes: `c (x) d^*` should have homology
/// `A_s` in a single degree `k`, meaning `c = A_s[k] (x) d`.
pub fn compare_tilting<R: Rng>(c: &Complex, d: &Complex, rng: &mut R, trials: usize) -> Result<TiltingComparison, ComplexError> {
    if !c.left.is_same(&d.left) || !c.right.is_same(&d.right) {
        return Err(ComplexError::AlgebraMismatch("complexes live over different algebras".into()));
    }
    let t = tensor(c, &dualize(d)).minimize();
    let (k, _) = t.concentrated()?;
    let h = t.homology(k);
    let inv = identify_invertible(&h, rng, trials)?;
    Ok(TiltingComparison { degree: k, invertible: inv, homology: t.homology_dims() })
}
