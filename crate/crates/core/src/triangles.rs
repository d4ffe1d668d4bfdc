//! Products of two triangles `X_1 -> X_2 -> X_3 ->` and `Y_1 -> Y_2 -> Y_3 ->`
//! given by cones: the object `kappa`, its triangles, and the grid of the nine
//! tensor products with its one anticommuting square.

use rand::Rng;
use serde_json::json;

use crate::algebra::Alg;
use crate::bimodule::Atom;
use crate::complex::{
    chain_map_space, cone, cone_maps, homotopic, tensor, tensor_map, tensor_with_layout, ChainMap, Complex, TensorComplex,
};
use crate::field::Matrix;
use crate::report::TriangleReport;
use crate::twist::spherical_twist_complex;

/// `X_1 -> X_2 -> cone -> X_1[1]` for a chain map `alpha`.
#[derive(Clone, Debug)]
pub struct Triangle {
    pub alpha: ChainMap,
    pub beta: ChainMap,
    pub gamma: ChainMap,
}

impl Triangle {
    pub fn of(alpha: &ChainMap) -> Self {
        let (beta, gamma) = cone_maps(alpha);
        Triangle { alpha: alpha.clone(), beta, gamma }
    }

    pub fn x1(&self) -> &Complex {
        &self.alpha.src
    }

    pub fn x2(&self) -> &Complex {
        &self.alpha.tgt
    }

    pub fn x3(&self) -> &Complex {
        &self.beta.tgt
    }
}

fn id(c: &Complex) -> ChainMap {
    c.identity_map()
}

fn block_dim(t: &TensorComplex, n: i32, k: usize) -> usize {
    let b = &t.blocks[&n][k];
    let offs = t.complex.offsets(n);
    offs[b.first_atom + b.t.atoms.len()] - offs[b.first_atom]
}

/// `X (x) Y[1] -> (X (x) Y)[1]`, `x (x) y -> (-1)^|x| x (x) y`. With `signed`
/// false the sign is dropped, which is wrong and serves as a negative control.
pub fn shift_out_right(x: &Complex, y: &Complex, signed: bool) -> ChainMap {
    let t = tensor_with_layout(x, &y.shift(1));
    let tgt = tensor(x, y).shift(1);
    let f = x.field();
    let mut m = ChainMap::zero(&t.complex, &tgt);
    for (&n, blocks) in &t.blocks {
        let mut d = Matrix::zeros(f, t.complex.dim(n), t.complex.dim(n));
        for (k, b) in blocks.iter().enumerate() {
            let s = f.sign(signed && b.i.rem_euclid(2) == 1);
            let o = t.block_offset(n, k);
            for r in 0..block_dim(&t, n, k) {
                d.set(o + r, o + r, s);
            }
        }
        m.set(n, d);
    }
    m
}

/// `gamma_X (x) Y` read as a map `X_3 Y -> (X_1 Y)[1]`.
fn gamma_left(tx: &Triangle, y: &Complex) -> ChainMap {
    let g = tensor_map(&tx.gamma, &id(y));
    let tgt = tensor(tx.x1(), y).shift(1);
    g.retarget(&g.src.clone(), &tgt)
}

/// `X (x) gamma_Y` followed by the sign isomorphism, `X Y_3 -> (X Y_1)[1]`.
fn gamma_right(x: &Complex, ty: &Triangle, signed: bool) -> ChainMap {
    tensor_map(&id(x), &ty.gamma).compose(&shift_out_right(x, ty.x1(), signed))
}

/// `kappa = cone(X_1Y_1 -> X_1Y_2 (+) X_2Y_1)` for the map `(X_1 f_Y, -f_X Y_1)`,
/// together with the map `v: kappa -> X_2Y_2` given by `(0, f_X Y_2, X_2 f_Y)`.
#[derive(Clone, Debug)]
pub struct Kappa {
    pub kappa: Complex,
    pub u: ChainMap,
    pub v: ChainMap,
    pub include: ChainMap,
}

fn stack_maps(maps: &[&ChainMap], src: &Complex, tgt: &Complex, vertical: bool) -> ChainMap {
    let f = src.field();
    let mut out = ChainMap::zero(src, tgt);
    for i in src.degrees().into_iter().chain(tgt.degrees()) {
        let mut m = Matrix::zeros(f, if vertical { 0 } else { tgt.dim(i) }, if vertical { src.dim(i) } else { 0 });
        for g in maps {
            m = if vertical { m.vstack(&g.at(i)) } else { m.hstack(&g.at(i)) };
        }
        if m.shape() == (tgt.dim(i), src.dim(i)) {
            out.set(i, m);
        }
    }
    out
}

pub fn build_kappa(tx: &Triangle, ty: &Triangle) -> Kappa {
    let (x1, x2) = (tx.x1(), tx.x2());
    let (y1, y2) = (ty.x1(), ty.x2());
    let t11 = tensor(x1, y1);
    let t12 = tensor(x1, y2);
    let t21 = tensor(x2, y1);
    let t22 = tensor(x2, y2);
    let sum = t12.direct_sum(&t21);
    let a = tensor_map(&id(x1), &ty.alpha);
    let b = tensor_map(&tx.alpha, &id(y1)).neg();
    let u = stack_maps(&[&a, &b], &t11, &sum, true);
    let kappa = cone(&u);
    let (include, _) = cone_maps(&u);
    // v vanishes on the X_1Y_1[1] summand.
    let zero = ChainMap::zero(&t11.shift(1), &t22);
    let v1 = tensor_map(&tx.alpha, &id(y2));
    let v2 = tensor_map(&id(x2), &ty.alpha);
    let v = stack_maps(&[&zero, &v1, &v2], &kappa, &t22, false);
    Kappa { kappa, u, v, include }
}

/// The diagonal isomorphism `cone(v) -> X_3 (x) Y_3`, with sign `(-1)^|x|` on
/// the summands coming from `X_1Y_1[2]` and `X_2Y_1[1]`.
pub fn kappa_comparison(tx: &Triangle, ty: &Triangle, k: &Kappa) -> ChainMap {
    let (x1, x2) = (tx.x1(), tx.x2());
    let (y1, y2) = (ty.x1(), ty.x2());
    let lay = [
        tensor_with_layout(x1, y1),
        tensor_with_layout(x1, y2),
        tensor_with_layout(x2, y1),
        tensor_with_layout(x2, y2),
    ];
    let src = cone(&k.v);
    let tgt = tensor_with_layout(tx.x3(), ty.x3());
    let f = src.field();
    let mut theta = ChainMap::zero(&src, &tgt.complex);
    for (&n, blocks) in &tgt.blocks {
        let mut m = Matrix::zeros(f, tgt.complex.dim(n), src.dim(n));
        // Offsets in cone(v)_n = X1Y1_{n-2} (+) X1Y2_{n-1} (+) X2Y1_{n-1} (+) X2Y2_n.
        let d11 = lay[0].complex.dim(n - 2);
        let d12 = lay[1].complex.dim(n - 1);
        let d21 = lay[2].complex.dim(n - 1);
        let base = [0, d11, d11 + d12, d11 + d12 + d21];
        for (kb, b) in blocks.iter().enumerate() {
            let j = n - b.i;
            let nx1 = x1.term(b.i - 1).len();
            let ny1 = y1.term(j - 1).len();
            let (xs, xi, xu) = if b.u < nx1 { (0, b.i - 1, b.u) } else { (1, b.i, b.u - nx1) };
            let (ys, yj, yv) = if b.v < ny1 { (0, j - 1, b.v) } else { (1, j, b.v - ny1) };
            let which = 2 * xs + ys;
            let l = &lay[which];
            let deg = xi + yj;
            let kk = l.find(deg, xi, xu, yv).expect("matching block");
            let sign = match which {
                0 | 2 => f.sign(xi.rem_euclid(2) == 1),
                _ => 1,
            };
            let (r0, c0) = (tgt.block_offset(n, kb), base[which] + l.block_offset(deg, kk));
            for r in 0..block_dim(&tgt, n, kb) {
                m.set(r0 + r, c0 + r, sign);
            }
        }
        theta.set(n, m);
    }
    theta
}

/// Builds `kappa` and checks its triangles: the composites into `X_2Y_2`,
/// the Mayer-Vietoris triangle, and `cone(kappa -> X_2Y_2) = X_3Y_3` through
/// an explicit comparison map.
pub fn kappa(fx: &ChainMap, fy: &ChainMap) -> (Complex, TriangleReport) {
    let (tx, ty) = (Triangle::of(fx), Triangle::of(fy));
    let k = build_kappa(&tx, &ty);
    let mut rep = TriangleReport::new("kappa");
    if !rep.check("inputs are chain maps", fx.check().is_ok() && fy.check().is_ok(), json!(null)) {
        return (k.kappa, rep);
    }
    let (x2, y1, y2) = (tx.x2(), ty.x1(), ty.x2());
    let x1 = tx.x1();
    rep.check("kappa is a complex", k.kappa.check().is_ok(), k.kappa.summary());
    rep.check("u and v are chain maps", k.u.check().is_ok() && k.v.check().is_ok(), json!(null));

    // Inclusions of X_1Y_2 and X_2Y_1 into kappa.
    let d12 = tensor(x1, y2);
    let d21 = tensor(x2, y1);
    let f = x1.field();
    let mut inc12 = ChainMap::zero(&d12, &k.kappa);
    let mut inc21 = ChainMap::zero(&d21, &k.kappa);
    let t11 = &k.u.src;
    for i in k.kappa.degrees() {
        let (a, b, c) = (t11.dim(i - 1), d12.dim(i), d21.dim(i));
        let mut m = Matrix::zeros(f, a + b + c, b);
        m.set_block(a, 0, &Matrix::identity(f, b));
        inc12.set(i, m);
        let mut m = Matrix::zeros(f, a + b + c, c);
        m.set_block(a + b, 0, &Matrix::identity(f, c));
        inc21.set(i, m);
    }
    let c21 = inc21.compose(&k.v);
    let c12 = inc12.compose(&k.v);
    rep.check("X2Y1 -> kappa -> X2Y2 is X2 f_Y", homotopic(&c21, &tensor_map(&id(x2), fy)), json!(null));
    rep.check("X1Y2 -> kappa -> X2Y2 is f_X Y2", homotopic(&c12, &tensor_map(fx, &id(y2))), json!(null));

    // Mayer-Vietoris: consecutive composites vanish up to homotopy.
    let mv1 = k.u.compose(&k.include);
    rep.check("Mayer-Vietoris composite X1Y1 -> kappa", homotopic(&mv1, &ChainMap::zero(&mv1.src, &mv1.tgt)), json!(null));
    let (_, proj) = cone_maps(&k.u);
    let mv2 = proj.compose(&k.u.shift(1));
    rep.check("Mayer-Vietoris composite kappa -> (X1Y2 (+) X2Y1)[1]", homotopic(&mv2, &ChainMap::zero(&mv2.src, &mv2.tgt)), json!(null));

    let theta = kappa_comparison(&tx, &ty, &k);
    let ok = theta.check().is_ok() && theta.is_isomorphism();
    let (h1, h2) = (theta.src.homology_dims(), theta.tgt.homology_dims());
    rep.check("cone(kappa -> X2Y2) is isomorphic to X3Y3", ok && h1 == h2, json!({ "homology": h2 }));
    let (inc22, _) = cone_maps(&k.v);
    let bb = tensor_map(&tx.beta, &ty.beta);
    let through = inc22.compose(&theta);
    let same = bb.tgt.degrees().iter().all(|&i| through.at(i) == bb.at(i));
    rep.check("X2Y2 -> X3Y3 through the comparison is beta (x) beta", same, json!(null));
    let vb = k.v.compose(&bb);
    rep.check("kappa -> X2Y2 -> X3Y3 vanishes up to homotopy", homotopic(&vb, &ChainMap::zero(&vb.src, &vb.tgt)), json!(null));
    (k.kappa, rep)
}

/// The 4x4 grid with rows indexed by `Y` and columns by `X`; the last row and
/// column are shifts of the first, with the final maps negated.
pub struct Grid {
    /// `h[r][c]: O[r][c] -> O[r][c+1]`.
    pub h: Vec<Vec<ChainMap>>,
    /// `v[r][c]: O[r][c] -> O[r+1][c]`.
    pub v: Vec<Vec<ChainMap>>,
}

pub fn build_grid(tx: &Triangle, ty: &Triangle, signed: bool) -> Grid {
    let xs = [tx.x1(), tx.x2(), tx.x3()];
    let ys = [ty.x1(), ty.x2(), ty.x3()];
    let mut h = vec![Vec::new(); 4];
    let mut v = vec![Vec::new(); 3];
    for (r, y) in ys.iter().enumerate() {
        h[r].push(tensor_map(&tx.alpha, &id(y)));
        h[r].push(tensor_map(&tx.beta, &id(y)));
        h[r].push(gamma_left(tx, y));
    }
    let last: Vec<ChainMap> = (0..3).map(|c| if c < 2 { h[0][c].shift(1) } else { h[0][c].shift(1).neg() }).collect();
    h[3] = last;
    for x in xs {
        v[0].push(tensor_map(&id(x), &ty.alpha));
        v[1].push(tensor_map(&id(x), &ty.beta));
        v[2].push(gamma_right(x, ty, signed));
    }
    for r in 0..3 {
        let m = if r < 2 { v[r][0].shift(1) } else { v[r][0].shift(1).neg() };
        v[r].push(m);
    }
    Grid { h, v }
}

fn grid_report(tx: &Triangle, ty: &Triangle, signed: bool) -> TriangleReport {
    let g = build_grid(tx, ty, signed);
    let mut rep = TriangleReport::new("grid");
    let all_chain = g.h.iter().chain(g.v.iter()).flatten().all(|m| m.check().is_ok());
    rep.check("all grid maps are chain maps", all_chain, json!(null));
    for r in 0..3 {
        for c in 0..3 {
            let right_down = g.h[r][c].compose(&g.v[r][c + 1]);
            let down_right = g.v[r][c].compose(&g.h[r + 1][c]);
            if r == 2 && c == 2 {
                let sum = right_down.add(&down_right);
                let ok = homotopic(&sum, &ChainMap::zero(&sum.src, &sum.tgt));
                rep.check("square (3,3) anticommutes", ok, json!(null));
            } else {
                rep.check(format!("square ({},{}) commutes", r + 1, c + 1), homotopic(&right_down, &down_right), json!(null));
            }
        }
    }
    rep
}

pub fn braid_grid_check(fx: &ChainMap, fy: &ChainMap) -> TriangleReport {
    grid_report(&Triangle::of(fx), &Triangle::of(fy), true)
}

/// The grid with the sign of `X (x) Y[1] -> (X (x) Y)[1]` dropped.
pub fn braid_grid_check_unsigned(fx: &ChainMap, fy: &ChainMap) -> TriangleReport {
    grid_report(&Triangle::of(fx), &Triangle::of(fy), false)
}

/// A small complex over `a`: a projective or regular stalk, two projectives,
/// or a spherical twist.
pub fn random_small_complex<R: Rng>(a: &Alg, rng: &mut R) -> Complex {
    let n = a.nvert();
    let deg = rng.gen_range(0..2);
    match rng.gen_range(0..4) {
        0 => Complex::stalk(a, a, deg, vec![Atom::proj(a, a, rng.gen_range(0..n), rng.gen_range(0..n))]),
        1 => Complex::stalk(a, a, deg, vec![Atom::regular(a)]),
        2 => Complex::stalk(
            a,
            a,
            deg,
            vec![Atom::proj(a, a, rng.gen_range(0..n), rng.gen_range(0..n)), Atom::proj(a, a, rng.gen_range(0..n), rng.gen_range(0..n))],
        ),
        _ => spherical_twist_complex(a, rng.gen_range(0..n)).expect("zigzag vertices are spherical"),
    }
}

/// A random combination of a basis of chain maps `c -> d`.
pub fn random_chain_map<R: Rng>(c: &Complex, d: &Complex, rng: &mut R) -> ChainMap {
    let f = c.field();
    let mut m = ChainMap::zero(c, d);
    for b in chain_map_space(c, d) {
        m = m.add(&b.scale(f.random(rng)));
    }
    m
}

/// A random chain map between random small complexes, nonzero when the hom
/// space allows.
pub fn random_map<R: Rng>(a: &Alg, rng: &mut R) -> ChainMap {
    let mut m = None;
    for _ in 0..8 {
        let c = random_small_complex(a, rng);
        let d = random_small_complex(a, rng);
        let f = random_chain_map(&c, &d, rng);
        if !f.is_zero() {
            return f;
        }
        m = Some(f);
    }
    m.unwrap()
}
