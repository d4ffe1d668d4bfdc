//! The zigzag algebras, preprojective algebras of type A, their standard
//! automorphisms, and quadratic duality of presentations.

use crate::algebra::{build_path_algebra, Alg, AlgebraError, AlgebraMap, Arrow, Presentation, Relation};
use crate::field::{Field, Matrix};

fn arrow(name: String, src: usize, tgt: usize, deg: i32) -> Arrow {
    Arrow { name, src, tgt, deg }
}

fn max_degree(n: usize) -> i32 {
    4 * n as i32 + 8
}

/// Arrow indices of the zigzag quiver: `a_i: i -> i+1` for `1 <= i < n`
/// come first, then `b_j: j -> j-1` for `2 <= j <= n`. Indices are 1-based
/// in names and arguments here, 0-based in the returned arrow index.
pub fn gamma_alpha(n: usize, i: usize) -> usize {
    assert!(n >= 2 && (1..n).contains(&i));
    i - 1
}

pub fn gamma_beta(n: usize, j: usize) -> usize {
    assert!(n >= 2 && (2..=n).contains(&j));
    n - 1 + j - 2
}

pub fn gamma_presentation(n: usize) -> Presentation {
    assert!(n >= 1);
    if n == 1 {
        return Presentation {
            nvert: 1,
            arrows: vec![arrow("x".into(), 0, 0, 2)],
            relations: vec![vec![(1, vec![0, 0])]],
        };
    }
    let mut arrows = Vec::new();
    for i in 1..n {
        arrows.push(arrow(format!("a{i}"), i - 1, i, 1));
    }
    for j in 2..=n {
        arrows.push(arrow(format!("b{j}"), j - 1, j - 2, 1));
    }
    let (a, b) = (|i| gamma_alpha(n, i), |j| gamma_beta(n, j));
    let relations: Vec<Relation> = if n == 2 {
        vec![vec![(1, vec![a(1), b(2), a(1)])], vec![(1, vec![b(2), a(1), b(2)])]]
    } else {
        let mut r = Vec::new();
        for i in 2..n {
            r.push(vec![(1, vec![a(i - 1), a(i)])]);
            r.push(vec![(1, vec![b(i + 1), b(i)])]);
            r.push(vec![(1, vec![a(i), b(i + 1)]), (-1, vec![b(i), a(i - 1)])]);
        }
        r
    };
    Presentation { nvert: n, arrows, relations }
}

/// The zigzag algebra on `n` vertices; for `n = 1` this is `k[x]/x^2` with `x`
/// in degree 2.
pub fn gamma(field: Field, n: usize) -> Alg {
    build_path_algebra(field, format!("Gamma{n}"), gamma_presentation(n), max_degree(n))
        .expect("zigzag presentation is finite dimensional")
}

pub fn pi_x(i: usize) -> usize {
    i - 1
}

pub fn pi_y(n: usize, j: usize) -> usize {
    n - 1 + j - 2
}

pub fn preprojective_presentation(n: usize) -> Presentation {
    assert!(n >= 1);
    let mut arrows = Vec::new();
    for i in 1..n {
        arrows.push(arrow(format!("x{i}"), i - 1, i, 1));
    }
    for j in 2..=n {
        arrows.push(arrow(format!("y{j}"), j - 1, j - 2, 1));
    }
    let mut relations: Vec<Relation> = Vec::new();
    if n >= 2 {
        let (x, y) = (pi_x, |j| pi_y(n, j));
        relations.push(vec![(1, vec![x(1), y(2)])]);
        for i in 2..n {
            relations.push(vec![(1, vec![x(i), y(i + 1)]), (-1, vec![y(i), x(i - 1)])]);
        }
        relations.push(vec![(1, vec![y(n), x(n - 1)])]);
    }
    Presentation { nvert: n, arrows, relations }
}

pub fn preprojective(field: Field, n: usize) -> Alg {
    build_path_algebra(field, format!("Pi{n}"), preprojective_presentation(n), max_degree(n))
        .expect("preprojective presentation is finite dimensional")
}

/// Path algebra of `1 -> 2 -> ... -> n`.
pub fn linear_orientation(field: Field, n: usize) -> Alg {
    let arrows = (1..n).map(|i| arrow(format!("a{i}"), i - 1, i, 1)).collect();
    let pres = Presentation { nvert: n, arrows, relations: vec![] };
    build_path_algebra(field, format!("kA{n}"), pres, max_degree(n)).expect("acyclic quiver")
}

/// The surjection from the preprojective algebra sending `x_i` to `a_i` and
/// every `y_j` to zero.
pub fn preprojective_to_linear(pi: &Alg, lin: &Alg) -> AlgebraMap {
    let n = pi.nvert();
    let mut imgs = Vec::new();
    for i in 1..n {
        imgs.push(lin.basis_vector(lin.generators()[i - 1]));
    }
    for _ in 2..=n {
        imgs.push(vec![0; lin.dim()]);
    }
    AlgebraMap::from_generator_images(pi, lin, &(0..n).collect::<Vec<_>>(), &imgs).expect("surjection is a homomorphism")
}

fn signed_gen(a: &Alg, g: usize, neg: bool) -> Vec<u32> {
    let f = a.field();
    let mut v = vec![0; a.dim()];
    v[a.generators()[g]] = f.sign(neg);
    v
}

/// Reflection of the zigzag algebra: `e_i -> e_{n+1-i}`, `a_i <-> b_{n+1-i}`;
/// on `k[x]/x^2` it is `x -> -x`.
pub fn tau(a: &Alg) -> AlgebraMap {
    let n = a.nvert();
    let verts: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
    let imgs: Vec<Vec<u32>> = if n == 1 {
        vec![signed_gen(a, 0, true)]
    } else {
        let mut v = Vec::new();
        for i in 1..n {
            v.push(signed_gen(a, gamma_beta(n, n + 1 - i), false));
        }
        for j in 2..=n {
            v.push(signed_gen(a, gamma_alpha(n, n + 1 - j), false));
        }
        v
    };
    AlgebraMap::from_generator_images(a, a, &verts, &imgs).expect("reflection is an automorphism")
}

/// Scales every `a_i` by `-1` and fixes every `b_j`; on `k[x]/x^2` it is
/// `x -> -x`. Not inner: it negates the socle of each `e_i A e_i`.
pub fn sign_flip(a: &Alg) -> AlgebraMap {
    let n = a.nvert();
    let imgs: Vec<Vec<u32>> = if n == 1 {
        vec![signed_gen(a, 0, true)]
    } else {
        (0..2 * (n - 1)).map(|g| signed_gen(a, g, g < n - 1)).collect()
    };
    AlgebraMap::from_generator_images(a, a, &(0..n).collect::<Vec<_>>(), &imgs).expect("sign flip is an automorphism")
}

/// The automorphism of the preprojective algebra induced by [`tau`]:
/// `x_i -> (-1)^(n-i) y_{n+1-i}` and `y_j -> (-1)^(j-1) x_{n+1-j}`.
pub fn tau_dual(pi: &Alg) -> AlgebraMap {
    let n = pi.nvert();
    let verts: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
    let mut imgs = Vec::new();
    for i in 1..n {
        imgs.push(signed_gen(pi, pi_y(n, n + 1 - i), (n - i) % 2 == 1));
    }
    for j in 2..=n {
        imgs.push(signed_gen(pi, pi_x(n + 1 - j), (j - 1) % 2 == 1));
    }
    AlgebraMap::from_generator_images(pi, pi, &verts, &imgs).expect("induced reflection is an automorphism")
}

/// Quadratic dual presentation. Each arrow `a: i -> j` gives `a*: j -> i`; the
/// dual path `b* a*` pairs to 1 with `a b`, and the dual relations span the
/// annihilator of the relations inside length-two paths.
pub fn quadratic_dual(field: Field, pres: &Presentation) -> Result<Presentation, AlgebraError> {
    for a in &pres.arrows {
        if a.deg != 1 {
            return Err(AlgebraError::NotQuadratic(format!("arrow {} has degree {}", a.name, a.deg)));
        }
    }
    let arrows = &pres.arrows;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, a) in arrows.iter().enumerate() {
        for (j, b) in arrows.iter().enumerate() {
            if a.tgt == b.src {
                pairs.push((i, j));
            }
        }
    }
    let mut rel = Matrix::zeros(field, pres.relations.len(), pairs.len());
    for (r, relation) in pres.relations.iter().enumerate() {
        for (c, path) in relation {
            if path.len() != 2 {
                return Err(AlgebraError::NotQuadratic(format!("relation term of length {}", path.len())));
            }
            let k = pairs.iter().position(|&(x, y)| x == path[0] && y == path[1]).unwrap();
            rel.add_at(r, k, field.elt(*c));
        }
    }
    let perp = rel.nullspace();
    let dual_arrows: Vec<Arrow> =
        arrows.iter().map(|a| Arrow { name: format!("{}*", a.name), src: a.tgt, tgt: a.src, deg: 1 }).collect();
    let relations = (0..perp.cols())
        .map(|c| {
            (0..pairs.len())
                .filter(|&k| perp.get(k, c) != 0)
                .map(|k| (field.signed(perp.get(k, c)), vec![pairs[k].1, pairs[k].0]))
                .collect()
        })
        .collect();
    Ok(Presentation { nvert: pres.nvert, arrows: dual_arrows, relations })
}

pub fn realize(field: Field, name: impl Into<String>, pres: Presentation) -> Result<Alg, AlgebraError> {
    let n = pres.nvert;
    build_path_algebra(field, name, pres, max_degree(n) + 16)
}

/// The isomorphism from the preprojective algebra onto the realized dual of
/// the zigzag presentation: `x_i -> b_{i+1}*`, `y_j -> (-1)^(j-1) a_{j-1}*`.
pub fn preprojective_to_dual(pi: &Alg, dual: &Alg) -> Result<AlgebraMap, AlgebraError> {
    let n = pi.nvert();
    let mut imgs = Vec::new();
    for i in 1..n {
        imgs.push(signed_gen(dual, gamma_beta(n, i + 1), false));
    }
    for j in 2..=n {
        imgs.push(signed_gen(dual, gamma_alpha(n, j - 1), (j - 1) % 2 == 1));
    }
    AlgebraMap::from_generator_images(pi, dual, &(0..n).collect::<Vec<_>>(), &imgs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_dimensions() {
        let f = Field::default();
        assert_eq!(gamma(f, 1).dim(), 2);
        assert_eq!(gamma(f, 2).dim(), 6);
        for n in 3..=6 {
            assert_eq!(gamma(f, n).dim(), 4 * n - 2);
        }
        let g4 = gamma(f, 4);
        let proj: Vec<usize> = (0..4).map(|i| g4.left_projective_indices(i).len()).collect();
        assert_eq!(proj, vec![3, 4, 4, 3]);
    }

    #[test]
    fn preprojective_dimensions() {
        let f = Field::default();
        for n in 1..=5 {
            assert_eq!(preprojective(f, n).dim(), n * (n + 1) * (n + 2) / 6);
        }
    }

    #[test]
    fn reflections_are_involutions() {
        let f = Field::default();
        for n in 1..=5 {
            let g = gamma(f, n);
            let t = tau(&g);
            assert!(t.compose(&t).is_identity());
            let p = preprojective(f, n);
            let td = tau_dual(&p);
            assert!(td.compose(&td).is_identity());
        }
    }

    #[test]
    fn dual_of_zigzag_is_preprojective() {
        let f = Field::default();
        for n in 3..=5 {
            let dual = quadratic_dual(f, &gamma_presentation(n)).unwrap();
            let d = realize(f, "dual", dual).unwrap();
            let p = preprojective(f, n);
            let iso = preprojective_to_dual(&p, &d).unwrap();
            assert!(iso.is_bijective());
        }
        assert!(quadratic_dual(f, &gamma_presentation(1)).is_err());
        assert!(quadratic_dual(f, &gamma_presentation(2)).is_err());
    }
}
