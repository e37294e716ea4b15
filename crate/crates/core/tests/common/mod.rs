#![allow(dead_code)]

use tropfan::balancing::Weight;
use tropfan::linalg::{int, Int};
use tropfan::matroid::{bergman_fan, Matroid};
use tropfan::piecewise::{tropical_modification, ConewiseLinear};
use tropfan::Fan;

pub fn fan(rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Fan {
    Fan::from_i64(rank, rays, cones).expect("fixture fan")
}

pub fn reduced(f: Fan) -> (Fan, Weight) {
    let w = Weight::reduced(&f);
    (f, w)
}

pub fn lambda(n: usize) -> Fan {
    Fan::line_power(n)
}

/// Rays e1, -e1, e2, -e2 as 1-cones.
pub fn cross() -> Fan {
    fan(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[&[0], &[1], &[2], &[3]])
}

/// One-dimensional fan with rays (1,0), (1,-3), (-2,3); unimodular, not saturated.
pub fn torsion_line() -> Fan {
    fan(2, &[&[1, 0], &[1, -3], &[-2, 3]], &[&[0], &[1], &[2]])
}

/// Complete fan on the same three rays; saturated but not unimodular.
pub fn torsion_complete() -> Fan {
    fan(2, &[&[1, 0], &[1, -3], &[-2, 3]], &[&[0, 1], &[1, 2], &[0, 2]])
}

pub fn tropical_line() -> Fan {
    fan(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0], &[1], &[2]])
}

pub fn u33() -> Fan {
    bergman_fan(&Matroid::uniform(3, 3).unwrap()).unwrap().fan
}

pub fn u24() -> Fan {
    bergman_fan(&Matroid::uniform(2, 4).unwrap()).unwrap().fan
}

/// 1-skeleton of the U33 Bergman fan.
pub fn u33_skeleton() -> Fan {
    fan(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1], &[1, 1], &[-1, -1]], &[&[0], &[1], &[2], &[3], &[4], &[5]])
}

/// `min(0, x, y, x + y)` on Λ².
pub fn min_function() -> ConewiseLinear {
    ConewiseLinear::from_ints(&[0, -1, 0, -1])
}

pub fn lambda2_modification() -> (Fan, Weight) {
    let l = lambda(2);
    let m = tropical_modification(&l, &Weight::reduced(&l), &min_function()).unwrap();
    (m.fan, m.weight)
}

/// `f = -x` on x ≥ 0, `y` on y ≥ 0, 0 elsewhere, on the cross.
pub fn degenerate_function() -> ConewiseLinear {
    ConewiseLinear::from_ints(&[-1, 0, 1, 0])
}

pub fn degenerate_modification() -> (Fan, Weight) {
    let c = cross();
    let m = tropical_modification(&c, &Weight::reduced(&c), &degenerate_function()).unwrap();
    (m.fan, m.weight)
}

/// Fan over the edges of the cube `[-1,1]^3`, in the lattice spanned by the
/// vertices, with basis (1,1,1), (2,0,0), (0,2,0).
pub fn cube() -> Fan {
    let verts: Vec<[i64; 3]> = (0..8).map(|m| [if m & 1 == 0 { 1 } else { -1 }, if m & 2 == 0 { 1 } else { -1 }, if m & 4 == 0 { 1 } else { -1 }]).collect();
    let rays: Vec<Vec<Int>> = verts.iter().map(|v| cube_coords(*v)).collect();
    let mut cones = Vec::new();
    for a in 0..8usize {
        for b in a + 1..8 {
            if (a ^ b).count_ones() == 1 {
                cones.push(vec![a, b]);
            }
        }
    }
    Fan::new(3, rays, cones, true).expect("cube fan")
}

/// Coordinates of a vector of `Z^3` in the basis (1,1,1), (2,0,0), (0,2,0).
pub fn cube_coords(v: [i64; 3]) -> Vec<Int> {
    let c = v[2];
    assert!((v[0] - c) % 2 == 0 && (v[1] - c) % 2 == 0, "outside the vertex lattice");
    vec![int(c), int((v[0] - c) / 2), int((v[1] - c) / 2)]
}

/// U34 Bergman fan keeping the rays of the flats 0, 1, 2, 3, 01, 23.
pub fn u34_partial() -> Fan {
    // e_F = ind(F \ 0) - [0 ∈ F]·(1,1,1)
    fan(
        3,
        &[&[-1, -1, -1], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[0, -1, -1], &[0, 1, 1]],
        &[&[0, 4], &[1, 4], &[2, 5], &[3, 5], &[0, 2], &[0, 3], &[1, 2], &[1, 3]],
    )
}

/// Every fixture with at most six rays.
pub fn small_fixtures() -> Vec<(&'static str, Fan)> {
    vec![
        ("line", lambda(1)),
        ("lambda2", lambda(2)),
        ("lambda3", lambda(3)),
        ("cross", cross()),
        ("torsion-line", torsion_line()),
        ("torsion-complete", torsion_complete()),
        ("tropical-line", tropical_line()),
        ("u33", u33()),
        ("u24", u24()),
        ("u33-skeleton", u33_skeleton()),
        ("lambda2-mod", lambda2_modification().0),
        ("degenerate-mod", degenerate_modification().0),
        ("lambda2-blowup", lambda(2).stellar_subdivide(&[0, 2], None).unwrap()),
        ("cross-times-line", cross().product(&lambda(1))),
        ("u34-partial", u34_partial()),
    ]
}

/// Degree-`k` part of `Z[x_ρ] / (I + J)` computed from monomials: `I` is
/// spanned by the monomials whose support is not a cone, `J` by the products
/// of `Σ m(e_ρ) x_ρ` (m a coordinate functional) with monomials of degree
/// `k - 1`. Returns the free rank and the nonunit invariant factors.
pub fn monomial_quotient(f: &Fan, k: usize) -> (usize, Vec<Int>) {
    use num_traits::One;
    use tropfan::linalg::{smith, IntMatrix};
    let n = f.n_rays();
    let mons = monomials(n, k);
    let index: std::collections::HashMap<Vec<usize>, usize> = mons.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rows: Vec<Vec<Int>> = Vec::new();
    for (i, m) in mons.iter().enumerate() {
        let support: Vec<usize> = (0..n).filter(|&r| m[r] > 0).collect();
        if !f.contains(&support) {
            let mut row = vec![int(0); mons.len()];
            row[i] = int(1);
            rows.push(row);
        }
    }
    if k >= 1 {
        for nu in monomials(n, k - 1) {
            for j in 0..f.rank() {
                let mut row = vec![int(0); mons.len()];
                for r in 0..n {
                    let mut mu = nu.clone();
                    mu[r] += 1;
                    row[index[&mu]] += &f.ray(r)[j];
                }
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return (mons.len(), Vec::new());
    }
    let s = smith(&IntMatrix::from_rows(&rows, mons.len()));
    let torsion = s.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect();
    (mons.len() - s.invariant_factors.len(), torsion)
}

fn monomials(n: usize, k: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if k == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in monomials(n - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
