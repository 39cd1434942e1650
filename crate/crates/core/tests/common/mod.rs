//! Helpers shared by the acceptance runner and the property suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use reflectofold_core::coxeter::diagram_d;
use reflectofold_core::doubling::{initial_state, PolytopeState};
use reflectofold_core::flatmfd::{deck_transformations, CrystallographicGroup, DeckTransformation};
use reflectofold_core::geom::{q, qf, Isometry3, Mat3, Vec3, Q};
use reflectofold_core::linkgeom::SymmetryMode;
use reflectofold_core::reflectofold::{validate_gluing, GluingScheme};

/// A random admissible doubling sequence of the given length from P_0.
pub fn random_sequence<R: Rng>(rng: &mut R, len: usize) -> Vec<PolytopeState> {
    let mut s = initial_state(&diagram_d()).unwrap();
    let mut out = vec![s.clone()];
    for _ in 0..len {
        let choices = s.admissible_facets();
        let Some(f) = choices.choose(rng) else { break };
        s = s.double(f).unwrap();
        out.push(s.clone());
    }
    out
}

/// All 48 signed permutation matrices.
pub fn signed_permutations() -> Vec<Mat3> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in perms {
        for signs in 0..8 {
            out.push(Mat3::from_fn(|i, j| {
                if p[i] != j {
                    q(0)
                } else if signs >> i & 1 == 1 {
                    q(-1)
                } else {
                    q(1)
                }
            }));
        }
    }
    out
}

pub fn conjugate(gens: &[Isometry3], h: &Isometry3) -> Vec<Isometry3> {
    let hi = h.inverse();
    gens.iter().map(|g| h.compose(g).compose(&hi)).collect()
}

/// Deck maps of a scheme on its base state.
pub fn decks(states: &[PolytopeState], g: &GluingScheme) -> Vec<DeckTransformation> {
    let s = &states[g.base];
    deck_transformations(&s.i3, &validate_gluing(s, g)).unwrap()
}

pub fn symmetry_mode(base: usize) -> SymmetryMode {
    if base < 8 {
        SymmetryMode::Box
    } else {
        SymmetryMode::Ambient
    }
}

/// Solvability of `m x = b` over the rationals by Gaussian elimination.
pub fn solvable(m: &Mat3, b: &Vec3) -> bool {
    let mut rows: Vec<[Q; 4]> =
        (0..3).map(|i| [m.0[i][0].clone(), m.0[i][1].clone(), m.0[i][2].clone(), b.0[i].clone()]).collect();
    let mut r = 0;
    for c in 0..3 {
        let Some(p) = (r..3).find(|&i| rows[i][c] != q(0)) else { continue };
        rows.swap(r, p);
        for i in 0..3 {
            if i != r && rows[i][c] != q(0) {
                let f = &rows[i][c] / &rows[r][c];
                let pivot = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        r += 1;
    }
    rows.iter().all(|row| row[..3].iter().any(|x| *x != q(0)) || row[3] == q(0))
}

/// `s` when the translation lattice is `s·ℤ³`.
pub fn cubic_scale(g: &CrystallographicGroup) -> Option<Q> {
    let s = g.lattice.first()?.0[0].clone();
    let want: Vec<Vec3> = (0..3).map(|i| Vec3::unit(i).scale(&s)).collect();
    (g.lattice == want).then_some(s)
}

/// Brute-force torsion on a lattice `k·ℤ³`: some `(A, t_A + λ)` with λ in
/// the 3x3x3 block (after reducing t_A into the fundamental cube) has a fixed
/// point.
pub fn brute_force_torsion(g: &CrystallographicGroup, k: &Q) -> bool {
    for (a, t) in g.point_group.iter().zip(&g.rep_translation) {
        if a.is_identity() {
            continue;
        }
        let reduced = Vec3(std::array::from_fn(|i| {
            let c = &t.0[i] / k;
            (c.clone() - c.floor()) * k
        }));
        let m = a.sub(&Mat3::identity());
        for x in -1..=1 {
            for y in -1..=1 {
                for z in -1..=1 {
                    let v = reduced.add(&Vec3::int(x, y, z).scale(k));
                    if solvable(&m, &v.neg()) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn half<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3::new(qf(rng.gen_range(-2..=2), 2), qf(rng.gen_range(-2..=2), 2), qf(rng.gen_range(-2..=2), 2))
}

/// Signed permutations of order 1, 2 or 4.
pub fn small_order_matrices() -> Vec<Mat3> {
    signed_permutations().into_iter().filter(|m| matches!(m.order(6), Some(1 | 2 | 4))).collect()
}

/// A random group with point group of order at most 4 on the lattice
/// `scale·ℤ³`, with generator translations in `(1/2)ℤ³`.
pub fn random_small_group<R: Rng>(rng: &mut R) -> Vec<Isometry3> {
    let scale = rng.gen_range(1..=2);
    let mut gens = vec![
        Isometry3::translation(Vec3::int(scale, 0, 0)),
        Isometry3::translation(Vec3::int(0, scale, 0)),
        Isometry3::translation(Vec3::int(0, 0, scale)),
    ];
    let mats = small_order_matrices();
    let two_diagonals = rng.gen_bool(0.3);
    if two_diagonals {
        let diag: Vec<&Mat3> = mats.iter().filter(|m| (0..3).all(|i| (0..3).all(|j| i == j || m.0[i][j] == q(0)))).collect();
        let a = diag.choose(rng).unwrap();
        let b = diag.choose(rng).unwrap();
        let ta = half(rng);
        let tb = half(rng);
        gens.push(Isometry3::new((*a).clone(), ta));
        gens.push(Isometry3::new((*b).clone(), tb));
    } else {
        let a = mats.choose(rng).unwrap().clone();
        let t = half(rng);
        gens.push(Isometry3::new(a, t));
    }
    gens
}
