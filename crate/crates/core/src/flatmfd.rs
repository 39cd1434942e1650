//! Cusp cross-section recognition: deck transformations, the crystallographic
//! group they generate, the Bieberbach torsion test and the E1–E6 holonomy
//! classification.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::doubling::PolytopeState;
use crate::geom::{fmt_q, q, Isometry3, Mat3, Plane, Vec3, Q};
use crate::linkgeom::LinkTessellation;
use crate::reflectofold::{validate_gluing, GluingReport, GluingScheme};

/// Largest point group accepted by [`generate_group`].
pub const POINT_GROUP_LIMIT: usize = 48;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlatError {
    #[error("gluing scheme {0} is not geometrically valid")]
    InvalidGluing(String),
    #[error("the link is not an axis-aligned box")]
    NotABox,
    #[error("pairing {0}: neither the pairing map nor its reflected correction pushes the box across the target face")]
    NoDeck(usize),
    #[error("pairing {0}: both candidate deck maps push the box across the target face")]
    AmbiguousDeck(usize),
    #[error("no deck transformations")]
    Empty,
    #[error("linear part {0} is not orthogonal")]
    NotOrthogonal(Box<Mat3>),
    #[error("point group exceeds {POINT_GROUP_LIMIT} elements")]
    PointGroupTooLarge,
    #[error("translation lattice has rank {0} < 3: quotient is not compact")]
    LatticeRank(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeckTransformation {
    pub map: Isometry3,
    /// Index of the pairing in its scheme.
    pub pairing: usize,
    /// Whether the target-plane reflection was applied to the pairing map.
    pub corrected: bool,
}

fn image_box(g: &Isometry3, b: &[(Q, Q); 3]) -> [(Q, Q); 3] {
    let mut lo: Option<Vec3> = None;
    let mut hi: Option<Vec3> = None;
    for mask in 0..8u8 {
        let c = Vec3::new(
            if mask & 1 == 0 { b[0].0.clone() } else { b[0].1.clone() },
            if mask & 2 == 0 { b[1].0.clone() } else { b[1].1.clone() },
            if mask & 4 == 0 { b[2].0.clone() } else { b[2].1.clone() },
        );
        let p = g.apply(&c);
        match (&mut lo, &mut hi) {
            (Some(l), Some(h)) => {
                for i in 0..3 {
                    if p.0[i] < l.0[i] {
                        l.0[i] = p.0[i].clone();
                    }
                    if p.0[i] > h.0[i] {
                        h.0[i] = p.0[i].clone();
                    }
                }
            }
            _ => {
                lo = Some(p.clone());
                hi = Some(p);
            }
        }
    }
    let (l, h) = (lo.unwrap(), hi.unwrap());
    [
        (l.0[0].clone(), h.0[0].clone()),
        (l.0[1].clone(), h.0[1].clone()),
        (l.0[2].clone(), h.0[2].clone()),
    ]
}

/// Interiors of two boxes are disjoint iff some axis has overlap of length <= 0.
fn interiors_disjoint(a: &[(Q, Q); 3], b: &[(Q, Q); 3]) -> bool {
    (0..3).any(|i| a[i].1 <= b[i].0 || b[i].1 <= a[i].0)
}

fn deck_for(bx: &[(Q, Q); 3], phi: &Isometry3, target: &Plane, pairing: usize) -> Result<DeckTransformation, FlatError> {
    let corrected = Isometry3::reflection(target).compose(phi);
    let plain_ok = interiors_disjoint(bx, &image_box(phi, bx));
    let corr_ok = interiors_disjoint(bx, &image_box(&corrected, bx));
    match (plain_ok, corr_ok) {
        (true, false) => Ok(DeckTransformation { map: phi.clone(), pairing, corrected: false }),
        (false, true) => Ok(DeckTransformation { map: corrected, pairing, corrected: true }),
        (false, false) => Err(FlatError::NoDeck(pairing)),
        (true, true) => Err(FlatError::AmbiguousDeck(pairing)),
    }
}

/// Deck transformations of a geometrically valid gluing.
pub fn deck_transformations(link: &LinkTessellation, report: &GluingReport) -> Result<Vec<DeckTransformation>, FlatError> {
    if !report.geometry_valid() {
        return Err(FlatError::InvalidGluing(report.scheme.clone()));
    }
    let bx = link.region_box().ok_or(FlatError::NotABox)?;
    let mut out = Vec::new();
    for (i, c) in report.checks.iter().enumerate() {
        let c = c.as_ref().ok_or_else(|| FlatError::InvalidGluing(report.scheme.clone()))?;
        out.push(deck_for(&bx, &c.isometry, &c.target.plane, i)?);
    }
    if out.is_empty() {
        return Err(FlatError::Empty);
    }
    Ok(out)
}

/// A subgroup of ℤ-span of rational vectors, kept as an integer Hermite basis
/// over a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ZLattice {
    denom: BigInt,
    rows: Vec<[BigInt; 3]>,
}

fn hnf(mut rows: Vec<[BigInt; 3]>) -> Vec<[BigInt; 3]> {
    let mut r = 0;
    for col in 0..3 {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][col].is_zero() {
                continue;
            }
            let a = rows[r][col].clone();
            let b = rows[i][col].clone();
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let (ag, bg) = (&a / &g, &b / &g);
            let new_r: [BigInt; 3] = std::array::from_fn(|k| &x * &rows[r][k] + &y * &rows[i][k]);
            let new_i: [BigInt; 3] = std::array::from_fn(|k| &bg * &rows[r][k] - &ag * &rows[i][k]);
            rows[r] = new_r;
            rows[i] = new_i;
        }
        if rows[r][col].is_negative() {
            for v in rows[r].iter_mut() {
                *v = -v.clone();
            }
        }
        for i in 0..r {
            let f = rows[i][col].div_floor(&rows[r][col]);
            if !f.is_zero() {
                let pivot = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    rows.retain(|row| row.iter().any(|v| !v.is_zero()));
    rows
}

impl ZLattice {
    fn span(vs: &[Vec3]) -> ZLattice {
        let mut denom = BigInt::one();
        for v in vs {
            for c in &v.0 {
                denom = denom.lcm(c.denom());
            }
        }
        let rows = vs
            .iter()
            .map(|v| std::array::from_fn(|k| (&v.0[k] * Q::from_integer(denom.clone())).to_integer()))
            .collect();
        ZLattice { rows: hnf(rows), denom }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn basis(&self) -> Vec<Vec3> {
        self.rows
            .iter()
            .map(|r| Vec3(std::array::from_fn(|k| Q::new(r[k].clone(), self.denom.clone()))))
            .collect()
    }

    fn contains(&self, v: &Vec3) -> bool {
        let scaled: Vec<Q> = v.0.iter().map(|c| c * Q::from_integer(self.denom.clone())).collect();
        if scaled.iter().any(|c| !c.is_integer()) {
            return false;
        }
        let mut w: Vec<BigInt> = scaled.iter().map(|c| c.to_integer()).collect();
        for row in &self.rows {
            let col = (0..3).find(|&k| !row[k].is_zero()).unwrap();
            let (c, rem) = w[col].div_rem(&row[col]);
            if !rem.is_zero() {
                return false;
            }
            for (x, r) in w.iter_mut().zip(row) {
                *x -= &c * r;
            }
        }
        w.iter().all(|x| x.is_zero())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystallographicGroup {
    pub generators: Vec<Isometry3>,
    /// Point group elements; the identity comes first.
    pub point_group: Vec<Mat3>,
    /// One group element's translation part per point-group element.
    pub rep_translation: Vec<Vec3>,
    /// Hermite basis of the translation subgroup.
    pub lattice: Vec<Vec3>,
}

/// Generates the group from its generators.
///
/// The point group is found by breadth-first closure with one representative
/// element per linear part; the translation subgroup is then generated by the
/// Schreier elements `r_A g r_{AB}^{-1}`, which span it completely.
pub fn generate_group(gens: &[Isometry3]) -> Result<CrystallographicGroup, FlatError> {
    if gens.is_empty() {
        return Err(FlatError::Empty);
    }
    for g in gens {
        if !g.is_orthogonal() {
            return Err(FlatError::NotOrthogonal(Box::new(g.linear.clone())));
        }
    }
    let mut reps: Vec<Isometry3> = vec![Isometry3::identity()];
    let mut index: HashMap<Mat3, usize> = HashMap::from([(Mat3::identity(), 0)]);
    let mut i = 0;
    while i < reps.len() {
        for g in gens {
            let e = reps[i].compose(g);
            if !index.contains_key(&e.linear) {
                if reps.len() == POINT_GROUP_LIMIT {
                    return Err(FlatError::PointGroupTooLarge);
                }
                index.insert(e.linear.clone(), reps.len());
                reps.push(e);
            }
        }
        i += 1;
    }
    let mut translations = Vec::new();
    for r in &reps {
        for g in gens {
            let e = r.compose(g);
            let s = &reps[index[&e.linear]];
            let t = e.compose(&s.inverse());
            debug_assert!(t.is_translation());
            if !t.translation.is_zero() {
                translations.push(t.translation);
            }
        }
    }
    let lattice = ZLattice::span(&translations);
    if lattice.rank() < 3 {
        return Err(FlatError::LatticeRank(lattice.rank()));
    }
    Ok(CrystallographicGroup {
        generators: gens.to_vec(),
        point_group: reps.iter().map(|r| r.linear.clone()).collect(),
        rep_translation: reps.into_iter().map(|r| r.translation).collect(),
        lattice: lattice.basis(),
    })
}

/// Orthogonal projection onto the fixed space of a finite-order orthogonal
/// matrix: the average of its powers.
pub fn fixed_projection(a: &Mat3) -> Mat3 {
    let n = a.order(POINT_GROUP_LIMIT).expect("point-group element of finite order");
    let mut sum = Mat3::from_fn(|_, _| Q::zero());
    let mut p = Mat3::identity();
    for _ in 0..n {
        sum = Mat3::from_fn(|i, j| &sum.0[i][j] + &p.0[i][j]);
        p = p.mul(a);
    }
    let inv = Q::new(BigInt::one(), BigInt::from(n));
    Mat3::from_fn(|i, j| &sum.0[i][j] * &inv)
}

impl CrystallographicGroup {
    pub fn order(&self) -> usize {
        self.point_group.len()
    }

    /// Whether some element with linear part `point_group[k]` fixes a point.
    pub fn has_fixed_point(&self, k: usize) -> bool {
        let p = fixed_projection(&self.point_group[k]);
        let projected: Vec<Vec3> = self.lattice.iter().map(|l| p.mul_vec(l)).collect();
        ZLattice::span(&projected).contains(&p.mul_vec(&self.rep_translation[k]))
    }
}

pub fn is_torsion_free(g: &CrystallographicGroup) -> bool {
    (0..g.order()).filter(|&k| !g.point_group[k].is_identity()).all(|k| !g.has_fixed_point(k))
}

pub fn is_orientation_preserving(g: &CrystallographicGroup) -> bool {
    g.point_group.iter().all(|a| a.det() == q(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FlatManifoldClass {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    #[serde(rename = "not_a_manifold")]
    NotAManifold,
    #[serde(rename = "unrecognized")]
    Unrecognized,
}

impl fmt::Display for FlatManifoldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FlatManifoldClass::E1 => "E1",
            FlatManifoldClass::E2 => "E2",
            FlatManifoldClass::E3 => "E3",
            FlatManifoldClass::E4 => "E4",
            FlatManifoldClass::E5 => "E5",
            FlatManifoldClass::E6 => "E6",
            FlatManifoldClass::NotAManifold => "not_a_manifold",
            FlatManifoldClass::Unrecognized => "unrecognized",
        };
        f.write_str(s)
    }
}

pub fn classify(g: &CrystallographicGroup) -> FlatManifoldClass {
    if !is_torsion_free(g) {
        return FlatManifoldClass::NotAManifold;
    }
    if !is_orientation_preserving(g) {
        return FlatManifoldClass::Unrecognized;
    }
    let cyclic = g.point_group.iter().any(|a| a.order(POINT_GROUP_LIMIT) == Some(g.order()));
    match (g.order(), cyclic) {
        (1, _) => FlatManifoldClass::E1,
        (2, _) => FlatManifoldClass::E2,
        (3, _) => FlatManifoldClass::E3,
        (4, true) => FlatManifoldClass::E4,
        (4, false) => FlatManifoldClass::E6,
        (6, true) => FlatManifoldClass::E5,
        _ => FlatManifoldClass::Unrecognized,
    }
}

fn mat_json(m: &Mat3) -> Value {
    json!(m.0.iter().map(|row| row.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vec_json(v: &Vec3) -> Value {
    json!(v.0.iter().map(fmt_q).collect::<Vec<_>>())
}

#[derive(Clone, Debug)]
pub struct CuspReport {
    pub decks: Vec<DeckTransformation>,
    pub group: CrystallographicGroup,
    pub torsion_free: bool,
    pub orientable: bool,
    pub class: FlatManifoldClass,
}

impl CuspReport {
    pub fn new(decks: Vec<DeckTransformation>) -> Result<CuspReport, FlatError> {
        let maps: Vec<Isometry3> = decks.iter().map(|d| d.map.clone()).collect();
        let group = generate_group(&maps)?;
        Ok(CuspReport {
            torsion_free: is_torsion_free(&group),
            orientable: is_orientation_preserving(&group),
            class: classify(&group),
            decks,
            group,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "decks": self.decks.iter().map(|d| json!({
                "pairing": d.pairing,
                "map": d.map.to_string(),
                "corrected": d.corrected,
            })).collect::<Vec<_>>(),
            "point_group": self.group.point_group.iter().map(mat_json).collect::<Vec<_>>(),
            "lattice": self.group.lattice.iter().map(vec_json).collect::<Vec<_>>(),
            "torsion_free": self.torsion_free,
            "orientable": self.orientable,
            "class": self.class,
        })
    }
}

/// Validates the gluing and classifies the cusp cross-section.
pub fn classify_scheme(s: &PolytopeState, g: &GluingScheme) -> Result<CuspReport, FlatError> {
    let report = validate_gluing(s, g);
    CuspReport::new(deck_transformations(&s.i3, &report)?)
}
