//! Gluing schemes on the non-compact facets of a doubled polytope, and the
//! reflectofold they define: facet classes, corner graphs, developability
//! (EF/AC), adjacency matrices and the Coxeter presentation of G_R.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coxeter::AngleLabel;
use crate::doubling::PolytopeState;
use crate::geom::{fmt_q, parse_q, Isometry3, Plane, Vec3, Q};
use crate::label::FacetLabel;
use crate::linkgeom::{LinkError, LinkTessellation, SymmetryMode, TileFace};
use crate::table::{Cell, LabeledMatrix};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("scheme JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{at}: {msg}")]
    Field { at: String, msg: String },
    #[error("unknown builtin scheme {0:?}")]
    UnknownBuiltin(String),
}

#[derive(Debug, Error)]
pub enum ReflectofoldError {
    #[error("scheme is based on P_{scheme} but the state is P_{state}")]
    BaseMismatch { scheme: usize, state: usize },
    #[error("gluing is not geometrically valid: {0}")]
    InvalidGluing(String),
    #[error("reflectofold is not developable ({0} violations)")]
    NotDevelopable(usize),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// Which part of a facet a pairing uses. Halves split the facet along its
/// last in-plane coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Full,
    Upper,
    Lower,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Full => Ok(()),
            Region::Upper => write!(f, "^U"),
            Region::Lower => write!(f, "^D"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceRegion {
    pub facet: FacetLabel,
    #[serde(default = "full")]
    pub region: Region,
}

fn full() -> Region {
    Region::Full
}

impl FaceRegion {
    pub fn full(facet: &str) -> FaceRegion {
        FaceRegion { facet: FacetLabel::parse(facet).expect("facet label"), region: Region::Full }
    }

    pub fn half(facet: &str, upper: bool) -> FaceRegion {
        let region = if upper { Region::Upper } else { Region::Lower };
        FaceRegion { facet: FacetLabel::parse(facet).expect("facet label"), region }
    }
}

impl fmt::Display for FaceRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.facet, self.region)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordItem {
    /// Reflection in the plane named by a doubling or facet label.
    Reflect(FacetLabel),
    Translate(Vec3),
    Power(Vec<WordItem>, u32),
}

/// A composition of isometries; the rightmost item acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Word(pub Vec<WordItem>);

fn fmt_items(items: &[WordItem], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        match it {
            WordItem::Reflect(l) => write!(f, "r{l}")?,
            WordItem::Translate(v) => write!(f, "t({},{},{})", fmt_q(v.x()), fmt_q(v.y()), fmt_q(v.z()))?,
            WordItem::Power(w, k) => {
                write!(f, "(")?;
                fmt_items(w, f)?;
                write!(f, ")^{k}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_items(&self.0, f)
    }
}

struct WordParser<'a> {
    s: &'a str,
    pos: usize,
}

impl WordParser<'_> {
    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(|c: char| c.is_whitespace() || c == '∘' || c == '*') {
            self.pos += self.s[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn items(&mut self, nested: bool) -> Result<Vec<WordItem>, String> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let rest = &self.s[self.pos..];
            if rest.is_empty() {
                return if nested { Err("unclosed '('".into()) } else { Ok(out) };
            }
            if rest.starts_with(')') {
                return if nested { Ok(out) } else { Err(format!("unmatched ')' at byte {}", self.pos)) };
            }
            let item = if let Some(r) = rest.strip_prefix("r_").or_else(|| rest.strip_prefix('r')) {
                let skip = rest.len() - r.len();
                let r = r.strip_prefix('{').filter(|_| !r.starts_with("{,")).unwrap_or(r);
                let brace = rest.len() - skip - r.len();
                let (l, n) = FacetLabel::parse_prefix(r).map_err(|e| e.to_string())?;
                self.pos += skip + brace + n;
                if brace == 1 {
                    if !self.s[self.pos..].starts_with('}') {
                        return Err(format!("expected '}}' at byte {}", self.pos));
                    }
                    self.pos += 1;
                }
                WordItem::Reflect(l)
            } else if let Some(r) = rest.strip_prefix("t(") {
                let end = r.find(')').ok_or("unclosed translation")?;
                let parts: Vec<Q> = r[..end]
                    .split(',')
                    .map(|p| parse_q(p.trim()).ok_or_else(|| format!("bad rational {p:?}")))
                    .collect::<Result<_, _>>()?;
                let [x, y, z] = <[Q; 3]>::try_from(parts).map_err(|_| "translation needs three coordinates")?;
                self.pos += 2 + end + 1;
                WordItem::Translate(Vec3::new(x, y, z))
            } else if rest.starts_with('(') {
                self.pos += 1;
                let inner = self.items(true)?;
                self.pos += 1;
                let rest = &self.s[self.pos..];
                let Some(r) = rest.strip_prefix('^') else {
                    out.extend(inner);
                    continue;
                };
                let digits: String = r.chars().take_while(char::is_ascii_digit).collect();
                let k: u32 = digits.parse().map_err(|_| format!("bad exponent at byte {}", self.pos + 1))?;
                self.pos += 1 + digits.len();
                WordItem::Power(inner, k)
            } else {
                return Err(format!("unexpected {:?} at byte {}", rest.chars().next().unwrap_or(' '), self.pos));
            };
            out.push(item);
        }
    }
}

fn invert(items: &[WordItem]) -> Vec<WordItem> {
    items
        .iter()
        .rev()
        .map(|it| match it {
            WordItem::Reflect(l) => WordItem::Reflect(l.clone()),
            WordItem::Translate(v) => WordItem::Translate(v.neg()),
            WordItem::Power(w, k) => WordItem::Power(invert(w), *k),
        })
        .collect()
}

impl Word {
    /// Parses tokens such as `r6`, `r6_5`, `r_{1_2}`, `t(1,0,-1/2)` and
    /// `(r1 r2)^2`, separated by spaces or `∘`.
    pub fn parse(s: &str) -> Result<Word, String> {
        WordParser { s, pos: 0 }.items(false).map(Word)
    }

    pub fn parse_list<S: AsRef<str>>(tokens: &[S]) -> Result<Word, String> {
        let mut items = Vec::new();
        for t in tokens {
            items.extend(Word::parse(t.as_ref())?.0);
        }
        Ok(Word(items))
    }

    pub fn inverse(&self) -> Word {
        Word(invert(&self.0))
    }

    /// Number of reflections, counting powers.
    pub fn reflection_count(&self) -> usize {
        fn count(items: &[WordItem]) -> usize {
            items
                .iter()
                .map(|it| match it {
                    WordItem::Reflect(_) => 1,
                    WordItem::Translate(_) => 0,
                    WordItem::Power(w, k) => count(w) * *k as usize,
                })
                .sum()
        }
        count(&self.0)
    }

    /// The isometry, with reflection planes resolved in `link`.
    pub fn isometry(&self, link: &LinkTessellation) -> Result<Isometry3, FacetLabel> {
        fn eval(items: &[WordItem], link: &LinkTessellation) -> Result<Isometry3, FacetLabel> {
            let mut g = Isometry3::identity();
            for it in items {
                let h = match it {
                    WordItem::Reflect(l) => link.resolve_plane(l).ok_or_else(|| l.clone())?.reflection(),
                    WordItem::Translate(v) => Isometry3::translation(v.clone()),
                    WordItem::Power(w, k) => eval(w, link)?.pow(*k as usize),
                };
                g = g.compose(&h);
            }
            Ok(g)
        }
        eval(&self.0, link)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub source: FaceRegion,
    pub target: FaceRegion,
    pub word: Word,
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} via {}", self.source, self.target, self.word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingScheme {
    pub name: String,
    /// Index n of the base polytope P_n.
    pub base: usize,
    pub pairings: Vec<Pairing>,
}

#[derive(Deserialize, Serialize)]
struct RawScheme {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    base: String,
    pairings: Vec<RawPairing>,
}

#[derive(Deserialize, Serialize)]
struct RawPairing {
    source: RawRegion,
    target: RawRegion,
    word: Vec<String>,
}

#[derive(Deserialize, Serialize)]
struct RawRegion {
    facet: String,
    #[serde(default = "full")]
    region: Region,
}

impl GluingScheme {
    /// Reads the JSON scheme format. `base` is `"P0"` … `"P8"`.
    pub fn from_json(text: &str) -> Result<GluingScheme, SchemeError> {
        let raw: RawScheme = serde_json::from_str(text)?;
        let field = |at: String, msg: String| SchemeError::Field { at, msg };
        let base = raw
            .base
            .strip_prefix('P')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n <= 8)
            .ok_or_else(|| field("base".into(), format!("expected P0 … P8, got {:?}", raw.base)))?;
        let mut pairings = Vec::new();
        for (i, p) in raw.pairings.iter().enumerate() {
            let region = |r: &RawRegion, side: &str| -> Result<FaceRegion, SchemeError> {
                let facet = FacetLabel::parse(&r.facet)
                    .map_err(|e| field(format!("pairings[{i}].{side}.facet"), e.to_string()))?;
                Ok(FaceRegion { facet, region: r.region })
            };
            let word = Word::parse_list(&p.word).map_err(|e| field(format!("pairings[{i}].word"), e))?;
            pairings.push(Pairing { source: region(&p.source, "source")?, target: region(&p.target, "target")?, word });
        }
        Ok(GluingScheme { name: raw.name.unwrap_or_else(|| "scheme".into()), base, pairings })
    }

    pub fn to_json(&self) -> String {
        let raw = RawScheme {
            name: Some(self.name.clone()),
            base: format!("P{}", self.base),
            pairings: self
                .pairings
                .iter()
                .map(|p| RawPairing {
                    source: RawRegion { facet: p.source.facet.to_string(), region: p.source.region },
                    target: RawRegion { facet: p.target.facet.to_string(), region: p.target.region },
                    word: vec![p.word.to_string()],
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("scheme serializes")
    }

    /// Same gluing with every pairing reversed.
    pub fn inverse(&self) -> GluingScheme {
        GluingScheme {
            name: self.name.clone(),
            base: self.base,
            pairings: self
                .pairings
                .iter()
                .map(|p| Pairing { source: p.target.clone(), target: p.source.clone(), word: p.word.inverse() })
                .collect(),
        }
    }
}

fn pairing(source: FaceRegion, target: FaceRegion, word: &str) -> Pairing {
    Pairing { source, target, word: Word::parse(word).expect("builtin word") }
}

/// R_T, R_half, R_quarter on P_7 and R_HW on P_8.
pub fn builtin_gluings() -> Vec<GluingScheme> {
    let p7 = |name: &str, third: &str| GluingScheme {
        name: name.into(),
        base: 7,
        pairings: vec![
            pairing(FaceRegion::full("6_{4_5}"), FaceRegion::full("6_{6,4_5}"), "r6"),
            pairing(FaceRegion::full("6_{4,5}"), FaceRegion::full("6_{6_5,4,5}"), "r6_5"),
            pairing(FaceRegion::full("1_2"), FaceRegion::full("1_{1,2}"), third),
        ],
    };
    vec![
        p7("R_T", "r1"),
        p7("R_half", "r1 r6 r6_5"),
        p7("R_quarter", "r1 r6 r5"),
        GluingScheme {
            name: "R_HW".into(),
            base: 8,
            pairings: vec![
                pairing(FaceRegion::full("1_{1,2}"), FaceRegion::full("1_{1_2,1,2}"), "r1_2"),
                pairing(FaceRegion::full("6_{4_5}"), FaceRegion::full("6_{6,4_5}"), "r1_2 r6_5 r6"),
                pairing(FaceRegion::half("6_{4,5}", true), FaceRegion::half("6_{4,5}", false), "r6 (r1 r2)^2"),
                pairing(
                    FaceRegion::half("6_{6_5,4,5}", true),
                    FaceRegion::half("6_{6_5,4,5}", false),
                    "r6 (r1 r2)^2",
                ),
            ],
        },
    ]
}

pub fn builtin(name: &str) -> Result<GluingScheme, SchemeError> {
    builtin_gluings()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| SchemeError::UnknownBuiltin(name.into()))
}

/// The tile faces of a region, with its bounding rectangle when the facet
/// is axis-aligned.
#[derive(Clone, Debug)]
pub struct RegionGeometry {
    pub plane: Plane,
    pub node: u32,
    pub faces: Vec<TileFace>,
    /// In-plane axes and their intervals.
    pub rect: Option<([usize; 2], [(Q, Q); 2])>,
}

fn bounds(link: &LinkTessellation, faces: &[TileFace], axis: usize) -> (Q, Q) {
    let vals: Vec<Q> = faces.iter().flat_map(|&tf| link.tile_face_polygon(tf)).map(|v| v.0[axis].clone()).collect();
    let lo = vals.iter().min().expect("nonempty facet").clone();
    let hi = vals.iter().max().expect("nonempty facet").clone();
    (lo, hi)
}

fn region_geometry(link: &LinkTessellation, r: &FaceRegion) -> Result<RegionGeometry, GluingViolation> {
    let facet = link.facet(&r.facet).ok_or_else(|| GluingViolation::UnknownFacet(r.facet.clone()))?;
    let rect = facet.plane.axis_index().map(|a| {
        let axes: Vec<usize> = (0..3).filter(|&i| i != a).collect();
        let axes = [axes[0], axes[1]];
        let iv = [bounds(link, &facet.faces, axes[0]), bounds(link, &facet.faces, axes[1])];
        (axes, iv)
    });
    let mut geo = RegionGeometry { plane: facet.plane.clone(), node: facet.node, faces: facet.faces.clone(), rect };
    if r.region == Region::Full {
        return Ok(geo);
    }
    let Some((axes, iv)) = geo.rect.clone() else {
        return Err(GluingViolation::NotTileAligned(r.clone(), "half regions need an axis-aligned facet".into()));
    };
    let split = axes[1];
    let (lo, hi) = iv[1].clone();
    let mid = (&lo + &hi) / Q::from_integer(2.into());
    let upper = r.region == Region::Upper;
    let mut faces = Vec::new();
    for &tf in &facet.faces {
        let poly = link.tile_face_polygon(tf);
        let above = poly.iter().all(|v| v.0[split] >= mid);
        let below = poly.iter().all(|v| v.0[split] <= mid);
        if !above && !below {
            return Err(GluingViolation::NotTileAligned(r.clone(), format!("a tile face straddles coordinate {}", fmt_q(&mid))));
        }
        if above == upper {
            faces.push(tf);
        }
    }
    let interval = if upper { (mid, hi) } else { (lo, mid) };
    geo.rect = Some((axes, [iv[0].clone(), interval]));
    geo.faces = faces;
    Ok(geo)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GluingViolation {
    UnknownFacet(FacetLabel),
    UnknownReflection { pairing: usize, label: FacetLabel },
    NotTileAligned(FaceRegion, String),
    RegionMismatch { pairing: usize, detail: String },
    Coverage { facet: FacetLabel, uncovered: usize, repeated: usize },
    /// The isometry does not preserve the tessellation by copies of P_0.
    NotSymmetry { pairing: usize, mode: &'static str },
    /// A tile face is glued to a face of a different type.
    TypeChange { pairing: usize, source: u32, target: u32 },
}

impl GluingViolation {
    /// Violations that make the pairing geometry itself meaningless.
    pub fn is_geometric(&self) -> bool {
        !matches!(self, GluingViolation::NotSymmetry { .. } | GluingViolation::TypeChange { .. })
    }
}

impl fmt::Display for GluingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GluingViolation::UnknownFacet(l) => write!(f, "{l} is not a non-compact facet of the base polytope"),
            GluingViolation::UnknownReflection { pairing, label } => {
                write!(f, "pairing {pairing}: no reflection plane named {label}")
            }
            GluingViolation::NotTileAligned(r, why) => write!(f, "region {r}: {why}"),
            GluingViolation::RegionMismatch { pairing, detail } => write!(f, "pairing {pairing}: region mismatch: {detail}"),
            GluingViolation::Coverage { facet, uncovered, repeated } => {
                write!(f, "facet {facet}: {uncovered} tile faces unglued, {repeated} glued more than once")
            }
            GluingViolation::NotSymmetry { pairing, mode } => {
                write!(f, "pairing {pairing}: isometry is not a {mode} symmetry of the tessellation")
            }
            GluingViolation::TypeChange { pairing, source, target } => {
                write!(f, "pairing {pairing}: glues faces of type {source} to faces of type {target}")
            }
        }
    }
}

/// Resolved geometry of one pairing.
#[derive(Clone, Debug)]
pub struct PairingCheck {
    pub isometry: Isometry3,
    pub source: RegionGeometry,
    pub target: RegionGeometry,
    /// Source tile face and the target tile face it is glued to.
    pub matches: Vec<(TileFace, TileFace)>,
}

#[derive(Clone, Debug)]
pub struct GluingReport {
    pub scheme: String,
    pub base: usize,
    pub checks: Vec<Option<PairingCheck>>,
    pub violations: Vec<GluingViolation>,
}

impl GluingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn geometry_valid(&self) -> bool {
        !self.violations.iter().any(GluingViolation::is_geometric)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "valid": self.is_valid(),
            "geometry_valid": self.geometry_valid(),
            "violations": self.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "isometries": self.checks.iter().map(|c| c.as_ref().map(|c| c.isometry.to_string())).collect::<Vec<_>>(),
        })
    }
}

fn polygon_key(poly: &[Vec3]) -> BTreeSet<Vec3> {
    poly.iter().cloned().collect()
}

/// Checks that each pairing maps its source region exactly onto its target
/// region tile by tile, that the isometry preserves the tessellation (box
/// symmetry below P_8, ambient symmetry on P_8), that glued faces have the
/// same type, and that every non-compact tile face is glued exactly once.
pub fn validate_gluing(s: &PolytopeState, g: &GluingScheme) -> GluingReport {
    let link = &s.i3;
    let mut violations = Vec::new();
    let mut checks = Vec::new();
    let mut used: HashMap<TileFace, usize> = HashMap::new();
    let mode = if s.n() >= 8 { SymmetryMode::Ambient } else { SymmetryMode::Box };
    for (i, p) in g.pairings.iter().enumerate() {
        let src = region_geometry(link, &p.source);
        let tgt = region_geometry(link, &p.target);
        let iso = p.word.isometry(link);
        let (src, tgt, iso) = match (src, tgt, iso) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (a, b, c) => {
                violations.extend(a.err());
                violations.extend(b.err());
                if let Err(label) = c {
                    violations.push(GluingViolation::UnknownReflection { pairing: i, label });
                }
                checks.push(None);
                continue;
            }
        };
        for tf in src.faces.iter().chain(&tgt.faces) {
            *used.entry(*tf).or_default() += 1;
        }
        let targets: HashMap<BTreeSet<Vec3>, TileFace> =
            tgt.faces.iter().map(|&tf| (polygon_key(&link.tile_face_polygon(tf)), tf)).collect();
        let mut matches = Vec::new();
        let mut hit = BTreeSet::new();
        let mut missed = 0;
        for &tf in &src.faces {
            let image: Vec<Vec3> = link.tile_face_polygon(tf).iter().map(|v| iso.apply(v)).collect();
            match targets.get(&polygon_key(&image)) {
                Some(&t) if hit.insert(t) => matches.push((tf, t)),
                _ => missed += 1,
            }
        }
        if missed > 0 || hit.len() != tgt.faces.len() {
            violations.push(GluingViolation::RegionMismatch {
                pairing: i,
                detail: format!(
                    "{} of {} source tile faces land on {}; {} of its {} tile faces are reached",
                    src.faces.len() - missed,
                    src.faces.len(),
                    p.target,
                    hit.len(),
                    tgt.faces.len()
                ),
            });
        }
        for (a, b) in &matches {
            let (na, nb) = (s.model.faces[a.face].node, s.model.faces[b.face].node);
            if na != nb {
                violations.push(GluingViolation::TypeChange { pairing: i, source: na, target: nb });
                break;
            }
        }
        if !link.is_tessellation_symmetry(&iso, mode) {
            let mode = if mode == SymmetryMode::Box { "box" } else { "ambient" };
            violations.push(GluingViolation::NotSymmetry { pairing: i, mode });
        }
        checks.push(Some(PairingCheck { isometry: iso, source: src, target: tgt, matches }));
    }
    for f in link.facets() {
        let counts: Vec<usize> = f.faces.iter().map(|tf| used.get(tf).copied().unwrap_or(0)).collect();
        let uncovered = counts.iter().filter(|&&c| c == 0).count();
        let repeated = counts.iter().filter(|&&c| c > 1).count();
        if uncovered + repeated > 0 {
            violations.push(GluingViolation::Coverage { facet: f.label.clone(), uncovered, repeated });
        }
    }
    violations.dedup();
    GluingReport { scheme: g.name.clone(), base: g.base, checks, violations }
}

/// A facet of R: an equivalence class of compact facets of P_n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetClass {
    pub ty: u32,
    /// Minimal member by word length, then doubling order.
    pub name: FacetLabel,
    pub members: Vec<FacetLabel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CornerSource {
    /// Projected from a ridge of P_n.
    Polytope,
    /// Created by gluing across the given pairing.
    Pairing(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CornerEdge {
    pub a: FacetLabel,
    pub b: FacetLabel,
    pub label: AngleLabel,
    pub source: CornerSource,
}

/// G̃_t: a multigraph on the type-t facets of R.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerGraph {
    pub ty: u32,
    pub vertices: Vec<FacetLabel>,
    pub edges: Vec<CornerEdge>,
}

impl CornerGraph {
    /// Distinct (label, pair) edges.
    pub fn edge_set(&self) -> BTreeSet<(u32, FacetLabel, FacetLabel)> {
        self.edge_set_where(|_| true)
    }

    /// Distinct (label, pair) corners created by the gluing.
    pub fn glued_edge_set(&self) -> BTreeSet<(u32, FacetLabel, FacetLabel)> {
        self.edge_set_where(|e| matches!(e.source, CornerSource::Pairing(_)))
    }

    fn edge_set_where(&self, keep: impl Fn(&CornerEdge) -> bool) -> BTreeSet<(u32, FacetLabel, FacetLabel)> {
        self.edges
            .iter()
            .filter(|e| keep(e))
            .filter_map(|e| {
                let k = e.label.submultiple()?;
                let (a, b) = if e.a <= e.b { (e.a.clone(), e.b.clone()) } else { (e.b.clone(), e.a.clone()) };
                Some((k, a, b))
            })
            .collect()
    }
}

/// A corner across a glued wall whose angle is not π/k or π.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumViolation {
    pub pairing: usize,
    pub ty: u32,
    pub a: FacetLabel,
    pub b: FacetLabel,
    pub angle: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DevViolation {
    /// EF: a corner of a facet with itself.
    Loop { ty: u32, facet: FacetLabel, label: AngleLabel },
    /// AC: a corner angle that is not π/k.
    NonSubmultiple { ty: u32, a: FacetLabel, b: FacetLabel, label: AngleLabel },
    /// AC: parallel corners with different angles.
    Inconsistent { ty: u32, a: FacetLabel, b: FacetLabel, labels: Vec<AngleLabel> },
    /// AC: corners between facets of different types.
    Mixed { a: FacetLabel, b: FacetLabel, label: AngleLabel },
}

fn angle_text(l: &AngleLabel) -> String {
    match l {
        AngleLabel::Submultiple(k) => format!("π/{k}"),
        AngleLabel::General(x) => format!("{}π", fmt_q(x)),
        other => other.to_string(),
    }
}

impl fmt::Display for DevViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DevViolation::Loop { ty, facet, label } => {
                write!(f, "EF: type-{ty} facet {facet} has a corner with itself (angle {})", angle_text(label))
            }
            DevViolation::NonSubmultiple { ty, a, b, label } => {
                write!(f, "AC: type-{ty} corner {a} -- {b} has angle {}", angle_text(label))
            }
            DevViolation::Inconsistent { ty, a, b, labels } => {
                let ls: Vec<String> = labels.iter().map(angle_text).collect();
                write!(f, "AC: type-{ty} corners {a} -- {b} disagree: {}", ls.join(", "))
            }
            DevViolation::Mixed { a, b, label } => write!(f, "AC: corner {a} -- {b} has angle {}", angle_text(label)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DevelopabilityReport {
    pub ef: bool,
    pub ac: bool,
    pub violations: Vec<DevViolation>,
}

impl DevelopabilityReport {
    pub fn developable(&self) -> bool {
        self.ef && self.ac
    }

    pub fn has_loop(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, DevViolation::Loop { .. }))
    }

    pub fn has_non_submultiple(&self) -> bool {
        self.violations.iter().any(|v| match v {
            DevViolation::NonSubmultiple { .. } => true,
            DevViolation::Loop { label, .. } => label.submultiple().is_none(),
            _ => false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relator {
    Square(FacetLabel),
    Pair { f: FacetLabel, g: FacetLabel, k: u32 },
}

impl fmt::Display for Relator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relator::Square(a) => write!(f, "({a})^2"),
            Relator::Pair { f: a, g: b, k } => write!(f, "({a} {b})^{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterPresentation {
    pub generators: Vec<FacetLabel>,
    pub relators: Vec<Relator>,
}

/// The reflectofold defined by a valid gluing of P_n.
#[derive(Clone, Debug)]
pub struct Reflectofold {
    pub scheme: String,
    pub base: usize,
    pub types: Vec<u32>,
    pub classes: Vec<FacetClass>,
    pub graphs: BTreeMap<u32, CornerGraph>,
    /// Corners between facets of different compact types.
    pub mixed: BTreeSet<(FacetLabel, FacetLabel, AngleLabel)>,
    pub sum_violations: Vec<SumViolation>,
    class_of: BTreeMap<FacetLabel, usize>,
}

fn find(p: &mut BTreeMap<FacetLabel, FacetLabel>, x: &FacetLabel) -> FacetLabel {
    let mut r = x.clone();
    while let Some(n) = p.get(&r).filter(|n| **n != r) {
        r = n.clone();
    }
    let mut c = x.clone();
    while c != r {
        let n = p.insert(c.clone(), r.clone()).expect("member");
        c = n;
    }
    r
}

impl Reflectofold {
    /// Facet classes by the sum rule, then the corner graphs G̃_t.
    ///
    /// Across each glued pair of tile faces the type-t compact facets of the
    /// two tiles meet at α_source + α_target: π merges them, π/k records a
    /// corner with label k, anything else is recorded as a violation.
    pub fn new(s: &PolytopeState, g: &GluingScheme, report: &GluingReport) -> Result<Reflectofold, ReflectofoldError> {
        if g.base != s.n() {
            return Err(ReflectofoldError::BaseMismatch { scheme: g.base, state: s.n() });
        }
        if !report.geometry_valid() {
            let v: Vec<String> = report.violations.iter().filter(|v| v.is_geometric()).map(|v| v.to_string()).collect();
            return Err(ReflectofoldError::InvalidGluing(v.join("; ")));
        }
        let types = s.compact_types().to_vec();
        let mut parent: BTreeMap<FacetLabel, FacetLabel> =
            s.i1.iter().filter(|e| e.compact).map(|e| (e.label.clone(), e.label.clone())).collect();
        let mut glued: BTreeSet<(usize, u32, FacetLabel, FacetLabel, AngleLabel)> = BTreeSet::new();
        let mut sum_violations = Vec::new();
        for (pi, check) in report.checks.iter().enumerate() {
            let check = check.as_ref().expect("geometry valid");
            for (src, tgt) in &check.matches {
                for (k, &t) in types.iter().enumerate() {
                    let ns = s.model.faces[src.face].node;
                    let nt = s.model.faces[tgt.face].node;
                    let (Some(x), Some(y)) = (s.model.angle(t, ns).fraction(), s.model.angle(t, nt).fraction()) else {
                        continue;
                    };
                    let a = s.tile_labels[src.tile][k].clone();
                    let b = s.tile_labels[tgt.tile][k].clone();
                    let sum = x + y;
                    if sum.is_one() {
                        let (ra, rb) = (find(&mut parent, &a), find(&mut parent, &b));
                        if ra != rb {
                            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                            parent.insert(hi, lo);
                        }
                        continue;
                    }
                    let label = AngleLabel::from_fraction(&sum).unwrap_or(AngleLabel::General(sum.clone()));
                    if label.submultiple().is_none() {
                        let v = SumViolation { pairing: pi, ty: t, a: a.clone(), b: b.clone(), angle: sum };
                        if !sum_violations.contains(&v) {
                            sum_violations.push(v);
                        }
                    }
                    let (a, b) = if a <= b { (a, b) } else { (b, a) };
                    glued.insert((pi, t, a, b, label));
                }
            }
        }

        let mut members: BTreeMap<FacetLabel, Vec<FacetLabel>> = BTreeMap::new();
        for l in parent.keys().cloned().collect::<Vec<_>>() {
            let r = find(&mut parent, &l);
            members.entry(r).or_default().push(l);
        }
        let key = |l: &FacetLabel| s.i3.word_key(&l.subs);
        let mut classes: Vec<FacetClass> = members
            .into_values()
            .map(|mut ms| {
                ms.sort_by_key(key);
                FacetClass { ty: ms[0].base, name: ms[0].clone(), members: ms }
            })
            .collect();
        classes.sort_by(|a, b| (a.ty, key(&a.name)).cmp(&(b.ty, key(&b.name))));
        let class_of: BTreeMap<FacetLabel, usize> =
            classes.iter().enumerate().flat_map(|(i, c)| c.members.iter().map(move |m| (m.clone(), i))).collect();
        let name = |l: &FacetLabel| classes[class_of[l]].name.clone();

        let mut graphs = BTreeMap::new();
        for &t in &types {
            let mut edges = Vec::new();
            for ((a, b), l) in &s.i2[&t].edges {
                edges.push(CornerEdge { a: name(a), b: name(b), label: l.clone(), source: CornerSource::Polytope });
            }
            for (pi, ty, a, b, l) in &glued {
                if *ty == t {
                    edges.push(CornerEdge { a: name(a), b: name(b), label: l.clone(), source: CornerSource::Pairing(*pi) });
                }
            }
            for e in &mut edges {
                if e.b < e.a {
                    std::mem::swap(&mut e.a, &mut e.b);
                }
            }
            edges.sort();
            edges.dedup();
            let vertices = classes.iter().filter(|c| c.ty == t).map(|c| c.name.clone()).collect();
            graphs.insert(t, CornerGraph { ty: t, vertices, edges });
        }

        let mut mixed = BTreeSet::new();
        for row in &s.tile_labels {
            for i in 0..types.len() {
                for j in i + 1..types.len() {
                    let l = s.model.angle(types[i], types[j]);
                    if l.intersects() {
                        mixed.insert((name(&row[i]), name(&row[j]), l.clone()));
                    }
                }
            }
        }
        Ok(Reflectofold {
            scheme: g.name.clone(),
            base: g.base,
            types,
            classes,
            graphs,
            mixed,
            sum_violations,
            class_of,
        })
    }

    pub fn classes_of(&self, ty: u32) -> impl Iterator<Item = &FacetClass> {
        self.classes.iter().filter(move |c| c.ty == ty)
    }

    /// The class containing a compact facet of P_n.
    pub fn class_of(&self, l: &FacetLabel) -> Option<&FacetClass> {
        self.class_of.get(l).map(|&i| &self.classes[i])
    }

    pub fn graph(&self, ty: u32) -> &CornerGraph {
        &self.graphs[&ty]
    }

    /// Type-t matrix over the facets of R. Parallel corners collapse to one
    /// cell; non-submultiple angles are written underlined.
    pub fn adjacency_matrix(&self, ty: u32) -> LabeledMatrix {
        let g = self.graph(ty);
        let n = g.vertices.len();
        let idx: HashMap<&FacetLabel, usize> = g.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut cells = vec![vec![Cell::Zero; n]; n];
        for (i, row) in cells.iter_mut().enumerate() {
            row[i] = Cell::One;
        }
        for e in &g.edges {
            let (i, j) = (idx[&e.a], idx[&e.b]);
            if i == j || cells[i][j] != Cell::Zero {
                continue;
            }
            let c = match &e.label {
                AngleLabel::Submultiple(k) => Cell::Label(*k),
                AngleLabel::General(x) => Cell::Underlined(x.clone()),
                _ => continue,
            };
            cells[i][j] = c.clone();
            cells[j][i] = c;
        }
        LabeledMatrix { labels: g.vertices.clone(), cells }
    }

    pub fn to_json(&self, dev: &DevelopabilityReport) -> serde_json::Value {
        let graph = |g: &CornerGraph| {
            serde_json::json!({
                "vertices": g.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "edges": g.edges.iter().map(|e| serde_json::json!({
                    "a": e.a.to_string(),
                    "b": e.b.to_string(),
                    "label": e.label.to_string(),
                    "source": match e.source {
                        CornerSource::Polytope => "polytope".to_string(),
                        CornerSource::Pairing(i) => format!("pairing {i}"),
                    },
                })).collect::<Vec<_>>(),
            })
        };
        serde_json::json!({
            "scheme": self.scheme,
            "base": format!("P{}", self.base),
            "classes": self.classes,
            "graphs": self.graphs.iter().map(|(t, g)| (t.to_string(), graph(g))).collect::<BTreeMap<_, _>>(),
            "matrices": self.types.iter().map(|&t| (t.to_string(), self.adjacency_matrix(t))).collect::<BTreeMap<_, _>>(),
            "developable": dev.developable(),
            "ef": dev.ef,
            "ac": dev.ac,
            "violations": dev.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// EF: no corner graph has a loop. AC: every corner angle is π/k, parallel
/// corners agree, and corners between different types are π/k.
pub fn check_developability(rf: &Reflectofold) -> DevelopabilityReport {
    let mut violations = Vec::new();
    for g in rf.graphs.values() {
        let mut by_pair: BTreeMap<(&FacetLabel, &FacetLabel), BTreeSet<&AngleLabel>> = BTreeMap::new();
        for e in &g.edges {
            if e.a == e.b {
                let v = DevViolation::Loop { ty: g.ty, facet: e.a.clone(), label: e.label.clone() };
                if !violations.contains(&v) {
                    violations.push(v);
                }
            }
            if e.label.submultiple().is_none() {
                let v = DevViolation::NonSubmultiple { ty: g.ty, a: e.a.clone(), b: e.b.clone(), label: e.label.clone() };
                if !violations.contains(&v) {
                    violations.push(v);
                }
            }
            by_pair.entry((&e.a, &e.b)).or_default().insert(&e.label);
        }
        for ((a, b), ls) in by_pair {
            if ls.len() > 1 {
                violations.push(DevViolation::Inconsistent {
                    ty: g.ty,
                    a: a.clone(),
                    b: b.clone(),
                    labels: ls.into_iter().cloned().collect(),
                });
            }
        }
    }
    for (a, b, l) in &rf.mixed {
        if l.submultiple().is_none() {
            violations.push(DevViolation::Mixed { a: a.clone(), b: b.clone(), label: l.clone() });
        }
    }
    let ef = !violations.iter().any(|v| matches!(v, DevViolation::Loop { .. }));
    let ac = !violations.iter().any(|v| !matches!(v, DevViolation::Loop { .. }));
    DevelopabilityReport { ef, ac, violations }
}

/// Generators are the facets of R; relators are f² and (fg)^k for every
/// pair of facets meeting at angle π/k.
pub fn coxeter_presentation(rf: &Reflectofold) -> Result<CoxeterPresentation, ReflectofoldError> {
    let dev = check_developability(rf);
    if !dev.developable() {
        return Err(ReflectofoldError::NotDevelopable(dev.violations.len()));
    }
    let generators: Vec<FacetLabel> = rf.classes.iter().map(|c| c.name.clone()).collect();
    let mut rels: BTreeSet<Relator> = generators.iter().map(|g| Relator::Square(g.clone())).collect();
    let pair = |a: &FacetLabel, b: &FacetLabel, k: u32| {
        let (f, g) = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        Relator::Pair { f, g, k }
    };
    for g in rf.graphs.values() {
        for e in &g.edges {
            rels.insert(pair(&e.a, &e.b, e.label.submultiple().expect("developable")));
        }
    }
    for (a, b, l) in &rf.mixed {
        rels.insert(pair(a, b, l.submultiple().expect("developable")));
    }
    Ok(CoxeterPresentation { generators, relators: rels.into_iter().collect() })
}

impl CoxeterPresentation {
    pub fn to_text(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| r.to_string()).collect();
        format!("< {} | {} >", gens.join(", "), rels.join(", "))
    }
}
