//! Incremental bookkeeping of the doubled polytopes P_n: the facet list, the
//! labeled adjacency graphs of compact facets, and the link tessellation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::coxeter::{AngleLabel, CoxeterMatrix};
use crate::label::FacetLabel;
use crate::linkgeom::{LinkError, LinkModel, LinkTessellation};
use crate::table::{GraphError, LabeledGraph, LabeledMatrix};

/// Doubling labels of the canonical sequence P_0 → P_8.
pub const CANONICAL_SEQUENCE: [&str; 8] = ["5", "2", "4_5", "4", "1", "6", "6_5", "1_2"];

#[derive(Debug, Error)]
pub enum DoublingError {
    #[error("facet {0} is not a facet of the polytope")]
    UnknownFacet(FacetLabel),
    #[error("facet {0} is compact; only non-compact facets are doubled")]
    CompactFacet(FacetLabel),
    #[error("facet {facet} is not admissible: it meets {other} at angle label {angle}")]
    Inadmissible { facet: FacetLabel, other: FacetLabel, angle: AngleLabel },
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetEntry {
    pub label: FacetLabel,
    pub compact: bool,
}

/// Facets meeting `owner`, each with its dihedral angle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncidenceList {
    pub owner: FacetLabel,
    pub entries: BTreeSet<(FacetLabel, AngleLabel)>,
}

impl IncidenceList {
    pub fn angle(&self, other: &FacetLabel) -> Option<&AngleLabel> {
        self.entries.iter().find(|(l, _)| l == other).map(|(_, a)| a)
    }
}

/// State of P_n. `tile_labels[w][k]` names the compact facet of type
/// `model.compact[k]` that tile `w` of the link contributes to.
#[derive(Clone, Debug)]
pub struct PolytopeState {
    pub model: Arc<LinkModel>,
    pub history: Vec<FacetLabel>,
    pub i1: Vec<FacetEntry>,
    pub i2: BTreeMap<u32, LabeledGraph>,
    pub i3: LinkTessellation,
    pub tile_labels: Vec<Vec<FacetLabel>>,
}

pub fn initial_state(m: &CoxeterMatrix) -> Result<PolytopeState, DoublingError> {
    let model = LinkModel::from_seed(m)?;
    Ok(PolytopeState::initial(model))
}

pub fn double(s: &PolytopeState, f: &FacetLabel) -> Result<PolytopeState, DoublingError> {
    s.double(f)
}

/// P_0 through P_8 along the canonical sequence.
pub fn canonical_sequence(m: &CoxeterMatrix) -> Result<Vec<PolytopeState>, DoublingError> {
    let mut states = vec![initial_state(m)?];
    for l in CANONICAL_SEQUENCE {
        let next = states.last().expect("nonempty").double(&FacetLabel::parse(l).expect("canonical label"))?;
        states.push(next);
    }
    Ok(states)
}

pub fn incidence_list(s: &PolytopeState, a: &FacetLabel) -> Result<IncidenceList, DoublingError> {
    s.incidence_list(a)
}

pub fn adjacency_matrix(s: &PolytopeState, t: u32) -> LabeledMatrix {
    s.adjacency_matrix(t)
}

impl PolytopeState {
    pub fn initial(model: Arc<LinkModel>) -> PolytopeState {
        let i1 = model
            .matrix
            .nodes()
            .map(|v| FacetEntry { label: FacetLabel::atom(v as u32), compact: model.is_compact(v as u32) })
            .collect();
        let i2 = model
            .compact
            .iter()
            .map(|&t| (t, LabeledGraph::new(vec![FacetLabel::atom(t)])))
            .collect();
        let tile_labels = vec![model.compact.iter().map(|&t| FacetLabel::atom(t)).collect()];
        let i3 = LinkTessellation::base(model.clone());
        PolytopeState { model, history: Vec::new(), i1, i2, i3, tile_labels }
    }

    pub fn n(&self) -> usize {
        self.history.len()
    }

    pub fn compact_types(&self) -> &[u32] {
        &self.model.compact
    }

    pub fn facet_labels(&self) -> Vec<FacetLabel> {
        self.i1.iter().map(|e| e.label.clone()).collect()
    }

    pub fn entry(&self, a: &FacetLabel) -> Option<&FacetEntry> {
        self.i1.iter().find(|e| &e.label == a)
    }

    fn type_index(&self, t: u32) -> usize {
        self.model.compact.iter().position(|&c| c == t).expect("compact type")
    }

    fn class_tiles(&self, a: &FacetLabel) -> Vec<usize> {
        let k = self.type_index(a.base);
        (0..self.tile_labels.len()).filter(|&w| &self.tile_labels[w][k] == a).collect()
    }

    /// Angle between compact `a` and non-compact `f`, if they meet.
    fn compact_meets(&self, a: &FacetLabel, f: &FacetLabel) -> Result<Option<AngleLabel>, DoublingError> {
        let facet = self.i3.facet(f).ok_or_else(|| DoublingError::UnknownFacet(f.clone()))?;
        let l = self.model.angle(a.base, facet.node);
        if !l.intersects() {
            return Ok(None);
        }
        let k = self.type_index(a.base);
        let meets = facet.faces.iter().any(|tf| self.tile_labels[tf.tile][k] == *a);
        Ok(meets.then(|| l.clone()))
    }

    pub fn incidence_list(&self, a: &FacetLabel) -> Result<IncidenceList, DoublingError> {
        let owner = self.entry(a).ok_or_else(|| DoublingError::UnknownFacet(a.clone()))?;
        let mut entries = BTreeSet::new();
        for other in &self.i1 {
            let b = &other.label;
            if b == a {
                continue;
            }
            let angle = match (owner.compact, other.compact) {
                (false, false) => self.i3.noncompact_angle(a, b)?,
                (true, false) => self.compact_meets(a, b)?,
                (false, true) => self.compact_meets(b, a)?,
                (true, true) if a.base == b.base => self.i2[&a.base].label(a, b).cloned(),
                (true, true) => {
                    let l = self.model.angle(a.base, b.base);
                    let ta = self.class_tiles(a);
                    let shared = self.class_tiles(b).iter().any(|w| ta.contains(w));
                    (l.intersects() && shared).then(|| l.clone())
                }
            };
            if let Some(angle) = angle {
                entries.insert((b.clone(), angle));
            }
        }
        Ok(IncidenceList { owner: a.clone(), entries })
    }

    /// Checks that `f` is a non-compact facet all of whose angles are even
    /// submultiples of π.
    pub fn check_admissible(&self, f: &FacetLabel) -> Result<(), DoublingError> {
        let e = self.entry(f).ok_or_else(|| DoublingError::UnknownFacet(f.clone()))?;
        if e.compact {
            return Err(DoublingError::CompactFacet(f.clone()));
        }
        for (other, angle) in self.incidence_list(f)?.entries {
            if !angle.is_even_submultiple() {
                return Err(DoublingError::Inadmissible { facet: f.clone(), other, angle });
            }
        }
        Ok(())
    }

    /// Non-compact admissible facets, in facet-list order.
    pub fn admissible_facets(&self) -> Vec<FacetLabel> {
        self.i1
            .iter()
            .filter(|e| !e.compact && self.check_admissible(&e.label).is_ok())
            .map(|e| e.label.clone())
            .collect()
    }

    /// Doubles P_n along `f`.
    ///
    /// A facet meeting `f` at π/2 is kept (it is its own mirror image); any
    /// other facet is listed followed by its mirror copy. Edges of the
    /// adjacency graphs are copied to the mirrors, and a compact facet that
    /// meets `f` at π/2k with k > 1 gains a corner of label k with its copy.
    pub fn double(&self, f: &FacetLabel) -> Result<PolytopeState, DoublingError> {
        self.check_admissible(f)?;
        let i3 = self.i3.reflect_double(f)?;
        let incidence = self.incidence_list(f)?;
        let right = AngleLabel::Submultiple(2);
        let mut kept: BTreeSet<FacetLabel> = BTreeSet::new();
        let mut i1 = Vec::new();
        for e in &self.i1 {
            if &e.label == f {
                continue;
            }
            i1.push(e.clone());
            if incidence.angle(&e.label) == Some(&right) {
                kept.insert(e.label.clone());
            } else {
                i1.push(FacetEntry { label: e.label.prepend(f), compact: e.compact });
            }
        }
        let mirror = |x: &FacetLabel| if kept.contains(x) { x.clone() } else { x.prepend(f) };
        let mut i2 = BTreeMap::new();
        for (&t, g) in &self.i2 {
            let vertices = i1.iter().filter(|e| e.compact && e.label.base == t).map(|e| e.label.clone()).collect();
            let mut ng = LabeledGraph::new(vertices);
            for ((a, b), l) in &g.edges {
                ng.add_edge(a, b, l.clone())?;
                ng.add_edge(&mirror(a), &mirror(b), l.clone())?;
            }
            for a in &g.vertices {
                if let Some(AngleLabel::Submultiple(m)) = incidence.angle(a) {
                    if *m > 2 {
                        ng.add_edge(a, &a.prepend(f), AngleLabel::Submultiple(m / 2))?;
                    }
                }
            }
            i2.insert(t, ng);
        }
        let mut tile_labels = self.tile_labels.clone();
        for row in &self.tile_labels {
            tile_labels.push(row.iter().map(&mirror).collect());
        }
        let mut history = self.history.clone();
        history.push(f.clone());
        Ok(PolytopeState { model: self.model.clone(), history, i1, i2, i3, tile_labels })
    }

    /// Adjacency matrix of type-t compact facets in facet-list order.
    pub fn adjacency_matrix(&self, t: u32) -> LabeledMatrix {
        self.i2[&t].matrix()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n(),
            "history": self.history.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "i1": self.i1.iter().map(|e| serde_json::json!({"label": e.label.to_string(), "compact": e.compact})).collect::<Vec<_>>(),
            "i2": self.i2.iter().map(|(t, g)| (t.to_string(), serde_json::json!({
                "vertices": g.vertices.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "edges": g.edges.iter().map(|((a, b), l)| [a.to_string(), b.to_string(), l.to_string()]).collect::<Vec<_>>(),
            }))).collect::<serde_json::Map<_, _>>(),
            "i3": self.i3.to_json(),
        })
    }
}

/// Facet list and compact adjacency graphs recovered from a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstructed {
    pub noncompact: BTreeSet<FacetLabel>,
    pub graphs: BTreeMap<u32, LabeledGraph>,
}

/// A way of obtaining I1/I2 for a state.
pub trait Reconstruction: Send + Sync {
    fn name(&self) -> &'static str;
    fn reconstruct(&self, s: &PolytopeState) -> Result<Reconstructed, DoublingError>;
}

/// Reads the incrementally maintained lists.
pub struct Incremental;

/// Recomputes everything from the link tessellation alone.
pub struct FanWalk;

impl Reconstruction for Incremental {
    fn name(&self) -> &'static str {
        "incremental"
    }

    fn reconstruct(&self, s: &PolytopeState) -> Result<Reconstructed, DoublingError> {
        Ok(Reconstructed {
            noncompact: s.i1.iter().filter(|e| !e.compact).map(|e| e.label.clone()).collect(),
            graphs: s.i2.clone(),
        })
    }
}

impl Reconstruction for FanWalk {
    fn name(&self) -> &'static str {
        "fanwalk"
    }

    fn reconstruct(&self, s: &PolytopeState) -> Result<Reconstructed, DoublingError> {
        let mut graphs = BTreeMap::new();
        for &t in &s.model.compact {
            graphs.insert(t, s.i3.compact_adjacency(t)?);
        }
        Ok(Reconstructed { noncompact: s.i3.facets().iter().map(|f| f.label.clone()).collect(), graphs })
    }
}

pub fn reconstructions() -> Vec<Box<dyn Reconstruction>> {
    vec![Box::new(Incremental), Box::new(FanWalk)]
}

pub fn reconstruction(name: &str) -> Option<Box<dyn Reconstruction>> {
    reconstructions().into_iter().find(|r| r.name() == name)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub ok: bool,
    pub divergence: Option<String>,
}

fn first_divergence(a: &Reconstructed, b: &Reconstructed) -> Option<String> {
    if a.noncompact != b.noncompact {
        let only_a: Vec<String> = a.noncompact.difference(&b.noncompact).map(|l| l.to_string()).collect();
        let only_b: Vec<String> = b.noncompact.difference(&a.noncompact).map(|l| l.to_string()).collect();
        return Some(format!("non-compact facets differ: incremental only {only_a:?}, oracle only {only_b:?}"));
    }
    for (t, ga) in &a.graphs {
        let Some(gb) = b.graphs.get(t) else {
            return Some(format!("type {t} graph missing from oracle"));
        };
        let va: BTreeSet<_> = ga.vertices.iter().collect();
        let vb: BTreeSet<_> = gb.vertices.iter().collect();
        if va != vb {
            let only_a: Vec<String> = va.difference(&vb).map(|l| l.to_string()).collect();
            let only_b: Vec<String> = vb.difference(&va).map(|l| l.to_string()).collect();
            return Some(format!("type {t} facets differ: incremental only {only_a:?}, oracle only {only_b:?}"));
        }
        for (k, la) in &ga.edges {
            match gb.edges.get(k) {
                Some(lb) if lb == la => {}
                Some(lb) => return Some(format!("type {t} edge {} -- {}: incremental {la}, oracle {lb}", k.0, k.1)),
                None => return Some(format!("type {t} edge {} -- {} ({la}) missing from oracle", k.0, k.1)),
            }
        }
        for (k, lb) in &gb.edges {
            if !ga.edges.contains_key(k) {
                return Some(format!("type {t} edge {} -- {} ({lb}) missing from incremental state", k.0, k.1));
            }
        }
    }
    None
}

/// Compares the incremental state with the fan-walk reconstruction from the
/// link, including the per-tile compact labels.
pub fn verify_against_oracle(s: &PolytopeState) -> OracleReport {
    let report = |divergence: Option<String>| OracleReport { n: s.n(), ok: divergence.is_none(), divergence };
    let inc = match Incremental.reconstruct(s) {
        Ok(r) => r,
        Err(e) => return report(Some(e.to_string())),
    };
    let fan = match FanWalk.reconstruct(s) {
        Ok(r) => r,
        Err(e) => return report(Some(format!("oracle failed: {e}"))),
    };
    if let Some(d) = first_divergence(&inc, &fan) {
        return report(Some(d));
    }
    let classes = s.i3.compact_facet_classes();
    for (w, row) in s.tile_labels.iter().enumerate() {
        for (k, &t) in s.model.compact.iter().enumerate() {
            let oracle = classes.label_of(w, t);
            if &row[k] != oracle {
                return report(Some(format!("tile {w} type {t}: incremental {}, oracle {oracle}", row[k])));
            }
        }
    }
    report(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::diagram_d;
    use crate::label::fl;
    use crate::table::Cell;

    fn names(s: &PolytopeState) -> Vec<String> {
        s.i1.iter().map(|e| e.label.to_string()).collect()
    }

    #[test]
    fn p0_and_p1() {
        let p0 = initial_state(&diagram_d()).unwrap();
        assert_eq!(names(&p0), ["1", "2", "3", "4", "5", "6", "7"]);
        assert!(p0.i2.values().all(|g| g.vertices.len() == 1 && g.edges.is_empty()));
        let i = p0.incidence_list(&fl("5")).unwrap();
        for a in ["1", "2", "3", "7"] {
            assert_eq!(i.angle(&fl(a)), Some(&AngleLabel::Submultiple(2)), "{a}");
        }
        assert_eq!(i.angle(&fl("4")), Some(&AngleLabel::Submultiple(4)));
        assert_eq!(i.angle(&fl("6")), Some(&AngleLabel::Submultiple(4)));
        let i3 = p0.incidence_list(&fl("3")).unwrap();
        assert_eq!(i3.angle(&fl("2")), Some(&AngleLabel::Submultiple(4)));
        assert_eq!(i3.angle(&fl("4")), Some(&AngleLabel::Submultiple(6)));
        let p1 = p0.double(&fl("5")).unwrap();
        assert_eq!(names(&p1), ["1", "2", "3", "4", "4_5", "6", "6_5", "7"]);
        let p2 = p1.double(&fl("2")).unwrap();
        assert_eq!(names(&p2), ["1", "1_2", "3", "3_2", "4", "4_5", "6", "6_5", "7"]);
        let m = p2.adjacency_matrix(3);
        assert_eq!(m.cells, vec![vec![Cell::One, Cell::Label(2)], vec![Cell::Label(2), Cell::One]]);
        assert!(matches!(p2.double(&fl("3")), Err(DoublingError::CompactFacet(_))));
        assert!(matches!(p2.double(&fl("2")), Err(DoublingError::UnknownFacet(_))));
    }

    #[test]
    fn odd_seed_rejected() {
        let mut d = diagram_d();
        d.set(3, 2, AngleLabel::Submultiple(3));
        assert!(initial_state(&d).is_err());
    }

    #[test]
    fn canonical_states_agree_with_oracle() {
        let states = canonical_sequence(&diagram_d()).unwrap();
        assert_eq!(states.len(), 9);
        assert_eq!(states[8].i3.tiles().len(), 256);
        for s in &states {
            let r = verify_against_oracle(s);
            assert!(r.ok, "P_{}: {:?}", s.n(), r.divergence);
        }
    }

    #[test]
    fn corrupted_edge_is_reported() {
        let states = canonical_sequence(&diagram_d()).unwrap();
        let mut s = states[4].clone();
        let g = s.i2.get_mut(&3).unwrap();
        let key = g.edges.keys().next().unwrap().clone();
        g.edges.insert(key.clone(), AngleLabel::Submultiple(5));
        let r = verify_against_oracle(&s);
        assert!(!r.ok);
        let d = r.divergence.unwrap();
        assert!(d.contains(&format!("{} -- {}: incremental 5", key.0, key.1)), "{d}");
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(reconstruction("fanwalk").unwrap().name(), "fanwalk");
        assert!(reconstruction("nope").is_none());
    }
}
