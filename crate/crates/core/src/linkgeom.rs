//! Exact model of the horospherical link: a convex region tiled by copies of
//! the base prism, with reflection doubling, facet naming, fan-walk corner
//! reconstruction and face pictures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coxeter::{check_seed_conditions, diagram_d, AngleLabel, CoxeterMatrix};
use crate::geom::{fmt_q, q, qf, Isometry3, Plane, Vec3, Q};
use crate::label::FacetLabel;
use crate::table::{GraphError, LabeledGraph};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("unknown facet {0}")]
    UnknownFacet(FacetLabel),
    #[error("cannot double along {facet}: {reason}")]
    DegenerateDoubling { facet: FacetLabel, reason: String },
    #[error("seed diagram does not have the prism-link shape: {0}")]
    SeedShape(String),
    #[error("seed conditions fail:\n{0}")]
    Seed(String),
    #[error("tessellation corrupted: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One face of the base prism L_0.
#[derive(Clone, Debug)]
pub struct BaseFace {
    pub node: u32,
    pub plane: Plane,
    pub vertices: Vec<Vec3>,
}

/// The base prism together with the seed diagram it comes from.
///
/// Faces are stored in the fixed order z=0, z=1, y=0, x+y=1, x=0.
#[derive(Clone, Debug)]
pub struct LinkModel {
    pub matrix: CoxeterMatrix,
    pub faces: Vec<BaseFace>,
    pub compact: Vec<u32>,
    pub vertices: Vec<Vec3>,
    reflections: Vec<Isometry3>,
}

fn prism_vertices() -> Vec<Vec3> {
    let mut v = Vec::new();
    for z in 0..2 {
        for (x, y) in [(0, 0), (1, 0), (0, 1)] {
            v.push(Vec3::int(x, y, z));
        }
    }
    v
}

fn prism_planes() -> [Plane; 5] {
    [
        Plane::axis(2, q(0), false),
        Plane::axis(2, q(1), true),
        Plane::axis(1, q(0), false),
        Plane::new(Vec3::int(1, 1, 0), q(1)),
        Plane::axis(0, q(0), false),
    ]
}

impl LinkModel {
    /// Model for the built-in seed diagram.
    pub fn standard() -> Arc<LinkModel> {
        LinkModel::from_seed(&diagram_d()).expect("built-in seed has a prism link")
    }

    /// Builds the prism model for a seed whose ideal vertex has type
    /// Ã_1 ⊔ C̃_2. The ∞ pair goes to z=0 (smaller node) and z=1; the C̃_2
    /// path c-d-e goes to y=0 (smaller end), x+y=1 (middle) and x=0.
    pub fn from_seed(m: &CoxeterMatrix) -> Result<Arc<LinkModel>, LinkError> {
        let report = check_seed_conditions(m);
        if !report.passes() {
            return Err(LinkError::Seed(report.to_text()));
        }
        let nc: Vec<usize> = report.affine_subdiagrams[0].clone();
        if nc.len() != 5 {
            return Err(LinkError::SeedShape(format!("ideal vertex spanned by {} nodes, expected 5", nc.len())));
        }
        let pairs: Vec<(usize, usize)> = nc
            .iter()
            .flat_map(|&a| nc.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .filter(|&(a, b)| *m.label(a, b) == AngleLabel::Parallel)
            .collect();
        let [(a, b)] = pairs[..] else {
            return Err(LinkError::SeedShape("expected exactly one ∞ edge at the ideal vertex".into()));
        };
        let rest: Vec<usize> = nc.iter().copied().filter(|&v| v != a && v != b).collect();
        let four = AngleLabel::Submultiple(4);
        let two = AngleLabel::Submultiple(2);
        let mid = rest.iter().copied().find(|&d| rest.iter().filter(|&&o| o != d).all(|&o| *m.label(d, o) == four));
        let Some(d) = mid else {
            return Err(LinkError::SeedShape("the remaining three nodes do not form a 4-4 path".into()));
        };
        let ends: Vec<usize> = rest.iter().copied().filter(|&v| v != d).collect();
        if *m.label(ends[0], ends[1]) != two
            || [a, b].iter().any(|&u| rest.iter().any(|&v| *m.label(u, v) != two))
        {
            return Err(LinkError::SeedShape("ideal vertex is not Ã_1 ⊔ C̃_2".into()));
        }
        let nodes = [a, b, ends[0], d, ends[1]];
        let verts = prism_vertices();
        let faces: Vec<BaseFace> = prism_planes()
            .into_iter()
            .zip(nodes)
            .map(|(plane, node)| BaseFace {
                node: node as u32,
                vertices: verts.iter().filter(|v| plane.contains(v)).cloned().collect(),
                plane,
            })
            .collect();
        let reflections = faces.iter().map(|f| f.plane.reflection()).collect();
        Ok(Arc::new(LinkModel {
            matrix: m.clone(),
            faces,
            compact: report.compact.iter().map(|&c| c as u32).collect(),
            vertices: verts,
            reflections,
        }))
    }

    pub fn face_index(&self, node: u32) -> Option<usize> {
        self.faces.iter().position(|f| f.node == node)
    }

    pub fn face_nodes(&self) -> Vec<u32> {
        self.faces.iter().map(|f| f.node).collect()
    }

    /// Diagram label between two distinct node types.
    pub fn angle(&self, a: u32, b: u32) -> &AngleLabel {
        self.matrix.label(a as usize, b as usize)
    }

    pub fn is_compact(&self, node: u32) -> bool {
        self.compact.contains(&node)
    }

    pub fn centroid() -> Vec3 {
        Vec3::new(qf(1, 3), qf(1, 3), qf(1, 2))
    }
}

/// A copy `placement(L_0)` of the base prism.
#[derive(Clone, Debug)]
pub struct PrismTile {
    /// Doubling labels, most recent first.
    pub word: Vec<FacetLabel>,
    pub placement: Isometry3,
    /// Outward planes of the images of the base faces, in base-face order.
    pub face_map: Vec<Plane>,
    pub vertices: Vec<Vec3>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TileFace {
    pub tile: usize,
    pub face: usize,
}

#[derive(Clone, Debug)]
pub struct LinkFacet {
    pub label: FacetLabel,
    pub node: u32,
    pub plane: Plane,
    pub faces: Vec<TileFace>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryMode {
    Box,
    Ambient,
}

/// A compact facet of the 4-dimensional polytope: the union of the type-`ty`
/// facets of `tiles`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactClass {
    pub ty: u32,
    pub label: FacetLabel,
    pub tiles: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CompactClasses {
    pub classes: Vec<CompactClass>,
    types: Vec<u32>,
    of: Vec<Vec<usize>>,
}

impl CompactClasses {
    pub fn class_of(&self, tile: usize, ty: u32) -> &CompactClass {
        let k = self.types.iter().position(|&t| t == ty).expect("compact type");
        &self.classes[self.of[tile][k]]
    }

    pub fn label_of(&self, tile: usize, ty: u32) -> &FacetLabel {
        &self.class_of(tile, ty).label
    }

    pub fn of_type(&self, ty: u32) -> impl Iterator<Item = &CompactClass> {
        self.classes.iter().filter(move |c| c.ty == ty)
    }
}

/// One corner between two compact facets of the same type, found across an
/// interior wall.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerRecord {
    pub a: FacetLabel,
    pub b: FacetLabel,
    pub label: AngleLabel,
    pub tiles: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct PictureTile {
    pub polygon: Vec<[Q; 2]>,
    pub labels: Vec<FacetLabel>,
    pub word: Vec<FacetLabel>,
}

#[derive(Clone, Debug)]
pub struct EdgeLabel {
    pub from: [Q; 2],
    pub to: [Q; 2],
    pub label: FacetLabel,
}

/// The picture of one non-compact facet: its tiles with the compact labels
/// behind them and the neighbouring non-compact facets along its boundary.
#[derive(Clone, Debug)]
pub struct FacePicture {
    pub facet: FacetLabel,
    pub axes: [usize; 2],
    pub outline: Vec<[Q; 2]>,
    pub tiles: Vec<PictureTile>,
    pub edges: Vec<EdgeLabel>,
}

#[derive(Clone, Debug)]
pub struct LinkTessellation {
    model: Arc<LinkModel>,
    history: Vec<FacetLabel>,
    history_planes: Vec<Plane>,
    tiles: Vec<PrismTile>,
    index: HashMap<Isometry3, usize>,
    facets: Vec<LinkFacet>,
}

/// Ordering key for naming: word length, then the doubling step of each
/// letter.
fn name_key(word: &[FacetLabel], chrono: &HashMap<&FacetLabel, usize>) -> (usize, Vec<usize>) {
    (word.len(), word.iter().map(|l| chrono[l]).collect())
}

fn tile_for(model: &LinkModel, word: Vec<FacetLabel>, placement: Isometry3) -> PrismTile {
    let face_map = model.faces.iter().map(|f| f.plane.transform(&placement)).collect();
    let vertices = model.vertices.iter().map(|v| placement.apply(v)).collect();
    PrismTile { word, placement, face_map, vertices }
}

/// Sorts the points of a convex polygon counter-clockwise, dropping
/// duplicates and collinear points.
pub fn convex_hull(points: &[[Q; 2]]) -> Vec<[Q; 2]> {
    let mut pts: Vec<[Q; 2]> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[Q; 2], a: &[Q; 2], b: &[Q; 2]| {
        (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
    };
    let mut lower: Vec<[Q; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<[Q; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl LinkTessellation {
    /// L_0 for the built-in seed.
    pub fn base_link() -> LinkTessellation {
        LinkTessellation::base(LinkModel::standard())
    }

    pub fn base(model: Arc<LinkModel>) -> LinkTessellation {
        let tile = tile_for(&model, Vec::new(), Isometry3::identity());
        let mut index = HashMap::new();
        index.insert(Isometry3::identity(), 0);
        let mut link = LinkTessellation {
            model,
            history: Vec::new(),
            history_planes: Vec::new(),
            tiles: vec![tile],
            index,
            facets: Vec::new(),
        };
        link.facets = link.compute_facets().expect("base prism facets");
        link
    }

    pub fn model(&self) -> &Arc<LinkModel> {
        &self.model
    }

    pub fn history(&self) -> &[FacetLabel] {
        &self.history
    }

    /// Mirror planes of the doublings, in order.
    pub fn history_planes(&self) -> &[Plane] {
        &self.history_planes
    }

    pub fn tiles(&self) -> &[PrismTile] {
        &self.tiles
    }

    pub fn facets(&self) -> &[LinkFacet] {
        &self.facets
    }

    pub fn facet(&self, label: &FacetLabel) -> Option<&LinkFacet> {
        self.facets.iter().find(|f| &f.label == label)
    }

    pub fn tile_index(&self, placement: &Isometry3) -> Option<usize> {
        self.index.get(placement).copied()
    }

    fn chrono(&self) -> HashMap<&FacetLabel, usize> {
        self.history.iter().enumerate().map(|(i, l)| (l, i)).collect()
    }

    /// Ordering key of a tile word for minimal-member naming.
    pub fn word_key(&self, word: &[FacetLabel]) -> (usize, Vec<usize>) {
        name_key(word, &self.chrono())
    }

    /// The tile across face `face` of `tile`, if that face is interior.
    pub fn neighbor(&self, tile: usize, face: usize) -> Option<usize> {
        let p = self.tiles[tile].placement.compose(&self.model.reflections[face]);
        self.tile_index(&p)
    }

    pub fn tile_face_polygon(&self, tf: TileFace) -> Vec<Vec3> {
        let g = &self.tiles[tf.tile].placement;
        self.model.faces[tf.face].vertices.iter().map(|v| g.apply(v)).collect()
    }

    /// Bounding intervals, if the region is a box.
    pub fn region_box(&self) -> Option<[(Q, Q); 3]> {
        if self.facets.iter().any(|f| f.plane.axis_index().is_none()) {
            return None;
        }
        let mut lo: Vec<Q> = self.tiles[0].vertices[0].0.to_vec();
        let mut hi = lo.clone();
        for t in &self.tiles {
            for v in &t.vertices {
                for i in 0..3 {
                    if v.0[i] < lo[i] {
                        lo[i] = v.0[i].clone();
                    }
                    if v.0[i] > hi[i] {
                        hi[i] = v.0[i].clone();
                    }
                }
            }
        }
        Some([
            (lo[0].clone(), hi[0].clone()),
            (lo[1].clone(), hi[1].clone()),
            (lo[2].clone(), hi[2].clone()),
        ])
    }

    /// All distinct tile vertices.
    pub fn vertices(&self) -> BTreeSet<Vec3> {
        self.tiles.iter().flat_map(|t| t.vertices.iter().cloned()).collect()
    }

    /// Region vertices: tile vertices lying on at least three facet planes.
    pub fn corner_points(&self) -> BTreeSet<Vec3> {
        self.vertices()
            .into_iter()
            .filter(|v| self.facets.iter().filter(|f| f.plane.contains(v)).count() >= 3)
            .collect()
    }

    /// Resolves a reflection name: doubling mirrors first, then current
    /// facets, then base faces.
    pub fn resolve_plane(&self, label: &FacetLabel) -> Option<Plane> {
        if let Some(i) = self.history.iter().position(|l| l == label) {
            return Some(self.history_planes[i].clone());
        }
        if let Some(f) = self.facet(label) {
            return Some(f.plane.clone());
        }
        if label.is_atom() {
            let i = self.model.face_index(label.base)?;
            return Some(self.model.faces[i].plane.clone());
        }
        None
    }

    fn compute_facets(&self) -> Result<Vec<LinkFacet>, LinkError> {
        let chrono = self.chrono();
        let mut groups: BTreeMap<Plane, Vec<TileFace>> = BTreeMap::new();
        for (ti, t) in self.tiles.iter().enumerate() {
            for fi in 0..self.model.faces.len() {
                if self.neighbor(ti, fi).is_none() {
                    groups.entry(t.face_map[fi].clone()).or_default().push(TileFace { tile: ti, face: fi });
                }
            }
        }
        let mut facets = Vec::new();
        for (plane, faces) in groups {
            let node = self.model.faces[faces[0].face].node;
            if faces.iter().any(|f| self.model.faces[f.face].node != node) {
                return Err(LinkError::Corrupt(format!("plane {plane} carries faces of different types")));
            }
            let best = faces
                .iter()
                .min_by_key(|f| name_key(&self.tiles[f.tile].word, &chrono))
                .expect("nonempty group");
            let label = FacetLabel::with_subs(node, self.tiles[best.tile].word.clone());
            facets.push(LinkFacet { label, node, plane, faces });
        }
        facets.sort_by(|a, b| a.label.cmp(&b.label));
        Ok(facets)
    }

    /// Doubles the region across the plane of facet `f`.
    pub fn reflect_double(&self, f: &FacetLabel) -> Result<LinkTessellation, LinkError> {
        let facet = self.facet(f).ok_or_else(|| LinkError::UnknownFacet(f.clone()))?;
        let plane = facet.plane.clone();
        let r = plane.reflection();
        let degenerate = |reason: &str| LinkError::DegenerateDoubling { facet: f.clone(), reason: reason.into() };
        let mut next = self.clone();
        let old = self.tiles.len();
        for i in 0..old {
            let t = &self.tiles[i];
            let mut word = Vec::with_capacity(t.word.len() + 1);
            word.push(f.clone());
            word.extend(t.word.iter().cloned());
            let placement = r.compose(&t.placement);
            if next.index.insert(placement.clone(), old + i).is_some() {
                return Err(degenerate("mirror image overlaps the region"));
            }
            next.tiles.push(tile_for(&self.model, word, placement));
        }
        next.history.push(f.clone());
        next.history_planes.push(plane);
        next.facets = next.compute_facets()?;
        for v in next.vertices() {
            if next.facets.iter().any(|g| g.plane.eval(&v).is_positive()) {
                return Err(degenerate("the double is not convex"));
            }
        }
        Ok(next)
    }

    /// Partition of the compact facets of all tiles into facets of the
    /// polytope: a type-t facet continues across an interior wall of type j
    /// when m_{t,j} = 2.
    pub fn compact_facet_classes(&self) -> CompactClasses {
        let types = self.model.compact.clone();
        let n = self.tiles.len();
        let k = types.len();
        let mut parent: Vec<usize> = (0..n * k).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for ti in 0..n {
            for (fi, face) in self.model.faces.iter().enumerate() {
                let Some(nb) = self.neighbor(ti, fi) else { continue };
                for (ki, &t) in types.iter().enumerate() {
                    if *self.model.angle(t, face.node) == AngleLabel::Submultiple(2) {
                        let a = find(&mut parent, ti * k + ki);
                        let b = find(&mut parent, nb * k + ki);
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let chrono = self.chrono();
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n * k {
            let r = find(&mut parent, x);
            members.entry(r).or_default().push(x);
        }
        let mut classes: Vec<(u32, (usize, Vec<usize>), CompactClass)> = members
            .values()
            .map(|xs| {
                let ty = types[xs[0] % k];
                let tiles: Vec<usize> = xs.iter().map(|x| x / k).collect();
                let best = *tiles
                    .iter()
                    .min_by_key(|&&t| name_key(&self.tiles[t].word, &chrono))
                    .expect("nonempty class");
                let key = name_key(&self.tiles[best].word, &chrono);
                let label = FacetLabel::with_subs(ty, self.tiles[best].word.clone());
                (ty, key, CompactClass { ty, label, tiles })
            })
            .collect();
        classes.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        let classes: Vec<CompactClass> = classes.into_iter().map(|c| c.2).collect();
        let mut of = vec![vec![0; k]; n];
        for (ci, c) in classes.iter().enumerate() {
            let ki = types.iter().position(|&t| t == c.ty).expect("type");
            for &t in &c.tiles {
                of[t][ki] = ci;
            }
        }
        CompactClasses { classes, types, of }
    }

    /// Fan walk: every interior wall of type j with m_{t,j} = m > 2 carries a
    /// ridge between the type-t facets of the two adjacent tiles, and the
    /// angle there is the sum π/m + π/m over the two-tile fan.
    pub fn compact_corners(&self, classes: &CompactClasses, t: u32) -> Result<Vec<CornerRecord>, LinkError> {
        let mut out = Vec::new();
        for ti in 0..self.tiles.len() {
            for (fi, face) in self.model.faces.iter().enumerate() {
                let Some(nb) = self.neighbor(ti, fi) else { continue };
                if nb < ti {
                    continue;
                }
                let m = self.model.angle(t, face.node);
                let Some(per_tile) = m.fraction() else { continue };
                if *m == AngleLabel::Submultiple(2) {
                    continue;
                }
                let total = &per_tile + &per_tile;
                let label = AngleLabel::from_fraction(&total)
                    .map_err(|e| LinkError::Corrupt(format!("corner angle {e}")))?;
                out.push(CornerRecord {
                    a: classes.label_of(ti, t).clone(),
                    b: classes.label_of(nb, t).clone(),
                    label,
                    tiles: (ti, nb),
                });
            }
        }
        Ok(out)
    }

    /// Labeled adjacency graph of type-t compact facets reconstructed by the
    /// fan walk. Parallel equal-labeled edges collapse; distinct labels or
    /// loops are errors.
    pub fn compact_adjacency(&self, t: u32) -> Result<LabeledGraph, LinkError> {
        let classes = self.compact_facet_classes();
        let mut g = LabeledGraph::new(classes.of_type(t).map(|c| c.label.clone()).collect());
        for c in self.compact_corners(&classes, t)? {
            g.add_edge(&c.a, &c.b, c.label)?;
        }
        Ok(g)
    }

    /// Angle between two non-compact facets, from their outward normals, if
    /// they share an edge.
    pub fn noncompact_angle(&self, a: &FacetLabel, b: &FacetLabel) -> Result<Option<AngleLabel>, LinkError> {
        let fa = self.facet(a).ok_or_else(|| LinkError::UnknownFacet(a.clone()))?;
        let fb = self.facet(b).ok_or_else(|| LinkError::UnknownFacet(b.clone()))?;
        if a == b {
            return Ok(None);
        }
        let shared: BTreeSet<Vec3> = fa
            .faces
            .iter()
            .flat_map(|&tf| self.tile_face_polygon(tf))
            .filter(|v| fb.plane.contains(v))
            .collect();
        if shared.len() < 2 {
            return Ok(None);
        }
        interior_angle(&fa.plane, &fb.plane).map(Some)
    }

    /// Angle between a compact class and a non-compact facet, read off the
    /// boundary faces of the class's tiles.
    pub fn compact_noncompact_angle(&self, class: &CompactClass, f: &FacetLabel) -> Result<Option<AngleLabel>, LinkError> {
        let facet = self.facet(f).ok_or_else(|| LinkError::UnknownFacet(f.clone()))?;
        let l = self.model.angle(class.ty, facet.node);
        if !l.intersects() {
            return Ok(None);
        }
        let meets = facet.faces.iter().any(|tf| class.tiles.contains(&tf.tile));
        Ok(meets.then(|| l.clone()))
    }

    /// Tests whether `g` permutes the tiles of the region (box mode) or the
    /// tiles of the tessellation generated by reflecting the region in its
    /// facets (ambient mode). Tiles must match with their face types.
    pub fn is_tessellation_symmetry(&self, g: &Isometry3, mode: SymmetryMode) -> bool {
        if !g.is_orthogonal() {
            return false;
        }
        self.tiles.iter().all(|t| {
            let h = g.compose(&t.placement);
            match mode {
                SymmetryMode::Box => self.index.contains_key(&h),
                SymmetryMode::Ambient => match self.fold(h) {
                    Some(h) => self.index.contains_key(&h),
                    None => false,
                },
            }
        })
    }

    /// Reflects a placed prism back into the region across facet planes
    /// until its centroid lies inside.
    fn fold(&self, mut h: Isometry3) -> Option<Isometry3> {
        let c0 = LinkModel::centroid();
        for _ in 0..256 {
            let c = h.apply(&c0);
            match self.facets.iter().find(|f| f.plane.eval(&c).is_positive()) {
                Some(f) => h = f.plane.reflection().compose(&h),
                None => return Some(h),
            }
        }
        None
    }

    /// Picture of a non-compact facet in the two coordinates that survive
    /// dropping the dominant normal axis.
    pub fn face_picture(&self, f: &FacetLabel, classes: &CompactClasses) -> Result<FacePicture, LinkError> {
        let facet = self.facet(f).ok_or_else(|| LinkError::UnknownFacet(f.clone()))?;
        let n = &facet.plane.normal.0;
        let mut drop = 0;
        for i in 1..3 {
            if n[i].abs() > n[drop].abs() {
                drop = i;
            }
        }
        let axes: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
        let axes = [axes[0], axes[1]];
        let proj = |v: &Vec3| [v.0[axes[0]].clone(), v.0[axes[1]].clone()];
        let mut all = Vec::new();
        let mut faces = facet.faces.clone();
        faces.sort();
        let mut tiles = Vec::new();
        for tf in &faces {
            let poly: Vec<[Q; 2]> = self.tile_face_polygon(*tf).iter().map(proj).collect();
            all.extend(poly.iter().cloned());
            let labels = self.model.compact.iter().map(|&t| classes.label_of(tf.tile, t).clone()).collect();
            tiles.push(PictureTile {
                polygon: convex_hull(&poly),
                labels,
                word: self.tiles[tf.tile].word.clone(),
            });
        }
        let mut edges = Vec::new();
        for other in &self.facets {
            if other.label == facet.label {
                continue;
            }
            let mut on: Vec<[Q; 2]> = faces
                .iter()
                .flat_map(|&tf| self.tile_face_polygon(tf))
                .filter(|v| other.plane.contains(v))
                .map(|v| proj(&v))
                .collect();
            on.sort();
            on.dedup();
            if on.len() >= 2 {
                edges.push(EdgeLabel {
                    from: on[0].clone(),
                    to: on[on.len() - 1].clone(),
                    label: other.label.clone(),
                });
            }
        }
        Ok(FacePicture { facet: facet.label.clone(), axes, outline: convex_hull(&all), tiles, edges })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let q3 = |v: &Vec3| v.0.iter().map(fmt_q).collect::<Vec<_>>();
        let bx = self.region_box().map(|b| b.iter().map(|(l, h)| [fmt_q(l), fmt_q(h)]).collect::<Vec<_>>());
        serde_json::json!({
            "box": bx,
            "history": self.history.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "tiles": self.tiles.iter().map(|t| serde_json::json!({
                "word": t.word.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "matrix": t.placement.linear.0.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "translation": q3(&t.placement.translation),
            })).collect::<Vec<_>>(),
            "facets": self.facets.iter().map(|f| serde_json::json!({
                "label": f.label.to_string(),
                "plane": f.plane.to_string(),
                "faces": f.faces.iter().map(|tf| [tf.tile, tf.face]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Interior angle between two outward-oriented planes meeting along a line,
/// for the angles that occur in the prism tessellation.
pub fn interior_angle(a: &Plane, b: &Plane) -> Result<AngleLabel, LinkError> {
    let d = a.normal.dot(&b.normal);
    if d.is_zero() {
        return Ok(AngleLabel::Submultiple(2));
    }
    let cos2 = &d * &d / (a.normal.dot(&a.normal) * b.normal.dot(&b.normal));
    let base = if cos2 == qf(1, 2) {
        qf(1, 4)
    } else if cos2 == qf(1, 4) {
        qf(1, 3)
    } else if cos2 == qf(3, 4) {
        qf(1, 6)
    } else {
        return Err(LinkError::Corrupt(format!("unsupported angle between {a} and {b}")));
    };
    // Outward normals: the interior angle is π minus the angle between them.
    let frac = if d.is_negative() { base } else { q(1) - base };
    AngleLabel::from_fraction(&frac).map_err(|e| LinkError::Corrupt(e.to_string()))
}
