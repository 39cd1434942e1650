//! Coxeter diagrams: DSL parsing, catalog classification of subdiagrams,
//! ideal-vertex detection and the seed conditions (a)/(b).

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::geom::{fmt_q, Q};

/// Dihedral angle between two facets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AngleLabel {
    /// Angle π/k.
    Submultiple(u32),
    /// Diagram label ∞.
    Parallel,
    /// Dashed edge.
    Ultraparallel,
    /// Angle qπ for 0 < q < 1, q not of the form 1/k.
    General(Q),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AngleError {
    #[error("angle {0}π is outside (0, π)")]
    OutOfRange(String),
}

impl AngleLabel {
    /// Builds the label for an angle `frac * π`.
    pub fn from_fraction(frac: &Q) -> Result<AngleLabel, AngleError> {
        if !frac.is_positive() || *frac >= Q::one() {
            return Err(AngleError::OutOfRange(fmt_q(frac)));
        }
        let inv = frac.recip();
        if inv.is_integer() {
            let k: u32 = inv.to_integer().try_into().map_err(|_| AngleError::OutOfRange(fmt_q(frac)))?;
            Ok(AngleLabel::Submultiple(k))
        } else {
            Ok(AngleLabel::General(frac.clone()))
        }
    }

    /// The angle as a multiple of π, if the facets intersect.
    pub fn fraction(&self) -> Option<Q> {
        match self {
            AngleLabel::Submultiple(k) => Some(Q::new(1.into(), (*k).into())),
            AngleLabel::General(x) => Some(x.clone()),
            _ => None,
        }
    }

    pub fn intersects(&self) -> bool {
        matches!(self, AngleLabel::Submultiple(_) | AngleLabel::General(_))
    }

    pub fn is_even_submultiple(&self) -> bool {
        matches!(self, AngleLabel::Submultiple(k) if k % 2 == 0)
    }

    pub fn submultiple(&self) -> Option<u32> {
        match self {
            AngleLabel::Submultiple(k) => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for AngleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleLabel::Submultiple(k) => write!(f, "{k}"),
            AngleLabel::Parallel => write!(f, "inf"),
            AngleLabel::Ultraparallel => write!(f, "div"),
            AngleLabel::General(x) => write!(f, "_{}_", fmt_q(x)),
        }
    }
}

impl Serialize for AngleLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Symmetric label table of a Coxeter diagram. Nodes are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterMatrix {
    n: usize,
    labels: Vec<Vec<Option<AngleLabel>>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoxeterError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("line {line}: duplicate edge between {i} and {j}")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: label {label} is below 2")]
    LabelTooSmall { line: usize, label: u64 },
    #[error("line {line}: node {node} out of range 1..={n}")]
    NodeOutOfRange { line: usize, node: usize, n: usize },
    #[error("line {line}: loop edge at node {node}")]
    LoopEdge { line: usize, node: usize },
    #[error("subdiagram contains the ultraparallel pair ({0}, {1})")]
    UltraparallelInSubset(usize, usize),
    #[error("node subset is empty or out of range")]
    BadSubset,
    #[error("expected exactly one maximal affine subdiagram, found {0}")]
    IdealVertexCount(usize),
}

impl CoxeterMatrix {
    /// Diagram with `n` nodes and every pair at angle π/2.
    pub fn orthogonal(n: usize) -> Self {
        let labels = (0..n)
            .map(|i| (0..n).map(|j| if i == j { None } else { Some(AngleLabel::Submultiple(2)) }).collect())
            .collect();
        CoxeterMatrix { n, labels }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    /// Label between distinct nodes `i`, `j` (1-based). Panics on `i == j`.
    pub fn label(&self, i: usize, j: usize) -> &AngleLabel {
        self.labels[i - 1][j - 1].as_ref().expect("diagonal entry has no angle")
    }

    pub fn set(&mut self, i: usize, j: usize, l: AngleLabel) {
        assert!(i != j);
        self.labels[i - 1][j - 1] = Some(l.clone());
        self.labels[j - 1][i - 1] = Some(l);
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i-1]`.
    pub fn permuted(&self, perm: &[usize]) -> CoxeterMatrix {
        let mut m = CoxeterMatrix::orthogonal(self.n);
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                m.set(perm[i - 1], perm[j - 1], self.label(i, j).clone());
            }
        }
        m
    }

    /// Sub-diagram on `nodes` renumbered 1..=k in the given order.
    pub fn restricted(&self, nodes: &[usize]) -> CoxeterMatrix {
        let mut m = CoxeterMatrix::orthogonal(nodes.len());
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate().skip(a + 1) {
                m.set(a + 1, b + 1, self.label(i, j).clone());
            }
        }
        m
    }

    /// Renders the diagram in the DSL.
    pub fn to_dsl(&self) -> String {
        let mut out = format!("nodes: {}\n", self.n);
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                match self.label(i, j) {
                    AngleLabel::Submultiple(2) => {}
                    AngleLabel::Submultiple(k) => out.push_str(&format!("edge {i} {j} {k}\n")),
                    AngleLabel::Parallel => out.push_str(&format!("edge {i} {j} inf\n")),
                    AngleLabel::Ultraparallel => out.push_str(&format!("div {i} {j}\n")),
                    AngleLabel::General(_) => unreachable!("diagrams carry no general angles"),
                }
            }
        }
        out
    }
}

/// The 7-node cycle diagram of the seed polytope.
pub fn diagram_d() -> CoxeterMatrix {
    let mut m = CoxeterMatrix::orthogonal(7);
    for (i, j, k) in [(6, 5, 4), (5, 4, 4), (4, 3, 6), (3, 2, 4), (1, 7, 4), (7, 6, 6)] {
        m.set(i, j, AngleLabel::Submultiple(k));
    }
    m.set(2, 1, AngleLabel::Parallel);
    m
}

/// DSL source of the seed diagram, shipped alongside the built-in constant.
pub const DIAGRAM_D_DSL: &str = include_str!("../data/d.cox");

/// Parses the diagram DSL: `nodes: N` first, then `edge i j m|inf` and `div i j`.
pub fn parse_diagram(text: &str) -> Result<CoxeterMatrix, CoxeterError> {
    let mut m: Option<CoxeterMatrix> = None;
    let mut seen = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let indent = body.len() - body.trim_start().len();
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |column: usize, msg: &str| CoxeterError::Syntax { line, column, msg: msg.to_string() };
        let Some(mat) = m.as_mut() else {
            let Some(rest) = body.strip_prefix("nodes:") else {
                return Err(syntax(indent + 1, "expected `nodes: <INT>` as the first directive"));
            };
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| syntax(indent + 7, "node count must be a positive integer"))?;
            if n == 0 {
                return Err(syntax(indent + 7, "node count must be a positive integer"));
            }
            m = Some(CoxeterMatrix::orthogonal(n));
            continue;
        };
        let toks: Vec<(usize, &str)> = tokens(body).map(|(c, t)| (c + indent + 1, t)).collect();
        let (kind, want) = match toks[0].1 {
            "edge" => ("edge", 4),
            "div" => ("div", 3),
            "nodes:" => return Err(syntax(toks[0].0, "`nodes:` may appear only once")),
            _ => return Err(syntax(toks[0].0, "unknown directive")),
        };
        if toks.len() != want {
            let col = toks.get(want).map(|t| t.0).unwrap_or(indent + body.len() + 1);
            return Err(syntax(col, &format!("`{kind}` takes {} arguments", want - 1)));
        }
        let node = |k: usize| -> Result<usize, CoxeterError> {
            let (col, t) = toks[k];
            let v: usize = t.parse().map_err(|_| syntax(col, "node index must be an integer"))?;
            if v == 0 || v > mat.n {
                return Err(CoxeterError::NodeOutOfRange { line, node: v, n: mat.n });
            }
            Ok(v)
        };
        let i = node(1)?;
        let j = node(2)?;
        if i == j {
            return Err(CoxeterError::LoopEdge { line, node: i });
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(CoxeterError::DuplicateEdge { line, i, j });
        }
        let label = if kind == "div" {
            AngleLabel::Ultraparallel
        } else {
            let (col, t) = toks[3];
            if t == "inf" || t == "∞" {
                AngleLabel::Parallel
            } else {
                let v: u64 = t.parse().map_err(|_| syntax(col, "edge label must be an integer or `inf`"))?;
                if v < 2 {
                    return Err(CoxeterError::LabelTooSmall { line, label: v });
                }
                let v: u32 = v.try_into().map_err(|_| syntax(col, "edge label too large"))?;
                AngleLabel::Submultiple(v)
            }
        };
        mat.set(i, j, label);
    }
    m.ok_or(CoxeterError::Syntax { line: 1, column: 1, msg: "missing `nodes:` directive".into() })
}

fn tokens(s: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((st, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    out.into_iter()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Spherical,
    Affine,
    Other,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassKind::Spherical => "spherical",
            ClassKind::Affine => "affine",
            ClassKind::Other => "other",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub kind: ClassKind,
    /// Catalog name such as `A_3`, `I_2(6)`, `Ã_1`, `C̃_2`.
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramClass {
    pub kind: ClassKind,
    pub components: Vec<Component>,
}

impl DiagramClass {
    /// Component names joined with `⊔`, sorted for comparison.
    pub fn signature(&self) -> String {
        let mut names: Vec<String> =
            self.components.iter().map(|c| c.name.clone().unwrap_or_else(|| "?".into())).collect();
        names.sort();
        names.join(" ⊔ ")
    }
}

impl fmt::Display for DiagramClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> =
            self.components.iter().map(|c| c.name.clone().unwrap_or_else(|| "?".into())).collect();
        write!(f, "{} ({})", self.kind, names.join(" ⊔ "))
    }
}

/// Classifies the induced subdiagram on `s` by matching each connected
/// component against the finite and affine Coxeter catalogs.
pub fn classify_subdiagram(m: &CoxeterMatrix, s: &[usize]) -> Result<DiagramClass, CoxeterError> {
    let nodes: BTreeSet<usize> = s.iter().copied().collect();
    if nodes.is_empty() || nodes.iter().any(|&v| v == 0 || v > m.n) {
        return Err(CoxeterError::BadSubset);
    }
    let nodes: Vec<usize> = nodes.into_iter().collect();
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            if *m.label(i, j) == AngleLabel::Ultraparallel {
                return Err(CoxeterError::UltraparallelInSubset(i, j));
            }
        }
    }
    let linked = |i: usize, j: usize| *m.label(i, j) != AngleLabel::Submultiple(2);
    let mut seen = BTreeSet::new();
    let mut components = Vec::new();
    for &v in &nodes {
        if seen.contains(&v) {
            continue;
        }
        let mut comp = vec![v];
        seen.insert(v);
        let mut k = 0;
        while k < comp.len() {
            let u = comp[k];
            for &w in &nodes {
                if !seen.contains(&w) && linked(u, w) {
                    seen.insert(w);
                    comp.push(w);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        let (kind, name) = classify_connected(m, &comp);
        components.push(Component { nodes: comp, kind, name });
    }
    let kind = if components.iter().all(|c| c.kind == ClassKind::Spherical) {
        ClassKind::Spherical
    } else if components.iter().all(|c| c.kind == ClassKind::Affine) {
        ClassKind::Affine
    } else {
        ClassKind::Other
    };
    Ok(DiagramClass { kind, components })
}

fn classify_connected(m: &CoxeterMatrix, comp: &[usize]) -> (ClassKind, Option<String>) {
    use ClassKind::*;
    let n = comp.len();
    let mut edges: Vec<(usize, usize, Option<u32>)> = Vec::new();
    for (a, &i) in comp.iter().enumerate() {
        for &j in &comp[a + 1..] {
            match m.label(i, j) {
                AngleLabel::Submultiple(2) => {}
                AngleLabel::Submultiple(k) => edges.push((i, j, Some(*k))),
                AngleLabel::Parallel => edges.push((i, j, None)),
                _ => return (Other, None),
            }
        }
    }
    if n == 1 {
        return (Spherical, Some("A_1".into()));
    }
    if edges.iter().any(|e| e.2.is_none()) {
        if n == 2 {
            return (Affine, Some("Ã_1".into()));
        }
        return (Other, None);
    }
    let deg = |v: usize| edges.iter().filter(|e| e.0 == v || e.1 == v).count();
    let lab = |a: usize, b: usize| match m.label(a, b) {
        AngleLabel::Submultiple(k) => *k,
        _ => 0,
    };
    if n == 2 {
        let k = edges[0].2.unwrap();
        return (Spherical, Some(if k == 3 { "A_2".into() } else { format!("I_2({k})") }));
    }
    let all3 = edges.iter().all(|e| e.2 == Some(3));
    if edges.len() == n {
        if comp.iter().all(|&v| deg(v) == 2) && all3 {
            return (Affine, Some(format!("Ã_{}", n - 1)));
        }
        return (Other, None);
    }
    if edges.len() != n - 1 {
        return (Other, None);
    }
    let max_deg = comp.iter().map(|&v| deg(v)).max().unwrap_or(0);
    if max_deg <= 2 {
        // Path: read labels from one end to the other.
        let start = *comp.iter().find(|&&v| deg(v) == 1).unwrap();
        let mut order = vec![start];
        while order.len() < n {
            let last = *order.last().unwrap();
            let next = comp
                .iter()
                .copied()
                .find(|&w| !order.contains(&w) && lab(last, w) != 2 && w != last)
                .unwrap();
            order.push(next);
        }
        let labels: Vec<u32> = order.windows(2).map(|w| lab(w[0], w[1])).collect();
        return classify_path(&labels);
    }
    // Trees with branch points.
    let branch: Vec<usize> = comp.iter().copied().filter(|&v| deg(v) >= 3).collect();
    if branch.len() == 1 && deg(branch[0]) == 4 {
        if n == 5 && all3 {
            return (Affine, Some("D̃_4".into()));
        }
        return (Other, None);
    }
    if branch.len() == 1 && deg(branch[0]) == 3 {
        let c = branch[0];
        let mut arms: Vec<Vec<u32>> = Vec::new();
        for &w in comp.iter().filter(|&&w| w != c && lab(c, w) != 2) {
            let mut labels = vec![lab(c, w)];
            let mut prev = c;
            let mut cur = w;
            loop {
                let next = comp.iter().copied().find(|&x| x != prev && x != cur && lab(cur, x) != 2);
                match next {
                    Some(x) => {
                        labels.push(lab(cur, x));
                        prev = cur;
                        cur = x;
                    }
                    None => break,
                }
            }
            arms.push(labels);
        }
        arms.sort_by_key(|a| (a.len(), a.last() == Some(&4)));
        let lens: Vec<usize> = arms.iter().map(|a| a.len()).collect();
        if all3 {
            return match lens.as_slice() {
                [1, 1, k] => (Spherical, Some(format!("D_{}", k + 3))),
                [1, 2, 2] => (Spherical, Some("E_6".into())),
                [1, 2, 3] => (Spherical, Some("E_7".into())),
                [1, 2, 4] => (Spherical, Some("E_8".into())),
                [2, 2, 2] => (Affine, Some("Ẽ_6".into())),
                [1, 3, 3] => (Affine, Some("Ẽ_7".into())),
                [1, 2, 5] => (Affine, Some("Ẽ_8".into())),
                _ => (Other, None),
            };
        }
        // B̃_n: a fork with two short arms, the long arm ending in a 4.
        let short_ok = arms[0] == [3] && arms[1] == [3];
        let long = &arms[2];
        if short_ok && long.last() == Some(&4) && long[..long.len() - 1].iter().all(|&k| k == 3) {
            return (Affine, Some(format!("B̃_{}", n - 1)));
        }
        return (Other, None);
    }
    if branch.len() == 2 && all3 && branch.iter().all(|&b| deg(b) == 3) {
        let leaves_at = |b: usize| comp.iter().filter(|&&w| w != b && lab(b, w) != 2 && deg(w) == 1).count();
        if leaves_at(branch[0]) == 2 && leaves_at(branch[1]) == 2 {
            return (Affine, Some(format!("D̃_{}", n - 1)));
        }
    }
    (Other, None)
}

fn classify_path(labels: &[u32]) -> (ClassKind, Option<String>) {
    use ClassKind::*;
    let n = labels.len() + 1;
    let rev: Vec<u32> = labels.iter().rev().copied().collect();
    let is = |pat: &[u32]| labels == pat || rev == pat;
    let inner3 = |l: &[u32]| l.iter().all(|&k| k == 3);
    if inner3(labels) {
        return (Spherical, Some(format!("A_{n}")));
    }
    let one_end = |end: u32| -> bool {
        (labels.last() == Some(&end) && inner3(&labels[..labels.len() - 1]))
            || (labels.first() == Some(&end) && inner3(&labels[1..]))
    };
    if n >= 3 && one_end(4) {
        return (Spherical, Some(format!("B_{n}")));
    }
    if is(&[3, 4, 3]) {
        return (Spherical, Some("F_4".into()));
    }
    if n == 3 && one_end(5) {
        return (Spherical, Some("H_3".into()));
    }
    if n == 4 && one_end(5) {
        return (Spherical, Some("H_4".into()));
    }
    if n >= 3 && labels[0] == 4 && labels[labels.len() - 1] == 4 && inner3(&labels[1..labels.len() - 1]) {
        return (Affine, Some(format!("C̃_{}", n - 1)));
    }
    if is(&[3, 3, 4, 3]) {
        return (Affine, Some("F̃_4".into()));
    }
    if is(&[3, 6]) {
        return (Affine, Some("G̃_2".into()));
    }
    (Other, None)
}

/// All maximal affine subdiagrams, each as a sorted node list, in
/// lexicographic order.
pub fn maximal_affine_subdiagrams(m: &CoxeterMatrix) -> Vec<Vec<usize>> {
    assert!(m.n <= 24, "subset enumeration is limited to 24 nodes");
    let total = 1u32 << m.n;
    let mut affine: Vec<u32> = Vec::new();
    for mask in 1..total {
        let s: Vec<usize> = (0..m.n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        if let Ok(c) = classify_subdiagram(m, &s) {
            if c.kind == ClassKind::Affine {
                affine.push(mask);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = affine
        .iter()
        .filter(|&&a| !affine.iter().any(|&b| b != a && b & a == a))
        .map(|&mask| (0..m.n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect())
        .collect();
    out.sort();
    out
}

/// Per-node compactness: a node is non-compact iff it lies in the unique
/// maximal affine subdiagram.
pub fn derive_compact_facets(m: &CoxeterMatrix) -> Result<Vec<bool>, CoxeterError> {
    let affine = maximal_affine_subdiagrams(m);
    if affine.len() != 1 {
        return Err(CoxeterError::IdealVertexCount(affine.len()));
    }
    Ok(m.nodes().map(|v| !affine[0].contains(&v)).collect())
}

/// True iff every intersecting neighbour label of `f` is an even submultiple.
pub fn is_admissible(m: &CoxeterMatrix, f: usize) -> bool {
    m.nodes()
        .filter(|&j| j != f)
        .map(|j| m.label(f, j))
        .filter(|l| l.intersects())
        .all(|l| l.is_even_submultiple())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub compact: usize,
    pub noncompact: usize,
    pub label: AngleLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedReport {
    pub nodes: usize,
    pub compact: Vec<usize>,
    pub affine_subdiagrams: Vec<Vec<usize>>,
    pub affine_classes: Vec<String>,
    pub condition_a: bool,
    pub condition_b: bool,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl SeedReport {
    pub fn passes(&self) -> bool {
        self.condition_a && self.condition_b
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("nodes: {}\n", self.nodes));
        for (a, c) in self.affine_subdiagrams.iter().zip(&self.affine_classes) {
            s.push_str(&format!("maximal affine subdiagram {:?}: {}\n", a, c));
        }
        s.push_str(&format!("compact facets: {:?}\n", self.compact));
        s.push_str(&format!("condition (a): {}\n", if self.condition_a { "pass" } else { "fail" }));
        s.push_str(&format!("condition (b): {}\n", if self.condition_b { "pass" } else { "fail" }));
        for v in &self.violations {
            s.push_str(&format!("violation: compact {} / non-compact {} has label {}\n", v.compact, v.noncompact, v.label));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

/// Checks (a) exactly one maximal affine subdiagram and (b) every
/// intersecting (compact, non-compact) pair has an even submultiple label.
///
/// Condition (b) is evaluated against every maximal affine subdiagram S,
/// with the nodes outside S taken as compact relative to S. With a single
/// S this is the usual condition.
pub fn check_seed_conditions(m: &CoxeterMatrix) -> SeedReport {
    let affine = maximal_affine_subdiagrams(m);
    let affine_classes = affine
        .iter()
        .map(|s| classify_subdiagram(m, s).map(|c| c.to_string()).unwrap_or_default())
        .collect();
    let noncompact: BTreeSet<usize> = affine.iter().flatten().copied().collect();
    let compact: Vec<usize> = m.nodes().filter(|v| !noncompact.contains(v)).collect();
    let mut found = BTreeSet::new();
    let mut violations = Vec::new();
    for s in &affine {
        for c in m.nodes().filter(|v| !s.contains(v)) {
            for &u in s {
                let l = m.label(c, u);
                if l.intersects() && !l.is_even_submultiple() && found.insert((c, u)) {
                    violations.push(Violation { compact: c, noncompact: u, label: l.clone() });
                }
            }
        }
    }
    violations.sort_by_key(|v| (v.compact, v.noncompact));
    let notes = vec!["pairs without an explicit edge are taken to meet at angle π/2".to_string()];
    SeedReport {
        nodes: m.n,
        compact,
        condition_a: affine.len() == 1,
        condition_b: violations.is_empty(),
        affine_subdiagrams: affine,
        affine_classes,
        violations,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::q;

    #[test]
    fn builtin_matches_dsl_file() {
        assert_eq!(parse_diagram(DIAGRAM_D_DSL).unwrap(), diagram_d());
        assert_eq!(parse_diagram(&diagram_d().to_dsl()).unwrap(), diagram_d());
    }

    #[test]
    fn d_non_cycle_pairs_are_orthogonal() {
        let d = diagram_d();
        let cycle = [(6, 5), (5, 4), (4, 3), (3, 2), (2, 1), (1, 7), (7, 6)];
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                let on_cycle = cycle.iter().any(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j));
                assert_eq!(on_cycle, *d.label(i, j) != AngleLabel::Submultiple(2), "{i} {j}");
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_diagram("nodes: 7\nedge 1 9 4\n"),
            Err(CoxeterError::NodeOutOfRange { line: 2, node: 9, n: 7 })
        ));
        assert!(matches!(
            parse_diagram("nodes: 3\nedge 1 2 4\nedge 2 1 3\n"),
            Err(CoxeterError::DuplicateEdge { line: 3, .. })
        ));
        assert!(matches!(parse_diagram("nodes: 3\nedge 1 2 1\n"), Err(CoxeterError::LabelTooSmall { .. })));
        assert!(matches!(
            parse_diagram("edge 1 2 3\n"),
            Err(CoxeterError::Syntax { line: 1, column: 1, .. })
        ));
        assert!(matches!(
            parse_diagram("nodes: 3\n  edge 1 x 3\n"),
            Err(CoxeterError::Syntax { line: 2, column: 10, .. })
        ));
        assert!(matches!(parse_diagram("nodes: 3\nfoo 1 2\n"), Err(CoxeterError::Syntax { line: 2, .. })));
    }

    #[test]
    fn explicit_two_normalizes() {
        let m = parse_diagram("nodes: 2\nedge 1 2 2\n").unwrap();
        assert_eq!(m, CoxeterMatrix::orthogonal(2));
        let one = parse_diagram("# comment\nnodes: 1\n").unwrap();
        assert_eq!(one.n(), 1);
    }

    #[test]
    fn catalog_names() {
        let d = diagram_d();
        let c = classify_subdiagram(&d, &[1, 2, 4, 5, 6]).unwrap();
        assert_eq!(c.kind, ClassKind::Affine);
        assert_eq!(c.signature(), "C̃_2 ⊔ Ã_1");
        assert_eq!(classify_subdiagram(&d, &[3]).unwrap().signature(), "A_1");
        let c34 = classify_subdiagram(&d, &[3, 4]).unwrap();
        assert_eq!((c34.kind, c34.signature()), (ClassKind::Spherical, "I_2(6)".to_string()));
        assert_eq!(classify_subdiagram(&d, &[1, 2, 3]).unwrap().kind, ClassKind::Other);
        assert_eq!(classify_subdiagram(&d, &[1, 2, 3, 4]).unwrap().kind, ClassKind::Other);
    }

    fn path(labels: &[u32]) -> CoxeterMatrix {
        let mut m = CoxeterMatrix::orthogonal(labels.len() + 1);
        for (i, &k) in labels.iter().enumerate() {
            m.set(i + 1, i + 2, AngleLabel::Submultiple(k));
        }
        m
    }

    fn name_of(m: &CoxeterMatrix) -> (ClassKind, String) {
        let all: Vec<usize> = m.nodes().collect();
        let c = classify_subdiagram(m, &all).unwrap();
        (c.kind, c.signature())
    }

    #[test]
    fn path_catalog() {
        use ClassKind::*;
        assert_eq!(name_of(&path(&[3, 3, 3])), (Spherical, "A_4".into()));
        assert_eq!(name_of(&path(&[3, 3, 4])), (Spherical, "B_4".into()));
        assert_eq!(name_of(&path(&[3, 4, 3])), (Spherical, "F_4".into()));
        assert_eq!(name_of(&path(&[5, 3])), (Spherical, "H_3".into()));
        assert_eq!(name_of(&path(&[3, 3, 5])), (Spherical, "H_4".into()));
        assert_eq!(name_of(&path(&[4, 4])), (Affine, "C̃_2".into()));
        assert_eq!(name_of(&path(&[4, 3, 3, 4])), (Affine, "C̃_4".into()));
        assert_eq!(name_of(&path(&[3, 3, 4, 3])), (Affine, "F̃_4".into()));
        assert_eq!(name_of(&path(&[6, 3])), (Affine, "G̃_2".into()));
        assert_eq!(name_of(&path(&[5, 3, 3, 3])).0, Other);
    }

    #[test]
    fn branched_catalog() {
        use ClassKind::*;
        let star = |arms: &[usize], last: u32| {
            let n = 1 + arms.iter().sum::<usize>();
            let mut m = CoxeterMatrix::orthogonal(n);
            let mut next = 2;
            for (ai, &len) in arms.iter().enumerate() {
                let mut prev = 1;
                for s in 0..len {
                    let k = if ai == arms.len() - 1 && s == len - 1 { last } else { 3 };
                    m.set(prev, next, AngleLabel::Submultiple(k));
                    prev = next;
                    next += 1;
                }
            }
            m
        };
        assert_eq!(name_of(&star(&[1, 1, 2], 3)), (Spherical, "D_5".into()));
        assert_eq!(name_of(&star(&[1, 2, 2], 3)), (Spherical, "E_6".into()));
        assert_eq!(name_of(&star(&[1, 2, 4], 3)), (Spherical, "E_8".into()));
        assert_eq!(name_of(&star(&[2, 2, 2], 3)), (Affine, "Ẽ_6".into()));
        assert_eq!(name_of(&star(&[1, 3, 3], 3)), (Affine, "Ẽ_7".into()));
        assert_eq!(name_of(&star(&[1, 1, 1, 1], 3)), (Affine, "D̃_4".into()));
        assert_eq!(name_of(&star(&[1, 1, 2], 4)), (Affine, "B̃_4".into()));
        let mut cyc = path(&[3, 3]);
        cyc.set(1, 3, AngleLabel::Submultiple(3));
        assert_eq!(name_of(&cyc), (Affine, "Ã_2".into()));
    }

    #[test]
    fn seed_analysis_of_d() {
        let d = diagram_d();
        assert_eq!(maximal_affine_subdiagrams(&d), vec![vec![1, 2, 4, 5, 6]]);
        let compact: Vec<usize> = derive_compact_facets(&d)
            .unwrap()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(compact, vec![3, 7]);
        let r = check_seed_conditions(&d);
        assert!(r.passes());
        assert!(is_admissible(&d, 5));
        assert!(is_admissible(&d, 3));
    }

    #[test]
    fn odd_relabel_breaks_b() {
        let mut d = diagram_d();
        d.set(3, 2, AngleLabel::Submultiple(3));
        let r = check_seed_conditions(&d);
        // {2,3,4} becomes a second affine subdiagram (G̃_2), so (a) fails too.
        assert!(!r.condition_a && !r.condition_b);
        assert_eq!(r.violations.len(), 1);
        assert_eq!((r.violations[0].compact, r.violations[0].noncompact), (3, 2));
        assert!(!is_admissible(&d, 2));
    }

    #[test]
    fn small_diagrams() {
        let one = CoxeterMatrix::orthogonal(1);
        assert!(maximal_affine_subdiagrams(&one).is_empty());
        let mut two = CoxeterMatrix::orthogonal(2);
        two.set(1, 2, AngleLabel::Parallel);
        assert_eq!(maximal_affine_subdiagrams(&two), vec![vec![1, 2]]);
        assert_eq!(derive_compact_facets(&two).unwrap(), vec![false, false]);
        let r = check_seed_conditions(&two);
        assert!(r.passes() && r.violations.is_empty());
        let sub = diagram_d().restricted(&[1, 2, 3]);
        assert_eq!(derive_compact_facets(&sub).unwrap(), vec![false, false, true]);
    }

    #[test]
    fn angle_labels() {
        assert_eq!(AngleLabel::from_fraction(&Q::new(1.into(), 3.into())).unwrap(), AngleLabel::Submultiple(3));
        assert_eq!(
            AngleLabel::from_fraction(&Q::new(3.into(), 4.into())).unwrap().to_string(),
            "_3/4_"
        );
        assert!(AngleLabel::from_fraction(&q(1)).is_err());
        assert!(AngleLabel::from_fraction(&q(0)).is_err());
    }
}
