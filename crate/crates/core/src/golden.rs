//! Transcribed reference data: facet lists, adjacency tables, quotient
//! classes and corner lists, with load-time validation and a checksum.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::doubling::CANONICAL_SEQUENCE;
use crate::label::FacetLabel;
use crate::table::{Cell, LabeledMatrix};

pub const GOLDEN_TEXT: &str = include_str!("../golden/golden.txt");
pub const GOLDEN_SHA256: &str = include_str!("../golden/golden.sha256");

/// Table selectors in reference order.
pub const STATE_TABLES: [&str; 9] = ["t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8"];
pub const SCHEME_TABLES: [(&str, &str); 4] = [("tr1", "R_T"), ("tr2", "R_half"), ("tr3", "R_quarter"), ("tr4", "R_HW")];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GoldenError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("table {table} type {ty}: {msg}")]
    Invalid { table: String, ty: u32, msg: String },
    #[error("bad mutation {0:?}; expected TABLE:TYPE:ROW:COL=VALUE")]
    BadMutation(String),
    #[error("mutation target {0} does not exist")]
    MutationTarget(String),
    #[error("erratum {0} is not supported by the printed data: {1}")]
    Unjustified(String, String),
}

/// A correction to a transcribed facet list: `true` adds, `false` removes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Erratum {
    pub add: bool,
    pub label: FacetLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corner {
    pub k: u32,
    pub a: FacetLabel,
    pub b: FacetLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErratumKind {
    /// Both (a, b) and (b, a) are corrected.
    Sym,
    /// Only the cell in row a, column b is corrected.
    Row,
    /// A reflectofold cell, corrected to the projection of the base
    /// polytope's table through the printed partition.
    Quot,
}

/// A corrected matrix cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellErratum {
    pub table: String,
    pub ty: u32,
    pub kind: ErratumKind,
    pub a: FacetLabel,
    pub b: FacetLabel,
    pub value: Cell,
}

impl std::fmt::Display for CellErratum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match self.kind {
            ErratumKind::Sym => "sym",
            ErratumKind::Row => "row",
            ErratumKind::Quot => "quot",
        };
        write!(f, "{} {} {k} ({}, {}) = {}", self.table, self.ty, self.a, self.b, self.value)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldenTables {
    pub facets: BTreeMap<String, Vec<FacetLabel>>,
    pub errata: BTreeMap<String, Vec<Erratum>>,
    /// Matrices exactly as printed.
    pub printed: BTreeMap<(String, u32), LabeledMatrix>,
    /// Printed matrices with `cell_errata` applied.
    pub matrices: BTreeMap<(String, u32), LabeledMatrix>,
    pub cell_errata: Vec<CellErratum>,
    pub classes: BTreeMap<String, Vec<Vec<FacetLabel>>>,
    pub corners: BTreeMap<String, Vec<Corner>>,
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

enum Section {
    None,
    Facets(String),
    Erratum(String),
    Matrix(String, u32),
    Classes(String),
    Corners(String),
    CellErrata,
}

fn labels(line: usize, s: &str) -> Result<Vec<FacetLabel>, GoldenError> {
    s.split_whitespace()
        .map(|t| FacetLabel::parse(t).map_err(|e| GoldenError::Parse { line, msg: e.to_string() }))
        .collect()
}

impl GoldenTables {
    /// The embedded copy.
    pub fn embedded() -> GoldenTables {
        GoldenTables::parse(GOLDEN_TEXT).expect("embedded golden data is valid")
    }

    pub fn parse(text: &str) -> Result<GoldenTables, GoldenError> {
        let mut g = GoldenTables::default();
        let mut section = Section::None;
        let mut rows: Vec<(FacetLabel, Vec<Cell>)> = Vec::new();
        let flush = |g: &mut GoldenTables, section: &Section, rows: &mut Vec<(FacetLabel, Vec<Cell>)>| {
            if let Section::Matrix(t, ty) = section {
                let (labels, cells) = rows.drain(..).unzip();
                g.printed.insert((t.clone(), *ty), LabeledMatrix { labels, cells });
            }
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let perr = |msg: String| GoldenError::Parse { line, msg };
            if let Some(head) = s.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
                flush(&mut g, &section, &mut rows);
                let parts: Vec<&str> = head.split_whitespace().collect();
                section = match parts[..] {
                    ["facets", p] => Section::Facets(p.into()),
                    ["erratum", p] => Section::Erratum(p.into()),
                    ["classes", r] => Section::Classes(r.into()),
                    ["corners", r] => Section::Corners(r.into()),
                    ["cell-errata"] => Section::CellErrata,
                    ["matrix", t, ty] => {
                        Section::Matrix(t.into(), ty.parse().map_err(|_| perr(format!("bad type {ty:?}")))?)
                    }
                    _ => return Err(perr(format!("unknown section [{head}]"))),
                };
                continue;
            }
            match &section {
                Section::None => return Err(perr("data outside a section".into())),
                Section::Facets(p) => g.facets.entry(p.clone()).or_default().extend(labels(line, s)?),
                Section::Erratum(p) => {
                    let (add, rest) = match s.as_bytes()[0] {
                        b'+' => (true, &s[1..]),
                        b'-' => (false, &s[1..]),
                        _ => return Err(perr("erratum lines start with + or -".into())),
                    };
                    let label = FacetLabel::parse(rest.trim()).map_err(|e| perr(e.to_string()))?;
                    g.errata.entry(p.clone()).or_default().push(Erratum { add, label });
                }
                Section::CellErrata => {
                    let (lhs, v) = s.split_once('=').ok_or_else(|| perr("expected `TABLE TYPE KIND A B = VALUE`".into()))?;
                    let parts: Vec<&str> = lhs.split_whitespace().collect();
                    let [table, ty, kind, a, b] = parts[..] else {
                        return Err(perr("expected `TABLE TYPE KIND A B = VALUE`".into()));
                    };
                    let kind = match kind {
                        "sym" => ErratumKind::Sym,
                        "row" => ErratumKind::Row,
                        "quot" => ErratumKind::Quot,
                        _ => return Err(perr(format!("unknown erratum kind {kind:?}"))),
                    };
                    g.cell_errata.push(CellErratum {
                        table: table.into(),
                        ty: ty.parse().map_err(|_| perr(format!("bad type {ty:?}")))?,
                        kind,
                        a: FacetLabel::parse(a).map_err(|e| perr(e.to_string()))?,
                        b: FacetLabel::parse(b).map_err(|e| perr(e.to_string()))?,
                        value: Cell::parse(v).ok_or_else(|| perr(format!("bad cell {v:?}")))?,
                    });
                }
                Section::Classes(r) => g.classes.entry(r.clone()).or_default().push(labels(line, s)?),
                Section::Corners(r) => {
                    let (k, pair) = s.split_once('|').ok_or_else(|| perr("expected `k | a b`".into()))?;
                    let k: u32 = k.trim().parse().map_err(|_| perr(format!("bad corner label {k:?}")))?;
                    let pair = labels(line, pair)?;
                    let [a, b] = <[FacetLabel; 2]>::try_from(pair).map_err(|_| perr("expected two facets".into()))?;
                    g.corners.entry(r.clone()).or_default().push(Corner { k, a, b });
                }
                Section::Matrix(..) => {
                    let (l, cells) = s.split_once('|').ok_or_else(|| perr("expected `label | cells`".into()))?;
                    let label = FacetLabel::parse(l.trim()).map_err(|e| perr(e.to_string()))?;
                    let cells = cells
                        .split_whitespace()
                        .map(|c| Cell::parse(c).ok_or_else(|| perr(format!("bad cell {c:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    rows.push((label, cells));
                }
            }
        }
        flush(&mut g, &section, &mut rows);
        g.matrices = g.printed.clone();
        for e in &g.cell_errata {
            let m = g
                .matrices
                .get_mut(&(e.table.clone(), e.ty))
                .ok_or_else(|| GoldenError::Unjustified(e.to_string(), "no such table".into()))?;
            let i = m.labels.iter().position(|l| *l == e.a);
            let j = m.labels.iter().position(|l| *l == e.b);
            let (Some(i), Some(j)) = (i, j) else {
                return Err(GoldenError::Unjustified(e.to_string(), "label not in table".into()));
            };
            m.cells[i][j] = e.value.clone();
            if e.kind != ErratumKind::Row {
                m.cells[j][i] = e.value.clone();
            }
        }
        g.validate()?;
        Ok(g)
    }

    /// Ordered (row, column) cells touched by corrections in one table.
    pub fn errata_cells(&self, table: &str, ty: u32) -> BTreeSet<(FacetLabel, FacetLabel)> {
        let mut out = BTreeSet::new();
        for e in self.cell_errata.iter().filter(|e| e.table == table && e.ty == ty) {
            out.insert((e.a.clone(), e.b.clone()));
            if e.kind != ErratumKind::Row {
                out.insert((e.b.clone(), e.a.clone()));
            }
        }
        out
    }

    fn printed_cell(&self, table: &str, ty: u32, a: &FacetLabel, b: &FacetLabel) -> Option<&Cell> {
        self.printed.get(&(table.to_string(), ty))?.get(a, b)
    }

    /// Checks every erratum against the printed data alone and returns one
    /// justification line per erratum.
    ///
    /// A `row` cell must disagree with its printed transpose and take that
    /// value. A `sym` cell in the table of P_n must either differ from the
    /// printed value of its image under the mirror of the n-th doubling (an
    /// exact symmetry of P_n) and take that value, or inherit its printed
    /// value from a corrected cell of P_{n-1} (edges between surviving
    /// facets keep their label). A facet-list erratum may only remove the
    /// facet the last doubling was performed along.
    pub fn verify_errata(&self) -> Result<Vec<String>, GoldenError> {
        let mut out = Vec::new();
        let mut done: Vec<&CellErratum> = Vec::new();
        for e in &self.cell_errata {
            let fail = |why: &str| GoldenError::Unjustified(e.to_string(), why.into());
            let printed = self.printed_cell(&e.table, e.ty, &e.a, &e.b).ok_or_else(|| fail("label not in table"))?;
            let transposed = self.printed_cell(&e.table, e.ty, &e.b, &e.a).ok_or_else(|| fail("label not in table"))?;
            if *printed == e.value {
                return Err(fail("the printed value already equals the correction"));
            }
            match e.kind {
                ErratumKind::Row => {
                    if *transposed != e.value {
                        return Err(fail("the transposed printed cell does not carry the corrected value"));
                    }
                    out.push(format!("{e}: printed {printed}, transposed cell printed {transposed}"));
                }
                ErratumKind::Sym => {
                    if printed != transposed {
                        return Err(fail("printed cell is not symmetric; use a row erratum"));
                    }
                    let n: usize = e.table.strip_prefix('t').and_then(|n| n.parse().ok()).ok_or_else(|| fail("not a state table"))?;
                    if n == 0 {
                        return Err(fail("P_0 has no doubling"));
                    }
                    let f = FacetLabel::parse(CANONICAL_SEQUENCE[n - 1]).expect("canonical label");
                    let labels = &self.printed[&(e.table.clone(), e.ty)].labels;
                    let sigma = |x: &FacetLabel| {
                        if x.subs.first() == Some(&f) {
                            FacetLabel::with_subs(x.base, x.subs[1..].to_vec())
                        } else if labels.contains(&x.prepend(&f)) {
                            x.prepend(&f)
                        } else {
                            x.clone()
                        }
                    };
                    let (sa, sb) = (sigma(&e.a), sigma(&e.b));
                    let same = |x: &CellErratum, a: &FacetLabel, b: &FacetLabel| {
                        (x.a == *a && x.b == *b) || (x.a == *b && x.b == *a)
                    };
                    let image_is_erratum = self.cell_errata.iter().any(|x| x.table == e.table && x.ty == e.ty && same(x, &sa, &sb));
                    let image = self.printed_cell(&e.table, e.ty, &sa, &sb);
                    if !same(e, &sa, &sb) && !image_is_erratum && image == Some(&e.value) {
                        out.push(format!("{e}: printed {printed}, mirror image ({sa}, {sb}) under r_{f} printed {}", e.value));
                        done.push(e);
                        continue;
                    }
                    let prev = format!("t{}", n - 1);
                    let strip = |x: &FacetLabel| {
                        if x.subs.first() == Some(&f) {
                            FacetLabel::with_subs(x.base, x.subs[1..].to_vec())
                        } else {
                            x.clone()
                        }
                    };
                    let (pa, pb) = (strip(&e.a), strip(&e.b));
                    let inherited = self.printed_cell(&prev, e.ty, &pa, &pb) == Some(printed)
                        && done.iter().any(|x| x.table == prev && x.ty == e.ty && same(x, &pa, &pb) && x.value == e.value);
                    if !inherited {
                        return Err(fail("neither the mirror symmetry nor an earlier erratum supports it"));
                    }
                    out.push(format!("{e}: printed {printed}, inherited from corrected ({pa}, {pb}) in {prev}"));
                }
                ErratumKind::Quot => {
                    if printed != transposed {
                        return Err(fail("printed cell is not symmetric; use a row erratum"));
                    }
                    let (proj, why) = self.projected_cell(e).map_err(|m| fail(&m))?;
                    if proj != e.value {
                        return Err(fail(&format!("the projection gives {proj}")));
                    }
                    out.push(format!("{e}: printed {printed}, {why}"));
                }
            }
            done.push(e);
        }
        for (state, errs) in &self.errata {
            let n: usize = state.strip_prefix('P').and_then(|n| n.parse().ok()).unwrap_or(0);
            for er in errs {
                let ok = !er.add && n > 0 && FacetLabel::parse(CANONICAL_SEQUENCE[n - 1]).ok().as_ref() == Some(&er.label);
                if !ok {
                    return Err(GoldenError::Unjustified(format!("{state} {}", er.label), "only the doubled facet may be removed".into()));
                }
                out.push(format!("{state}: printed list keeps {}, the facet doubled to form {state}", er.label));
            }
        }
        Ok(out)
    }

    /// Value of a reflectofold cell obtained by projecting the corrected
    /// table of the base polytope through the printed partition. Only valid
    /// when the gluing creates no corners of that type, i.e. every glued
    /// face type is orthogonal to the compact type in the diagram.
    fn projected_cell(&self, e: &CellErratum) -> Result<(Cell, String), String> {
        let (_, name) = SCHEME_TABLES.iter().find(|(t, _)| *t == e.table).ok_or("not a reflectofold table")?;
        let scheme = crate::reflectofold::builtin(name).map_err(|err| err.to_string())?;
        let d = crate::coxeter::diagram_d();
        for p in &scheme.pairings {
            for f in [&p.source.facet, &p.target.facet] {
                if *d.label(e.ty as usize, f.base as usize) != crate::coxeter::AngleLabel::Submultiple(2) {
                    return Err(format!("glued facet {f} is not orthogonal to type {}", e.ty));
                }
            }
        }
        let base = format!("t{}", scheme.base);
        let m = self.matrix(&base, e.ty).ok_or("no base table")?;
        let class = |x: &FacetLabel| -> Vec<FacetLabel> {
            self.classes
                .get(*name)
                .and_then(|cs| cs.iter().find(|c| c.contains(x)).cloned())
                .unwrap_or_else(|| vec![x.clone()])
        };
        let (ca, cb) = (class(&e.a), class(&e.b));
        let mut seen = BTreeSet::new();
        for x in &ca {
            for y in &cb {
                match m.get(x, y) {
                    Some(Cell::Zero) => {}
                    Some(c) => {
                        seen.insert((c.to_string(), x.clone(), y.clone()));
                    }
                    None => return Err(format!("{x} or {y} missing from {base}")),
                }
            }
        }
        let values: BTreeSet<&String> = seen.iter().map(|s| &s.0).collect();
        match values.len() {
            0 => Ok((Cell::Zero, format!("no ridge of {base} joins the classes of {} and {}", e.a, e.b))),
            1 => {
                let (v, x, y) = seen.iter().next().expect("one value");
                Ok((Cell::parse(v).expect("printed cell"), format!("{base} has ({x}, {y}) = {v} inside the two classes")))
            }
            _ => Err("the base table gives conflicting labels".into()),
        }
    }

    /// Square, symmetric, unit diagonal, distinct labels.
    pub fn validate(&self) -> Result<(), GoldenError> {
        for ((t, ty), m) in &self.matrices {
            let inv = |msg: &str| GoldenError::Invalid { table: t.clone(), ty: *ty, msg: msg.into() };
            if m.cells.iter().any(|r| r.len() != m.labels.len()) {
                return Err(inv("not square"));
            }
            if !m.has_unit_diagonal() {
                return Err(inv("diagonal entries must be 1"));
            }
            if !m.is_symmetric() {
                return Err(inv("not symmetric"));
            }
            let mut l = m.labels.clone();
            l.sort();
            l.dedup();
            if l.len() != m.labels.len() {
                return Err(inv("repeated row label"));
            }
            if m.labels.iter().any(|l| l.base != *ty) {
                return Err(inv("row label of the wrong type"));
            }
        }
        Ok(())
    }

    pub fn matrix(&self, table: &str, ty: u32) -> Option<&LabeledMatrix> {
        self.matrices.get(&(table.to_string(), ty))
    }

    /// Printed facet list of `P{n}` with the recorded errata applied.
    pub fn corrected_facets(&self, state: &str) -> Option<Vec<FacetLabel>> {
        let mut v = self.facets.get(state)?.clone();
        for e in self.errata.get(state).into_iter().flatten() {
            if e.add {
                v.push(e.label.clone());
            } else {
                v.retain(|l| l != &e.label);
            }
        }
        Some(v)
    }

    /// Applies a test-only corruption `TABLE:TYPE:ROW:COL=VALUE` (indices in
    /// the stored row order).
    pub fn mutate(&mut self, spec: &str) -> Result<(), GoldenError> {
        let bad = || GoldenError::BadMutation(spec.to_string());
        let (target, value) = spec.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = target.split(':').collect();
        let [table, ty, row, col] = parts[..] else { return Err(bad()) };
        let ty: u32 = ty.parse().map_err(|_| bad())?;
        let row: usize = row.parse().map_err(|_| bad())?;
        let col: usize = col.parse().map_err(|_| bad())?;
        let cell = Cell::parse(value).ok_or_else(bad)?;
        let m = self
            .matrices
            .get_mut(&(table.to_string(), ty))
            .ok_or_else(|| GoldenError::MutationTarget(target.to_string()))?;
        let slot = m
            .cells
            .get_mut(row)
            .and_then(|r| r.get_mut(col))
            .ok_or_else(|| GoldenError::MutationTarget(target.to_string()))?;
        *slot = cell;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_data_loads() {
        let g = GoldenTables::embedded();
        assert_eq!(g.facets.len(), 9);
        assert_eq!(g.matrices.len(), 26);
        assert_eq!(g.matrix("t7", 3).unwrap().size(), 27);
        assert_eq!(g.matrix("tr4", 3).unwrap().size(), 16);
        assert_eq!(g.classes["R_HW"].iter().map(Vec::len).sum::<usize>(), 45);
        assert_eq!(g.corrected_facets("P4").unwrap().len(), 15);
        assert_eq!(g.cell_errata.len(), 30);
        assert!(!g.printed[&("t8".to_string(), 3)].is_symmetric());
    }

    #[test]
    fn errata_are_justified_by_printed_data() {
        let g = GoldenTables::embedded();
        let j = g.verify_errata().unwrap();
        assert_eq!(j.len(), 31);
    }

    #[test]
    fn unjustified_erratum_rejected() {
        let mut text = GOLDEN_TEXT.to_string();
        text.push_str("t4 3 sym 3 3_2 = 3\n");
        let g = GoldenTables::parse(&text).unwrap();
        assert!(matches!(g.verify_errata(), Err(GoldenError::Unjustified(..))));
    }

    #[test]
    fn checksum_matches() {
        assert_eq!(sha256_hex(GOLDEN_TEXT), GOLDEN_SHA256.trim());
    }

    #[test]
    fn validation_catches_asymmetry() {
        let bad = "[matrix t9 3]\n3 | 1 2\n3_2 | 3 1\n";
        assert!(matches!(GoldenTables::parse(bad), Err(GoldenError::Invalid { .. })));
        assert!(matches!(GoldenTables::parse("[what]\n"), Err(GoldenError::Parse { line: 1, .. })));
        assert!(matches!(GoldenTables::parse("[matrix t9 3]\n3 | 1 x\n"), Err(GoldenError::Parse { line: 2, .. })));
    }

    #[test]
    fn mutation() {
        let mut g = GoldenTables::embedded();
        g.mutate("t7:3:0:1=3").unwrap();
        assert_eq!(g.matrix("t7", 3).unwrap().cells[0][1], Cell::Label(3));
        assert!(g.mutate("t7:3:0:99=3").is_err());
        assert!(g.mutate("t7:3:0=3").is_err());
        assert!(g.mutate("t42:3:0:1=3").is_err());
    }
}
