//! Labeled adjacency graphs and matrices, with CSV and aligned-text output.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::coxeter::AngleLabel;
use crate::geom::{fmt_q, Q};
use crate::label::FacetLabel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop at {0}")]
    Loop(FacetLabel),
    #[error("edge {0} -- {1} carries both {2} and {3}")]
    Conflict(FacetLabel, FacetLabel, AngleLabel, AngleLabel),
    #[error("unknown vertex {0}")]
    UnknownVertex(FacetLabel),
}

/// Simple graph on facet labels with one angle label per edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    pub vertices: Vec<FacetLabel>,
    pub edges: BTreeMap<(FacetLabel, FacetLabel), AngleLabel>,
}

fn key(a: &FacetLabel, b: &FacetLabel) -> (FacetLabel, FacetLabel) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl LabeledGraph {
    pub fn new(vertices: Vec<FacetLabel>) -> Self {
        LabeledGraph { vertices, edges: BTreeMap::new() }
    }

    /// Adds an edge; an existing edge with the same label is kept once.
    pub fn add_edge(&mut self, a: &FacetLabel, b: &FacetLabel, l: AngleLabel) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::Loop(a.clone()));
        }
        for v in [a, b] {
            if !self.vertices.contains(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
        }
        let k = key(a, b);
        match self.edges.get(&k) {
            Some(old) if *old != l => Err(GraphError::Conflict(k.0, k.1, old.clone(), l)),
            Some(_) => Ok(()),
            None => {
                self.edges.insert(k, l);
                Ok(())
            }
        }
    }

    pub fn label(&self, a: &FacetLabel, b: &FacetLabel) -> Option<&AngleLabel> {
        self.edges.get(&key(a, b))
    }

    pub fn matrix(&self) -> LabeledMatrix {
        let cells = self
            .vertices
            .iter()
            .map(|a| {
                self.vertices
                    .iter()
                    .map(|b| {
                        if a == b {
                            Cell::One
                        } else {
                            match self.label(a, b) {
                                None => Cell::Zero,
                                Some(AngleLabel::Submultiple(k)) => Cell::Label(*k),
                                Some(AngleLabel::General(x)) => Cell::Underlined(x.clone()),
                                Some(other) => unreachable!("corner label {other}"),
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        LabeledMatrix { labels: self.vertices.clone(), cells }
    }
}

/// A matrix cell: `0` disjoint, `1` diagonal, `k` for angle π/k, or an
/// underlined general angle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Label(u32),
    Underlined(Q),
}

impl Cell {
    pub fn parse(s: &str) -> Option<Cell> {
        match s.trim() {
            "" | "." | "0" => Some(Cell::Zero),
            "1" => Some(Cell::One),
            t if t.starts_with('_') && t.ends_with('_') && t.len() > 2 => {
                crate::geom::parse_q(&t[1..t.len() - 1]).map(Cell::Underlined)
            }
            t => t.parse::<u32>().ok().filter(|&k| k >= 2).map(Cell::Label),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Zero => write!(f, "0"),
            Cell::One => write!(f, "1"),
            Cell::Label(k) => write!(f, "{k}"),
            Cell::Underlined(x) => write!(f, "_{}_", fmt_q(x)),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledMatrix {
    pub labels: Vec<FacetLabel>,
    pub cells: Vec<Vec<Cell>>,
}

/// One disagreement between two matrices after aligning rows by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CellDiff {
    MissingRow(FacetLabel),
    ExtraRow(FacetLabel),
    Cell { row: FacetLabel, col: FacetLabel, expected: Cell, actual: Cell },
}

impl fmt::Display for CellDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellDiff::MissingRow(l) => write!(f, "row {l} expected but not computed"),
            CellDiff::ExtraRow(l) => write!(f, "row {l} computed but not expected"),
            CellDiff::Cell { row, col, expected, actual } => {
                write!(f, "({row}, {col}): expected {expected}, computed {actual}")
            }
        }
    }
}

impl LabeledMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, a: &FacetLabel, b: &FacetLabel) -> Option<&Cell> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(&self.cells[i][j])
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size()).all(|i| (0..self.size()).all(|j| self.cells[i][j] == self.cells[j][i]))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.size()).all(|i| self.cells[i][i] == Cell::One)
    }

    pub fn has_underlined(&self) -> bool {
        self.cells.iter().flatten().any(|c| matches!(c, Cell::Underlined(_)))
    }

    /// Cell-level differences of `self` (computed) against `expected`, rows
    /// and columns matched by label.
    pub fn diff(&self, expected: &LabeledMatrix) -> Vec<CellDiff> {
        let mut out = Vec::new();
        for l in &expected.labels {
            if !self.labels.contains(l) {
                out.push(CellDiff::MissingRow(l.clone()));
            }
        }
        for l in &self.labels {
            if !expected.labels.contains(l) {
                out.push(CellDiff::ExtraRow(l.clone()));
            }
        }
        for (i, a) in expected.labels.iter().enumerate() {
            for (j, b) in expected.labels.iter().enumerate() {
                if let Some(actual) = self.get(a, b) {
                    let exp = &expected.cells[i][j];
                    if actual != exp {
                        out.push(CellDiff::Cell {
                            row: a.clone(),
                            col: b.clone(),
                            expected: exp.clone(),
                            actual: actual.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// CSV with labels in the first row and column; `0` marks disjoint facets.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("facet");
        for l in &self.labels {
            s.push_str(&format!(",\"{l}\""));
        }
        s.push('\n');
        for (l, row) in self.labels.iter().zip(&self.cells) {
            s.push_str(&format!("\"{l}\""));
            for c in row {
                s.push_str(&format!(",{c}"));
            }
            s.push('\n');
        }
        s
    }

    /// Aligned text: label column, `||`, then one column per facet with
    /// blanks for disjoint pairs.
    pub fn to_text(&self) -> String {
        let lw = self.labels.iter().map(|l| l.to_string().chars().count()).max().unwrap_or(1);
        let cw = self.cells.iter().flatten().map(|c| c.to_string().len()).max().unwrap_or(1);
        let mut s = String::new();
        for (l, row) in self.labels.iter().zip(&self.cells) {
            let name = l.to_string();
            s.push_str(&name);
            s.push_str(&" ".repeat(lw - name.chars().count()));
            s.push_str(" ||");
            for c in row {
                let t = if *c == Cell::Zero { String::new() } else { c.to_string() };
                s.push_str(&format!(" {t:>cw$}"));
            }
            s.push('\n');
        }
        s
    }
}
