//! End-to-end run: seed check, the nine doubling states, the oracle, the four
//! builtin gluings and every comparison against the golden tables.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::coxeter::{check_seed_conditions, CoxeterMatrix, SeedReport};
use crate::doubling::{canonical_sequence, verify_against_oracle, PolytopeState};
use crate::flatmfd::{classify_scheme, FlatManifoldClass};
use crate::golden::{sha256_hex, GoldenTables, GOLDEN_SHA256, SCHEME_TABLES, STATE_TABLES};
use crate::reflectofold::{builtin, check_developability, coxeter_presentation, validate_gluing, Reflectofold};
use crate::table::{CellDiff, LabeledMatrix};

#[derive(Clone, Debug, Serialize)]
pub struct TableCheck {
    pub table: String,
    pub ty: u32,
    pub size: usize,
    /// Cells where the table as printed disagrees with the computation.
    pub printed_differences: usize,
    /// Whether those cells are exactly the recorded errata cells.
    pub printed_matches_errata: bool,
    /// Differences against the corrected table; empty on success.
    pub differences: Vec<String>,
}

impl TableCheck {
    pub fn ok(&self) -> bool {
        self.printed_matches_errata && self.differences.is_empty()
    }
}

fn cell_set(diff: &[CellDiff]) -> Option<BTreeSet<(String, String)>> {
    diff.iter()
        .map(|d| match d {
            CellDiff::Cell { row, col, .. } => Some((row.to_string(), col.to_string())),
            _ => None,
        })
        .collect()
}

fn check_table(golden: &GoldenTables, table: &str, ty: u32, m: &LabeledMatrix) -> TableCheck {
    let key = (table.to_string(), ty);
    let differences: Vec<String> = match golden.matrices.get(&key) {
        Some(want) => m.diff(want).iter().map(|d| d.to_string()).collect(),
        None => vec![format!("no golden table {table} type {ty}")],
    };
    let (printed_differences, printed_matches_errata) = match golden.printed.get(&key) {
        Some(p) => {
            let d = m.diff(p);
            let errata: BTreeSet<(String, String)> =
                golden.errata_cells(table, ty).iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
            (d.len(), cell_set(&d) == Some(errata))
        }
        None => (0, false),
    };
    TableCheck { table: table.to_string(), ty, size: m.size(), printed_differences, printed_matches_errata, differences }
}

#[derive(Clone, Debug, Serialize)]
pub struct StateCheck {
    pub n: usize,
    pub history: Vec<String>,
    pub facets: usize,
    pub facets_match: bool,
    pub facet_differences: Vec<String>,
    pub oracle_ok: bool,
    pub oracle_divergence: Option<String>,
    pub tables: Vec<TableCheck>,
}

impl StateCheck {
    pub fn ok(&self) -> bool {
        self.facets_match && self.oracle_ok && self.tables.iter().all(TableCheck::ok)
    }
}

fn check_state(golden: &GoldenTables, s: &PolytopeState) -> StateCheck {
    let key = format!("P{}", s.n());
    let got: BTreeSet<String> = s.facet_labels().iter().map(|l| l.to_string()).collect();
    let facet_differences = match golden.corrected_facets(&key) {
        Some(want) => {
            let want: BTreeSet<String> = want.iter().map(|l| l.to_string()).collect();
            let mut d: Vec<String> = want.difference(&got).map(|l| format!("missing {l}")).collect();
            d.extend(got.difference(&want).map(|l| format!("extra {l}")));
            d
        }
        None => vec![format!("no golden facet list for {key}")],
    };
    let oracle = verify_against_oracle(s);
    let tables = match STATE_TABLES.get(s.n()) {
        Some(t) => s.compact_types().iter().map(|&ty| check_table(golden, t, ty, &s.adjacency_matrix(ty))).collect(),
        None => Vec::new(),
    };
    StateCheck {
        n: s.n(),
        history: s.history.iter().map(|l| l.to_string()).collect(),
        facets: got.len(),
        facets_match: facet_differences.is_empty(),
        facet_differences,
        oracle_ok: oracle.ok,
        oracle_divergence: oracle.divergence,
        tables,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemeCheck {
    pub name: String,
    pub base: usize,
    pub valid: bool,
    pub violations: Vec<String>,
    pub type3_classes: usize,
    pub partition_matches: bool,
    pub corners_match: bool,
    pub developable: bool,
    pub developability_violations: Vec<String>,
    pub relators: usize,
    pub tables: Vec<TableCheck>,
    pub class: Option<FlatManifoldClass>,
    pub torsion_free: bool,
    pub orientable: bool,
    pub point_group_order: usize,
    pub error: Option<String>,
}

impl SchemeCheck {
    pub fn ok(&self) -> bool {
        self.valid
            && self.error.is_none()
            && self.partition_matches
            && self.corners_match
            && self.developable
            && self.torsion_free
            && self.orientable
            && self.tables.iter().all(TableCheck::ok)
    }
}

fn check_scheme(golden: &GoldenTables, states: &[PolytopeState], table: &str, name: &str) -> SchemeCheck {
    let mut c = SchemeCheck {
        name: name.to_string(),
        base: 0,
        valid: false,
        violations: Vec::new(),
        type3_classes: 0,
        partition_matches: false,
        corners_match: false,
        developable: false,
        developability_violations: Vec::new(),
        relators: 0,
        tables: Vec::new(),
        class: None,
        torsion_free: false,
        orientable: false,
        point_group_order: 0,
        error: None,
    };
    let g = match builtin(name) {
        Ok(g) => g,
        Err(e) => {
            c.error = Some(e.to_string());
            return c;
        }
    };
    c.base = g.base;
    let Some(s) = states.get(g.base) else {
        c.error = Some(format!("state P{} was not built", g.base));
        return c;
    };
    let report = validate_gluing(s, &g);
    c.valid = report.is_valid();
    c.violations = report.violations.iter().map(|v| v.to_string()).collect();
    let rf = match Reflectofold::new(s, &g, &report) {
        Ok(rf) => rf,
        Err(e) => {
            c.error = Some(e.to_string());
            return c;
        }
    };
    c.type3_classes = rf.classes_of(3).count();
    let got: BTreeSet<BTreeSet<_>> = rf.classes_of(3).map(|k| k.members.iter().cloned().collect()).collect();
    c.partition_matches = golden
        .classes
        .get(name)
        .is_some_and(|want| got == want.iter().map(|k| k.iter().cloned().collect()).collect());
    c.corners_match = golden.corners.get(name).is_some_and(|want| {
        let want: BTreeSet<_> = want
            .iter()
            .map(|k| if k.a <= k.b { (k.k, k.a.clone(), k.b.clone()) } else { (k.k, k.b.clone(), k.a.clone()) })
            .collect();
        rf.graph(7).glued_edge_set() == want
    });
    let dev = check_developability(&rf);
    c.developable = dev.developable();
    c.developability_violations = dev.violations.iter().map(|v| v.to_string()).collect();
    match coxeter_presentation(&rf) {
        Ok(p) => c.relators = p.relators.len(),
        Err(e) => c.error = Some(e.to_string()),
    }
    c.tables = s.compact_types().iter().map(|&ty| check_table(golden, table, ty, &rf.adjacency_matrix(ty))).collect();
    match classify_scheme(s, &g) {
        Ok(cusp) => {
            c.class = Some(cusp.class);
            c.torsion_free = cusp.torsion_free;
            c.orientable = cusp.orientable;
            c.point_group_order = cusp.group.order();
        }
        Err(e) => c.error = Some(e.to_string()),
    }
    c
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub seed: SeedReport,
    /// `None` when the golden data did not come from the embedded copy.
    pub golden_checksum: Option<bool>,
    pub errata: Result<Vec<String>, String>,
    pub sequence_error: Option<String>,
    pub states: Vec<StateCheck>,
    pub schemes: Vec<SchemeCheck>,
    /// Wall-clock time per stage; kept out of the JSON report.
    pub timings: Vec<(String, Duration)>,
}

impl PipelineReport {
    pub fn ok(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<String> {
        if !self.seed.passes() {
            return Some(format!(
                "seed check failed: condition (a) {}, condition (b) {}",
                self.seed.condition_a, self.seed.condition_b
            ));
        }
        if self.golden_checksum == Some(false) {
            return Some("embedded golden data checksum mismatch".to_string());
        }
        if let Err(e) = &self.errata {
            return Some(format!("golden errata: {e}"));
        }
        if let Some(e) = &self.sequence_error {
            return Some(format!("doubling sequence: {e}"));
        }
        for s in &self.states {
            if !s.facets_match {
                return Some(format!("P{} facets: {}", s.n, s.facet_differences.join(", ")));
            }
            if !s.oracle_ok {
                return Some(format!("P{} oracle: {}", s.n, s.oracle_divergence.clone().unwrap_or_default()));
            }
            if let Some(t) = s.tables.iter().find(|t| !t.ok()) {
                return Some(table_failure(t));
            }
        }
        for c in &self.schemes {
            if let Some(e) = &c.error {
                return Some(format!("{}: {e}", c.name));
            }
            if !c.valid {
                return Some(format!("{}: invalid gluing: {}", c.name, c.violations.join("; ")));
            }
            if !c.partition_matches {
                return Some(format!("{}: type-3 partition differs from the reference", c.name));
            }
            if !c.corners_match {
                return Some(format!("{}: (7,7) corner list differs from the reference", c.name));
            }
            if !c.developable {
                return Some(format!("{}: not developable: {}", c.name, c.developability_violations.join("; ")));
            }
            if let Some(t) = c.tables.iter().find(|t| !t.ok()) {
                return Some(table_failure(t));
            }
            if !(c.torsion_free && c.orientable) {
                return Some(format!("{}: cusp group is not an orientable Bieberbach group", c.name));
            }
        }
        None
    }

    /// Deterministic machine-readable report (no timings).
    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "first_failure": self.first_failure(),
            "seed": self.seed,
            "golden": {
                "checksum_ok": self.golden_checksum,
                "errata": match &self.errata {
                    Ok(lines) => json!({ "justified": lines }),
                    Err(e) => json!({ "error": e }),
                },
            },
            "sequence_error": self.sequence_error,
            "states": self.states,
            "schemes": self.schemes,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        out.push_str(&format!(
            "seed: affine {:?} [{}], compact {:?}, (a) {}, (b) {}\n",
            self.seed.affine_subdiagrams,
            self.seed.affine_classes.join(", "),
            self.seed.compact,
            mark(self.seed.condition_a),
            mark(self.seed.condition_b)
        ));
        match &self.errata {
            Ok(lines) => out.push_str(&format!("golden errata: {} justified\n", lines.len())),
            Err(e) => out.push_str(&format!("golden errata: FAIL {e}\n")),
        }
        for s in &self.states {
            let tables: Vec<String> = s
                .tables
                .iter()
                .map(|t| format!("{}/{} {}x{} printed-diff {} {}", t.table, t.ty, t.size, t.size, t.printed_differences, mark(t.ok())))
                .collect();
            out.push_str(&format!(
                "P{}: {} facets {}, oracle {}, {}\n",
                s.n,
                s.facets,
                mark(s.facets_match),
                mark(s.oracle_ok),
                tables.join(", ")
            ));
        }
        for c in &self.schemes {
            let class = c.class.map(|k| k.to_string()).unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(
                "{} (P{}): gluing {}, {} type-3 classes {}, corners {}, developable {}, tables {}, cusp {} (|F| = {}, torsion-free {}, orientable {})\n",
                c.name,
                c.base,
                mark(c.valid),
                c.type3_classes,
                mark(c.partition_matches),
                mark(c.corners_match),
                mark(c.developable),
                mark(c.tables.iter().all(TableCheck::ok)),
                class,
                c.point_group_order,
                c.torsion_free,
                c.orientable
            ));
        }
        for (stage, d) in &self.timings {
            out.push_str(&format!("time {stage}: {:.3}s\n", d.as_secs_f64()));
        }
        match self.first_failure() {
            None => out.push_str("pipeline: ok\n"),
            Some(f) => out.push_str(&format!("pipeline: FAIL {f}\n")),
        }
        out
    }
}

fn table_failure(t: &TableCheck) -> String {
    if t.differences.is_empty() {
        format!("{} type {}: printed differences are not exactly the errata cells", t.table, t.ty)
    } else {
        format!("{} type {}: {} differences, first {}", t.table, t.ty, t.differences.len(), t.differences[0])
    }
}

/// Runs everything. `embedded` says whether `golden` is the built-in copy, in
/// which case its checksum is verified.
pub fn run(seed: &CoxeterMatrix, golden: &GoldenTables, embedded: bool) -> PipelineReport {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, Duration)>| {
        timings.push((name.to_string(), clock.elapsed()));
        clock = Instant::now();
    };
    let seed_report = check_seed_conditions(seed);
    lap("seed", &mut timings);
    let mut report = PipelineReport {
        golden_checksum: embedded.then(|| sha256_hex(crate::golden::GOLDEN_TEXT) == GOLDEN_SHA256.trim()),
        errata: golden.verify_errata().map_err(|e| e.to_string()),
        seed: seed_report,
        sequence_error: None,
        states: Vec::new(),
        schemes: Vec::new(),
        timings: Vec::new(),
    };
    if !report.seed.passes() {
        report.timings = timings;
        return report;
    }
    let states = match canonical_sequence(seed) {
        Ok(s) => s,
        Err(e) => {
            report.sequence_error = Some(e.to_string());
            report.timings = timings;
            return report;
        }
    };
    lap("doubling", &mut timings);
    report.states = states.iter().map(|s| check_state(golden, s)).collect();
    lap("states", &mut timings);
    report.schemes = SCHEME_TABLES.iter().map(|&(table, name)| check_scheme(golden, &states, table, name)).collect();
    lap("schemes", &mut timings);
    report.timings = timings;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::diagram_d;

    #[test]
    fn pipeline_passes_and_mutation_fails() {
        let golden = GoldenTables::embedded();
        let r = run(&diagram_d(), &golden, true);
        assert_eq!(r.first_failure(), None);
        let classes: Vec<_> = r.schemes.iter().map(|c| c.class.unwrap().to_string()).collect();
        assert_eq!(classes, ["E1", "E2", "E4", "E6"]);
        assert_eq!(r.to_json().to_string(), run(&diagram_d(), &golden, true).to_json().to_string());

        let mut bad = golden.clone();
        bad.mutate("t7:3:0:1=3").unwrap();
        let r = run(&diagram_d(), &bad, false);
        let f = r.first_failure().unwrap();
        assert!(f.starts_with("t7 type 3"), "{f}");
    }
}
