use std::collections::BTreeSet;

use reflectofold_core::coxeter::diagram_d;
use reflectofold_core::doubling::canonical_sequence;
use reflectofold_core::golden::{GoldenTables, STATE_TABLES};
use reflectofold_core::table::CellDiff;

#[test]
fn facet_lists_match_reference() {
    let g = GoldenTables::embedded();
    let states = canonical_sequence(&diagram_d()).unwrap();
    for s in &states {
        let key = format!("P{}", s.n());
        let expected: BTreeSet<_> = g.corrected_facets(&key).unwrap().into_iter().collect();
        let got: BTreeSet<_> = s.facet_labels().into_iter().collect();
        let missing: Vec<String> = expected.difference(&got).map(|l| l.to_string()).collect();
        let extra: Vec<String> = got.difference(&expected).map(|l| l.to_string()).collect();
        assert!(missing.is_empty() && extra.is_empty(), "{key}: missing {missing:?}, extra {extra:?}");
    }
}

#[test]
fn printed_p4_list_differs_only_by_the_doubled_facet() {
    let g = GoldenTables::embedded();
    let states = canonical_sequence(&diagram_d()).unwrap();
    let printed: BTreeSet<_> = g.facets["P4"].iter().cloned().collect();
    let got: BTreeSet<_> = states[4].facet_labels().into_iter().collect();
    let diff: Vec<String> = printed.symmetric_difference(&got).map(|l| l.to_string()).collect();
    assert_eq!(diff, ["4"]);
}

#[test]
fn state_tables_match_reference() {
    let g = GoldenTables::embedded();
    let states = canonical_sequence(&diagram_d()).unwrap();
    for (s, t) in states.iter().zip(STATE_TABLES) {
        for ty in [3, 7] {
            let diff = s.adjacency_matrix(ty).diff(g.matrix(t, ty).unwrap());
            let shown: Vec<String> = diff.iter().take(10).map(|d| d.to_string()).collect();
            assert!(diff.is_empty(), "{t} type {ty}: {} differences, first {shown:#?}", diff.len());
        }
    }
}

#[test]
fn printed_tables_differ_exactly_at_errata_cells() {
    let g = GoldenTables::embedded();
    let states = canonical_sequence(&diagram_d()).unwrap();
    let mut total = 0;
    for (s, t) in states.iter().zip(STATE_TABLES) {
        for ty in [3, 7] {
            let diff = s.adjacency_matrix(ty).diff(&g.printed[&(t.to_string(), ty)]);
            let cells: BTreeSet<_> = diff
                .iter()
                .map(|d| match d {
                    CellDiff::Cell { row, col, .. } => (row.clone(), col.clone()),
                    other => panic!("{t} type {ty}: {other}"),
                })
                .collect();
            assert_eq!(cells, g.errata_cells(t, ty), "{t} type {ty}");
            total += cells.len();
        }
    }
    assert_eq!(total, 44);
    assert_eq!(g.verify_errata().unwrap().len(), 31);
}
