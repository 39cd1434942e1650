mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reflectofold_core::coxeter::{
    check_seed_conditions, classify_subdiagram, derive_compact_facets, diagram_d, parse_diagram, ClassKind,
    DIAGRAM_D_DSL,
};
use reflectofold_core::doubling::{canonical_sequence, verify_against_oracle, PolytopeState};
use reflectofold_core::flatmfd::{classify, generate_group, is_torsion_free, FlatManifoldClass};
use reflectofold_core::geom::{q, Isometry3, Mat3, Vec3};
use reflectofold_core::reflectofold::{
    builtin_gluings, check_developability, validate_gluing, GluingScheme, Reflectofold, Word, WordItem,
};
use reflectofold_core::table::{Cell, LabeledMatrix};

use common::*;

fn states() -> &'static [PolytopeState] {
    static S: OnceLock<Vec<PolytopeState>> = OnceLock::new();
    S.get_or_init(|| canonical_sequence(&diagram_d()).unwrap())
}

fn analyse(g: &GluingScheme) -> Reflectofold {
    let s = &states()[g.base];
    let report = validate_gluing(s, g);
    assert!(report.is_valid(), "{}: {:?}", g.name, report.violations);
    Reflectofold::new(s, g, &report).unwrap()
}

type ClassKey = BTreeSet<(u32, String, Vec<String>)>;

fn class_key(rf: &Reflectofold) -> ClassKey {
    rf.classes
        .iter()
        .map(|c| (c.ty, c.name.to_string(), c.members.iter().map(|m| m.to_string()).collect()))
        .collect()
}

fn matrix_ok(m: &LabeledMatrix) -> bool {
    m.is_symmetric() && m.has_unit_diagonal()
}

// Coxeter diagrams

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdiagram_class_is_relabeling_invariant(
        perm in Just((1..=7usize).collect::<Vec<_>>()).prop_shuffle(),
        subset in proptest::sample::subsequence((1..=7usize).collect::<Vec<_>>(), 1..=7),
    ) {
        let d = diagram_d();
        let a = classify_subdiagram(&d, &subset).unwrap();
        let moved: Vec<usize> = subset.iter().map(|&v| perm[v - 1]).collect();
        let b = classify_subdiagram(&d.permuted(&perm), &moved).unwrap();
        prop_assert_eq!(a.kind, b.kind);
        prop_assert_eq!(a.signature(), b.signature());
    }

    #[test]
    fn compact_set_ignores_edge_order(lines in Just(DIAGRAM_D_DSL.lines().filter(|l| l.starts_with("edge")).map(String::from).collect::<Vec<_>>()).prop_shuffle()) {
        let text = format!("nodes: 7\n{}\n", lines.join("\n"));
        let m = parse_diagram(&text).unwrap();
        prop_assert_eq!(&m, &diagram_d());
        let compact: Vec<usize> = derive_compact_facets(&m).unwrap().iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| i + 1).collect();
        prop_assert_eq!(compact, vec![3, 7]);
    }
}

#[test]
fn spherical_subdiagrams_are_hereditary() {
    let d = diagram_d();
    let all: Vec<Vec<usize>> = (1u32..128).map(|mask| (1..=7).filter(|v| mask >> (v - 1) & 1 == 1).collect()).collect();
    for s in &all {
        let c = classify_subdiagram(&d, s).unwrap();
        if c.kind == ClassKind::Spherical {
            for t in all.iter().filter(|t| t.len() < s.len() && t.iter().all(|v| s.contains(v))) {
                assert_eq!(classify_subdiagram(&d, t).unwrap().kind, ClassKind::Spherical, "{s:?} ⊃ {t:?}");
            }
        }
    }
    assert!(check_seed_conditions(&d).passes());
}

// Link tessellations and doubling

#[test]
fn tile_placements_are_reflection_words() {
    for s in states() {
        let link = &s.i3;
        for t in link.tiles() {
            assert!(t.placement.is_orthogonal());
            let mut g = Isometry3::identity();
            for l in &t.word {
                g = g.compose(&link.resolve_plane(l).unwrap().reflection());
            }
            assert_eq!(g, t.placement, "P{} tile {:?}", s.n(), t.word);
            for v in &t.vertices {
                assert!(v.0.iter().all(|c| c.denom() <= &2.into()), "P{} vertex {v}", s.n());
            }
        }
    }
}

#[test]
fn last_mirror_is_a_symmetry() {
    for s in &states()[1..] {
        let plane = s.i3.history_planes().last().unwrap();
        let r = plane.reflection();
        assert!(s.i3.is_tessellation_symmetry(&r, symmetry_mode(0)), "P{}", s.n());
        let labels: BTreeSet<Vec3> = s.i3.vertices();
        let mapped: BTreeSet<Vec3> = labels.iter().map(|v| r.apply(v)).collect();
        assert_eq!(labels, mapped);
    }
}

#[test]
fn canonical_sequence_is_deterministic() {
    let again = canonical_sequence(&diagram_d()).unwrap();
    for (a, b) in states().iter().zip(&again) {
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    }
}

#[test]
fn canonical_tables_use_labels_two_and_three() {
    for s in states() {
        for &t in s.compact_types() {
            let m = s.adjacency_matrix(t);
            assert!(matrix_ok(&m));
            for (i, row) in m.cells.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    let ok = if i == j { *c == Cell::One } else { matches!(c, Cell::Zero | Cell::Label(2) | Cell::Label(3)) };
                    assert!(ok, "P{} type {t} ({i}, {j}) = {c}", s.n());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_doublings_agree_with_oracle(seed in any::<u64>(), len in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in random_sequence(&mut rng, len) {
            let r = verify_against_oracle(&s);
            prop_assert!(r.ok, "{:?}: {:?}", s.history, r.divergence);
            for &t in s.compact_types() {
                prop_assert!(matrix_ok(&s.adjacency_matrix(t)));
            }
        }
    }
}

// Gluings

#[test]
fn inverse_scheme_gives_the_same_reflectofold() {
    for g in builtin_gluings() {
        let a = analyse(&g);
        let inv = g.inverse();
        assert_eq!(inv.inverse(), g);
        let b = analyse(&inv);
        assert_eq!(class_key(&a), class_key(&b), "{}", g.name);
        for t in &a.types {
            assert_eq!(a.graph(*t).edge_set(), b.graph(*t).edge_set(), "{} type {t}", g.name);
            assert_eq!(a.adjacency_matrix(*t), b.adjacency_matrix(*t), "{} type {t}", g.name);
        }
    }
}

#[test]
fn builtin_corner_angles_are_submultiples() {
    for g in builtin_gluings() {
        let rf = analyse(&g);
        assert!(check_developability(&rf).developable());
        for graph in rf.graphs.values() {
            assert!(graph.edges.iter().all(|e| e.label.submultiple().is_some()), "{}", g.name);
        }
        assert!(rf.mixed.iter().all(|(_, _, l)| l.submultiple() == Some(2)), "{}", g.name);
    }
}

#[test]
fn gluing_words_are_tessellation_symmetries() {
    for g in builtin_gluings() {
        let s = &states()[g.base];
        for p in &g.pairings {
            let iso = p.word.isometry(&s.i3).unwrap();
            assert!(s.i3.is_tessellation_symmetry(&iso, symmetry_mode(g.base)), "{} {}", g.name, p.word);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn naming_ignores_pairing_order(which in 0usize..4, order in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle()) {
        let g = builtin_gluings().swap_remove(which);
        let mut shuffled = g.clone();
        shuffled.pairings = order.iter().filter(|&&i| i < g.pairings.len()).map(|&i| g.pairings[i].clone()).collect();
        prop_assert_eq!(class_key(&analyse(&g)), class_key(&analyse(&shuffled)));
    }

    #[test]
    fn words_round_trip(word in word_strategy()) {
        let text = word.to_string();
        prop_assert_eq!(Word::parse(&text).unwrap(), word);
    }
}

fn word_strategy() -> impl Strategy<Value = Word> {
    let label = prop::sample::select(vec!["1", "6_5", "1_2", "4_5", "3_{4,2}"]);
    let leaf = prop_oneof![
        label.prop_map(|l| WordItem::Reflect(l.parse().unwrap())),
        (-3i64..=3, -3i64..=3, -3i64..=3).prop_map(|(x, y, z)| WordItem::Translate(Vec3::int(x, y, z))),
    ];
    let item = leaf.prop_recursive(2, 8, 3, |inner| {
        (prop::collection::vec(inner, 1..3), 2u32..4).prop_map(|(v, k)| WordItem::Power(v, k))
    });
    prop::collection::vec(item, 1..5).prop_map(Word)
}

// Cusp groups

#[test]
fn decks_push_the_box_across_and_track_det_parity() {
    for g in builtin_gluings() {
        let s = &states()[g.base];
        let bx = s.i3.region_box().unwrap();
        for d in decks(states(), &g) {
            assert!(d.map.is_orthogonal());
            let p = &g.pairings[d.pairing];
            let phi = p.word.isometry(&s.i3).unwrap();
            let parity = if p.word.reflection_count() % 2 == 0 { q(1) } else { q(-1) };
            assert_eq!(phi.det(), parity, "{} {}", g.name, p.word);
            let sign = if d.corrected { q(-1) } else { q(1) };
            assert_eq!(d.map.det(), sign * parity, "{} {}", g.name, p.word);
            let center = Vec3(std::array::from_fn(|i| (&bx[i].0 + &bx[i].1) / q(2)));
            let c = d.map.apply(&center);
            let outside = (0..3).any(|i| {
                let half = (&bx[i].1 - &bx[i].0) / q(2);
                c.0[i] >= &bx[i].1 + &half || c.0[i] <= &bx[i].0 - &half
            });
            assert!(outside, "{}: deck {} keeps the box centre inside", g.name, d.map);
        }
    }
}

fn point_group_set(ms: &[Mat3]) -> BTreeSet<Mat3> {
    ms.iter().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cusp_class_is_conjugation_invariant(which in 0usize..4, perm in 0usize..48, shift in (-4i64..=4, -4i64..=4, -4i64..=4)) {
        let g = builtin_gluings().swap_remove(which);
        let maps: Vec<Isometry3> = decks(states(), &g).into_iter().map(|d| d.map).collect();
        let group = generate_group(&maps).unwrap();
        let s = signed_permutations().swap_remove(perm);
        let h = Isometry3::new(s.clone(), Vec3::int(shift.0, shift.1, shift.2));
        let moved = generate_group(&conjugate(&maps, &h)).unwrap();
        prop_assert_eq!(classify(&group), classify(&moved));
        let st = s.transpose();
        let expected: Vec<Mat3> = group.point_group.iter().map(|a| s.mul(a).mul(&st)).collect();
        prop_assert_eq!(point_group_set(&expected), point_group_set(&moved.point_group));
        let lattice_shift = Isometry3::translation(group.lattice[0].clone());
        let shifted = generate_group(&conjugate(&maps, &lattice_shift)).unwrap();
        prop_assert_eq!(point_group_set(&shifted.point_group), point_group_set(&group.point_group));
        prop_assert_eq!(classify(&shifted), classify(&group));
    }

    #[test]
    fn torsion_test_agrees_with_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = random_small_group(&mut rng);
        let g = generate_group(&gens).unwrap();
        prop_assert!(g.order() <= 4);
        if let Some(k) = cubic_scale(&g) {
            prop_assert_eq!(is_torsion_free(&g), !brute_force_torsion(&g, &k));
        }
    }

    #[test]
    fn manifold_classes_have_matching_holonomy(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = generate_group(&random_small_group(&mut rng)).unwrap();
        let expected = match classify(&g) {
            FlatManifoldClass::E1 => Some(1),
            FlatManifoldClass::E2 => Some(2),
            FlatManifoldClass::E3 => Some(3),
            FlatManifoldClass::E4 | FlatManifoldClass::E6 => Some(4),
            FlatManifoldClass::E5 => Some(6),
            _ => None,
        };
        if let Some(n) = expected {
            prop_assert_eq!(g.order(), n);
            prop_assert!(g.point_group.iter().all(|a| a.det() == q(1)));
        }
    }
}
