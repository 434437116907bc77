//! Randomized invariants over seeded braid-closure diagrams in random
//! over/under states.

mod common;

use std::collections::BTreeSet;

use arcflip_core::braid::{braid_closure, FIG8};
use arcflip_core::labeling::{linking_data, BinaryLabel};
use arcflip_core::moves::{
    apply_acc, apply_kinuno, enumerate_arcs, AccMove, DiagMove, KinunoMove, MoveLog, MoveVariant,
};
use arcflip_core::stategraph::{build_state_graph, state_diagram, DEFAULT_LIMIT};
use arcflip_core::LinkDiagram;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mask_of(d: &LinkDiagram) -> u32 {
    BinaryLabel::from_diagram(d).to_mask().expect("small diagram")
}

fn arb_diagram_sized(max_letters: usize) -> impl Strategy<Value = LinkDiagram> {
    let word = (2..=4usize).prop_flat_map(move |strands| {
        (
            Just(strands),
            proptest::collection::vec(
                (1..strands as i32, any::<bool>())
                    .prop_map(|(i, neg)| if neg { -i } else { i }),
                2..=max_letters,
            ),
        )
    });
    (word, any::<u32>()).prop_filter_map(
        "the closure must use every strand",
        |((strands, word), mask)| {
            braid_closure(strands, &word).ok().map(|d| {
                let flips: Vec<usize> =
                    (0..d.crossing_count()).filter(|&c| mask >> c & 1 == 1).collect();
                d.toggled(&flips)
            })
        },
    )
}

fn arb_diagram() -> impl Strategy<Value = LinkDiagram> {
    arb_diagram_sized(10)
}

fn flip_diff(a: &LinkDiagram, b: &LinkDiagram) -> BTreeSet<usize> {
    (0..a.crossing_count()).filter(|&c| a.is_flipped(c) != b.is_flipped(c)).collect()
}

proptest! {
    #[test]
    fn arc_moves_flip_only_their_endpoints(d in arb_diagram()) {
        for arc in enumerate_arcs(&d) {
            if arc.is_closed() {
                continue;
            }
            let (x, y) = arc.endpoints(&d).unwrap();
            for variant in [MoveVariant::AccI, MoveVariant::AccII] {
                let out = apply_acc(&d, &AccMove::for_arc(&d, &arc, variant).unwrap()).unwrap();
                let expected: BTreeSet<usize> = if x == y {
                    if variant == MoveVariant::AccI { BTreeSet::from([x]) } else { BTreeSet::new() }
                } else {
                    BTreeSet::from([x, y])
                };
                prop_assert_eq!(flip_diff(&out, &d), expected);
            }
        }
    }

    #[test]
    fn edge_moves_flip_both_edge_ends(d in arb_diagram()) {
        for k in 0..d.component_count() {
            for &e in d.shadow().comp_edges(k) {
                let out = apply_kinuno(&d, &KinunoMove { edge: e }).unwrap();
                let expected: BTreeSet<usize> = match d.shadow().ends(e) {
                    Some([a, b]) if a.crossing != b.crossing => {
                        BTreeSet::from([a.crossing, b.crossing])
                    }
                    _ => BTreeSet::new(),
                };
                prop_assert_eq!(flip_diff(&out, &d), expected);
            }
        }
    }

    #[test]
    fn edge_moves_compose_to_arc_moves(d in arb_diagram()) {
        for arc in enumerate_arcs(&d) {
            if arc.is_closed() {
                continue;
            }
            let mv = AccMove::for_arc(&d, &arc, MoveVariant::AccII).unwrap();
            let via_arc = apply_acc(&d, &mv).unwrap();
            let mut via_edges = d.clone();
            for &e in &arc.edges {
                via_edges = apply_kinuno(&via_edges, &KinunoMove { edge: e }).unwrap();
            }
            prop_assert_eq!(via_edges.flips(), via_arc.flips());
        }
    }

    #[test]
    fn self_free_arc_switches_preserve_linking_parity(
        d in arb_diagram().prop_filter("every component must be self-free", common::is_self_free)
    ) {
        let parity = linking_data(&d).total.rem_euclid(2);
        for arc in enumerate_arcs(&d) {
            if arc.is_closed() {
                continue;
            }
            let mv = AccMove::for_arc(&d, &arc, MoveVariant::AccII).unwrap();
            let out = apply_acc(&d, &mv).unwrap();
            prop_assert_eq!(linking_data(&out).total.rem_euclid(2), parity);
        }
    }

    #[test]
    fn mirrors_complement_the_label(d in arb_diagram()) {
        let full = (1u32 << d.crossing_count()) - 1;
        prop_assert_eq!(mask_of(&d.mirror()), mask_of(&d) ^ full);
    }

    #[test]
    fn logs_replay_to_their_recorded_end(d in arb_diagram(), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut log = MoveLog::new();
        let mut cur = d.clone();
        for _ in 0..6 {
            let arcs: Vec<_> =
                enumerate_arcs(&cur).into_iter().filter(|a| !a.is_closed()).collect();
            if arcs.is_empty() {
                break;
            }
            let arc = &arcs[r.random_range(0..arcs.len())];
            let variant =
                if r.random_bool(0.5) { MoveVariant::AccI } else { MoveVariant::AccII };
            let mv = AccMove::for_arc(&cur, arc, variant).unwrap();
            cur = log.record(&cur, DiagMove::Acc(mv)).unwrap();
        }
        let replayed = log.replay(&d).unwrap();
        prop_assert_eq!(replayed.flips(), cur.flips());
        prop_assert_eq!(replayed.serialize(), cur.serialize());
        if !log.is_empty() {
            // A different starting state must trip the recorded hash check.
            prop_assert!(log.replay(&d.toggled(&[0])).is_err());
        }
    }

    #[test]
    fn state_edges_match_open_arcs(d in arb_diagram_sized(6)) {
        let shadow = d.shadow_arc();
        let g = build_state_graph(d.shadow_arc(), DEFAULT_LIMIT).unwrap();
        for mask in 0..g.vertex_count() as u32 {
            let s = state_diagram(&shadow, mask);
            let open = enumerate_arcs(&s).iter().filter(|a| !a.is_closed()).count();
            prop_assert_eq!(g.outdegree(mask), open);
            for &(w, _) in g.out_edges(mask) {
                let bits = (mask ^ w).count_ones();
                prop_assert!(bits == 0 || bits == 2);
            }
        }
    }
}

#[test]
fn figure_eight_labels_complement_under_mirror() {
    let shadow = LinkDiagram::parse(FIG8).unwrap().shadow_arc();
    for mask in 0..16u32 {
        let d = state_diagram(&shadow, mask);
        assert_eq!(mask_of(&d), mask);
        assert_eq!(mask_of(&d.mirror()), mask ^ 0xF);
    }
}
