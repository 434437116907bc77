//! Arcs, semi-arcs, and the moves that switch crossings over a fixed shadow.
//!
//! An arc is a maximal piece of a component between two undercrossing
//! passes; it passes over everything in between. An arc crossing change
//! switches the crossings at the arc's two ends: when they are distinct both
//! variants agree; when the arc starts and ends at the same undercrossing,
//! variant I switches that crossing once and variant II leaves the diagram
//! unchanged. The semi-arc move switches the two crossings at the ends of a
//! single edge.

use std::fmt;

use crate::diagram::{EdgeId, LinkDiagram, Passage};
use crate::error::{DiagramError, Result};

/// (component, passage index) of the pass going under at crossing `c` in the
/// diagram's current state.
pub fn under_visit(d: &LinkDiagram, c: usize) -> (usize, usize) {
    if d.is_flipped(c) {
        d.shadow().visit_over_base(c)
    } else {
        d.shadow().visit_under_base(c)
    }
}

/// (component, passage index) of the pass going over at crossing `c`.
pub fn over_visit(d: &LinkDiagram, c: usize) -> (usize, usize) {
    if d.is_flipped(c) {
        d.shadow().visit_under_base(c)
    } else {
        d.shadow().visit_over_base(c)
    }
}

/// A maximal overpass: from one undercrossing pass of a component to the
/// next. A component that never goes under yields one closed arc with no
/// endpoints.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OverArc {
    pub comp: usize,
    /// Passage index of the undercrossing the arc leaves; `None` when closed.
    pub start: Option<usize>,
    /// Passage index of the undercrossing the arc arrives at; equals `start`
    /// when the component goes under exactly once.
    pub end: Option<usize>,
    /// Edge labels from the start's exit to the end's entry, in order. These
    /// are the arc's semi-arcs.
    pub edges: Vec<EdgeId>,
    /// Interior passes, all over, with multiplicity.
    pub overs: Vec<Passage>,
}

impl OverArc {
    pub fn is_closed(&self) -> bool {
        self.start.is_none()
    }

    /// Crossings at the arc's two ends; equal entries when they coincide.
    pub fn endpoints(&self, d: &LinkDiagram) -> Option<(usize, usize)> {
        let ps = d.shadow().passages(self.comp);
        Some((ps[self.start?].crossing, ps[self.end?].crossing))
    }
}

/// The arc leaving the undercrossing at passage index `i` of component `k`.
/// The passage there must go under in the current state.
pub fn arc_starting_at(d: &LinkDiagram, k: usize, i: usize) -> OverArc {
    let ps = d.shadow().passages(k);
    let cyc = d.shadow().comp_edges(k);
    let len = ps.len();
    debug_assert!(d.passage_under(ps[i]));
    let mut edges = vec![];
    let mut overs = vec![];
    for s in 1..=len {
        let pos = (i + s) % len;
        edges.push(cyc[pos]);
        if d.passage_under(ps[pos]) {
            return OverArc { comp: k, start: Some(i), end: Some(pos), edges, overs };
        }
        overs.push(ps[pos]);
    }
    unreachable!("the walk returns to the starting undercrossing");
}

/// All arcs of the diagram, grouped by component in passage order. A knot
/// diagram with n crossings has exactly n arcs.
pub fn enumerate_arcs(d: &LinkDiagram) -> Vec<OverArc> {
    let mut out = vec![];
    for k in 0..d.component_count() {
        let ps = d.shadow().passages(k);
        let unders: Vec<usize> = (0..ps.len()).filter(|&i| d.passage_under(ps[i])).collect();
        if unders.is_empty() {
            out.push(OverArc {
                comp: k,
                start: None,
                end: None,
                edges: d.shadow().comp_edges(k).to_vec(),
                overs: ps.to_vec(),
            });
            continue;
        }
        for &i in &unders {
            out.push(arc_starting_at(d, k, i));
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MoveVariant {
    AccI,
    AccII,
}

/// An arc crossing change, addressed by the undercrossing the arc leaves:
/// external crossing id plus the under-strand's exit slot there. The selector
/// binds at application time, so logs stay valid while earlier moves reshape
/// the arcs, and a stale selector is rejected instead of switching the wrong
/// crossings.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AccMove {
    pub crossing: u32,
    pub out_slot: u8,
    pub variant: MoveVariant,
}

impl AccMove {
    /// Selector for an arc of the current diagram.
    pub fn for_arc(d: &LinkDiagram, arc: &OverArc, variant: MoveVariant) -> Result<AccMove> {
        let Some(start) = arc.start else {
            return Err(DiagramError::BadMove(
                "a closed arc has no undercrossing to change".into(),
            ));
        };
        let p = d.shadow().passages(arc.comp)[start];
        Ok(AccMove {
            crossing: d.shadow().external_id(p.crossing),
            out_slot: p.out_slot(),
            variant,
        })
    }

    /// The arc this selector names in diagram `d`.
    pub fn resolve(&self, d: &LinkDiagram) -> Result<OverArc> {
        let c = d.shadow().crossing_index(self.crossing).ok_or_else(|| {
            DiagramError::BadMove(format!("no crossing with id {}", self.crossing))
        })?;
        let (k, i) = under_visit(d, c);
        let p = d.shadow().passages(k)[i];
        if p.out_slot() != self.out_slot {
            return Err(DiagramError::BadMove(format!(
                "crossing {} exits under at slot {}, selector says {}",
                self.crossing,
                p.out_slot(),
                self.out_slot
            )));
        }
        Ok(arc_starting_at(d, k, i))
    }
}

/// Apply an arc crossing change. The shadow is untouched; only over/under
/// flags change.
pub fn apply_acc(d: &LinkDiagram, m: &AccMove) -> Result<LinkDiagram> {
    let arc = m.resolve(d)?;
    let (x, y) = arc.endpoints(d).expect("resolved arcs are open");
    if x == y {
        match m.variant {
            MoveVariant::AccI => Ok(d.toggled(&[x])),
            MoveVariant::AccII => Ok(d.clone()),
        }
    } else {
        Ok(d.toggled(&[x, y]))
    }
}

/// The semi-arc move: switch the crossings at both ends of one edge. An edge
/// looping from a crossing back to itself switches it twice, a no-op.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct KinunoMove {
    pub edge: EdgeId,
}

pub fn apply_kinuno(d: &LinkDiagram, m: &KinunoMove) -> Result<LinkDiagram> {
    if !d.shadow().has_edge(m.edge) {
        return Err(DiagramError::BadMove(format!("no edge {}", m.edge)));
    }
    match d.shadow().ends(m.edge) {
        None => Ok(d.clone()),
        Some([a, b]) => {
            let mut out = d.clone();
            out.toggle_mut(a.crossing);
            out.toggle_mut(b.crossing);
            Ok(out)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiagMove {
    Acc(AccMove),
    Kin(KinunoMove),
}

pub fn apply(d: &LinkDiagram, m: &DiagMove) -> Result<LinkDiagram> {
    match m {
        DiagMove::Acc(a) => apply_acc(d, a),
        DiagMove::Kin(k) => apply_kinuno(d, k),
    }
}

impl fmt::Display for DiagMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagMove::Acc(a) => {
                let v = match a.variant {
                    MoveVariant::AccI => "ACC1",
                    MoveVariant::AccII => "ACC2",
                };
                write!(f, "{v} c{}.{}", a.crossing, a.out_slot)
            }
            DiagMove::Kin(k) => write!(f, "KIN e{}", k.edge),
        }
    }
}

impl DiagMove {
    pub fn parse(line: &str) -> Result<DiagMove> {
        let bad = |msg: String| DiagramError::Parse { line: 1, msg };
        let t = line.trim();
        let (word, arg) = t
            .split_once(' ')
            .ok_or_else(|| bad(format!("`{t}` is not a move")))?;
        let arg = arg.trim();
        match word {
            "ACC1" | "ACC2" => {
                let variant = if word == "ACC1" { MoveVariant::AccI } else { MoveVariant::AccII };
                let body = arg
                    .strip_prefix('c')
                    .ok_or_else(|| bad(format!("`{arg}` should look like c3.2")))?;
                let (id, slot) = body
                    .split_once('.')
                    .ok_or_else(|| bad(format!("`{arg}` should look like c3.2")))?;
                let crossing = id
                    .parse::<u32>()
                    .map_err(|_| bad(format!("`{id}` is not a crossing id")))?;
                let out_slot = slot
                    .parse::<u8>()
                    .ok()
                    .filter(|&s| s < 4)
                    .ok_or_else(|| bad(format!("`{slot}` is not a slot (0..3)")))?;
                Ok(DiagMove::Acc(AccMove { crossing, out_slot, variant }))
            }
            "KIN" => {
                let body = arg
                    .strip_prefix('e')
                    .ok_or_else(|| bad(format!("`{arg}` should look like e5")))?;
                let edge = body
                    .parse::<u32>()
                    .map_err(|_| bad(format!("`{body}` is not an edge label")))?;
                Ok(DiagMove::Kin(KinunoMove { edge }))
            }
            _ => Err(bad(format!("unknown move `{word}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoggedMove {
    pub mv: DiagMove,
    /// Hash of the diagram the move was applied to, when recorded in-process.
    pub pre: Option<u64>,
}

/// An ordered move sequence. Replaying from the initial diagram re-applies
/// every move, re-resolving arc selectors in each intermediate diagram and
/// checking recorded hashes.
#[derive(Clone, Debug, Default)]
pub struct MoveLog {
    pub moves: Vec<LoggedMove>,
}

impl MoveLog {
    pub fn new() -> MoveLog {
        MoveLog::default()
    }

    pub fn from_moves(moves: impl IntoIterator<Item = DiagMove>) -> MoveLog {
        MoveLog {
            moves: moves.into_iter().map(|mv| LoggedMove { mv, pre: None }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Apply `mv` to `before`, recording the move with `before`'s hash.
    pub fn record(&mut self, before: &LinkDiagram, mv: DiagMove) -> Result<LinkDiagram> {
        let after = apply(before, &mv)?;
        self.moves.push(LoggedMove { mv, pre: Some(before.hash64()) });
        Ok(after)
    }

    pub fn extend(&mut self, other: MoveLog) {
        self.moves.extend(other.moves);
    }

    pub fn replay(&self, start: &LinkDiagram) -> Result<LinkDiagram> {
        let mut cur = start.clone();
        for (step, lm) in self.moves.iter().enumerate() {
            if let Some(expected) = lm.pre {
                let got = cur.hash64();
                if got != expected {
                    return Err(DiagramError::ReplayMismatch { step, expected, got });
                }
            }
            cur = apply(&cur, &lm.mv)?;
        }
        Ok(cur)
    }

    pub fn parse(text: &str) -> Result<MoveLog> {
        let mut moves = vec![];
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            moves.push(LoggedMove { mv: DiagMove::parse(line)?, pre: None });
        }
        Ok(MoveLog { moves })
    }
}

impl fmt::Display for MoveLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lm in &self.moves {
            writeln!(f, "{}", lm.mv)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::LinkDiagram;

    const TREFOIL: &str = "X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)";
    const HOPF: &str = "components: (1 2) (3 4)\nX 0 1 4 2 3\nX 1 4 1 3 2\n";
    const TWO_KINKS: &str = "X 1 1 2 2 3\nX 2 3 4 4 1\n";

    #[test]
    fn trefoil_has_three_short_arcs() {
        let d = LinkDiagram::parse(TREFOIL).unwrap();
        let arcs = enumerate_arcs(&d);
        assert_eq!(arcs.len(), 3);
        for arc in &arcs {
            assert_eq!(arc.edges.len(), 2);
            assert_eq!(arc.overs.len(), 1);
            let (x, y) = arc.endpoints(&d).unwrap();
            assert_ne!(x, y);
        }
    }

    #[test]
    fn hopf_has_one_arc_per_component() {
        let d = LinkDiagram::parse(HOPF).unwrap();
        let arcs = enumerate_arcs(&d);
        assert_eq!(arcs.len(), 2);
        for arc in &arcs {
            let (x, y) = arc.endpoints(&d).unwrap();
            assert_eq!(x, y, "each component goes under exactly once");
            assert_eq!(arc.edges.len(), 2);
        }
    }

    #[test]
    fn fully_over_component_gives_closed_arc() {
        let d = LinkDiagram::parse(HOPF).unwrap().toggled(&[1]);
        let arcs = enumerate_arcs(&d);
        let closed: Vec<_> = arcs.iter().filter(|a| a.is_closed()).collect();
        assert_eq!(closed.len(), 1);
        assert_eq!(closed[0].comp, 1);
        let open: Vec<_> = arcs.iter().filter(|a| !a.is_closed()).collect();
        assert_eq!(open.len(), 2);
        assert!(AccMove::for_arc(&d, closed[0], MoveVariant::AccII).is_err());
    }

    #[test]
    fn acc_variants_on_coincident_endpoints() {
        let d = LinkDiagram::parse(HOPF).unwrap();
        let arcs = enumerate_arcs(&d);
        let arc0 = arcs.iter().find(|a| a.comp == 0).unwrap();
        let m1 = AccMove::for_arc(&d, arc0, MoveVariant::AccI).unwrap();
        assert_eq!(apply_acc(&d, &m1).unwrap(), d.toggled(&[0]));
        let m2 = AccMove::for_arc(&d, arc0, MoveVariant::AccII).unwrap();
        assert_eq!(apply_acc(&d, &m2).unwrap(), d);
    }

    #[test]
    fn acc_variants_agree_on_distinct_endpoints() {
        let d = LinkDiagram::parse(TREFOIL).unwrap();
        for arc in enumerate_arcs(&d) {
            let m1 = AccMove::for_arc(&d, &arc, MoveVariant::AccI).unwrap();
            let m2 = AccMove::for_arc(&d, &arc, MoveVariant::AccII).unwrap();
            let a = apply_acc(&d, &m1).unwrap();
            let b = apply_acc(&d, &m2).unwrap();
            assert_eq!(a, b);
            let (x, y) = arc.endpoints(&d).unwrap();
            assert_eq!(a, d.toggled(&[x, y]));
        }
    }

    #[test]
    fn stale_selector_rejected() {
        let d = LinkDiagram::parse(HOPF).unwrap();
        let arc0 = enumerate_arcs(&d).into_iter().find(|a| a.comp == 0).unwrap();
        let m = AccMove::for_arc(&d, &arc0, MoveVariant::AccI).unwrap();
        let once = apply_acc(&d, &m).unwrap();
        let err = apply_acc(&once, &m).unwrap_err();
        assert!(matches!(err, DiagramError::BadMove(_)), "{err}");
    }

    #[test]
    fn kinuno_is_an_involution_and_kink_loops_are_noops() {
        let d = LinkDiagram::parse(TWO_KINKS).unwrap();
        // Edge 2 loops from crossing 1 back to itself.
        let kink = KinunoMove { edge: 2 };
        assert_eq!(apply_kinuno(&d, &kink).unwrap(), d);
        let m = KinunoMove { edge: 1 };
        let once = apply_kinuno(&d, &m).unwrap();
        assert_ne!(once, d);
        assert_eq!(apply_kinuno(&once, &m).unwrap(), d);
    }

    #[test]
    fn kinuno_moves_commute() {
        let d = LinkDiagram::parse(TREFOIL).unwrap();
        let edges: Vec<u32> = d.shadow().edges().collect();
        for &a in &edges {
            for &b in &edges {
                let ab = apply_kinuno(&apply_kinuno(&d, &KinunoMove { edge: a }).unwrap(), &KinunoMove { edge: b }).unwrap();
                let ba = apply_kinuno(&apply_kinuno(&d, &KinunoMove { edge: b }).unwrap(), &KinunoMove { edge: a }).unwrap();
                assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn kinuno_composition_over_an_arc_is_acc2() {
        for text in [TREFOIL, HOPF, TWO_KINKS] {
            let d = LinkDiagram::parse(text).unwrap();
            for arc in enumerate_arcs(&d) {
                if arc.is_closed() {
                    continue;
                }
                let mut by_kinuno = d.clone();
                for &e in &arc.edges {
                    by_kinuno = apply_kinuno(&by_kinuno, &KinunoMove { edge: e }).unwrap();
                }
                let m = AccMove::for_arc(&d, &arc, MoveVariant::AccII).unwrap();
                assert_eq!(by_kinuno, apply_acc(&d, &m).unwrap(), "arc {arc:?} in {text}");
            }
        }
    }

    #[test]
    fn log_replays_with_hashes() {
        let d = LinkDiagram::parse(TREFOIL).unwrap();
        let mut log = MoveLog::new();
        let arcs = enumerate_arcs(&d);
        let m1 = AccMove::for_arc(&d, &arcs[0], MoveVariant::AccI).unwrap();
        let step1 = log.record(&d, DiagMove::Acc(m1)).unwrap();
        let arcs1 = enumerate_arcs(&step1);
        let m2 = AccMove::for_arc(&step1, &arcs1[1], MoveVariant::AccII).unwrap();
        let step2 = log.record(&step1, DiagMove::Acc(m2)).unwrap();
        assert_eq!(log.replay(&d).unwrap(), step2);
        // Replaying from the wrong start trips the hash check.
        let err = log.replay(&d.toggled(&[0])).unwrap_err();
        assert!(matches!(err, DiagramError::ReplayMismatch { step: 0, .. }), "{err}");
    }

    #[test]
    fn log_text_round_trips() {
        let text = "ACC1 c3.2\nACC2 c0.0\nKIN e17\n";
        let log = MoveLog::parse(text).unwrap();
        assert_eq!(log.to_string(), text);
        assert!(log.moves.iter().all(|m| m.pre.is_none()));
    }

    #[test]
    fn empty_log_is_identity() {
        let d = LinkDiagram::parse(HOPF).unwrap();
        assert_eq!(MoveLog::new().replay(&d).unwrap(), d);
    }
}
