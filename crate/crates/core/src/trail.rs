//! Walks through a diagram that compile into arc crossing change logs.
//!
//! In an alternating diagram every edge joins an overcrossing end to an
//! undercrossing end, so directing each edge toward its undercrossing end
//! turns the shadow into a digraph with two in-edges and two out-edges at
//! every crossing. A walk that starts on the understrand of `x`, ends on the
//! understrand of `y`, and otherwise follows this digraph compiles into a
//! chain of arc crossing changes whose net effect switches exactly `{x, y}`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::diagram::{EdgeId, LinkDiagram, PortRef, Shadow};
use crate::error::{DiagramError, Result};
use crate::moves::{arc_starting_at, under_visit, AccMove, DiagMove, MoveLog, MoveVariant};

/// What a trail does at an interior crossing, relative to its direction of
/// travel. Ports around a crossing are counterclockwise, so arriving through
/// port `s` the exits are `s+2` (straight), `s+1` (right), and `s+3` (left).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Turn {
    Straight,
    Left,
    Right,
}

impl std::fmt::Display for Turn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Turn::Straight => "straight",
            Turn::Left => "left",
            Turn::Right => "right",
        })
    }
}

/// A walk from `from` to `to` that starts on the understrand of `from`, ends
/// on the understrand of `to`, and uses each edge at most once. `turns[i]`
/// happens at the far end of `edges[i]`; the final arrival carries no turn.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdmissibleTrail {
    pub from: usize,
    pub to: usize,
    pub edges: Vec<EdgeId>,
    pub turns: Vec<Turn>,
}

impl AdmissibleTrail {
    /// Number of arc crossing changes the compiled log contains: one per
    /// maximal straight run.
    pub fn segment_count(&self) -> usize {
        1 + self.turns.iter().filter(|t| **t != Turn::Straight).count()
    }
}

/// The shadow with each edge directed toward its undercrossing end. Exists
/// exactly when every edge has one overcrossing end and one undercrossing
/// end, which is the alternating condition.
#[derive(Clone)]
pub struct DirectedShadow {
    diagram: LinkDiagram,
    /// (tail, head) ports per edge; the head is the undercrossing end.
    dirs: BTreeMap<EdgeId, (PortRef, PortRef)>,
    outs: Vec<Vec<EdgeId>>,
    ins: Vec<Vec<EdgeId>>,
}

pub fn directed_shadow(d: &LinkDiagram) -> Result<DirectedShadow> {
    let sh = d.shadow_arc();
    let n = sh.crossing_count();
    let mut dirs = BTreeMap::new();
    let mut outs = vec![vec![]; n];
    let mut ins = vec![vec![]; n];
    for e in sh.edges() {
        let [p, q] = sh.ends(e).ok_or_else(|| {
            DiagramError::NotApplicable("a crossing-free circle has no edge directions".into())
        })?;
        let (t, h) = match (d.port_under(p), d.port_under(q)) {
            (false, true) => (p, q),
            (true, false) => (q, p),
            _ => {
                return Err(DiagramError::NotApplicable(format!(
                    "edge e{e} does not join an overcrossing end to an undercrossing end"
                )))
            }
        };
        dirs.insert(e, (t, h));
        outs[t.crossing].push(e);
        ins[h.crossing].push(e);
    }
    Ok(DirectedShadow { diagram: d.clone(), dirs, outs, ins })
}

impl DirectedShadow {
    pub fn diagram(&self) -> &LinkDiagram {
        &self.diagram
    }

    pub fn shadow(&self) -> Arc<Shadow> {
        self.diagram.shadow_arc()
    }

    pub fn crossing_count(&self) -> usize {
        self.shadow().crossing_count()
    }

    pub fn tail(&self, e: EdgeId) -> usize {
        self.dirs[&e].0.crossing
    }

    pub fn head(&self, e: EdgeId) -> usize {
        self.dirs[&e].1.crossing
    }

    pub fn tail_port(&self, e: EdgeId) -> PortRef {
        self.dirs[&e].0
    }

    pub fn head_port(&self, e: EdgeId) -> PortRef {
        self.dirs[&e].1
    }

    pub fn out_edges(&self, c: usize) -> &[EdgeId] {
        &self.outs[c]
    }

    pub fn in_edges(&self, c: usize) -> &[EdgeId] {
        &self.ins[c]
    }
}

/// Search for a trail from `x` to `y` whose compilation switches exactly
/// `{x, y}`. Exhaustive on alternating diagrams; on other diagrams a bounded
/// walk search, so `None` then means none was found, not that none exists.
pub fn find_admissible_trail(d: &LinkDiagram, x: usize, y: usize) -> Option<AdmissibleTrail> {
    let n = d.shadow().crossing_count();
    if x >= n || y >= n || x == y {
        return None;
    }
    let walk_search = |d| def43_search(d, x, y, 2 * n, &mut |t| compile_trail(d, t).is_ok());
    match directed_shadow(d) {
        Ok(g) => alternating_trail(d, &g, x, y).or_else(|| walk_search(d)),
        Err(_) => walk_search(d),
    }
}

fn alternating_trail(
    d: &LinkDiagram,
    g: &DirectedShadow,
    x: usize,
    y: usize,
) -> Option<AdmissibleTrail> {
    let sh = d.shadow();
    let (k, i) = under_visit(d, x);
    let pass = sh.passages(k)[i];
    let mut starts = [
        sh.tuple(x)[pass.out_slot() as usize],
        sh.tuple(x)[pass.in_slot as usize],
    ];
    starts.sort_unstable();
    let mut tried = BTreeSet::new();
    for a1 in starts {
        if !tried.insert(a1) {
            continue;
        }
        if let Some(t) = trail_via(d, g, x, y, a1) {
            if compile_trail(d, &t).is_ok() {
                return Some(t);
            }
        }
    }
    None
}

/// Build the trail that leaves `x` along `a1`, passes straight over the next
/// crossing, then follows a shortest directed path to `y` avoiding `x`.
///
/// The crossing passed straight over may be `x` itself when `a1` is a kink
/// loop: the first compiled arc then runs from the understrand of `x` across
/// its own overstrand, which is checked before any switch lands. Only the
/// remainder of the walk has to stay clear of `x`, because once the first
/// move flips `x` any later visit would read its strands wrongly.
fn trail_via(
    d: &LinkDiagram,
    g: &DirectedShadow,
    x: usize,
    y: usize,
    a1: EdgeId,
) -> Option<AdmissibleTrail> {
    let sh = g.shadow();
    let ends = sh.ends(a1)?;
    let dep = *ends.iter().find(|p| p.crossing == x && d.port_under(**p))?;
    let arr = if ends[0] == dep { ends[1] } else { ends[0] };
    let u1 = arr.crossing;
    // Forced continuation: straight along the overstrand of u1.
    let exit = (arr.slot + 2) % 4;
    let a2 = sh.tuple(u1)[exit as usize];
    if a2 == a1 {
        return None;
    }
    let dep2 = PortRef { crossing: u1, slot: exit };
    let ends2 = sh.ends(a2)?;
    let arr2 = if ends2[0] == dep2 { ends2[1] } else { ends2[0] };
    let u2 = arr2.crossing;
    if u2 == x {
        return None;
    }
    debug_assert!(d.port_under(arr2));
    let mut edges = vec![a1, a2];
    let mut turns = vec![Turn::Straight];
    if u2 != y {
        let path = directed_path(g, u2, y, x)?;
        let mut prev = arr2;
        for e in path {
            let t = g.tail_port(e);
            debug_assert_eq!(t.crossing, prev.crossing);
            turns.push(turn_between(prev.slot, t.slot));
            edges.push(e);
            prev = g.head_port(e);
        }
    }
    Some(AdmissibleTrail { from: x, to: y, edges, turns })
}

/// Shortest directed path from `from` to `to` that never touches `avoid`.
/// A shortest directed walk repeats no vertex, hence no edge, so plain
/// breadth-first search suffices and the result is a valid trail remainder.
fn directed_path(g: &DirectedShadow, from: usize, to: usize, avoid: usize) -> Option<Vec<EdgeId>> {
    let n = g.crossing_count();
    let mut prev: Vec<Option<EdgeId>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![];
            let mut c = to;
            while c != from {
                let e = prev[c].unwrap();
                path.push(e);
                c = g.tail(e);
            }
            path.reverse();
            return Some(path);
        }
        for &e in g.out_edges(v) {
            let h = g.head(e);
            if h == avoid || seen[h] {
                continue;
            }
            seen[h] = true;
            prev[h] = Some(e);
            queue.push_back(h);
        }
    }
    None
}

fn turn_between(s_in: u8, s_out: u8) -> Turn {
    match (4 + s_out - s_in) % 4 {
        1 => Turn::Right,
        2 => Turn::Straight,
        3 => Turn::Left,
        _ => unreachable!("a walk cannot leave through its arrival port"),
    }
}

/// Bounded depth-first search over the walk moves: straight along an
/// overstrand, or turn left or right onto the crossing strand. Completed
/// walks are handed to `accept`; the first accepted one is returned.
pub(crate) fn def43_search(
    d: &LinkDiagram,
    x: usize,
    y: usize,
    cap: usize,
    accept: &mut dyn FnMut(&AdmissibleTrail) -> bool,
) -> Option<AdmissibleTrail> {
    let sh = d.shadow();
    let idx: BTreeMap<EdgeId, u32> =
        sh.edges().enumerate().map(|(i, e)| (e, i as u32)).collect();
    if idx.len() > 64 {
        return None;
    }
    let (k, i) = under_visit(d, x);
    let pass = sh.passages(k)[i];
    let mut starts = vec![pass.out_slot(), pass.in_slot];
    starts.sort_unstable_by_key(|&s| (sh.tuple(x)[s as usize], s));
    let mut budget: u64 = 2_000_000;
    for depth in 1..=cap {
        for &slot in &starts {
            let e = sh.tuple(x)[slot as usize];
            let dep = PortRef { crossing: x, slot };
            let Some(arr) = far_end(sh, e, dep) else { continue };
            let mut st = Walk {
                d,
                sh,
                idx: &idx,
                x,
                y,
                edges: vec![e],
                turns: vec![],
                budget: &mut budget,
                accept,
            };
            if let Some(t) = st.dfs(arr, 1u64 << idx[&e], depth - 1) {
                return Some(t);
            }
        }
    }
    None
}

struct Walk<'a> {
    d: &'a LinkDiagram,
    sh: &'a Shadow,
    idx: &'a BTreeMap<EdgeId, u32>,
    x: usize,
    y: usize,
    edges: Vec<EdgeId>,
    turns: Vec<Turn>,
    budget: &'a mut u64,
    accept: &'a mut dyn FnMut(&AdmissibleTrail) -> bool,
}

impl Walk<'_> {
    fn dfs(&mut self, arr: PortRef, used: u64, left: usize) -> Option<AdmissibleTrail> {
        if *self.budget == 0 {
            return None;
        }
        *self.budget -= 1;
        let c = arr.crossing;
        if c == self.x {
            return None;
        }
        if c == self.y && self.d.port_under(arr) {
            let cand = AdmissibleTrail {
                from: self.x,
                to: self.y,
                edges: self.edges.clone(),
                turns: self.turns.clone(),
            };
            if (self.accept)(&cand) {
                return Some(cand);
            }
            return None;
        }
        if left == 0 {
            return None;
        }
        let s = arr.slot;
        let mut options = vec![((s + 1) % 4, Turn::Right), ((s + 3) % 4, Turn::Left)];
        if !self.d.port_under(arr) {
            options.push(((s + 2) % 4, Turn::Straight));
        }
        options.sort_by_key(|&(slot, _)| (self.sh.tuple(c)[slot as usize], slot));
        for (slot, turn) in options {
            let e = self.sh.tuple(c)[slot as usize];
            let bit = 1u64 << self.idx[&e];
            if used & bit != 0 {
                continue;
            }
            let dep = PortRef { crossing: c, slot };
            let Some(next) = far_end(self.sh, e, dep) else { continue };
            self.edges.push(e);
            self.turns.push(turn);
            if let Some(t) = self.dfs(next, used | bit, left - 1) {
                return Some(t);
            }
            self.edges.pop();
            self.turns.pop();
        }
        None
    }
}

fn far_end(sh: &Shadow, e: EdgeId, from: PortRef) -> Option<PortRef> {
    let [p, q] = sh.ends(e)?;
    Some(if p == from { q } else { p })
}

/// One maximal straight run of a trail: from `tail`, over any interior
/// crossings, arriving at `head` through `arrival`.
pub(crate) struct Segment {
    pub(crate) tail: usize,
    pub(crate) head: usize,
    pub(crate) edges: Vec<EdgeId>,
    pub(crate) arrival: PortRef,
}

/// Re-walk the trail against `d`, checking that every turn matches the
/// shadow's ports, and cut it at the non-straight turns.
pub(crate) fn split_segments(d: &LinkDiagram, t: &AdmissibleTrail) -> Result<Vec<Segment>> {
    let sh = d.shadow();
    let n = sh.crossing_count();
    if t.from >= n || t.to >= n {
        return Err(DiagramError::Validation("trail endpoint out of range".into()));
    }
    if t.from == t.to {
        return Err(DiagramError::Certification("trail endpoints must differ".into()));
    }
    if t.edges.is_empty() {
        return Err(DiagramError::Certification("a trail needs at least one edge".into()));
    }
    if t.turns.len() + 1 != t.edges.len() {
        return Err(DiagramError::Certification(
            "turn count must be one less than edge count".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for &e in &t.edges {
        if !seen.insert(e) {
            return Err(DiagramError::Certification(format!("edge e{e} is used twice")));
        }
    }
    let e0 = t.edges[0];
    let ends0 = sh
        .ends(e0)
        .ok_or_else(|| DiagramError::Certification("a trail cannot use a crossing-free circle".into()))?;
    let (k, i) = under_visit(d, t.from);
    let out_slot = sh.passages(k)[i].out_slot();
    let mut dep0 = None;
    for p in ends0 {
        if p.crossing == t.from && d.port_under(p) && (dep0.is_none() || p.slot == out_slot) {
            dep0 = Some(p);
        }
    }
    let dep0 = dep0.ok_or_else(|| {
        DiagramError::Certification("the trail does not begin on the understrand of its start".into())
    })?;
    let mut arr = far_end(sh, e0, dep0).unwrap();
    let mut segs = vec![];
    let mut seg_tail = t.from;
    let mut seg_edges = vec![e0];
    for (j, &turn) in t.turns.iter().enumerate() {
        let exit = match turn {
            Turn::Straight => (arr.slot + 2) % 4,
            Turn::Right => (arr.slot + 1) % 4,
            Turn::Left => (arr.slot + 3) % 4,
        };
        let e = t.edges[j + 1];
        if sh.tuple(arr.crossing)[exit as usize] != e {
            return Err(DiagramError::Certification(format!(
                "turn {j} does not lead onto edge e{e}"
            )));
        }
        if turn != Turn::Straight {
            segs.push(Segment {
                tail: seg_tail,
                head: arr.crossing,
                edges: std::mem::take(&mut seg_edges),
                arrival: arr,
            });
            seg_tail = arr.crossing;
        }
        let dep = PortRef { crossing: arr.crossing, slot: exit };
        arr = far_end(sh, e, dep).unwrap();
        seg_edges.push(e);
    }
    segs.push(Segment { tail: seg_tail, head: arr.crossing, edges: seg_edges, arrival: arr });
    if arr.crossing != t.to {
        return Err(DiagramError::Certification(format!(
            "the trail ends at crossing {} instead of {}",
            sh.external_id(arr.crossing),
            sh.external_id(t.to)
        )));
    }
    Ok(segs)
}

/// Compile a trail into a logged move sequence whose replay switches exactly
/// `{t.from, t.to}`. Each maximal straight run must lie on an arc of the
/// diagram at the moment its move applies; segments ending on an overstrand
/// are resolved as a run, back to front, which flips every interior turn of
/// the run twice and its two ends once.
pub fn compile_trail(d: &LinkDiagram, t: &AdmissibleTrail) -> Result<MoveLog> {
    let segs = split_segments(d, t)?;
    let mut log = MoveLog::new();
    let mut cur = d.clone();
    let mut i = 0;
    while i < segs.len() {
        if cur.port_under(segs[i].arrival) {
            let mv = matching_acc(&cur, &segs[i])?;
            cur = log.record(&cur, DiagMove::Acc(mv))?;
            i += 1;
        } else {
            let mut end = i;
            while end < segs.len() && !cur.port_under(segs[end].arrival) {
                end += 1;
            }
            if end == segs.len() {
                return Err(DiagramError::Certification("the trail ends on an overstrand".into()));
            }
            for b in (i..=end).rev() {
                let mv = matching_acc(&cur, &segs[b])?;
                cur = log.record(&cur, DiagMove::Acc(mv))?;
            }
            i = end + 1;
        }
    }
    let n = d.shadow().crossing_count();
    let diff: Vec<usize> =
        (0..n).filter(|&c| cur.is_flipped(c) != d.is_flipped(c)).collect();
    let want = vec![t.from.min(t.to), t.from.max(t.to)];
    if diff != want {
        return Err(DiagramError::Certification(format!(
            "the compiled moves switch {diff:?} instead of {want:?}"
        )));
    }
    Ok(log)
}

/// The arc of `cur` that runs along `seg`'s edges between its two end
/// crossings, as a move selector.
fn matching_acc(cur: &LinkDiagram, seg: &Segment) -> Result<AccMove> {
    if seg.tail == seg.head {
        return Err(DiagramError::Certification(
            "a trail segment loops back to its own start".into(),
        ));
    }
    let mut want = seg.edges.clone();
    want.sort_unstable();
    let ends = (seg.tail.min(seg.head), seg.tail.max(seg.head));
    for root in [seg.tail, seg.head] {
        let (k, i) = under_visit(cur, root);
        let arc = arc_starting_at(cur, k, i);
        let Some((a, b)) = arc.endpoints(cur) else { continue };
        if (a.min(b), a.max(b)) != ends {
            continue;
        }
        let mut got = arc.edges.clone();
        got.sort_unstable();
        if got == want {
            return AccMove::for_arc(cur, &arc, MoveVariant::AccI);
        }
    }
    Err(DiagramError::Certification(format!(
        "no arc of the current diagram joins crossings {} and {} along the trail",
        cur.shadow().external_id(seg.tail),
        cur.shadow().external_id(seg.head)
    )))
}

/// Smooth away crossing `z` of an alternating diagram, joining arriving to
/// departing edges so that the result stays a single closed traversal with
/// directions at every other crossing unchanged.
pub fn resolve_vertex(g: &DirectedShadow, z: usize) -> Result<DirectedShadow> {
    let n = g.crossing_count();
    if z >= n {
        return Err(DiagramError::BadMove(format!("no crossing indexed {z}")));
    }
    if n < 2 {
        return Err(DiagramError::BadMove("cannot resolve the last crossing".into()));
    }
    // The two in-ports sit on the understrand of z; a flat resolution joins
    // each in-port to one of its neighboring out-ports.
    let u = g
        .in_edges(z)
        .iter()
        .map(|&e| g.head_port(e))
        .filter(|p| p.crossing == z)
        .map(|p| p.slot)
        .min()
        .expect("two-in two-out");
    let pairings = [
        [(u, (u + 1) % 4), ((u + 2) % 4, (u + 3) % 4)],
        [(u, (u + 3) % 4), ((u + 2) % 4, (u + 1) % 4)],
    ];
    let mut last = None;
    for pairing in pairings {
        match try_resolution(g, z, pairing) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| {
        DiagramError::Certification("both resolutions break the single traversal".into())
    }))
}

/// Rebuild the diagram with `z` smoothed along `pairs` (slot pairs at `z`)
/// by walking the new curve from scratch. A pairing can reverse the travel
/// direction along part of the old curve, so edge labels and orientations
/// are rediscovered rather than carried over; each kept crossing's tuple is
/// rotated so the current understrand arrival sits first, baking the present
/// over/under state into the rebuilt base diagram.
fn try_resolution(g: &DirectedShadow, z: usize, pairs: [(u8, u8); 2]) -> Result<DirectedShadow> {
    let sh = g.shadow();
    let d = g.diagram();
    let n = sh.crossing_count();
    let mut glue = vec![usize::MAX; 4 * n];
    let mut edge_at = vec![EdgeId::MAX; 4 * n];
    let mut total_edges = 0usize;
    for e in sh.edges() {
        let [p, q] = sh
            .ends(e)
            .expect("directed shadows have no crossing-free circles");
        let (pi, qi) = (4 * p.crossing + p.slot as usize, 4 * q.crossing + q.slot as usize);
        glue[pi] = qi;
        glue[qi] = pi;
        edge_at[pi] = e;
        edge_at[qi] = e;
        total_edges += 1;
    }
    let mut pair = [0usize; 4];
    for &(a, b) in &pairs {
        pair[a as usize] = b as usize;
        pair[b as usize] = a as usize;
    }

    // Walk every new component, skipping through the smoothing at z.
    let mut arrive: Vec<Option<EdgeId>> = vec![None; 4 * n];
    let mut depart: Vec<Option<EdgeId>> = vec![None; 4 * n];
    let mut visited: BTreeSet<EdgeId> = BTreeSet::new();
    let mut comps: Vec<Vec<EdgeId>> = vec![];
    let mut next_label: EdgeId = 1;
    for start in 0..4 * n {
        if start / 4 == z || arrive[start].is_some() || depart[start].is_some() {
            continue;
        }
        let mut cycle = vec![];
        let mut out = start;
        loop {
            let e = next_label;
            next_label += 1;
            cycle.push(e);
            depart[out] = Some(e);
            visited.insert(edge_at[out]);
            let mut inp = glue[out];
            let mut hops = 0;
            while inp / 4 == z {
                hops += 1;
                if hops > 2 * total_edges {
                    return Err(DiagramError::Certification(
                        "this resolution closes off a free loop".into(),
                    ));
                }
                let through = 4 * z + pair[inp % 4];
                visited.insert(edge_at[through]);
                inp = glue[through];
            }
            arrive[inp] = Some(e);
            out = 4 * (inp / 4) + (inp % 4 + 2) % 4;
            if out == start {
                break;
            }
        }
        comps.push(cycle);
    }
    if visited.len() != total_edges {
        return Err(DiagramError::Certification(
            "this resolution closes off a free loop".into(),
        ));
    }
    if comps.len() != 1 {
        return Err(DiagramError::Certification(
            "this resolution splits the traversal in two".into(),
        ));
    }

    let mut tuples = vec![];
    let mut xids = vec![];
    for c in (0..n).filter(|&c| c != z) {
        let under0: u8 = if d.is_flipped(c) { 1 } else { 0 };
        let s0 = [under0, under0 + 2]
            .into_iter()
            .find(|&s| arrive[4 * c + s as usize].is_some())
            .expect("the understrand arrives once");
        let at = |s: u8| {
            let p = 4 * c + (s % 4) as usize;
            arrive[p].or(depart[p]).expect("every port carries an edge")
        };
        tuples.push([at(s0), at(s0 + 1), at(s0 + 2), at(s0 + 3)]);
        xids.push(sh.external_id(c));
    }
    let rebuilt = Shadow::from_parts(tuples, xids, Some(comps), None)?;
    directed_shadow(&LinkDiagram::base(Arc::new(rebuilt)))
}
