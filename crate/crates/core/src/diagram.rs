//! Diagram parsing, validation, face tracing, and serialization.
//!
//! File format, one crossing per line:
//!
//! ```text
//! # comment
//! components: (1 2 3 4 5 6)
//! outer: e1.L
//! X 1 1 4 2 5
//! ```
//!
//! `X <id> <a> <b> <c> <d>` lists the four edge labels counterclockwise
//! around the crossing starting at the incoming under-edge, so slots 0 and 2
//! carry the understrand and slots 1 and 3 the overstrand. A compact
//! single-line form `X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)` with implicit ids
//! 1..n is also accepted.
//!
//! The `components:` header fixes the oriented edge cycle of every
//! component. Without it, cycles are traced from the crossing tuples and
//! oriented so that edge labels ascend along the strand (one wrap allowed);
//! any under-passage already pins the direction and wins over the label
//! rule. The `outer:` header names the unbounded face as the left (`.L`) or
//! right (`.R`) side of a directed edge; the default is the left side of the
//! smallest edge label.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{DiagramError, Result};

/// Edge labels as written in diagram files.
pub type EdgeId = u32;

/// One of the four ports around a crossing, counterclockwise. Slot 0 is the
/// incoming under-edge of the crossing's unflipped state.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PortRef {
    pub crossing: usize,
    pub slot: u8,
}

/// One pass of a strand through a crossing, identified by its arrival slot.
/// The strand leaves through the opposite slot.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Passage {
    pub crossing: usize,
    pub in_slot: u8,
}

impl Passage {
    pub fn out_slot(&self) -> u8 {
        (self.in_slot + 2) % 4
    }
}

/// Which side of a directed edge names the unbounded face.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "L",
            Side::Right => "R",
        })
    }
}

/// The 4-valent plane graph underlying a diagram, with traced faces,
/// checkerboard coloring, and component orientations. Immutable; diagrams
/// over the same shadow share one instance.
#[derive(Debug)]
pub struct Shadow {
    tuples: Vec<[EdgeId; 4]>,
    xids: Vec<u32>,
    id_of: BTreeMap<u32, usize>,
    /// Both ends of every edge, in scan order.
    occ: BTreeMap<EdgeId, [PortRef; 2]>,
    /// Index into `occ[e]` of the end the strand arrives at.
    head_of: BTreeMap<EdgeId, u8>,
    comps: Vec<Vec<EdgeId>>,
    comp_of: BTreeMap<EdgeId, usize>,
    pos_of: BTreeMap<EdgeId, usize>,
    /// passages[k][i] is the crossing pass at the head of comps[k][i].
    passages: Vec<Vec<Passage>>,
    /// Per crossing: (component, passage index) of the slot-{0,2} pass.
    visit02: Vec<(usize, usize)>,
    visit13: Vec<(usize, usize)>,
    /// Arrival slot (1 or 3) of the strand crossing over in the unflipped state.
    in13: Vec<u8>,
    /// Corners per face; corner (c, k) sits between ports k and k+1.
    faces: Vec<Vec<PortRef>>,
    corner_face: Vec<[usize; 4]>,
    outer: usize,
    outer_spec: (EdgeId, Side),
    black: Vec<bool>,
    /// Checkerboard bit of the unflipped crossing; flipping complements it.
    base_bit: Vec<bool>,
    /// Crossing sign of the unflipped state; flipping negates it.
    base_sign: Vec<i8>,
    /// Set for the zero-crossing circle, which has no ports at all.
    free_loop: Option<EdgeId>,
}

impl Shadow {
    pub fn parse(text: &str) -> Result<Shadow> {
        let (tuples, xids, comps_header, outer_spec) = parse_text(text)?;
        Shadow::from_parts(tuples, xids, comps_header, outer_spec)
    }

    /// Assemble and validate a shadow from crossing tuples. `xids` must be
    /// distinct external crossing ids, one per tuple. Optional headers as in
    /// the file format.
    pub fn from_parts(
        tuples: Vec<[EdgeId; 4]>,
        xids: Vec<u32>,
        comps_header: Option<Vec<Vec<EdgeId>>>,
        outer_spec: Option<(EdgeId, Side)>,
    ) -> Result<Shadow> {
        let n = tuples.len();
        if xids.len() != n {
            return Err(DiagramError::Validation(
                "crossing id count does not match tuple count".into(),
            ));
        }
        let mut id_of = BTreeMap::new();
        for (i, &x) in xids.iter().enumerate() {
            if id_of.insert(x, i).is_some() {
                return Err(DiagramError::Validation(format!("duplicate crossing id {x}")));
            }
        }

        if n == 0 {
            return Shadow::circle(comps_header, outer_spec);
        }

        let mut occ_list: BTreeMap<EdgeId, Vec<PortRef>> = BTreeMap::new();
        for (c, t) in tuples.iter().enumerate() {
            for (s, &e) in t.iter().enumerate() {
                occ_list
                    .entry(e)
                    .or_default()
                    .push(PortRef { crossing: c, slot: s as u8 });
            }
        }
        let mut occ: BTreeMap<EdgeId, [PortRef; 2]> = BTreeMap::new();
        for (&e, ends) in &occ_list {
            if ends.len() != 2 {
                return Err(DiagramError::Validation(format!(
                    "edge {e} has {} ends, expected 2",
                    ends.len()
                )));
            }
            occ.insert(e, [ends[0], ends[1]]);
        }

        if let Some(cycles) = &comps_header {
            let mut listed = BTreeSet::new();
            for cyc in cycles {
                for &e in cyc {
                    if !listed.insert(e) {
                        return Err(DiagramError::Validation(format!(
                            "edge {e} listed twice in components header"
                        )));
                    }
                    if !occ.contains_key(&e) {
                        return Err(DiagramError::Validation(format!(
                            "components header names unknown edge {e}"
                        )));
                    }
                }
            }
            if listed.len() != occ.len() {
                let missing = occ.keys().find(|e| !listed.contains(e)).unwrap();
                return Err(DiagramError::Validation(format!(
                    "components header misses edge {missing}"
                )));
            }
        }

        // Connectivity of the 4-valent graph.
        let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
        for ends in occ.values() {
            adj[ends[0].crossing].push(ends[1].crossing);
            adj[ends[1].crossing].push(ends[0].crossing);
        }
        let mut seen_c = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen_c[0] = true;
        while let Some(c) = queue.pop_front() {
            for &d in &adj[c] {
                if !seen_c[d] {
                    seen_c[d] = true;
                    queue.push_back(d);
                }
            }
        }
        if seen_c.iter().any(|&v| !v) {
            return Err(DiagramError::Validation("shadow is disconnected".into()));
        }

        // Component cycles and orientations.
        let mut comps: Vec<Vec<EdgeId>> = vec![];
        let mut head_of: BTreeMap<EdgeId, u8> = BTreeMap::new();
        if let Some(cycles) = comps_header {
            for cyc in &cycles {
                let walk = match_header_cycle(&tuples, &occ, cyc)?;
                for &(e, h) in &walk {
                    head_of.insert(e, h);
                }
                comps.push(cyc.clone());
            }
        } else {
            let mut placed: BTreeSet<EdgeId> = BTreeSet::new();
            for &e0 in occ.keys() {
                if placed.contains(&e0) {
                    continue;
                }
                let walk = orient_traced_cycle(&tuples, &occ, e0)?;
                for &(e, h) in &walk {
                    placed.insert(e);
                    head_of.insert(e, h);
                }
                comps.push(rotate_min_first(walk.iter().map(|&(e, _)| e).collect()));
            }
        }

        // Under-in convention and the over strand's arrival slot.
        let head = |e: EdgeId| -> PortRef { occ[&e][head_of[&e] as usize] };
        let mut in13 = vec![0u8; n];
        for c in 0..n {
            if head(tuples[c][0]) != (PortRef { crossing: c, slot: 0 }) {
                return Err(DiagramError::Validation(format!(
                    "slot 0 of crossing {} is not its incoming under-edge",
                    xids[c]
                )));
            }
            let a1 = head(tuples[c][1]) == PortRef { crossing: c, slot: 1 };
            let a3 = head(tuples[c][3]) == PortRef { crossing: c, slot: 3 };
            in13[c] = match (a1, a3) {
                (true, false) => 1,
                (false, true) => 3,
                _ => {
                    return Err(DiagramError::Validation(format!(
                        "crossing {} has an inconsistent overstrand orientation",
                        xids[c]
                    )))
                }
            };
        }

        let mut comp_of = BTreeMap::new();
        let mut pos_of = BTreeMap::new();
        let mut passages: Vec<Vec<Passage>> = vec![];
        for (k, cyc) in comps.iter().enumerate() {
            let mut ps = vec![];
            for (i, &e) in cyc.iter().enumerate() {
                comp_of.insert(e, k);
                pos_of.insert(e, i);
                let h = head(e);
                ps.push(Passage { crossing: h.crossing, in_slot: h.slot });
            }
            passages.push(ps);
        }
        let mut visit02 = vec![(usize::MAX, usize::MAX); n];
        let mut visit13 = vec![(usize::MAX, usize::MAX); n];
        for (k, ps) in passages.iter().enumerate() {
            for (i, p) in ps.iter().enumerate() {
                if p.in_slot % 2 == 0 {
                    visit02[p.crossing] = (k, i);
                } else {
                    visit13[p.crossing] = (k, i);
                }
            }
        }
        if visit02.iter().chain(visit13.iter()).any(|&v| v.0 == usize::MAX) {
            return Err(DiagramError::Validation(
                "internal: some crossing is not visited by both strands".into(),
            ));
        }

        // Face tracing: from the dart arriving at (c, s), the face walk turns
        // into the corner between ports s-1 and s and leaves along the edge
        // at port s-1; each orbit is one face.
        let partner = |p: PortRef| -> PortRef {
            let ends = &occ[&tuples[p.crossing][p.slot as usize]];
            if ends[0] == p {
                ends[1]
            } else {
                ends[0]
            }
        };
        let mut corner_face = vec![[usize::MAX; 4]; n];
        let mut faces: Vec<Vec<PortRef>> = vec![];
        for c0 in 0..n {
            for s0 in 0..4u8 {
                if corner_face[c0][((s0 + 3) % 4) as usize] != usize::MAX {
                    continue;
                }
                let fidx = faces.len();
                let mut corners = vec![];
                let start = PortRef { crossing: c0, slot: s0 };
                let mut cur = start;
                loop {
                    let corner = PortRef { crossing: cur.crossing, slot: (cur.slot + 3) % 4 };
                    if corner_face[corner.crossing][corner.slot as usize] != usize::MAX {
                        return Err(DiagramError::Validation(
                            "internal: face trace revisited a corner".into(),
                        ));
                    }
                    corner_face[corner.crossing][corner.slot as usize] = fidx;
                    corners.push(corner);
                    cur = partner(corner);
                    if cur == start {
                        break;
                    }
                }
                faces.push(corners);
            }
        }
        if faces.len() != n + 2 {
            return Err(DiagramError::NonPlanar(format!(
                "face trace gives {} faces, a planar embedding needs {}",
                faces.len(),
                n + 2
            )));
        }

        // Unbounded face.
        let min_edge = *occ.keys().next().unwrap();
        let spec = outer_spec.unwrap_or((min_edge, Side::Left));
        if !occ.contains_key(&spec.0) {
            return Err(DiagramError::Validation(format!(
                "outer header names unknown edge {}",
                spec.0
            )));
        }
        let h = head(spec.0);
        let outer = match spec.1 {
            Side::Left => corner_face[h.crossing][((h.slot + 3) % 4) as usize],
            Side::Right => corner_face[h.crossing][h.slot as usize],
        };

        // Checkerboard coloring, unbounded face white.
        let mut color: Vec<Option<bool>> = vec![None; faces.len()];
        color[outer] = Some(false);
        let mut queue = VecDeque::from([outer]);
        let side_pairs: Vec<(usize, usize)> = occ
            .keys()
            .map(|&e| {
                let h = head(e);
                let lf = corner_face[h.crossing][((h.slot + 3) % 4) as usize];
                let rf = corner_face[h.crossing][h.slot as usize];
                (lf, rf)
            })
            .collect();
        let mut face_adj: Vec<Vec<usize>> = vec![vec![]; faces.len()];
        for &(a, b) in &side_pairs {
            face_adj[a].push(b);
            face_adj[b].push(a);
        }
        while let Some(f) = queue.pop_front() {
            let next = !color[f].unwrap();
            for &g in &face_adj[f] {
                match color[g] {
                    None => {
                        color[g] = Some(next);
                        queue.push_back(g);
                    }
                    Some(v) if v != next => {
                        return Err(DiagramError::Validation(
                            "internal: faces are not checkerboard colorable".into(),
                        ));
                    }
                    _ => {}
                }
            }
        }
        if color.iter().any(|c| c.is_none()) {
            return Err(DiagramError::Validation(
                "internal: face coloring did not reach every face".into(),
            ));
        }
        let black: Vec<bool> = color.into_iter().map(|c| c.unwrap()).collect();

        // Checkerboard bit: rotating the overstrand counterclockwise onto the
        // understrand sweeps the corners at the over ports; the bit is 0 when
        // that region is black. Unflipped over ports are 1 and 3.
        let base_bit: Vec<bool> = (0..n).map(|c| !black[corner_face[c][1]]).collect();
        let base_sign: Vec<i8> = (0..n).map(|c| if in13[c] == 3 { 1 } else { -1 }).collect();

        Ok(Shadow {
            tuples,
            xids,
            id_of,
            occ,
            head_of,
            comps,
            comp_of,
            pos_of,
            passages,
            visit02,
            visit13,
            in13,
            faces,
            corner_face,
            outer,
            outer_spec: spec,
            black,
            base_bit,
            base_sign,
            free_loop: None,
        })
    }

    fn circle(
        comps_header: Option<Vec<Vec<EdgeId>>>,
        outer_spec: Option<(EdgeId, Side)>,
    ) -> Result<Shadow> {
        let Some(cycles) = comps_header else {
            return Err(DiagramError::Validation(
                "a diagram needs crossings or a components header".into(),
            ));
        };
        if cycles.len() != 1 || cycles[0].len() != 1 {
            return Err(DiagramError::Validation(
                "without crossings only a single one-edge circle is supported".into(),
            ));
        }
        let e = cycles[0][0];
        let spec = outer_spec.unwrap_or((e, Side::Left));
        if spec.0 != e {
            return Err(DiagramError::Validation(format!(
                "outer header names unknown edge {}",
                spec.0
            )));
        }
        let outer = match spec.1 {
            Side::Left => 0,
            Side::Right => 1,
        };
        Ok(Shadow {
            tuples: vec![],
            xids: vec![],
            id_of: BTreeMap::new(),
            occ: BTreeMap::new(),
            head_of: BTreeMap::new(),
            comps: vec![vec![e]],
            comp_of: BTreeMap::from([(e, 0)]),
            pos_of: BTreeMap::from([(e, 0)]),
            passages: vec![vec![]],
            visit02: vec![],
            visit13: vec![],
            in13: vec![],
            faces: vec![vec![], vec![]],
            corner_face: vec![],
            outer,
            outer_spec: spec,
            black: vec![outer == 1, outer == 0],
            base_bit: vec![],
            base_sign: vec![],
            free_loop: Some(e),
        })
    }

    pub fn crossing_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn edge_count(&self) -> usize {
        if self.free_loop.is_some() {
            1
        } else {
            self.occ.len()
        }
    }

    pub fn tuple(&self, c: usize) -> [EdgeId; 4] {
        self.tuples[c]
    }

    pub fn external_id(&self, c: usize) -> u32 {
        self.xids[c]
    }

    pub fn crossing_index(&self, external: u32) -> Option<usize> {
        self.id_of.get(&external).copied()
    }

    pub fn component_count(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Vec<EdgeId>] {
        &self.comps
    }

    pub fn comp_edges(&self, k: usize) -> &[EdgeId] {
        &self.comps[k]
    }

    pub fn comp_of(&self, e: EdgeId) -> Option<usize> {
        self.comp_of.get(&e).copied()
    }

    pub fn pos_of(&self, e: EdgeId) -> Option<usize> {
        self.pos_of.get(&e).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.comps.iter().flatten().copied()
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.occ.contains_key(&e) || self.free_loop == Some(e)
    }

    /// Both ends of an edge; `None` for the zero-crossing circle's loop.
    pub fn ends(&self, e: EdgeId) -> Option<[PortRef; 2]> {
        self.occ.get(&e).copied()
    }

    /// The end the strand arrives at.
    pub fn head(&self, e: EdgeId) -> Option<PortRef> {
        let h = *self.head_of.get(&e)?;
        Some(self.occ[&e][h as usize])
    }

    /// The end the strand departs from.
    pub fn tail(&self, e: EdgeId) -> Option<PortRef> {
        let h = *self.head_of.get(&e)?;
        Some(self.occ[&e][1 - h as usize])
    }

    pub fn passages(&self, k: usize) -> &[Passage] {
        &self.passages[k]
    }

    /// (component, passage index) of the pass through slots {0,2} of crossing `c`.
    pub fn visit_under_base(&self, c: usize) -> (usize, usize) {
        self.visit02[c]
    }

    /// (component, passage index) of the pass through slots {1,3} of crossing `c`.
    pub fn visit_over_base(&self, c: usize) -> (usize, usize) {
        self.visit13[c]
    }

    pub fn in13(&self, c: usize) -> u8 {
        self.in13[c]
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_corners(&self, f: usize) -> &[PortRef] {
        &self.faces[f]
    }

    pub fn corner_face(&self, c: usize, k: u8) -> usize {
        self.corner_face[c][k as usize]
    }

    pub fn outer_face(&self) -> usize {
        self.outer
    }

    pub fn outer_spec(&self) -> (EdgeId, Side) {
        self.outer_spec
    }

    pub fn is_black(&self, f: usize) -> bool {
        self.black[f]
    }

    pub fn base_bit(&self, c: usize) -> bool {
        self.base_bit[c]
    }

    pub fn base_sign(&self, c: usize) -> i8 {
        self.base_sign[c]
    }

    pub fn is_free_loop(&self) -> bool {
        self.free_loop.is_some()
    }

    /// Components of the two strands meeting at crossing `c`:
    /// (strand through slots {0,2}, strand through slots {1,3}).
    pub fn strand_comps(&self, c: usize) -> (usize, usize) {
        (self.visit02[c].0, self.visit13[c].0)
    }
}

/// Walk the strand starting at edge `e0` with arrival end `h0`, returning
/// (edge, arrival end index) around the full cycle.
fn walk_cycle(
    tuples: &[[EdgeId; 4]],
    occ: &BTreeMap<EdgeId, [PortRef; 2]>,
    e0: EdgeId,
    h0: u8,
) -> Result<Vec<(EdgeId, u8)>> {
    let mut out = vec![];
    let (mut e, mut h) = (e0, h0);
    let budget = 4 * occ.len() + 4;
    loop {
        out.push((e, h));
        if out.len() > budget {
            return Err(DiagramError::Validation(
                "internal: strand walk did not close".into(),
            ));
        }
        let hp = occ[&e][h as usize];
        let dep = PortRef { crossing: hp.crossing, slot: (hp.slot + 2) % 4 };
        let f = tuples[dep.crossing][dep.slot as usize];
        let ends = &occ[&f];
        let fh = if ends[0] == dep {
            1u8
        } else if ends[1] == dep {
            0u8
        } else {
            return Err(DiagramError::Validation(
                "internal: edge occurrence table is inconsistent".into(),
            ));
        };
        e = f;
        h = fh;
        if e == e0 && h == h0 {
            return Ok(out);
        }
    }
}

fn pins_ok(occ: &BTreeMap<EdgeId, [PortRef; 2]>, walk: &[(EdgeId, u8)]) -> bool {
    walk.iter().all(|&(e, h)| {
        let s = occ[&e][h as usize].slot;
        s % 2 != 0 || s == 0
    })
}

/// Trace the cycle through `e0` and pick its direction: under-passages force
/// it (arrival must use slot 0); a fully-over component falls back to the
/// ascending-label rule.
fn orient_traced_cycle(
    tuples: &[[EdgeId; 4]],
    occ: &BTreeMap<EdgeId, [PortRef; 2]>,
    e0: EdgeId,
) -> Result<Vec<(EdgeId, u8)>> {
    let fwd = walk_cycle(tuples, occ, e0, 0)?;
    let rev: Vec<(EdgeId, u8)> = fwd.iter().rev().map(|&(e, h)| (e, 1 - h)).collect();
    let mut has0 = false;
    let mut has2 = false;
    for &(e, h) in &fwd {
        match occ[&e][h as usize].slot {
            0 => has0 = true,
            2 => has2 = true,
            _ => {}
        }
    }
    match (has0, has2) {
        (true, true) => Err(DiagramError::Validation(format!(
            "component through edge {e0} has inconsistently oriented under-passages"
        ))),
        (true, false) => Ok(fwd),
        (false, true) => Ok(rev),
        (false, false) => {
            let descents = |w: &[(EdgeId, u8)]| -> usize {
                (0..w.len())
                    .filter(|&i| w[(i + 1) % w.len()].0 < w[i].0)
                    .count()
            };
            let (df, dr) = (descents(&fwd), descents(&rev));
            if df < dr {
                Ok(fwd)
            } else if dr < df {
                Ok(rev)
            } else {
                let key = |w: &[(EdgeId, u8)]| -> Vec<EdgeId> {
                    rotate_min_first(w.iter().map(|&(e, _)| e).collect())
                };
                if key(&fwd) <= key(&rev) {
                    Ok(fwd)
                } else {
                    Ok(rev)
                }
            }
        }
    }
}

/// Check that a components-header cycle is a strand traversal respecting the
/// under-in convention, and return its arrival-end assignment.
fn match_header_cycle(
    tuples: &[[EdgeId; 4]],
    occ: &BTreeMap<EdgeId, [PortRef; 2]>,
    cyc: &[EdgeId],
) -> Result<Vec<(EdgeId, u8)>> {
    let e0 = cyc[0];
    let mut matched_edges = false;
    for h0 in 0..2u8 {
        let walk = walk_cycle(tuples, occ, e0, h0)?;
        if walk.len() == cyc.len() && walk.iter().zip(cyc).all(|(&(e, _), &f)| e == f) {
            matched_edges = true;
            if pins_ok(occ, &walk) {
                return Ok(walk);
            }
        }
    }
    if matched_edges {
        Err(DiagramError::Validation(format!(
            "components header cycle at edge {e0} puts an outgoing edge in an under-in slot"
        )))
    } else {
        Err(DiagramError::Validation(format!(
            "components header cycle at edge {e0} does not follow the strands"
        )))
    }
}

fn rotate_min_first(mut cyc: Vec<EdgeId>) -> Vec<EdgeId> {
    let min_pos = cyc
        .iter()
        .enumerate()
        .min_by_key(|&(_, e)| *e)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cyc.rotate_left(min_pos);
    cyc
}

type ParsedText = (Vec<[EdgeId; 4]>, Vec<u32>, Option<Vec<Vec<EdgeId>>>, Option<(EdgeId, Side)>);

fn parse_err(line: usize, msg: impl Into<String>) -> DiagramError {
    DiagramError::Parse { line, msg: msg.into() }
}

fn parse_text(text: &str) -> Result<ParsedText> {
    let mut tuples: Vec<[EdgeId; 4]> = vec![];
    let mut xids: Vec<u32> = vec![];
    let mut comps_header = None;
    let mut outer_spec = None;
    let mut saw_long = false;
    let mut saw_compact = false;
    for (i, raw) in text.lines().enumerate() {
        let lno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("components:") {
            if comps_header.is_some() {
                return Err(parse_err(lno, "duplicate components header"));
            }
            comps_header = Some(parse_cycles(rest, lno)?);
        } else if let Some(rest) = line.strip_prefix("outer:") {
            if outer_spec.is_some() {
                return Err(parse_err(lno, "duplicate outer header"));
            }
            outer_spec = Some(parse_outer(rest, lno)?);
        } else if line.starts_with("X(") {
            saw_compact = true;
            for group in parse_compact(line, lno)? {
                xids.push(tuples.len() as u32 + 1);
                tuples.push(group);
            }
        } else if line.starts_with('X') {
            saw_long = true;
            let nums = parse_numbers(&line[1..], lno)?;
            if nums.len() != 5 {
                return Err(parse_err(lno, "expected `X <id> <a> <b> <c> <d>`"));
            }
            xids.push(nums[0]);
            tuples.push([nums[1], nums[2], nums[3], nums[4]]);
        } else {
            return Err(parse_err(lno, format!("unrecognized line `{line}`")));
        }
    }
    if saw_long && saw_compact {
        return Err(parse_err(
            0,
            "cannot mix `X <id> ...` lines with the compact X(...) form",
        ));
    }
    Ok((tuples, xids, comps_header, outer_spec))
}

fn parse_numbers(s: &str, lno: usize) -> Result<Vec<u32>> {
    s.split([' ', '\t', ','])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| parse_err(lno, format!("`{t}` is not a nonnegative integer")))
        })
        .collect()
}

fn parse_cycles(rest: &str, lno: usize) -> Result<Vec<Vec<EdgeId>>> {
    let mut cycles = vec![];
    let mut remainder = rest.trim();
    while !remainder.is_empty() {
        let Some(open) = remainder.strip_prefix('(') else {
            return Err(parse_err(lno, "components header expects `(e1 e2 ...)` groups"));
        };
        let Some(close) = open.find(')') else {
            return Err(parse_err(lno, "unclosed `(` in components header"));
        };
        let cycle = parse_numbers(&open[..close], lno)?;
        if cycle.is_empty() {
            return Err(parse_err(lno, "empty component cycle"));
        }
        cycles.push(cycle);
        remainder = open[close + 1..].trim();
    }
    if cycles.is_empty() {
        return Err(parse_err(lno, "components header lists no cycles"));
    }
    Ok(cycles)
}

fn parse_outer(rest: &str, lno: usize) -> Result<(EdgeId, Side)> {
    let t = rest.trim();
    let Some(body) = t.strip_prefix('e') else {
        return Err(parse_err(lno, "outer header expects `e<edge>.L` or `e<edge>.R`"));
    };
    let Some((num, side)) = body.split_once('.') else {
        return Err(parse_err(lno, "outer header expects `e<edge>.L` or `e<edge>.R`"));
    };
    let e = num
        .parse::<u32>()
        .map_err(|_| parse_err(lno, format!("`{num}` is not an edge label")))?;
    let side = match side {
        "L" => Side::Left,
        "R" => Side::Right,
        _ => return Err(parse_err(lno, "outer side must be L or R")),
    };
    Ok((e, side))
}

fn parse_compact(line: &str, lno: usize) -> Result<Vec<[EdgeId; 4]>> {
    let compact: String = line.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = vec![];
    for piece in compact.split("X(") {
        if piece.is_empty() {
            continue;
        }
        let Some(close) = piece.find(')') else {
            return Err(parse_err(lno, "unclosed `X(` group"));
        };
        let tail = &piece[close + 1..];
        if !tail.is_empty() && tail != "," {
            return Err(parse_err(lno, format!("unexpected `{tail}` after X(...) group")));
        }
        let nums = parse_numbers(&piece[..close], lno)?;
        if nums.len() != 4 {
            return Err(parse_err(lno, "X(...) group needs exactly 4 edge labels"));
        }
        out.push([nums[0], nums[1], nums[2], nums[3]]);
    }
    if out.is_empty() {
        return Err(parse_err(lno, "no crossings in compact line"));
    }
    Ok(out)
}

/// A link diagram: a shared shadow plus the per-crossing choice of which
/// strand passes over. `flipped[c] = false` keeps the parsed state, where the
/// slot-{0,2} strand goes under.
#[derive(Clone, Debug)]
pub struct LinkDiagram {
    shadow: Arc<Shadow>,
    flipped: Vec<bool>,
}

impl LinkDiagram {
    pub fn parse(text: &str) -> Result<LinkDiagram> {
        Ok(LinkDiagram::base(Arc::new(Shadow::parse(text)?)))
    }

    /// The diagram in the shadow's as-parsed state.
    pub fn base(shadow: Arc<Shadow>) -> LinkDiagram {
        let n = shadow.crossing_count();
        LinkDiagram { shadow, flipped: vec![false; n] }
    }

    pub fn with_flips(shadow: Arc<Shadow>, flipped: Vec<bool>) -> LinkDiagram {
        assert_eq!(shadow.crossing_count(), flipped.len());
        LinkDiagram { shadow, flipped }
    }

    pub fn shadow(&self) -> &Shadow {
        &self.shadow
    }

    pub fn shadow_arc(&self) -> Arc<Shadow> {
        Arc::clone(&self.shadow)
    }

    pub fn crossing_count(&self) -> usize {
        self.shadow.crossing_count()
    }

    pub fn component_count(&self) -> usize {
        self.shadow.component_count()
    }

    pub fn is_flipped(&self, c: usize) -> bool {
        self.flipped[c]
    }

    pub fn flips(&self) -> &[bool] {
        &self.flipped
    }

    /// Arrival slot of the understrand at crossing `c` in the current state.
    pub fn under_in_slot(&self, c: usize) -> u8 {
        if self.flipped[c] {
            self.shadow.in13(c)
        } else {
            0
        }
    }

    pub fn over_in_slot(&self, c: usize) -> u8 {
        if self.flipped[c] {
            0
        } else {
            self.shadow.in13(c)
        }
    }

    /// Does this passage go under in the current state?
    pub fn passage_under(&self, p: Passage) -> bool {
        (p.in_slot % 2 == 0) != self.flipped[p.crossing]
    }

    /// Does the strand through port `p` go under at `p.crossing` in the
    /// current state? Ports 0 and 2 sit on one strand, 1 and 3 on the other.
    pub fn port_under(&self, p: PortRef) -> bool {
        (p.slot % 2 == 0) != self.flipped[p.crossing]
    }

    pub fn sign(&self, c: usize) -> i8 {
        let s = self.shadow.base_sign(c);
        if self.flipped[c] {
            -s
        } else {
            s
        }
    }

    /// Checkerboard bit of crossing `c` in the current state.
    pub fn bit(&self, c: usize) -> bool {
        self.shadow.base_bit(c) ^ self.flipped[c]
    }

    pub fn is_alternating(&self) -> bool {
        (0..self.component_count()).all(|k| {
            let ps = self.shadow.passages(k);
            ps.iter().enumerate().all(|(i, &p)| {
                let q = ps[(i + 1) % ps.len()];
                self.passage_under(p) != self.passage_under(q)
            })
        })
    }

    pub fn toggled(&self, crossings: &[usize]) -> LinkDiagram {
        let mut out = self.clone();
        for &c in crossings {
            out.flipped[c] = !out.flipped[c];
        }
        out
    }

    pub(crate) fn toggle_mut(&mut self, c: usize) {
        self.flipped[c] = !self.flipped[c];
    }

    /// Flip every crossing.
    pub fn mirror(&self) -> LinkDiagram {
        let flipped = self.flipped.iter().map(|&b| !b).collect();
        LinkDiagram { shadow: Arc::clone(&self.shadow), flipped }
    }

    /// Canonical text form; flipped crossings are written with their tuple
    /// rotated so slot 0 is again the incoming under-edge.
    pub fn serialize(&self) -> String {
        let sh = &self.shadow;
        let mut out = String::from("components:");
        for cyc in sh.comps() {
            out.push_str(" (");
            for (i, e) in cyc.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&e.to_string());
            }
            out.push(')');
        }
        out.push('\n');
        let (e, side) = sh.outer_spec();
        out.push_str(&format!("outer: e{e}.{side}\n"));
        for c in 0..sh.crossing_count() {
            let r = if self.flipped[c] { sh.in13(c) } else { 0 } as usize;
            let t = sh.tuple(c);
            out.push_str(&format!(
                "X {} {} {} {} {}\n",
                sh.external_id(c),
                t[r],
                t[(r + 1) % 4],
                t[(r + 2) % 4],
                t[(r + 3) % 4]
            ));
        }
        out
    }

    /// Digest of the canonical text form.
    pub fn hash64(&self) -> u64 {
        let digest = Sha256::digest(self.serialize().as_bytes());
        u64::from_be_bytes(digest[..8].try_into().unwrap())
    }
}

impl fmt::Display for LinkDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl PartialEq for LinkDiagram {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.shadow, &other.shadow) {
            self.flipped == other.flipped
        } else {
            self.serialize() == other.serialize()
        }
    }
}

impl Eq for LinkDiagram {}
