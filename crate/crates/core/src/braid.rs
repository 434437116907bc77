//! Diagrams from braid words, named fixtures, and seeded random links.
//!
//! A word is a list of nonzero letters; letter `i` puts a crossing between
//! strand positions i and i+1 (1-based), positive when the strand arriving
//! from position i+1 passes over, negative when the one from position i
//! does. The closure joins each bottom position back to the matching top
//! position. Edges are renumbered 1..2n along the flow of each component and
//! a `components:` header pins the orientations.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::diagram::{EdgeId, LinkDiagram, Shadow};
use crate::error::{DiagramError, Result};

pub const TREFOIL: &str = "X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)";
pub const FIG8: &str = "X(4,2,5,1),X(8,6,1,5),X(6,3,7,4),X(2,7,3,8)";
pub const HOPF: &str = "components: (1 2) (3 4)\nX 0 1 4 2 3\nX 1 4 1 3 2\n";
pub const CIRCLE: &str = "components: (1)\n";
/// Three circles in a row: the middle one clasps each neighbor twice.
pub const CHAIN: &str = "components: (1 2) (5 6 7 8) (3 4)\n\
    X 1 1 6 2 5\nX 2 6 1 7 2\nX 3 7 4 8 3\nX 4 4 5 3 8\n";

pub fn braid_closure(strands: usize, word: &[i32]) -> Result<LinkDiagram> {
    if strands == 0 {
        return Err(DiagramError::Validation("a braid needs at least one strand".into()));
    }
    if strands == 1 && word.is_empty() {
        return LinkDiagram::parse(CIRCLE);
    }
    let m = word.len();
    let mut cur: Vec<usize> = (0..strands).collect();
    let mut tuples_p: Vec<[usize; 4]> = Vec::with_capacity(m);
    let mut head: Vec<Option<(usize, u8)>> = vec![None; strands + 2 * m];
    let mut tail: Vec<Option<(usize, u8)>> = vec![None; strands + 2 * m];
    for (t, &w) in word.iter().enumerate() {
        let i = w.unsigned_abs() as usize;
        if i == 0 || i >= strands {
            return Err(DiagramError::Validation(format!(
                "letter {w} is out of range for {strands} strands"
            )));
        }
        let idx = i - 1;
        let (a, b) = (cur[idx], cur[idx + 1]);
        let c = strands + 2 * t;
        let d = c + 1;
        // Ports counterclockwise from the incoming under-edge. The strand
        // from position i arrives northwest, the one from i+1 northeast;
        // exits are southwest (back to position i) and southeast.
        let tup = if w > 0 {
            head[a] = Some((t, 0));
            head[b] = Some((t, 3));
            tail[c] = Some((t, 1));
            tail[d] = Some((t, 2));
            [a, c, d, b]
        } else {
            head[b] = Some((t, 0));
            head[a] = Some((t, 1));
            tail[c] = Some((t, 2));
            tail[d] = Some((t, 3));
            [b, a, c, d]
        };
        tuples_p.push(tup);
        cur[idx] = c;
        cur[idx + 1] = d;
    }

    // Closure: the top edge of each position and the bottom edge flowing
    // there are the same edge of the closed diagram.
    let mut parent: Vec<usize> = (0..strands + 2 * m).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for p in 0..strands {
        if cur[p] == p {
            return Err(DiagramError::Validation(format!(
                "strand {} is never crossed",
                p + 1
            )));
        }
        let r = find(&mut parent, cur[p]);
        parent[r] = find(&mut parent, p);
        let h = head[p];
        let root = find(&mut parent, p);
        head[root] = h;
        let tl = tail[cur[p]];
        tail[root] = tl;
    }
    let rep_tuples: Vec<[usize; 4]> = tuples_p
        .iter()
        .map(|t| {
            let mut out = [0; 4];
            for (s, &e) in t.iter().enumerate() {
                out[s] = find(&mut parent, e);
            }
            out
        })
        .collect();

    // Components in flow order, discovered from the top row left to right,
    // with final edge labels handed out along the way.
    let mut label: BTreeMap<usize, EdgeId> = BTreeMap::new();
    let mut comps: Vec<Vec<EdgeId>> = vec![];
    let mut next_label: EdgeId = 1;
    for p in 0..strands {
        let e0 = find(&mut parent, p);
        if label.contains_key(&e0) {
            continue;
        }
        let mut cycle = vec![];
        let mut e = e0;
        loop {
            label.insert(e, next_label);
            cycle.push(next_label);
            next_label += 1;
            let (t, s) = head[e].expect("every closed edge has an arrival");
            e = rep_tuples[t][((s + 2) % 4) as usize];
            if e == e0 {
                break;
            }
        }
        comps.push(cycle);
    }
    let tuples: Vec<[EdgeId; 4]> = rep_tuples
        .iter()
        .map(|t| [label[&t[0]], label[&t[1]], label[&t[2]], label[&t[3]]])
        .collect();
    let xids: Vec<u32> = (1..=m as u32).collect();
    let shadow = Shadow::from_parts(tuples, xids, Some(comps), None)?;
    Ok(LinkDiagram::base(Arc::new(shadow)))
}

/// One positive kink: the 1-crossing unknot diagram.
pub fn kink() -> LinkDiagram {
    braid_closure(2, &[1]).expect("fixture")
}

/// Two circles crossing twice with opposite signs: one sits fully on top.
pub fn split_clasp() -> LinkDiagram {
    braid_closure(2, &[1, -1]).expect("fixture")
}

/// Closure of a 2-strand positive word of length `m`.
pub fn torus2(m: usize) -> LinkDiagram {
    braid_closure(2, &vec![1; m]).expect("fixture")
}

/// A trefoil-style knot and a figure-8-style knot clasped together.
pub fn link_31_41() -> LinkDiagram {
    braid_closure(5, &[1, 1, 1, 2, 2, 3, -4, 3, -4]).expect("fixture")
}

/// A clasped pair plus a third component carrying one self-crossing.
pub fn fig9_style() -> LinkDiagram {
    braid_closure(4, &[1, 1, 2, 2, 3]).expect("fixture")
}

/// Pretzel diagram: vertical twist boxes side by side, each box `b` a stack
/// of `|boxes[b]|` crossings. Neighboring boxes are joined top-to-top and
/// bottom-to-bottom, with two long arcs closing the first box against the
/// last. In a positive box the strand running northeast to southwest passes
/// under; in a negative box the northwest-to-southeast strand does.
pub fn pretzel(boxes: &[i32]) -> Result<LinkDiagram> {
    if boxes.is_empty() || boxes.contains(&0) {
        return Err(DiagramError::Validation(
            "every pretzel box needs at least one crossing".into(),
        ));
    }
    let k = boxes.len();
    let counts: Vec<usize> = boxes.iter().map(|p| p.unsigned_abs() as usize).collect();
    let mut offset = vec![0usize; k];
    for b in 1..k {
        offset[b] = offset[b - 1] + counts[b - 1];
    }
    let n: usize = counts.iter().sum();

    // Ports are 4c+s with s counterclockwise: 0 NW, 1 SW, 2 SE, 3 NE.
    const NW: usize = 0;
    const SW: usize = 1;
    const SE: usize = 2;
    const NE: usize = 3;
    let port = |b: usize, j: usize, s: usize| 4 * (offset[b] + j) + s;
    let mut glue = vec![usize::MAX; 4 * n];
    let mut join = |p: usize, q: usize| {
        glue[p] = q;
        glue[q] = p;
    };
    for b in 0..k {
        for j in 0..counts[b] - 1 {
            join(port(b, j, SW), port(b, j + 1, NW));
            join(port(b, j, SE), port(b, j + 1, NE));
        }
    }
    for b in 0..k - 1 {
        join(port(b, 0, NE), port(b + 1, 0, NW));
        join(port(b, counts[b] - 1, SE), port(b + 1, counts[b + 1] - 1, SW));
    }
    join(port(0, 0, NW), port(k - 1, 0, NE));
    join(port(0, counts[0] - 1, SW), port(k - 1, counts[k - 1] - 1, SE));
    debug_assert!((0..4 * n).all(|p| glue[p] != usize::MAX && glue[glue[p]] == p));

    // Walk the curve, directing each component and labeling edges along the
    // flow. A strand arriving at slot s leaves through the opposite slot.
    let mut arrive: Vec<Option<EdgeId>> = vec![None; 4 * n];
    let mut depart: Vec<Option<EdgeId>> = vec![None; 4 * n];
    let mut comps: Vec<Vec<EdgeId>> = vec![];
    let mut next_label: EdgeId = 1;
    for start in 0..4 * n {
        if arrive[start].is_some() || depart[start].is_some() {
            continue;
        }
        let mut cycle = vec![];
        let mut out = start;
        loop {
            let e = next_label;
            next_label += 1;
            cycle.push(e);
            depart[out] = Some(e);
            let inp = glue[out];
            arrive[inp] = Some(e);
            out = 4 * (inp / 4) + (inp % 4 + 2) % 4;
            if out == start {
                break;
            }
        }
        comps.push(cycle);
    }

    // Rotate each crossing so its under strand's arrival sits first.
    let tuples: Vec<[EdgeId; 4]> = (0..n)
        .map(|c| {
            let b = (0..k).rfind(|&b| offset[b] <= c).expect("boxes cover crossings");
            let under = if boxes[b] > 0 { [SW, NE] } else { [NW, SE] };
            let s0 = *under
                .iter()
                .find(|&&s| arrive[4 * c + s].is_some())
                .expect("one under port is an arrival");
            let at = |s: usize| {
                let p = 4 * c + (s % 4);
                arrive[p].or(depart[p]).expect("every port carries an edge")
            };
            [at(s0), at(s0 + 1), at(s0 + 2), at(s0 + 3)]
        })
        .collect();
    let xids: Vec<u32> = (1..=n as u32).collect();
    let shadow = Shadow::from_parts(tuples, xids, Some(comps), None)?;
    Ok(LinkDiagram::base(Arc::new(shadow)))
}

/// The table diagram of the 8_19 knot: two triple twists closed against a
/// clasp of the opposite sign.
pub fn knot_8_19() -> LinkDiagram {
    pretzel(&[3, 3, -2]).expect("fixture")
}

pub fn knot_8_20() -> LinkDiagram {
    braid_closure(3, &[1, 1, 1, -2, -1, -1, -1, -2]).expect("fixture")
}

/// Random connected braid closures until `accept` passes: 2..=4 strands,
/// 2..=10 letters, so at most 10 crossings.
pub fn random_braid_link<R: Rng>(
    rng: &mut R,
    max_attempts: usize,
    accept: impl Fn(&LinkDiagram) -> bool,
) -> Result<LinkDiagram> {
    for _ in 0..max_attempts {
        let strands = rng.random_range(2..=4usize);
        let len = rng.random_range(2..=10usize);
        let word: Vec<i32> = (0..len)
            .map(|_| {
                let i = rng.random_range(1..strands) as i32;
                if rng.random_bool(0.5) {
                    i
                } else {
                    -i
                }
            })
            .collect();
        let Ok(d) = braid_closure(strands, &word) else { continue };
        if accept(&d) {
            return Ok(d);
        }
    }
    Err(DiagramError::LimitExceeded(
        "no random braid closure satisfied the constraints".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{linking_data, over_under_sets, self_crossings};
    use crate::moves::enumerate_arcs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kink_is_one_crossing_unknot() {
        let d = kink();
        assert_eq!(d.crossing_count(), 1);
        assert_eq!(d.component_count(), 1);
        assert_eq!(d.serialize(), "components: (1 2)\nouter: e1.L\nX 1 1 1 2 2\n");
    }

    #[test]
    fn split_clasp_shape() {
        let d = split_clasp();
        assert_eq!(d.crossing_count(), 2);
        assert_eq!(d.component_count(), 2);
        assert_eq!(linking_data(&d).lk[0][1], 0);
        let (o0, u0) = over_under_sets(&d, 0).unwrap();
        let (o1, u1) = over_under_sets(&d, 1).unwrap();
        let under_comp = if o0.is_empty() { 0 } else { 1 };
        let (o_under, u_under) = if under_comp == 0 { (o0, u0) } else { (o1, u1) };
        assert!(o_under.is_empty());
        assert_eq!(u_under.len(), 2);
        let closed = enumerate_arcs(&d).into_iter().filter(|a| a.is_closed()).count();
        assert_eq!(closed, 1);
    }

    #[test]
    fn torus_links() {
        let d = torus2(4);
        assert_eq!(d.crossing_count(), 4);
        assert_eq!(d.component_count(), 2);
        assert!(self_crossings(&d, 0).is_empty() && self_crossings(&d, 1).is_empty());
        assert_eq!(linking_data(&d).lk[0][1].abs(), 2);
        let t = torus2(3);
        assert_eq!(t.component_count(), 1);
        assert!(t.is_alternating());
    }

    #[test]
    fn two_linked_knots() {
        let d = link_31_41();
        assert_eq!(d.crossing_count(), 9);
        assert_eq!(d.component_count(), 2);
        let mut selfs: Vec<usize> =
            (0..2).map(|k| self_crossings(&d, k).len()).collect();
        selfs.sort();
        assert_eq!(selfs, vec![3, 4]);
    }

    #[test]
    fn clasped_pair_with_kinked_third() {
        let d = fig9_style();
        assert_eq!(d.crossing_count(), 5);
        assert_eq!(d.component_count(), 3);
        let selfs: usize = (0..3).map(|k| self_crossings(&d, k).len()).sum();
        assert_eq!(selfs, 1);
    }

    #[test]
    fn eight_crossing_knots() {
        for d in [knot_8_19(), knot_8_20()] {
            assert_eq!(d.crossing_count(), 8);
            assert_eq!(d.component_count(), 1);
            assert!(!d.is_alternating());
        }
    }

    #[test]
    fn bad_words_rejected() {
        assert!(braid_closure(2, &[]).is_err());
        assert!(braid_closure(3, &[1]).is_err());
        assert!(braid_closure(2, &[3]).is_err());
        assert!(braid_closure(4, &[1, 1, 3, 3]).is_err());
    }

    #[test]
    fn pretzel_shapes() {
        let d = pretzel(&[1]).unwrap();
        assert_eq!(d.crossing_count(), 1);
        assert_eq!(d.component_count(), 1);

        let t = pretzel(&[3]).unwrap();
        assert_eq!(t.crossing_count(), 3);
        assert_eq!(t.component_count(), 1);
        assert!(t.is_alternating());

        // A single box closes top-to-top and bottom-to-bottom, so one even
        // box is a clasped unknot, not a two-component link.
        let clasp = pretzel(&[2]).unwrap();
        assert_eq!(clasp.crossing_count(), 2);
        assert_eq!(clasp.component_count(), 1);

        let chain = pretzel(&[2, 2, 2]).unwrap();
        assert_eq!(chain.crossing_count(), 6);
        assert_eq!(chain.component_count(), 3);

        let p = pretzel(&[3, 3, -2]).unwrap();
        assert_eq!(p.crossing_count(), 8);
        assert_eq!(p.component_count(), 1);
        assert!(!p.is_alternating());

        assert!(pretzel(&[]).is_err());
        assert!(pretzel(&[2, 0, 3]).is_err());
    }

    #[test]
    fn random_links_are_deterministic() {
        let gen = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_braid_link(&mut rng, 10_000, |d| d.component_count() >= 2).unwrap()
        };
        assert_eq!(gen(7).serialize(), gen(7).serialize());
        assert!(gen(7).component_count() >= 2);
    }
}
