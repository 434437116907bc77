//! Reachability over all over/under assignments of a fixed shadow.
//!
//! Vertices are the 2^n bit labels of the shadow's crossings; each open arc
//! of a state's diagram contributes one out-edge switching the crossings at
//! the arc's two ends. When the ends coincide the double switch cancels and
//! the edge loops back to its own state. Every edge therefore flips two bits
//! or none, so label weight mod 2 is conserved and the graph always falls
//! apart into at least two weakly connected pieces.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::diagram::{LinkDiagram, Shadow};
use crate::error::{DiagramError, Result};
use crate::labeling::{diagram_from_label, BinaryLabel};
use crate::moves::{enumerate_arcs, AccMove, DiagMove, MoveLog, MoveVariant};

/// Largest crossing count the exhaustive label-space walks accept by default.
pub const DEFAULT_LIMIT: usize = 20;

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit.min(31) {
        return Err(DiagramError::LimitExceeded(format!(
            "{n} crossings exceed the enumeration limit {}",
            limit.min(31)
        )));
    }
    Ok(())
}

/// The diagram over `shadow` whose label is `mask`.
pub fn state_diagram(shadow: &Arc<Shadow>, mask: u32) -> LinkDiagram {
    let label = BinaryLabel::from_mask(mask, shadow.crossing_count());
    diagram_from_label(Arc::clone(shadow), &label).expect("mask length matches the shadow")
}

/// Out-edges of the state `mask`: one `(target, move)` per open arc.
pub fn state_edges(shadow: &Arc<Shadow>, mask: u32) -> Vec<(u32, AccMove)> {
    let d = state_diagram(shadow, mask);
    enumerate_arcs(&d)
        .iter()
        .filter(|a| !a.is_closed())
        .map(|arc| {
            let (x, y) = arc.endpoints(&d).expect("open arc");
            if x == y {
                let mv = AccMove::for_arc(&d, arc, MoveVariant::AccII).expect("open arc");
                (mask, mv)
            } else {
                let mv = AccMove::for_arc(&d, arc, MoveVariant::AccI).expect("open arc");
                (mask ^ (1 << x) ^ (1 << y), mv)
            }
        })
        .collect()
}

/// The full move graph over every labeling of one shadow.
pub struct StateGraph {
    shadow: Arc<Shadow>,
    out: Vec<Vec<(u32, AccMove)>>,
}

pub fn build_state_graph(shadow: Arc<Shadow>, limit: usize) -> Result<StateGraph> {
    let n = shadow.crossing_count();
    check_limit(n, limit)?;
    let count = 1usize << n;
    let threads = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
    let threads = threads.min(8).min(count / 2048).max(1);
    let out = if threads == 1 {
        (0..count).map(|m| state_edges(&shadow, m as u32)).collect()
    } else {
        let chunk = count.div_ceil(threads);
        let mut parts: Vec<Vec<Vec<(u32, AccMove)>>> = Vec::with_capacity(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let shadow = &shadow;
                    s.spawn(move || {
                        (t * chunk..count.min((t + 1) * chunk))
                            .map(|m| state_edges(shadow, m as u32))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                parts.push(h.join().expect("state graph worker"));
            }
        });
        parts.into_iter().flatten().collect()
    };
    Ok(StateGraph { shadow, out })
}

/// Enumerated and predicted degrees. `formula` per vertex is Σ_i C(m_i, 2)
/// over that state's arcs, m_i the number of distinct crossings the arc
/// passes over; `indegree` counts incoming edges from other states only.
pub struct DegreeReport {
    pub vertices: usize,
    pub outdegree_violations: Vec<(u32, usize)>,
    pub indegree_violations: Vec<DegreeViolation>,
}

#[derive(Clone, Copy, Debug)]
pub struct DegreeViolation {
    pub mask: u32,
    pub enumerated: usize,
    pub formula: usize,
}

impl StateGraph {
    pub fn shadow(&self) -> &Arc<Shadow> {
        &self.shadow
    }

    pub fn crossing_count(&self) -> usize {
        self.shadow.crossing_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn out_edges(&self, mask: u32) -> &[(u32, AccMove)] {
        &self.out[mask as usize]
    }

    pub fn outdegree(&self, mask: u32) -> usize {
        self.out[mask as usize].len()
    }

    /// In-edges per vertex, loops not counted.
    pub fn indegrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.out.len()];
        for (v, edges) in self.out.iter().enumerate() {
            for &(w, _) in edges {
                if w as usize != v {
                    deg[w as usize] += 1;
                }
            }
        }
        deg
    }

    /// Σ_i C(m_i, 2) at each vertex.
    pub fn formula_indegrees(&self) -> Vec<usize> {
        (0..self.out.len() as u32)
            .map(|mask| {
                let d = state_diagram(&self.shadow, mask);
                enumerate_arcs(&d)
                    .iter()
                    .map(|arc| {
                        let m = arc
                            .overs
                            .iter()
                            .map(|p| p.crossing)
                            .collect::<BTreeSet<_>>()
                            .len();
                        m * m.saturating_sub(1) / 2
                    })
                    .sum()
            })
            .collect()
    }

    pub fn degree_report(&self) -> DegreeReport {
        let n = self.crossing_count();
        let outdegree_violations = self
            .out
            .iter()
            .enumerate()
            .filter(|(_, e)| e.len() != n)
            .map(|(v, e)| (v as u32, e.len()))
            .collect();
        let enumerated = self.indegrees();
        let formula = self.formula_indegrees();
        let indegree_violations = enumerated
            .iter()
            .zip(&formula)
            .enumerate()
            .filter(|(_, (e, f))| e != f)
            .map(|(v, (&e, &f))| DegreeViolation { mask: v as u32, enumerated: e, formula: f })
            .collect();
        DegreeReport {
            vertices: self.out.len(),
            outdegree_violations,
            indegree_violations,
        }
    }

    /// Weakly connected components; masks ascending, components ordered by
    /// their smallest member.
    pub fn weak_components(&self) -> Vec<Vec<u32>> {
        let count = self.out.len();
        let mut undirected: Vec<Vec<u32>> = vec![vec![]; count];
        for (v, edges) in self.out.iter().enumerate() {
            for &(w, _) in edges {
                if w as usize != v {
                    undirected[v].push(w);
                    undirected[w as usize].push(v as u32);
                }
            }
        }
        let mut seen = vec![false; count];
        let mut comps = vec![];
        for v0 in 0..count {
            if seen[v0] {
                continue;
            }
            seen[v0] = true;
            let mut comp = vec![v0 as u32];
            let mut queue = VecDeque::from([v0]);
            while let Some(v) = queue.pop_front() {
                for &w in &undirected[v] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        comp.push(w);
                        queue.push_back(w as usize);
                    }
                }
            }
            comp.sort();
            comps.push(comp);
        }
        comps
    }

    pub fn to_dot(&self) -> String {
        let n = self.crossing_count();
        let name = |mask: u32| {
            if n == 0 {
                "-".to_string()
            } else {
                BinaryLabel::from_mask(mask, n).to_string()
            }
        };
        let mut s = String::from("digraph stategraph {\n");
        for v in 0..self.out.len() as u32 {
            let _ = writeln!(s, "  \"{}\";", name(v));
        }
        for (v, edges) in self.out.iter().enumerate() {
            for &(w, _) in edges {
                let _ = writeln!(s, "  \"{}\" -> \"{}\";", name(v as u32), name(w));
            }
        }
        s.push_str("}\n");
        s
    }
}

fn set_mask(n: usize, set: &BTreeSet<usize>) -> Result<u32> {
    let mut m = 0u32;
    for &c in set {
        if c >= n {
            return Err(DiagramError::Validation(format!(
                "crossing index {c} out of range for {n} crossings"
            )));
        }
        m |= 1 << c;
    }
    Ok(m)
}

/// Can the moves switch exactly the crossings in `set`, preserving all
/// others? Verdict plus a shortest witnessing log when one exists.
pub fn is_admissible(
    d: &LinkDiagram,
    set: &BTreeSet<usize>,
    limit: usize,
) -> Result<(bool, Option<MoveLog>)> {
    let n = d.crossing_count();
    check_limit(n, limit)?;
    let start = BinaryLabel::from_diagram(d).to_mask()?;
    let target = start ^ set_mask(n, set)?;
    if target == start {
        return Ok((true, Some(MoveLog::new())));
    }
    let shadow = d.shadow_arc();
    let mut prev: Vec<Option<(u32, AccMove)>> = vec![None; 1 << n];
    let mut seen = vec![false; 1 << n];
    seen[start as usize] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for (w, mv) in state_edges(&shadow, v) {
            if seen[w as usize] {
                continue;
            }
            seen[w as usize] = true;
            prev[w as usize] = Some((v, mv));
            if w == target {
                let mut path = vec![];
                let mut at = w;
                while at != start {
                    let (p, mv) = prev[at as usize].expect("followed BFS parents");
                    path.push(mv);
                    at = p;
                }
                path.reverse();
                let mut log = MoveLog::new();
                let mut cur = d.clone();
                for mv in path {
                    cur = log.record(&cur, DiagMove::Acc(mv))?;
                }
                debug_assert_eq!(BinaryLabel::from_diagram(&cur).to_mask()?, target);
                return Ok((true, Some(log)));
            }
            queue.push_back(w);
        }
    }
    Ok((false, None))
}

/// All labels reachable from the state of `d`, itself included.
pub fn reachable_set(d: &LinkDiagram, limit: usize) -> Result<BTreeSet<u32>> {
    let n = d.crossing_count();
    check_limit(n, limit)?;
    let start = BinaryLabel::from_diagram(d).to_mask()?;
    let shadow = d.shadow_arc();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for (w, _) in state_edges(&shadow, v) {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    Ok(seen)
}
