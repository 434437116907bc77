//! Per-crossing binary labels, component order data, linking numbers, and
//! ascending-position checks.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::diagram::{LinkDiagram, Shadow};
use crate::error::{DiagramError, Result};

/// The checkerboard-derived bit vector of a diagram, indexed by internal
/// crossing order. All-zeros and all-ones are the two alternating states of
/// a shadow; flipping one crossing complements exactly its own bit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryLabel {
    bits: Vec<bool>,
}

impl BinaryLabel {
    pub fn new(bits: Vec<bool>) -> BinaryLabel {
        BinaryLabel { bits }
    }

    pub fn from_diagram(d: &LinkDiagram) -> BinaryLabel {
        BinaryLabel { bits: (0..d.crossing_count()).map(|c| d.bit(c)).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_mask(&self) -> Result<u32> {
        if self.bits.len() > 32 {
            return Err(DiagramError::LimitExceeded(format!(
                "{} crossings do not fit a 32-bit label mask",
                self.bits.len()
            )));
        }
        Ok(self
            .bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &b)| if b { m | (1 << i) } else { m }))
    }

    pub fn from_mask(mask: u32, n: usize) -> BinaryLabel {
        BinaryLabel { bits: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn parse(s: &str) -> Result<BinaryLabel> {
        let mut bits = vec![];
        for ch in s.trim().chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(DiagramError::Parse {
                        line: 1,
                        msg: format!("`{ch}` is not a label bit"),
                    })
                }
            }
        }
        Ok(BinaryLabel { bits })
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The diagram over `shadow` whose label is `label`; inverse of
/// [`BinaryLabel::from_diagram`].
pub fn diagram_from_label(shadow: Arc<Shadow>, label: &BinaryLabel) -> Result<LinkDiagram> {
    let n = shadow.crossing_count();
    if label.len() != n {
        return Err(DiagramError::Validation(format!(
            "label has {} bits for {} crossings",
            label.len(),
            n
        )));
    }
    let flips = (0..n).map(|c| label.bit(c) ^ shadow.base_bit(c)).collect();
    Ok(LinkDiagram::with_flips(shadow, flips))
}

/// Component going over at crossing `c` in the diagram's current state.
pub fn comp_over_at(d: &LinkDiagram, c: usize) -> usize {
    let (under02, over13) = d.shadow().strand_comps(c);
    if d.is_flipped(c) {
        under02
    } else {
        over13
    }
}

/// Component going under at crossing `c` in the diagram's current state.
pub fn comp_under_at(d: &LinkDiagram, c: usize) -> usize {
    let (under02, over13) = d.shadow().strand_comps(c);
    if d.is_flipped(c) {
        over13
    } else {
        under02
    }
}

/// Crossings where component `j` crosses itself.
pub fn self_crossings(d: &LinkDiagram, j: usize) -> Vec<usize> {
    (0..d.crossing_count())
        .filter(|&c| d.shadow().strand_comps(c) == (j, j))
        .collect()
}

/// Crossings between two distinct components.
pub fn inter_crossings(d: &LinkDiagram, a: usize, b: usize) -> Vec<usize> {
    (0..d.crossing_count())
        .filter(|&c| {
            let (x, y) = d.shadow().strand_comps(c);
            (x, y) == (a, b) || (x, y) == (b, a)
        })
        .collect()
}

/// Over- and under-crossing sets of component `j` against the rest of the
/// link: crossings with another component where `j` is on top, respectively
/// underneath. Self-crossings are excluded.
pub fn over_under_sets(d: &LinkDiagram, j: usize) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
    if j >= d.component_count() {
        return Err(DiagramError::NotApplicable(format!("no component {j}")));
    }
    let mut over = BTreeSet::new();
    let mut under = BTreeSet::new();
    for c in 0..d.crossing_count() {
        let (a, b) = d.shadow().strand_comps(c);
        if a == b {
            continue;
        }
        if comp_over_at(d, c) == j {
            over.insert(c);
        } else if comp_under_at(d, c) == j {
            under.insert(c);
        }
    }
    Ok((over, under))
}

/// Pairwise linking numbers and their total.
pub struct LinkingData {
    /// lk[i][j] = half the signed crossing count between components i and j.
    pub lk: Vec<Vec<i32>>,
    /// Sum of lk over unordered pairs.
    pub total: i32,
}

pub fn linking_data(d: &LinkDiagram) -> LinkingData {
    let m = d.component_count();
    let mut sum = vec![vec![0i32; m]; m];
    for c in 0..d.crossing_count() {
        let (a, b) = d.shadow().strand_comps(c);
        if a != b {
            sum[a][b] += d.sign(c) as i32;
            sum[b][a] += d.sign(c) as i32;
        }
    }
    let mut total = 0;
    let mut lk = vec![vec![0i32; m]; m];
    for i in 0..m {
        for j in 0..m {
            debug_assert_eq!(sum[i][j] % 2, 0);
            lk[i][j] = sum[i][j] / 2;
            if i < j {
                total += lk[i][j];
            }
        }
    }
    LinkingData { lk, total }
}

fn crossing_matrix(d: &LinkDiagram) -> Vec<Vec<bool>> {
    let m = d.component_count();
    let mut crosses = vec![vec![false; m]; m];
    for c in 0..d.crossing_count() {
        let (a, b) = d.shadow().strand_comps(c);
        if a != b {
            crosses[a][b] = true;
            crosses[b][a] = true;
        }
    }
    crosses
}

/// Does the order satisfy: every component except the last crosses some
/// later component?
pub fn is_felicitous(d: &LinkDiagram, order: &[usize]) -> bool {
    let m = d.component_count();
    if order.len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    for &k in order {
        if k >= m || seen[k] {
            return false;
        }
        seen[k] = true;
    }
    let crosses = crossing_matrix(d);
    for i in 0..m.saturating_sub(1) {
        if !(i + 1..m).any(|j| crosses[order[i]][order[j]]) {
            return false;
        }
    }
    true
}

/// The lexicographically smallest felicitous component order. Exists for
/// every connected diagram.
pub fn felicitous_labeling(d: &LinkDiagram) -> Vec<usize> {
    let m = d.component_count();
    let crosses = crossing_matrix(d);
    let mut order = Vec::with_capacity(m);
    let mut used = vec![false; m];
    fn rec(m: usize, crosses: &[Vec<bool>], order: &mut Vec<usize>, used: &mut [bool]) -> bool {
        if order.len() == m {
            return true;
        }
        let last = order.len() == m - 1;
        for x in 0..m {
            if used[x] {
                continue;
            }
            let ok = last || (0..m).any(|y| !used[y] && y != x && crosses[x][y]);
            if !ok {
                continue;
            }
            used[x] = true;
            order.push(x);
            if rec(m, crosses, order, used) {
                return true;
            }
            order.pop();
            used[x] = false;
        }
        false
    }
    let found = rec(m, &crosses, &mut order, &mut used);
    debug_assert!(found, "connected diagrams always have a felicitous order");
    order
}

/// How a component sits inside the link, under a fixed component order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ComponentClass {
    HasSelfCrossings,
    /// No self-crossings and exactly one undercrossing.
    TypeC,
    /// No self-crossings, over everything earlier, under everything later.
    Simple,
    Plain,
}

pub fn classify_component(d: &LinkDiagram, j: usize, order: &[usize]) -> Result<ComponentClass> {
    let m = d.component_count();
    if j >= m || order.len() != m {
        return Err(DiagramError::NotApplicable(format!(
            "component {j} or order of length {} is out of range",
            order.len()
        )));
    }
    if !self_crossings(d, j).is_empty() {
        return Ok(ComponentClass::HasSelfCrossings);
    }
    let (_, under) = over_under_sets(d, j)?;
    if under.len() == 1 {
        return Ok(ComponentClass::TypeC);
    }
    let pos: Vec<usize> = {
        let mut p = vec![0; m];
        for (i, &k) in order.iter().enumerate() {
            p[k] = i;
        }
        p
    };
    let simple = (0..d.crossing_count()).all(|c| {
        let (a, b) = d.shadow().strand_comps(c);
        if a == b || (a != j && b != j) {
            return true;
        }
        let other = if a == j { b } else { a };
        if pos[other] < pos[j] {
            comp_over_at(d, c) == j
        } else {
            comp_under_at(d, c) == j
        }
    });
    Ok(if simple { ComponentClass::Simple } else { ComponentClass::Plain })
}

/// Walking component `k` from passage index `start`, is every self-crossing
/// first met underneath?
pub fn comp_self_ascending_from(d: &LinkDiagram, k: usize, start: usize) -> bool {
    let ps = d.shadow().passages(k);
    let mut seen = BTreeSet::new();
    for i in 0..ps.len() {
        let p = ps[(start + i) % ps.len()];
        if d.shadow().strand_comps(p.crossing) == (k, k)
            && seen.insert(p.crossing)
            && !d.passage_under(p)
        {
            return false;
        }
    }
    true
}

/// A component permutation under which every inter-component crossing puts
/// the later component on top, or `None` when some pair crosses in both
/// senses or the dominance relation has a cycle. Deterministic: smallest
/// index first among the available components.
pub fn ascending_order(d: &LinkDiagram) -> Option<Vec<usize>> {
    let m = d.component_count();
    let mut over = vec![vec![false; m]; m];
    for c in 0..d.crossing_count() {
        let (a, b) = d.shadow().strand_comps(c);
        if a != b {
            over[comp_over_at(d, c)][comp_under_at(d, c)] = true;
        }
    }
    for a in 0..m {
        for b in 0..m {
            if a != b && over[a][b] && over[b][a] {
                return None;
            }
        }
    }
    // Kahn's algorithm on the "must come before" relation: under -> over.
    let mut indeg = vec![0usize; m];
    for a in 0..m {
        for b in 0..m {
            if over[a][b] {
                indeg[a] += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..m).filter(|&k| indeg[k] == 0).collect();
    let mut order = vec![];
    while let Some(&k) = ready.iter().next() {
        ready.remove(&k);
        order.push(k);
        for a in 0..m {
            if over[a][k] {
                indeg[a] -= 1;
                if indeg[a] == 0 {
                    ready.insert(a);
                }
            }
        }
    }
    if order.len() == m {
        Some(order)
    } else {
        None
    }
}

/// Ascending check for fixed basepoints: `basepoints[k]` is a passage index
/// of component `k`; the walk starts on the edge entering that passage.
pub fn is_ascending(d: &LinkDiagram, basepoints: &[usize]) -> bool {
    let m = d.component_count();
    if basepoints.len() != m {
        return false;
    }
    for k in 0..m {
        let len = d.shadow().passages(k).len();
        let start = if len == 0 { 0 } else { basepoints[k] % len };
        if len > 0 && !comp_self_ascending_from(d, k, start) {
            return false;
        }
    }
    ascending_order(d).is_some()
}

/// Basepoints making every component self-ascending, if any exist; the
/// component order condition is checked separately.
pub fn ascending_basepoints(d: &LinkDiagram) -> Option<Vec<usize>> {
    let m = d.component_count();
    let mut base = vec![0; m];
    for k in 0..m {
        let len = d.shadow().passages(k).len();
        if len == 0 {
            continue;
        }
        match (0..len).find(|&s| comp_self_ascending_from(d, k, s)) {
            Some(s) => base[k] = s,
            None => return None,
        }
    }
    Some(base)
}

/// Existential ascending check: some basepoints work and the components
/// admit an ascending order.
pub fn is_ascending_existential(d: &LinkDiagram) -> bool {
    ascending_basepoints(d).is_some() && ascending_order(d).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::LinkDiagram;

    const TREFOIL: &str = "X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)";
    const HOPF: &str = "components: (1 2) (3 4)\nX 0 1 4 2 3\nX 1 4 1 3 2\n";
    const FIG8: &str = "X(4,2,5,1),X(8,6,1,5),X(6,3,7,4),X(2,7,3,8)";
    /// Three circles in a row: B (component 1) clasps A (component 0) at the
    /// first two crossings and C (component 2) at the last two.
    const CHAIN: &str = "components: (1 2) (5 6 7 8) (3 4)\n\
        X 1 1 6 2 5\nX 2 6 1 7 2\nX 3 7 4 8 3\nX 4 4 5 3 8\n";

    #[test]
    fn hopf_over_under_sets() {
        let d = LinkDiagram::parse(HOPF).unwrap();
        let (o, u) = over_under_sets(&d, 0).unwrap();
        assert_eq!(o.into_iter().collect::<Vec<_>>(), vec![1]);
        assert_eq!(u.into_iter().collect::<Vec<_>>(), vec![0]);
        let (o, u) = over_under_sets(&d, 1).unwrap();
        assert_eq!(o.into_iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(u.into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn knot_has_empty_sets() {
        let d = LinkDiagram::parse(TREFOIL).unwrap();
        let (o, u) = over_under_sets(&d, 0).unwrap();
        assert!(o.is_empty() && u.is_empty());
        assert_eq!(self_crossings(&d, 0).len(), 3);
    }

    #[test]
    fn linking_numbers() {
        let hopf = LinkDiagram::parse(HOPF).unwrap();
        let data = linking_data(&hopf);
        assert_eq!(data.lk[0][1], 1);
        assert_eq!(data.total, 1);

        let tre = LinkDiagram::parse(TREFOIL).unwrap();
        assert_eq!(linking_data(&tre).total, 0);

        let chain = LinkDiagram::parse(CHAIN).unwrap();
        let data = linking_data(&chain);
        assert_eq!(data.lk[0][1].abs(), 1);
        assert_eq!(data.lk[1][2].abs(), 1);
        assert_eq!(data.lk[0][2], 0);
        assert_eq!(data.total.abs(), 2);
    }

    #[test]
    fn felicitous_orders() {
        let hopf = LinkDiagram::parse(HOPF).unwrap();
        assert_eq!(felicitous_labeling(&hopf), vec![0, 1]);
        let tre = LinkDiagram::parse(TREFOIL).unwrap();
        assert_eq!(felicitous_labeling(&tre), vec![0]);
        let chain = LinkDiagram::parse(CHAIN).unwrap();
        assert_eq!(felicitous_labeling(&chain), vec![0, 1, 2]);
        assert!(is_felicitous(&chain, &[0, 2, 1]));
        // A (component 0) only crosses B (component 1): placing B before A
        // leaves A without a later neighbor.
        assert!(!is_felicitous(&chain, &[1, 0, 2]));
    }

    #[test]
    fn component_classes() {
        let hopf = LinkDiagram::parse(HOPF).unwrap();
        let order = felicitous_labeling(&hopf);
        assert_eq!(classify_component(&hopf, 0, &order).unwrap(), ComponentClass::TypeC);
        assert_eq!(classify_component(&hopf, 1, &order).unwrap(), ComponentClass::TypeC);

        let tre = LinkDiagram::parse(TREFOIL).unwrap();
        assert_eq!(
            classify_component(&tre, 0, &[0]).unwrap(),
            ComponentClass::HasSelfCrossings
        );

        let circle = LinkDiagram::parse("components: (1)\n").unwrap();
        assert_eq!(classify_component(&circle, 0, &[0]).unwrap(), ComponentClass::Simple);

        let chain = LinkDiagram::parse(CHAIN).unwrap();
        let order = felicitous_labeling(&chain);
        assert_eq!(classify_component(&chain, 0, &order).unwrap(), ComponentClass::TypeC);
        assert_eq!(classify_component(&chain, 1, &order).unwrap(), ComponentClass::Plain);
        assert_eq!(classify_component(&chain, 2, &order).unwrap(), ComponentClass::TypeC);
    }

    #[test]
    fn label_round_trips() {
        let d = LinkDiagram::parse(FIG8).unwrap();
        let shadow = d.shadow_arc();
        for mask in 0..16u32 {
            let label = BinaryLabel::from_mask(mask, 4);
            let diag = diagram_from_label(shadow.clone(), &label).unwrap();
            assert_eq!(BinaryLabel::from_diagram(&diag).to_mask().unwrap(), mask);
        }
    }

    #[test]
    fn label_text_round_trips() {
        let label = BinaryLabel::parse("0110").unwrap();
        assert_eq!(label.to_string(), "0110");
        assert_eq!(label.to_mask().unwrap(), 0b0110);
        assert_eq!(BinaryLabel::from_mask(6, 4), label);
    }

    #[test]
    fn alternating_knot_is_never_ascending() {
        let d = LinkDiagram::parse(TREFOIL).unwrap();
        for base in 0..6 {
            assert!(!is_ascending(&d, &[base]));
        }
        assert!(!is_ascending_existential(&d));
    }

    #[test]
    fn hopf_ascends_after_one_flip() {
        let d = LinkDiagram::parse(HOPF).unwrap();
        assert!(!is_ascending(&d, &[0, 0]));
        let f = d.toggled(&[0]);
        assert!(is_ascending(&f, &[0, 0]));
        assert_eq!(ascending_order(&f), Some(vec![1, 0]));
    }

    #[test]
    fn circle_is_ascending() {
        let d = LinkDiagram::parse("components: (1)\n").unwrap();
        assert!(is_ascending(&d, &[0]));
        assert!(is_ascending_existential(&d));
    }
}
