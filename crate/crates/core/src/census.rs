//! Exhaustive generation of small single-component shadows.
//!
//! Chord words of length 2n are enumerated in first-occurrence order, cut
//! down to rotation/reversal-canonical representatives, prefiltered by the
//! even-interlacement condition, and then realized: each symbol's second
//! visit can cross the first from either side, so up to 2^(n-1) candidate
//! maps per word (one side of the first symbol is fixed, reflection covers
//! the rest). Candidates that fail the face count are discarded by the
//! constructor; survivors are deduplicated by a canonical traversal
//! signature that is invariant under rotation, reversal, and reflection.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::diagram::{EdgeId, Shadow};

/// All shadows of one closed curve with exactly `n ≥ 1` crossings, one per
/// class under rotation, reversal, and reflection, ordered by signature.
pub fn knot_shadows(n: usize) -> Vec<Arc<Shadow>> {
    assert!(n >= 1, "the generator starts at one crossing");
    let mut found: BTreeMap<Vec<u8>, Arc<Shadow>> = BTreeMap::new();
    let mut word = Vec::with_capacity(2 * n);
    let mut open = vec![false; n];
    gen_words(n, &mut word, &mut open, 0, &mut |w| {
        if !evenly_interlaced(w, n) || !is_canonical(w) {
            return;
        }
        for bits in 0..(1u32 << (n - 1)) {
            if let Some(shadow) = embed(w, n, bits) {
                let sig = signature_of_visits(&visit_sequence_of_word(w, n, bits), n);
                found.entry(sig).or_insert_with(|| Arc::new(shadow));
            }
        }
    });
    found.into_values().collect()
}

fn gen_words(n: usize, w: &mut Vec<u8>, open: &mut Vec<bool>, opened: usize, sink: &mut impl FnMut(&[u8])) {
    if w.len() == 2 * n {
        sink(w);
        return;
    }
    // Close any open symbol; positions left must fit the still-open ones.
    let remaining = 2 * n - w.len();
    let open_count = open.iter().filter(|&&b| b).count();
    if open_count > remaining {
        return;
    }
    for s in 0..opened {
        if open[s] {
            open[s] = false;
            w.push(s as u8);
            gen_words(n, w, open, opened, sink);
            w.pop();
            open[s] = true;
        }
    }
    if opened < n {
        open[opened] = true;
        w.push(opened as u8);
        gen_words(n, w, open, opened + 1, sink);
        w.pop();
        open[opened] = false;
    }
}

/// Necessary for realizability: every symbol must interleave with an even
/// number of others.
fn evenly_interlaced(w: &[u8], n: usize) -> bool {
    let mut pos = vec![[usize::MAX; 2]; n];
    for (i, &s) in w.iter().enumerate() {
        let p = &mut pos[s as usize];
        if p[0] == usize::MAX {
            p[0] = i;
        } else {
            p[1] = i;
        }
    }
    for s in 0..n {
        let [a, b] = pos[s];
        let mut inside = vec![0u8; n];
        for &t in &w[a + 1..b] {
            inside[t as usize] += 1;
        }
        let crossing = inside.iter().filter(|&&c| c == 1).count();
        if crossing % 2 != 0 {
            return false;
        }
    }
    true
}

fn relabel(seq: impl Iterator<Item = u8>, n: usize) -> Vec<u8> {
    let mut map = vec![u8::MAX; n];
    let mut next = 0u8;
    seq.map(|s| {
        let slot = &mut map[s as usize];
        if *slot == u8::MAX {
            *slot = next;
            next += 1;
        }
        *slot
    })
    .collect()
}

fn is_canonical(w: &[u8]) -> bool {
    let m = w.len();
    let n = m / 2;
    for dir in [false, true] {
        for start in 0..m {
            let rotated = (0..m).map(|k| {
                let idx = if dir { (start + m - k) % m } else { (start + k) % m };
                w[idx]
            });
            let r = relabel(rotated, n);
            if r[..] < *w {
                return false;
            }
        }
    }
    true
}

/// Build the candidate map for one word and one side-choice vector; `None`
/// when the faces do not close up to a sphere.
fn embed(word: &[u8], n: usize, bits: u32) -> Option<Shadow> {
    let m = 2 * n;
    let mut first = vec![usize::MAX; n];
    let mut tuples = vec![[0 as EdgeId; 4]; n];
    for (i, &sym) in word.iter().enumerate() {
        let inn = ((i + m - 1) % m + 1) as EdgeId;
        let out = (i + 1) as EdgeId;
        let s = sym as usize;
        if first[s] == usize::MAX {
            first[s] = i;
            tuples[s][0] = inn;
            tuples[s][2] = out;
        } else if s > 0 && (bits >> (s - 1)) & 1 == 1 {
            tuples[s][3] = inn;
            tuples[s][1] = out;
        } else {
            tuples[s][1] = inn;
            tuples[s][3] = out;
        }
    }
    let xids: Vec<u32> = (1..=n as u32).collect();
    Shadow::from_parts(tuples, xids, None, None).ok()
}

fn visit_sequence_of_word(word: &[u8], n: usize, bits: u32) -> Vec<(usize, u8)> {
    let mut first = vec![usize::MAX; n];
    word.iter()
        .enumerate()
        .map(|(i, &sym)| {
            let s = sym as usize;
            if first[s] == usize::MAX {
                first[s] = i;
                (s, 0)
            } else if s > 0 && (bits >> (s - 1)) & 1 == 1 {
                (s, 3)
            } else {
                (s, 1)
            }
        })
        .collect()
}

/// Canonical traversal signature of a single-component shadow: the minimum
/// over starting visit, direction, and reflection of the relabeled
/// (crossing, incoming-slot-relative-to-first-visit) stream.
pub fn shadow_signature(shadow: &Shadow) -> Vec<u8> {
    let visits: Vec<(usize, u8)> = shadow
        .comp_edges(0)
        .iter()
        .map(|&e| {
            let h = shadow.head(e).expect("component edges exist");
            (h.crossing, h.slot)
        })
        .collect();
    signature_of_visits(&visits, shadow.crossing_count())
}

fn signature_of_visits(visits: &[(usize, u8)], n: usize) -> Vec<u8> {
    let m = visits.len();
    let mut best: Option<Vec<u8>> = None;
    for refl in [false, true] {
        for dir in [false, true] {
            for start in 0..m {
                let mut map = vec![u8::MAX; n];
                let mut next = 0u8;
                let mut axis = vec![0u8; n];
                let mut cur = Vec::with_capacity(2 * m);
                for k in 0..m {
                    let idx = if dir { (start + m - k) % m } else { (start + k) % m };
                    let (c, s0) = visits[idx];
                    let mut s = if dir { (s0 + 2) % 4 } else { s0 };
                    if refl {
                        s = (4 - s) % 4;
                    }
                    if map[c] == u8::MAX {
                        map[c] = next;
                        next += 1;
                        axis[c] = s;
                    }
                    cur.push(map[c]);
                    cur.push((4 + s - axis[c]) % 4);
                }
                if best.as_ref().is_none_or(|b| cur < *b) {
                    best = Some(cur);
                }
            }
        }
    }
    best.expect("at least one traversal")
}
