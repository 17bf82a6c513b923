//! Brute-force restricted-repetition predicate, written from the definition
//! without reusing the library's summary automaton.

#![allow(dead_code)]

use robosync::model::RobotSet;
use robosync::schedulers::RsynchReason;

/// Literal check of a finite sequence: either every set is the full set, or
/// some prefix of length `p` is all full sets and every later set is
/// nonempty, not full, and disjoint from its successor.
pub fn literal_valid(seq: &[RobotSet], n: usize) -> bool {
    let full = RobotSet::full(n);
    if seq.iter().all(|&e| e == full) {
        return true;
    }
    (0..=seq.len()).any(|p| {
        seq[..p].iter().all(|&e| e == full)
            && seq[p..].iter().all(|&e| !e.is_empty() && e != full)
            && seq[p..].windows(2).all(|w| !w[0].intersects(w[1]))
    })
}

/// First violation as (1-based index, reason), derived from the longest
/// valid prefix. An overlap is reported at the first set of the pair.
pub fn literal_violation(seq: &[RobotSet], n: usize) -> Option<(usize, RsynchReason)> {
    let m = (0..=seq.len()).rev().find(|&m| literal_valid(&seq[..m], n))?;
    if m == seq.len() {
        return None;
    }
    let e = seq[m];
    let reason = if e.is_empty() {
        RsynchReason::EmptySet
    } else if e == RobotSet::full(n) {
        RsynchReason::FullSetAfterPrefix
    } else {
        RsynchReason::OverlapConsecutive
    };
    let index = if reason == RsynchReason::OverlapConsecutive { m } else { m + 1 };
    Some((index, reason))
}

/// A lasso is valid iff a long enough unrolling is; three passes over the
/// cycle are more than any junction or wrap-around needs.
pub fn literal_lasso_violation(prefix: &[RobotSet], cycle: &[RobotSet], n: usize) -> Option<(usize, RsynchReason)> {
    let mut seq = prefix.to_vec();
    for _ in 0..3 {
        seq.extend_from_slice(cycle);
    }
    literal_violation(&seq, n)
}

/// Every sequence of subsets of `[0, n)` with length at most `max_len`,
/// empty set included.
pub fn all_sequences(n: usize, max_len: usize) -> Vec<Vec<RobotSet>> {
    let subsets: Vec<RobotSet> = (0..1u32 << n).map(RobotSet).collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * subsets.len());
        for s in &frontier {
            for &e in &subsets {
                let mut t: Vec<RobotSet> = s.clone();
                t.push(e);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
