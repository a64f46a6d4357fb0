use std::collections::HashMap;

use crate::exec::Trace;

/// Pairs `(i, j)`, `i < j`, of indistinguishable configurations among the
/// configuration-changing subsequence of `t` (index 0 is the initial
/// configuration).
pub fn monitor_distinguishability(t: &Trace) -> Vec<(usize, usize)> {
    let mut seq = Vec::new();
    for c in t.configurations() {
        if seq.last() != Some(&c) {
            seq.push(c);
        }
    }
    let mut classes: HashMap<_, Vec<usize>> = HashMap::new();
    for (i, c) in seq.iter().enumerate() {
        classes.entry(c.canonical()).or_default().push(i);
    }
    let mut out: Vec<(usize, usize)> = classes
        .values()
        .flat_map(|ix| ix.iter().enumerate().flat_map(move |(a, &i)| ix[a + 1..].iter().map(move |&j| (i, j))))
        .collect();
    out.sort_unstable();
    out
}
