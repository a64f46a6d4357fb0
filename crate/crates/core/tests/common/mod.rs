//! Brute-force oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet, VecDeque};

use myopic_ring::{parse_protocol, Configuration, LabeledGraph, Protocol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every configuration of `k` robots (towers allowed) on `n` nodes.
pub fn all_configs(n: usize, k: usize) -> Vec<Configuration> {
    fn rec(i: usize, left: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for m in 0..=left {
            cur[i] = m;
            rec(i + 1, left - m, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, k as u8, &mut vec![0; n], &mut out);
    out.into_iter().map(|m| Configuration::new(m).unwrap()).collect()
}

/// The 2n images of `c` under rotations and reflections, written out node by
/// node.
pub fn images(c: &Configuration) -> Vec<Vec<u8>> {
    let n = c.n();
    let m = c.mults();
    let mut out = Vec::with_capacity(2 * n);
    for o in 0..n {
        out.push((0..n).map(|i| m[(i + o) % n]).collect());
        out.push((0..n).map(|i| m[(o + n - i) % n]).collect());
    }
    out
}

pub fn oracle_canonical(c: &Configuration) -> Vec<u8> {
    images(c).into_iter().min().unwrap()
}

pub fn oracle_indistinguishable(a: &Configuration, b: &Configuration) -> bool {
    images(a).contains(&b.mults().to_vec())
}

/// Exact fair-cycle test on the product of the graph with the set of robots
/// activated so far: a fair cycle through `s` exists iff `(s, all)` is
/// reachable from `(s, none)` in at least one step, avoiding terminals.
pub fn oracle_fair_product(g: &LabeledGraph, k: usize) -> bool {
    let full = (1u64 << k) - 1;
    let mut out: Vec<Vec<(usize, u64)>> = vec![Vec::new(); g.num_states];
    for &(s, t, l) in &g.edges {
        out[s].push((t, l));
    }
    let live = |s: usize| !g.terminal.get(s).copied().unwrap_or(false);
    reachable(g, &out).into_iter().filter(|&s| live(s)).any(|s| {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        for &(t, l) in &out[s] {
            if live(t) && seen.insert((t, l & full)) {
                queue.push_back((t, l & full));
            }
        }
        while let Some((v, m)) = queue.pop_front() {
            if v == s && m == full {
                return true;
            }
            for &(t, l) in &out[v] {
                let next = (t, (m | l) & full);
                if live(t) && seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        false
    })
}

/// Whether some reachable, terminal-free closed walk of at most `max_len`
/// edges activates every robot: lassos enumerated up to that loop length.
pub fn oracle_fair_lasso(g: &LabeledGraph, k: usize, max_len: usize) -> bool {
    let full = (1u64 << k) - 1;
    let mut out: Vec<Vec<(usize, u64)>> = vec![Vec::new(); g.num_states];
    for &(s, t, l) in &g.edges {
        out[s].push((t, l));
    }
    let live = |s: usize| !g.terminal.get(s).copied().unwrap_or(false);
    reachable(g, &out).into_iter().filter(|&s| live(s)).any(|s| {
        // walks of exactly `len` edges from s, deduplicated by (end, mask)
        let mut layer: HashSet<(usize, u64)> = HashSet::from([(s, 0)]);
        for _ in 0..max_len {
            let mut next = HashSet::new();
            for &(v, m) in &layer {
                for &(t, l) in &out[v] {
                    if live(t) {
                        next.insert((t, (m | l) & full));
                    }
                }
            }
            if next.contains(&(s, full)) {
                return true;
            }
            layer = next;
        }
        false
    })
}

fn reachable(g: &LabeledGraph, out: &[Vec<(usize, u64)>]) -> Vec<usize> {
    let mut seen = vec![false; g.num_states];
    let mut stack: Vec<usize> = g.initial.clone();
    for &s in &g.initial {
        seen[s] = true;
    }
    while let Some(s) = stack.pop() {
        for &(t, _) in &out[s] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    (0..g.num_states).filter(|&s| seen[s]).collect()
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_states: usize, k: usize) -> LabeledGraph {
    let n = rng.gen_range(1..=max_states);
    let degree = rng.gen_range(1.0..3.0);
    let m = (n as f64 * degree) as usize;
    let edges = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(1..1u64 << k))).collect();
    let terminal = (0..n).map(|_| rng.gen_bool(0.1)).collect();
    let initial = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect();
    LabeledGraph { num_states: n, initial, terminal, edges }
}

/// A random deterministic radius-1 protocol over views with multiplicities
/// up to `max_m`: each mirror pair of views gets at most one rule, and
/// symmetric views only move either way.
pub fn random_protocol(seed: u64, max_m: u8) -> Protocol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = BTreeMap::new();
    for a in 0..=max_m {
        for b in 1..=max_m {
            for c in 0..=max_m {
                let w = [a, b, c];
                let rev = [c, b, a];
                if rev < w || !rng.gen_bool(0.5) {
                    continue;
                }
                let action = if w == rev { "<-|->" } else { ["->", "<-", "<-|->"][rng.gen_range(0..3)] };
                table.insert(w, action);
            }
        }
    }
    let mut text = String::from("phi=1\n");
    for (i, (w, action)) in table.iter().enumerate() {
        text += &format!("R{i}: {}({}){} :: {action}\n", w[0], w[1], w[2]);
    }
    parse_protocol(&text).unwrap()
}
