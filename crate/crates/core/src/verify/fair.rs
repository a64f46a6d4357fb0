//! Fair-cycle detection.
//!
//! A set of states and edges can be repeated forever by a fair scheduler iff
//! it is strongly connected, has at least one edge, and every requirement
//! raised by one of its states is discharged by one of its edges. For
//! labeled graphs the requirement is "all k robots"; for anonymous state
//! graphs it is "every occupied bucket gets activated". The search is the
//! usual SCC refinement: compute SCCs, accept one whose requirements are met,
//! otherwise drop the states raising unmet requirements and recurse.

use std::collections::VecDeque;
use std::ops::{BitAnd, BitOr, BitOrAssign, Not};

/// Fixed-width bitset, wide enough for every bucket code.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Bits([u64; 4]);

impl Bits {
    pub const WIDTH: usize = 256;

    pub fn single(i: usize) -> Self {
        let mut b = Self::default();
        b.set(i);
        b
    }

    pub fn low(k: usize) -> Self {
        let mut b = Self::default();
        for i in 0..k {
            b.set(i);
        }
        b
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !(*self & *other).is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..Self::WIDTH).filter(|&i| self.get(i))
    }
}

impl BitOr for Bits {
    type Output = Self;
    fn bitor(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] | o.0[i]))
    }
}

impl BitOrAssign for Bits {
    fn bitor_assign(&mut self, o: Self) {
        *self = *self | o;
    }
}

impl BitAnd for Bits {
    type Output = Self;
    fn bitand(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] & o.0[i]))
    }
}

impl Not for Bits {
    type Output = Self;
    fn not(self) -> Self {
        Self(self.0.map(|w| !w))
    }
}

/// Graph view consumed by the fairness search. Edges are numbered globally;
/// `edges(s)` is the range of edges leaving `s`.
pub(crate) trait FairGraph {
    fn num_states(&self) -> usize;
    fn edges(&self, s: usize) -> std::ops::Range<usize>;
    fn target(&self, e: usize) -> usize;
    fn activated(&self, s: usize, e: usize) -> Bits;
    fn required(&self, s: usize) -> Bits;
    fn excluded(&self, s: usize) -> bool;
}

/// States of an accepted component, in ascending order.
pub(crate) fn find_fair_component<G: FairGraph>(g: &G, candidates: Vec<u32>) -> Option<Vec<u32>> {
    let n = g.num_states();
    let mut stamp = vec![0u32; n];
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut generation = 0u32;
    let mut work: Vec<Vec<u32>> = vec![candidates.into_iter().filter(|&s| !g.excluded(s as usize)).collect()];

    while let Some(set) = work.pop() {
        generation += 1;
        for &s in &set {
            stamp[s as usize] = generation;
            index[s as usize] = u32::MAX;
        }
        let member = |s: usize, stamp: &[u32]| stamp[s] == generation;
        let mut counter = 0u32;
        let mut stack: Vec<u32> = Vec::new();
        let mut call: Vec<(u32, usize)> = Vec::new();
        for &root in &set {
            if index[root as usize] != u32::MAX {
                continue;
            }
            call.push((root, g.edges(root as usize).start));
            index[root as usize] = counter;
            low[root as usize] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root as usize] = true;
            while let Some(&(v, start)) = call.last() {
                let vu = v as usize;
                let end = g.edges(vu).end;
                let mut pos = start;
                let mut descended = false;
                while pos < end {
                    let e = pos;
                    pos += 1;
                    let w = g.target(e);
                    if !member(w, &stamp) {
                        continue;
                    }
                    if index[w] == u32::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w as u32);
                        on_stack[w] = true;
                        let top = call.len() - 1;
                        call[top].1 = pos;
                        call.push((w as u32, g.edges(w).start));
                        descended = true;
                        break;
                    } else if on_stack[w] {
                        low[vu] = low[vu].min(index[w]);
                    }
                }
                if descended {
                    continue;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent as usize] = low[parent as usize].min(low[vu]);
                }
                if low[vu] == index[vu] {
                    let mut comp = Vec::new();
                    loop {
                        let x = stack.pop().expect("tarjan stack");
                        on_stack[x as usize] = false;
                        comp.push(x);
                        if x == v {
                            break;
                        }
                    }
                    if let Some(found) = inspect(g, comp, &stamp, generation, &mut work) {
                        return Some(found);
                    }
                }
            }
        }
    }
    None
}

/// Accepts the component or queues its pruned remainder.
fn inspect<G: FairGraph>(
    g: &G,
    mut comp: Vec<u32>,
    stamp: &[u32],
    generation: u32,
    work: &mut Vec<Vec<u32>>,
) -> Option<Vec<u32>> {
    comp.sort_unstable();
    let inside = |s: usize| stamp[s] == generation && comp.binary_search(&(s as u32)).is_ok();
    let mut required = Bits::default();
    let mut activated = Bits::default();
    let mut has_edge = false;
    for &s in &comp {
        let s = s as usize;
        required |= g.required(s);
        for e in g.edges(s) {
            if inside(g.target(e)) {
                has_edge = true;
                activated |= g.activated(s, e);
            }
        }
    }
    if !has_edge {
        return None;
    }
    let missing = required & !activated;
    if missing.is_empty() {
        return Some(comp);
    }
    let rest: Vec<u32> = comp.into_iter().filter(|&s| !g.required(s as usize).intersects(&missing)).collect();
    if !rest.is_empty() {
        work.push(rest);
    }
    None
}

/// Closed walk through `comp` (sorted) that traverses, for every requirement
/// raised inside `comp`, one edge discharging it. Returns `(source, edge)`
/// pairs; the walk starts and ends at the source of its first edge.
pub(crate) fn covering_walk<G: FairGraph>(g: &G, comp: &[u32]) -> Vec<(usize, usize)> {
    let inside = |s: usize| comp.binary_search(&(s as u32)).is_ok();
    let mut required = Bits::default();
    for &s in comp {
        required |= g.required(s as usize);
    }
    // one discharging edge per requirement, plus any internal edge so the
    // walk is non-empty even without requirements
    let mut picks: Vec<(usize, usize)> = Vec::new();
    let mut covered = Bits::default();
    for &s in comp {
        let s = s as usize;
        for e in g.edges(s) {
            if !inside(g.target(e)) {
                continue;
            }
            let act = g.activated(s, e) & required;
            let fresh = act & !covered;
            if picks.is_empty() || !fresh.is_empty() {
                covered |= act;
                picks.push((s, e));
            }
        }
    }
    let start = picks[0].0;
    let mut walk = Vec::new();
    let mut at = start;
    for &(s, e) in &picks {
        walk.extend(path_within(g, comp, at, s));
        walk.push((s, e));
        at = g.target(e);
    }
    walk.extend(path_within(g, comp, at, start));
    walk
}

/// Shortest path from `a` to `b` inside `comp`, as `(source, edge)` pairs.
fn path_within<G: FairGraph>(g: &G, comp: &[u32], a: usize, b: usize) -> Vec<(usize, usize)> {
    if a == b {
        return Vec::new();
    }
    let pos = |s: usize| comp.binary_search(&(s as u32)).ok();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; comp.len()];
    let mut seen = vec![false; comp.len()];
    seen[pos(a).expect("start inside")] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(s) = queue.pop_front() {
        for e in g.edges(s) {
            let t = g.target(e);
            let Some(i) = pos(t) else { continue };
            if seen[i] {
                continue;
            }
            seen[i] = true;
            prev[i] = Some((s, e));
            if t == b {
                let mut out = Vec::new();
                let mut cur = b;
                while cur != a {
                    let (s, e) = prev[pos(cur).unwrap()].unwrap();
                    out.push((s, e));
                    cur = s;
                }
                out.reverse();
                return out;
            }
            queue.push_back(t);
        }
    }
    unreachable!("component is strongly connected")
}

/// Explicit graph whose edges carry the set of robots activated (bit i =
/// robot i).
#[derive(Debug, Clone, Default)]
pub struct LabeledGraph {
    pub num_states: usize,
    pub initial: Vec<usize>,
    pub terminal: Vec<bool>,
    pub edges: Vec<(usize, usize, u64)>,
}

/// A fair cycle: its states and a closed walk of edge indices (into
/// `LabeledGraph::edges`) whose labels cover every robot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    pub states: Vec<usize>,
    pub walk: Vec<usize>,
}

struct Csr<'a> {
    g: &'a LabeledGraph,
    order: Vec<usize>,
    offsets: Vec<usize>,
    all: Bits,
}

impl FairGraph for Csr<'_> {
    fn num_states(&self) -> usize {
        self.g.num_states
    }
    fn edges(&self, s: usize) -> std::ops::Range<usize> {
        self.offsets[s]..self.offsets[s + 1]
    }
    fn target(&self, e: usize) -> usize {
        self.g.edges[self.order[e]].1
    }
    fn activated(&self, _s: usize, e: usize) -> Bits {
        let mut b = Bits::default();
        b.0[0] = self.g.edges[self.order[e]].2;
        b
    }
    fn required(&self, _s: usize) -> Bits {
        self.all
    }
    fn excluded(&self, s: usize) -> bool {
        self.g.terminal.get(s).copied().unwrap_or(false)
    }
}

/// Finds a reachable, terminal-free strongly connected subgraph with at
/// least one edge whose labels cover all `k` robots.
pub fn fair_cycle_exists(g: &LabeledGraph, k: usize) -> Option<CycleWitness> {
    assert!(k <= 64, "labels are 64-bit robot sets");
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.sort_by_key(|&e| g.edges[e].0);
    let mut offsets = vec![0usize; g.num_states + 1];
    for &(s, _, _) in &g.edges {
        offsets[s + 1] += 1;
    }
    for i in 0..g.num_states {
        offsets[i + 1] += offsets[i];
    }
    let csr = Csr { g, order, offsets, all: Bits::low(k) };

    let mut reach = vec![false; g.num_states];
    let mut queue: VecDeque<usize> = g.initial.iter().copied().collect();
    for &s in &g.initial {
        reach[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for e in csr.edges(s) {
            let t = csr.target(e);
            if !reach[t] {
                reach[t] = true;
                queue.push_back(t);
            }
        }
    }
    let candidates = (0..g.num_states).filter(|&s| reach[s]).map(|s| s as u32).collect();
    let comp = find_fair_component(&csr, candidates)?;
    let walk = covering_walk(&csr, &comp).into_iter().map(|(_, e)| csr.order[e]).collect();
    Some(CycleWitness { states: comp.into_iter().map(|s| s as usize).collect(), walk })
}
