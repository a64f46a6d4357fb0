//! Reachable anonymous state graph, built breadth-first.

use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::exec::{init_state_with, Model};
use crate::ring::Configuration;
use crate::rules::Protocol;

use super::expand::{Decider, Expander, Expansion, ProtocolDecider, Succ};
use super::fair::{Bits, FairGraph};
use super::state::{check_size, StateKey};

pub(crate) const NO_PARENT: u32 = u32::MAX;

/// How exploration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Complete,
    /// The state budget ran out; the graph is a BFS prefix.
    BudgetExceeded,
}

pub struct StateGraph {
    pub n: usize,
    pub k: usize,
    pub model: Model,
    pub(crate) phi: usize,
    states: IndexSet<StateKey, FxBuildHasher>,
    /// CSR over expanded states; `offsets.len() == expanded + 1`.
    offsets: Vec<u32>,
    targets: Vec<u32>,
    labels: Vec<u16>,
    free: Vec<u16>,
    terminal: Vec<bool>,
    blocked: Vec<bool>,
    /// Window of the first state that could not be expanded.
    pub(crate) open: Option<Vec<u8>>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    roots: Vec<u32>,
    pub completion: Completion,
}

impl StateGraph {
    /// Explores every state reachable from `inits` under all scheduler
    /// choices, stopping once more than `budget` states are known.
    pub fn explore(p: &Protocol, inits: &[Configuration], model: Model, budget: usize) -> Result<Self> {
        Self::explore_with(&mut ProtocolDecider::new(p), p.phi, inits, model, budget)
    }

    pub(crate) fn explore_with(
        decider: &mut impl Decider,
        phi: usize,
        inits: &[Configuration],
        model: Model,
        budget: usize,
    ) -> Result<Self> {
        let first = inits.first().ok_or(Error::EmptyConfiguration)?;
        let (n, k) = (first.n(), first.k());
        check_size(n, k)?;
        if inits.iter().any(|c| c.n() != n || c.k() != k) {
            return Err(Error::InvalidConfiguration("initial configurations differ in n or k".into()));
        }
        let mut g = StateGraph {
            n,
            k,
            model,
            phi,
            states: IndexSet::with_hasher(FxBuildHasher),
            offsets: vec![0],
            targets: Vec::new(),
            labels: Vec::new(),
            free: Vec::new(),
            terminal: Vec::new(),
            blocked: Vec::new(),
            open: None,
            parent: Vec::new(),
            depth: Vec::new(),
            roots: Vec::new(),
            completion: Completion::Complete,
        };
        for c in inits {
            let key = StateKey::from_state(&init_state_with(c, model, true)?)?;
            let (i, fresh) = g.states.insert_full(key);
            if fresh {
                g.parent.push(NO_PARENT);
                g.depth.push(0);
                g.roots.push(i as u32);
            }
        }
        let ex = Expander { n, k, phi, model };
        let mut succ: Vec<Succ> = Vec::new();
        let mut next = 0usize;
        while next < g.states.len() {
            if g.states.len() > budget {
                g.completion = Completion::BudgetExceeded;
                break;
            }
            let key = g.states[next];
            succ.clear();
            let (terminal, free) = match ex.expand(&key, decider, &mut succ)? {
                Expansion::Expanded { terminal, free } => (terminal, free),
                Expansion::Blocked(w) => {
                    g.open.get_or_insert(w);
                    succ.clear();
                    g.blocked.push(true);
                    g.terminal.push(false);
                    g.free.push(0);
                    g.offsets.push(g.targets.len() as u32);
                    next += 1;
                    continue;
                }
            };
            g.blocked.push(false);
            g.terminal.push(terminal);
            g.free.push(free);
            succ.sort_unstable_by_key(|s| s.key);
            let mut last: Option<u32> = None;
            for s in &succ {
                let (t, fresh) = g.states.insert_full(s.key);
                if fresh {
                    g.parent.push(next as u32);
                    g.depth.push(g.depth[next] + 1);
                }
                // parallel edges merge their activation labels
                if last == Some(t as u32) {
                    *g.labels.last_mut().unwrap() |= s.label;
                } else {
                    g.targets.push(t as u32);
                    g.labels.push(s.label);
                    last = Some(t as u32);
                }
            }
            g.offsets.push(g.targets.len() as u32);
            next += 1;
        }
        Ok(g)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_expanded(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn key(&self, s: usize) -> &StateKey {
        &self.states[s]
    }

    pub fn index_of(&self, key: &StateKey) -> Option<usize> {
        self.states.get_index_of(key)
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.roots.iter().map(|&r| r as usize)
    }

    pub fn configuration(&self, s: usize) -> Configuration {
        self.states[s].configuration(self.n)
    }

    pub fn is_expanded(&self, s: usize) -> bool {
        s < self.num_expanded()
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal.get(s).copied().unwrap_or(false)
    }

    pub fn depth(&self, s: usize) -> usize {
        self.depth[s] as usize
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let r = if self.is_expanded(s) { self.offsets[s] as usize..self.offsets[s + 1] as usize } else { 0..0 };
        self.targets[r].iter().map(|&t| t as usize)
    }

    pub(crate) fn edge_range(&self, s: usize) -> std::ops::Range<usize> {
        self.offsets[s] as usize..self.offsets[s + 1] as usize
    }

    pub(crate) fn edge_target(&self, e: usize) -> usize {
        self.targets[e] as usize
    }

    pub(crate) fn free_slots(&self, s: usize) -> u16 {
        self.free[s]
    }

    /// BFS-tree path from a root to `s`, as state indices (root first).
    pub fn path_to(&self, s: usize) -> Vec<usize> {
        let mut path = vec![s];
        let mut cur = s;
        while self.parent[cur] != NO_PARENT {
            cur = self.parent[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Expanded terminal states, in BFS order.
    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_expanded()).filter(|&s| self.terminal[s])
    }

    /// Distinct configurations of terminal states.
    pub fn terminal_configurations(&self) -> Vec<Configuration> {
        let mut out: Vec<Configuration> = self.terminals().map(|s| self.configuration(s)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Whether every path from a root to a terminal state passes through a
    /// state satisfying `milestone`.
    pub fn terminals_only_via(&self, milestone: impl Fn(&StateKey) -> bool) -> bool {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = self.roots().filter(|&r| !milestone(self.key(r))).collect();
        for &r in &stack {
            seen[r] = true;
        }
        while let Some(s) = stack.pop() {
            if self.is_terminal(s) {
                return false;
            }
            for t in self.successors(s) {
                if !seen[t] && !milestone(self.key(t)) {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        true
    }

    pub(crate) fn slot_codes(&self, s: usize, slots: u16) -> Bits {
        let mut b = Bits::default();
        for (i, &c) in self.states[s].codes().iter().enumerate() {
            if slots >> i & 1 == 1 {
                b.set(c as usize);
            }
        }
        b
    }
}

impl FairGraph for StateGraph {
    fn num_states(&self) -> usize {
        self.num_states()
    }

    fn edges(&self, s: usize) -> std::ops::Range<usize> {
        if self.is_expanded(s) {
            self.edge_range(s)
        } else {
            0..0
        }
    }

    fn target(&self, e: usize) -> usize {
        self.targets[e] as usize
    }

    fn activated(&self, s: usize, e: usize) -> Bits {
        self.slot_codes(s, self.labels[e] | self.free[s])
    }

    fn required(&self, s: usize) -> Bits {
        self.slot_codes(s, u16::MAX)
    }

    fn excluded(&self, s: usize) -> bool {
        !self.is_expanded(s) || self.terminal[s] || self.blocked[s]
    }
}
