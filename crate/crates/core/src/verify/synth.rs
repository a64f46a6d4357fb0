//! Exists-forall search for an exploration protocol.
//!
//! A candidate is a partial table from views (one per mirror pair) to
//! decisions. Entries are fixed lazily: the adversary explores every state it
//! can reach with the current table, and the first view nobody has decided
//! yet becomes the next branching point. Bad terminals and fair cycles among
//! fully decided states are permanent, so the branch is pruned as soon as one
//! shows up.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::exec::Model;
use crate::library::{initial_configs, InitClass};
use crate::ring::Configuration;
use crate::rules::{Action, Guard, MoveChoice, Protocol, Rule};

use super::expand::Decider;
use super::fair::find_fair_component;
use super::graph::StateGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthesisResult {
    Found(Protocol),
    NoneExists,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SynthesisStats {
    /// States explored over all candidate checks.
    pub nodes: u64,
    /// Partial tables checked.
    pub tables: u64,
}

type Table = FxHashMap<Vec<u8>, Option<Action>>;

fn canonical(w: &[u8]) -> (Vec<u8>, bool) {
    let rev: Vec<u8> = w.iter().rev().copied().collect();
    if rev.as_slice() < w {
        (rev, true)
    } else {
        (w.to_vec(), false)
    }
}

struct TableDecider<'a>(&'a Table);

impl Decider for TableDecider<'_> {
    fn decide(&mut self, w: &[u8]) -> Result<Option<MoveChoice>> {
        let (c, mirrored) = canonical(w);
        Ok(self.0.get(&c).map(|d| d.map_or(MoveChoice::NONE, |a| a.bind(mirrored))))
    }
}

enum Check {
    Fail,
    Open(Vec<u8>),
    Done,
}

struct Search<'a> {
    phi: usize,
    model: Model,
    inits: &'a [Configuration],
    budget: u64,
    stats: SynthesisStats,
}

impl Search<'_> {
    fn check(&mut self, table: &Table) -> Result<Option<Check>> {
        self.stats.tables += 1;
        let left = self.budget.saturating_sub(self.stats.nodes) as usize;
        let g = StateGraph::explore_with(&mut TableDecider(table), self.phi, self.inits, self.model, left)?;
        self.stats.nodes += g.num_states() as u64;
        if g.terminals().any(|s| !g.key(s).all_visited(g.n)) {
            return Ok(Some(Check::Fail));
        }
        if find_fair_component(&g, (0..g.num_expanded() as u32).collect()).is_some() {
            return Ok(Some(Check::Fail));
        }
        if g.completion == super::Completion::BudgetExceeded {
            return Ok(None);
        }
        Ok(Some(match &g.open {
            Some(w) => Check::Open(canonical(w).0),
            None => Check::Done,
        }))
    }

    /// `Some(true)` found (table left in place), `Some(false)` exhausted,
    /// `None` out of budget.
    fn dfs(&mut self, table: &mut Table) -> Result<Option<bool>> {
        let view = match self.check(table)? {
            None => return Ok(None),
            Some(Check::Fail) => return Ok(Some(false)),
            Some(Check::Done) => return Ok(Some(true)),
            Some(Check::Open(v)) => v,
        };
        let symmetric = view.iter().eq(view.iter().rev());
        let options: &[Option<Action>] = if symmetric {
            &[None, Some(Action::EitherWay)]
        } else {
            &[None, Some(Action::TowardPlus), Some(Action::TowardMinus), Some(Action::EitherWay)]
        };
        for &opt in options {
            table.insert(view.clone(), opt);
            match self.dfs(table)? {
                Some(false) => {}
                other => return Ok(other),
            }
        }
        table.remove(&view);
        Ok(Some(false))
    }
}

fn table_protocol(phi: usize, table: &Table) -> Result<Protocol> {
    let mut entries: Vec<(&Vec<u8>, Action)> = table.iter().filter_map(|(v, d)| d.map(|a| (v, a))).collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    let rules = entries
        .into_iter()
        .enumerate()
        .map(|(i, (v, a))| Ok(Rule { label: format!("S{}", i + 1), guard: Guard::exact(v)?, action: a }))
        .collect::<Result<Vec<_>>>()?;
    Protocol::new("synthesized", phi, rules)
}

/// Searches for a deterministic protocol of radius `phi` exploring the ring
/// of `n` nodes with `k` robots from every configuration of `cls`.
/// `budget` bounds the total number of explored states.
pub fn synthesize(
    phi: usize,
    n: usize,
    k: usize,
    model: Model,
    cls: &InitClass,
    budget: u64,
) -> Result<(SynthesisResult, SynthesisStats)> {
    if cls.n != n || cls.k != k {
        return Err(Error::InvalidConfiguration("instance class disagrees with n or k".into()));
    }
    if phi == 0 {
        return Err(Error::InvalidConfiguration("radius must be at least 1".into()));
    }
    let inits = initial_configs(cls)?;
    let mut search = Search { phi, model, inits: &inits, budget, stats: SynthesisStats::default() };
    let mut table = Table::default();
    let result = match search.dfs(&mut table)? {
        Some(true) => SynthesisResult::Found(table_protocol(phi, &table)?),
        Some(false) => SynthesisResult::NoneExists,
        None => SynthesisResult::BudgetExceeded,
    };
    Ok((result, search.stats))
}
