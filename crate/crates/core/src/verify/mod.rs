//! Exhaustive verification of exploration over every scheduler choice.
//!
//! The reachable graph is built over anonymous states ([`StateKey`]).
//! Exploration holds iff every terminal state has visited all nodes and no
//! fair non-terminating execution exists.

mod cex;
mod expand;
pub mod fair;
mod graph;
mod monitor;
pub mod state;
mod synth;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Result;
use crate::exec::{Model, Trace};
use crate::library::{initial_configs, InitClass};
use crate::ring::Configuration;
use crate::rules::Protocol;

pub use fair::{fair_cycle_exists, CycleWitness, LabeledGraph};
pub use graph::{Completion, StateGraph};
pub use monitor::monitor_distinguishability;
pub use state::StateKey;
pub use synth::{synthesize, SynthesisResult, SynthesisStats};

/// State budget used when the environment does not say otherwise.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// `MYOPIC_RING_BUDGET` if set and valid, else [`DEFAULT_BUDGET`].
pub fn default_budget() -> usize {
    std::env::var("MYOPIC_RING_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    /// A terminal state that has not visited every node.
    BadTerminal,
    /// A reachable loop a fair scheduler can repeat forever.
    FairCycle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictKind {
    Explores,
    Counterexample {
        reason: Reason,
        trace: Trace,
        /// For fair cycles, the step index after which the trace loops.
        cycle_start: Option<usize>,
    },
    BudgetExceeded {
        states_seen: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub states: usize,
    pub edges: usize,
    /// Distinct configurations of reachable terminal states.
    pub terminals: Vec<Configuration>,
}

impl Verdict {
    pub fn explores(&self) -> bool {
        self.kind == VerdictKind::Explores
    }

    pub fn label(&self) -> &'static str {
        match &self.kind {
            VerdictKind::Explores => "Explores",
            VerdictKind::Counterexample { reason: Reason::BadTerminal, .. } => "Counterexample(BadTerminal)",
            VerdictKind::Counterexample { reason: Reason::FairCycle, .. } => "Counterexample(FairCycle)",
            VerdictKind::BudgetExceeded { .. } => "BudgetExceeded",
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match &self.kind {
            VerdictKind::Counterexample { trace, .. } => Some(trace),
            _ => None,
        }
    }

    /// `{instance, verdict, states, edges, counterexample_trace?}`.
    pub fn to_json(&self, instance: &str, trace_path: Option<&str>) -> serde_json::Value {
        let mut v = json!({
            "instance": instance,
            "verdict": self.label(),
            "states": self.states,
            "edges": self.edges,
        });
        if let Some(path) = trace_path {
            v["counterexample_trace"] = json!(path);
        }
        if let VerdictKind::Counterexample { cycle_start: Some(c), .. } = self.kind {
            v["cycle_start"] = json!(c);
        }
        v
    }
}

/// Judges an explored graph. When both kinds of violation exist, the one
/// witnessed at the shallower BFS layer wins; a fair cycle wins ties.
pub fn judge(g: &StateGraph, p: &Protocol) -> Result<Verdict> {
    let bad = g.terminals().find(|&s| !g.key(s).all_visited(g.n));
    let comp = fair::find_fair_component(g, (0..g.num_expanded() as u32).collect());
    let fair_walk = comp.map(|comp| {
        let mut walk = fair::covering_walk(g, &comp);
        // enter the loop at its shallowest state
        let at = (0..walk.len()).min_by_key(|&i| g.depth(walk[i].0)).unwrap_or(0);
        walk.rotate_left(at);
        walk
    });
    let fair_depth = fair_walk.as_ref().map(|w| g.depth(w[0].0));
    let kind = match (bad, fair_depth) {
        (Some(b), Some(f)) if f <= g.depth(b) => lasso(g, p, fair_walk.as_deref().unwrap())?,
        (Some(b), _) => VerdictKind::Counterexample {
            reason: Reason::BadTerminal,
            trace: cex::path_trace(g, p, b)?,
            cycle_start: None,
        },
        (None, Some(_)) => lasso(g, p, fair_walk.as_deref().unwrap())?,
        (None, None) if g.completion == Completion::BudgetExceeded => {
            VerdictKind::BudgetExceeded { states_seen: g.num_states() }
        }
        (None, None) => VerdictKind::Explores,
    };
    Ok(Verdict { kind, states: g.num_states(), edges: g.num_edges(), terminals: g.terminal_configurations() })
}

fn lasso(g: &StateGraph, p: &Protocol, walk: &[(usize, usize)]) -> Result<VerdictKind> {
    let (trace, prefix) = cex::lasso_trace(g, p, walk)?;
    Ok(VerdictKind::Counterexample { reason: Reason::FairCycle, trace, cycle_start: Some(prefix) })
}

/// Verifies exploration from the given initial configurations.
pub fn verify_configs(p: &Protocol, inits: &[Configuration], model: Model, budget: usize) -> Result<Verdict> {
    let g = StateGraph::explore(p, inits, model, budget)?;
    judge(&g, p)
}

/// Verifies exploration from every initial configuration of `cls`.
pub fn verify_exhaustive(p: &Protocol, cls: &InitClass, model: Model, budget: usize) -> Result<Verdict> {
    verify_configs(p, &initial_configs(cls)?, model, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::builtin;
    use crate::rules::parse_protocol;

    #[test]
    fn five_robot_protocol_explores_seven_nodes() {
        let p = builtin("fsync-phi1-large").unwrap();
        let v = verify_exhaustive(&p, &InitClass::single_block(7, 5), Model::Fsync, 1_000_000).unwrap();
        assert!(v.explores(), "{}", v.label());
        assert!(!v.terminals.is_empty());
    }

    #[test]
    fn wrong_robot_count_fails() {
        let p = builtin("fsync-phi1-large").unwrap();
        let v = verify_exhaustive(&p, &InitClass::single_block(8, 4), Model::Fsync, 1_000_000).unwrap();
        let trace = v.trace().expect("counterexample");
        trace.replay(&p).unwrap();
    }

    #[test]
    fn separating_pair_is_a_fair_cycle() {
        let p = parse_protocol("phi=1\nX: 0(1)1 :: <-").unwrap();
        let v = verify_exhaustive(&p, &InitClass::single_block(4, 2), Model::Ssync, 100_000).unwrap();
        match &v.kind {
            VerdictKind::Counterexample { reason: Reason::FairCycle, trace, cycle_start } => {
                trace.replay(&p).unwrap();
                let start = cycle_start.unwrap();
                let configs: Vec<&Configuration> = trace.configurations().collect();
                assert_eq!(configs[start], configs[configs.len() - 1]);
            }
            other => panic!("expected fair cycle, got {other:?}"),
        }
    }

    #[test]
    fn small_ring_protocol_oscillates_under_ssync() {
        // [2,1,0,1,0]: the lone robot at node 3 may step to node 2 and is
        // then sent back; everybody else is disabled, so the loop is fair.
        let p = builtin("fsync-phi1-small").unwrap();
        let cls = InitClass::single_block(5, 4);
        assert!(verify_exhaustive(&p, &cls, Model::Fsync, 100_000).unwrap().explores());
        let v = verify_exhaustive(&p, &cls, Model::Ssync, 100_000).unwrap();
        let VerdictKind::Counterexample { reason: Reason::FairCycle, trace, .. } = &v.kind else {
            panic!("expected a fair cycle, got {}", v.label())
        };
        trace.replay(&p).unwrap();
    }

    #[test]
    fn budget_is_reported() {
        let p = builtin("fsync-phi1-large").unwrap();
        let v = verify_exhaustive(&p, &InitClass::single_block(9, 5), Model::Async, 10).unwrap();
        assert!(matches!(v.kind, VerdictKind::BudgetExceeded { .. }));
    }

    #[test]
    fn verdict_json_shape() {
        let p = builtin("fsync-phi1-large").unwrap();
        let v = verify_exhaustive(&p, &InitClass::single_block(7, 5), Model::Fsync, 1000).unwrap();
        let j = v.to_json("fsync-phi1-large n=7", None);
        assert_eq!(j["verdict"], "Explores");
        assert!(j["states"].as_u64().unwrap() > 0);
        assert!(j.get("counterexample_trace").is_none());
    }
}
