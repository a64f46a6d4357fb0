//! Turning abstract paths into concrete, replayable traces.

use crate::error::{Error, Result};
use crate::exec::{
    apply, init_state_with, Activation, ExecutionState, Model, Op, Outcome, Phase, SchedulerChoice, Trace, TraceStep,
};
use crate::ring::Direction;
use crate::rules::Protocol;

use super::expand::{AbsMove, Expander, ProtocolDecider, Succ};
use super::graph::StateGraph;
use super::state::{decode, StateKey};

struct Builder<'a> {
    g: &'a StateGraph,
    p: &'a Protocol,
    ex: Expander,
    decider: ProtocolDecider<'a>,
    init: crate::ring::Configuration,
    state: ExecutionState,
    last: Vec<usize>,
    clock: usize,
    steps: Vec<TraceStep>,
}

impl<'a> Builder<'a> {
    fn new(g: &'a StateGraph, p: &'a Protocol, root: usize) -> Result<Self> {
        let init = g.configuration(root);
        let state = init_state_with(&init, g.model, true)?;
        Ok(Self {
            init,
            g,
            p,
            ex: Expander { n: g.n, k: g.k, phi: g.phi, model: g.model },
            decider: ProtocolDecider::new(p),
            last: vec![0; state.k()],
            state,
            clock: 0,
            steps: Vec::new(),
        })
    }

    /// Robots in bucket `code`, least recently activated first.
    fn lru(&self, code: u8) -> Vec<usize> {
        let (node, phase) = decode(code);
        let mut rs: Vec<usize> = (0..self.state.k())
            .filter(|&r| {
                let x = self.state.robots()[r];
                x.node == node && x.phase == phase
            })
            .collect();
        rs.sort_by_key(|&r| (self.last[r], r));
        rs
    }

    fn choice(&self, mv: &AbsMove) -> SchedulerChoice {
        let idle = |node: usize| super::state::code(node, Phase::Idle);
        let acts = match mv {
            AbsMove::Sync(groups) => groups
                .iter()
                .flat_map(|&(node, a, b)| {
                    let rs = self.lru(idle(node));
                    let dirs = std::iter::repeat_n(Direction::Cw, a as usize)
                        .chain(std::iter::repeat_n(Direction::Ccw, b as usize));
                    rs.into_iter()
                        .zip(dirs)
                        .map(|(robot, d)| Activation { robot, op: Op::Lcm, dir: Some(d) })
                        .collect::<Vec<_>>()
                })
                .collect(),
            AbsMove::Look { code, dir } => {
                vec![Activation { robot: self.lru(*code)[0], op: Op::Look, dir: Some(*dir) }]
            }
            AbsMove::Move { code } => vec![Activation { robot: self.lru(*code)[0], op: Op::Move, dir: None }],
        };
        SchedulerChoice::new(acts)
    }

    fn push(&mut self, choice: &SchedulerChoice) -> Result<()> {
        let t = apply(&self.state, self.p, choice)?;
        self.clock += 1;
        if self.g.model == Model::Fsync {
            self.last.iter_mut().for_each(|l| *l = self.clock);
        } else {
            for a in &choice.activations {
                self.last[a.robot] = self.clock;
            }
        }
        self.steps.push(TraceStep {
            step: self.steps.len() + 1,
            ops: t.ops,
            config: t.state.configuration(),
            new_visited: t.new_visited,
        });
        self.state = t.state;
        Ok(())
    }

    /// A no-op activation of the least recently activated robot in a
    /// disabled bucket.
    fn noop(&mut self, code: u8) -> Result<()> {
        let robot = self.lru(code)[0];
        let op = if self.g.model == Model::Async { Op::Look } else { Op::Lcm };
        self.push(&SchedulerChoice::new(vec![Activation { robot, op, dir: None }]))
    }

    /// Follows edge `s -> t`, activating robots idle since `since` when the
    /// scheduler is free to.
    fn follow(&mut self, s: usize, t: usize, since: Option<usize>) -> Result<()> {
        let key = StateKey::from_state(&self.state)?;
        debug_assert_eq!(&key, self.g.key(s));
        let mut succ: Vec<Succ> = Vec::new();
        self.ex.expand(&key, &mut self.decider, &mut succ)?;
        let target = self.g.key(t);
        let oldest = |b: &Self, label: u16| {
            key.codes()
                .iter()
                .enumerate()
                .filter(|(i, _)| label >> i & 1 == 1)
                .flat_map(|(_, &c)| b.lru(c).first().map(|&r| b.last[r]))
                .min()
                .unwrap_or(usize::MAX)
        };
        let pick = succ
            .iter()
            .filter(|x| &x.key == target)
            .min_by_key(|x| oldest(self, x.label))
            .ok_or_else(|| Error::Trace("abstract edge has no concrete counterpart".into()))?
            .mv
            .clone();
        if let (Some(since), false) = (since, self.g.model == Model::Fsync) {
            // activate starving robots in disabled buckets for free
            let free = self.g.free_slots(s);
            let mut codes: Vec<u8> =
                key.codes().iter().enumerate().filter(|(i, _)| free >> i & 1 == 1).map(|(_, &c)| c).collect();
            codes.dedup();
            for c in codes {
                if self.lru(c).iter().any(|&r| self.last[r] <= since) {
                    self.noop(c)?;
                }
            }
        }
        let ch = self.choice(&pick);
        self.push(&ch)?;
        let reached = StateKey::from_state(&self.state)?;
        if &reached != target {
            return Err(Error::Trace("concretized step missed its abstract target".into()));
        }
        Ok(())
    }

    fn finish(self, outcome: Outcome) -> Trace {
        Trace {
            protocol: self.p.name.clone(),
            phi: self.p.phi,
            model: self.g.model,
            seed: None,
            init: self.init,
            visited_count: self.state.visited_count(),
            steps: self.steps,
            outcome,
        }
    }
}

/// Trace from a root to state `s` along BFS parents.
pub(crate) fn path_trace(g: &StateGraph, p: &Protocol, s: usize) -> Result<Trace> {
    let path = g.path_to(s);
    let mut b = Builder::new(g, p, path[0])?;
    for w in path.windows(2) {
        b.follow(w[0], w[1], None)?;
    }
    let outcome = if g.is_terminal(s) { Outcome::Terminated } else { Outcome::MaxStepsReached };
    Ok(b.finish(outcome))
}

/// Lasso into a fair component: BFS prefix to `walk`'s first state, then the
/// walk repeated until every robot has been activated since the loop began.
/// Returns the trace and the number of prefix steps.
pub(crate) fn lasso_trace(g: &StateGraph, p: &Protocol, walk: &[(usize, usize)]) -> Result<(Trace, usize)> {
    let entry = walk[0].0;
    let path = g.path_to(entry);
    let mut b = Builder::new(g, p, path[0])?;
    for w in path.windows(2) {
        b.follow(w[0], w[1], None)?;
    }
    let prefix = b.steps.len();
    let since = b.clock;
    for _ in 0..=2 * g.k {
        for &(s, e) in walk {
            b.follow(s, g.edge_target(e), Some(since))?;
        }
        if b.last.iter().all(|&l| l > since) {
            break;
        }
    }
    Ok((b.finish(Outcome::MaxStepsReached), prefix))
}
