//! Operational semantics of the three scheduler models.
//!
//! Robots carry identities here so that fairness and traces can talk about
//! individual robots; protocols never see them. Under ASYNC a robot's cycle
//! is split into two atomic operations: `Look` (snapshot + compute, leaving
//! the robot `Pending` with a direction) and `Move` (one hop in the stored
//! direction, possibly based on an outdated snapshot).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{Configuration, Direction};
use crate::rules::{MoveChoice, Protocol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Fsync,
    Ssync,
    Async,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Fsync => "fsync",
            Model::Ssync => "ssync",
            Model::Async => "async",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsync" => Ok(Model::Fsync),
            "ssync" | "atom" => Ok(Model::Ssync),
            "async" | "corda" => Ok(Model::Async),
            other => Err(Error::InvalidConfiguration(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    /// Looked and computed; owes a move in this direction.
    Pending(Direction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RobotState {
    pub node: usize,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionState {
    pub model: Model,
    n: usize,
    robots: Vec<RobotState>,
    visited: Vec<bool>,
}

impl ExecutionState {
    pub fn from_robots(n: usize, model: Model, robots: Vec<RobotState>, visited: Vec<bool>) -> Result<Self> {
        if visited.len() != n {
            return Err(Error::InvalidConfiguration("visited set has wrong length".into()));
        }
        if let Some(r) = robots.iter().find(|r| r.node >= n) {
            return Err(Error::NodeOutOfRange { node: r.node, n });
        }
        if model != Model::Async && robots.iter().any(|r| r.phase != Phase::Idle) {
            return Err(Error::InvalidConfiguration("pending robots only exist under ASYNC".into()));
        }
        Ok(Self { model, n, robots, visited })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.robots.len()
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn visited(&self) -> &[bool] {
        &self.visited
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    pub fn all_visited(&self) -> bool {
        self.visited.iter().all(|&v| v)
    }

    pub fn configuration(&self) -> Configuration {
        let mut mults = vec![0u8; self.n];
        for r in &self.robots {
            mults[r.node] += 1;
        }
        Configuration::new(mults).expect("n >= 1")
    }

    pub fn has_pending(&self) -> bool {
        self.robots.iter().any(|r| r.phase != Phase::Idle)
    }
}

/// One Idle robot per unit of multiplicity, numbered by ascending node.
pub fn init_state(c: &Configuration, model: Model) -> Result<ExecutionState> {
    init_state_with(c, model, false)
}

/// Like [`init_state`]; `allow_towers` lifts the towerless requirement.
pub fn init_state_with(c: &Configuration, model: Model, allow_towers: bool) -> Result<ExecutionState> {
    if !allow_towers && !c.is_towerless() {
        return Err(Error::NotTowerless(c.to_string()));
    }
    if c.k() == 0 {
        return Err(Error::EmptyConfiguration);
    }
    let robots = c
        .mults()
        .iter()
        .enumerate()
        .flat_map(|(node, &m)| (0..m).map(move |_| RobotState { node, phase: Phase::Idle }))
        .collect();
    let visited = c.mults().iter().map(|&m| m > 0).collect();
    Ok(ExecutionState { model, n: c.n(), robots, visited })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    /// A full Look-Compute-Move cycle (FSYNC/SSYNC).
    Lcm,
    /// ASYNC Look + Compute.
    Look,
    /// ASYNC Move.
    Move,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Activation {
    pub robot: usize,
    pub op: Op,
    /// Direction resolution; required when the robot's choice is ambiguous.
    pub dir: Option<Direction>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchedulerChoice {
    pub activations: Vec<Activation>,
}

impl SchedulerChoice {
    pub fn new(activations: Vec<Activation>) -> Self {
        Self { activations }
    }

    pub fn look(robot: usize, dir: Option<Direction>) -> Self {
        Self::new(vec![Activation { robot, op: Op::Look, dir }])
    }

    pub fn mv(robot: usize) -> Self {
        Self::new(vec![Activation { robot, op: Op::Move, dir: None }])
    }
}

/// What a robot can do right now.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotStatus {
    /// For Idle robots the protocol's choice; for Pending robots the stored direction.
    pub moves: MoveChoice,
    /// Index of the rule that produced `moves` (Idle robots only).
    pub rule: Option<usize>,
    pub pending: bool,
}

impl RobotStatus {
    pub fn is_enabled(&self) -> bool {
        !self.moves.is_empty()
    }
}

pub fn enabled_robots(s: &ExecutionState, p: &Protocol) -> Result<Vec<RobotStatus>> {
    let c = s.configuration();
    let mut per_node: Vec<Option<(MoveChoice, Option<usize>)>> = vec![None; s.n];
    s.robots
        .iter()
        .map(|r| match r.phase {
            Phase::Pending(d) => Ok(RobotStatus {
                moves: match d {
                    Direction::Cw => MoveChoice::CW,
                    Direction::Ccw => MoveChoice::CCW,
                },
                rule: None,
                pending: true,
            }),
            Phase::Idle => {
                let (moves, rule) = match per_node[r.node] {
                    Some(e) => e,
                    None => {
                        let ev = p.evaluate_at(&c, r.node)?;
                        per_node[r.node] = Some((ev.moves, ev.rule));
                        (ev.moves, ev.rule)
                    }
                };
                Ok(RobotStatus { moves, rule, pending: false })
            }
        })
        .collect()
}

pub fn is_terminal(s: &ExecutionState, p: &Protocol) -> Result<bool> {
    if s.has_pending() {
        return Ok(false);
    }
    Ok(enabled_robots(s, p)?.iter().all(|st| !st.is_enabled()))
}

/// One operation as recorded in a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpRecord {
    pub robot: usize,
    pub op: Op,
    /// Label of the rule that fired (Look / Lcm only).
    pub rule: Option<String>,
    /// Direction taken (Lcm, Move) or stored (Look); `None` for a no-op.
    pub dir: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub state: ExecutionState,
    pub ops: Vec<OpRecord>,
    /// Nodes visited for the first time by this step, ascending.
    pub new_visited: Vec<usize>,
}

fn resolve(robot: usize, moves: MoveChoice, dir: Option<Direction>) -> Result<Option<Direction>> {
    if moves.is_empty() {
        return match dir {
            None => Ok(None),
            Some(d) => Err(Error::IllegalChoice(format!("robot {robot} is disabled but asked to move {d}"))),
        };
    }
    match (moves.single(), dir) {
        (Some(d), None) => Ok(Some(d)),
        (_, Some(d)) if moves.contains(d) => Ok(Some(d)),
        (None, None) => {
            Err(Error::IllegalChoice(format!("robot {robot} has an ambiguous move {moves} and no resolution")))
        }
        (_, Some(d)) => Err(Error::IllegalChoice(format!("robot {robot} cannot move {d}, allowed {moves}"))),
    }
}

/// Applies a scheduler choice and reports what happened.
pub fn apply(s: &ExecutionState, p: &Protocol, ch: &SchedulerChoice) -> Result<Transition> {
    let acts = &ch.activations;
    if acts.is_empty() {
        return Err(Error::IllegalChoice("no robot activated".into()));
    }
    let mut seen = vec![false; s.k()];
    for a in acts {
        if a.robot >= s.k() {
            return Err(Error::IllegalChoice(format!("no robot {}", a.robot)));
        }
        if std::mem::replace(&mut seen[a.robot], true) {
            return Err(Error::IllegalChoice(format!("robot {} activated twice", a.robot)));
        }
    }
    let status = enabled_robots(s, p)?;
    let label = |i: Option<usize>| i.map(|i| p.rules[i].label.clone());
    let mut next = s.clone();
    let mut ops = Vec::with_capacity(acts.len());
    let mut moved = Vec::new();

    match s.model {
        Model::Fsync | Model::Ssync => {
            if s.model == Model::Fsync {
                let enabled = status.iter().filter(|st| st.is_enabled()).count();
                let covered = acts.iter().filter(|a| status[a.robot].is_enabled()).count();
                if covered != enabled || covered != acts.len() {
                    return Err(Error::IllegalChoice("FSYNC must activate exactly the enabled robots".into()));
                }
            }
            for a in acts {
                if a.op != Op::Lcm {
                    return Err(Error::IllegalChoice(format!("{:?} is not a synchronous op", a.op)));
                }
                let st = status[a.robot];
                let dir = resolve(a.robot, st.moves, a.dir)?;
                if let Some(d) = dir {
                    moved.push((a.robot, d));
                }
                ops.push(OpRecord { robot: a.robot, op: Op::Lcm, rule: label(st.rule), dir });
            }
        }
        Model::Async => {
            let [a] = acts.as_slice() else {
                return Err(Error::IllegalChoice("ASYNC activates exactly one robot".into()));
            };
            let robot = s.robots[a.robot];
            match (a.op, robot.phase) {
                (Op::Look, Phase::Idle) => {
                    let st = status[a.robot];
                    let dir = resolve(a.robot, st.moves, a.dir)?;
                    if let Some(d) = dir {
                        next.robots[a.robot].phase = Phase::Pending(d);
                    }
                    ops.push(OpRecord { robot: a.robot, op: Op::Look, rule: label(st.rule), dir });
                }
                (Op::Move, Phase::Pending(d)) => {
                    if a.dir.is_some_and(|x| x != d) {
                        return Err(Error::IllegalChoice(format!(
                            "robot {} is pending {d}, not {}",
                            a.robot,
                            a.dir.unwrap()
                        )));
                    }
                    next.robots[a.robot].phase = Phase::Idle;
                    moved.push((a.robot, d));
                    ops.push(OpRecord { robot: a.robot, op: Op::Move, rule: None, dir: Some(d) });
                }
                (op, phase) => {
                    return Err(Error::IllegalChoice(format!("robot {} cannot {op:?} while {phase:?}", a.robot)))
                }
            }
        }
    }

    let mut new_visited = Vec::new();
    for (r, d) in moved {
        let dest = d.step(next.robots[r].node, s.n);
        next.robots[r].node = dest;
        if !std::mem::replace(&mut next.visited[dest], true) {
            new_visited.push(dest);
        }
    }
    new_visited.sort_unstable();
    Ok(Transition { state: next, ops, new_visited })
}

pub fn step(s: &ExecutionState, p: &Protocol, ch: &SchedulerChoice) -> Result<ExecutionState> {
    apply(s, p, ch).map(|t| t.state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Terminated,
    MaxStepsReached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub ops: Vec<OpRecord>,
    pub config: Configuration,
    pub new_visited: Vec<usize>,
}

impl TraceStep {
    pub fn choice(&self) -> SchedulerChoice {
        SchedulerChoice::new(self.ops.iter().map(|o| Activation { robot: o.robot, op: o.op, dir: o.dir }).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub protocol: String,
    pub phi: usize,
    pub model: Model,
    pub seed: Option<u64>,
    pub init: Configuration,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
    /// Visited count after the last step.
    pub visited_count: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    protocol: String,
    phi: usize,
    n: usize,
    k: usize,
    model: Model,
    seed: Option<u64>,
    init: Configuration,
}

#[derive(Serialize, Deserialize)]
struct Footer {
    outcome: Outcome,
    steps: usize,
    visited_count: usize,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.init.n()
    }

    pub fn k(&self) -> usize {
        self.init.k()
    }

    pub fn final_config(&self) -> &Configuration {
        self.steps.last().map_or(&self.init, |s| &s.config)
    }

    /// Initial configuration followed by every recorded configuration.
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.init).chain(self.steps.iter().map(|s| &s.config))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = Header {
            protocol: self.protocol.clone(),
            phi: self.phi,
            n: self.n(),
            k: self.k(),
            model: self.model,
            seed: self.seed,
            init: self.init.clone(),
        };
        out.push_str(&serde_json::to_string(&header).expect("serializable"));
        out.push('\n');
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("serializable"));
            out.push('\n');
        }
        let footer = Footer { outcome: self.outcome, steps: self.steps.len(), visited_count: self.visited_count };
        out.push_str(&serde_json::to_string(&footer).expect("serializable"));
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let err = |line: usize, e: serde_json::Error| Error::Trace(format!("line {line}: {e}"));
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() < 2 {
            return Err(Error::Trace("need at least a header and a footer line".into()));
        }
        let header: Header = serde_json::from_str(lines[0]).map_err(|e| err(1, e))?;
        let footer: Footer = serde_json::from_str(lines[lines.len() - 1]).map_err(|e| err(lines.len(), e))?;
        let steps = lines[1..lines.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, l)| serde_json::from_str::<TraceStep>(l).map_err(|e| err(i + 2, e)))
            .collect::<Result<Vec<_>>>()?;
        if steps.len() != footer.steps {
            return Err(Error::Trace(format!("footer announces {} steps, found {}", footer.steps, steps.len())));
        }
        if header.n != header.init.n() || header.k != header.init.k() {
            return Err(Error::Trace("header n/k disagree with init".into()));
        }
        Ok(Trace {
            protocol: header.protocol,
            phi: header.phi,
            model: header.model,
            seed: header.seed,
            init: header.init,
            steps,
            outcome: footer.outcome,
            visited_count: footer.visited_count,
        })
    }

    /// Re-executes every recorded choice and checks that each recorded
    /// configuration, visit and fired rule is reproduced. Returns the final state.
    pub fn replay(&self, p: &Protocol) -> Result<ExecutionState> {
        let mut state = init_state_with(&self.init, self.model, true)?;
        for s in &self.steps {
            let t = apply(&state, p, &s.choice()).map_err(|e| Error::Trace(format!("step {}: {e}", s.step)))?;
            if t.state.configuration() != s.config {
                return Err(Error::Trace(format!(
                    "step {}: recorded {} but replay gives {}",
                    s.step,
                    s.config,
                    t.state.configuration()
                )));
            }
            if t.new_visited != s.new_visited || t.ops != s.ops {
                return Err(Error::Trace(format!("step {}: visits or fired rules differ", s.step)));
            }
            state = t.state;
        }
        if state.visited_count() != self.visited_count {
            return Err(Error::Trace("final visited count differs".into()));
        }
        let terminal = is_terminal(&state, p)?;
        if terminal != (self.outcome == Outcome::Terminated) {
            return Err(Error::Trace("outcome does not match the final state".into()));
        }
        Ok(state)
    }
}

/// Random scheduler that is fair by construction: a robot left unactivated
/// for `k·n` consecutive choices is scheduled next.
pub struct FairScheduler {
    rng: ChaCha8Rng,
    since: Vec<usize>,
    patience: usize,
}

impl FairScheduler {
    pub fn new(seed: u64, k: usize, n: usize) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), since: vec![0; k], patience: k * n }
    }

    fn starving(&self) -> Option<usize> {
        let (r, &age) = self.since.iter().enumerate().max_by_key(|(i, &a)| (a, std::cmp::Reverse(*i)))?;
        (age >= self.patience).then_some(r)
    }

    fn pick_dir(&mut self, moves: MoveChoice) -> Option<Direction> {
        if moves.is_ambiguous() {
            Some(if self.rng.gen::<bool>() { Direction::Cw } else { Direction::Ccw })
        } else {
            moves.single()
        }
    }

    /// Picks the next choice for `s`, or `None` when nothing can happen.
    pub fn choose(&mut self, s: &ExecutionState, status: &[RobotStatus]) -> Option<SchedulerChoice> {
        let k = s.k();
        let chosen: Vec<usize> = match s.model {
            Model::Fsync => {
                let enabled: Vec<usize> = (0..k).filter(|&r| status[r].is_enabled()).collect();
                if enabled.is_empty() {
                    return None;
                }
                // every robot looks in every synchronous round
                self.since.iter_mut().for_each(|a| *a = 0);
                let acts = enabled
                    .into_iter()
                    .map(|r| Activation { robot: r, op: Op::Lcm, dir: self.pick_dir(status[r].moves) })
                    .collect();
                return Some(SchedulerChoice::new(acts));
            }
            Model::Ssync => {
                let mut set: Vec<usize> = (0..k).filter(|_| self.rng.gen::<bool>()).collect();
                if let Some(r) = self.starving() {
                    if !set.contains(&r) {
                        set.push(r);
                        set.sort_unstable();
                    }
                }
                if set.is_empty() {
                    set.push(self.rng.gen_range(0..k));
                }
                set
            }
            Model::Async => vec![self.starving().unwrap_or_else(|| self.rng.gen_range(0..k))],
        };
        for a in self.since.iter_mut() {
            *a += 1;
        }
        let acts = chosen
            .into_iter()
            .map(|r| {
                self.since[r] = 0;
                let op = match (s.model, s.robots[r].phase) {
                    (Model::Async, Phase::Idle) => Op::Look,
                    (Model::Async, Phase::Pending(_)) => Op::Move,
                    _ => Op::Lcm,
                };
                let dir = match op {
                    Op::Move => None,
                    _ => self.pick_dir(status[r].moves),
                };
                Activation { robot: r, op, dir }
            })
            .collect();
        Some(SchedulerChoice::new(acts))
    }
}

/// Runs the protocol under a seeded fair random scheduler until a terminal
/// state or `max_steps` steps.
pub fn simulate(p: &Protocol, c: &Configuration, model: Model, seed: u64, max_steps: usize) -> Result<Trace> {
    let mut state = init_state(c, model)?;
    let mut sched = FairScheduler::new(seed, state.k(), state.n());
    let mut steps = Vec::new();
    let outcome = loop {
        let status = enabled_robots(&state, p)?;
        let terminal = !state.has_pending() && status.iter().all(|s| !s.is_enabled());
        if terminal {
            break Outcome::Terminated;
        }
        if steps.len() >= max_steps {
            break Outcome::MaxStepsReached;
        }
        let choice = sched.choose(&state, &status).expect("non-terminal state has a choice");
        let t = apply(&state, p, &choice)?;
        steps.push(TraceStep {
            step: steps.len() + 1,
            ops: t.ops,
            config: t.state.configuration(),
            new_visited: t.new_visited,
        });
        state = t.state;
    };
    Ok(Trace {
        protocol: p.name.clone(),
        phi: p.phi,
        model,
        seed: Some(seed),
        init: c.clone(),
        steps,
        outcome,
        visited_count: state.visited_count(),
    })
}
