//! Exploration of anonymous rings by myopic robots: configurations and views,
//! rule-based protocols, FSYNC/SSYNC/ASYNC execution and an exhaustive verifier.

pub mod error;
pub mod exec;
pub mod library;
pub mod ring;
pub mod rules;
pub mod verify;

pub use error::{Error, Result};
pub use exec::{
    apply, enabled_robots, init_state, init_state_with, is_terminal, simulate, step, Activation, ExecutionState, Model,
    Op, OpRecord, Outcome, Phase, RobotState, RobotStatus, SchedulerChoice, Trace, TraceStep, Transition,
};
pub use library::{builtin, builtin_info, detect_named, initial_configs, InitClass, InitKind, NamedConfig, BUILTINS};
pub use ring::{Block, BlockKind, BlockReport, Configuration, Direction, Symmetry, View};
pub use rules::{parse_protocol, parse_protocol_named, Action, Guard, MoveChoice, Protocol, Rule, Slot};
pub use verify::{
    default_budget, fair_cycle_exists, judge, monitor_distinguishability, synthesize, verify_configs,
    verify_exhaustive, Completion, CycleWitness, LabeledGraph, Reason, StateGraph, StateKey, SynthesisResult,
    SynthesisStats, Verdict, VerdictKind,
};
