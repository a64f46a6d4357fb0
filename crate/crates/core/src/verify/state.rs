//! Anonymous state keys: robots are interchangeable within a (node, phase) bucket.

use crate::error::{Error, Result};
use crate::exec::{ExecutionState, Model, Phase, RobotState};
use crate::ring::{Configuration, Direction};

pub const MAX_ROBOTS: usize = 16;
pub const MAX_NODES: usize = 64;
const EMPTY: u8 = u8::MAX;

/// Bucket code of a robot: `3·node + phase`, phase 0 = Idle, 1 = Pending CW,
/// 2 = Pending CCW.
pub fn code(node: usize, phase: Phase) -> u8 {
    let p = match phase {
        Phase::Idle => 0,
        Phase::Pending(Direction::Cw) => 1,
        Phase::Pending(Direction::Ccw) => 2,
    };
    (node * 3 + p) as u8
}

pub fn decode(code: u8) -> (usize, Phase) {
    let phase = match code % 3 {
        0 => Phase::Idle,
        1 => Phase::Pending(Direction::Cw),
        _ => Phase::Pending(Direction::Ccw),
    };
    (code as usize / 3, phase)
}

pub(crate) fn check_size(n: usize, k: usize) -> Result<()> {
    if n > MAX_NODES || k > MAX_ROBOTS {
        return Err(Error::TooLarge(format!("n={n}, k={k}; the verifier handles n <= {MAX_NODES}, k <= {MAX_ROBOTS}")));
    }
    Ok(())
}

/// Sorted bucket codes of all robots plus the visited bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    codes: [u8; MAX_ROBOTS],
    visited: u64,
}

impl StateKey {
    pub(crate) fn from_codes(codes: &mut [u8], visited: u64) -> Self {
        codes.sort_unstable();
        let mut out = [EMPTY; MAX_ROBOTS];
        out[..codes.len()].copy_from_slice(codes);
        Self { codes: out, visited }
    }

    pub fn from_state(s: &ExecutionState) -> Result<Self> {
        check_size(s.n(), s.k())?;
        let mut codes: Vec<u8> = s.robots().iter().map(|r| code(r.node, r.phase)).collect();
        let visited = s.visited().iter().enumerate().filter(|(_, &v)| v).fold(0u64, |m, (i, _)| m | 1 << i);
        Ok(Self::from_codes(&mut codes, visited))
    }

    pub fn codes(&self) -> &[u8] {
        let k = self.codes.iter().position(|&c| c == EMPTY).unwrap_or(MAX_ROBOTS);
        &self.codes[..k]
    }

    pub fn visited(&self) -> u64 {
        self.visited
    }

    pub fn visited_count(&self) -> usize {
        self.visited.count_ones() as usize
    }

    pub fn all_visited(&self, n: usize) -> bool {
        self.visited_count() == n
    }

    pub fn has_pending(&self) -> bool {
        self.codes().iter().any(|c| c % 3 != 0)
    }

    pub fn mults(&self, n: usize) -> Vec<u8> {
        let mut m = vec![0u8; n];
        for &c in self.codes() {
            m[c as usize / 3] += 1;
        }
        m
    }

    pub fn configuration(&self, n: usize) -> Configuration {
        Configuration::new(self.mults(n)).expect("n >= 1")
    }

    /// A concrete state with robots numbered in code order.
    pub fn to_state(&self, n: usize, model: Model) -> ExecutionState {
        let robots = self
            .codes()
            .iter()
            .map(|&c| {
                let (node, phase) = decode(c);
                RobotState { node, phase }
            })
            .collect();
        let visited = (0..n).map(|i| self.visited >> i & 1 == 1).collect();
        ExecutionState::from_robots(n, model, robots, visited).expect("valid key")
    }
}
