//! Successor generation on anonymous state keys.

use crate::error::Result;
use crate::exec::{Model, Phase};
use crate::ring::Direction;
use crate::rules::{MoveChoice, Protocol};

use super::state::{code, decode, StateKey};

/// What the scheduler did on one abstract edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum AbsMove {
    /// Per node: how many idle robots moved CW and CCW.
    Sync(Vec<(usize, u8, u8)>),
    Look {
        code: u8,
        dir: Direction,
    },
    Move {
        code: u8,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Succ {
    pub key: StateKey,
    /// Slots (positions in the source's sorted codes) activated by this edge.
    pub label: u16,
    pub mv: AbsMove,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Expansion {
    Expanded {
        terminal: bool,
        /// Slots whose activation is a no-op here (disabled Idle robots);
        /// the scheduler may add them to any step leaving this state.
        free: u16,
    },
    /// The decision for this window is not known yet (synthesis only).
    Blocked(Vec<u8>),
}

/// Decides the move set of a robot from its window; `None` = undecided.
pub(crate) trait Decider {
    fn decide(&mut self, window: &[u8]) -> Result<Option<MoveChoice>>;
}

/// Memoizing decider backed by a protocol.
pub(crate) struct ProtocolDecider<'a> {
    protocol: &'a Protocol,
    memo: rustc_hash::FxHashMap<Box<[u8]>, MoveChoice>,
}

impl<'a> ProtocolDecider<'a> {
    pub fn new(protocol: &'a Protocol) -> Self {
        Self { protocol, memo: Default::default() }
    }
}

impl Decider for ProtocolDecider<'_> {
    fn decide(&mut self, window: &[u8]) -> Result<Option<MoveChoice>> {
        if let Some(&m) = self.memo.get(window) {
            return Ok(Some(m));
        }
        let m = self.protocol.evaluate_window(window)?.moves;
        self.memo.insert(window.into(), m);
        Ok(Some(m))
    }
}

pub(crate) struct Expander {
    pub n: usize,
    pub k: usize,
    pub phi: usize,
    pub model: Model,
}

struct Group {
    node: usize,
    count: u8,
    moves: MoveChoice,
    slots: u16,
}

impl Expander {
    fn window(&self, mults: &[u8], node: usize, buf: &mut Vec<u8>) {
        buf.clear();
        let n = self.n as isize;
        for o in -(self.phi as isize)..=self.phi as isize {
            buf.push(mults[(node as isize + o).rem_euclid(n) as usize]);
        }
    }

    fn all_slots(&self) -> u16 {
        ((1u32 << self.k) - 1) as u16
    }

    /// Appends every successor of `key` to `out` (unsorted, possibly with
    /// duplicate targets).
    pub fn expand(&self, key: &StateKey, d: &mut impl Decider, out: &mut Vec<Succ>) -> Result<Expansion> {
        let codes = key.codes();
        let mults = key.mults(self.n);
        let mut buf = Vec::with_capacity(2 * self.phi + 1);

        // distinct codes with their slot masks
        let mut buckets: Vec<(u8, u16)> = Vec::with_capacity(codes.len());
        for (i, &c) in codes.iter().enumerate() {
            match buckets.last_mut() {
                Some((lc, mask)) if *lc == c => *mask |= 1 << i,
                _ => buckets.push((c, 1 << i)),
            }
        }

        let mut groups = Vec::new();
        let mut free = 0u16;
        let mut pending = false;
        for &(c, slots) in &buckets {
            let (node, phase) = decode(c);
            if phase != Phase::Idle {
                pending = true;
                continue;
            }
            self.window(&mults, node, &mut buf);
            let Some(moves) = d.decide(&buf)? else {
                return Ok(Expansion::Blocked(buf));
            };
            if moves.is_empty() {
                free |= slots;
            } else {
                groups.push(Group { node, count: slots.count_ones() as u8, moves, slots });
            }
        }
        let terminal = !pending && groups.is_empty();
        if terminal {
            return Ok(Expansion::Expanded { terminal, free });
        }
        match self.model {
            Model::Fsync | Model::Ssync => self.expand_sync(key, &groups, out),
            Model::Async => self.expand_async(key, &buckets, &groups, out),
        }
        Ok(Expansion::Expanded { terminal, free })
    }

    fn expand_sync(&self, key: &StateKey, groups: &[Group], out: &mut Vec<Succ>) {
        let fsync = self.model == Model::Fsync;
        // per group: list of (cw, ccw) splits
        let options: Vec<Vec<(u8, u8)>> = groups
            .iter()
            .map(|g| {
                let m = g.count;
                let mut o = Vec::new();
                for a in 0..=m {
                    for b in 0..=m - a {
                        let ok_dirs = (a == 0 || g.moves.cw) && (b == 0 || g.moves.ccw);
                        if ok_dirs && (!fsync || a + b == m) {
                            o.push((a, b));
                        }
                    }
                }
                o
            })
            .collect();
        let mut idx = vec![0usize; groups.len()];
        let mut counts = key.mults(self.n);
        loop {
            let active = idx.iter().zip(&options).any(|(&i, o)| o[i] != (0, 0));
            if active {
                let mut visited = key.visited();
                let mut label = if fsync { self.all_slots() } else { 0 };
                let mut mv = Vec::new();
                counts.copy_from_slice(&key.mults(self.n));
                for ((g, o), &i) in groups.iter().zip(&options).zip(&idx) {
                    let (a, b) = o[i];
                    if a + b == 0 {
                        continue;
                    }
                    label |= g.slots;
                    counts[g.node] -= a + b;
                    for (dir, c) in [(Direction::Cw, a), (Direction::Ccw, b)] {
                        if c > 0 {
                            let dest = dir.step(g.node, self.n);
                            counts[dest] += c;
                            visited |= 1 << dest;
                        }
                    }
                    mv.push((g.node, a, b));
                }
                let mut codes: Vec<u8> = counts
                    .iter()
                    .enumerate()
                    .flat_map(|(node, &m)| std::iter::repeat_n(code(node, Phase::Idle), m as usize))
                    .collect();
                out.push(Succ { key: StateKey::from_codes(&mut codes, visited), label, mv: AbsMove::Sync(mv) });
            }
            // odometer
            let mut i = 0;
            loop {
                if i == idx.len() {
                    return;
                }
                idx[i] += 1;
                if idx[i] < options[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    fn expand_async(&self, key: &StateKey, buckets: &[(u8, u16)], groups: &[Group], out: &mut Vec<Succ>) {
        let codes = key.codes();
        let replace = |from: u8, to: u8, visited: u64| {
            let mut c = codes.to_vec();
            let i = c.iter().position(|&x| x == from).expect("bucket present");
            c[i] = to;
            StateKey::from_codes(&mut c, visited)
        };
        for g in groups {
            let from = code(g.node, Phase::Idle);
            for dir in g.moves.directions() {
                out.push(Succ {
                    key: replace(from, code(g.node, Phase::Pending(dir)), key.visited()),
                    label: g.slots,
                    mv: AbsMove::Look { code: from, dir },
                });
            }
        }
        for &(c, slots) in buckets {
            let (node, phase) = decode(c);
            if let Phase::Pending(dir) = phase {
                let dest = dir.step(node, self.n);
                out.push(Succ {
                    key: replace(c, code(dest, Phase::Idle), key.visited() | 1 << dest),
                    label: slots,
                    mv: AbsMove::Move { code: c },
                });
            }
        }
    }
}
