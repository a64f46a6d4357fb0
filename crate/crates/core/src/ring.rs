//! Configurations on anonymous, unoriented rings.
//!
//! A [`Configuration`] is the cyclic vector of node multiplicities. Node
//! indices are internal bookkeeping only: robots never see them, and two
//! configurations that differ by a rotation or a reflection of the ring are
//! indistinguishable to the robots. [`Direction::Cw`] is the direction of
//! increasing index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global direction of travel along the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Towards index `i + 1`.
    #[serde(rename = "cw")]
    Cw,
    /// Towards index `i - 1`.
    #[serde(rename = "ccw")]
    Ccw,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Cw => Direction::Ccw,
            Direction::Ccw => Direction::Cw,
        }
    }

    /// Neighbor of `node` in this direction on a ring of size `n`.
    pub fn step(self, node: usize, n: usize) -> usize {
        match self {
            Direction::Cw => (node + 1) % n,
            Direction::Ccw => (node + n - 1) % n,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Cw => "cw",
            Direction::Ccw => "ccw",
        })
    }
}

/// Multiplicity of every node of the ring, index taken modulo `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    mults: Vec<u8>,
}

impl Configuration {
    pub fn new(mults: Vec<u8>) -> Result<Self> {
        if mults.is_empty() {
            return Err(Error::InvalidConfiguration("ring must have at least one node".into()));
        }
        Ok(Self { mults })
    }

    /// `k` robots on consecutive nodes `0..k` of an `n`-ring.
    pub fn block(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::TooManyRobots { k, n });
        }
        let mut mults = vec![0; n];
        mults[..k].iter_mut().for_each(|m| *m = 1);
        Self::new(mults)
    }

    /// Builds a configuration from robot positions (repeats make towers).
    pub fn from_positions(n: usize, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mults = vec![0u8; n];
        for p in positions {
            if p >= n {
                return Err(Error::NodeOutOfRange { node: p, n });
            }
            mults[p] += 1;
        }
        Self::new(mults)
    }

    pub fn n(&self) -> usize {
        self.mults.len()
    }

    /// Robot count.
    pub fn k(&self) -> usize {
        self.mults.iter().map(|&m| m as usize).sum()
    }

    pub fn mults(&self) -> &[u8] {
        &self.mults
    }

    /// Multiplicity at `node`, index taken modulo `n` (negative offsets allowed).
    pub fn at(&self, node: isize) -> u8 {
        let n = self.n() as isize;
        self.mults[node.rem_euclid(n) as usize]
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.mults.iter().enumerate().filter(|(_, &m)| m > 0).map(|(i, _)| i)
    }

    pub fn rotate(&self, offset: usize) -> Self {
        let n = self.n();
        let mults = (0..n).map(|j| self.mults[(j + offset) % n]).collect();
        Self { mults }
    }

    /// Reversal fixing index 0.
    pub fn mirror(&self) -> Self {
        let n = self.n();
        let mults = (0..n).map(|j| self.mults[(n - j) % n]).collect();
        Self { mults }
    }

    pub fn canonical(&self) -> Self {
        self.canonical_with_symmetry().0
    }

    /// Lexicographic minimum over all rotations of the word and of its
    /// mirror, together with a symmetry that maps `self` onto it.
    pub fn canonical_with_symmetry(&self) -> (Self, Symmetry) {
        let n = self.n();
        let mirrored = self.mirror();
        let mut best_sym = Symmetry::identity();
        let mut best = self.clone();
        for (mirror, base) in [(false, self), (true, &mirrored)] {
            for offset in 0..n {
                if rotation_less(base, offset, &best) {
                    best = base.rotate(offset);
                    best_sym = Symmetry { mirrored: mirror, offset };
                }
            }
        }
        (best, best_sym)
    }

    pub fn indistinguishable(&self, other: &Self) -> Result<bool> {
        if self.n() != other.n() {
            return Err(Error::IncomparableRings(self.n(), other.n()));
        }
        Ok(self.canonical() == other.canonical())
    }

    pub fn is_towerless(&self) -> bool {
        self.mults.iter().all(|&m| m <= 1)
    }

    /// The sensor output of a robot at `node` with radius `phi`, read in the
    /// ring's internal CW orientation. Windows longer than the ring wrap.
    pub fn view_at(&self, node: usize, phi: usize) -> Result<View> {
        if node >= self.n() {
            return Err(Error::NodeOutOfRange { node, n: self.n() });
        }
        if self.mults[node] == 0 {
            return Err(Error::EmptyNode(node));
        }
        let phi_i = phi as isize;
        let window = (-phi_i..=phi_i).map(|j| self.at(node as isize + j)).collect();
        Ok(View { window })
    }

    /// Maximal chains of occupied nodes, see [`BlockKind`].
    pub fn structure(&self, d: usize, kind: BlockKind) -> Result<BlockReport> {
        structure(self, d, kind)
    }
}

/// Compares `base.rotate(offset)` with `best` without allocating.
fn rotation_less(base: &Configuration, offset: usize, best: &Configuration) -> bool {
    let n = base.n();
    for j in 0..n {
        let a = base.mults[(j + offset) % n];
        let b = best.mults[j];
        if a != b {
            return a < b;
        }
    }
    false
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.mults.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mults = s
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|_| Error::InvalidConfiguration(format!("bad multiplicity `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(mults)
    }
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A ring symmetry: optional mirror (about index 0) followed by a rotation.
///
/// `apply(c)[j] = c[source(j)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symmetry {
    pub mirrored: bool,
    pub offset: usize,
}

impl Symmetry {
    pub fn identity() -> Self {
        Self { mirrored: false, offset: 0 }
    }

    pub fn apply(&self, c: &Configuration) -> Configuration {
        if self.mirrored {
            c.mirror().rotate(self.offset)
        } else {
            c.rotate(self.offset)
        }
    }

    /// Node of the original ring that lands on `j`.
    pub fn source(&self, j: usize, n: usize) -> usize {
        let r = (j + self.offset) % n;
        if self.mirrored {
            (n - r) % n
        } else {
            r
        }
    }

    /// Where node `i` of the original ring lands.
    pub fn image(&self, i: usize, n: usize) -> usize {
        let i = i % n;
        let off = self.offset % n;
        if self.mirrored {
            (2 * n - i - off) % n
        } else {
            (i + n - off) % n
        }
    }

    pub fn direction(&self, d: Direction) -> Direction {
        if self.mirrored {
            d.flip()
        } else {
            d
        }
    }
}

/// The `2φ+1` multiplicities around an occupied node, `x_{-φ} .. x_{φ}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct View {
    window: Vec<u8>,
}

impl View {
    pub fn new(window: Vec<u8>) -> Result<Self> {
        if window.len().is_multiple_of(2) {
            return Err(Error::InvalidConfiguration(format!("view length {} is not odd", window.len())));
        }
        if window[window.len() / 2] == 0 {
            return Err(Error::InvalidConfiguration("view center must be occupied".into()));
        }
        Ok(Self { window })
    }

    pub fn phi(&self) -> usize {
        self.window.len() / 2
    }

    pub fn window(&self) -> &[u8] {
        &self.window
    }

    pub fn center(&self) -> u8 {
        self.window[self.phi()]
    }

    /// `x_offset` for `offset` in `-φ..=φ`.
    pub fn get(&self, offset: isize) -> u8 {
        self.window[(self.phi() as isize + offset) as usize]
    }

    pub fn reversed(&self) -> Self {
        let mut window = self.window.clone();
        window.reverse();
        Self { window }
    }

    pub fn is_symmetric(&self) -> bool {
        self.window.iter().eq(self.window.iter().rev())
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi = self.phi();
        let wide = self.window.iter().any(|&x| x > 9);
        for (i, x) in self.window.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(",")?;
            }
            if i == phi {
                write!(f, "({x})")?;
            } else {
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    /// Consecutive robots exactly `d` apart; lone robots are isolated.
    #[serde(rename = "d.block")]
    DBlock,
    /// Consecutive robots at most `d` apart; a lone robot is a group of one.
    #[serde(rename = "phi.group")]
    PhiGroup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub kind: BlockKind,
    pub d: usize,
    /// Occupied nodes in CW order starting at `nodes[0]`.
    pub nodes: Vec<usize>,
    /// Robot count (towers count with their multiplicity).
    pub robots: usize,
    /// Set when the chain closes around the whole ring.
    pub cyclic: bool,
}

impl Block {
    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    /// End nodes of the chain; undefined for a cyclic chain.
    pub fn borders(&self) -> Option<(usize, usize)> {
        if self.cyclic {
            None
        } else {
            Some((self.nodes[0], *self.nodes.last().unwrap()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub blocks: Vec<Block>,
    pub isolated: Vec<usize>,
}

fn structure(c: &Configuration, d: usize, kind: BlockKind) -> Result<BlockReport> {
    if d == 0 {
        return Err(Error::InvalidConfiguration("distance must be at least 1".into()));
    }
    let n = c.n();
    let occ: Vec<usize> = c.occupied().collect();
    if occ.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let joins = |gap: usize| match kind {
        BlockKind::DBlock => gap == d,
        BlockKind::PhiGroup => gap <= d,
    };
    let m = occ.len();
    // gap from occ[i] to occ[i+1] (cyclically); a single robot sees itself at distance n.
    let gap = |i: usize| {
        let a = occ[i];
        let b = occ[(i + 1) % m];
        if m == 1 {
            n
        } else {
            (b + n - a) % n
        }
    };
    let robots_at = |nodes: &[usize]| nodes.iter().map(|&u| c.mults[u] as usize).sum();

    let Some(break_at) = (0..m).find(|&i| !joins(gap(i))) else {
        // every gap joins: one chain around the whole ring
        let (_, sym) = c.canonical_with_symmetry();
        let anchor = sym.source(0, n);
        let first = (0..m).find(|&i| occ[i] >= anchor).unwrap_or(0);
        let nodes: Vec<usize> = (0..m).map(|i| occ[(first + i) % m]).collect();
        let robots = robots_at(&nodes);
        return Ok(BlockReport { blocks: vec![Block { kind, d, nodes, robots, cyclic: true }], isolated: Vec::new() });
    };

    let mut report = BlockReport { blocks: Vec::new(), isolated: Vec::new() };
    let mut chain = Vec::new();
    for step in 1..=m {
        let i = (break_at + step) % m;
        chain.push(occ[i]);
        if !joins(gap(i)) {
            if chain.len() == 1 && kind == BlockKind::DBlock {
                report.isolated.push(chain[0]);
            } else {
                let robots = robots_at(&chain);
                report.blocks.push(Block { kind, d, nodes: std::mem::take(&mut chain), robots, cyclic: false });
            }
            chain.clear();
        }
    }
    report.blocks.sort_by_key(|b| b.nodes[0]);
    report.isolated.sort_unstable();
    Ok(report)
}
