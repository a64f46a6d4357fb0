//! Built-in rule tables, milestone configuration detectors, and generators
//! for classes of initial configurations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Model;
use crate::ring::{BlockKind, Configuration, Direction};
use crate::rules::{parse_protocol_named, Protocol};

/// A protocol shipped with the crate.
#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub phi: usize,
    /// Robot count the protocol is designed for; `None` when it depends on `n`.
    pub k: Option<usize>,
    pub model: Model,
    /// Milestone reached before the final sweep, and the terminal pattern.
    pub milestones: &'static [NamedConfig],
    /// Starting configurations the protocol is stated for.
    pub init: InitKind,
    text: &'static str,
}

impl Builtin {
    pub fn text(&self) -> &'static str {
        self.text
    }

    pub fn protocol(&self) -> Protocol {
        parse_protocol_named(self.name, self.text).expect("built-in protocol parses")
    }

    pub fn init_class(&self, n: usize, k: usize) -> InitClass {
        InitClass { kind: self.init, k, n, phi: self.phi }
    }

    /// Smallest ring size the protocol is stated for (`n ≥ φk + 1` for the
    /// asynchronous ones).
    pub fn min_n(&self) -> usize {
        match self.k {
            Some(k) if self.model == Model::Async => self.phi * k + 1,
            Some(_) => 7,
            None => 3,
        }
    }
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "fsync-phi1-large",
        summary: "FSYNC, phi=1, k=5, n>=7, single 1-block start",
        phi: 1,
        k: Some(5),
        model: Model::Fsync,
        milestones: &[],
        init: InitKind::SingleOneBlock,
        text: include_str!("../../../protocols/fsync-phi1-large.proto"),
    },
    Builtin {
        name: "fsync-phi1-small",
        summary: "FSYNC, phi=1, 3<=n<=6 with k=n-1 (k=4 when n=6), single 1-block start",
        phi: 1,
        k: None,
        model: Model::Fsync,
        milestones: &[],
        init: InitKind::SingleOneBlock,
        text: include_str!("../../../protocols/fsync-phi1-small.proto"),
    },
    Builtin {
        name: "async-phi2-k9",
        summary: "ASYNC, phi=2, k=9, n>=19, any towerless single 2-group start",
        phi: 2,
        k: Some(9),
        model: Model::Async,
        milestones: &[NamedConfig::Middle, NamedConfig::TerminalPhi2K9],
        init: InitKind::SinglePhiGroup,
        text: include_str!("../../../protocols/async-phi2-k9.proto"),
    },
    Builtin {
        name: "async-phi2-k7",
        summary: "ASYNC, phi=2, k=7, n>=15, single 1-block start",
        phi: 2,
        k: Some(7),
        model: Model::Async,
        milestones: &[NamedConfig::Inter, NamedConfig::FinalPhi2K7],
        init: InitKind::SingleOneBlock,
        text: include_str!("../../../protocols/async-phi2-k7.proto"),
    },
    Builtin {
        name: "async-phi3-k7",
        summary: "ASYNC, phi=3, k=7, n>=22, any towerless single 3-group start",
        phi: 3,
        k: Some(7),
        model: Model::Async,
        milestones: &[NamedConfig::Set, NamedConfig::FinalPhi3K7],
        init: InitKind::SinglePhiGroup,
        text: include_str!("../../../protocols/async-phi3-k7.proto"),
    },
    Builtin {
        name: "async-phi3-k5",
        summary: "ASYNC, phi=3, k=5, n>=16, single 1-block start",
        phi: 3,
        k: Some(5),
        model: Model::Async,
        milestones: &[NamedConfig::Set2, NamedConfig::Done],
        init: InitKind::SingleOneBlock,
        text: include_str!("../../../protocols/async-phi3-k5.proto"),
    },
];

pub fn builtin_info(name: &str) -> Result<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name).ok_or_else(|| Error::UnknownProtocol(name.to_string()))
}

pub fn builtin(name: &str) -> Result<Protocol> {
    builtin_info(name).map(Builtin::protocol)
}

/// Milestone configurations used by the asynchronous protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NamedConfig {
    Middle,
    TerminalPhi2K9,
    Inter,
    FinalPhi2K7,
    Set,
    FinalPhi3K7,
    Set2,
    Done,
}

impl NamedConfig {
    pub const ALL: [NamedConfig; 8] = [
        NamedConfig::Middle,
        NamedConfig::TerminalPhi2K9,
        NamedConfig::Inter,
        NamedConfig::FinalPhi2K7,
        NamedConfig::Set,
        NamedConfig::FinalPhi3K7,
        NamedConfig::Set2,
        NamedConfig::Done,
    ];

    /// Multiplicities on consecutive nodes starting at the anchor.
    pub fn pattern(self) -> &'static [u8] {
        match self {
            NamedConfig::Middle => &[2, 2, 1, 0, 0, 2, 2],
            NamedConfig::TerminalPhi2K9 => &[2, 0, 4, 2, 1],
            NamedConfig::Inter => &[2, 2, 1, 0, 0, 0, 2],
            NamedConfig::FinalPhi2K7 => &[2, 0, 4, 1],
            // M_i = 2, M_{i+1} = 3, M_{i+4} = 2
            NamedConfig::Set => &[2, 3, 0, 0, 2],
            NamedConfig::FinalPhi3K7 => &[2, 2, 0, 3],
            NamedConfig::Set2 => &[1, 3, 0, 0, 0, 1],
            NamedConfig::Done => &[1, 1, 0, 3],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedConfig::Middle => "Middle",
            NamedConfig::TerminalPhi2K9 => "TerminalPhi2K9",
            NamedConfig::Inter => "Inter",
            NamedConfig::FinalPhi2K7 => "FinalPhi2K7",
            NamedConfig::Set => "Set",
            NamedConfig::FinalPhi3K7 => "FinalPhi3K7",
            NamedConfig::Set2 => "Set2",
            NamedConfig::Done => "Done",
        }
    }

    /// Whether the pattern is laid out from `anchor` in direction `dir`.
    pub fn matches_at(self, c: &Configuration, anchor: usize, dir: Direction) -> bool {
        let sign: isize = match dir {
            Direction::Cw => 1,
            Direction::Ccw => -1,
        };
        self.pattern().iter().enumerate().all(|(j, &m)| c.at(anchor as isize + sign * j as isize) == m)
    }

    /// First `(anchor, orientation)` in scan order (anchors ascending, CW
    /// before CCW) at which the pattern occurs.
    pub fn detect(self, c: &Configuration) -> Option<(usize, Direction)> {
        (0..c.n()).find_map(|anchor| {
            [Direction::Cw, Direction::Ccw].into_iter().find(|&d| self.matches_at(c, anchor, d)).map(|d| (anchor, d))
        })
    }
}

impl fmt::Display for NamedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfiguration(format!("unknown named configuration `{s}`")))
    }
}

pub fn detect_named(c: &Configuration, name: NamedConfig) -> Option<(usize, Direction)> {
    name.detect(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitKind {
    /// `k` robots on consecutive nodes.
    SingleOneBlock,
    /// Towerless, all robots in one chain with gaps ≤ φ.
    SinglePhiGroup,
    /// Alias of [`InitKind::SinglePhiGroup`], kept for callers that spell out
    /// the towerless requirement.
    AnyTowerlessSinglePhiGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InitClass {
    pub kind: InitKind,
    pub k: usize,
    pub n: usize,
    pub phi: usize,
}

impl InitClass {
    pub fn single_block(n: usize, k: usize) -> Self {
        Self { kind: InitKind::SingleOneBlock, k, n, phi: 1 }
    }

    pub fn single_group(n: usize, k: usize, phi: usize) -> Self {
        Self { kind: InitKind::SinglePhiGroup, k, n, phi }
    }
}

/// Representative of a symmetry class: the lexicographically largest image,
/// which starts with the robots (e.g. `1,1,0,0,0`).
pub fn representative(c: &Configuration) -> Configuration {
    let m = c.mirror();
    (0..c.n()).flat_map(|o| [c.rotate(o), m.rotate(o)]).max().expect("ring is nonempty")
}

/// Every configuration of the class, one per indistinguishability class,
/// sorted descending so that the 1-block (when in the class) comes first.
pub fn initial_configs(cls: &InitClass) -> Result<Vec<Configuration>> {
    let InitClass { kind, k, n, phi } = *cls;
    if k > n {
        return Err(Error::TooManyRobots { k, n });
    }
    if k == 0 {
        return Err(Error::EmptyConfiguration);
    }
    if kind == InitKind::SingleOneBlock {
        return Ok(vec![Configuration::block(n, k)?]);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    // node 0 is occupied in some rotation of every class
    let mut positions: Vec<usize> = (0..k).collect();
    loop {
        let c = Configuration::from_positions(n, positions.iter().copied())?;
        let single = c.structure(phi, BlockKind::PhiGroup)?.blocks.len() == 1;
        if single && seen.insert(c.canonical()) {
            out.push(representative(&c));
        }
        if !next_combination(&mut positions, n) {
            break;
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    Ok(out)
}

/// Advances a sorted combination with `positions[0] == 0` fixed.
fn next_combination(pos: &mut [usize], n: usize) -> bool {
    let k = pos.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if pos[i] < n - (k - i) {
            pos[i] += 1;
            for j in i + 1..k {
                pos[j] = pos[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Severity;

    fn cfg(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    #[test]
    fn builtin_rule_counts() {
        let p = builtin("fsync-phi1-large").unwrap();
        assert_eq!(p.phi, 1);
        let labels: Vec<_> = p.rules.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["1A1", "1A2", "1A3", "2A4"]);

        let p = builtin("async-phi2-k9").unwrap();
        assert_eq!((p.phi, p.rules.len()), (2, 15));
        assert_eq!(p.rules.iter().filter(|r| r.label == "2A'6").count(), 1);

        let p = builtin("async-phi3-k5").unwrap();
        assert_eq!((p.phi, p.rules.len()), (3, 14));

        assert_eq!(builtin("fsync-phi1-small").unwrap().rules.len(), 2);
        assert_eq!(builtin("async-phi2-k7").unwrap().rules.len(), 14);
        assert_eq!(builtin("async-phi3-k7").unwrap().rules.len(), 23);
        assert_eq!(builtin("nope"), Err(Error::UnknownProtocol("nope".into())));
    }

    #[test]
    fn builtins_validate_without_conflicts() {
        for b in BUILTINS {
            let p = b.protocol();
            let max = b.k.unwrap_or(5) as u8;
            let diags = p.validate(max);
            assert!(diags.iter().all(|d| d.severity != Severity::Conflict), "{}: {:?}", b.name, diags);
        }
    }

    #[test]
    fn builtins_round_trip_through_text() {
        for b in BUILTINS {
            let p = b.protocol();
            let again = parse_protocol_named(b.name, &p.to_string()).unwrap();
            assert_eq!(again, p);
        }
    }

    #[test]
    fn pattern_robot_counts() {
        let sums: Vec<u32> = NamedConfig::ALL.iter().map(|n| n.pattern().iter().map(|&m| m as u32).sum()).collect();
        assert_eq!(sums, [9, 9, 7, 7, 7, 7, 5, 5]);
    }

    #[test]
    fn detect_examples() {
        let mut m = vec![2, 2, 1, 0, 0, 2, 2];
        m.resize(19, 0);
        let c = Configuration::new(m).unwrap();
        assert_eq!(detect_named(&c, NamedConfig::Middle), Some((0, Direction::Cw)));

        let mut m = vec![1, 1, 0, 3];
        m.resize(16, 0);
        let c = Configuration::new(m).unwrap();
        assert_eq!(detect_named(&c, NamedConfig::Done), Some((0, Direction::Cw)));

        let mut m = vec![2, 2, 1, 0, 0, 0, 2];
        m.resize(15, 0);
        let c = Configuration::new(m).unwrap();
        assert_eq!(detect_named(&c, NamedConfig::Middle), None);
        assert_eq!(detect_named(&c, NamedConfig::Inter), Some((0, Direction::Cw)));
    }

    #[test]
    fn detect_reversed_layout() {
        let c = cfg("0,0,1,4,0,2,0,0");
        assert_eq!(detect_named(&c, NamedConfig::FinalPhi2K7), Some((5, Direction::Ccw)));
    }

    #[test]
    fn init_examples() {
        let got = initial_configs(&InitClass::single_block(7, 5)).unwrap();
        assert_eq!(got, vec![cfg("1,1,1,1,1,0,0")]);

        let got = initial_configs(&InitClass::single_group(5, 2, 2)).unwrap();
        assert_eq!(got, vec![cfg("1,1,0,0,0"), cfg("1,0,1,0,0")]);

        let got = initial_configs(&InitClass::single_group(5, 2, 1)).unwrap();
        assert_eq!(got, vec![cfg("1,1,0,0,0")]);

        assert!(initial_configs(&InitClass::single_group(3, 4, 1)).is_err());
    }

    #[test]
    fn single_group_class_starts_with_the_block() {
        let got = initial_configs(&InitClass::single_group(19, 9, 2)).unwrap();
        assert_eq!(got[0], Configuration::block(19, 9).unwrap());
        assert!(got.iter().all(Configuration::is_towerless));
        // 8 gaps in {1,2}, identified under reversal: (2^8 + 2^4) / 2
        assert_eq!(got.len(), 136);
    }
}
