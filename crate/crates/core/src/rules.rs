//! Guarded movement rules and their evaluation against sensor views.
//!
//! A rule `LABEL: GUARD :: ACTION` fires on a robot whose view equals the
//! guard read in either orientation. Because a robot has no sense of
//! direction, the action is interpreted relative to the orientation in which
//! the guard matched: `->` means "towards the `x_{+1}` slot of the guard".

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{Configuration, Direction, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Exact(u8),
    Any,
}

impl Slot {
    fn accepts(self, x: u8) -> bool {
        match self {
            Slot::Exact(m) => m == x,
            Slot::Any => true,
        }
    }

    fn compatible(self, other: Slot) -> bool {
        match (self, other) {
            (Slot::Exact(a), Slot::Exact(b)) => a == b,
            _ => true,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Exact(m) => write!(f, "{m}"),
            Slot::Any => f.write_str("?"),
        }
    }
}

/// A pattern over `2φ+1` view entries. The center is always concrete and ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    slots: Vec<Slot>,
}

impl Guard {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.len().is_multiple_of(2) {
            return Err(Error::InvalidConfiguration(format!("guard length {} is not odd", slots.len())));
        }
        match slots[slots.len() / 2] {
            Slot::Any => Err(Error::InvalidConfiguration("wildcard center".into())),
            Slot::Exact(0) => Err(Error::InvalidConfiguration("empty center".into())),
            Slot::Exact(_) => Ok(Self { slots }),
        }
    }

    /// Exact guard equal to a window.
    pub fn exact(window: &[u8]) -> Result<Self> {
        Self::new(window.iter().map(|&x| Slot::Exact(x)).collect())
    }

    pub fn phi(&self) -> usize {
        self.slots.len() / 2
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    fn matches_forward(&self, w: &[u8]) -> bool {
        self.slots.len() == w.len() && self.slots.iter().zip(w).all(|(s, &x)| s.accepts(x))
    }

    fn matches_mirror(&self, w: &[u8]) -> bool {
        self.slots.len() == w.len() && self.slots.iter().zip(w.iter().rev()).all(|(s, &x)| s.accepts(x))
    }

    fn overlaps(&self, other: &Guard, mirrored: bool) -> bool {
        if self.slots.len() != other.slots.len() {
            return false;
        }
        if mirrored {
            self.slots.iter().zip(other.slots.iter().rev()).all(|(a, b)| a.compatible(*b))
        } else {
            self.slots.iter().zip(&other.slots).all(|(a, b)| a.compatible(*b))
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi = self.phi();
        for (i, s) in self.slots.iter().enumerate() {
            if i == phi {
                write!(f, "({s})")?;
            } else {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Action {
    /// `->`: towards the guard's `x_{+1}` side.
    TowardPlus,
    /// `<-`: towards the guard's `x_{-1}` side.
    TowardMinus,
    /// `<-|->`: the scheduler picks.
    EitherWay,
}

impl Action {
    pub(crate) fn bind(self, mirrored: bool) -> MoveChoice {
        match (self, mirrored) {
            (Action::EitherWay, _) => MoveChoice::BOTH,
            (Action::TowardPlus, false) | (Action::TowardMinus, true) => MoveChoice::CW,
            (Action::TowardMinus, false) | (Action::TowardPlus, true) => MoveChoice::CCW,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Action::TowardPlus => "->",
            Action::TowardMinus => "<-",
            Action::EitherWay => "<-|->",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub label: String,
    pub guard: Guard,
    pub action: Action,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} :: {}", self.label, self.guard, self.action)
    }
}

/// Set of global directions a robot may take.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MoveChoice {
    pub cw: bool,
    pub ccw: bool,
}

impl MoveChoice {
    pub const NONE: Self = Self { cw: false, ccw: false };
    pub const CW: Self = Self { cw: true, ccw: false };
    pub const CCW: Self = Self { cw: false, ccw: true };
    pub const BOTH: Self = Self { cw: true, ccw: true };

    pub fn is_empty(self) -> bool {
        !self.cw && !self.ccw
    }

    pub fn is_ambiguous(self) -> bool {
        self.cw && self.ccw
    }

    pub fn contains(self, d: Direction) -> bool {
        match d {
            Direction::Cw => self.cw,
            Direction::Ccw => self.ccw,
        }
    }

    pub fn union(self, other: Self) -> Self {
        Self { cw: self.cw || other.cw, ccw: self.ccw || other.ccw }
    }

    pub fn flipped(self) -> Self {
        Self { cw: self.ccw, ccw: self.cw }
    }

    /// The unique direction, if exactly one is allowed.
    pub fn single(self) -> Option<Direction> {
        match (self.cw, self.ccw) {
            (true, false) => Some(Direction::Cw),
            (false, true) => Some(Direction::Ccw),
            _ => None,
        }
    }

    pub fn directions(self) -> impl Iterator<Item = Direction> {
        [(self.cw, Direction::Cw), (self.ccw, Direction::Ccw)].into_iter().filter(|(on, _)| *on).map(|(_, d)| d)
    }
}

impl fmt::Display for MoveChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dirs: Vec<String> = self.directions().map(|d| d.to_string()).collect();
        write!(f, "{{{}}}", dirs.join(","))
    }
}

/// Directions bound by `r` on the view `v`, over both orientations.
pub fn match_rule(r: &Rule, v: &View) -> MoveChoice {
    match_window(r, v.window())
}

fn match_window(r: &Rule, w: &[u8]) -> MoveChoice {
    let mut out = MoveChoice::NONE;
    if r.guard.matches_forward(w) {
        out = out.union(r.action.bind(false));
    }
    if r.guard.matches_mirror(w) {
        out = out.union(r.action.bind(true));
    }
    out
}

/// Outcome of evaluating a protocol on one view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    pub moves: MoveChoice,
    /// Index of the matching rule.
    pub rule: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    pub name: String,
    pub phi: usize,
    pub rules: Vec<Rule>,
}

impl Protocol {
    /// Builds a protocol, rejecting guard-length mismatches, duplicate labels
    /// and pairs of rules that prescribe different moves on a common view.
    pub fn new(name: impl Into<String>, phi: usize, rules: Vec<Rule>) -> Result<Self> {
        let p = Self { name: name.into(), phi, rules };
        let mut seen = HashSet::new();
        for (i, r) in p.rules.iter().enumerate() {
            if r.label.is_empty() {
                return Err(Error::Parse { line: i + 1, msg: "empty rule label".into() });
            }
            if !seen.insert(r.label.as_str()) {
                return Err(Error::Parse { line: i + 1, msg: format!("duplicate label `{}`", r.label) });
            }
            if r.guard.phi() != phi {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("rule {} has guard length {}, expected {}", r.label, r.guard.slots.len(), 2 * phi + 1),
                });
            }
        }
        if let Some((a, b, w)) = p.conflicting_rules().into_iter().next() {
            return Err(Error::RuleConflict {
                view: View::new(w).map(|v| v.to_string()).unwrap_or_default(),
                labels: vec![p.rules[a].label.clone(), p.rules[b].label.clone()],
            });
        }
        Ok(p)
    }

    /// Pairs of rules that yield different moves on some common view, with
    /// one such view. Guards only compare slots against constants, so it is
    /// enough to try, per slot, every constant of the two guards plus one
    /// value distinct from all of them.
    pub fn conflicting_rules(&self) -> Vec<(usize, usize, Vec<u8>)> {
        let mut out = Vec::new();
        for i in 0..self.rules.len() {
            for j in i + 1..self.rules.len() {
                let (a, b) = (&self.rules[i], &self.rules[j]);
                if !(a.guard.overlaps(&b.guard, false) || a.guard.overlaps(&b.guard, true)) {
                    continue;
                }
                if let Some(w) = disagreement(a, b) {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label == label)
    }

    /// Evaluates the protocol on a raw window of length `2φ+1`.
    pub fn evaluate_window(&self, w: &[u8]) -> Result<Evaluation> {
        if w.len() != 2 * self.phi + 1 {
            return Err(Error::ViewLength { got: w.len(), phi: self.phi });
        }
        let mut eval = Evaluation { moves: MoveChoice::NONE, rule: None };
        for (i, r) in self.rules.iter().enumerate() {
            let m = match_window(r, w);
            if m.is_empty() {
                continue;
            }
            if let Some(prev) = eval.rule {
                if m == eval.moves {
                    continue;
                }
                let view = View::new(w.to_vec()).map(|v| v.to_string()).unwrap_or_default();
                return Err(Error::RuleConflict {
                    view,
                    labels: vec![self.rules[prev].label.clone(), r.label.clone()],
                });
            }
            eval = Evaluation { moves: m, rule: Some(i) };
        }
        Ok(eval)
    }

    pub fn evaluate(&self, v: &View) -> Result<Evaluation> {
        self.evaluate_window(v.window())
    }

    /// Evaluation for the robots on `node`.
    pub fn evaluate_at(&self, c: &Configuration, node: usize) -> Result<Evaluation> {
        self.evaluate(&c.view_at(node, self.phi)?)
    }

    /// Directions available to a robot on `node`; empty means disabled.
    pub fn enabled_moves(&self, c: &Configuration, node: usize) -> Result<MoveChoice> {
        Ok(self.evaluate_at(c, node)?.moves)
    }

    pub fn validate(&self, max_mult: u8) -> Vec<Diagnostic> {
        validate(self, max_mult)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.name.is_empty() {
            writeln!(f, "# {}", self.name)?;
        }
        writeln!(f, "phi={}", self.phi)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Parses the protocol text format.
///
/// ```text
/// # comment
/// phi=1
/// 1A1: 0(1)1 :: ->
/// 1A2: 2(1)2 :: <-|->
/// ```
pub fn parse_protocol(text: &str) -> Result<Protocol> {
    parse_protocol_named("", text)
}

pub fn parse_protocol_named(name: &str, text: &str) -> Result<Protocol> {
    let mut phi = None;
    let mut rules = Vec::new();
    let mut rule_lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let Some(radius) = phi else {
            let value = line
                .strip_prefix("phi")
                .and_then(|rest| rest.trim_start().strip_prefix('='))
                .ok_or_else(|| err(format!("expected `phi=<int>` header, found `{line}`")))?;
            let radius: usize = value.trim().parse().map_err(|_| err(format!("bad radius `{}`", value.trim())))?;
            if radius == 0 {
                return Err(err("radius must be at least 1".into()));
            }
            phi = Some(radius);
            continue;
        };
        let (head, action) = line.split_once("::").ok_or_else(|| err("missing `::` separator".into()))?;
        let (label, guard) = head.split_once(':').ok_or_else(|| err("missing `:` after label".into()))?;
        let label = label.trim();
        if label.is_empty() || label.contains(char::is_whitespace) {
            return Err(err(format!("bad label `{label}`")));
        }
        let guard = parse_guard(guard.trim(), radius).map_err(err)?;
        let action = match action.trim() {
            "->" => Action::TowardPlus,
            "<-" => Action::TowardMinus,
            "<-|->" | "->|<-" => Action::EitherWay,
            other => return Err(err(format!("unknown action `{other}`"))),
        };
        if rules.iter().any(|r: &Rule| r.label == label) {
            return Err(err(format!("duplicate label `{label}`")));
        }
        rule_lines.push(line_no);
        rules.push(Rule { label: label.to_string(), guard, action });
    }
    let phi = phi.ok_or(Error::Parse { line: 0, msg: "missing `phi=<int>` header".into() })?;
    let p = Protocol { name: name.to_string(), phi, rules };
    if let Some((a, b, w)) = p.conflicting_rules().into_iter().next() {
        let view = View::new(w).map(|v| v.to_string()).unwrap_or_default();
        return Err(Error::Parse {
            line: rule_lines[b],
            msg: format!(
                "rules {} and {} prescribe different moves on view {view}",
                p.rules[a].label, p.rules[b].label
            ),
        });
    }
    Ok(p)
}

fn parse_guard(s: &str, phi: usize) -> std::result::Result<Guard, String> {
    let open = s.find('(').ok_or_else(|| format!("guard `{s}` has no `(`"))?;
    let close = s.find(')').ok_or_else(|| format!("guard `{s}` has no `)`"))?;
    if close < open {
        return Err(format!("malformed guard `{s}`"));
    }
    let (left, center, right) = (&s[..open], &s[open + 1..close], &s[close + 1..]);
    let slot = |c: char| match c {
        '?' => Ok(Slot::Any),
        d if d.is_ascii_digit() => Ok(Slot::Exact(d as u8 - b'0')),
        other => Err(format!("bad guard character `{other}`")),
    };
    if left.chars().count() != phi || right.chars().count() != phi || center.chars().count() != 1 {
        return Err(format!("guard `{s}` does not have length {} for phi={phi}", 2 * phi + 1));
    }
    let mut slots = Vec::with_capacity(2 * phi + 1);
    for c in left.chars() {
        slots.push(slot(c)?);
    }
    match slot(center.chars().next().unwrap())? {
        Slot::Any => return Err(format!("wildcard center in guard `{s}`")),
        Slot::Exact(0) => return Err(format!("empty center in guard `{s}`")),
        c => slots.push(c),
    }
    for c in right.chars() {
        slots.push(slot(c)?);
    }
    Guard::new(slots).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    /// Two distinct rules match the same view.
    Conflict,
    /// One rule with a concrete direction matches both orientations of a
    /// view; the scheduler resolves the direction.
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub view: View,
    pub labels: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Conflict => {
                write!(f, "conflict on {}: rules {}", self.view, self.labels.join(", "))
            }
            Severity::Warning => {
                write!(f, "warning on {}: rule {} matches both orientations", self.view, self.labels[0])
            }
        }
    }
}

fn disagreement(a: &Rule, b: &Rule) -> Option<Vec<u8>> {
    let len = a.guard.slots.len();
    let mut vals: Vec<u8> = a
        .guard
        .slots
        .iter()
        .chain(&b.guard.slots)
        .filter_map(|s| match s {
            Slot::Exact(x) => Some(*x),
            Slot::Any => None,
        })
        .collect();
    vals.push(vals.iter().max().map_or(1, |m| m + 1));
    vals.sort_unstable();
    vals.dedup();
    let center = len / 2;
    let mut idx = vec![0usize; len];
    loop {
        let w: Vec<u8> = idx.iter().map(|&i| vals[i]).collect();
        if w[center] > 0 {
            let (x, y) = (match_window(a, &w), match_window(b, &w));
            if !x.is_empty() && !y.is_empty() && x != y {
                return Some(w);
            }
        }
        let mut i = 0;
        loop {
            if i == len {
                return None;
            }
            idx[i] += 1;
            if idx[i] < vals.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Enumerates every view with entries ≤ `max_mult` (one per mirror pair) and
/// reports overlaps and orientation-ambiguous matches.
pub fn validate(p: &Protocol, max_mult: u8) -> Vec<Diagnostic> {
    let len = 2 * p.phi + 1;
    let center = p.phi;
    let mut w = vec![0u8; len];
    w[center] = 1;
    let mut out = Vec::new();
    loop {
        if w.iter().le(w.iter().rev()) {
            let mut hits = Vec::new();
            let mut moves = Vec::new();
            for r in &p.rules {
                let fwd = r.guard.matches_forward(&w);
                let mir = r.guard.matches_mirror(&w);
                if fwd || mir {
                    hits.push(r.label.clone());
                    moves.push(match_window(r, &w));
                }
                if fwd && mir && r.action != Action::EitherWay {
                    out.push(Diagnostic {
                        severity: Severity::Warning,
                        view: View::new(w.clone()).expect("center occupied"),
                        labels: vec![r.label.clone()],
                    });
                }
            }
            if hits.len() >= 2 {
                // rules that agree on the move are redundant, not conflicting
                let agree = moves.windows(2).all(|m| m[0] == m[1]);
                out.push(Diagnostic {
                    severity: if agree { Severity::Warning } else { Severity::Conflict },
                    view: View::new(w.clone()).expect("center occupied"),
                    labels: hits,
                });
            }
        }
        // odometer; the center runs over 1..=max_mult
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            let lo = if i == center { 1 } else { 0 };
            if w[i] < max_mult {
                w[i] += 1;
                break;
            }
            w[i] = lo;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(s: &str) -> Rule {
        let p = parse_protocol(&format!("phi={}\n{s}", guard_phi(s))).unwrap();
        p.rules[0].clone()
    }

    fn guard_phi(s: &str) -> usize {
        let g = s.split(':').nth(1).unwrap().trim();
        g.find('(').unwrap()
    }

    fn view(w: &[u8]) -> View {
        View::new(w.to_vec()).unwrap()
    }

    #[test]
    fn parse_single_rules() {
        let p = parse_protocol("phi=1\n1A1: 0(1)1 :: ->").unwrap();
        assert_eq!(p.phi, 1);
        assert_eq!(p.rules.len(), 1);
        assert_eq!(p.rules[0].action, Action::TowardPlus);

        let p = parse_protocol("phi=1\n1A2: 2(1)2 :: <-|->").unwrap();
        assert_eq!(p.rules[0].action, Action::EitherWay);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_protocol("phi=2\nX: 00(?)11 :: ->"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_protocol("phi=2\nX: 0(1)11 :: ->").is_err());
        assert!(parse_protocol("phi=1\nX: 0(1)1 :: =>").is_err());
        assert!(parse_protocol("phi=1\nX: 0(1)1 :: ->\nX: 1(1)1 :: <-").is_err());
        assert!(parse_protocol("X: 0(1)1 :: ->").is_err());
        assert!(parse_protocol("phi=1\nX: 0(0)1 :: ->").is_err());
        assert!(parse_protocol("phi=1\nX 0(1)1 -> ").is_err());
    }

    #[test]
    fn parse_comments_and_blank_lines() {
        let p = parse_protocol("# header\n\nphi=1  # radius\n1A1: 0(1)1 :: -> # move\n").unwrap();
        assert_eq!(p.rules.len(), 1);
        assert_eq!(p.rules[0].label, "1A1");
    }

    #[test]
    fn disagreeing_overlaps_rejected_at_parse() {
        let err = parse_protocol("phi=1\nA: 0(1)? :: ->\nB: ?(1)1 :: <-").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        // overlap through the mirror orientation
        assert!(parse_protocol("phi=1\nA: 0(1)1 :: ->\nB: 1(1)0 :: ->").is_err());
        // same move from both rules: redundant but consistent
        let p = parse_protocol("phi=1\nA: 0(1)1 :: ->\nB: 1(1)0 :: <-").unwrap();
        assert_eq!(p.evaluate(&view(&[0, 1, 1])).unwrap().rule, Some(0));
        let p = parse_protocol("phi=1\nA: 0(1)? :: ->\nB: 0(1)2 :: ->").unwrap();
        let diags = validate(&p, 2);
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));
        assert!(diags.iter().any(|d| d.view.window() == [0, 1, 2] && d.labels.len() == 2));
    }

    #[test]
    fn match_examples() {
        assert_eq!(match_rule(&rule("A: 0(1)1 :: ->"), &view(&[0, 1, 1])), MoveChoice::CW);
        assert_eq!(match_rule(&rule("A: 0(1)1 :: ->"), &view(&[1, 1, 0])), MoveChoice::CCW);
        assert_eq!(match_rule(&rule("A: 00(1)1? :: ->"), &view(&[0, 0, 1, 1, 2])), MoveChoice::CW);
        assert_eq!(match_rule(&rule("A: 2(1)2 :: <-|->"), &view(&[2, 1, 2])), MoveChoice::BOTH);
        assert_eq!(match_rule(&rule("A: 2(1)2 :: <-|->"), &view(&[2, 1, 0])), MoveChoice::NONE);
    }

    #[test]
    fn concrete_action_on_symmetric_view_is_ambiguous() {
        assert_eq!(match_rule(&rule("A: 1(1)1 :: ->"), &view(&[1, 1, 1])), MoveChoice::BOTH);
        assert_eq!(match_rule(&rule("A: ?(1)? :: <-"), &view(&[0, 1, 2])), MoveChoice::BOTH);
    }

    #[test]
    fn enabled_moves_on_configuration() {
        let p = parse_protocol("phi=1\nA: 0(1)1 :: ->\nB: 2(1)2 :: <-|->").unwrap();
        let c: Configuration = "1,1,1,1,1,0,0".parse().unwrap();
        assert_eq!(p.enabled_moves(&c, 0).unwrap(), MoveChoice::CW);
        assert_eq!(p.enabled_moves(&c, 4).unwrap(), MoveChoice::CCW);
        assert_eq!(p.enabled_moves(&c, 2).unwrap(), MoveChoice::NONE);
        assert_eq!(p.enabled_moves(&c, 5), Err(Error::EmptyNode(5)));
    }

    #[test]
    fn evaluation_conflict_reports_both_labels() {
        // bypass construction-time checks to exercise evaluation
        let p = Protocol { name: String::new(), phi: 1, rules: vec![rule("A: 0(1)? :: ->"), rule("B: ?(1)1 :: <-")] };
        match p.evaluate(&view(&[0, 1, 1])) {
            Err(Error::RuleConflict { labels, .. }) => assert_eq!(labels, vec!["A", "B"]),
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn validate_reports_constructed_overlap() {
        let p = Protocol { name: String::new(), phi: 1, rules: vec![rule("A: 0(1)? :: ->"), rule("B: ?(1)1 :: <-")] };
        let diags = validate(&p, 2);
        assert!(diags.iter().any(|d| d.severity == Severity::Conflict && d.view.window() == [0, 1, 1]));
    }

    #[test]
    fn validate_mirror_only_match_is_clean() {
        let p = parse_protocol("phi=1\nR: 1(1)0 :: ->").unwrap();
        assert!(validate(&p, 2).is_empty());
    }

    #[test]
    fn validate_flags_double_orientation() {
        let p = parse_protocol("phi=1\nR: ?(1)? :: ->").unwrap();
        let diags = validate(&p, 1);
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));
        // (0,1,0) and (1,1,1) are symmetric; (0,1,1) matches via the wildcards
        assert_eq!(diags.len(), 3);
    }

    #[test]
    fn display_round_trip() {
        let text = "phi=2\n2A'2: 00(1)1? :: ->\n2A'7: 20(1)02 :: <-|->\n";
        let p = parse_protocol(text).unwrap();
        assert_eq!(parse_protocol(&p.to_string()).unwrap(), p);
        assert_eq!(p.to_string(), text);
    }
}
