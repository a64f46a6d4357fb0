//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` fail because the shipped rule
//! tables admit counterexamples; their traces are archived under the target
//! directory. Any other failure makes the run exit nonzero.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use myopic_ring::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXPECTED_FAILURES: &[u32] = &[3, 4, 5];
const SIM_STEPS: usize = 200_000;

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, what: &str, detail: String) {
        let status = match (ok, EXPECTED_FAILURES.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("criterion {id}: {status:<15} {what}: {detail}");
        if !ok && !EXPECTED_FAILURES.contains(&id) {
            self.failed.push(id);
        }
    }
}

fn archive(name: &str, t: &Trace) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{name}.jsonl"));
    std::fs::write(&path, t.to_jsonl()).unwrap();
    path.display().to_string()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn describe(v: &Verdict, name: &str) -> String {
    match v.trace() {
        Some(t) => format!("{} ({} steps, trace {})", v.label(), t.steps.len(), archive(name, t)),
        None => v.label().to_string(),
    }
}

/// Whether the milestones show up in order along the run.
fn milestones_in_order(t: &Trace, names: &[NamedConfig]) -> bool {
    let mut want = names.iter().peekable();
    for c in t.configurations() {
        while want.peek().is_some_and(|&&m| detect_named(c, m).is_some()) {
            want.next();
        }
    }
    want.peek().is_none()
}

fn run_ok(t: &Trace, names: &[NamedConfig]) -> bool {
    t.outcome == Outcome::Terminated && t.visited_count == t.n() && milestones_in_order(t, names)
}

/// Runs up to `runs` seeded fair simulations per start, stopping at a
/// start's first failure. Returns the failing starts and the first failing
/// trace.
fn simulations(
    p: &Protocol,
    inits: &[Configuration],
    model: Model,
    runs: u64,
    names: &[NamedConfig],
) -> (usize, usize, Option<Trace>) {
    let (mut bad, mut total, mut first) = (0, 0, None);
    for c in inits {
        for seed in 0..runs {
            total += 1;
            let t = simulate(p, c, model, seed, SIM_STEPS).unwrap();
            if !run_ok(&t, names) {
                bad += 1;
                first.get_or_insert(t);
                break;
            }
        }
    }
    (bad, total, first)
}

fn three_tower_next_to_two_tower(c: &Configuration) -> bool {
    (0..c.n() as isize).any(|i| c.at(i) == 3 && (c.at(i - 1) == 2 || c.at(i + 1) == 2))
}

fn criterion_1(r: &mut Report, traces: &mut Vec<Trace>) {
    let p = builtin("fsync-phi1-large").unwrap();
    let mut ok = true;
    let mut worst = (Duration::ZERO, 0);
    for n in 7..=12 {
        let (v, dt) = timed(|| verify_exhaustive(&p, &InitClass::single_block(n, 5), Model::Fsync, 100_000).unwrap());
        ok &= v.explores() && dt < Duration::from_secs(5) && v.states < 100_000;
        ok &= !v.terminals.is_empty() && v.terminals.iter().all(three_tower_next_to_two_tower);
        worst = (worst.0.max(dt), worst.1.max(v.states));
        traces.push(simulate(&p, &Configuration::block(n, 5).unwrap(), Model::Fsync, 0, SIM_STEPS).unwrap());
    }
    r.line(1, ok, "fsync-phi1-large explores n=7..12", format!("max {:?}, max {} states", worst.0, worst.1));
}

fn criterion_2(r: &mut Report, traces: &mut Vec<Trace>) {
    let p = builtin("fsync-phi1-small").unwrap();
    let mut ok = true;
    let mut worst = Duration::ZERO;
    for (n, k) in [(3, 2), (4, 3), (5, 4), (6, 4)] {
        let (v, dt) = timed(|| verify_exhaustive(&p, &InitClass::single_block(n, k), Model::Fsync, 100_000).unwrap());
        ok &= v.explores() && dt < Duration::from_secs(1);
        worst = worst.max(dt);
        traces.push(simulate(&p, &Configuration::block(n, k).unwrap(), Model::Fsync, 0, SIM_STEPS).unwrap());
    }
    r.line(2, ok, "fsync-phi1-small explores (3,2) (4,3) (5,4) (6,4)", format!("max {worst:?}"));
}

fn criterion_3(r: &mut Report, async_traces: &mut Vec<Trace>) {
    let info = builtin_info("async-phi2-k7").unwrap();
    let p = info.protocol();
    let c = Configuration::block(15, 7).unwrap();
    let (v, dt) = timed(|| verify_configs(&p, std::slice::from_ref(&c), Model::Async, 10_000_000).unwrap());
    let mut detail = format!("{} in {dt:?}, {} states", describe(&v, "async-phi2-k7-n15"), v.states);
    let ok = match &v.kind {
        VerdictKind::Explores => true,
        VerdictKind::Counterexample { .. } => false,
        VerdictKind::BudgetExceeded { .. } => {
            let (bad, total, _) = simulations(&p, std::slice::from_ref(&c), Model::Async, 10_000, info.milestones);
            detail += &format!("; fallback {}/{total} simulations ok", total - bad);
            bad == 0
        }
    };
    async_traces.push(simulate(&p, &c, Model::Async, 0, SIM_STEPS).unwrap());
    r.line(3, ok, "async-phi2-k7 at n=15", detail);
}

/// Exhaustive SSYNC per start, ASYNC simulations per start, and one
/// exhaustive ASYNC attempt over all starts.
fn two_tier(name: &str, n: usize, k: usize, async_traces: &mut Vec<Trace>) -> (bool, String) {
    let info = builtin_info(name).unwrap();
    let p = info.protocol();
    let inits = initial_configs(&info.init_class(n, k)).unwrap();
    let mut ssync_bad = 0;
    let mut first_bad = None;
    for c in &inits {
        let v = verify_configs(&p, std::slice::from_ref(c), Model::Ssync, default_budget()).unwrap();
        if !v.explores() {
            ssync_bad += 1;
            first_bad.get_or_insert(v);
        }
    }
    let ssync = match &first_bad {
        Some(v) => format!(
            "SSYNC fails from {ssync_bad}/{} starts, first {}",
            inits.len(),
            describe(v, &format!("{name}-ssync"))
        ),
        None => format!("SSYNC explores from all {} starts", inits.len()),
    };
    let (bad, total, first) = simulations(&p, &inits, Model::Async, 1000, info.milestones);
    let sims = format!("ASYNC simulations fail from {bad}/{} starts ({total} runs)", inits.len());
    if let Some(t) = &first {
        archive(&format!("{name}-async-sim"), t);
    }
    async_traces.push(first.unwrap_or_else(|| simulate(&p, &inits[0], Model::Async, 0, SIM_STEPS).unwrap()));
    let (v, dt) = timed(|| verify_configs(&p, &inits, Model::Async, default_budget()).unwrap());
    let exhaustive = format!("exhaustive ASYNC {} in {dt:?}", describe(&v, &format!("{name}-async")));
    (ssync_bad == 0 && bad == 0, format!("{ssync}; {sims}; {exhaustive}"))
}

fn criterion_4(r: &mut Report, async_traces: &mut Vec<Trace>) {
    let (ok, detail) = two_tier("async-phi2-k9", 19, 9, async_traces);
    r.line(4, ok, "async-phi2-k9 at n=19", detail);
}

fn criterion_5(r: &mut Report, async_traces: &mut Vec<Trace>) {
    let (ok7, d7) = two_tier("async-phi3-k7", 22, 7, async_traces);
    let (ok5, d5) = two_tier("async-phi3-k5", 16, 5, async_traces);
    r.line(5, ok7 && ok5, "async-phi3-k7 at n=22, async-phi3-k5 at n=16", format!("k=7: {d7} | k=5: {d5}"));
}

fn criterion_6(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, k) in [(4, 2), (4, 3), (5, 2), (5, 3)] {
        let ((res, stats), dt) =
            timed(|| synthesize(1, n, k, Model::Ssync, &InitClass::single_block(n, k), 100_000_000).unwrap());
        ok &= res == SynthesisResult::NoneExists && dt < Duration::from_secs(600);
        parts.push(format!("({n},{k}) {} tables {dt:?}", stats.tables));
    }
    r.line(6, ok, "no phi=1 SSYNC protocol", parts.join(", "));
}

fn criterion_7(r: &mut Report) {
    let cls8 = InitClass::single_block(8, 4);
    let ((none, _), dt8) = timed(|| synthesize(1, 8, 4, Model::Fsync, &cls8, 100_000_000).unwrap());
    let cls6 = InitClass::single_block(6, 4);
    let ((found, _), dt6) = timed(|| synthesize(1, 6, 4, Model::Fsync, &cls6, 100_000_000).unwrap());
    let verified = match &found {
        SynthesisResult::Found(p) => verify_exhaustive(p, &cls6, Model::Fsync, 1_000_000).unwrap().explores(),
        _ => false,
    };
    let ok = none == SynthesisResult::NoneExists && verified;
    r.line(
        7,
        ok,
        "phi=1 FSYNC k=4: none at n=8, found at n=6",
        format!("n=8 {dt8:?}, n=6 {dt6:?}, found table explores: {verified}"),
    );
}

fn criterion_8(r: &mut Report, sync_traces: &[Trace], async_traces: &[Trace]) {
    let pairs: usize = sync_traces.iter().map(|t| monitor_distinguishability(t).len()).sum();
    let info: Vec<String> =
        async_traces.iter().map(|t| format!("{}: {}", t.protocol, monitor_distinguishability(t).len())).collect();
    r.line(
        8,
        pairs == 0,
        "no indistinguishable pairs in FSYNC/SSYNC traces",
        format!("{pairs} pairs over {} traces; ASYNC (informational) {}", sync_traces.len(), info.join(", ")),
    );
}

fn criterion_9(r: &mut Report) {
    let (mismatch, dt) = timed(|| {
        let mut bad = 0;
        for n in 1..=6 {
            for k in 1..=4 {
                let cs = common::all_configs(n, k);
                for a in &cs {
                    bad += (a.canonical().mults() != common::oracle_canonical(a).as_slice()) as usize;
                    for b in &cs {
                        bad += (a.indistinguishable(b).unwrap() != common::oracle_indistinguishable(a, b)) as usize;
                    }
                }
            }
        }
        bad
    });
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut disagree = 0;
    for i in 0..100 {
        let k = 1 + i % 4;
        let g = common::random_graph(&mut rng, 200, k);
        let got = fair_cycle_exists(&g, k).is_some();
        let lasso = common::oracle_fair_lasso(&g, k, 12);
        let exact = common::oracle_fair_product(&g, k);
        disagree += (got != exact || (lasso && !got)) as usize;
    }
    let ok = mismatch == 0 && dt < Duration::from_secs(10) && disagree == 0;
    r.line(
        9,
        ok,
        "oracle equivalence",
        format!("{mismatch} canonical mismatches in {dt:?}; {disagree}/100 fair-cycle disagreements"),
    );
}

fn main() {
    // `cargo test` passes harness flags; a name filter selects nothing here
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) {
        return;
    }
    let mut r = Report { failed: Vec::new() };
    let (mut sync_traces, mut async_traces) = (Vec::new(), Vec::new());
    criterion_1(&mut r, &mut sync_traces);
    criterion_2(&mut r, &mut sync_traces);
    criterion_3(&mut r, &mut async_traces);
    criterion_4(&mut r, &mut async_traces);
    criterion_5(&mut r, &mut async_traces);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r, &sync_traces, &async_traces);
    criterion_9(&mut r);
    if !r.failed.is_empty() {
        eprintln!("unexpected failures: {:?}", r.failed);
        std::process::exit(1);
    }
}
