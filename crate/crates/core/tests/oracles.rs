mod common;

use std::collections::BTreeSet;

use common::*;
use myopic_ring::{fair_cycle_exists, initial_configs, Configuration, InitClass, LabeledGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn canonical_matches_transformation_oracle() {
    for n in 1..=6 {
        for k in 1..=4 {
            let cs = all_configs(n, k);
            for a in &cs {
                assert_eq!(a.canonical().mults(), oracle_canonical(a).as_slice(), "{a}");
                for b in &cs {
                    assert_eq!(a.indistinguishable(b).unwrap(), oracle_indistinguishable(a, b), "{a} vs {b}");
                }
            }
        }
    }
}

fn check_witness(g: &LabeledGraph, k: usize, states: &[usize], walk: &[usize]) {
    assert!(!walk.is_empty());
    let mut cover = 0u64;
    for (i, &e) in walk.iter().enumerate() {
        let (s, t, l) = g.edges[e];
        let (next, _, _) = g.edges[walk[(i + 1) % walk.len()]];
        assert_eq!(t, next, "walk is not closed");
        assert!(states.contains(&s) && !g.terminal[s]);
        cover |= l;
    }
    assert_eq!(cover, (1 << k) - 1);
}

#[test]
fn fair_cycles_match_lasso_and_product_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut found, mut short) = (0, 0);
    for i in 0..100 {
        let k = 1 + i % 4;
        let max_states = if i % 2 == 0 { 12 } else { 200 };
        let g = random_graph(&mut rng, max_states, k);
        let got = fair_cycle_exists(&g, k);
        let exact = oracle_fair_product(&g, k);
        let lasso = oracle_fair_lasso(&g, k, 12);
        assert_eq!(got.is_some(), exact, "graph {i}");
        // a bounded lasso is a fair cycle; longer loops are only seen by the product oracle
        assert!(!lasso || exact, "graph {i}");
        if let Some(w) = got {
            check_witness(&g, k, &w.states, &w.walk);
            found += 1;
            short += lasso as usize;
        }
    }
    assert!(found > 10 && found < 90, "{found} of 100 graphs have fair cycles");
    assert!(short > 0);
}

fn single_group_oracle(n: usize, k: usize, phi: usize) -> usize {
    let mut classes = BTreeSet::new();
    let mut pos: Vec<usize> = (0..k).collect();
    loop {
        let gaps: Vec<usize> = (0..k).map(|i| (pos[(i + 1) % k] + n - pos[i]) % n).collect();
        let gaps: Vec<usize> = gaps.into_iter().map(|g| if g == 0 { n } else { g }).collect();
        if gaps.iter().filter(|&&g| g > phi).count() <= 1 {
            let c = Configuration::from_positions(n, pos.iter().copied()).unwrap();
            classes.insert(oracle_canonical(&c));
        }
        // next k-subset of 0..n in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| pos[i] < n - k + i) else { break };
        pos[i] += 1;
        for j in i + 1..k {
            pos[j] = pos[j - 1] + 1;
        }
    }
    classes.len()
}

#[test]
fn initial_class_sizes_match_enumeration() {
    for (n, k, phi) in [(19, 9, 2), (22, 7, 3), (16, 5, 3), (15, 7, 2), (9, 4, 2)] {
        let got = initial_configs(&InitClass::single_group(n, k, phi)).unwrap();
        assert_eq!(got.len(), single_group_oracle(n, k, phi), "n={n} k={k} phi={phi}");
        assert!(got.iter().all(|c| c.is_towerless()));
    }
    assert_eq!(single_group_oracle(19, 9, 2), 136);
    assert_eq!(single_group_oracle(22, 7, 3), 378);
}
