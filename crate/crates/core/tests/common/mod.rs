//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use stl_synth::encoder::{MilpModel, Sense, VarId, VarRole};
use stl_synth::formula::{Combination, Formula, Predicate, Signal, StlTree};
use stl_synth::parser::{region_map, RegionDef};
use stl_synth::solver::{solve_lp, LpStatus};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Predicate with small integer coefficients, so printing and reparsing is exact.
pub fn random_predicate(rng: &mut impl Rng) -> Predicate {
    let mut a = vec![0.0; 2];
    while a.iter().all(|&v| v == 0.0) {
        a = (0..2).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
    }
    let b = rng.gen_range(-12i32..=12) as f64 * 0.5;
    Predicate::new("p", a, b)
}

/// Random PNF formula of at most `depth` operator levels whose horizon stays
/// within `budget`.
pub fn random_formula(rng: &mut impl Rng, depth: usize, budget: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return Formula::pred(random_predicate(rng));
    }
    let window = |rng: &mut dyn RngCore, budget: usize| -> (usize, usize) {
        let start = rng.gen_range(0..=budget.min(3));
        let end = rng.gen_range(start..=budget.min(start + 4));
        (start, end)
    };
    match rng.gen_range(0..5) {
        0 | 1 => {
            let k = rng.gen_range(2..=3);
            let cs = (0..k).map(|_| random_formula(rng, depth - 1, budget)).collect();
            if rng.gen_bool(0.5) {
                Formula::and(cs).unwrap()
            } else {
                Formula::or(cs).unwrap()
            }
        }
        2 => {
            let (a, b) = window(rng, budget);
            let g = random_formula(rng, depth - 1, budget - b);
            Formula::always(a, b, g).unwrap()
        }
        3 => {
            let (a, b) = window(rng, budget);
            let g = random_formula(rng, depth - 1, budget - b);
            Formula::eventually(a, b, g).unwrap()
        }
        _ => {
            let (a, b) = window(rng, budget);
            let g = random_formula(rng, depth - 1, budget - b);
            let h = random_formula(rng, depth - 1, budget - b);
            Formula::until(a, b, g, h).unwrap()
        }
    }
}

pub fn random_signal(rng: &mut impl Rng, len: usize) -> Signal {
    Signal::new(
        (0..len)
            .map(|_| (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect())
            .collect(),
    )
    .unwrap()
}

/// Robustness straight from the quantitative semantics, written without the
/// library's evaluator.
pub fn oracle(f: &Formula, y: &[Vec<f64>], t: usize) -> f64 {
    let pred = |p: &Predicate, t: usize| p.b - p.a.iter().zip(&y[t]).map(|(a, v)| a * v).sum::<f64>();
    match f {
        Formula::Pred(p) => pred(p, t),
        Formula::And(cs) => cs.iter().map(|c| oracle(c, y, t)).fold(f64::INFINITY, f64::min),
        Formula::Or(cs) => cs.iter().map(|c| oracle(c, y, t)).fold(f64::NEG_INFINITY, f64::max),
        Formula::Always(i, g) => (t + i.start()..=t + i.end())
            .map(|s| oracle(g, y, s))
            .fold(f64::INFINITY, f64::min),
        Formula::Eventually(i, g) => (t + i.start()..=t + i.end())
            .map(|s| oracle(g, y, s))
            .fold(f64::NEG_INFINITY, f64::max),
        Formula::Until(i, g, h) => {
            let mut best = f64::NEG_INFINITY;
            for tp in t + i.start()..=t + i.end() {
                let mut v = oracle(h, y, tp);
                for s in t..tp {
                    v = v.min(oracle(g, y, s));
                }
                best = best.max(v);
            }
            best
        }
    }
}

/// Sum over Or-nodes of the number of bits needed to write `children + 1`
/// selector states, found by repeated doubling.
pub fn tree_walk_binaries(tree: &StlTree) -> usize {
    let own = match tree {
        StlTree::Node {
            combination: Combination::Or,
            children,
            ..
        } => {
            let mut bits = 0;
            while (1usize << bits) < children.len() + 1 {
                bits += 1;
            }
            bits
        }
        _ => 0,
    };
    own + tree.children().iter().map(tree_walk_binaries).sum::<usize>()
}

pub fn leaf_total(tree: &StlTree) -> usize {
    match tree {
        StlTree::Leaf { .. } => 1,
        StlTree::Node { children, .. } => children.iter().map(leaf_total).sum(),
    }
}

/// Random mixed-binary model with at most `max_bin` binaries, a couple of
/// continuous variables and a linear objective. Every row keeps the all-zero
/// binary point reachable for some continuous values in most draws, but
/// infeasible models do occur.
pub fn random_milp(rng: &mut impl Rng, max_bin: usize) -> MilpModel {
    let mut m = MilpModel::new();
    let nb = rng.gen_range(1..=max_bin);
    let nc = rng.gen_range(0..=3);
    let bins: Vec<VarId> = (0..nb).map(|i| m.add_binary(format!("b{i}"), VarRole::Other)).collect();
    let conts: Vec<VarId> = (0..nc)
        .map(|i| m.add_continuous(format!("c{i}"), -5.0, 5.0, VarRole::Other))
        .collect();
    let rows = rng.gen_range(1..=nb + 2);
    for r in 0..rows {
        let mut terms = Vec::new();
        for &v in bins.iter().chain(&conts) {
            if rng.gen_bool(0.6) {
                terms.push((v, rng.gen_range(-4i32..=4) as f64));
            }
        }
        if terms.is_empty() {
            terms.push((bins[0], 1.0));
        }
        let sense = if rng.gen_bool(0.15) { Sense::Eq } else { Sense::Le };
        let rhs = rng.gen_range(-2i32..=6) as f64;
        m.add_constraint(format!("r{r}"), terms, sense, rhs);
    }
    for &v in bins.iter().chain(&conts) {
        let c = rng.gen_range(-5.0..5.0);
        m.objective.linear.push((v, c));
    }
    m
}

/// Minimum over every binary assignment of the LP with those binaries fixed.
pub fn enumerate_milp(model: &MilpModel) -> Option<f64> {
    let bins = model.binaries();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1 << bins.len()) {
        let mut fixed = model.clone();
        for (k, v) in bins.iter().enumerate() {
            let val = ((mask >> k) & 1) as f64;
            fixed.variables[v.0].lower = val;
            fixed.variables[v.0].upper = val;
        }
        let r = solve_lp(&fixed).expect("lp");
        if r.status == LpStatus::Optimal {
            best = Some(best.map_or(r.objective, |b: f64| b.min(r.objective)));
        }
    }
    best
}

/// A small synthesis instance for the double integrator.
pub struct Instance {
    pub spec: String,
    pub regions: BTreeMap<String, RegionDef>,
    pub x0: Vec<f64>,
    pub horizon: usize,
}

fn random_box(rng: &mut impl Rng, name: &str, lo: f64, hi: f64) -> RegionDef {
    let w = rng.gen_range(1.0..2.5);
    let h = rng.gen_range(1.0..2.5);
    let x = rng.gen_range(lo..hi - w);
    let y = rng.gen_range(lo..hi - h);
    RegionDef::new(name, vec![(x, x + w), (y, y + h)]).unwrap()
}

fn overlaps(a: &RegionDef, b: &RegionDef) -> bool {
    a.bounds.iter().zip(&b.bounds).all(|(p, q)| p.0 < q.1 && q.0 < p.1)
}

/// Specification drawn from a pool of eventually / always / or / until
/// templates over three disjoint regions placed around a start that lies
/// outside all of them. Each template mentions at most two boxes, so at most
/// eight linear predicates.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let horizon = rng.gen_range(4..=10);
    let x0: Vec<f64> = vec![rng.gen_range(4.0..10.0), rng.gen_range(4.0..10.0), 0.0, 0.0];
    let (lo, hi) = (x0[0].min(x0[1]) - 3.5, x0[0].max(x0[1]) + 3.5);
    let mut boxes: Vec<RegionDef> = Vec::new();
    for name in ["A", "B", "C"] {
        loop {
            let b = random_box(rng, name, lo, hi);
            if !b.contains(&x0[..2]) && boxes.iter().all(|o| !overlaps(o, &b)) {
                boxes.push(b);
                break;
            }
        }
    }
    let regions = region_map(boxes).unwrap();
    let t = horizon;
    let h = t / 2;
    let pool = [
        format!("F[0,{t}] in(A)"),
        format!("F[0,{t}] in(A) & G[0,{t}] out(B)"),
        format!("F[0,{t}] (in(A) | in(B))"),
        format!("F[0,{t}] in(A) | F[0,{h}] in(B)"),
        format!("!in(B) U[0,{t}] in(A)"),
        format!("out(C) U[1,{t}] in(A)"),
        format!("F[0,{h}] G[0,{h}] in(A)"),
        format!("G[0,{h}] F[0,{h}] in(B) & F[0,{t}] in(A)"),
        format!("F[0,{h}] in(A) & F[{h},{t}] in(B)"),
        format!("G[0,{t}] out(A) & F[0,{t}] in(C)"),
    ];
    let spec = pool[rng.gen_range(0..pool.len())].clone();
    Instance {
        spec,
        regions,
        x0,
        horizon,
    }
}
