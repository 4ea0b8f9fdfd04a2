mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{leaf_total, oracle, random_formula, random_predicate, random_signal, rng, tree_walk_binaries};
use stl_synth::encoder::{encode, EncoderConfig, Encoding};
use stl_synth::formula::{Formula, Signal, StlTree};
use stl_synth::parser::{parse, parse_linear_atom, region_map, RegionDef, SpecSource};
use stl_synth::system::LinearSystem;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn flattening_preserves_robustness_exactly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_formula(&mut r, 4, 12);
        let tree = StlTree::build(&f, 0);
        let flat = tree.flatten();
        let y = random_signal(&mut r, f.horizon() + 1);
        prop_assert_eq!(tree.robustness(&y).unwrap().to_bits(), flat.robustness(&y).unwrap().to_bits());
    }

    #[test]
    fn library_robustness_matches_semantics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_formula(&mut r, 4, 12);
        let y = random_signal(&mut r, f.horizon() + 3);
        let want = oracle(&f, y.samples(), 1);
        prop_assert_eq!(f.robustness(&y, 1).unwrap(), want);
        let tree_value = StlTree::build(&f, 0).robustness(&y).unwrap();
        prop_assert_eq!(tree_value, oracle(&f, y.samples(), 0));
    }

    #[test]
    fn temporal_horizon_adds_window_end(seed in any::<u64>(), a in 0usize..4, len in 0usize..5) {
        let mut r = rng(seed);
        let g = random_formula(&mut r, 3, 8);
        let b = a + len;
        let h = g.horizon();
        prop_assert_eq!(Formula::always(a, b, g.clone()).unwrap().horizon(), b + h);
        prop_assert_eq!(Formula::eventually(a, b, g).unwrap().horizon(), b + h);
    }

    #[test]
    fn satisfaction_is_nonnegative_robustness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_formula(&mut r, 3, 8);
        let y = random_signal(&mut r, f.horizon() + 1);
        let rho = f.robustness(&y, 0).unwrap();
        prop_assert_eq!(f.is_satisfied(&y).unwrap(), rho >= 0.0);
    }

    #[test]
    fn flattening_never_adds_predicted_binaries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = StlTree::build(&random_formula(&mut r, 4, 12), 0);
        prop_assert!(tree.flatten().count_disjunctions().predicted_binaries
            <= tree.count_disjunctions().predicted_binaries);
    }

    #[test]
    fn negated_predicate_flips_robustness(seed in any::<u64>(), y1 in -10.0..10.0f64, y2 in -10.0..10.0f64) {
        let p = random_predicate(&mut rng(seed));
        let text = format!("{}*y1 + {}*y2 <= {}", p.a[0], p.a[1], p.b);
        let parsed = parse_linear_atom(&text, 2).unwrap();
        let neg = parse(&SpecSource::new(format!("!({text})"), Default::default())).unwrap();
        let Formula::Pred(neg) = neg else { panic!("negation of an atom is an atom") };
        prop_assert_eq!(neg.robustness(&[y1, y2]), -parsed.robustness(&[y1, y2]));
    }

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let f = random_formula(&mut rng(seed), 4, 12);
        let text = f.to_string();
        let back = parse(&SpecSource::new(text.clone(), Default::default()));
        prop_assert_eq!(back.as_ref().ok(), Some(&f), "{}", text);
    }

    #[test]
    fn region_tests_are_sound(
        x0 in 0.0..10.0f64, w in 0.5..4.0f64, y0 in 0.0..10.0f64, h in 0.5..4.0f64,
        px in -1.0..15.0f64, py in -1.0..15.0f64,
    ) {
        let regions = region_map(vec![RegionDef::new("R", vec![(x0, x0 + w), (y0, y0 + h)]).unwrap()]).unwrap();
        let inside = parse(&SpecSource::new("in(R)", regions.clone())).unwrap();
        let outside = parse(&SpecSource::new("out(R)", regions)).unwrap();
        let y = Signal::new(vec![vec![px, py]]).unwrap();
        let (ri, ro) = (inside.robustness(&y, 0).unwrap(), outside.robustness(&y, 0).unwrap());
        let strictly_in = px > x0 && px < x0 + w && py > y0 && py < y0 + h;
        let strictly_out = px < x0 || px > x0 + w || py < y0 || py > y0 + h;
        if strictly_in {
            prop_assert!(ri > 0.0 && ro < 0.0);
        }
        if strictly_out {
            prop_assert!(ri < 0.0 && ro > 0.0);
        }
    }

    #[test]
    fn rollout_superposition(seed in any::<u64>(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        // superposition is a property of the linear map, so widen the boxes
        let mut sys = LinearSystem::double_integrator();
        sys.x_bounds = vec![(-1e6, 1e6); 4];
        sys.u_bounds = vec![(-1e6, 1e6); 2];
        sys.y_bounds = vec![(-1e6, 1e6); 2];
        let mut r = rng(seed);
        let steps = r.gen_range(1..12);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| r.gen_range(-1.0..1.0)).collect() };
        let (xa, xb) = (draw(4), draw(4));
        let ua: Vec<Vec<f64>> = (0..steps).map(|_| draw(2)).collect();
        let ub: Vec<Vec<f64>> = (0..steps).map(|_| draw(2)).collect();
        let mix = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(p, q)| alpha * p + beta * q).collect() };
        let um: Vec<Vec<f64>> = ua.iter().zip(&ub).map(|(p, q)| mix(p, q)).collect();
        let ta = sys.rollout(&xa, &ua).unwrap();
        let tb = sys.rollout(&xb, &ub).unwrap();
        let tm = sys.rollout(&mix(&xa, &xb), &um).unwrap();
        for t in 0..tm.x.len() {
            for (i, v) in mix(&ta.x[t], &tb.x[t]).iter().enumerate() {
                prop_assert!((v - tm.x[t][i]).abs() <= 1e-9);
            }
            for (i, v) in mix(&ta.y[t], &tb.y[t]).iter().enumerate() {
                prop_assert!((v - tm.y[t][i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn encoder_counts_match_tree_walk(seed in any::<u64>(), flatten in any::<bool>()) {
        let f = random_formula(&mut rng(seed), 3, 8);
        let sys = LinearSystem::double_integrator();
        let x0 = [1.0, 1.0, 0.0, 0.0];
        let t = f.horizon();
        let ours = encode(&f, &sys, &x0, t, &EncoderConfig::new(Encoding::Proposed).flatten(flatten)).unwrap();
        let std = encode(&f, &sys, &x0, t, &EncoderConfig::new(Encoding::Standard).flatten(flatten)).unwrap();
        let tree = if flatten { StlTree::build(&f, 0).flatten() } else { StlTree::build(&f, 0) };
        prop_assert_eq!(ours.stats.binary_count, tree_walk_binaries(&tree));
        prop_assert_eq!(ours.stats.binary_count, tree.count_disjunctions().predicted_binaries);
        prop_assert_eq!(std.stats.binary_count, leaf_total(&tree));
    }

    #[test]
    fn conjunctions_need_no_binaries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..5);
        let parts: Vec<Formula> = (0..k)
            .map(|_| {
                let a = r.gen_range(0..3);
                let b = a + r.gen_range(0..4);
                Formula::always(a, b, Formula::pred(random_predicate(&mut r))).unwrap()
            })
            .collect();
        let f = Formula::and(parts).unwrap();
        let p = encode(&f, &LinearSystem::double_integrator(), &[1.0, 1.0, 0.0, 0.0], f.horizon(),
            &EncoderConfig::new(Encoding::Proposed)).unwrap();
        prop_assert_eq!(p.stats.binary_count, 0);
    }
}

#[test]
fn zero_robustness_counts_as_satisfied() {
    let f = parse_linear_atom("y1 <= 2", 2).unwrap();
    let y = Signal::new(vec![vec![2.0, 0.0]]).unwrap();
    let f = Formula::pred(f);
    assert_eq!(f.robustness(&y, 0).unwrap(), 0.0);
    assert!(f.is_satisfied(&y).unwrap());
}
