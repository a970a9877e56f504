use causavg::axioms::default_kernel_set;
use causavg::signal::gen_random_steps;
use causavg::{
    check_p3_randomized, count_intervals_exact, falsify, smooth_exact, smooth_exact_exponential, EmaState,
    Kernel, P3Config, PiecewiseConstantSignal, Relation, Verdict,
};
use proptest::prelude::*;

fn signal() -> impl Strategy<Value = PiecewiseConstantSignal> {
    (
        prop::collection::vec((-10.0f64..10.0, 1u32..200), 1..25),
        -10.0f64..10.0,
        -10.0f64..10.0,
        -500i32..500,
    )
        .prop_map(|(pieces, left, right, start)| {
            let mut t = start as f64 / 64.0;
            let mut bp = vec![t];
            let mut values = Vec::new();
            for (v, d) in pieces {
                values.push(v);
                t += d as f64 / 64.0;
                bp.push(t);
            }
            PiecewiseConstantSignal::new(bp, values, left, right).unwrap()
        })
}

fn exact_kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|r| Kernel::exponential(r).unwrap()),
        (0.05f64..10.0).prop_map(|a| Kernel::boxcar(a).unwrap()),
        (2u32..6, 0.2f64..5.0).prop_map(|(n, r)| Kernel::gamma(n, r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn output_stays_within_history(f in signal(), k in exact_kernel()) {
        let g = smooth_exact(&f, &k).unwrap();
        let span = f.end() - f.start();
        for i in 0..=300 {
            let t = f.start() - 1.0 + (span + 5.0 * k.scale() + 1.0) * i as f64 / 300.0;
            let (lo, hi) = f.history_bounds(t);
            let v = g.eval(t);
            let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            prop_assert!(v >= lo - slack && v <= hi + slack, "g({t}) = {v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn smoothing_is_affine_equivariant(f in signal(), k in exact_kernel(), a in -4.0f64..4.0, b in -10.0f64..10.0) {
        let g = smooth_exact(&f, &k).unwrap();
        let ga = smooth_exact(&f.affine(a, b).unwrap(), &k).unwrap();
        for &t in g.breakpoints() {
            prop_assert!((ga.eval(t) - (a * g.eval(t) + b)).abs() <= 1e-10);
        }
    }

    #[test]
    fn outputs_are_continuous(f in signal(), k in exact_kernel()) {
        let g = smooth_exact(&f, &k).unwrap();
        prop_assert!(g.continuity_defect() <= 1e-10, "defect {}", g.continuity_defect());
    }

    #[test]
    fn streaming_matches_offline(f in signal(), rate in 0.01f64..50.0) {
        let g = smooth_exact_exponential(&f, rate).unwrap();
        let bp = f.breakpoints();
        let mut s = EmaState::init(rate, f.left_extension(), bp[0]).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            s = s.step(*v, bp[i + 1]).unwrap();
            prop_assert_eq!(s.value(), g.eval(bp[i + 1]));
        }
    }

    #[test]
    fn exponential_never_adds_intervals(f in signal(), rate in 0.05f64..20.0, c in -10.0f64..10.0) {
        let g = smooth_exact_exponential(&f, rate).unwrap();
        for rel in [Relation::Above, Relation::Below] {
            let cf = match rel {
                Relation::Above => causavg::count_above_intervals(&f, c).count,
                Relation::Below => causavg::count_below_intervals(&f, c).count,
            };
            prop_assert!(count_intervals_exact(&g, c, rel).count <= cf);
        }
    }

    #[test]
    fn intervals_lie_where_the_relation_holds(f in signal(), k in exact_kernel(), c in -10.0f64..10.0) {
        let g = smooth_exact(&f, &k).unwrap();
        let rep = count_intervals_exact(&g, c, Relation::Above);
        prop_assert_eq!(rep.count, rep.intervals.len());
        for (a, b) in rep.intervals {
            prop_assert!(a < b);
            if a.is_finite() && b.is_finite() && b - a > 1e-6 {
                prop_assert!(g.eval(0.5 * (a + b)) > c - 1e-9);
            }
        }
    }
}

#[test]
fn exponential_survives_a_large_search() {
    for rate in [0.1, 1.0, 10.0] {
        let r = falsify(&Kernel::exponential(rate).unwrap(), 10_000, 1).unwrap();
        assert!(r.counterexample.is_none(), "rate {rate}");
        assert_eq!(r.candidates_tried, 10_000);
    }
}

#[test]
fn search_budget_is_monotone() {
    let k = Kernel::boxcar(2.0).unwrap();
    let small = falsify(&k, 1, 5).unwrap();
    let large = falsify(&k, 300, 5).unwrap();
    assert!(small.counterexample.is_some());
    assert_eq!(small.counterexample, large.counterexample);
}

#[test]
fn box_falsified_within_a_hundred_candidates() {
    let k = Kernel::boxcar(3.0).unwrap();
    let r = falsify(&k, 100, 1).unwrap();
    let cx = r.counterexample.unwrap();
    assert_eq!(cx.signal.values(), &[2.0, -3.0, 2.0]);
    assert_eq!((cx.count_f, cx.count_g), (2, 3));
    // The search probes just below zero; the level zero itself also fails.
    assert!(cx.threshold < 0.0 && cx.threshold > -1e-4);
    let g = smooth_exact(&cx.signal, &k).unwrap();
    assert_eq!(count_intervals_exact(&g, 0.0, Relation::Above).count, 3);
}

#[test]
fn randomized_checks_match_theory() {
    let cfg = P3Config {
        seed: 42,
        n_trials: 1000,
        ..P3Config::default()
    };
    let kernels = default_kernel_set();
    assert_eq!(check_p3_randomized(&kernels[0], &cfg).unwrap().verdict, Verdict::Pass);
    assert_eq!(check_p3_randomized(&kernels[2], &cfg).unwrap().verdict, Verdict::Pass);
    let boxed = check_p3_randomized(&Kernel::boxcar(3.0).unwrap(), &cfg).unwrap();
    assert_eq!(boxed.verdict, Verdict::Fail);
    let tri = check_p3_randomized(&kernels[3], &P3Config { n_trials: 64, ..cfg }).unwrap();
    assert!(!tri.exact);
    assert_ne!(tri.verdict, Verdict::Fail);
}

#[test]
fn generators_are_reproducible() {
    let a = gen_random_steps(1, 10, (-1.0, 1.0), (0.5, 2.0)).unwrap();
    assert_eq!(a, gen_random_steps(1, 10, (-1.0, 1.0), (0.5, 2.0)).unwrap());
    assert_ne!(a.values(), gen_random_steps(2, 10, (-1.0, 1.0), (0.5, 2.0)).unwrap().values());
}
