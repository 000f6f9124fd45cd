use proptest::prelude::*;
use relay_aoi::aoi::{average_aoi, build_trace, exact_avg, streaming_average_aoi};
use relay_aoi::link_budget::{hop_times, span_for_hop_times};
use relay_aoi::pipeline::{average_delay, delay_limit, simulate, streaming_average_delay};
use relay_aoi::placement::{balance_factor, monotonic_upper_bound, optimal_location};
use relay_aoi::sweep::{run_sweep, LocationPolicy, NoiseCase, PowerAxis, SweepConfig};
use relay_aoi::verify::{verify_with, VerifyOptions};
use relay_aoi::{output, rel_diff, Exact, Link, NoiseProfile, PowerProfile, RadioParams};

fn hop() -> impl Strategy<Value = f64> {
    0.001f64..10.0
}

fn link() -> impl Strategy<Value = Link> {
    (
        0.05f64..1.0,
        0.05f64..2.0,
        100f64..3000.0,
        -10.5f64..-9.5,
        -10.5f64..-9.5,
    )
        .prop_map(|(pn, pr, d, a, b)| {
            Link::new(
                RadioParams::reference(),
                PowerProfile::new(pn, pr).unwrap(),
                NoiseProfile::new(10f64.powf(a), 10f64.powf(b)).unwrap(),
                d,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn span_round_trip(link in link(), frac in 0.02f64..0.98) {
        let h = hop_times(&link.radio, &link.powers, &link.noise, link.span, frac * link.span).unwrap();
        let d = span_for_hop_times(&link.radio, &link.powers, &link.noise, h.t1, h.t2).unwrap();
        prop_assert!(rel_diff(d, link.span) < 1e-9);
    }

    #[test]
    fn simulation_matches_closed_form(t1 in hop(), t2 in hop(), n in 1u64..3000) {
        let sim = average_aoi(&build_trace(&simulate(t1, t2, n).unwrap()));
        prop_assert!(rel_diff(sim, exact_avg(t1, t2, n).unwrap()) < 1e-9);
    }

    #[test]
    fn exact_rationals_match_closed_form(a in 1i64..40, b in 1i64..40, n in 1u64..60) {
        let (t1, t2) = (Exact::new(a, 7), Exact::new(b, 7));
        let sim = average_aoi(&build_trace(&simulate(t1, t2, n).unwrap()));
        prop_assert_eq!(sim, exact_avg(t1, t2, n).unwrap());
    }

    #[test]
    fn streaming_matches_timeline(t1 in hop(), t2 in hop(), n in 1u64..2000) {
        let tl = simulate(t1, t2, n).unwrap();
        prop_assert!(rel_diff(streaming_average_delay(t1, t2, n).unwrap(), average_delay(&tl)) < 1e-12);
        let streamed = streaming_average_aoi(t1, t2, n).unwrap();
        prop_assert!(rel_diff(streamed, average_aoi(&build_trace(&tl))) < 1e-12);
    }

    #[test]
    fn delay_gap_is_min_over_n(a in 1i64..50, b in 1i64..50, n in 1u64..500) {
        let (t1, t2) = (Exact::new(a, 3), Exact::new(b, 3));
        let avg = average_delay(&simulate(t1, t2, n).unwrap());
        prop_assert_eq!(avg - delay_limit(t1, t2), t1.min(t2) / Exact::from_integer(n as i64));
    }

    #[test]
    fn speeding_up_a_hop_never_delays_anything(t1 in hop(), t2 in hop(), s in 0.1f64..1.0, n in 1u64..300) {
        let base = simulate(t1, t2, n).unwrap();
        for faster in [simulate(t1 * s, t2, n).unwrap(), simulate(t1, t2 * s, n).unwrap()] {
            for (a, b) in base.packets.iter().zip(&faster.packets) {
                prop_assert!(b.dest_arrival <= a.dest_arrival);
                prop_assert!(b.forward_start <= a.forward_start);
            }
        }
    }

    #[test]
    fn age_is_never_negative(t1 in hop(), t2 in hop(), n in 1u64..300) {
        let trace = build_trace(&simulate(t1, t2, n).unwrap());
        for (_, age) in trace.breakpoints() {
            prop_assert!(age >= 0.0);
        }
    }

    #[test]
    fn single_precision_tracks_double(t1 in 0.01f32..1.0, t2 in 0.01f32..1.0, n in 1u64..200) {
        let lo = average_aoi(&build_trace(&simulate(t1, t2, n).unwrap()));
        let hi = exact_avg(t1 as f64, t2 as f64, n).unwrap();
        prop_assert!(rel_diff(lo as f64, hi) < 1e-3);
    }

    #[test]
    fn balanced_location_precedes_bound(link in link()) {
        let sol = optimal_location(&link).unwrap();
        let h = link.hop_times_at(sol.optimal_location).unwrap();
        prop_assert!(rel_diff(h.t1, h.t2) < 1e-9);
        // sqrt(b) > ((2/3) b)^(1/3) exactly when b > 4/9.
        let b = balance_factor(&link);
        if b > 4.0 / 9.0 + 1e-9 {
            prop_assert!(sol.optimal_location < monotonic_upper_bound(&link));
        } else if b < 4.0 / 9.0 - 1e-9 {
            prop_assert!(sol.optimal_location > monotonic_upper_bound(&link));
        }
    }
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let cfg = SweepConfig {
        p_node_values: PowerAxis::interval(0.1, 0.4, 5),
        p_relay_values: vec![0.5, 1.0],
        span_values: vec![500.0],
        noise_cases: vec![NoiseCase { n1: 1e-10, n2: 1e-10 }],
        relay_location_policies: vec![LocationPolicy::OPTIMAL, LocationPolicy::Fraction(0.5)],
        ..SweepConfig::default()
    };
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 5 * 2 * 2);
    assert_eq!(output::csv_string(&rows), output::csv_string(&run_sweep(&cfg).unwrap()));
    let keys: Vec<(f64, f64)> = rows.iter().step_by(2).map(|r| (r.p_node_w, r.p_relay_w)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
}

#[test]
fn single_cell_config_gives_one_row() {
    let cfg = SweepConfig {
        p_node_values: vec![0.1].into(),
        p_relay_values: vec![0.5],
        span_values: vec![500.0],
        noise_cases: vec![NoiseCase { n1: 1e-10, n2: 1e-10 }],
        relay_location_policies: vec![LocationPolicy::OPTIMAL],
        ..SweepConfig::default()
    };
    assert_eq!(run_sweep(&cfg).unwrap().len(), 1);
}

#[test]
fn perturbed_closed_form_location_is_caught() {
    let clean = verify_with(&VerifyOptions::default());
    assert!(clean.passed, "{clean}");
    let mutated = verify_with(&VerifyOptions {
        location_scale: 1.01,
        ..VerifyOptions::default()
    });
    assert!(!mutated.passed);
    assert!(!mutated.check("placement.argmin_agreement").unwrap().passed);
}
