//! Self-verification harness.
//!
//! [`verify`] re-runs every model invariant against an independent route
//! (event simulation, exact rationals, finite differences, brute-force grid
//! search) and returns a [`Report`] with one [`Check`] per property. Checks
//! marked non-gating are reported for information only and never fail the
//! run.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aoi::{
    asymptotic_avg_gt, asymptotic_avg_lt, average_aoi, build_trace, exact_avg, exact_avg_case_gt, exact_avg_case_lt,
    lt_asymptotic_constant, lt_closed_sum,
};
use crate::link_budget::{capacity, hop_times, received_power, span_for_hop_times, Regime};
use crate::numdiff::{relative_step, richardson_central};
use crate::output::csv_string;
use crate::pipeline::{average_delay, delay_limit, simulate};
use crate::placement::{
    appendix_constants, balance_factor, boundary_margin, boundary_margin_crossover, monotonic_upper_bound,
    numeric_argmin, objective, objective_slope, optimal_location,
};
use crate::sweep::{run_sweep, LocationPolicy, NoiseCase, PowerAxis, SweepConfig, SweepRow};
use crate::{rel_diff, Exact, Link, NoiseProfile, PowerProfile, RadioParams, Scalar};

/// Packets per run in the placement experiments.
pub const EXPERIMENT_PACKETS: u64 = 100;
/// Grid size of the brute-force placement search.
pub const ARGMIN_GRID_POINTS: usize = 1001;
/// Reference noise power, W.
pub const REFERENCE_NOISE: f64 = 1e-10;

/// `(p_node, p_relay, span)`: every node power against each matched
/// relay-power / span pair.
pub fn reference_combinations() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for p_node in [0.1, 0.2, 0.35] {
        for (p_relay, span) in [(0.5, 500.0), (1.0, 1000.0), (1.5, 1500.0)] {
            out.push((p_node, p_relay, span));
        }
    }
    out
}

/// `(p_node, p_relay, span)` used for the unequal-noise experiments.
pub fn unequal_noise_combinations() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for p_node in [0.1, 0.2, 0.35] {
        for (p_relay, span) in [(1.0, 1000.0), (1.5, 1500.0)] {
            out.push((p_node, p_relay, span));
        }
    }
    out
}

pub fn reference_link(p_node: f64, p_relay: f64, span: f64, n1: f64, n2: f64) -> Link {
    Link::new(
        RadioParams::reference(),
        PowerProfile::new(p_node, p_relay).expect("positive powers"),
        NoiseProfile::new(n1, n2).expect("positive noise"),
        span,
    )
    .expect("valid link")
}

/// The three interval sweeps of node power, each against its relay power and span.
pub fn interval_sweeps() -> Vec<SweepConfig> {
    [
        ((0.05, 0.35), 0.5, 500.0),
        ((0.1, 0.7), 1.0, 1000.0),
        ((0.15, 1.05), 1.5, 1500.0),
    ]
    .into_iter()
    .map(|((lo, hi), p_relay, span)| SweepConfig {
        p_node_values: PowerAxis::interval(lo, hi, crate::sweep::DEFAULT_INTERVAL_POINTS),
        p_relay_values: vec![p_relay],
        span_values: vec![span],
        noise_cases: vec![NoiseCase {
            n1: REFERENCE_NOISE,
            n2: REFERENCE_NOISE,
        }],
        ..SweepConfig::default()
    })
    .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub gating: bool,
    pub observed: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, observed: f64, tolerance: f64, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            gating: true,
            observed,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `observed <= tolerance`.
    fn at_most(name: &str, observed: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::new(name, observed, tolerance, observed <= tolerance, detail)
    }

    fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed || !c.gating);
        Self { passed, checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.gating && !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match (c.passed, c.gating) {
                (true, true) => "PASS",
                (false, true) => "FAIL",
                (_, false) => "INFO",
            };
            writeln!(
                f,
                "{status} {:<36} observed={:<12.6e} tolerance={:<10.3e} {}",
                c.name, c.observed, c.tolerance, c.detail
            )?;
        }
        let failed = self.failures().count();
        writeln!(
            f,
            "{} checks, {} failed: {}",
            self.checks.len(),
            failed,
            if self.passed { "OK" } else { "FAILED" }
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Multiplies the closed-form relay location before it is compared with
    /// the brute-force search. Anything but 1 should make that check fail.
    pub location_scale: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            location_scale: 1.0,
            seed: 0x05ee_da01,
        }
    }
}

pub fn verify() -> Report {
    verify_with(&VerifyOptions::default())
}

pub fn verify_with(opts: &VerifyOptions) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = vec![
        inverse_square(),
        capacity_monotone(),
        hop_times_monotone(),
        span_round_trip(&mut rng),
        gain_symmetry(),
        delay_formulas(),
        delay_gap_exact(),
        recurrence_vs_closed_form(&mut rng),
        monotone_coupling(&mut rng),
        aoi_anchors(),
        aoi_oracle_equivalence(&mut rng),
        aoi_minimal_n(&mut rng),
        regime_continuity(),
        lt_divergence(&mut rng),
        reset_law(&mut rng),
        age_positivity(&mut rng),
    ];
    checks.extend(gt_convergence());
    checks.extend(asymptotic_discrepancy());
    checks.extend([
        balance_identity(),
        ordering_chain(&mut rng),
        scale_covariance(),
        slope_sign(),
        slope_vs_finite_difference(),
        boundary_margins(),
    ]);
    checks.extend(oracle_agreement(opts));
    checks.extend(sweep_patterns());
    Report::new(checks)
}

fn inverse_square() -> Check {
    let reference = received_power(0.1, 0.9, 1.0, 0.125, 1.0).unwrap();
    let worst = (0..=100)
        .map(|k| 10f64.powf(k as f64 * 0.04))
        .map(|d| rel_diff(received_power(0.1, 0.9, 1.0, 0.125, d).unwrap() * d * d, reference))
        .fold(0.0, f64::max);
    Check::at_most(
        "link.inverse_square",
        worst,
        1e-12,
        "max rel. spread of P_r·d² over d ∈ [1, 1e4] m",
    )
}

fn capacity_monotone() -> Check {
    let values: Vec<f64> = (0..1000).map(|k| capacity(2e7, k as f64 * 0.1).unwrap()).collect();
    let violations = values.windows(2).filter(|w| !(w[1] > w[0])).count();
    Check::at_most(
        "link.capacity_monotone",
        violations as f64,
        0.0,
        "non-increasing steps on a 1000-point SNR grid",
    )
}

fn hop_times_monotone() -> Check {
    let link = reference_link(0.1, 0.5, 500.0, REFERENCE_NOISE, REFERENCE_NOISE);
    let hops: Vec<_> = (1..=1000)
        .map(|k| link.hop_times_at(k as f64 * 500.0 / 1001.0).unwrap())
        .collect();
    let violations = hops
        .windows(2)
        .filter(|w| !(w[1].t1 > w[0].t1 && w[1].t2 < w[0].t2))
        .count();
    Check::at_most(
        "link.hop_times_monotone",
        violations as f64,
        0.0,
        "t1 increasing / t2 decreasing in l, 1000 points",
    )
}

fn span_round_trip(rng: &mut ChaCha8Rng) -> Check {
    let radio = RadioParams::reference();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let powers = PowerProfile::new(rng.gen_range(0.05..0.5), rng.gen_range(0.3..2.0)).unwrap();
        let noise = NoiseProfile::new(
            10f64.powf(rng.gen_range(-10.3..-9.4)),
            10f64.powf(rng.gen_range(-10.3..-9.4)),
        )
        .unwrap();
        let span = rng.gen_range(300.0..2000.0);
        let l = span * rng.gen_range(0.05..0.95);
        let h = hop_times(&radio, &powers, &noise, span, l).unwrap();
        let back = span_for_hop_times(&radio, &powers, &noise, h.t1, h.t2).unwrap();
        worst = worst.max(rel_diff(back, span));
    }
    Check::at_most("link.span_round_trip", worst, 1e-9, "200 random draws")
}

fn gain_symmetry() -> Check {
    let r = RadioParams::reference();
    let d = rel_diff(r.uplink_gain(), r.downlink_gain());
    Check::at_most("link.gain_symmetry", d, 0.0, "G_t·Ḡ_r vs Ḡ_t·G_r with reference gains")
}

const DELAY_PAIRS: [(i64, i64); 3] = [(1, 2), (2, 1), (1, 1)];
const DELAY_COUNTS: [u64; 4] = [1, 10, 1_000, 10_000];

fn delay_formulas() -> Check {
    let mut worst: f64 = 0.0;
    for (a, b) in DELAY_PAIRS {
        let (t1, t2) = (a as f64, b as f64);
        for n in DELAY_COUNTS {
            let sim = average_delay(&simulate(t1, t2, n).unwrap());
            let nf = n as f64;
            let closed = if t1 < t2 {
                (t1 + nf * t2) / nf
            } else {
                (nf * t1 + t2) / nf
            };
            worst = worst.max(rel_diff(sim, closed));
        }
    }
    Check::at_most(
        "pipeline.delay_formulas",
        worst,
        1e-12,
        "simulated vs pre-limit average delay",
    )
}

fn delay_gap_exact() -> Check {
    let mut mismatches = 0;
    for (a, b) in DELAY_PAIRS {
        let (t1, t2) = (Exact::from_integer(a), Exact::from_integer(b));
        for n in DELAY_COUNTS {
            let avg = average_delay(&simulate(t1, t2, n).unwrap());
            if avg - delay_limit(t1, t2) != t1.min_of(t2) / Exact::from_count(n) {
                mismatches += 1;
            }
        }
    }
    Check::at_most(
        "pipeline.delay_gap_exact",
        mismatches as f64,
        0.0,
        "avg - max(t1,t2) == min(t1,t2)/n in exact rationals",
    )
}

fn random_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0))
}

fn recurrence_vs_closed_form(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (t1, t2) = random_pair(rng);
        let tl = simulate(t1, t2, 10_000).unwrap();
        for p in &tl.packets {
            let i = p.index as f64;
            let closed = if t1 < t2 { t1 + i * t2 } else { i * t1 + t2 };
            worst = worst.max(rel_diff(p.dest_arrival, closed));
        }
    }
    Check::at_most(
        "pipeline.recurrence_vs_closed_form",
        worst,
        1e-12,
        "50 random pairs, n = 10^4",
    )
}

fn monotone_coupling(rng: &mut ChaCha8Rng) -> Check {
    let mut violations = 0;
    for _ in 0..50 {
        let (t1, t2) = random_pair(rng);
        let base = simulate(t1, t2, 200).unwrap();
        let shrink = rng.gen_range(0.5..1.0);
        for faster in [
            simulate(t1 * shrink, t2, 200).unwrap(),
            simulate(t1, t2 * shrink, 200).unwrap(),
        ] {
            for (a, b) in base.packets.iter().zip(&faster.packets) {
                if b.forward_start > a.forward_start
                    || b.dest_arrival > a.dest_arrival
                    || b.relay_arrival > a.relay_arrival
                {
                    violations += 1;
                }
            }
        }
    }
    Check::at_most(
        "pipeline.monotone_coupling",
        violations as f64,
        0.0,
        "event times never grow when a hop speeds up",
    )
}

fn simulated_aoi(t1: f64, t2: f64, n: u64) -> f64 {
    average_aoi(&build_trace(&simulate(t1, t2, n).unwrap()))
}

fn aoi_anchors() -> Check {
    let a = rel_diff(simulated_aoi(1.0, 2.0, 10), 148.5 / 21.0);
    let b = rel_diff(simulated_aoi(2.0, 1.0, 1000), 7996.5 / 2001.0);
    Check::at_most(
        "aoi.anchors",
        a.max(b),
        1e-12,
        format!(
            "(1,2,10) → {:.6}, (2,1,1000) → {:.6}",
            simulated_aoi(1.0, 2.0, 10),
            simulated_aoi(2.0, 1.0, 1000)
        ),
    )
}

fn aoi_oracle_equivalence(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let (t1, mut t2) = random_pair(rng);
        if k % 20 == 0 {
            t2 = t1;
        }
        let n = 10f64.powf(rng.gen_range(0.31..4.0)).round().clamp(2.0, 10_000.0) as u64;
        let closed = if t1 < t2 {
            exact_avg_case_lt(t1, t2, n).unwrap()
        } else {
            exact_avg_case_gt(t1, t2, n).unwrap()
        };
        worst = worst.max(rel_diff(simulated_aoi(t1, t2, n), closed));
    }
    Check::at_most("aoi.oracle_equivalence", worst, 1e-9, "200 random (t1, t2, n ≤ 10^4)")
}

fn aoi_minimal_n(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (t1, t2) = random_pair(rng);
        worst = worst.max(rel_diff(simulated_aoi(t1, t2, 2), exact_avg(t1, t2, 2).unwrap()));
    }
    Check::at_most("aoi.minimal_packet_count", worst, 1e-12, "n = 2")
}

fn regime_continuity() -> Check {
    let mut mismatches = 0;
    for t in [Exact::new(1, 1), Exact::new(3, 7), Exact::new(22, 5)] {
        for n in 2..=300 {
            if lt_closed_sum(t, t, n) != exact_avg_case_gt(t, t, n).unwrap() {
                mismatches += 1;
            }
        }
    }
    Check::at_most(
        "aoi.regime_continuity",
        mismatches as f64,
        0.0,
        "both closed forms agree exactly at t1 = t2, n = 2..300",
    )
}

fn lt_divergence(rng: &mut ChaCha8Rng) -> Check {
    let mut violations = 0;
    for _ in 0..10 {
        let (a, b) = random_pair(rng);
        let (t1, t2) = (a.min(b), a.max(b) + 0.01);
        let values: Vec<f64> = (2..=300).map(|n| exact_avg_case_lt(t1, t2, n).unwrap()).collect();
        violations += values.windows(2).filter(|w| !(w[1] > w[0])).count();
    }
    Check::at_most(
        "aoi.lt_divergence",
        violations as f64,
        0.0,
        "t1 < t2: strictly increasing in n",
    )
}

fn gt_convergence() -> Vec<Check> {
    let mut fitted: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for (t1, t2) in [(2.0f64, 1.0f64), (1.0, 1.0), (3.0, 1.0), (0.5, 0.2)] {
        let limit = asymptotic_avg_gt(t1, t2).unwrap();
        let scaled: Vec<f64> = [100u64, 1_000, 10_000]
            .iter()
            .map(|&n| n as f64 * (exact_avg_case_gt(t1, t2, n).unwrap() - limit).abs())
            .collect();
        fitted = fitted.max(scaled.iter().cloned().fold(0.0, f64::max));
        worst_ratio = worst_ratio.max(rel_diff(scaled[2], scaled[1]));
    }
    let at_1e4 = rel_diff(exact_avg_case_gt(2.0, 1.0, 10_000).unwrap(), 4.0);
    vec![
        Check::at_most("aoi.gt_limit_2_1", at_1e4, 1e-3, "|exact(2,1,10^4) - 4| / 4"),
        Check::at_most(
            "aoi.gt_one_over_n_decay",
            worst_ratio,
            0.05,
            format!("n·|gap| stable across n = 10^3, 10^4; fitted K = {fitted:.4}"),
        ),
    ]
}

fn asymptotic_discrepancy() -> Vec<Check> {
    let simplified = asymptotic_avg_lt(1.0, 2.0, 10).unwrap();
    let exact = exact_avg_case_lt(1.0, 2.0, 10).unwrap();
    let exact_constant = lt_asymptotic_constant(1.0, 2.0);
    let simplified_constant = 2.5 * 2.0;
    let info = Check::new(
        "aoi.simplified_vs_exact_lt",
        simplified,
        exact,
        true,
        format!(
            "(5/2)t2 + (n/2)(t2-t1) at (1,2,10) = {simplified}, exact integral = {exact:.6}; \
             constant term (5/2)t2 = {simplified_constant} vs exact (5/2)t1 - t1(t2-t1)/(2t2) = {exact_constant}"
        ),
    )
    .informational();

    // Leading terms agree iff the gap tends to the constant difference.
    let gaps: Vec<f64> = [100u64, 1_000, 10_000]
        .iter()
        .map(|&n| asymptotic_avg_lt(1.0, 2.0, n).unwrap() - exact_avg_case_lt(1.0, 2.0, n).unwrap())
        .collect();
    let target = simplified_constant - exact_constant;
    let drift = (gaps[2] - target).abs();
    let shrinking = (gaps[0] - target).abs() > (gaps[1] - target).abs() && (gaps[1] - target).abs() > drift;
    let leading = Check::new(
        "aoi.leading_term_agreement",
        drift,
        1e-3,
        drift <= 1e-3 && shrinking,
        format!("simplified - exact → {target} (gap/n → 0); gaps at n=10^2,10^3,10^4: {gaps:.6?}"),
    );
    vec![info, leading]
}

fn reset_law(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = random_pair(rng);
        let (t1, t2) = (a.min(b), a.max(b) + 0.01);
        let trace = build_trace(&simulate(t1, t2, 500).unwrap());
        for w in trace.resets.windows(2) {
            worst = worst.max(((w[1].age - w[0].age) - (t2 - t1)).abs() / (t2 - t1));
        }
    }
    Check::at_most(
        "aoi.reset_law",
        worst,
        1e-9,
        "t1 < t2: consecutive reset ages differ by t2 - t1",
    )
}

fn age_positivity(rng: &mut ChaCha8Rng) -> Check {
    let mut violations = 0;
    for _ in 0..50 {
        let (t1, t2) = random_pair(rng);
        let trace = build_trace(&simulate(t1, t2, 300).unwrap());
        let floor = if t1 < t2 { 2.0 * t2 } else { t1 + t2 };
        violations += trace
            .resets
            .iter()
            .filter(|r| !(r.age > 0.0 && r.age >= floor * (1.0 - 1e-12)))
            .count();
    }
    Check::at_most(
        "aoi.age_positivity",
        violations as f64,
        0.0,
        "post-reset age ≥ 2·t2 (lt) or t1 + t2 (gt)",
    )
}

fn noise_cases() -> [(f64, f64); 3] {
    [
        (REFERENCE_NOISE, REFERENCE_NOISE),
        (2.0 * REFERENCE_NOISE, REFERENCE_NOISE),
        (REFERENCE_NOISE, 2.0 * REFERENCE_NOISE),
    ]
}

fn balance_identity() -> Check {
    let mut worst: f64 = 0.0;
    for (p_node, p_relay, span) in reference_combinations() {
        for (n1, n2) in noise_cases() {
            let link = reference_link(p_node, p_relay, span, n1, n2);
            let l = optimal_location(&link).unwrap().optimal_location;
            let lhs = p_node / (n1 * l * l);
            let rhs = p_relay / (n2 * (span - l) * (span - l));
            worst = worst.max(rel_diff(lhs, rhs));
        }
    }
    Check::at_most(
        "placement.balance_identity",
        worst,
        1e-12,
        "P_node/(N1 l²) = P_relay/(N2 (d-l)²) at l*",
    )
}

fn ordering_chain(rng: &mut ChaCha8Rng) -> Check {
    let mut violations = 0;
    let mut tested = 0;
    while tested < 200 {
        let link = reference_link(
            rng.gen_range(0.05..1.0),
            rng.gen_range(0.05..2.0),
            rng.gen_range(200.0..3000.0),
            10f64.powf(rng.gen_range(-10.5..-9.5)),
            10f64.powf(rng.gen_range(-10.5..-9.5)),
        );
        if balance_factor(&link) <= 1.0 {
            continue;
        }
        tested += 1;
        let l = optimal_location(&link).unwrap().optimal_location;
        let bound = monotonic_upper_bound(&link);
        if !(0.0 < l && l < link.span / 2.0 && l < bound && bound < link.span) {
            violations += 1;
        }
    }
    Check::at_most(
        "placement.ordering_chain",
        violations as f64,
        0.0,
        "0 < l* < d/2, l* < bound < d for 200 draws with β·N1/N2 > 1",
    )
}

fn scale_covariance() -> Check {
    let mut worst: f64 = 0.0;
    for (p_node, p_relay, span) in reference_combinations() {
        let link = reference_link(p_node, p_relay, span, REFERENCE_NOISE, REFERENCE_NOISE);
        let mut scaled = link;
        scaled.powers = link.powers.scaled(3.7);
        worst = worst.max(rel_diff(
            optimal_location(&link).unwrap().optimal_location,
            optimal_location(&scaled).unwrap().optimal_location,
        ));
    }
    Check::at_most(
        "placement.scale_covariance",
        worst,
        1e-12,
        "l* invariant under common power scaling",
    )
}

/// 100 interior points of `(l*, monotonic bound)`.
pub fn increasing_interval_points(link: &Link) -> Vec<f64> {
    let lo = optimal_location(link).unwrap().optimal_location;
    let hi = monotonic_upper_bound(link);
    (0..100).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / 100.0).collect()
}

fn slope_links() -> Vec<Link> {
    let mut links = Vec::new();
    for (p_node, p_relay, span) in reference_combinations() {
        for (n1, n2) in noise_cases() {
            links.push(reference_link(p_node, p_relay, span, n1, n2));
        }
    }
    links
}

fn slope_sign() -> Check {
    let mut violations = 0;
    for link in slope_links() {
        for l in increasing_interval_points(&link) {
            if !(objective_slope(&link, l).unwrap() > 0.0) {
                violations += 1;
            }
        }
    }
    Check::at_most(
        "placement.slope_sign",
        violations as f64,
        0.0,
        "F'(l) > 0 on (l*, bound), 100 points × 27 links",
    )
}

fn slope_vs_finite_difference() -> Check {
    let mut worst: f64 = 0.0;
    for link in slope_links() {
        for l in increasing_interval_points(&link) {
            let h = relative_step(l.min(link.span - l));
            let fd = richardson_central(|x| objective(&link, x).unwrap(), l, h);
            worst = worst.max(rel_diff(objective_slope(&link, l).unwrap(), fd));
        }
    }
    Check::at_most(
        "placement.slope_vs_finite_difference",
        worst,
        1e-6,
        "analytic F' vs Richardson central difference",
    )
}

fn boundary_margins() -> Check {
    let mut min_margin = f64::INFINITY;
    for (p_node, p_relay, span) in reference_combinations() {
        let link = reference_link(p_node, p_relay, span, REFERENCE_NOISE, REFERENCE_NOISE);
        min_margin = min_margin.min(boundary_margin(appendix_constants(&link).x).unwrap());
    }
    let anchor = appendix_constants(&reference_link(0.1, 0.5, 500.0, REFERENCE_NOISE, REFERENCE_NOISE)).x;
    Check::new(
        "placement.boundary_margin",
        min_margin,
        0.0,
        min_margin > 0.0,
        format!(
            "(1+4x)^(3/5) > 1+x for all combinations; x = {anchor:.4} at the 500 m / 0.1 W anchor; margin changes sign at x ≈ {:.4}",
            boundary_margin_crossover()
        ),
    )
}

struct ArgminOutcome {
    steps: f64,
    /// Signed relative excess of the grid minimum over the age at l*.
    value_vs_finite_n: f64,
    value_vs_five_halves: f64,
}

fn argmin_outcome(link: &Link, scale: f64) -> ArgminOutcome {
    let solution = optimal_location(link).unwrap();
    let grid = numeric_argmin(link, EXPERIMENT_PACKETS, ARGMIN_GRID_POINTS).unwrap();
    let h = link.hop_times_at(solution.optimal_location).unwrap();
    ArgminOutcome {
        steps: grid.steps_from(scale * solution.optimal_location),
        value_vs_finite_n: {
            let at_optimum = exact_avg(h.t1, h.t2, EXPERIMENT_PACKETS).unwrap();
            (grid.value - at_optimum) / at_optimum
        },
        value_vs_five_halves: rel_diff(grid.value, solution.min_asymptotic_aoi),
    }
}

/// Whether the closed-form location can be expected to win for `link`.
pub fn unequal_noise_gate(link: &Link) -> bool {
    let l = optimal_location(link).unwrap().optimal_location;
    boundary_margin(appendix_constants(link).x).unwrap() > 0.0 && l < monotonic_upper_bound(link)
}

fn oracle_agreement(opts: &VerifyOptions) -> Vec<Check> {
    let mut equal = Vec::new();
    for (p_node, p_relay, span) in reference_combinations() {
        equal.push(argmin_outcome(
            &reference_link(p_node, p_relay, span, REFERENCE_NOISE, REFERENCE_NOISE),
            opts.location_scale,
        ));
    }
    let mut unequal = Vec::new();
    let mut gated_out = 0;
    for (p_node, p_relay, span) in unequal_noise_combinations() {
        for (n1, n2) in [
            (2.0 * REFERENCE_NOISE, REFERENCE_NOISE),
            (REFERENCE_NOISE, 2.0 * REFERENCE_NOISE),
        ] {
            let link = reference_link(p_node, p_relay, span, n1, n2);
            if n1 < n2 && !unequal_noise_gate(&link) {
                gated_out += 1;
                continue;
            }
            unequal.push(argmin_outcome(&link, opts.location_scale));
        }
    }
    let max = |v: &[ArgminOutcome], f: fn(&ArgminOutcome) -> f64| v.iter().map(f).fold(0.0, f64::max);
    let five_halves_gap = max(&equal, |o| o.value_vs_five_halves);
    let n = EXPERIMENT_PACKETS as f64;
    vec![
        Check::at_most(
            "placement.argmin_agreement",
            max(&equal, |o| o.steps),
            1.0,
            "grid steps between the brute-force argmin (n = 100, 1001 points) and d/(1+√β)",
        ),
        Check::at_most(
            "placement.argmin_agreement_unequal_noise",
            max(&unequal, |o| o.steps),
            1.0,
            format!(
                "grid steps from d/(1+√(β N1/N2)), {} cases, {gated_out} gated out",
                unequal.len()
            ),
        ),
        {
            let all: Vec<f64> = equal.iter().chain(&unequal).map(|o| o.value_vs_finite_n).collect();
            let lowest = all.iter().cloned().fold(f64::INFINITY, f64::min);
            let highest = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Check::new(
                "placement.optimum_not_beaten_by_grid",
                highest,
                5e-3,
                lowest >= -1e-12 && highest <= 5e-3,
                format!(
                    "(grid min - age at l*) / age at l* in [{lowest:.3e}, {highest:.3e}]; \
                     the n-packet age has its kink minimum at t1 = t2"
                ),
            )
        },
        Check::new(
            "placement.argmin_value_vs_five_halves_t",
            five_halves_gap,
            0.01,
            five_halves_gap <= 0.01,
            format!(
                "grid minimum vs (5/2)·t1(l*); with n packets the balanced-hop value is t·(2.5n - 0.5)/(n + 1), \
                 {:.4} below (5/2)t at n = 100",
                1.2 / (n + 1.0)
            ),
        )
        .informational(),
    ]
}

/// Rows of one `(p_node, p_relay, span, noise)` cell keyed by policy.
fn cell<'a>(rows: &'a [SweepRow], probe: &SweepRow) -> Vec<&'a SweepRow> {
    rows.iter()
        .filter(|r| {
            r.p_node_w == probe.p_node_w
                && r.p_relay_w == probe.p_relay_w
                && r.span_m == probe.span_m
                && r.n1_w == probe.n1_w
                && r.n2_w == probe.n2_w
        })
        .collect()
}

fn aoi_of(cell: &[&SweepRow], policy: &str) -> f64 {
    cell.iter()
        .find(|r| r.policy == policy)
        .map(|r| r.average_instant_aoi_sim_s)
        .unwrap_or(f64::NAN)
}

/// Per cell of a reference sweep: `(optimal wins strictly, mid ≤ worst end)`.
pub fn cell_orderings(rows: &[SweepRow]) -> Vec<(bool, bool)> {
    rows.iter()
        .filter(|r| r.policy == LocationPolicy::OPTIMAL.to_string())
        .map(|probe| {
            let c = cell(rows, probe);
            let (opt, fifth, mid, four_fifths) = (
                aoi_of(&c, "optimal"),
                aoi_of(&c, "0.2"),
                aoi_of(&c, "0.5"),
                aoi_of(&c, "0.8"),
            );
            (
                opt < fifth && opt < mid && opt < four_fifths,
                mid <= fifth.max(four_fifths),
            )
        })
        .collect()
}

/// For a sweep along node power: `(AoI(d/2) - AoI(l*)` strictly decreasing
/// while P_node < P_relay, `AoI(d/5)` higher at the last sample than the first).
pub fn power_trends(rows: &[SweepRow]) -> (bool, bool) {
    let opt: Vec<&SweepRow> = rows.iter().filter(|r| r.policy == "optimal").collect();
    let gaps: Vec<f64> = opt
        .iter()
        .filter(|r| r.p_node_w < r.p_relay_w)
        .map(|probe| {
            let c = cell(rows, probe);
            aoi_of(&c, "0.5") - aoi_of(&c, "optimal")
        })
        .collect();
    let shrinking = gaps.len() >= 2 && gaps.windows(2).all(|w| w[1] < w[0]);
    let fifth: Vec<f64> = opt.iter().map(|probe| aoi_of(&cell(rows, probe), "0.2")).collect();
    let rising = fifth.len() >= 2 && fifth[fifth.len() - 1] > fifth[0];
    (shrinking, rising)
}

fn sweep_patterns() -> Vec<Check> {
    let cfg = SweepConfig::default();
    let rows = match run_sweep(&cfg) {
        Ok(rows) => rows,
        Err(e) => return vec![Check::new("sweep.default_runs", 1.0, 0.0, false, e.to_string())],
    };
    let orderings = cell_orderings(&rows);
    let not_best = orderings.iter().filter(|o| !o.0).count();
    let mid_above = orderings.iter().filter(|o| !o.1).count();
    let determinism = csv_string(&rows) == csv_string(&run_sweep(&cfg).unwrap());
    let lt_rows = rows.iter().filter(|r| r.regime == Regime::Lt).count();

    let mut shrink_fail = 0;
    let mut rise_fail = 0;
    let mut groups = 0;
    let mut trend_sets: Vec<Vec<SweepRow>> = interval_sweeps().iter().map(|c| run_sweep(c).unwrap()).collect();
    for (p_relay, span) in [(0.5, 500.0), (1.0, 1000.0), (1.5, 1500.0)] {
        trend_sets.push(
            rows.iter()
                .filter(|r| r.p_relay_w == p_relay && r.span_m == span && r.n1_w == r.n2_w)
                .cloned()
                .collect(),
        );
    }
    for set in &trend_sets {
        groups += 1;
        let (shrinking, rising) = power_trends(set);
        shrink_fail += usize::from(!shrinking);
        rise_fail += usize::from(!rising);
    }

    vec![
        Check::at_most(
            "sweep.optimal_is_best",
            not_best as f64,
            0.0,
            format!(
                "cells where l* does not strictly beat d/5, d/2, 4d/5 ({} cells)",
                orderings.len()
            ),
        ),
        Check::at_most(
            "sweep.midpoint_below_worst_end",
            mid_above as f64,
            0.0,
            "AoI(d/2) ≤ max(AoI(d/5), AoI(4d/5))",
        ),
        Check::at_most(
            "sweep.gap_shrinks_with_node_power",
            shrink_fail as f64,
            0.0,
            format!("AoI(d/2) - AoI(l*) decreasing in P_node, equal noise, {groups} power sweeps"),
        ),
        Check::at_most(
            "sweep.fifth_span_rises_with_node_power",
            rise_fail as f64,
            0.0,
            "AoI(d/5) last sample > first sample",
        ),
        Check::new(
            "sweep.deterministic_csv",
            if determinism { 0.0 } else { 1.0 },
            0.0,
            determinism,
            format!(
                "two runs byte-identical; {} rows, {lt_rows} in the t1 < t2 regime, each cross-checked to 1e-9",
                rows.len()
            ),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations() {
        assert_eq!(reference_combinations().len(), 9);
        assert!(reference_combinations().iter().all(|(p, r, _)| r > p));
        assert_eq!(unequal_noise_combinations().len(), 6);
    }

    #[test]
    fn report_gating() {
        let ok = Check::at_most("a", 0.0, 1.0, "");
        let bad_info = Check::at_most("b", 2.0, 1.0, "").informational();
        assert!(Report::new(vec![ok.clone(), bad_info]).passed);
        let bad = Check::at_most("c", 2.0, 1.0, "");
        let r = Report::new(vec![ok, bad]);
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        assert!(r.to_string().contains("FAIL c"));
    }
}
