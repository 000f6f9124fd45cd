//! Where to put the relay.
//!
//! The balanced-hop location `l*` solves `t1(l) = t2(l)`, which for the Friis
//! model reduces to `G₁·P_node/(N₁·l²) = G₂·P_relay/(N₂·(d-l)²)`. The rest of
//! this module supports the argument that `l*` is the global minimiser of the
//! asymptotic age `F(l) = (3/2)t1(l) + t2(l)`: the analytic slope `F'(l)`,
//! the right edge of the interval on which `F` is provably increasing, the
//! boundary inequality comparing `F(l*)` with `F(l → d)`, and a brute-force
//! grid search over the simulated finite-`n` age.

use serde::{Deserialize, Serialize};

use crate::aoi::{average_aoi, build_trace, theorem_min_aoi};
use crate::error::{positive, ModelError, Result};
use crate::link_budget::{HopTimes, RadioParams};
use crate::pipeline::{simulate, Link};
use crate::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementSolution<T> {
    /// Distance from the source, l*.
    pub optimal_location: T,
    /// t1 (= t2) at l*.
    pub hop_time_at_optimum: T,
    /// (5/2)·t at l*.
    pub min_asymptotic_aoi: T,
    pub beta: T,
    /// N₁ / N₂.
    pub noise_ratio: T,
    /// β > 1. When false the hops still balance at l* but global optimality
    /// is not established and the interval checks do not apply.
    pub premise_holds: bool,
}

/// Constants of the monotonicity analysis, for the source → relay hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixConstants<T> {
    /// `λ²·G_t·Ḡ_r / ((4π)²·N₁)`.
    pub psi: T,
    /// `L·ψ / (B·ln 2)`.
    pub omega: T,
    /// `ψ·P_node / d²`, the source-hop SNR over the full span.
    pub x: T,
}

fn psi<T: Real>(radio: &RadioParams<T>, gain: T, noise: T) -> T {
    let four_pi = T::lit(4.0) * T::PI();
    radio.wavelength * radio.wavelength * gain / (four_pi * four_pi * noise)
}

fn omega<T: Real>(radio: &RadioParams<T>, psi: T) -> T {
    radio.packet_length * psi / (radio.bandwidth * T::LN_2())
}

pub fn appendix_constants<T: Real>(link: &Link<T>) -> AppendixConstants<T> {
    let psi = psi(&link.radio, link.radio.uplink_gain(), link.noise.n1);
    AppendixConstants {
        psi,
        omega: omega(&link.radio, psi),
        x: psi * link.powers.p_node / (link.span * link.span),
    }
}

/// `β · (N₁/N₂) · (G₂/G₁)`; reduces to `β·N₁/N₂` when the two hop gain
/// products coincide.
pub fn balance_factor<T: Real>(link: &Link<T>) -> T {
    link.powers.beta() * link.noise.ratio() * link.radio.downlink_gain() / link.radio.uplink_gain()
}

/// `l* = d / (1 + sqrt(β·N₁/N₂))`.
pub fn optimal_location<T: Real>(link: &Link<T>) -> Result<PlacementSolution<T>> {
    let l = link.span / (T::one() + balance_factor(link).sqrt());
    let hops = link.hop_times_at(l)?;
    let beta = link.powers.beta();
    Ok(PlacementSolution {
        optimal_location: l,
        hop_time_at_optimum: hops.t1,
        min_asymptotic_aoi: theorem_min_aoi(hops.t1)?,
        beta,
        noise_ratio: link.noise.ratio(),
        premise_holds: beta > T::one(),
    })
}

/// `F(l) = (3/2)·t1(l) + t2(l)`, evaluated for every `l ∈ (0, d)` even
/// though it is the limiting age only where `t1 ≥ t2`; inspect
/// [`HopTimes::regime`] to tell which side of l* a point is on.
pub fn objective<T: Real>(link: &Link<T>, l: T) -> Result<T> {
    let h = link.hop_times_at(l)?;
    Ok(objective_from_hops(&h))
}

fn objective_from_hops<T: Real>(h: &HopTimes<T>) -> T {
    T::lit(1.5) * h.t1 + h.t2
}

/// Limit of `F` as the relay approaches the destination:
/// `(3/2)·L / (B·log₂(1 + x))`.
pub fn objective_far_limit<T: Real>(link: &Link<T>) -> T {
    let x = appendix_constants(link).x;
    T::lit(1.5) * link.radio.packet_length * T::LN_2() / (link.radio.bandwidth * x.ln_1p())
}

/// The two contributions to `F'(l)`: `(3/2)·dt1/dl` (positive) and `dt2/dl`
/// (negative).
pub fn objective_slope_terms<T: Real>(link: &Link<T>, l: T) -> Result<(T, T)> {
    link.hop_times_at(l)?;
    let radio = &link.radio;
    let psi1 = psi(radio, radio.uplink_gain(), link.noise.n1);
    let psi2 = psi(radio, radio.downlink_gain(), link.noise.n2);
    let (w1, w2) = (omega(radio, psi1), omega(radio, psi2));
    let (p1, p2) = (link.powers.p_node, link.powers.p_relay);
    let far = link.span - l;

    let s1 = psi1 * p1 / (l * l);
    let s2 = psi2 * p2 / (far * far);
    let log1 = s1.ln_1p() / T::LN_2();
    let log2 = s2.ln_1p() / T::LN_2();

    let up = T::lit(3.0) * (w1 * p1 / (T::one() + s1)) / (log1 * log1 * l * l * l);
    let down = T::lit(2.0) * (w2 * p2 / (T::one() + s2)) / (log2 * log2 * far * far * far);
    Ok((up, -down))
}

/// Analytic `F'(l)` in s/m.
pub fn objective_slope<T: Real>(link: &Link<T>, l: T) -> Result<T> {
    let (up, down) = objective_slope_terms(link, l)?;
    Ok(up + down)
}

/// `d / (1 + ((2/3)·β·N₁/N₂)^(1/3))`. `F` is increasing on `(l*, bound]`.
pub fn monotonic_upper_bound<T: Real>(link: &Link<T>) -> T {
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    link.span / (T::one() + (two_thirds * balance_factor(link)).cbrt())
}

/// `(1 + 4x)^(3/5) - (1 + x)`; positive exactly when the balanced-hop age is
/// below the `l → d` lower bound.
pub fn boundary_margin<T: Real>(x: T) -> Result<T> {
    positive("x", x)?;
    let four = T::lit(4.0);
    Ok((T::one() + four * x).powf(T::lit(0.6)) - (T::one() + x))
}

/// Positive root of [`boundary_margin`], found by bisection.
pub fn boundary_margin_crossover() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if boundary_margin(mid).expect("mid > 0") > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of a uniform grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum<T> {
    pub location: T,
    pub value: T,
    /// 1-based grid index of `location`.
    pub index: usize,
    pub step: T,
}

/// Minimises `f` over the `points` interior nodes `k·(hi-lo)/(points+1)`,
/// `k = 1..=points`. Ties go to the smallest location.
pub fn grid_argmin<T, F>(lo: T, hi: T, points: usize, mut f: F) -> Result<GridMinimum<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if points < 3 {
        return Err(ModelError::Domain {
            quantity: "grid points",
            requirement: "at least 3",
            value: points as f64,
        });
    }
    let step = (hi - lo) / T::from_count(points as u64 + 1);
    let mut best: Option<GridMinimum<T>> = None;
    for k in 1..=points {
        let location = lo + T::from_count(k as u64) * step;
        let value = f(location)?;
        if best.is_none_or(|b| value < b.value) {
            best = Some(GridMinimum {
                location,
                value,
                index: k,
                step,
            });
        }
    }
    Ok(best.expect("points >= 3"))
}

/// Brute-force minimiser of the simulated average age with `n` packets.
pub fn numeric_argmin<T: Real>(link: &Link<T>, n: u64, grid_points: usize) -> Result<GridMinimum<T>> {
    grid_argmin(T::zero(), link.span, grid_points, |l| {
        let h = link.hop_times_at(l)?;
        let timeline = simulate(h.t1, h.t2, n)?;
        Ok(average_aoi(&build_trace(&timeline)))
    })
}

impl<T: Scalar> GridMinimum<T> {
    /// Distance from `target` in grid steps.
    pub fn steps_from(&self, target: T) -> f64 {
        ((self.location - target) / self.step).to_f64().abs()
    }
}

#[cfg(test)]
// Reference values are kept at the precision they were computed to.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::aoi::exact_avg;
    use crate::link_budget::{NoiseProfile, PowerProfile};
    use crate::scalar::rel_diff;
    use approx::assert_relative_eq;

    fn link(p_node: f64, p_relay: f64, n1: f64, n2: f64, d: f64) -> Link<f64> {
        Link::new(
            RadioParams::reference(),
            PowerProfile::new(p_node, p_relay).unwrap(),
            NoiseProfile::new(n1, n2).unwrap(),
            d,
        )
        .unwrap()
    }

    fn reference() -> Link<f64> {
        link(0.1, 0.5, 1e-10, 1e-10, 500.0)
    }

    // mpmath, 60 digits.
    const L_STAR_500_BETA5: f64 = 154.5084971874737120511467;
    const L_STAR_1000_BETA5_NR2: f64 = 240.2530733520421479998771;
    const BOUND_500_BETA5: f64 = 200.4971059332511734645812;
    const MARGIN_REFERENCE: f64 = 0.3452015579559477564499618;
    const CROSSOVER: f64 = 5.693884372220364805;

    #[test]
    fn optimal_location_cases() {
        let s = optimal_location(&link(0.3, 0.3, 1e-10, 1e-10, 500.0)).unwrap();
        assert_relative_eq!(s.optimal_location, 250.0, max_relative = 1e-15);
        assert!(!s.premise_holds);

        let s = optimal_location(&reference()).unwrap();
        assert_relative_eq!(s.optimal_location, L_STAR_500_BETA5, max_relative = 1e-12);
        assert_relative_eq!(s.beta, 5.0, max_relative = 1e-15);
        assert!(s.premise_holds);
        assert_eq!(s.min_asymptotic_aoi, 2.5 * s.hop_time_at_optimum);

        let l = link(0.1, 0.5, 2e-10, 1e-10, 1000.0);
        let s = optimal_location(&l).unwrap();
        assert_relative_eq!(s.optimal_location, L_STAR_1000_BETA5_NR2, max_relative = 1e-12);
        let equal = optimal_location(&link(0.1, 0.5, 1e-10, 1e-10, 1000.0)).unwrap();
        assert!(s.optimal_location < equal.optimal_location);
    }

    #[test]
    fn hops_balance_at_optimum() {
        for l in [
            reference(),
            link(0.2, 1.0, 1e-10, 2e-10, 1000.0),
            link(0.35, 1.5, 2e-10, 1e-10, 1500.0),
        ] {
            let s = optimal_location(&l).unwrap();
            let h = l.hop_times_at(s.optimal_location).unwrap();
            assert!(rel_diff(h.t1, h.t2) <= 1e-9);
            let lhs = l.powers.p_node / (l.noise.n1 * s.optimal_location.powi(2));
            let rhs = l.powers.p_relay / (l.noise.n2 * (l.span - s.optimal_location).powi(2));
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn unequal_gain_products_still_balance() {
        let mut l = reference();
        l.radio.relay_rx_gain = 0.6;
        let s = optimal_location(&l).unwrap();
        let h = l.hop_times_at(s.optimal_location).unwrap();
        assert!(rel_diff(h.t1, h.t2) <= 1e-9);
    }

    #[test]
    fn power_scaling_leaves_optimum() {
        let a = reference();
        let mut b = a;
        b.powers = a.powers.scaled(7.3);
        let la = optimal_location(&a).unwrap().optimal_location;
        let lb = optimal_location(&b).unwrap().optimal_location;
        assert_relative_eq!(la, lb, max_relative = 1e-12);
    }

    #[test]
    fn objective_at_optimum_is_five_halves_t() {
        let l = reference();
        let s = optimal_location(&l).unwrap();
        let f = objective(&l, s.optimal_location).unwrap();
        assert_relative_eq!(f, s.min_asymptotic_aoi, max_relative = 1e-9);
        for eps in [1e-3, 1e-1, 1.0] {
            assert!(objective(&l, s.optimal_location + eps).unwrap() > f);
        }
    }

    #[test]
    fn objective_near_destination() {
        let l = reference();
        let mut prev_residual = f64::INFINITY;
        for eps in [1e-4, 1e-6, 1e-8] {
            let at = l.span * (1.0 - eps);
            let f = objective(&l, at).unwrap();
            let h = l.hop_times_at(at).unwrap();
            // Source-hop part converges to the closed form; the relay hop
            // vanishes only logarithmically.
            assert_relative_eq!(1.5 * h.t1, objective_far_limit(&l), max_relative = 1e-3);
            let residual = f - objective_far_limit(&l);
            assert!(residual < prev_residual);
            prev_residual = residual;
        }
    }

    #[test]
    fn slope_positive_on_increasing_interval() {
        let l = reference();
        let lo = optimal_location(&l).unwrap().optimal_location;
        let hi = monotonic_upper_bound(&l);
        for k in 0..100 {
            let at = lo + (hi - lo) * (k as f64 + 0.5) / 100.0;
            assert!(objective_slope(&l, at).unwrap() > 0.0);
        }
    }

    #[test]
    fn slope_at_midpoint_of_symmetric_link() {
        let l = link(0.3, 0.3, 1e-10, 1e-10, 600.0);
        let (up, down) = objective_slope_terms(&l, 300.0).unwrap();
        assert_relative_eq!(up, -1.5 * down, max_relative = 1e-12);
        assert!(objective_slope(&l, 300.0).unwrap() > 0.0);
    }

    #[test]
    fn slope_matches_central_difference() {
        let l = reference();
        for at in [60.0, 154.0, 180.0, 300.0] {
            let h = 1e-3;
            let fd = (objective(&l, at + h).unwrap() - objective(&l, at - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(objective_slope(&l, at).unwrap(), fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn upper_bound_cases() {
        let l = reference();
        assert_relative_eq!(monotonic_upper_bound(&l), BOUND_500_BETA5, max_relative = 1e-12);
        assert!(optimal_location(&l).unwrap().optimal_location < monotonic_upper_bound(&l));
        assert_relative_eq!(
            monotonic_upper_bound(&link(0.2, 0.3, 1e-10, 1e-10, 500.0)),
            250.0,
            max_relative = 1e-12
        );
        let mut prev = f64::INFINITY;
        for p_relay in [0.2, 0.5, 1.0, 2.0] {
            let b = monotonic_upper_bound(&link(0.1, p_relay, 1e-10, 1e-10, 500.0));
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn appendix_x_at_reference() {
        let c = appendix_constants(&reference());
        assert_relative_eq!(c.x, 0.3562072862425937277323887, max_relative = 1e-12);
        assert_relative_eq!(c.x, c.psi * 0.1 / 500.0f64.powi(2), max_relative = 1e-15);
        assert!(c.omega > 0.0);
    }

    #[test]
    fn boundary_margin_cases() {
        assert_relative_eq!(
            boundary_margin(0.3562072862425937).unwrap(),
            MARGIN_REFERENCE,
            max_relative = 1e-12
        );
        let small = 1e-6;
        assert_relative_eq!(boundary_margin(small).unwrap() / small, 1.4, max_relative = 1e-4);
        assert!(boundary_margin(100.0).unwrap() < 0.0);
        assert!(boundary_margin(0.0).is_err());
        assert!(boundary_margin(-1.0).is_err());
        assert_relative_eq!(boundary_margin_crossover(), CROSSOVER, max_relative = 1e-12);
    }

    #[test]
    fn grid_argmin_ties_and_errors() {
        let m = grid_argmin(0.0, 4.0, 3, |_| Ok(1.0)).unwrap();
        assert_eq!(m.index, 1);
        assert_eq!(m.location, 1.0);
        assert!(grid_argmin(0.0, 1.0, 2, Ok).is_err());
        let m = grid_argmin(0.0, 10.0, 9, |x: f64| Ok((x - 7.0).powi(2))).unwrap();
        assert_eq!(m.location, 7.0);
    }

    #[test]
    fn numeric_argmin_reference() {
        let l = reference();
        let m = numeric_argmin(&l, 100, 1001).unwrap();
        assert!(m.steps_from(L_STAR_500_BETA5) <= 1.0);
        let s = optimal_location(&l).unwrap();
        let h = l.hop_times_at(s.optimal_location).unwrap();
        assert_relative_eq!(m.value, exact_avg(h.t1, h.t2, 100).unwrap(), max_relative = 2e-3);
    }

    #[test]
    fn numeric_argmin_symmetric() {
        let l = link(0.4, 0.4, 1e-10, 1e-10, 800.0);
        let m = numeric_argmin(&l, 100, 1001).unwrap();
        assert!(m.steps_from(400.0) <= 1.0);
    }
}
