//! Declarative experiment grids.
//!
//! A [`SweepConfig`] is read from a single JSON document. Every axis is a
//! list; [`run_sweep`] evaluates the Cartesian product in the fixed order
//! `p_node × p_relay × span × noise_case × policy` and returns one
//! [`SweepRow`] per cell. Each row re-derives the average age twice (exact
//! sawtooth integration over the simulated timeline and the closed-form sum)
//! and refuses to emit a row where they disagree.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aoi::{asymptotic_avg_gt, asymptotic_avg_lt, average_aoi, build_trace, exact_avg, streaming_average_aoi};
use crate::error::ModelError;
use crate::link_budget::Regime;
use crate::pipeline::{average_delay, simulate, streaming_average_delay, MAX_TIMELINE_PACKETS};
use crate::placement::optimal_location;
use crate::{rel_diff, AoiTrace, Link, NoiseProfile, PlacementSolution, PowerProfile, RadioParams};

/// Relative tolerance of the per-row simulation / closed-form cross-check.
pub const ROW_CROSS_CHECK_TOLERANCE: f64 = 1e-9;

/// Interior points used when a power axis is given as an interval.
pub const DEFAULT_INTERVAL_POINTS: usize = 13;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse configuration {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("scenario {coordinates}: {source}")]
    Row {
        coordinates: String,
        #[source]
        source: ModelError,
    },

    #[error("scenario {coordinates}: simulated age {simulated} s disagrees with closed form {closed_form} s")]
    CrossCheck {
        coordinates: String,
        simulated: f64,
        closed_form: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl SweepError {
    pub fn is_io(&self) -> bool {
        matches!(self, SweepError::Io { .. } | SweepError::Csv { .. })
    }
}

/// Radio overrides; anything omitted takes the reference value.
/// Bandwidth may be given in Hz or MHz, not both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_tx_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_rx_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_tx_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_rx_gain: Option<f64>,
    /// Bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_length: Option<f64>,
}

impl RadioConfig {
    pub fn resolve(&self) -> Result<RadioParams, SweepError> {
        let base = RadioParams::reference();
        let bandwidth = match (self.bandwidth, self.bandwidth_mhz) {
            (Some(_), Some(_)) => {
                return Err(SweepError::Config(
                    "radio: give either bandwidth (Hz) or bandwidth_mhz, not both".into(),
                ))
            }
            (Some(hz), None) => hz,
            (None, Some(mhz)) => mhz * 1e6,
            (None, None) => base.bandwidth,
        };
        let radio = RadioParams {
            wavelength: self.wavelength.unwrap_or(base.wavelength),
            bandwidth,
            node_tx_gain: self.node_tx_gain.unwrap_or(base.node_tx_gain),
            node_rx_gain: self.node_rx_gain.unwrap_or(base.node_rx_gain),
            relay_tx_gain: self.relay_tx_gain.unwrap_or(base.relay_tx_gain),
            relay_rx_gain: self.relay_rx_gain.unwrap_or(base.relay_rx_gain),
            packet_length: self.packet_length.unwrap_or(base.packet_length),
        };
        radio
            .validate()
            .map_err(|e| SweepError::Config(format!("radio: {e}")))?;
        Ok(radio)
    }
}

/// A power axis: explicit values, or an open interval sampled uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerAxis {
    Values(Vec<f64>),
    Interval {
        interval: [f64; 2],
        #[serde(default = "default_interval_points")]
        points: usize,
    },
}

fn default_interval_points() -> usize {
    DEFAULT_INTERVAL_POINTS
}

impl PowerAxis {
    /// `points` interior samples of `(lo, hi)`, endpoints excluded.
    pub fn interval(lo: f64, hi: f64, points: usize) -> Self {
        PowerAxis::Interval {
            interval: [lo, hi],
            points,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            PowerAxis::Values(v) => v.clone(),
            PowerAxis::Interval {
                interval: [lo, hi],
                points,
            } => (1..=*points)
                .map(|k| lo + (hi - lo) * k as f64 / (*points as f64 + 1.0))
                .collect(),
        }
    }
}

impl From<Vec<f64>> for PowerAxis {
    fn from(v: Vec<f64>) -> Self {
        PowerAxis::Values(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseCase {
    pub n1: f64,
    pub n2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedPolicy {
    Optimal,
}

/// Where to put the relay in a row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LocationPolicy {
    /// Fraction of the span, strictly between 0 and 1.
    Fraction(f64),
    /// The balanced-hop location.
    Named(NamedPolicy),
}

impl LocationPolicy {
    pub const OPTIMAL: LocationPolicy = LocationPolicy::Named(NamedPolicy::Optimal);

    pub fn resolve(&self, span: f64, solution: &PlacementSolution) -> f64 {
        match self {
            LocationPolicy::Fraction(f) => f * span,
            LocationPolicy::Named(NamedPolicy::Optimal) => solution.optimal_location,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LocationPolicy::Named(NamedPolicy::Optimal))
    }
}

impl fmt::Display for LocationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationPolicy::Fraction(x) => write!(f, "{x}"),
            LocationPolicy::Named(NamedPolicy::Optimal) => f.write_str("optimal"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub radio: RadioConfig,
    pub p_node_values: PowerAxis,
    pub p_relay_values: Vec<f64>,
    pub span_values: Vec<f64>,
    pub noise_cases: Vec<NoiseCase>,
    pub relay_location_policies: Vec<LocationPolicy>,
    pub packet_count: u64,
    pub output: OutputPaths,
}

impl Default for SweepConfig {
    /// The reference experiment: three node powers, three relay powers,
    /// three spans, equal and both unequal noise cases, relay at d/5, l*,
    /// d/2 and 4d/5, 100 packets.
    fn default() -> Self {
        Self {
            radio: RadioConfig::default(),
            p_node_values: PowerAxis::Values(vec![0.1, 0.2, 0.35]),
            p_relay_values: vec![0.5, 1.0, 1.5],
            span_values: vec![500.0, 1000.0, 1500.0],
            noise_cases: vec![
                NoiseCase { n1: 1e-10, n2: 1e-10 },
                NoiseCase { n1: 2e-10, n2: 1e-10 },
                NoiseCase { n1: 1e-10, n2: 2e-10 },
            ],
            relay_location_policies: vec![
                LocationPolicy::Fraction(0.2),
                LocationPolicy::OPTIMAL,
                LocationPolicy::Fraction(0.5),
                LocationPolicy::Fraction(0.8),
            ],
            packet_count: 100,
            output: OutputPaths::default(),
        }
    }
}

fn check_list(name: &str, values: &[f64]) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(SweepError::Config(format!("{name} must not be empty")));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(SweepError::Config(format!(
            "{name}: {v} is not a positive finite number"
        )));
    }
    Ok(())
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|source| SweepError::Io {
            path: path.to_owned(),
            source,
        })?;
        let cfg = Self::from_json(&text).map_err(|source| SweepError::Parse {
            path: path.to_owned(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.radio.resolve()?;
        if let PowerAxis::Interval {
            interval: [lo, hi],
            points,
        } = &self.p_node_values
        {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= *lo && lo < hi) || *points == 0 {
                return Err(SweepError::Config(format!(
                    "p_node_values: interval ({lo}, {hi}) with {points} points is not a valid sampling"
                )));
            }
        }
        check_list("p_node_values", &self.p_node_values.values())?;
        check_list("p_relay_values", &self.p_relay_values)?;
        check_list("span_values", &self.span_values)?;
        if self.noise_cases.is_empty() {
            return Err(SweepError::Config("noise_cases must not be empty".into()));
        }
        for c in &self.noise_cases {
            NoiseProfile::new(c.n1, c.n2).map_err(|e| SweepError::Config(format!("noise_cases: {e}")))?;
        }
        if self.relay_location_policies.is_empty() {
            return Err(SweepError::Config("relay_location_policies must not be empty".into()));
        }
        for p in &self.relay_location_policies {
            if let LocationPolicy::Fraction(f) = p {
                if !(*f > 0.0 && *f < 1.0) {
                    return Err(SweepError::Config(format!(
                        "relay_location_policies: fraction {f} is outside (0, 1)"
                    )));
                }
            }
        }
        if self.packet_count == 0 {
            return Err(SweepError::Config("packet_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Every `(p_node, p_relay, span, noise)` combination, in row order.
    pub fn links(&self) -> Result<Vec<(Link, NoiseCase)>, SweepError> {
        let radio = self.radio.resolve()?;
        let mut out = Vec::new();
        for p_node in self.p_node_values.values() {
            for &p_relay in &self.p_relay_values {
                for &span in &self.span_values {
                    for &nc in &self.noise_cases {
                        let coords = Coordinates {
                            p_node,
                            p_relay,
                            span,
                            noise: nc,
                            policy: None,
                        };
                        let link = PowerProfile::new(p_node, p_relay)
                            .and_then(|powers| Link::new(radio, powers, NoiseProfile::new(nc.n1, nc.n2)?, span))
                            .map_err(|source| SweepError::Row {
                                coordinates: coords.to_string(),
                                source,
                            })?;
                        out.push((link, nc));
                    }
                }
            }
        }
        Ok(out)
    }
}

struct Coordinates {
    p_node: f64,
    p_relay: f64,
    span: f64,
    noise: NoiseCase,
    policy: Option<LocationPolicy>,
}

impl fmt::Display for Coordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(p_node={}, p_relay={}, span={}, n1={}, n2={}",
            self.p_node, self.p_relay, self.span, self.noise.n1, self.noise.n2
        )?;
        if let Some(p) = &self.policy {
            write!(f, ", policy={p}")?;
        }
        f.write_str(")")
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p_node_w: f64,
    pub p_relay_w: f64,
    pub span_m: f64,
    pub n1_w: f64,
    pub n2_w: f64,
    pub policy: String,
    pub packet_count: u64,
    pub wavelength_m: f64,
    pub bandwidth_hz: f64,
    pub node_tx_gain: f64,
    pub node_rx_gain: f64,
    pub relay_tx_gain: f64,
    pub relay_rx_gain: f64,
    pub packet_length_bits: f64,
    pub relay_location_m: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub regime: Regime,
    pub average_delay_s: f64,
    pub average_instant_aoi_sim_s: f64,
    pub exact_closed_form_s: f64,
    pub asymptotic_closed_form_s: f64,
    pub optimal_location_for_row_m: f64,
}

/// Evaluates a single scenario. Also returns the sawtooth when the run is
/// small enough to materialise.
pub fn evaluate_row(
    link: &Link,
    policy: LocationPolicy,
    packet_count: u64,
) -> Result<(SweepRow, Option<AoiTrace>), SweepError> {
    let coords = Coordinates {
        p_node: link.powers.p_node,
        p_relay: link.powers.p_relay,
        span: link.span,
        noise: NoiseCase {
            n1: link.noise.n1,
            n2: link.noise.n2,
        },
        policy: Some(policy),
    };
    let row_err = |source| SweepError::Row {
        coordinates: coords.to_string(),
        source,
    };

    let solution = optimal_location(link).map_err(row_err)?;
    let location = policy.resolve(link.span, &solution);
    let hops = link.hop_times_at(location).map_err(row_err)?;
    let (t1, t2, n) = (hops.t1, hops.t2, packet_count);

    let (delay, sim_aoi, trace) = if n <= MAX_TIMELINE_PACKETS {
        let timeline = simulate(t1, t2, n).map_err(row_err)?;
        let trace = build_trace(&timeline);
        (average_delay(&timeline), average_aoi(&trace), Some(trace))
    } else {
        (
            streaming_average_delay(t1, t2, n).map_err(row_err)?,
            streaming_average_aoi(t1, t2, n).map_err(row_err)?,
            None,
        )
    };
    let exact = exact_avg(t1, t2, n).map_err(row_err)?;
    if !(rel_diff(sim_aoi, exact) <= ROW_CROSS_CHECK_TOLERANCE) {
        return Err(SweepError::CrossCheck {
            coordinates: coords.to_string(),
            simulated: sim_aoi,
            closed_form: exact,
        });
    }
    let asymptotic = match hops.regime() {
        Regime::Lt => asymptotic_avg_lt(t1, t2, n),
        Regime::Eq | Regime::Gt => asymptotic_avg_gt(t1, t2),
    }
    .map_err(row_err)?;

    let r = &link.radio;
    let row = SweepRow {
        p_node_w: link.powers.p_node,
        p_relay_w: link.powers.p_relay,
        span_m: link.span,
        n1_w: link.noise.n1,
        n2_w: link.noise.n2,
        policy: policy.to_string(),
        packet_count: n,
        wavelength_m: r.wavelength,
        bandwidth_hz: r.bandwidth,
        node_tx_gain: r.node_tx_gain,
        node_rx_gain: r.node_rx_gain,
        relay_tx_gain: r.relay_tx_gain,
        relay_rx_gain: r.relay_rx_gain,
        packet_length_bits: r.packet_length,
        relay_location_m: location,
        t1_s: t1,
        t2_s: t2,
        regime: hops.regime(),
        average_delay_s: delay,
        average_instant_aoi_sim_s: sim_aoi,
        exact_closed_form_s: exact,
        asymptotic_closed_form_s: asymptotic,
        optimal_location_for_row_m: solution.optimal_location,
    };
    Ok((row, trace))
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    config.validate()?;
    let mut rows = Vec::new();
    for (link, _) in config.links()? {
        for &policy in &config.relay_location_policies {
            rows.push(evaluate_row(&link, policy, config.packet_count)?.0);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_json() {
        let cfg = SweepConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SweepConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_json_takes_defaults() {
        let cfg = SweepConfig::from_json(r#"{"packet_count": 7, "radio": {"bandwidth_mhz": 20}}"#).unwrap();
        assert_eq!(cfg.packet_count, 7);
        assert_eq!(cfg.radio.resolve().unwrap(), RadioParams::reference());
        assert_eq!(cfg.span_values, vec![500.0, 1000.0, 1500.0]);
    }

    #[test]
    fn policies_parse_from_numbers_and_names() {
        let cfg = SweepConfig::from_json(r#"{"relay_location_policies": [0.25, "optimal"]}"#).unwrap();
        assert_eq!(
            cfg.relay_location_policies,
            vec![LocationPolicy::Fraction(0.25), LocationPolicy::OPTIMAL]
        );
        assert!(SweepConfig::from_json(r#"{"relay_location_policies": ["best"]}"#).is_err());
    }

    #[test]
    fn interval_axis_excludes_endpoints() {
        let cfg = SweepConfig::from_json(r#"{"p_node_values": {"interval": [0.05, 0.35]}}"#).unwrap();
        let v = cfg.p_node_values.values();
        assert_eq!(v.len(), DEFAULT_INTERVAL_POINTS);
        assert!(v[0] > 0.05 && v[12] < 0.35);
        assert!((v[1] - v[0] - 0.3 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        let bad = [
            r#"{"span_values": []}"#,
            r#"{"relay_location_policies": [1.0]}"#,
            r#"{"relay_location_policies": [0.0]}"#,
            r#"{"packet_count": 0}"#,
            r#"{"p_relay_values": [-1]}"#,
            r#"{"noise_cases": [{"n1": 0, "n2": 1e-10}]}"#,
            r#"{"radio": {"bandwidth": 2e7, "bandwidth_mhz": 20}}"#,
            r#"{"p_node_values": {"interval": [0.3, 0.1]}}"#,
        ];
        for text in bad {
            let cfg = SweepConfig::from_json(text).unwrap();
            assert!(matches!(cfg.validate(), Err(SweepError::Config(_))), "{text}");
        }
        assert!(SweepConfig::from_json(r#"{"spans": [1]}"#).is_err());
    }

    #[test]
    fn single_cell_gives_one_row() {
        let cfg = SweepConfig {
            p_node_values: vec![0.1].into(),
            p_relay_values: vec![0.5],
            span_values: vec![500.0],
            noise_cases: vec![NoiseCase { n1: 1e-10, n2: 1e-10 }],
            relay_location_policies: vec![LocationPolicy::OPTIMAL],
            ..SweepConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert!((row.relay_location_m - 500.0 / (1.0 + 5f64.sqrt())).abs() < 1e-9);
        assert!(rel_diff(row.t1_s, row.t2_s) < 1e-9);
        assert_eq!(row.policy, "optimal");
    }

    #[test]
    fn row_order_is_lexicographic() {
        let cfg = SweepConfig {
            p_node_values: vec![0.1, 0.2].into(),
            p_relay_values: vec![0.5, 1.0],
            span_values: vec![500.0],
            noise_cases: vec![NoiseCase { n1: 1e-10, n2: 1e-10 }],
            relay_location_policies: vec![LocationPolicy::Fraction(0.2), LocationPolicy::OPTIMAL],
            packet_count: 10,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.p_node_w, r.p_relay_w, r.policy.clone()))
            .collect();
        assert_eq!(
            keys,
            vec![
                (0.1, 0.5, "0.2".to_string()),
                (0.1, 0.5, "optimal".to_string()),
                (0.1, 1.0, "0.2".to_string()),
                (0.1, 1.0, "optimal".to_string()),
                (0.2, 0.5, "0.2".to_string()),
                (0.2, 0.5, "optimal".to_string()),
                (0.2, 1.0, "0.2".to_string()),
                (0.2, 1.0, "optimal".to_string()),
            ]
        );
    }

    #[test]
    fn single_packet_rows_use_triangle() {
        let cfg = SweepConfig {
            packet_count: 1,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        for r in rows {
            assert!((r.exact_closed_form_s - 0.5 * (r.t1_s + r.t2_s)).abs() < 1e-15);
        }
    }
}
