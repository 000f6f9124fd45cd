//! Free-space link budget: Friis received power, SNR, Shannon capacity and
//! the per-hop transmission times of the source → relay → destination chain.
//!
//! All quantities are SI (W, m, Hz, s, bits).

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, ModelError, Result};
use crate::Real;

/// Physical-layer constants shared by both hops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams<T> {
    /// Carrier wavelength in metres.
    pub wavelength: T,
    /// Channel bandwidth in Hz.
    pub bandwidth: T,
    /// Transmit gain of the ground nodes.
    pub node_tx_gain: T,
    /// Receive gain of the ground nodes.
    pub node_rx_gain: T,
    /// Transmit gain of the relay.
    pub relay_tx_gain: T,
    /// Receive gain of the relay.
    pub relay_rx_gain: T,
    /// Packet size in bits.
    pub packet_length: T,
}

impl<T: Real> RadioParams<T> {
    /// The reference parameter set: 0.125 m, 20 MHz, node gains 0.9, relay
    /// gains 1, 800 000-bit packets.
    pub fn reference() -> Self {
        Self {
            wavelength: T::lit(0.125),
            bandwidth: T::lit(2.0e7),
            node_tx_gain: T::lit(0.9),
            node_rx_gain: T::lit(0.9),
            relay_tx_gain: T::one(),
            relay_rx_gain: T::one(),
            packet_length: T::lit(8.0e5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("wavelength", self.wavelength)?;
        positive("bandwidth", self.bandwidth)?;
        positive("node_tx_gain", self.node_tx_gain)?;
        positive("node_rx_gain", self.node_rx_gain)?;
        positive("relay_tx_gain", self.relay_tx_gain)?;
        positive("relay_rx_gain", self.relay_rx_gain)?;
        positive("packet_length", self.packet_length)?;
        Ok(())
    }

    /// Gain product on the source → relay hop (node transmits, relay receives).
    pub fn uplink_gain(&self) -> T {
        self.node_tx_gain * self.relay_rx_gain
    }

    /// Gain product on the relay → destination hop.
    pub fn downlink_gain(&self) -> T {
        self.relay_tx_gain * self.node_rx_gain
    }
}

impl<T: Real> Default for RadioParams<T> {
    fn default() -> Self {
        Self::reference()
    }
}

/// Transmit powers of the ground node and the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile<T> {
    pub p_node: T,
    pub p_relay: T,
}

impl<T: Real> PowerProfile<T> {
    pub fn new(p_node: T, p_relay: T) -> Result<Self> {
        let p = Self { p_node, p_relay };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("p_node", self.p_node)?;
        positive("p_relay", self.p_relay)?;
        Ok(())
    }

    /// Relay-to-node power ratio β. Not required to exceed one here; the
    /// placement analysis reports when it does not.
    pub fn beta(&self) -> T {
        self.p_relay / self.p_node
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            p_node: self.p_node * factor,
            p_relay: self.p_relay * factor,
        }
    }
}

/// Noise power on each hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile<T> {
    /// Source → relay.
    pub n1: T,
    /// Relay → destination.
    pub n2: T,
}

impl<T: Real> NoiseProfile<T> {
    pub fn new(n1: T, n2: T) -> Result<Self> {
        let n = Self { n1, n2 };
        n.validate()?;
        Ok(n)
    }

    pub fn uniform(n: T) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn validate(&self) -> Result<()> {
        positive("n1", self.n1)?;
        positive("n2", self.n2)?;
        Ok(())
    }

    /// N₁ / N₂.
    pub fn ratio(&self) -> T {
        self.n1 / self.n2
    }
}

/// Breakdown of end-to-end delay into its four classic components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayComponents<T> {
    pub transmission: T,
    pub queuing: T,
    pub processing: T,
    pub propagation: T,
}

impl<T: Real> DelayComponents<T> {
    pub fn new(transmission: T, queuing: T, processing: T, propagation: T) -> Result<Self> {
        non_negative("transmission delay", transmission)?;
        non_negative("queuing delay", queuing)?;
        non_negative("processing delay", processing)?;
        non_negative("propagation delay", propagation)?;
        Ok(Self {
            transmission,
            queuing,
            processing,
            propagation,
        })
    }

    /// Small packets, no queuing, negligible processing and propagation:
    /// only the transmission term survives.
    pub fn transmission_only(transmission: T) -> Result<Self> {
        Self::new(transmission, T::zero(), T::zero(), T::zero())
    }
}

pub fn total_delay<T: Real>(components: &DelayComponents<T>) -> T {
    components.transmission + components.queuing + components.processing + components.propagation
}

/// Which hop is the bottleneck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// t1 < t2: the relay → destination hop is slower and packets queue at the relay.
    Lt,
    /// t1 = t2.
    Eq,
    /// t1 > t2: the source hop is slower and the relay never waits.
    Gt,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Lt => "lt",
            Regime::Eq => "eq",
            Regime::Gt => "gt",
        }
    }
}

/// Per-packet transmission time on each hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopTimes<T> {
    pub t1: T,
    pub t2: T,
}

impl<T: crate::Scalar> HopTimes<T> {
    pub fn new(t1: T, t2: T) -> Result<Self> {
        positive("t1", t1)?;
        positive("t2", t2)?;
        Ok(Self { t1, t2 })
    }

    pub fn regime(&self) -> Regime {
        if self.t1 < self.t2 {
            Regime::Lt
        } else if self.t1 > self.t2 {
            Regime::Gt
        } else {
            Regime::Eq
        }
    }
}

fn check_distance<T: Real>(distance: T) -> Result<T> {
    positive("distance", distance)
}

/// Friis free-space received power `(λ / 4πd)² · G_t · G_r · P_t`.
pub fn received_power<T: Real>(p_t: T, tx_gain: T, rx_gain: T, wavelength: T, distance: T) -> Result<T> {
    positive("transmit power", p_t)?;
    positive("tx_gain", tx_gain)?;
    positive("rx_gain", rx_gain)?;
    positive("wavelength", wavelength)?;
    check_distance(distance)?;
    let four_pi = T::lit(4.0) * T::PI();
    let path = wavelength / (four_pi * distance);
    Ok(path * path * tx_gain * rx_gain * p_t)
}

pub fn snr<T: Real>(p_t: T, tx_gain: T, rx_gain: T, wavelength: T, distance: T, noise: T) -> Result<T> {
    positive("noise", noise)?;
    Ok(received_power(p_t, tx_gain, rx_gain, wavelength, distance)? / noise)
}

/// Shannon capacity `B · log₂(1 + γ)` in bits/s.
pub fn capacity<T: Real>(bandwidth: T, snr: T) -> Result<T> {
    positive("bandwidth", bandwidth)?;
    non_negative("snr", snr)?;
    Ok(bandwidth * snr.ln_1p() / T::LN_2())
}

fn hop_time<T: Real>(radio: &RadioParams<T>, power: T, gain: T, noise: T, distance: T) -> Result<T> {
    let gamma = snr(power, gain, T::one(), radio.wavelength, distance, noise)?;
    let rate = capacity(radio.bandwidth, gamma)?;
    let t = radio.packet_length / rate;
    if t.is_finite() && t > T::zero() {
        Ok(t)
    } else {
        Err(ModelError::Domain {
            quantity: "hop transmission time",
            requirement: "finite (SNR underflowed to zero)",
            value: crate::Scalar::to_f64(t),
        })
    }
}

/// Transmission times of both hops with the relay `relay_location` metres
/// from the source on a span of `span` metres.
pub fn hop_times<T: Real>(
    radio: &RadioParams<T>,
    powers: &PowerProfile<T>,
    noise: &NoiseProfile<T>,
    span: T,
    relay_location: T,
) -> Result<HopTimes<T>> {
    radio.validate()?;
    powers.validate()?;
    noise.validate()?;
    positive("span", span)?;
    if !(relay_location > T::zero() && relay_location < span) {
        return Err(ModelError::DegenerateHop {
            location: crate::Scalar::to_f64(relay_location),
            span: crate::Scalar::to_f64(span),
        });
    }
    let t1 = hop_time(radio, powers.p_node, radio.uplink_gain(), noise.n1, relay_location)?;
    let t2 = hop_time(
        radio,
        powers.p_relay,
        radio.downlink_gain(),
        noise.n2,
        span - relay_location,
    )?;
    HopTimes::new(t1, t2)
}

/// Distance over which one hop achieves transmission time `hop_time`:
/// `(λ/4π) · sqrt(G·P/N / (2^(L/(B t)) − 1))`.
pub fn hop_distance<T: Real>(radio: &RadioParams<T>, power: T, gain: T, noise: T, hop_time: T) -> Result<T> {
    positive("hop time", hop_time)?;
    positive("power", power)?;
    positive("gain", gain)?;
    positive("noise", noise)?;
    let exponent = radio.packet_length / (radio.bandwidth * hop_time) * T::LN_2();
    let excess = exponent.exp_m1();
    if !(excess > T::zero() && excess.is_finite()) {
        return Err(ModelError::HopTimeUnderflow {
            hop_time: crate::Scalar::to_f64(hop_time),
            excess: crate::Scalar::to_f64(excess),
        });
    }
    let four_pi = T::lit(4.0) * T::PI();
    let d = radio.wavelength / four_pi * (gain * power / noise / excess).sqrt();
    if d > T::zero() && d.is_finite() {
        Ok(d)
    } else {
        Err(ModelError::HopTimeUnderflow {
            hop_time: crate::Scalar::to_f64(hop_time),
            excess: crate::Scalar::to_f64(excess),
        })
    }
}

/// Span `d₁ + d₂` for which the two hops take exactly `t1` and `t2`.
pub fn span_for_hop_times<T: Real>(
    radio: &RadioParams<T>,
    powers: &PowerProfile<T>,
    noise: &NoiseProfile<T>,
    t1: T,
    t2: T,
) -> Result<T> {
    radio.validate()?;
    powers.validate()?;
    noise.validate()?;
    let d1 = hop_distance(radio, powers.p_node, radio.uplink_gain(), noise.n1, t1)?;
    let d2 = hop_distance(radio, powers.p_relay, radio.downlink_gain(), noise.n2, t2)?;
    Ok(d1 + d2)
}
