//! Event-by-event simulation of back-to-back packets through a full-duplex
//! store-and-forward relay.
//!
//! The source transmits packet `i` during `[(i-1)·t1, i·t1)`. The relay
//! buffers without bound and starts forwarding packet `i` as soon as it has
//! arrived and packet `i-1` has left, so
//! `forward_start(i) = max(i·t1, dest_arrival(i-1))`.

use serde::{Deserialize, Serialize};

use crate::error::{positive, ModelError, Result};
use crate::link_budget::{hop_times, HopTimes, NoiseProfile, PowerProfile, RadioParams};
use crate::{Real, Scalar};

/// Largest packet count [`simulate`] will materialise.
pub const MAX_TIMELINE_PACKETS: u64 = 10_000_000;

/// The two-hop link with everything but the relay position fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link<T> {
    pub radio: RadioParams<T>,
    pub powers: PowerProfile<T>,
    pub noise: NoiseProfile<T>,
    /// Source-destination distance d in metres.
    pub span: T,
}

impl<T: Real> Link<T> {
    pub fn new(radio: RadioParams<T>, powers: PowerProfile<T>, noise: NoiseProfile<T>, span: T) -> Result<Self> {
        radio.validate()?;
        powers.validate()?;
        noise.validate()?;
        positive("span", span)?;
        Ok(Self {
            radio,
            powers,
            noise,
            span,
        })
    }

    pub fn hop_times_at(&self, relay_location: T) -> Result<HopTimes<T>> {
        hop_times(&self.radio, &self.powers, &self.noise, self.span, relay_location)
    }

    pub fn with_relay(self, relay_location: T, packet_count: u64) -> Result<Scenario<T>> {
        Scenario::new(self, relay_location, packet_count)
    }
}

/// One experiment: a link, a relay position and a packet count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub link: Link<T>,
    /// Distance l from the source to the relay.
    pub relay_location: T,
    pub packet_count: u64,
}

impl<T: Real> Scenario<T> {
    pub fn new(link: Link<T>, relay_location: T, packet_count: u64) -> Result<Self> {
        if !(relay_location > T::zero() && relay_location < link.span) {
            return Err(ModelError::DegenerateHop {
                location: Scalar::to_f64(relay_location),
                span: Scalar::to_f64(link.span),
            });
        }
        check_count(packet_count)?;
        Ok(Self {
            link,
            relay_location,
            packet_count,
        })
    }

    pub fn hop_times(&self) -> Result<HopTimes<T>> {
        self.link.hop_times_at(self.relay_location)
    }

    pub fn simulate(&self) -> Result<PacketTimeline<T>> {
        let h = self.hop_times()?;
        simulate(h.t1, h.t2, self.packet_count)
    }
}

fn check_count(n: u64) -> Result<u64> {
    if n == 0 {
        Err(ModelError::Domain {
            quantity: "packet count",
            requirement: "at least 1",
            value: 0.0,
        })
    } else {
        Ok(n)
    }
}

/// Event times of a single packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketRecord<T> {
    /// 1-based packet index.
    pub index: u64,
    pub source_start: T,
    pub relay_arrival: T,
    pub forward_start: T,
    pub dest_arrival: T,
}

impl<T: Scalar> PacketRecord<T> {
    /// Time spent buffered at the relay.
    pub fn relay_wait(&self) -> T {
        self.forward_start - self.relay_arrival
    }
}

/// Lazily evaluates the relay recurrence, keeping only the previous
/// departure. Used directly for runs above [`MAX_TIMELINE_PACKETS`].
#[derive(Debug, Clone)]
pub struct PacketStream<T> {
    t1: T,
    t2: T,
    count: u64,
    next: u64,
    prev_dest: Option<T>,
}

impl<T: Scalar> PacketStream<T> {
    pub fn new(t1: T, t2: T, count: u64) -> Result<Self> {
        positive("t1", t1)?;
        positive("t2", t2)?;
        check_count(count)?;
        Ok(Self {
            t1,
            t2,
            count,
            next: 1,
            prev_dest: None,
        })
    }
}

impl<T: Scalar> Iterator for PacketStream<T> {
    type Item = PacketRecord<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next > self.count {
            return None;
        }
        let index = self.next;
        let source_start = T::from_count(index - 1) * self.t1;
        let relay_arrival = T::from_count(index) * self.t1;
        let forward_start = match self.prev_dest {
            Some(prev) => relay_arrival.max_of(prev),
            None => relay_arrival,
        };
        let dest_arrival = forward_start + self.t2;
        self.prev_dest = Some(dest_arrival);
        self.next += 1;
        Some(PacketRecord {
            index,
            source_start,
            relay_arrival,
            forward_start,
            dest_arrival,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.count + 1 - self.next) as usize;
        (left, Some(left))
    }
}

impl<T: Scalar> ExactSizeIterator for PacketStream<T> {}

/// Full per-packet event log of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketTimeline<T> {
    pub hop_times: HopTimes<T>,
    pub packets: Vec<PacketRecord<T>>,
}

impl<T: Scalar> PacketTimeline<T> {
    pub fn packet_count(&self) -> u64 {
        self.packets.len() as u64
    }

    /// Destination arrival of the last packet, the run's completion time.
    pub fn completion_time(&self) -> T {
        self.packets
            .last()
            .map(|p| p.dest_arrival)
            .expect("timeline holds at least one packet")
    }

    pub fn dest_arrivals(&self) -> impl Iterator<Item = T> + '_ {
        self.packets.iter().map(|p| p.dest_arrival)
    }
}

/// Runs the relay recurrence for `n` packets.
pub fn simulate<T: Scalar>(t1: T, t2: T, n: u64) -> Result<PacketTimeline<T>> {
    if n > MAX_TIMELINE_PACKETS {
        return Err(ModelError::TimelineTooLong {
            count: n,
            limit: MAX_TIMELINE_PACKETS,
        });
    }
    let packets: Vec<_> = PacketStream::new(t1, t2, n)?.collect();
    Ok(PacketTimeline {
        hop_times: HopTimes { t1, t2 },
        packets,
    })
}

/// Completion time divided by the packet count.
///
/// This is total elapsed time per packet, not the mean per-packet sojourn:
/// with `t1 < t2` it is `(t1 + n·t2) / n`, otherwise `(n·t1 + t2) / n`.
pub fn average_delay<T: Scalar>(timeline: &PacketTimeline<T>) -> T {
    timeline.completion_time() / T::from_count(timeline.packet_count())
}

/// [`average_delay`] without materialising the timeline.
pub fn streaming_average_delay<T: Scalar>(t1: T, t2: T, n: u64) -> Result<T> {
    let last = PacketStream::new(t1, t2, n)?
        .last()
        .map(|p| p.dest_arrival)
        .expect("count checked above");
    Ok(last / T::from_count(n))
}

/// Limit of [`average_delay`] as `n → ∞`: the slower hop.
pub fn delay_limit<T: Scalar>(t1: T, t2: T) -> T {
    t1.max_of(t2)
}
