//! Age of information at the destination.
//!
//! The age starts at zero at `t = 0` and grows with slope one. Packet `i` is
//! stamped with generation time `(i-1)·t1`, the instant the source starts
//! sending it; when it reaches the destination the age drops to
//! `dest_arrival(i) - (i-1)·t1` if that is lower than the current age.
//! The resulting sawtooth is integrated exactly, segment by segment.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{positive, ModelError, Result};
use crate::pipeline::{PacketStream, PacketTimeline};
use crate::Scalar;

/// A downward jump of the age process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reset<T> {
    pub time: T,
    /// Age right after the jump: the delivered packet's own age.
    pub age: T,
    /// 1-based index of the packet that caused it.
    pub packet: u64,
}

/// One linear piece of the sawtooth, `[start, end)` with slope one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
    pub start_age: T,
}

impl<T: Scalar> Segment<T> {
    pub fn base(&self) -> T {
        self.end - self.start
    }

    pub fn end_age(&self) -> T {
        self.start_age + self.base()
    }

    /// `base·start_age + base²/2`.
    pub fn area(&self) -> T {
        let b = self.base();
        b * self.start_age + b * b * T::half()
    }
}

/// The sawtooth age process over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiTrace<T> {
    pub horizon: T,
    pub resets: Vec<Reset<T>>,
}

impl<T: Scalar> AoiTrace<T> {
    /// Age at time `t` (right-continuous: at a reset instant returns the post-reset age).
    pub fn age_at(&self, t: T) -> T {
        let mut base_time = T::zero();
        let mut base_age = T::zero();
        for r in &self.resets {
            if r.time > t {
                break;
            }
            base_time = r.time;
            base_age = r.age;
        }
        base_age + (t - base_time)
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<T>> + '_ {
        let mut start = T::zero();
        let mut start_age = T::zero();
        let ends = self
            .resets
            .iter()
            .map(|r| (r.time, Some(r.age)))
            .chain(std::iter::once((self.horizon, None)));
        ends.filter_map(move |(end, next_age)| {
            let seg = Segment { start, end, start_age };
            start = end;
            if let Some(a) = next_age {
                start_age = a;
            }
            (seg.base() > T::zero()).then_some(seg)
        })
    }

    pub fn area(&self) -> T {
        self.segments().fold(T::zero(), |acc, s| acc + s.area())
    }

    /// `(time, age)` breakpoints, with both the pre- and post-reset value at
    /// every reset instant.
    pub fn breakpoints(&self) -> Vec<(T, T)> {
        let mut points = vec![(T::zero(), T::zero())];
        let mut last_time = T::zero();
        let mut last_age = T::zero();
        for r in &self.resets {
            points.push((r.time, last_age + (r.time - last_time)));
            points.push((r.time, r.age));
            last_time = r.time;
            last_age = r.age;
        }
        if self.horizon > last_time {
            points.push((self.horizon, last_age + (self.horizon - last_time)));
        }
        points
    }

    /// Writes the breakpoints as `time_s,age_s` CSV.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "age_s"])?;
        for (t, a) in self.breakpoints() {
            w.write_record([format!("{:.16e}", t.to_f64()), format!("{:.16e}", a.to_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Incrementally folds delivered packets into the sawtooth.
#[derive(Debug, Clone)]
struct AgeFold<T> {
    last_time: T,
    last_age: T,
    area: T,
}

impl<T: Scalar> AgeFold<T> {
    fn new() -> Self {
        Self {
            last_time: T::zero(),
            last_age: T::zero(),
            area: T::zero(),
        }
    }

    /// Advances to `arrival` and applies the packet's age; returns whether a
    /// visible reset happened.
    fn deliver(&mut self, arrival: T, packet_age: T) -> bool {
        let seg = Segment {
            start: self.last_time,
            end: arrival,
            start_age: self.last_age,
        };
        self.area = self.area + seg.area();
        let before = seg.end_age();
        self.last_time = arrival;
        if packet_age < before {
            self.last_age = packet_age;
            true
        } else {
            self.last_age = before;
            false
        }
    }
}

/// Builds the sawtooth from a simulated timeline. The horizon is the last
/// destination arrival.
pub fn build_trace<T: Scalar>(timeline: &PacketTimeline<T>) -> AoiTrace<T> {
    let mut fold = AgeFold::new();
    let mut resets = Vec::new();
    for p in &timeline.packets {
        let age = p.dest_arrival - p.source_start;
        if fold.deliver(p.dest_arrival, age) {
            resets.push(Reset {
                time: p.dest_arrival,
                age,
                packet: p.index,
            });
        }
    }
    AoiTrace {
        horizon: timeline.completion_time(),
        resets,
    }
}

/// Time-average of the sawtooth over its horizon.
pub fn average_aoi<T: Scalar>(trace: &AoiTrace<T>) -> T {
    trace.area() / trace.horizon
}

/// `average_aoi(build_trace(simulate(t1, t2, n)))` in constant memory.
pub fn streaming_average_aoi<T: Scalar>(t1: T, t2: T, n: u64) -> Result<T> {
    let mut fold = AgeFold::new();
    for p in PacketStream::new(t1, t2, n)? {
        fold.deliver(p.dest_arrival, p.dest_arrival - p.source_start);
    }
    Ok(fold.area / fold.last_time)
}

fn check_pair<T: Scalar>(t1: T, t2: T) -> Result<()> {
    positive("t1", t1)?;
    positive("t2", t2)?;
    Ok(())
}

fn check_at_least_two(n: u64) -> Result<()> {
    if n < 2 {
        Err(ModelError::Domain {
            quantity: "packet count",
            requirement: "at least 2 for the closed forms",
            value: n as f64,
        })
    } else {
        Ok(())
    }
}

fn regime_error<T: Scalar>(operation: &'static str, expected: &'static str, t1: T, t2: T) -> ModelError {
    ModelError::WrongRegime {
        operation,
        expected,
        t1: t1.to_f64(),
        t2: t2.to_f64(),
    }
}

/// Closed geometric sum of the sawtooth area for `t1 < t2`: a leading
/// triangle, `n-2` trapezoids and the growing queueing surplus
/// `t2(t2-t1)·(1 + 2 + … + (n-2))`, over the horizon `t1 + n·t2`.
pub fn exact_avg_case_lt<T: Scalar>(t1: T, t2: T, n: u64) -> Result<T> {
    check_pair(t1, t2)?;
    check_at_least_two(n)?;
    if !(t1 < t2) {
        return Err(regime_error("exact_avg_case_lt", "t1 < t2", t1, t2));
    }
    Ok(lt_closed_sum(t1, t2, n))
}

/// The `t1 < t2` sum without the regime guard; it stays well defined at
/// `t1 = t2`, where it must coincide with the `t1 ≥ t2` form.
pub(crate) fn lt_closed_sum<T: Scalar>(t1: T, t2: T, n: u64) -> T {
    let c = T::from_count;
    let lead = t1 + c(2) * t2;
    let trapezoids = c(n - 2) * (t1 * t2 + c(3) * T::half() * t2 * t2);
    let surplus = t2 * (t2 - t1) * c(n - 2) * c(n - 1) * T::half();
    (lead * lead * T::half() + trapezoids + surplus) / (t1 + c(n) * t2)
}

/// Closed form for `t1 ≥ t2`: a leading triangle plus `n-2` identical
/// trapezoids over the horizon `n·t1 + t2`.
pub fn exact_avg_case_gt<T: Scalar>(t1: T, t2: T, n: u64) -> Result<T> {
    check_pair(t1, t2)?;
    check_at_least_two(n)?;
    if t1 < t2 {
        return Err(regime_error("exact_avg_case_gt", "t1 >= t2", t1, t2));
    }
    let c = T::from_count;
    let lead = c(2) * t1 + t2;
    let trapezoids = c(n - 2) * (c(3) * T::half() * t1 * t1 + t1 * t2);
    Ok((lead * lead * T::half() + trapezoids) / (c(n) * t1 + t2))
}

/// Exact average for any regime and any `n ≥ 1`.
pub fn exact_avg<T: Scalar>(t1: T, t2: T, n: u64) -> Result<T> {
    check_pair(t1, t2)?;
    match n {
        0 => Err(ModelError::Domain {
            quantity: "packet count",
            requirement: "at least 1",
            value: 0.0,
        }),
        // One triangle of base t1 + t2.
        1 => Ok((t1 + t2) * T::half()),
        _ if t1 < t2 => exact_avg_case_lt(t1, t2, n),
        _ => exact_avg_case_gt(t1, t2, n),
    }
}

/// The simplified large-`n` expression `(5/2)t2 + (n/2)(t2 - t1)`.
///
/// Only the leading `n`-term matches [`exact_avg_case_lt`]; the exact
/// constant is [`lt_asymptotic_constant`], not `(5/2)t2`.
pub fn asymptotic_avg_lt<T: Scalar>(t1: T, t2: T, n: u64) -> Result<T> {
    check_pair(t1, t2)?;
    if !(t1 < t2) {
        return Err(regime_error("asymptotic_avg_lt", "t1 < t2", t1, t2));
    }
    let five_halves = T::from_count(5) * T::half();
    Ok(five_halves * t2 + T::from_count(n) * T::half() * (t2 - t1))
}

/// `lim_{n→∞} [exact_avg_case_lt(n) - n(t2 - t1)/2] = (5/2)t1 - t1(t2 - t1)/(2·t2)`.
pub fn lt_asymptotic_constant<T: Scalar>(t1: T, t2: T) -> T {
    let five_halves = T::from_count(5) * T::half();
    five_halves * t1 - t1 * (t2 - t1) / (T::from_count(2) * t2)
}

/// `lim_{n→∞} exact_avg_case_gt = (3/2)t1 + t2`.
pub fn asymptotic_avg_gt<T: Scalar>(t1: T, t2: T) -> Result<T> {
    check_pair(t1, t2)?;
    if t1 < t2 {
        return Err(regime_error("asymptotic_avg_gt", "t1 >= t2", t1, t2));
    }
    Ok(T::from_count(3) * T::half() * t1 + t2)
}

/// Minimum asymptotic average age, reached with balanced hops `t1 = t2 = t`.
pub fn theorem_min_aoi<T: Scalar>(t: T) -> Result<T> {
    positive("hop time", t)?;
    Ok(T::from_count(5) * T::half() * t)
}
