//! Frequency-domain multiplexing of node pairs.
//!
//! A pulse of duration `T` occupies a band of width `1/T`, so a total
//! bandwidth `BW` holds `m = ⌊BW·T⌋` bands. Each ranging pair needs two
//! bands (its two tones), and channel `k` takes bands `k` and `k + m/2`:
//! every channel then has the same tone separation `(m/2)/T`, which keeps
//! the accuracy of all pairs equal.
//!
//! Node capacity: one exchange (pulse out, pulse back) takes `2T` and
//! carries `BW·T` connections, so an update interval `Δt` holds
//! `Δt/(2T) · BW·T = BW·Δt/2` of them regardless of `T`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SPEED_OF_LIGHT};

/// Slack for products that should be integers but land a hair below.
const FLOOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Duplex {
    Half,
    Full,
}

impl std::str::FromStr for Duplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" => Ok(Self::Half),
            "full" => Ok(Self::Full),
            other => Err(Error::Parse(format!("duplex must be half or full, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub pair_id: usize,
    pub lower_band_index: usize,
    pub upper_band_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPlan {
    /// Hz.
    pub total_bw: f64,
    /// Hz, `1/T`.
    pub band_width: f64,
    pub num_bands: usize,
    pub channels: Vec<Channel>,
    /// s.
    pub update_interval: f64,
    pub node_capacity: usize,
    pub duplex: Duplex,
}

impl ChannelPlan {
    /// Tone separation shared by every channel, Hz.
    pub fn tone_separation(&self) -> f64 {
        (self.num_bands / 2) as f64 * self.band_width
    }

    /// Most pairs this band layout can carry.
    pub fn pair_budget(&self) -> usize {
        self.num_bands / 2
    }

    /// Centre frequency of band `index` for a band plan spanning
    /// `[-BW/2, BW/2)` at baseband, Hz.
    pub fn band_center(&self, index: usize) -> f64 {
        -self.total_bw / 2.0 + (index as f64 + 0.5) * self.band_width
    }

    /// Baseband tone pair `(f1, f2)` of a channel.
    pub fn tones(&self, channel: &Channel) -> (f64, f64) {
        (self.band_center(channel.lower_band_index), self.band_center(channel.upper_band_index))
    }
}

/// Shortest measurable delay. Half duplex must wait out its own pulse:
/// `2/BW`. Full duplex has no bandwidth floor, only the array transit time
/// `R_max/c` when a maximum range is given.
pub fn min_pulse_time(total_bw: f64, duplex: Duplex, r_max: Option<f64>) -> Result<f64> {
    if !(total_bw > 0.0) {
        return Err(Error::Domain("bandwidth must be positive".into()));
    }
    Ok(match duplex {
        Duplex::Half => 2.0 / total_bw,
        Duplex::Full => r_max.unwrap_or(0.0).max(0.0) / SPEED_OF_LIGHT,
    })
}

/// Half-duplex minimum two-way range, `c·T_min/2`.
pub fn min_range(total_bw: f64) -> Result<f64> {
    Ok(SPEED_OF_LIGHT * min_pulse_time(total_bw, Duplex::Half, None)? / 2.0)
}

/// `⌊BW·Δt/2⌋` simultaneous connections per update interval.
pub fn node_capacity(total_bw: f64, update_interval: f64) -> Result<usize> {
    if !(total_bw > 0.0) || !(update_interval > 0.0) {
        return Err(Error::Domain("bandwidth and update interval must be positive".into()));
    }
    Ok(floor_count(total_bw * update_interval / 2.0))
}

fn floor_count(x: f64) -> usize {
    (x * (1.0 + FLOOR_EPS)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOptions {
    /// s. Defaults to one full exchange, `2T`.
    pub update_interval: Option<f64>,
    pub duplex: Duplex,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { update_interval: None, duplex: Duplex::Half }
    }
}

pub fn build_plan(total_bw: f64, num_pairs: usize, pulse_duration: f64) -> Result<ChannelPlan> {
    build_plan_with(total_bw, num_pairs, pulse_duration, PlanOptions::default())
}

pub fn build_plan_with(total_bw: f64, num_pairs: usize, pulse_duration: f64, opts: PlanOptions) -> Result<ChannelPlan> {
    if !(total_bw > 0.0) || !(pulse_duration > 0.0) {
        return Err(Error::Domain("bandwidth and pulse duration must be positive".into()));
    }
    let num_bands = floor_count(total_bw * pulse_duration);
    let half = num_bands / 2;
    if num_pairs > half {
        return Err(Error::CapacityExceeded {
            requested: num_pairs,
            available: half,
            detail: format!("m = {num_bands} bands of {} Hz hold {half} pairs", 1.0 / pulse_duration),
        });
    }
    let update_interval = opts.update_interval.unwrap_or(2.0 * pulse_duration);
    let channels =
        (0..num_pairs).map(|k| Channel { pair_id: k, lower_band_index: k, upper_band_index: k + half }).collect();
    Ok(ChannelPlan {
        total_bw,
        band_width: 1.0 / pulse_duration,
        num_bands,
        channels,
        update_interval,
        node_capacity: node_capacity(total_bw, update_interval)?,
        duplex: opts.duplex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn timing_floors() {
        assert!((min_pulse_time(4e6, Duplex::Half, None).unwrap() - 0.5e-6).abs() < 1e-18);
        assert_eq!(min_pulse_time(4e6, Duplex::Full, Some(0.0)).unwrap(), 0.0);
        let t = min_pulse_time(4e6, Duplex::Full, Some(300.0)).unwrap();
        assert!((t - 300.0 / SPEED_OF_LIGHT).abs() < 1e-18);
        assert!((t - 1e-6).abs() < 1e-8);
        assert!((min_range(4e6).unwrap() - 74.948).abs() < 1e-3);
    }

    #[test]
    fn capacity_values() {
        assert_eq!(node_capacity(4e6, 1e-3).unwrap(), 2000);
        assert_eq!(node_capacity(2.0, 1.0).unwrap(), 1);
        assert_eq!(node_capacity(4e6, 2e-3).unwrap(), 4000);
        assert!(node_capacity(0.0, 1.0).is_err());
    }

    #[test]
    fn eight_band_layout() {
        let plan = build_plan(8e6, 4, 1e-6).unwrap();
        assert_eq!(plan.num_bands, 8);
        let pairs: Vec<_> = plan.channels.iter().map(|c| (c.lower_band_index, c.upper_band_index)).collect();
        assert_eq!(pairs, vec![(0, 4), (1, 5), (2, 6), (3, 7)]);
        assert!((plan.tone_separation() - 4e6).abs() < 1e-6);
        let one = build_plan(8e6, 1, 1e-6).unwrap();
        assert_eq!((one.channels[0].lower_band_index, one.channels[0].upper_band_index), (0, 4));
    }

    #[test]
    fn odd_band_count_drops_last() {
        let plan = build_plan(9e6, 4, 1e-6).unwrap();
        assert_eq!(plan.num_bands, 9);
        assert_eq!(plan.channels[3].upper_band_index, 7);
        assert!(build_plan(9e6, 5, 1e-6).is_err());
    }

    #[test]
    fn over_capacity_names_counts() {
        match build_plan(8e6, 5, 1e-6) {
            Err(Error::CapacityExceeded { requested, available, .. }) => {
                assert_eq!((requested, available), (5, 4));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tones_are_band_centres() {
        let plan = build_plan(4e6, 2, 1e-6).unwrap();
        let (lo, hi) = plan.tones(&plan.channels[0]);
        assert!((lo + 1.5e6).abs() < 1e-6 && (hi - 0.5e6).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn plan_invariants(bw in 1e5f64..5e7, t in 1e-6f64..2e-4, pairs in 0usize..400) {
            let m = (bw * t * (1.0 + FLOOR_EPS)).floor() as usize;
            match build_plan(bw, pairs, t) {
                Ok(plan) => {
                    prop_assert!(pairs <= m / 2);
                    prop_assert!(plan.num_bands as f64 * plan.band_width <= bw * (1.0 + 1e-8));
                    let mut used = vec![false; plan.num_bands];
                    let sep = plan.channels.first().map(|c| c.upper_band_index - c.lower_band_index);
                    for c in &plan.channels {
                        prop_assert!(c.upper_band_index < plan.num_bands);
                        prop_assert!(!used[c.lower_band_index] && !used[c.upper_band_index]);
                        used[c.lower_band_index] = true;
                        used[c.upper_band_index] = true;
                        prop_assert_eq!(Some(c.upper_band_index - c.lower_band_index), sep);
                    }
                }
                Err(Error::CapacityExceeded { .. }) => prop_assert!(pairs > m / 2),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
