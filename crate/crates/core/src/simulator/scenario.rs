use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::channel::{
    add_noise, apply_channel, db_to_amplitude, noise_variance, path_amplitude, trial_rng, Channel, DELAY_TAPS,
};
use super::par_map;
use crate::estimator::{
    calibrate, estimate_delay, estimate_snr_eigen, MatchedFilter, ObservationMatrix, PeakConfig, RangingEstimate,
    SnrEstimate,
};
use crate::stats::{mean, rmse, sample_variance};
use crate::waveforms::{generate, step_order_for_pair, WaveformSpec};
use crate::{ComplexSignal, Error, LinkType, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Passive target: reflects every incident waveform (`1/r⁴` round trip).
    Master,
    /// Ranging node; transmits its pair's waveform and receives the return.
    Slave,
    /// Active target: amplifies and re-radiates (`1/r²` per leg).
    Repeater,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub role: Role,
    /// m.
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub slave_id: String,
    pub target_id: String,
    pub waveform: WaveformSpec,
    /// Transmit start relative to the receive window, s.
    #[serde(default)]
    pub start_offset_s: f64,
}

/// RF carriers of the outbound and return legs. Metadata only: all
/// processing is at complex baseband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierMetadata {
    pub forward_hz: f64,
    pub return_hz: f64,
}

fn default_reference_range() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeScenario {
    pub nodes: Vec<Node>,
    pub pairs: Vec<PairConfig>,
    /// Hz.
    pub sample_rate: f64,
    #[serde(default)]
    pub carrier_metadata: Option<CarrierMetadata>,
    /// End-to-end during-pulse SNR of a pair's own return at its slave,
    /// dB. `None` runs noiseless.
    pub snr_pre_db: Option<f64>,
    /// Repeater gain, dB.
    #[serde(default)]
    pub retransmit_gain_db: f64,
    /// Extra attenuation on other pairs' returns, dB.
    #[serde(default)]
    pub cross_coupling_db: f64,
    #[serde(default = "default_reference_range")]
    pub reference_range: f64,
    /// Hardware latency common to every path, s. Removed by calibration.
    #[serde(default)]
    pub fixed_delay_s: f64,
    #[serde(default)]
    pub peak: PeakConfig,
    #[serde(default)]
    pub seed: u64,
}

impl NodeScenario {
    fn node(&self, id: &str) -> Result<&Node> {
        self.nodes.iter().find(|n| n.id == id).ok_or_else(|| Error::Scenario(format!("unknown node {id:?}")))
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(Error::Scenario(format!("duplicate node id {:?}", n.id)));
            }
            if n.position.iter().any(|v| !v.is_finite()) {
                return Err(Error::Scenario(format!("node {:?} has a non-finite position", n.id)));
            }
        }
        if self.pairs.is_empty() {
            return Err(Error::Scenario("no pairs configured".into()));
        }
        let target = &self.pairs[0].target_id;
        let mut slaves = HashSet::new();
        let mut orders = HashSet::new();
        for p in &self.pairs {
            if self.node(&p.slave_id)?.role != Role::Slave {
                return Err(Error::Scenario(format!("{:?} is not a slave", p.slave_id)));
            }
            if !slaves.insert(p.slave_id.as_str()) {
                return Err(Error::Scenario(format!("slave {:?} is in two pairs", p.slave_id)));
            }
            if &p.target_id != target {
                return Err(Error::Scenario("all pairs must range to the same target".into()));
            }
            if self.node(&p.target_id)?.role == Role::Slave {
                return Err(Error::Scenario(format!("target {:?} must be a master or repeater", p.target_id)));
            }
            if !(p.start_offset_s >= 0.0) {
                return Err(Error::Scenario("start offsets must be non-negative".into()));
            }
            p.waveform.validate_for(self.sample_rate)?;
            if !orders.insert(p.waveform.step_order.clone()) {
                return Err(Error::Scenario(format!(
                    "step order {:?} is used by two simultaneous pairs",
                    p.waveform.step_order
                )));
            }
        }
        if !(self.reference_range > 0.0) {
            return Err(Error::Scenario("reference_range must be positive".into()));
        }
        Ok(())
    }

    /// Distance from a pair's slave to its target, m.
    pub fn true_range(&self, pair_id: usize) -> Result<f64> {
        let p = self.pair(pair_id)?;
        Ok(distance(self.node(&p.slave_id)?, self.node(&p.target_id)?))
    }

    fn pair(&self, pair_id: usize) -> Result<&PairConfig> {
        self.pairs
            .get(pair_id)
            .ok_or_else(|| Error::Scenario(format!("pair {pair_id} does not exist ({} pairs)", self.pairs.len())))
    }

    /// Path from pair `from`'s slave via the target to pair `to`'s slave.
    fn path(&self, from: usize, to: usize) -> Result<Channel> {
        let (a, b) = (self.pair(from)?, self.pair(to)?);
        let target = self.node(&a.target_id)?;
        let r_out = distance(self.node(&a.slave_id)?, target);
        let r_back = distance(target, self.node(&b.slave_id)?);
        // A reflector's round trip is two 1/r² legs: 1/r⁴ when both are equal.
        let mut amplitude =
            path_amplitude(r_out, self.reference_range, 2) * path_amplitude(r_back, self.reference_range, 2);
        if target.role == Role::Repeater {
            amplitude *= db_to_amplitude(self.retransmit_gain_db);
        }
        if from != to {
            amplitude *= db_to_amplitude(-self.cross_coupling_db);
        }
        Ok(Channel {
            delay_s: a.start_offset_s + (r_out + r_back) / SPEED_OF_LIGHT + self.fixed_delay_s,
            amplitude,
            doppler_hz: 0.0,
        })
    }
}

fn distance(a: &Node, b: &Node) -> f64 {
    a.position.iter().zip(&b.position).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSession {
    pub pair_id: usize,
    pub true_range_m: f64,
    pub estimates: Vec<RangingEstimate>,
    pub snr: Option<SnrEstimate>,
}

impl PairSession {
    pub fn ranges(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.range_m).collect()
    }
}

/// Captures per eigen-SNR estimate.
const SNR_CAPTURES: usize = 32;

/// Runs `trials` captures of one pair with every other pair transmitting
/// simultaneously.
///
/// Each capture sums the pair's own return and the other pairs' waveforms
/// as relayed by the shared target, adds white noise, and runs matched
/// filter plus peak interpolation. With a repeater target, the repeater's
/// own noise reaches the slave through a linear, memoryless leg and is
/// independent of the slave's receiver noise. The two are drawn as a single
/// white process whose variance sets the end-to-end SNR to `snr_pre_db`.
pub fn run_pair_session(scenario: &NodeScenario, pair_id: usize, trials: usize) -> Result<PairSession> {
    scenario.validate()?;
    let pair = scenario.pair(pair_id)?;
    let fs = scenario.sample_rate;
    let mut reference = generate(&pair.waveform, fs)?;
    reference.t0 = pair.start_offset_s;

    let mut arrivals = Vec::with_capacity(scenario.pairs.len());
    let mut buffer_len = 0;
    for q in 0..scenario.pairs.len() {
        let tx = generate(&scenario.pairs[q].waveform, fs)?;
        let ch = scenario.path(q, pair_id)?;
        buffer_len = buffer_len.max(tx.len() + (ch.delay_s * fs).ceil() as usize + DELAY_TAPS);
        arrivals.push((tx, ch));
    }
    let mut clean = ComplexSignal::zeros(buffer_len, fs, 0.0);
    for (tx, ch) in &arrivals {
        clean.add_aligned(&apply_channel(tx, ch, buffer_len)?)?;
    }
    let own_power = arrivals[pair_id].0.on_power() * arrivals[pair_id].1.amplitude.powi(2);
    let sigma2 = scenario.snr_pre_db.map_or(0.0, |snr| noise_variance(own_power, snr));

    let filter = MatchedFilter::new(&reference, buffer_len)?;
    let capture = |trial: usize| {
        let mut rx = clean.clone();
        add_noise(&mut rx, sigma2, &mut trial_rng(scenario.seed, pair_id as u64, trial as u64));
        rx
    };
    let peaks = par_map(trials, |trial| estimate_delay(&capture(trial), &filter, scenario.peak));
    let peaks: Vec<_> = peaks.into_iter().collect::<Result<_>>()?;

    let snr = if trials >= 2 {
        let delays: Vec<f64> = peaks.iter().map(|p| p.delay_s).collect();
        let start = ((mean(&delays) + pair.start_offset_s) * fs).round().max(0.0) as usize;
        let len = (pair.waveform.pulse_duration * fs).round() as usize;
        let l = trials.min(SNR_CAPTURES).min(len);
        if l >= 2 && start + len <= buffer_len {
            let cols = (0..l).map(|t| capture(t).samples[start..start + len].to_vec()).collect();
            Some(estimate_snr_eigen(&ObservationMatrix::new(cols)?)?)
        } else {
            None
        }
    } else {
        None
    };

    let estimates = peaks
        .iter()
        .map(|p| {
            let mut e = RangingEstimate::new(p.delay_s, p.peak_magnitude, scenario.peak.factor, LinkType::TwoWay);
            e.snr_db_est = snr.as_ref().map(|s| s.snr_db);
            e
        })
        .collect();
    Ok(PairSession { pair_id, true_range_m: scenario.true_range(pair_id)?, estimates, snr })
}

/// Two slaves ranging simultaneously to a repeater that moves towards them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeNodeConfig {
    /// Initial slave-to-repeater distance along the axis, m.
    pub start_range_m: f64,
    /// Repeater step towards the slaves, m.
    pub step_m: f64,
    pub positions: usize,
    /// Separation between the two slaves, across the axis, m.
    pub slave_separation_m: f64,
    pub trials: usize,
    pub snr_pre_db: Option<f64>,
    pub retransmit_gain_db: f64,
    pub waveform: WaveformSpec,
    pub sample_rate: f64,
    /// Uncalibrated system latency, s.
    pub fixed_delay_s: f64,
    pub seed: u64,
    #[serde(default)]
    pub peak: PeakConfig,
}

impl Default for ThreeNodeConfig {
    /// 15 ft start, 10 in steps, 10 positions, four-pulse 4 MHz TTSFW.
    fn default() -> Self {
        const FOOT: f64 = 0.3048;
        Self {
            start_range_m: 15.0 * FOOT,
            step_m: 10.0 * 0.0254,
            positions: 10,
            slave_separation_m: 0.5,
            trials: 100,
            snr_pre_db: Some(30.0),
            retransmit_gain_db: 0.0,
            waveform: WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 250e-6),
            sample_rate: crate::DEFAULT_SAMPLE_RATE,
            fixed_delay_s: 25e-9,
            seed: 0,
            peak: PeakConfig::default(),
        }
    }
}

impl ThreeNodeConfig {
    /// Scenario with the repeater at sweep position `k`.
    pub fn scenario_at(&self, k: usize) -> Result<NodeScenario> {
        let n = self.waveform.num_pulses;
        let along = self.start_range_m - k as f64 * self.step_m;
        let half = self.slave_separation_m / 2.0;
        let mk = |id: &str, role, position| Node { id: id.into(), role, position };
        let pair = |slave: &str, idx: usize| -> Result<PairConfig> {
            Ok(PairConfig {
                slave_id: slave.into(),
                target_id: "repeater".into(),
                waveform: self.waveform.clone().with_step_order(step_order_for_pair(n, idx)?),
                start_offset_s: 0.0,
            })
        };
        Ok(NodeScenario {
            nodes: vec![
                mk("slave1", Role::Slave, [0.0, half, 0.0]),
                mk("slave2", Role::Slave, [0.0, -half, 0.0]),
                mk("repeater", Role::Repeater, [along, 0.0, 0.0]),
            ],
            pairs: vec![pair("slave1", 0)?, pair("slave2", 1)?],
            sample_rate: self.sample_rate,
            carrier_metadata: Some(CarrierMetadata { forward_hz: 5.0e9, return_hz: 5.25e9 }),
            snr_pre_db: self.snr_pre_db,
            retransmit_gain_db: self.retransmit_gain_db,
            cross_coupling_db: 0.0,
            reference_range: 1.0,
            fixed_delay_s: self.fixed_delay_s,
            peak: self.peak,
            seed: self.seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub slave: String,
    pub position_index: usize,
    /// Repeater distance along the sweep axis, m.
    pub position_m: f64,
    pub range_true_m: f64,
    /// Mean of the trial estimates, uncalibrated.
    pub range_est_m: f64,
    pub range_calibrated_m: f64,
    pub variance_m2: f64,
    pub snr_db_est: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaveSummary {
    pub slave: String,
    pub calibration_offset_m: f64,
    pub rmse_calibrated_m: f64,
    /// Mean of `calibrated − true`; zero up to rounding.
    pub mean_residual_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeNodeResult {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<SlaveSummary>,
}

/// Sweeps the repeater over `positions` stops and calibrates each slave's
/// range curve against the truth.
pub fn run_three_node_demo(config: &ThreeNodeConfig) -> Result<ThreeNodeResult> {
    if config.positions == 0 || config.trials == 0 {
        return Err(Error::Scenario("need at least one position and one trial".into()));
    }
    let mut per_slave: Vec<Vec<SweepRow>> = vec![Vec::new(), Vec::new()];
    for k in 0..config.positions {
        let scenario = config.scenario_at(k)?;
        let along = config.start_range_m - k as f64 * config.step_m;
        for (pair_id, rows) in per_slave.iter_mut().enumerate() {
            let session = run_pair_session(&scenario, pair_id, config.trials)?;
            let ranges = session.ranges();
            rows.push(SweepRow {
                slave: scenario.pairs[pair_id].slave_id.clone(),
                position_index: k,
                position_m: along,
                range_true_m: session.true_range_m,
                range_est_m: mean(&ranges),
                range_calibrated_m: f64::NAN,
                variance_m2: sample_variance(&ranges),
                snr_db_est: session.snr.as_ref().map(|s| s.snr_db),
            });
        }
    }
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for mut slave_rows in per_slave {
        let measured: Vec<f64> = slave_rows.iter().map(|r| r.range_est_m).collect();
        let truth: Vec<f64> = slave_rows.iter().map(|r| r.range_true_m).collect();
        let cal = calibrate(&measured, &truth)?;
        let residuals: Vec<f64> = cal.calibrated.iter().zip(&truth).map(|(c, t)| c - t).collect();
        for (row, c) in slave_rows.iter_mut().zip(&cal.calibrated) {
            row.range_calibrated_m = *c;
        }
        summaries.push(SlaveSummary {
            slave: slave_rows[0].slave.clone(),
            calibration_offset_m: cal.offset,
            rmse_calibrated_m: rmse(&residuals, 0.0),
            mean_residual_m: mean(&residuals),
        });
        rows.extend(slave_rows);
    }
    Ok(ThreeNodeResult { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario(target_role: Role, snr: Option<f64>) -> NodeScenario {
        let wf = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 20e-6);
        NodeScenario {
            nodes: vec![
                Node { id: "s".into(), role: Role::Slave, position: [0.0; 3] },
                Node { id: "t".into(), role: target_role, position: [6.0, 0.0, 0.0] },
            ],
            pairs: vec![PairConfig { slave_id: "s".into(), target_id: "t".into(), waveform: wf, start_offset_s: 0.0 }],
            sample_rate: 25e6,
            carrier_metadata: None,
            snr_pre_db: snr,
            retransmit_gain_db: 0.0,
            cross_coupling_db: 0.0,
            reference_range: 1.0,
            fixed_delay_s: 0.0,
            peak: PeakConfig::default(),
            seed: 1,
        }
    }

    #[test]
    fn noiseless_on_grid_delay_is_exact() {
        let mut sc = small_scenario(Role::Master, None);
        // 2r/c = 4 samples
        sc.nodes[1].position[0] = 2.0 * SPEED_OF_LIGHT / 25e6;
        let s = run_pair_session(&sc, 0, 2).unwrap();
        for e in &s.estimates {
            assert!((e.delay_s - 4.0 / 25e6).abs() < 1e-13, "{}", e.delay_s);
        }
    }

    #[test]
    fn validation_catches_inconsistencies() {
        let mut sc = small_scenario(Role::Master, None);
        sc.pairs[0].target_id = "nope".into();
        assert!(matches!(sc.validate(), Err(Error::Scenario(_))));
        let mut sc = small_scenario(Role::Master, None);
        sc.nodes[1].role = Role::Slave;
        assert!(sc.validate().is_err());
        let mut sc = small_scenario(Role::Master, None);
        let dup = sc.pairs[0].clone();
        sc.nodes.push(Node { id: "s2".into(), role: Role::Slave, position: [0.0, 1.0, 0.0] });
        sc.pairs.push(PairConfig { slave_id: "s2".into(), ..dup });
        assert!(sc.validate().is_err(), "shared step order must be rejected");
        let sc = small_scenario(Role::Master, None);
        assert!(run_pair_session(&sc, 3, 1).is_err());
    }

    #[test]
    fn deterministic_sessions() {
        let sc = small_scenario(Role::Repeater, Some(20.0));
        let a = run_pair_session(&sc, 0, 4).unwrap();
        let b = run_pair_session(&sc, 0, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip() {
        let sc = small_scenario(Role::Repeater, Some(30.0));
        let text = serde_json::to_string(&sc).unwrap();
        let back: NodeScenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sc);
    }
}
