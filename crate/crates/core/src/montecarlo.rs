//! Monte Carlo estimation of the achievability rate `S(K)`, gain tuning by
//! uniform gain sampling, and region maps.
//!
//! Every random draw comes from [`crate::rng::CounterRng`] keyed by the seed
//! and indexed by sample number, and parallel results are collected in index
//! order, so reports are bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

use crate::certificate::{check_setpoint, SearchOptions};
use crate::controller::{is_stabilizing, Gain, Setpoint, Stability};
use crate::model::{PlantParams, PowerState};
use crate::oracle::{steady_state_achievable, trajectory_verdict, TrajectoryOptions};
use crate::rng::{scale, streams, CounterRng};
use crate::{Error, Result};

/// Draw budget after which a sub-1% acceptance rate aborts sampling.
pub const MAX_DRAWS_BEFORE_ABORT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckerKind {
    Certificate,
    SteadyState,
    Trajectory,
}

impl CheckerKind {
    pub fn label(self) -> &'static str {
        match self {
            CheckerKind::Certificate => "certificate",
            CheckerKind::SteadyState => "steady-state",
            CheckerKind::Trajectory => "trajectory",
        }
    }
}

impl fmt::Display for CheckerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for CheckerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "certificate" => Ok(CheckerKind::Certificate),
            "steady-state" => Ok(CheckerKind::SteadyState),
            "trajectory" => Ok(CheckerKind::Trajectory),
            other => Err(format!(
                "unknown checker `{other}` (expected certificate, steady-state or trajectory)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub p_range: [f64; 2],
    pub q_range: [f64; 2],
    pub pf_range: [f64; 2],
    pub n_setpoints: usize,
    /// Sampling interval applied to each entry of `K`.
    pub k_box: [f64; 2],
    pub n_gains: usize,
    pub seed: u64,
    pub checker: CheckerKind,
    /// Also score `K = 0` as a candidate in gain optimization.
    pub include_open_loop: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            p_range: [0.0, 8000.0],
            q_range: [-2500.0, 200.0],
            pf_range: [0.95, 1.0],
            n_setpoints: 500,
            k_box: [-0.2, 0.2],
            n_gains: 2000,
            seed: 2024,
            checker: CheckerKind::Trajectory,
            include_open_loop: true,
        }
    }
}

fn ordered(r: [f64; 2]) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSampling(m));
        if !ordered(self.p_range) || !ordered(self.q_range) || !ordered(self.k_box) {
            return bad("p_range, q_range and k_box must be finite [lo, hi] with lo <= hi".into());
        }
        if !ordered(self.pf_range) || self.pf_range[0] < 0.0 || self.pf_range[1] > 1.0 {
            return bad(format!(
                "pf_range {:?} must lie inside [0, 1]",
                self.pf_range
            ));
        }
        if self.n_setpoints == 0 || self.n_gains == 0 {
            return bad("n_setpoints and n_gains must be at least 1".into());
        }
        Ok(())
    }
}

fn power_factor_or_unity(p: f64, q: f64) -> f64 {
    Setpoint::new(p, q).power_factor().unwrap_or(1.0)
}

/// Uniform setpoints from the sampling box, keeping only those whose power
/// factor lies in `pf_range`. The origin counts as unity power factor.
pub fn sample_setpoints(cfg: &SamplingConfig, stream_id: u32) -> Result<Vec<Setpoint>> {
    cfg.validate()?;
    let rng = CounterRng::new(cfg.seed, streams::SETPOINTS | (u64::from(stream_id) << 16));
    let mut out = Vec::with_capacity(cfg.n_setpoints);
    let mut drawn = 0usize;
    while out.len() < cfg.n_setpoints {
        let [a, b] = rng.uniform2(drawn as u64);
        drawn += 1;
        let p = scale(a, cfg.p_range[0], cfg.p_range[1]);
        let q = scale(b, cfg.q_range[0], cfg.q_range[1]);
        let pf = power_factor_or_unity(p, q);
        if pf >= cfg.pf_range[0] && pf <= cfg.pf_range[1] {
            out.push(Setpoint::new(p, q));
        }
        if drawn >= MAX_DRAWS_BEFORE_ABORT && out.len() * 100 < drawn {
            return Err(Error::LowAcceptance {
                accepted: out.len(),
                drawn,
            });
        }
    }
    Ok(out)
}

/// `i`-th gain sample, each entry uniform in `k_box`.
pub fn sample_gain(cfg: &SamplingConfig, index: u64) -> Gain {
    let rng = CounterRng::new(cfg.seed, streams::GAINS);
    let [a, b] = rng.uniform2(2 * index);
    let [c, d] = rng.uniform2(2 * index + 1);
    let [lo, hi] = cfg.k_box;
    Gain::new([
        [scale(a, lo, hi), scale(b, lo, hi)],
        [scale(c, lo, hi), scale(d, lo, hi)],
    ])
}

/// A fully resolved achievability checker.
#[derive(Debug, Clone, PartialEq)]
pub enum Checker {
    Certificate(SearchOptions),
    SteadyState {
        n_grid: usize,
    },
    /// Closed-loop simulation from `x0`. Gains slower than the horizon allows
    /// get the horizon stretched to five time constants, up to `max_horizon`.
    Trajectory {
        x0: PowerState,
        opts: TrajectoryOptions,
        max_horizon: f64,
    },
}

/// Outcome of one checker call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetpointVerdict {
    pub p_ref: f64,
    pub q_ref: f64,
    pub achievable: bool,
    pub margin: f64,
    pub inconclusive: bool,
}

impl Checker {
    pub fn kind(&self) -> CheckerKind {
        match self {
            Checker::Certificate(_) => CheckerKind::Certificate,
            Checker::SteadyState { .. } => CheckerKind::SteadyState,
            Checker::Trajectory { .. } => CheckerKind::Trajectory,
        }
    }

    pub fn label(&self) -> &'static str {
        self.kind().label()
    }

    /// Whether the checker's verdict depends on the gain being Hurwitz.
    pub fn needs_stable_gain(&self) -> bool {
        !matches!(self, Checker::SteadyState { .. })
    }

    /// Trajectory options adjusted for `stab`, or `None` if the gain is too
    /// slow to settle within `max_horizon`.
    fn trajectory_opts_for(
        opts: &TrajectoryOptions,
        max_horizon: f64,
        stab: &Stability,
    ) -> Option<TrajectoryOptions> {
        let needed = 5.0 * stab.time_constant();
        if needed <= opts.horizon {
            return Some(opts.clone());
        }
        if needed > max_horizon {
            return None;
        }
        let mut o = opts.clone();
        o.horizon = (needed / o.dt).ceil() * o.dt;
        Some(o)
    }

    /// Checks whether `gain` can be scored at all; `Err` carries the status
    /// label used in sweep logs.
    pub fn admits(
        &self,
        gain: &Gain,
        params: &PlantParams,
    ) -> std::result::Result<(), &'static str> {
        if !self.needs_stable_gain() {
            return Ok(());
        }
        let stab = is_stabilizing(gain, params);
        if !stab.stabilizing {
            return Err("unstable");
        }
        if let Checker::Trajectory {
            opts, max_horizon, ..
        } = self
        {
            if Self::trajectory_opts_for(opts, *max_horizon, &stab).is_none() {
                return Err("slow");
            }
        }
        Ok(())
    }

    pub fn evaluate(
        &self,
        x_ref: Setpoint,
        k: &Gain,
        params: &PlantParams,
    ) -> Result<SetpointVerdict> {
        let verdict = |achievable, margin, inconclusive| SetpointVerdict {
            p_ref: x_ref.p_ref,
            q_ref: x_ref.q_ref,
            achievable,
            margin,
            inconclusive,
        };
        match self {
            Checker::Certificate(opts) => {
                let v = check_setpoint(x_ref, k, params, opts)?;
                Ok(verdict(v.achievable, v.margin(), v.is_inconclusive()))
            }
            Checker::SteadyState { n_grid } => {
                let v = steady_state_achievable(x_ref, params, *n_grid);
                Ok(verdict(v.achievable, v.worst_margin, false))
            }
            Checker::Trajectory {
                x0,
                opts,
                max_horizon,
            } => {
                let stab = is_stabilizing(k, params);
                if !stab.stabilizing {
                    return Err(Error::NotStabilizing(stab.describe()));
                }
                let Some(o) = Self::trajectory_opts_for(opts, *max_horizon, &stab) else {
                    return Err(Error::InvalidProfile(format!(
                        "gain needs a horizon of {} s, above the {} s cap",
                        5.0 * stab.time_constant(),
                        max_horizon
                    )));
                };
                let v = trajectory_verdict(*x0, x_ref, k, params, &o)?;
                Ok(verdict(v.achievable, v.worst_margin, false))
            }
        }
    }
}

/// Achievability rate `S(K) = n_achievable / n_total` with per-setpoint detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub gain: Gain,
    pub checker: CheckerKind,
    pub rate: f64,
    pub n_achievable: usize,
    pub n_total: usize,
    /// Smallest margin among achievable setpoints.
    pub worst_margin: Option<f64>,
    pub flags: Vec<String>,
    pub verdicts: Vec<SetpointVerdict>,
}

impl RateReport {
    fn from_verdicts(gain: Gain, checker: CheckerKind, verdicts: Vec<SetpointVerdict>) -> Self {
        let n_total = verdicts.len();
        let n_achievable = verdicts.iter().filter(|v| v.achievable).count();
        let worst_margin = verdicts
            .iter()
            .filter(|v| v.achievable)
            .map(|v| v.margin)
            .min_by(f64::total_cmp);
        let mut flags = Vec::new();
        let n_inconclusive = verdicts.iter().filter(|v| v.inconclusive).count();
        if n_inconclusive > 0 {
            flags.push(format!("inconclusive: {n_inconclusive}"));
        }
        RateReport {
            gain,
            checker,
            rate: n_achievable as f64 / n_total as f64,
            n_achievable,
            n_total,
            worst_margin,
            flags,
            verdicts,
        }
    }

    pub fn achievable_mask(&self) -> Vec<bool> {
        self.verdicts.iter().map(|v| v.achievable).collect()
    }

    /// Verdicts as a `'1'`/`'0'` string in setpoint order.
    pub fn verdict_bits(&self) -> String {
        self.verdicts
            .iter()
            .map(|v| if v.achievable { '1' } else { '0' })
            .collect()
    }
}

/// Applies `checker` to every setpoint. A gain the checker cannot score
/// (non-Hurwitz, or too slow for the trajectory horizon cap) gets rate 0 and
/// the matching flag.
pub fn achievability_rate(
    k: &Gain,
    setpoints: &[Setpoint],
    checker: &Checker,
    params: &PlantParams,
) -> Result<RateReport> {
    if setpoints.is_empty() {
        return Err(Error::InvalidSampling("no setpoints to score".into()));
    }
    if let Err(status) = checker.admits(k, params) {
        let verdicts = setpoints
            .iter()
            .map(|s| SetpointVerdict {
                p_ref: s.p_ref,
                q_ref: s.q_ref,
                achievable: false,
                margin: f64::NEG_INFINITY,
                inconclusive: false,
            })
            .collect();
        let mut report = RateReport::from_verdicts(*k, checker.kind(), verdicts);
        report.flags.push(status.to_string());
        return Ok(report);
    }
    let verdicts = setpoints
        .par_iter()
        .map(|s| checker.evaluate(*s, k, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport::from_verdicts(*k, checker.kind(), verdicts))
}

/// One line of the optimization log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: u64,
    pub gain: Gain,
    /// `ok`, `unstable` or `slow`.
    pub status: String,
    pub rate: f64,
    pub n_achievable: usize,
    pub n_total: usize,
    pub worst_margin: Option<f64>,
    /// Per-setpoint verdicts on the shared sample, `'1'` = achievable.
    pub verdicts: String,
}

impl SweepEntry {
    fn from_report(index: u64, status: &str, r: &RateReport) -> Self {
        SweepEntry {
            index,
            gain: r.gain,
            status: status.to_string(),
            rate: r.rate,
            n_achievable: r.n_achievable,
            n_total: r.n_total,
            worst_margin: r.worst_margin,
            verdicts: r.verdict_bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub best: RateReport,
    /// Sample index of the winner; `None` when the open-loop baseline wins.
    pub best_index: Option<u64>,
    pub open_loop: Option<RateReport>,
    pub setpoints: Vec<Setpoint>,
    pub log: Vec<SweepEntry>,
    pub n_unstable: usize,
    pub n_slow: usize,
}

/// Ranks reports: higher rate, then larger worst margin, then smaller ‖K‖_F.
fn better(a: &RateReport, b: &RateReport) -> Ordering {
    a.n_achievable
        .cmp(&b.n_achievable)
        .then_with(|| {
            let ma = a.worst_margin.unwrap_or(f64::NEG_INFINITY);
            let mb = b.worst_margin.unwrap_or(f64::NEG_INFINITY);
            ma.total_cmp(&mb)
        })
        .then_with(|| b.gain.frobenius().total_cmp(&a.gain.frobenius()))
}

/// Uniform-sampling gain search scored on one shared setpoint sample.
pub fn optimize_gain(
    cfg: &SamplingConfig,
    params: &PlantParams,
    checker: &Checker,
) -> Result<OptimizeOutcome> {
    let setpoints = sample_setpoints(cfg, 0)?;
    let scored = (0..cfg.n_gains as u64)
        .into_par_iter()
        .map(|i| {
            let gain = sample_gain(cfg, i);
            let report = achievability_rate(&gain, &setpoints, checker, params)?;
            let status = match checker.admits(&gain, params) {
                Ok(()) => "ok",
                Err(s) => s,
            };
            Ok((i, status, report))
        })
        .collect::<Result<Vec<_>>>()?;

    let log: Vec<SweepEntry> = scored
        .iter()
        .map(|(i, status, r)| SweepEntry::from_report(*i, status, r))
        .collect();
    let n_unstable = scored.iter().filter(|s| s.1 == "unstable").count();
    let n_slow = scored.iter().filter(|s| s.1 == "slow").count();

    let open_loop = if cfg.include_open_loop {
        Some(achievability_rate(
            &Gain::ZERO,
            &setpoints,
            checker,
            params,
        )?)
    } else {
        None
    };

    let mut best: Option<(Option<u64>, &RateReport)> = None;
    for (i, status, r) in &scored {
        if *status != "ok" {
            continue;
        }
        match best {
            Some((_, b)) if better(r, b) != Ordering::Greater => {}
            _ => best = Some((Some(*i), r)),
        }
    }
    if let Some(ol) = &open_loop {
        if checker.admits(&ol.gain, params).is_ok() {
            match best {
                Some((_, b)) if better(ol, b) != Ordering::Greater => {}
                _ => best = Some((None, ol)),
            }
        }
    }
    let Some((best_index, best)) = best else {
        return Err(Error::NoStabilizingGain(cfg.n_gains));
    };
    Ok(OptimizeOutcome {
        best: best.clone(),
        best_index,
        open_loop: open_loop.clone(),
        setpoints: setpoints.clone(),
        log,
        n_unstable,
        n_slow,
    })
}

/// Exact one-sided McNemar test that `a` beats `b` on paired verdicts.
///
/// Returns `(wins, losses, p)` where `wins` counts setpoints achievable under
/// `a` only, `losses` those achievable under `b` only, and `p` is
/// `P(X ≥ wins)` for `X ~ Binomial(wins + losses, 1/2)`.
pub fn paired_improvement(a: &[bool], b: &[bool]) -> (usize, usize, f64) {
    let wins = a.iter().zip(b).filter(|(x, y)| **x && !**y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| !**x && **y).count();
    let n = wins + losses;
    if n == 0 {
        return (0, 0, 1.0);
    }
    // Sum binomial pmf in log space to stay finite for large n.
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_choose = vec![0.0f64; n + 1];
    for k in 1..=n {
        ln_choose[k] = ln_choose[k - 1] + ((n - k + 1) as f64).ln() - (k as f64).ln();
    }
    let p: f64 = (wins..=n).map(|k| (ln_choose[k] + ln_half_n).exp()).sum();
    (wins, losses, p.min(1.0))
}

/// Rectangular setpoint grid evaluated at cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub n_p: usize,
    pub n_q: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            p_min: 0.0,
            p_max: 8000.0,
            q_min: -2500.0,
            q_max: 200.0,
            n_p: 80,
            n_q: 27,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_p < 2 || self.n_q < 2 {
            return Err(Error::InvalidSampling("grid counts must be >= 2".into()));
        }
        if !ordered([self.p_min, self.p_max]) || !ordered([self.q_min, self.q_max]) {
            return Err(Error::InvalidSampling("grid bounds must be ordered".into()));
        }
        Ok(())
    }

    /// Cell centres, `P` major.
    pub fn centers(&self) -> Vec<Setpoint> {
        let dp = (self.p_max - self.p_min) / self.n_p as f64;
        let dq = (self.q_max - self.q_min) / self.n_q as f64;
        let mut out = Vec::with_capacity(self.n_p * self.n_q);
        for i in 0..self.n_p {
            for j in 0..self.n_q {
                out.push(Setpoint::new(
                    self.p_min + (i as f64 + 0.5) * dp,
                    self.q_min + (j as f64 + 0.5) * dq,
                ));
            }
        }
        out
    }

    pub fn cell_area(&self) -> f64 {
        (self.p_max - self.p_min) / self.n_p as f64 * (self.q_max - self.q_min) / self.n_q as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub p_ref: f64,
    pub q_ref: f64,
    pub achievable: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub grid: GridSpec,
    pub checker: CheckerKind,
    pub gain: Gain,
    pub cells: Vec<RegionCell>,
}

impl RegionMap {
    pub fn n_achievable(&self) -> usize {
        self.cells.iter().filter(|c| c.achievable).count()
    }

    /// Achievable area in W·var.
    pub fn area(&self) -> f64 {
        self.n_achievable() as f64 * self.grid.cell_area()
    }
}

pub fn map_region(
    k: &Gain,
    grid: &GridSpec,
    checker: &Checker,
    params: &PlantParams,
) -> Result<RegionMap> {
    grid.validate()?;
    let cells = grid
        .centers()
        .par_iter()
        .map(|s| {
            checker.evaluate(*s, k, params).map(|v| RegionCell {
                p_ref: s.p_ref,
                q_ref: s.q_ref,
                achievable: v.achievable,
                margin: v.margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap {
        grid: *grid,
        checker: checker.kind(),
        gain: *k,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SamplingConfig {
        SamplingConfig {
            n_setpoints: 40,
            n_gains: 8,
            ..SamplingConfig::default()
        }
    }

    #[test]
    fn no_rejection_with_full_pf_range() {
        let cfg = SamplingConfig {
            pf_range: [0.0, 1.0],
            n_setpoints: 100,
            ..SamplingConfig::default()
        };
        let a = sample_setpoints(&cfg, 0).unwrap();
        // With no rejection, setpoint j is exactly draw j.
        let rng = CounterRng::new(cfg.seed, streams::SETPOINTS);
        for (j, s) in a.iter().enumerate() {
            let [u, v] = rng.uniform2(j as u64);
            assert_eq!(s.p_ref, scale(u, 0.0, 8000.0));
            assert_eq!(s.q_ref, scale(v, -2500.0, 200.0));
        }
    }

    #[test]
    fn default_sampling_respects_pf() {
        let pts = sample_setpoints(&SamplingConfig::default(), 0).unwrap();
        assert_eq!(pts.len(), 500);
        for s in pts {
            let pf = s.power_factor().unwrap();
            assert!((0.95..=1.0).contains(&pf), "{s:?}");
            assert!((0.0..=8000.0).contains(&s.p_ref));
            assert!((-2500.0..=200.0).contains(&s.q_ref));
        }
    }

    #[test]
    fn impossible_pf_aborts() {
        // Q fixed far from zero with tiny P: power factor stays far below 0.95.
        let cfg = SamplingConfig {
            p_range: [0.0, 1.0],
            q_range: [1000.0, 2000.0],
            n_setpoints: 10,
            ..SamplingConfig::default()
        };
        assert!(matches!(
            sample_setpoints(&cfg, 0),
            Err(Error::LowAcceptance { .. })
        ));
    }

    #[test]
    fn validation() {
        let d = SamplingConfig::default;
        let bad = [
            SamplingConfig {
                p_range: [10.0, 0.0],
                ..d()
            },
            SamplingConfig {
                pf_range: [0.9, 1.1],
                ..d()
            },
            SamplingConfig { n_gains: 0, ..d() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(d().validate().is_ok());
    }

    #[test]
    fn degenerate_box_origin_rate_is_one() {
        let p = PlantParams::nominal();
        let cfg = SamplingConfig {
            p_range: [0.0, 0.0],
            q_range: [0.0, 0.0],
            n_setpoints: 3,
            ..SamplingConfig::default()
        };
        let pts = sample_setpoints(&cfg, 0).unwrap();
        assert!(pts.iter().all(|s| *s == Setpoint::default()));
        for checker in [
            Checker::SteadyState { n_grid: 101 },
            Checker::Certificate(SearchOptions::default()),
        ] {
            let r = achievability_rate(&Gain::ZERO, &pts, &checker, &p).unwrap();
            assert_eq!(r.rate, 1.0);
            assert_eq!(r.n_achievable, 3);
        }
    }

    #[test]
    fn unstable_gain_rates_zero() {
        let p = PlantParams::nominal();
        let pts = vec![Setpoint::default()];
        let checker = Checker::Certificate(SearchOptions::default());
        let r = achievability_rate(&Gain::reported_optimum(), &pts, &checker, &p).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.flags.iter().any(|f| f == "unstable"));
    }

    #[test]
    fn single_zero_candidate() {
        let p = PlantParams::nominal();
        let cfg = SamplingConfig {
            k_box: [0.0, 0.0],
            n_gains: 1,
            include_open_loop: false,
            checker: CheckerKind::SteadyState,
            ..small_cfg()
        };
        let out = optimize_gain(&cfg, &p, &Checker::SteadyState { n_grid: 101 }).unwrap();
        assert_eq!(out.best.gain, Gain::ZERO);
        assert_eq!(out.best_index, Some(0));
        assert_eq!(out.log.len(), 1);
    }

    #[test]
    fn all_unstable_is_an_error() {
        let p = PlantParams::nominal();
        // Every entry near −0.2 makes k11 + k22 < −0.16.
        let cfg = SamplingConfig {
            k_box: [-0.2, -0.19],
            n_gains: 4,
            include_open_loop: false,
            ..small_cfg()
        };
        let err = optimize_gain(&cfg, &p, &Checker::Certificate(SearchOptions::default()));
        assert!(matches!(err, Err(Error::NoStabilizingGain(4))));
    }

    #[test]
    fn mcnemar_values() {
        assert_eq!(
            paired_improvement(&[true, false], &[true, false]),
            (0, 0, 1.0)
        );
        // 5 wins, 0 losses: p = 2^-5.
        let a = [true; 5];
        let b = [false; 5];
        let (w, l, pv) = paired_improvement(&a, &b);
        assert_eq!((w, l), (5, 0));
        assert!((pv - 1.0 / 32.0).abs() < 1e-15);
        // 1 win, 1 loss: P(X ≥ 1) = 3/4.
        let (_, _, pv) = paired_improvement(&[true, false], &[false, true]);
        assert!((pv - 0.75).abs() < 1e-15);
    }

    #[test]
    fn region_around_origin() {
        let p = PlantParams::nominal();
        let grid = GridSpec {
            p_min: -1.0,
            p_max: 1.0,
            q_min: -1.0,
            q_max: 1.0,
            n_p: 2,
            n_q: 2,
        };
        for checker in [
            Checker::SteadyState { n_grid: 101 },
            Checker::Certificate(SearchOptions::default()),
        ] {
            let m = map_region(&Gain::ZERO, &grid, &checker, &p).unwrap();
            assert_eq!(m.cells.len(), 4);
            assert_eq!(m.n_achievable(), 4);
            assert!((m.area() - 4.0).abs() < 1e-12);
        }
        let bad = GridSpec { n_p: 1, ..grid };
        assert!(map_region(&Gain::ZERO, &bad, &Checker::SteadyState { n_grid: 3 }, &p).is_err());
    }

    #[test]
    fn checker_kind_parse() {
        for k in [
            CheckerKind::Certificate,
            CheckerKind::SteadyState,
            CheckerKind::Trajectory,
        ] {
            assert_eq!(k.label().parse::<CheckerKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.label()));
        }
        assert!("mpc".parse::<CheckerKind>().is_err());
    }
}
