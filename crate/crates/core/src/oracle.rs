//! Brute-force achievability checkers that do not go through the S-lemma.
//!
//! * [`steady_state_achievable`] sweeps the disturbance band at the
//!   equilibrium `x = x_ref`, where the control is the pure feedforward.
//! * [`trajectory_achievable`] simulates the closed loop against an ensemble
//!   of grid-voltage profiles and monitors `U̲·V_G ≤ ‖u‖₂ ≤ Ū·V_G`.
//! * [`implication_counterexample`] samples for a point that satisfies the
//!   premise form but violates a conclusion form.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

use crate::certificate::QuadraticForm;
use crate::controller::{feedback_control, feedforward, is_stabilizing, Gain, Setpoint};
use crate::model::{step_rk4, Disturbance, GridProfile, PlantParams, PowerState};
use crate::rng::{scale, streams, CounterRng};
use crate::{Error, Result};

pub const DEFAULT_N_GRID: usize = 1001;
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_HORIZON: f64 = 0.5;
/// Falsifier threshold on a conclusion form.
pub const COUNTEREXAMPLE_TOL: f64 = 1e-6;

/// Violation tolerance `1e-9·Ū·vg_hi`.
pub fn violation_tolerance(params: &PlantParams) -> f64 {
    1e-9 * params.u_hi() * params.vg_hi()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateVerdict {
    pub achievable: bool,
    /// `min_d min(‖u‖ − U̲√d, Ū√d − ‖u‖)` over the evaluated points (V²).
    pub worst_margin: f64,
    pub worst_d: f64,
}

/// Steady-state check over `d ∈ [vg_lo², vg_hi²]`.
///
/// The verdict is exact: `‖u_ss(d)‖² − U̲²d` is a convex parabola in `d` and
/// `Ū²d − ‖u_ss(d)‖²` a concave one, so together with the grid the interior
/// critical points settle both signs.
pub fn steady_state_achievable(
    x_ref: Setpoint,
    params: &PlantParams,
    n_grid: usize,
) -> SteadyStateVerdict {
    let n_grid = n_grid.max(2);
    let (dl, dh) = (params.d_lo(), params.d_hi());
    let (ul, uh) = (params.u_lo(), params.u_hi());
    // u_ss(d) = w + [d, 0].
    let w = feedforward(x_ref, Disturbance(0.0), params);

    let margin_at = |d: f64| {
        let u = (d + w.u_p).hypot(w.u_q);
        let sd = d.sqrt();
        (u - ul * sd).min(uh * sd - u)
    };

    let mut worst = (f64::INFINITY, dl);
    let mut visit = |d: f64| {
        let m = margin_at(d);
        if m < worst.0 {
            worst = (m, d);
        }
    };
    for i in 0..n_grid {
        let d = if i + 1 == n_grid {
            dh
        } else {
            dl + (dh - dl) * i as f64 / (n_grid - 1) as f64
        };
        visit(d);
    }
    for crit in [0.5 * ul * ul - w.u_p, 0.5 * uh * uh - w.u_p] {
        if crit > dl && crit < dh {
            visit(crit);
        }
    }
    SteadyStateVerdict {
        achievable: worst.0 >= -violation_tolerance(params),
        worst_margin: worst.0,
        worst_d: worst.1,
    }
}

/// A grid-voltage profile with a short name for reports and file names.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledProfile {
    pub label: String,
    pub profile: GridProfile,
}

impl LabeledProfile {
    pub fn new(label: impl Into<String>, profile: GridProfile) -> Self {
        Self {
            label: label.into(),
            profile,
        }
    }
}

/// Audit ensemble: both band edges, the midpoint, a 0.5 Hz sinusoid over 90%
/// of the band, and a 0.1 V-per-step clamped random walk.
pub fn default_ensemble(
    params: &PlantParams,
    dt: f64,
    horizon: f64,
    seed: u64,
) -> Result<Vec<LabeledProfile>> {
    let mid = params.vg_mid();
    let half_band = 0.5 * (params.vg_hi() - params.vg_lo());
    Ok(vec![
        LabeledProfile::new("const-lo", GridProfile::constant(params.vg_lo(), params)?),
        LabeledProfile::new("const-hi", GridProfile::constant(params.vg_hi(), params)?),
        LabeledProfile::new("const-mid", GridProfile::constant(mid, params)?),
        LabeledProfile::new(
            "sine",
            GridProfile::sinusoid(mid, 0.9 * half_band, 2.0, params)?,
        ),
        LabeledProfile::new(
            "walk",
            GridProfile::random_walk(0.1, seed, dt, horizon, params)?,
        ),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOptions {
    pub dt: f64,
    pub horizon: f64,
    pub ensemble: Vec<LabeledProfile>,
}

impl TrajectoryOptions {
    pub fn new(dt: f64, horizon: f64, ensemble: Vec<LabeledProfile>) -> Self {
        Self {
            dt,
            horizon,
            ensemble,
        }
    }

    pub fn defaults(params: &PlantParams, seed: u64) -> Result<Self> {
        Ok(Self::new(
            DEFAULT_DT,
            DEFAULT_HORIZON,
            default_ensemble(params, DEFAULT_DT, DEFAULT_HORIZON, seed)?,
        ))
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One monitored sample of a closed-loop simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub x: PowerState,
    pub u_p: f64,
    pub u_q: f64,
    pub vg: f64,
    pub norm_u: f64,
    pub lower: f64,
    pub upper: f64,
    pub violation: bool,
}

impl TraceSample {
    pub fn margin(&self) -> f64 {
        (self.norm_u - self.lower).min(self.upper - self.norm_u)
    }
}

/// Per-profile record of `U̲·V_G(t) ≤ ‖u(t)‖₂ ≤ Ū·V_G(t)` (all in V²).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintTrace {
    pub label: String,
    pub samples: Vec<TraceSample>,
    pub worst_margin: f64,
}

impl ConstraintTrace {
    pub fn violations(&self) -> usize {
        self.samples.iter().filter(|s| s.violation).count()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn final_state(&self) -> Option<PowerState> {
        self.samples.last().map(|s| s.x)
    }
}

/// Simulates one profile, calling `visit` on every sample `t_k = k·dt`,
/// `k = 0..=steps`. Stops early when `visit` breaks.
#[allow(clippy::too_many_arguments)]
pub fn simulate_profile<F>(
    x0: PowerState,
    x_ref: Setpoint,
    k: &Gain,
    params: &PlantParams,
    profile: &GridProfile,
    dt: f64,
    steps: usize,
    mut visit: F,
) where
    F: FnMut(&TraceSample) -> ControlFlow<()>,
{
    let control = |_t: f64, x: PowerState, d: Disturbance| feedback_control(x, x_ref, k, d, params);
    let (ul, uh) = (params.u_lo(), params.u_hi());
    let tol = violation_tolerance(params);
    let mut x = x0;
    for i in 0..=steps {
        let t = i as f64 * dt;
        let vg = profile.voltage(t);
        let u = control(t, x, Disturbance(vg * vg));
        let norm_u = u.u_p.hypot(u.u_q);
        let lower = ul * vg;
        let upper = uh * vg;
        let sample = TraceSample {
            t,
            x,
            u_p: u.u_p,
            u_q: u.u_q,
            vg,
            norm_u,
            lower,
            upper,
            violation: norm_u < lower - tol || norm_u > upper + tol || !norm_u.is_finite(),
        };
        if visit(&sample).is_break() {
            return;
        }
        if i < steps {
            x = step_rk4(x, &control, profile, params, t, dt);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryVerdict {
    pub achievable: bool,
    pub worst_margin: f64,
    /// Label of the profile that produced `worst_margin`.
    pub worst_profile: String,
    pub traces: Vec<ConstraintTrace>,
}

fn check_preconditions(k: &Gain, params: &PlantParams, opts: &TrajectoryOptions) -> Result<()> {
    let stab = is_stabilizing(k, params);
    if !stab.stabilizing {
        return Err(Error::NotStabilizing(stab.describe()));
    }
    if !(opts.dt > 0.0) || opts.ensemble.is_empty() {
        return Err(Error::InvalidProfile(
            "trajectory check needs dt > 0 and a non-empty ensemble".into(),
        ));
    }
    let needed = 5.0 * stab.time_constant();
    if opts.horizon < needed {
        return Err(Error::InvalidProfile(format!(
            "horizon {} s is shorter than 5 closed-loop time constants ({needed} s)",
            opts.horizon
        )));
    }
    Ok(())
}

/// Full trajectory check with one [`ConstraintTrace`] per ensemble member.
pub fn trajectory_achievable(
    x0: PowerState,
    x_ref: Setpoint,
    k: &Gain,
    params: &PlantParams,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryVerdict> {
    check_preconditions(k, params, opts)?;
    let steps = opts.steps();
    let mut traces = Vec::with_capacity(opts.ensemble.len());
    for member in &opts.ensemble {
        let mut trace = ConstraintTrace {
            label: member.label.clone(),
            samples: Vec::with_capacity(steps + 1),
            worst_margin: f64::INFINITY,
        };
        simulate_profile(x0, x_ref, k, params, &member.profile, opts.dt, steps, |s| {
            trace.worst_margin = trace.worst_margin.min(s.margin());
            trace.samples.push(*s);
            ControlFlow::Continue(())
        });
        traces.push(trace);
    }
    let (worst_margin, worst_profile) = traces
        .iter()
        .map(|t| (t.worst_margin, t.label.clone()))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::INFINITY, String::new()));
    Ok(TrajectoryVerdict {
        achievable: traces.iter().all(|t| t.violations() == 0),
        worst_margin,
        worst_profile,
        traces,
    })
}

/// Verdict-only variant of [`trajectory_achievable`] that stops at the first
/// violation and keeps no traces. On an early stop the margin is the one of
/// the violating sample.
pub fn trajectory_verdict(
    x0: PowerState,
    x_ref: Setpoint,
    k: &Gain,
    params: &PlantParams,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryVerdict> {
    check_preconditions(k, params, opts)?;
    let steps = opts.steps();
    let mut worst = (f64::INFINITY, String::new());
    for member in &opts.ensemble {
        let mut violated = None;
        let mut local = f64::INFINITY;
        simulate_profile(x0, x_ref, k, params, &member.profile, opts.dt, steps, |s| {
            local = local.min(s.margin());
            if s.violation {
                violated = Some(s.margin());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if local < worst.0 {
            worst = (local, member.label.clone());
        }
        if let Some(m) = violated {
            return Ok(TrajectoryVerdict {
                achievable: false,
                worst_margin: m.min(local),
                worst_profile: member.label.clone(),
                traces: Vec::new(),
            });
        }
    }
    Ok(TrajectoryVerdict {
        achievable: true,
        worst_margin: worst.0,
        worst_profile: worst.1,
        traces: Vec::new(),
    })
}

/// Axis-aligned sampling box for `z = [d, P, Q]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl SampleBox {
    /// `d` over the disturbance band and `(P, Q)` in `±half_width`.
    pub fn band(params: &PlantParams, half_width: f64) -> Self {
        Self {
            lo: [params.d_lo(), -half_width, -half_width],
            hi: [params.d_hi(), half_width, half_width],
        }
    }
}

/// Looks for `z` with `qa(z) ≥ 0` and `qb(z) < −1e-6` among `n_samples`
/// uniform draws from `sample_box`.
pub fn implication_counterexample(
    qa: &QuadraticForm,
    qb: &QuadraticForm,
    sample_box: &SampleBox,
    n_samples: usize,
    seed: u64,
) -> Option<Vector3<f64>> {
    let rng = CounterRng::new(seed, streams::FALSIFIER);
    (0..n_samples as u64).find_map(|i| {
        let [a, b] = rng.uniform2(2 * i);
        let [c, _] = rng.uniform2(2 * i + 1);
        let z = Vector3::new(
            scale(a, sample_box.lo[0], sample_box.hi[0]),
            scale(b, sample_box.lo[1], sample_box.hi[1]),
            scale(c, sample_box.lo[2], sample_box.hi[2]),
        );
        (qa.eval(&z) >= 0.0 && qb.eval(&z) < -COUNTEREXAMPLE_TOL).then_some(z)
    })
}
