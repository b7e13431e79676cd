use std::f64::consts::PI;
use std::sync::Arc;

use super::PlantParams;
use crate::rng::{streams, CounterRng};
use crate::{Error, Result};

/// Deterministic grid-voltage magnitude trajectory `V_G(t)` (V).
///
/// All constructors check that the trajectory stays inside
/// `[vg_lo, vg_hi]` for every `t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridProfile {
    Constant {
        value: f64,
    },
    /// `mean + amplitude·sin(2πt/period)`.
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    RandomWalk(RandomWalk),
}

/// Clamped ±step random walk started at the band midpoint, with one knot every
/// `knot_dt` seconds and linear interpolation between knots. After the last
/// knot the walk holds its final value.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalk {
    pub step: f64,
    pub seed: u64,
    pub knot_dt: f64,
    knots: Arc<[f64]>,
}

impl RandomWalk {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}

fn check_inside(v: f64, params: &PlantParams, what: &str) -> Result<()> {
    if v.is_finite() && v >= params.vg_lo() && v <= params.vg_hi() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!(
            "{what} {v} V outside [{}, {}] V",
            params.vg_lo(),
            params.vg_hi()
        )))
    }
}

impl GridProfile {
    pub fn constant(value: f64, params: &PlantParams) -> Result<Self> {
        check_inside(value, params, "constant level")?;
        Ok(GridProfile::Constant { value })
    }

    pub fn sinusoid(mean: f64, amplitude: f64, period: f64, params: &PlantParams) -> Result<Self> {
        if !(amplitude >= 0.0) || !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "sinusoid needs amplitude >= 0 and period > 0 (got {amplitude}, {period})"
            )));
        }
        check_inside(mean - amplitude, params, "sinusoid trough")?;
        check_inside(mean + amplitude, params, "sinusoid crest")?;
        Ok(GridProfile::Sinusoid {
            mean,
            amplitude,
            period,
        })
    }

    /// Random walk covering `[0, span]` seconds.
    pub fn random_walk(
        step: f64,
        seed: u64,
        knot_dt: f64,
        span: f64,
        params: &PlantParams,
    ) -> Result<Self> {
        if !(step >= 0.0) || !step.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "walk step {step} must be >= 0"
            )));
        }
        if !(knot_dt > 0.0) || !(span >= 0.0) || !span.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "walk needs knot_dt > 0 and span >= 0 (got {knot_dt}, {span})"
            )));
        }
        let n = (span / knot_dt).ceil() as usize + 1;
        let rng = CounterRng::new(seed, streams::RANDOM_WALK);
        let (lo, hi) = (params.vg_lo(), params.vg_hi());
        let mut v = params.vg_mid();
        let mut knots = Vec::with_capacity(n);
        knots.push(v);
        for i in 1..n {
            let up = rng.block(i as u64)[0] & 1 == 1;
            v += if up { step } else { -step };
            v = v.clamp(lo, hi);
            knots.push(v);
        }
        Ok(GridProfile::RandomWalk(RandomWalk {
            step,
            seed,
            knot_dt,
            knots: knots.into(),
        }))
    }

    /// `V_G(t)`; negative times are read as `t = 0`.
    #[inline]
    pub fn voltage(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            GridProfile::Constant { value } => *value,
            GridProfile::Sinusoid {
                mean,
                amplitude,
                period,
            } => mean + amplitude * (2.0 * PI * t / period).sin(),
            GridProfile::RandomWalk(w) => {
                let pos = t / w.knot_dt;
                let i = pos.floor() as usize;
                let last = w.knots.len() - 1;
                if i >= last {
                    w.knots[last]
                } else {
                    let frac = pos - i as f64;
                    w.knots[i] + frac * (w.knots[i + 1] - w.knots[i])
                }
            }
        }
    }

    /// Disturbance `d(t) = V_G(t)²`.
    #[inline]
    pub fn disturbance(&self, t: f64) -> f64 {
        let v = self.voltage(t);
        v * v
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GridProfile::Constant { .. } => "constant",
            GridProfile::Sinusoid { .. } => "sinusoid",
            GridProfile::RandomWalk(_) => "random-walk",
        }
    }
}
