//! Plant dynamics of a grid-connected VSI in the stationary α–β frame.
//!
//! The state is the instantaneous power pair `x = [P, Q]`. The control input
//! is the synthetic pair `u = [u_P, u_Q]` built from products of grid and
//! inverter voltages (units V²), which turns the plant into the LTI system
//! `ẋ = A·x + B·u + E·d` with the squared grid magnitude `d = V_G²` entering
//! as a measured additive disturbance.

mod integrate;
mod profile;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

pub use integrate::step_rk4;
pub use profile::GridProfile;

/// Physical and constraint constants of the inverter and its grid connection.
///
/// `omega` is always derived as `2π·f`; it is never stored in serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlantParamsRecord", into = "PlantParamsRecord")]
pub struct PlantParams {
    r: f64,
    l: f64,
    f: f64,
    omega: f64,
    vg_lo: f64,
    vg_hi: f64,
    u_lo: f64,
    u_hi: f64,
}

/// Flat on-disk layout of [`PlantParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParamsRecord {
    pub r_ohm: f64,
    pub l_henry: f64,
    pub f_hz: f64,
    pub vg_lo_v: f64,
    pub vg_hi_v: f64,
    pub u_lo_v: f64,
    pub u_hi_v: f64,
}

impl TryFrom<PlantParamsRecord> for PlantParams {
    type Error = Error;

    fn try_from(rec: PlantParamsRecord) -> Result<Self> {
        PlantParams::new(
            rec.r_ohm,
            rec.l_henry,
            rec.f_hz,
            rec.vg_lo_v,
            rec.vg_hi_v,
            rec.u_lo_v,
            rec.u_hi_v,
        )
    }
}

impl From<PlantParams> for PlantParamsRecord {
    fn from(p: PlantParams) -> Self {
        PlantParamsRecord {
            r_ohm: p.r,
            l_henry: p.l,
            f_hz: p.f,
            vg_lo_v: p.vg_lo,
            vg_hi_v: p.vg_hi,
            u_lo_v: p.u_lo,
            u_hi_v: p.u_hi,
        }
    }
}

impl PlantParams {
    pub fn new(
        r: f64,
        l: f64,
        f: f64,
        vg_lo: f64,
        vg_hi: f64,
        u_lo: f64,
        u_hi: f64,
    ) -> Result<Self> {
        let all = [r, l, f, vg_lo, vg_hi, u_lo, u_hi];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if r <= 0.0 || l <= 0.0 || f <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "R, L and f must be positive (got R={r}, L={l}, f={f})"
            )));
        }
        if !(vg_lo > 0.0 && vg_lo <= vg_hi) {
            return Err(Error::InvalidParams(format!(
                "need 0 < vg_lo <= vg_hi (got {vg_lo}, {vg_hi})"
            )));
        }
        if !(u_lo > 0.0 && u_lo <= u_hi) {
            return Err(Error::InvalidParams(format!(
                "need 0 < u_lo <= u_hi (got {u_lo}, {u_hi})"
            )));
        }
        Ok(Self {
            r,
            l,
            f,
            omega: 2.0 * PI * f,
            vg_lo,
            vg_hi,
            u_lo,
            u_hi,
        })
    }

    /// The 50 Hz test system: R = 0.12 Ω, L = 4 mH, V_G ∈ [105.6, 114.4] V,
    /// U ∈ [104.5, 115.5] V.
    pub fn nominal() -> Self {
        Self::new(0.12, 4e-3, 50.0, 105.6, 114.4, 104.5, 115.5).expect("valid defaults")
    }

    /// Same plant with a different inverter voltage band.
    pub fn with_u_bounds(&self, u_lo: f64, u_hi: f64) -> Result<Self> {
        Self::new(self.r, self.l, self.f, self.vg_lo, self.vg_hi, u_lo, u_hi)
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn f(&self) -> f64 {
        self.f
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn vg_lo(&self) -> f64 {
        self.vg_lo
    }
    pub fn vg_hi(&self) -> f64 {
        self.vg_hi
    }
    pub fn u_lo(&self) -> f64 {
        self.u_lo
    }
    pub fn u_hi(&self) -> f64 {
        self.u_hi
    }

    /// Lower bound of the disturbance, `vg_lo²`.
    pub fn d_lo(&self) -> f64 {
        self.vg_lo * self.vg_lo
    }

    /// Upper bound of the disturbance, `vg_hi²`.
    pub fn d_hi(&self) -> f64 {
        self.vg_hi * self.vg_hi
    }

    pub fn vg_mid(&self) -> f64 {
        0.5 * (self.vg_lo + self.vg_hi)
    }
}

impl Default for PlantParams {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Instantaneous active (W) and reactive (var) power.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerState {
    pub p: f64,
    pub q: f64,
}

impl PowerState {
    pub const ZERO: PowerState = PowerState { p: 0.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.p, self.q)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self { p: v.x, q: v.y }
    }

    pub fn norm(self) -> f64 {
        self.p.hypot(self.q)
    }

    pub fn is_finite(self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }
}

/// Synthetic control `u_P = v_Gα·u_α + v_Gβ·u_β`, `u_Q = v_Gβ·u_α − v_Gα·u_β` (V²).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlPQ {
    pub u_p: f64,
    pub u_q: f64,
}

impl ControlPQ {
    pub fn new(u_p: f64, u_q: f64) -> Self {
        Self { u_p, u_q }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.u_p, self.u_q)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self { u_p: v.x, u_q: v.y }
    }

    pub fn norm(self) -> f64 {
        self.u_p.hypot(self.u_q)
    }
}

/// Inverter output voltages in the α–β frame (V).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlAB {
    pub u_alpha: f64,
    pub u_beta: f64,
}

impl ControlAB {
    pub fn norm(self) -> f64 {
        self.u_alpha.hypot(self.u_beta)
    }
}

/// Squared grid-voltage magnitude `d = V_G²` (V²).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Disturbance(pub f64);

impl Disturbance {
    pub fn from_grid_voltage(vg: f64) -> Self {
        Disturbance(vg * vg)
    }

    /// Builds a disturbance and checks it lies in `[vg_lo², vg_hi²]`.
    pub fn checked(d: f64, params: &PlantParams) -> Result<Self> {
        if d.is_finite() && d >= params.d_lo() && d <= params.d_hi() {
            Ok(Disturbance(d))
        } else {
            Err(Error::InvalidProfile(format!(
                "disturbance {d} outside [{}, {}]",
                params.d_lo(),
                params.d_hi()
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// System matrices of `ẋ = A·x + B·u + E·d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantMatrices {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub e: Vector2<f64>,
}

impl PlantMatrices {
    /// `B⁻¹·A`, which is `(2L/3)·A` because `B` is a scaled identity.
    pub fn b_inv_a(&self) -> Matrix2<f64> {
        self.a / self.b[(0, 0)]
    }

    /// `B⁻¹·E`; always `[-1, 0]ᵀ`.
    pub fn b_inv_e(&self) -> Vector2<f64> {
        self.e / self.b[(0, 0)]
    }
}

pub fn plant_matrices(params: &PlantParams) -> PlantMatrices {
    let damp = params.r / params.l;
    let w = params.omega;
    let gain = 1.5 / params.l;
    PlantMatrices {
        a: Matrix2::new(-damp, -w, w, -damp),
        b: Matrix2::new(gain, 0.0, 0.0, gain),
        e: Vector2::new(-gain, 0.0),
    }
}

/// Time derivative `A·x + B·u + E·d` of the power state.
pub fn dynamics(x: PowerState, u: ControlPQ, d: Disturbance, params: &PlantParams) -> PowerState {
    // Expanded by hand: this sits in the innermost simulation loop.
    let damp = params.r / params.l;
    let w = params.omega;
    let gain = 1.5 / params.l;
    PowerState {
        p: -damp * x.p - w * x.q + gain * (u.u_p - d.0),
        q: w * x.p - damp * x.q + gain * u.u_q,
    }
}

/// Grid voltage components `(v_Gα, v_Gβ) = V_G·(cos ωt, sin ωt)`.
pub fn grid_components(vg: f64, omega: f64, t: f64) -> (f64, f64) {
    let (s, c) = (omega * t).sin_cos();
    (vg * c, vg * s)
}

/// Recovers the physical inverter voltages from the synthetic control.
///
/// The map `[u_P, u_Q] = [[v_Gα, v_Gβ], [v_Gβ, −v_Gα]]·[u_α, u_β]` is its own
/// inverse up to the factor `1/V_G²`, so
/// `u_α = (v_Gα·u_P + v_Gβ·u_Q)/V_G²` and `u_β = (v_Gβ·u_P − v_Gα·u_Q)/V_G²`.
pub fn to_alpha_beta(
    u: ControlPQ,
    profile: &GridProfile,
    params: &PlantParams,
    t: f64,
) -> Result<ControlAB> {
    let vg = profile.voltage(t);
    if !(vg > 0.0) {
        return Err(Error::DegenerateGrid(vg));
    }
    let (va, vb) = grid_components(vg, params.omega(), t);
    let d = vg * vg;
    Ok(ControlAB {
        u_alpha: (va * u.u_p + vb * u.u_q) / d,
        u_beta: (vb * u.u_p - va * u.u_q) / d,
    })
}

/// Forward map from inverter voltages to the synthetic control.
pub fn from_alpha_beta(
    uab: ControlAB,
    profile: &GridProfile,
    params: &PlantParams,
    t: f64,
) -> ControlPQ {
    let (va, vb) = grid_components(profile.voltage(t), params.omega(), t);
    ControlPQ {
        u_p: va * uab.u_alpha + vb * uab.u_beta,
        u_q: vb * uab.u_alpha - va * uab.u_beta,
    }
}
