//! Static state-feedback power control with feedforward disturbance
//! cancellation, `u = −K(x − x_ref) − B⁻¹A·x_ref − B⁻¹E·d`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::model::{plant_matrices, ControlPQ, Disturbance, PlantParams, PowerState};

/// Band inside which trace or determinant of `A − BK` counts as zero.
pub const MARGINAL_BAND: f64 = 1e-9;

/// 2×2 feedback gain mapping power error (W, var) to synthetic control (V²).
///
/// Serializes as `[[k11, k12], [k21, k22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Gain {
    pub k: Matrix2<f64>,
}

impl From<[[f64; 2]; 2]> for Gain {
    fn from(rows: [[f64; 2]; 2]) -> Self {
        Gain::new(rows)
    }
}

impl From<Gain> for [[f64; 2]; 2] {
    fn from(g: Gain) -> Self {
        g.rows()
    }
}

impl Gain {
    pub const ZERO: Gain = Gain {
        k: Matrix2::new(0.0, 0.0, 0.0, 0.0),
    };

    pub fn new(rows: [[f64; 2]; 2]) -> Self {
        Gain {
            k: Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]),
        }
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [
            [self.k[(0, 0)], self.k[(0, 1)]],
            [self.k[(1, 0)], self.k[(1, 1)]],
        ]
    }

    /// The optimized gain reported for the 50 Hz test system.
    pub fn reported_optimum() -> Self {
        Gain::new([[-0.08, -0.06], [0.02, -0.16]])
    }

    pub fn frobenius(&self) -> f64 {
        self.k.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.k.iter().all(|v| v.is_finite())
    }
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rows();
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            r[0][0], r[0][1], r[1][0], r[1][1]
        )
    }
}

/// Power setpoint `x_ref = [P_ref, Q_ref]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setpoint {
    pub p_ref: f64,
    pub q_ref: f64,
}

impl Setpoint {
    pub fn new(p_ref: f64, q_ref: f64) -> Self {
        Self { p_ref, q_ref }
    }

    /// `P/√(P² + Q²)`, undefined at the origin.
    pub fn power_factor(&self) -> Option<f64> {
        let s = self.p_ref.hypot(self.q_ref);
        (s > 0.0).then(|| self.p_ref / s)
    }

    pub fn as_state(&self) -> PowerState {
        PowerState::new(self.p_ref, self.q_ref)
    }
}

impl From<Setpoint> for PowerState {
    fn from(s: Setpoint) -> Self {
        s.as_state()
    }
}

/// Complex eigenvalue `re + j·im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im >= 0.0 {
            write!(f, "{:.6}+{:.6}j", self.re, self.im)
        } else {
            write!(f, "{:.6}{:.6}j", self.re, self.im)
        }
    }
}

/// Stability classification of `A − BK` with its evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stabilizing: bool,
    pub trace: f64,
    pub det: f64,
    pub eigenvalues: [Eigenvalue; 2],
}

impl Stability {
    /// Largest eigenvalue real part.
    pub fn abscissa(&self) -> f64 {
        self.eigenvalues[0].re.max(self.eigenvalues[1].re)
    }

    /// `1/|max Re λ|`; infinite when not stabilizing.
    pub fn time_constant(&self) -> f64 {
        if self.stabilizing {
            1.0 / self.abscissa().abs()
        } else {
            f64::INFINITY
        }
    }

    pub fn describe(&self) -> String {
        format!("{}, {}", self.eigenvalues[0], self.eigenvalues[1])
    }
}

/// Closed-loop error matrix `A − BK`.
pub fn closed_loop(k: &Gain, params: &PlantParams) -> Matrix2<f64> {
    let m = plant_matrices(params);
    m.a - m.b * k.k
}

/// `−B⁻¹A·x_ref − B⁻¹E·d`: holds the plant at `x_ref` under disturbance `d`.
#[inline]
pub fn feedforward(x_ref: Setpoint, d: Disturbance, params: &PlantParams) -> ControlPQ {
    // B⁻¹A = (2L/3)·A and B⁻¹E = [−1, 0]ᵀ.
    let scale = params.l() / 1.5;
    let damp = params.r() / params.l();
    let w = params.omega();
    ControlPQ {
        u_p: scale * (damp * x_ref.p_ref + w * x_ref.q_ref) + d.0,
        u_q: scale * (-w * x_ref.p_ref + damp * x_ref.q_ref),
    }
}

#[inline]
pub fn feedback_control(
    x: PowerState,
    x_ref: Setpoint,
    k: &Gain,
    d: Disturbance,
    params: &PlantParams,
) -> ControlPQ {
    let ep = x.p - x_ref.p_ref;
    let eq = x.q - x_ref.q_ref;
    let ff = feedforward(x_ref, d, params);
    ControlPQ {
        u_p: ff.u_p - (k.k[(0, 0)] * ep + k.k[(0, 1)] * eq),
        u_q: ff.u_q - (k.k[(1, 0)] * ep + k.k[(1, 1)] * eq),
    }
}

fn eigenvalues_2x2(trace: f64, det: f64) -> [Eigenvalue; 2] {
    let s = 0.5 * trace;
    let disc = s * s - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // Avoid cancellation: take the larger-magnitude root first.
        let big = if s >= 0.0 { s + root } else { s - root };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (hi, lo) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [
            Eigenvalue { re: hi, im: 0.0 },
            Eigenvalue { re: lo, im: 0.0 },
        ]
    } else {
        let im = (-disc).sqrt();
        [Eigenvalue { re: s, im }, Eigenvalue { re: s, im: -im }]
    }
}

/// Hurwitz test of `A − BK` via `trace < 0 ∧ det > 0`, exact for 2×2.
///
/// Marginal cases (trace or determinant within [`MARGINAL_BAND`] of zero)
/// are classified as not stabilizing.
pub fn is_stabilizing(k: &Gain, params: &PlantParams) -> Stability {
    let m = closed_loop(k, params);
    let trace = m.trace();
    let det = m.determinant();
    Stability {
        stabilizing: k.is_finite() && trace < -MARGINAL_BAND && det > MARGINAL_BAND,
        trace,
        det,
        eigenvalues: eigenvalues_2x2(trace, det),
    }
}

/// Closed-form `exp(M·t)` for a real 2×2 matrix.
pub fn expm2(m: &Matrix2<f64>, t: f64) -> Matrix2<f64> {
    let s = 0.5 * m.trace();
    let n = m - Matrix2::identity() * s;
    // N² = disc·I with disc = s² − det(M).
    let disc = s * s - m.determinant();
    let x = disc * t * t;
    let (c, sk) = if x.abs() < 1e-8 {
        (1.0 + 0.5 * x, t * (1.0 + x / 6.0))
    } else if disc < 0.0 {
        let w = (-disc).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        let mu = disc.sqrt();
        ((mu * t).cosh(), (mu * t).sinh() / mu)
    };
    (Matrix2::identity() * c + n * sk) * (s * t).exp()
}

/// Exact error trajectory `exp((A − BK)·t)·e0` of the closed loop.
pub fn error_response(e0: PowerState, k: &Gain, params: &PlantParams, t: f64) -> PowerState {
    let m = closed_loop(k, params);
    PowerState::from_vector(expm2(&m, t) * e0.to_vector())
}
