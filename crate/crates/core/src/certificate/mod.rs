//! S-lemma achievability certificate.
//!
//! Over `z = [d, P, Q]`, the disturbance band is the single premise
//! `Q_a(z) ≥ 0` and the two halves of the input-magnitude constraint are the
//! conclusions `Q_b1(z) ≥ 0` (lower bound) and `Q_b2(z) ≥ 0` (upper bound).
//! Each implication `Q_a ≥ 0 ⇒ Q_bi ≥ 0` holds iff some `λ ≥ 0` makes the
//! homogenized 4×4 matrix of `Q_bi − λ·Q_a` positive semidefinite.

mod jacobi;

use nalgebra::{Matrix2x3, Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::controller::{is_stabilizing, Gain, Setpoint};
use crate::model::{plant_matrices, PlantParams};
use crate::{Error, Result};

pub use jacobi::{min_eigenvalue, symmetric_eigen, SymmetricEigen};

/// Default relative PSD tolerance.
pub const PSD_TOL: f64 = 1e-7;
/// Number of uniform λ points used to bracket the maximum.
pub const PRESCAN_POINTS: usize = 64;
/// Final golden-section bracket width, relative to `1 + λ`.
pub const GOLDEN_WIDTH: f64 = 1e-8;
const MAX_GOLDEN_ITERS: usize = 200;

pub const INCONCLUSIVE_FLAG: &str = "inconclusive: enlarge lambda_max";

/// `zᵀ·qmat·z + rvecᵀ·z + cscal` over `z = [d, P, Q]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    pub qmat: Matrix3<f64>,
    pub rvec: Vector3<f64>,
    pub cscal: f64,
}

impl QuadraticForm {
    pub fn new(qmat: Matrix3<f64>, rvec: Vector3<f64>, cscal: f64) -> Result<Self> {
        let asym = (qmat - qmat.transpose()).amax();
        if asym > jacobi::SYMMETRY_TOL * qmat.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { qmat, rvec, cscal })
    }

    pub fn eval(&self, z: &Vector3<f64>) -> f64 {
        z.dot(&(self.qmat * z)) + self.rvec.dot(z) + self.cscal
    }

    /// Homogenized symmetric matrix `[[Q, r/2], [r/2ᵀ, c]]`.
    pub fn homogenized(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.qmat);
        for i in 0..3 {
            m[(i, 3)] = 0.5 * self.rvec[i];
            m[(3, i)] = 0.5 * self.rvec[i];
        }
        m[(3, 3)] = self.cscal;
        m
    }

    pub fn shifted(&self, dc: f64) -> Self {
        Self {
            cscal: self.cscal + dc,
            ..*self
        }
    }
}

/// Interval premise `−d² + (d̲ + d̄)·d − d̲·d̄ ≥ 0`.
pub fn build_qa(params: &PlantParams) -> QuadraticForm {
    let (dl, dh) = (params.d_lo(), params.d_hi());
    QuadraticForm {
        qmat: Matrix3::from_diagonal(&Vector3::new(-1.0, 0.0, 0.0)),
        rvec: Vector3::new(dl + dh, 0.0, 0.0),
        cscal: -dl * dh,
    }
}

/// `M = [B⁻¹E  K]` and `v = (K − B⁻¹A)·x_ref`, so the control is `v − M·z`.
pub fn control_affine_map(
    x_ref: Setpoint,
    k: &Gain,
    params: &PlantParams,
) -> (Matrix2x3<f64>, nalgebra::Vector2<f64>) {
    let pm = plant_matrices(params);
    let bie = pm.b_inv_e();
    let m = Matrix2x3::new(
        bie.x,
        k.k[(0, 0)],
        k.k[(0, 1)],
        bie.y,
        k.k[(1, 0)],
        k.k[(1, 1)],
    );
    let v = (k.k - pm.b_inv_a()) * x_ref.as_state().to_vector();
    (m, v)
}

/// Lower-bound form `‖v − Mz‖² − U̲²·d` and upper-bound form `Ū²·d − ‖v − Mz‖²`.
pub fn build_qb(x_ref: Setpoint, k: &Gain, params: &PlantParams) -> (QuadraticForm, QuadraticForm) {
    let (m, v) = control_affine_map(x_ref, k, params);
    let mtm = m.transpose() * m;
    let mtv = m.transpose() * v;
    let vtv = v.dot(&v);
    let h_lo = Vector3::new(params.u_lo() * params.u_lo(), 0.0, 0.0);
    let h_hi = Vector3::new(params.u_hi() * params.u_hi(), 0.0, 0.0);
    let lower = QuadraticForm {
        qmat: mtm,
        rvec: -2.0 * mtv - h_lo,
        cscal: vtv,
    };
    let upper = QuadraticForm {
        qmat: -mtm,
        rvec: 2.0 * mtv + h_hi,
        cscal: -vtv,
    };
    (lower, upper)
}

/// Homogenized matrix of `qb − λ·qa`.
pub fn lmi_matrix(qb: &QuadraticForm, qa: &QuadraticForm, lambda: f64) -> Matrix4<f64> {
    qb.homogenized() - qa.homogenized() * lambda
}

/// Congruence `D·M·D` with `D = diag(1, 1, 1, 1/s)`: expresses `z` in units
/// of `s`. Positive semidefiniteness is unchanged.
fn rescale(m: &Matrix4<f64>, s: f64) -> Matrix4<f64> {
    let mut out = *m;
    for i in 0..3 {
        out[(i, 3)] /= s;
        out[(3, i)] /= s;
    }
    out[(3, 3)] /= s * s;
    out
}

/// Parameters of one multiplier search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSearch {
    pub lambda_max: f64,
    /// Relative PSD tolerance: `λ_min ≥ −tol·(1 + ‖M̂(λ)‖_max)` passes.
    pub tolerance: f64,
    /// Unit in which `z` is measured before the eigenvalue test.
    pub z_scale: f64,
}

impl LambdaSearch {
    pub fn new(lambda_max: f64) -> Self {
        Self {
            lambda_max,
            tolerance: PSD_TOL,
            z_scale: 1.0,
        }
    }

    pub fn with_z_scale(mut self, s: f64) -> Self {
        self.z_scale = s;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub feasible: bool,
    pub lambda_star: f64,
    /// `λ_min` of the (rescaled) LMI matrix at `lambda_star`.
    pub margin: f64,
    pub inconclusive: bool,
}

/// Searches `λ ∈ [0, lambda_max]` for a PSD certificate of `qa ≥ 0 ⇒ qb ≥ 0`.
///
/// `λ ↦ λ_min(M(λ))` is concave (minimum of functions affine in λ), so a
/// uniform pre-scan brackets the maximizer and golden-section search refines
/// it.
pub fn s_lemma_feasible(
    qb: &QuadraticForm,
    qa: &QuadraticForm,
    search: &LambdaSearch,
) -> Result<SearchOutcome> {
    if !(search.lambda_max > 0.0) || !search.lambda_max.is_finite() {
        return Err(Error::InvalidSampling(format!(
            "lambda_max must be positive and finite (got {})",
            search.lambda_max
        )));
    }
    let s = search.z_scale;
    let base = rescale(&qb.homogenized(), s);
    let slope = rescale(&qa.homogenized(), s);
    let at = |lambda: f64| base - slope * lambda;
    let eval = |lambda: f64| -> Result<f64> { min_eigenvalue(&at(lambda)) };

    let n = PRESCAN_POINTS;
    let h = search.lambda_max / (n - 1) as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut best_i = 0;
    for i in 0..n {
        let lam = if i == n - 1 {
            search.lambda_max
        } else {
            i as f64 * h
        };
        let f = eval(lam)?;
        if f > best.1 {
            best = (lam, f);
            best_i = i;
        }
    }

    let mut lo = if best_i == 0 {
        0.0
    } else {
        (best_i - 1) as f64 * h
    };
    let mut hi = if best_i == n - 1 {
        search.lambda_max
    } else {
        ((best_i + 1) as f64 * h).min(search.lambda_max)
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    // Relative width: for λ in the 1e15 range an absolute 1e-8 is below one ulp.
    let mut iters = 0;
    while hi - lo > GOLDEN_WIDTH * (1.0 + hi.abs()) && iters < MAX_GOLDEN_ITERS {
        iters += 1;
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = eval(d)?;
        }
        for (lam, f) in [(c, fc), (d, fd)] {
            if f > best.1 {
                best = (lam, f);
            }
        }
    }

    let (lambda_star, margin) = best;
    let tol = search.tolerance * (1.0 + at(lambda_star).amax());
    let feasible = margin >= -tol;
    Ok(SearchOutcome {
        feasible,
        lambda_star,
        margin,
        inconclusive: !feasible && best_i == n - 1,
    })
}

/// Caller-facing search settings; `lambda_max = None` selects
/// `10·(Ū² + ‖v‖²/d̲ + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub lambda_max: Option<f64>,
    pub tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            lambda_max: None,
            tolerance: PSD_TOL,
        }
    }
}

impl SearchOptions {
    fn resolve(&self, v_norm_sq: f64, params: &PlantParams) -> LambdaSearch {
        let lambda_max = self.lambda_max.unwrap_or_else(|| {
            10.0 * (params.u_hi() * params.u_hi() + v_norm_sq / params.d_lo() + 1.0)
        });
        LambdaSearch {
            lambda_max,
            tolerance: self.tolerance,
            z_scale: params.d_hi(),
        }
    }
}

/// Achievability evidence for one setpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateVerdict {
    pub p_ref: f64,
    pub q_ref: f64,
    pub achievable: bool,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub margin1: f64,
    pub margin2: f64,
    pub flags: Vec<String>,
}

impl CertificateVerdict {
    pub fn is_inconclusive(&self) -> bool {
        self.flags.iter().any(|f| f == INCONCLUSIVE_FLAG)
    }

    pub fn margin(&self) -> f64 {
        self.margin1.min(self.margin2)
    }
}

/// Runs both multiplier searches; achievable iff both certify.
///
/// The gain must stabilize `A − BK`. An inconclusive search (maximum at the
/// end of the λ range) is reported through [`INCONCLUSIVE_FLAG`].
pub fn check_setpoint(
    x_ref: Setpoint,
    k: &Gain,
    params: &PlantParams,
    opts: &SearchOptions,
) -> Result<CertificateVerdict> {
    let stab = is_stabilizing(k, params);
    if !stab.stabilizing {
        return Err(Error::NotStabilizing(stab.describe()));
    }
    let qa = build_qa(params);
    let (qb1, qb2) = build_qb(x_ref, k, params);
    let (_, v) = control_affine_map(x_ref, k, params);
    let search = opts.resolve(v.norm_squared(), params);
    let r1 = s_lemma_feasible(&qb1, &qa, &search)?;
    let r2 = s_lemma_feasible(&qb2, &qa, &search)?;

    let mut flags = Vec::new();
    if r1.inconclusive || r2.inconclusive {
        flags.push(INCONCLUSIVE_FLAG.to_string());
    }
    if !r1.feasible {
        flags.push("lower-bound implication not certified".to_string());
    }
    if !r2.feasible {
        flags.push("upper-bound implication not certified".to_string());
    }
    Ok(CertificateVerdict {
        p_ref: x_ref.p_ref,
        q_ref: x_ref.q_ref,
        achievable: r1.feasible && r2.feasible,
        lambda1: r1.feasible.then_some(r1.lambda_star),
        lambda2: r2.feasible.then_some(r2.lambda_star),
        margin1: r1.margin,
        margin2: r2.margin,
        flags,
    })
}
