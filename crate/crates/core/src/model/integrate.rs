use super::{dynamics, ControlPQ, Disturbance, GridProfile, PlantParams, PowerState};

/// Advances the plant one classical RK4 step of length `dt`.
///
/// `control(t, x, d)` is the control law; it is re-evaluated at each stage
/// with the grid disturbance sampled from `profile` at the stage time.
#[inline]
pub fn step_rk4<C>(
    x: PowerState,
    control: &C,
    profile: &GridProfile,
    params: &PlantParams,
    t: f64,
    dt: f64,
) -> PowerState
where
    C: Fn(f64, PowerState, Disturbance) -> ControlPQ,
{
    let f = |tau: f64, s: PowerState| {
        let d = Disturbance(profile.disturbance(tau));
        dynamics(s, control(tau, s, d), d, params)
    };
    let half = 0.5 * dt;
    let k1 = f(t, x);
    let k2 = f(t + half, axpy(x, half, k1));
    let k3 = f(t + half, axpy(x, half, k2));
    let k4 = f(t + dt, axpy(x, dt, k3));
    let w = dt / 6.0;
    PowerState {
        p: x.p + w * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
        q: x.q + w * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
    }
}

#[inline]
fn axpy(x: PowerState, h: f64, k: PowerState) -> PowerState {
    PowerState {
        p: x.p + h * k.p,
        q: x.q + h * k.q,
    }
}
