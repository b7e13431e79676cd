//! Independent reference computations used only by tests.
#![allow(dead_code)]

use nalgebra::Matrix4;

/// Characteristic polynomial `det(λI − A)` by Faddeev–LeVerrier, highest
/// power first (`c[0] = 1`).
pub fn charpoly4(a: &Matrix4<f64>) -> [f64; 5] {
    let id = Matrix4::<f64>::identity();
    let mut c = [1.0, 0.0, 0.0, 0.0, 0.0];
    let mut m = id;
    c[1] = -a.trace();
    for k in 2..=4 {
        m = a * m + id * c[k - 1];
        c[k] = -(a * m).trace() / k as f64;
    }
    c
}

pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, &ci| acc * x + ci)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    c[..n]
        .iter()
        .enumerate()
        .map(|(i, &ci)| ci * (n - i) as f64)
        .collect()
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner(c, lo);
    let fhi = horner(c, hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        // Double root at a critical point, or rounding at a near-tie.
        return if flo.abs() < fhi.abs() { lo } else { hi };
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots, ascending, of a polynomial known to have only real roots.
/// Roots of `p'` interlace those of `p`, so each gap between consecutive
/// critical points (and the Cauchy bound) holds exactly one root.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    if n == 1 {
        return vec![-c[1] / c[0]];
    }
    let bound = 1.0 + c[1..].iter().map(|x| (x / c[0]).abs()).fold(0.0, f64::max);
    let mut pts = vec![-bound];
    pts.extend(real_roots(&derivative(c)));
    pts.push(bound);
    pts.windows(2).map(|w| bisect(c, w[0], w[1])).collect()
}

/// Real parts of the roots of `λ² − tr·λ + det` by the quadratic formula.
pub fn quadratic_real_parts(tr: f64, det: f64) -> [f64; 2] {
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(tr - s) / 2.0, (tr + s) / 2.0]
    } else {
        [tr / 2.0, tr / 2.0]
    }
}

/// Fraction of the box `p_range × q_range` whose power factor lies in
/// `[pf_lo, pf_hi]`, by an `n × n` midpoint rule.
pub fn pf_area_fraction(p_range: [f64; 2], q_range: [f64; 2], pf: [f64; 2], n: usize) -> f64 {
    let hp = (p_range[1] - p_range[0]) / n as f64;
    let hq = (q_range[1] - q_range[0]) / n as f64;
    let mut inside = 0usize;
    for i in 0..n {
        let p = p_range[0] + (i as f64 + 0.5) * hp;
        for j in 0..n {
            let q = q_range[0] + (j as f64 + 0.5) * hq;
            let s = p.hypot(q);
            let f = if s == 0.0 { 1.0 } else { p / s };
            if f >= pf[0] && f <= pf[1] {
                inside += 1;
            }
        }
    }
    inside as f64 / (n * n) as f64
}
