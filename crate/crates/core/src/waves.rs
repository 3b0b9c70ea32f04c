//! One-dimensional traveling fronts `f(x, t) = v(x + ηt)`, the minimal
//! front speed, and the speed bounds `M′ ≥ M″ ≥ M‴`.
//!
//! The profile solves `v″ = ηv′ - cv(1 - v)`. The state `v = 1` is a saddle
//! whose stable direction (in `z`) is the front, so the integration runs in
//! `s = -z` starting on the unstable eigenvector at `v = 1`, and uses
//! `y = ln v`, `q = v_s / v`:
//!
//! ```text
//! y_s = q,    q_s = -q² - ηq - c(1 - eʸ).
//! ```
//!
//! For `η < 2√c` the profile reaches `v = 0` in finite `s`, which shows up as
//! `q → -∞`. Otherwise `q` settles at `-(η - √(η² - 4c))/2`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::params::{derived_constants, validate_noncompact, wave_speed_bound, ParamSet};
use crate::phi::PhiProfile;

/// Distance from `v = 1` at which shooting starts.
pub const SHOOT_OFFSET: f64 = 1e-6;

/// Samples with `ln v` below this are not stored (they would underflow).
const LOG_V_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    MonotoneFront,
    Oscillatory,
    Diverged,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::MonotoneFront => "monotone_front",
            Classification::Oscillatory => "oscillatory",
            Classification::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub eta: f64,
    pub c: f64,
    /// Increasing; `z = 0` where `v = 1/2`.
    pub z_samples: Vec<f64>,
    pub v_samples: Vec<f64>,
    /// `ln v` at the same points, accurate where `v` itself is tiny.
    pub log_v_samples: Vec<f64>,
    pub classification: Classification,
}

impl WaveProfile {
    /// `v(z)` by interpolation of `ln v`; `None` outside the sampled window.
    pub fn value_at(&self, z: f64) -> Option<f64> {
        let zs = &self.z_samples;
        if zs.is_empty() || z < zs[0] || z > *zs.last()? {
            return None;
        }
        let j = zs.partition_point(|&x| x <= z);
        if j == zs.len() {
            return self.v_samples.last().copied();
        }
        let i = j.saturating_sub(1);
        if zs[j] == zs[i] {
            return Some(self.v_samples[i]);
        }
        let w = (z - zs[i]) / (zs[j] - zs[i]);
        Some((self.log_v_samples[i] * (1.0 - w) + self.log_v_samples[j] * w).exp())
    }

    /// Slope of `ln v` against `z` over samples with `v` in `[lo, hi]`, by
    /// least squares. `None` with fewer than three such samples.
    pub fn tail_decay_rate(&self, lo: f64, hi: f64) -> Option<f64> {
        let (llo, lhi) = (lo.ln(), hi.ln());
        let pts: Vec<(f64, f64)> = self
            .z_samples
            .iter()
            .zip(&self.log_v_samples)
            .filter(|(_, &y)| y >= llo && y <= lhi)
            .map(|(&z, &y)| (z, y))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let m = pts.len() as f64;
        let (sz, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (z, y)| (a + z, b + y));
        let (mz, my) = (sz / m, sy / m);
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |(n, d), (z, y)| (n + (z - mz) * (y - my), d + (z - mz) * (z - mz)));
        Some(num / den)
    }

    /// Points `(z, v)` in the decaying tail with `v ≤ v_max`.
    pub fn tail_points(&self, v_max: f64) -> Vec<(f64, f64)> {
        self.z_samples
            .iter()
            .zip(&self.v_samples)
            .filter(|(_, &v)| v <= v_max)
            .map(|(&z, &v)| (z, v))
            .collect()
    }
}

/// Slow decay rate `(η - √(η² - 4c))/2` of a front as `z → -∞`.
pub fn slow_eigenvalue(eta: f64, c: f64) -> Option<f64> {
    let disc = eta * eta - 4.0 * c;
    (disc >= 0.0).then(|| (eta - disc.sqrt()) / 2.0)
}

/// Shoots the front of speed `eta` over a window of length `z_span` with
/// relative and absolute step tolerance `tol`.
pub fn shoot_profile(eta: f64, c: f64, z_span: f64, tol: f64) -> Result<WaveProfile> {
    if !(eta > 0.0 && c > 0.0) || !eta.is_finite() || !c.is_finite() {
        return Err(Error::InvalidParams(format!("need eta, c > 0, got eta={eta}, c={c}")));
    }
    if !(z_span > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("need z_span, tol > 0, got {z_span}, {tol}")));
    }
    let lambda = (-eta + (eta * eta + 4.0 * c).sqrt()) / 2.0;
    let delta = SHOOT_OFFSET;
    let y0 = [(-delta).ln_1p(), -lambda * delta / (1.0 - delta)];
    let blow_down = -4.0 * (eta + c.sqrt());
    let rhs = |y: &[f64; 2]| [y[1], -y[1] * y[1] - eta * y[1] + c * y[0].exp_m1()];

    let mut s = 0.0;
    let mut state = y0;
    let mut h = 1e-3 / (eta + c.sqrt());
    let h_max = z_span / 200.0;
    let mut samples = vec![(s, state[0])];
    let mut class = None;
    while s < z_span {
        h = h.min(z_span - s);
        let (next, err) = dopri5_step(&rhs, &state, h, tol);
        if !next.iter().all(|v| v.is_finite()) || !err.is_finite() {
            if state[1] < 0.25 * blow_down {
                class = Some(Classification::Oscillatory);
                break;
            }
            h *= 0.25;
        } else if err <= 1.0 {
            s += h;
            state = next;
            if state[0] >= LOG_V_FLOOR {
                samples.push((s, state[0]));
            }
            if state[1] < blow_down {
                class = Some(Classification::Oscillatory);
                break;
            }
            if state[0] > 0.0 || state[1] > 0.0 {
                class = Some(Classification::Diverged);
                break;
            }
            h = (h * (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)).min(h_max);
            continue;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < 1e-14 * (1.0 + s) {
            return Err(Error::IntegrationFailure { z: -s, reason: format!("step size collapsed to {h:e}") });
        }
    }
    let classification = class.unwrap_or(if state[0] < (1e-3f64).ln() {
        Classification::MonotoneFront
    } else {
        Classification::Diverged
    });

    samples.reverse();
    let mut z: Vec<f64> = samples.iter().map(|(s, _)| -s).collect();
    let log_v: Vec<f64> = samples.iter().map(|(_, y)| *y).collect();
    let half = 0.5f64.ln();
    if let Some(j) = log_v.iter().position(|&y| y >= half).filter(|&j| j > 0) {
        let w = (half - log_v[j - 1]) / (log_v[j] - log_v[j - 1]);
        let z_half = z[j - 1] + w * (z[j] - z[j - 1]);
        z.iter_mut().for_each(|x| *x -= z_half);
    }
    let v = log_v.iter().map(|y| y.exp()).collect();
    Ok(WaveProfile { eta, c, z_samples: z, v_samples: v, log_v_samples: log_v, classification })
}

/// Dormand–Prince 5(4) step for a two-dimensional autonomous system,
/// returning the fifth-order update and the scaled error norm.
fn dopri5_step(f: &impl Fn(&[f64; 2]) -> [f64; 2], y: &[f64; 2], h: f64, tol: f64) -> ([f64; 2], f64) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    k[0] = f(y);
    for stage in 0..6 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            yi[0] += h * A[stage][j] * kj[0];
            yi[1] += h * A[stage][j] * kj[1];
        }
        k[stage + 1] = f(&yi);
    }
    // The last row of A holds the fifth-order weights (FSAL).
    let mut out = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        out[0] += h * A[5][j] * kj[0];
        out[1] += h * A[5][j] * kj[1];
    }
    let mut acc = 0.0;
    for i in 0..2 {
        let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let scale = tol + tol * y[i].abs().max(out[i].abs());
        acc += (e / scale).powi(2);
    }
    (out, (acc / 2.0).sqrt())
}

/// Default window for [`shoot_profile`] at rate `c`.
pub fn default_span(c: f64) -> f64 {
    2000.0 / c.sqrt()
}

pub const DEFAULT_SHOOT_TOL: f64 = 1e-10;

/// Bisection for the slowest monotone front over `[√c/2, 4√c]`.
pub fn minimal_speed_search(c: f64, tol: f64) -> Result<f64> {
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("need c, tol > 0, got c={c}, tol={tol}")));
    }
    let span = default_span(c);
    let classify = |eta: f64| shoot_profile(eta, c, span, DEFAULT_SHOOT_TOL).map(|p| p.classification);
    let (mut lo, mut hi) = (0.5 * c.sqrt(), 4.0 * c.sqrt());
    if classify(lo)? != Classification::Oscillatory || classify(hi)? != Classification::MonotoneFront {
        return Err(Error::BracketFailure { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match classify(mid)? {
            Classification::Oscillatory => lo = mid,
            Classification::MonotoneFront => hi = mid,
            Classification::Diverged => return Err(Error::BracketFailure { lo, hi }),
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBounds {
    pub m_prime: f64,
    pub m_double_prime: f64,
    pub m_triple_prime: f64,
}

/// `4(1-α)(c - (-μ₂)/(ν₂ + ω₂))`. Only the noncompact constants need to
/// exist, so this is also defined on the boundary of the strict window.
pub fn m_double_prime(p: &ParamSet) -> Result<f64> {
    let nc = derived_constants(p, 0.0, 0.0)?.noncompact()?;
    Ok(4.0 * (1.0 - p.alpha) * (p.c + nc.mu2 / (nc.nu2 + nc.omega2)))
}

/// `4(1-α)[(c - φ) - (β + c)v]`.
pub fn m_prime(p: &ParamSet, phi: f64, v: f64) -> f64 {
    4.0 * (1.0 - p.alpha) * ((p.c - phi) - (p.beta + p.c) * v)
}

/// The three bounds with `φ = φ₁(t)` and `v = v(z)` from the profile.
pub fn speed_bound_chain(p: &ParamSet, profile: &WaveProfile, t: f64, z: f64) -> Result<SpeedBounds> {
    let verdict = validate_noncompact(p);
    if !verdict.feasible {
        return Err(Error::InfeasibleParams(format!("{p}: {verdict}")));
    }
    let v = profile
        .value_at(z)
        .ok_or_else(|| Error::InvalidParams(format!("z = {z} outside the sampled window")))?;
    let phi = PhiProfile::noncompact_limit(p)?.eval(t)?;
    Ok(SpeedBounds {
        m_prime: m_prime(p, phi, v),
        m_double_prime: m_double_prime(p)?,
        m_triple_prime: wave_speed_bound(p.n, p.c)?,
    })
}

/// `β(α) = -cn(1+α)/(4α² - 4α + 2n)`, the parameter curve along which
/// `M″ → M‴` as `α → 0`.
pub fn boundary_beta(n: usize, c: f64, alpha: f64) -> f64 {
    crate::params::compact_beta_bound(n, c, alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedCheck {
    pub n: usize,
    pub c: f64,
    pub eta_min: f64,
    /// Whether `eta_min` came from the shooting search or from `2√c`.
    pub searched: bool,
    pub m_triple_prime: f64,
}

impl SpeedCheck {
    pub fn margin(&self) -> f64 {
        self.eta_min * self.eta_min - self.m_triple_prime
    }

    pub fn pass(&self) -> bool {
        self.margin() >= 0.0
    }
}

/// `η_min² ≥ M‴(n)`; the minimal speed is searched for `n = 1` and taken as
/// `2√c` otherwise, since plane waves obey the same profile equation.
pub fn verify_speed_bound(n: usize, c: f64) -> Result<SpeedCheck> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let m3 = wave_speed_bound(n, c)?;
    let (eta_min, searched) = if n == 1 { (minimal_speed_search(c, 1e-6)?, true) } else { (2.0 * c.sqrt(), false) };
    Ok(SpeedCheck { n, c, eta_min, searched, m_triple_prime: m3 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveReport {
    pub scan: Vec<(f64, Classification)>,
    pub speed: SpeedCheck,
    pub bounds: Option<(ParamSet, f64, f64, SpeedBounds)>,
}

impl WaveReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("eta classification\n");
        for (eta, class) in &self.scan {
            let _ = writeln!(s, "{} {}", fmt17(*eta), class.label());
        }
        let sp = &self.speed;
        let _ = writeln!(s, "n = {}", sp.n);
        let _ = writeln!(s, "c = {}", fmt17(sp.c));
        let _ = writeln!(s, "eta_min = {} ({})", fmt17(sp.eta_min), if sp.searched { "search" } else { "2 sqrt(c)" });
        let _ = writeln!(s, "eta_min_sq = {}", fmt17(sp.eta_min * sp.eta_min));
        let _ = writeln!(s, "m_triple_prime = {}", fmt17(sp.m_triple_prime));
        let _ = writeln!(s, "margin = {}", fmt17(sp.margin()));
        if let Some((p, t, z, b)) = &self.bounds {
            let _ = writeln!(s, "chain params = {p}");
            let _ = writeln!(s, "chain t = {} z = {}", fmt17(*t), fmt17(*z));
            let _ = writeln!(s, "m_prime = {}", fmt17(b.m_prime));
            let _ = writeln!(s, "m_double_prime = {}", fmt17(b.m_double_prime));
            let _ = writeln!(s, "m_triple_prime = {}", fmt17(b.m_triple_prime));
            let _ = writeln!(s, "eta_sq_minus_m_prime = {}", fmt17(sp.eta_min * sp.eta_min - b.m_prime));
        }
        let _ = writeln!(s, "pass = {}", sp.pass());
        s
    }
}
