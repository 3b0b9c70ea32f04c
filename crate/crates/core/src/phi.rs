//! Closed-form time profiles φ(t) and the integrals of `φ̃ = -β - φ`.
//!
//! Every profile blows up as `t → 0⁺`. The regularised families solve the
//! Riccati-type equation `-(μ+νφ)² + ((ω-ε)φ)² + φ_t = 0`; their `ε → 0`
//! limits are the profiles appearing in the final estimates.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::{
    derived_constants, find_eps_prime, switch_time, validate_compact, validate_noncompact, ParamSet,
    QuadraticFormConstants, Regime,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiFamily {
    /// Riccati solution for arbitrary `(μ, ν, ω, ε)`.
    GeneralEpsilon,
    /// Closed manifold, regime (iii), regularised.
    CompactIII,
    /// Closed manifold, regime (iv), regularised and piecewise in `T₂(ε)`.
    CompactIV,
    CompactLimitIII,
    CompactLimitIV,
    /// Noncompact profile built from the `A(ε')` constants.
    NoncompactEpsilon,
    /// The noncompact limit profile φ₁.
    NoncompactLimit,
}

impl PhiFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PhiFamily::GeneralEpsilon => "general-eps",
            PhiFamily::CompactIII => "compact-iii",
            PhiFamily::CompactIV => "compact-iv",
            PhiFamily::CompactLimitIII => "compact-limit-iii",
            PhiFamily::CompactLimitIV => "compact-limit-iv",
            PhiFamily::NoncompactEpsilon => "noncompact-eps",
            PhiFamily::NoncompactLimit => "noncompact-limit",
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(
            self,
            PhiFamily::CompactIII | PhiFamily::CompactIV | PhiFamily::CompactLimitIII | PhiFamily::CompactLimitIV
        )
    }

    pub fn is_noncompact(&self) -> bool {
        matches!(self, PhiFamily::NoncompactEpsilon | PhiFamily::NoncompactLimit)
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `ε = min(ω/10, (ω-|ν|)/2)`, or `ω/10` when `|ν| ≥ ω`.
pub fn default_eps(nu: f64, omega: f64) -> f64 {
    let gap = omega - nu.abs();
    if gap > 0.0 {
        (omega / 10.0).min(gap / 2.0)
    } else {
        omega / 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiProfile {
    pub family: PhiFamily,
    pub mu: f64,
    pub nu: f64,
    pub omega: f64,
    pub eps: f64,
    pub params: Option<ParamSet>,
    /// Switch time for the regime-(iv) families.
    pub t2: Option<f64>,
}

impl PhiProfile {
    /// Riccati profile; requires `μ ≠ 0`, `ω > 0`, `0 ≤ ε < ω` and
    /// `ν² < (ω-ε)²`.
    pub fn general(mu: f64, nu: f64, omega: f64, eps: f64) -> Result<Self> {
        check_riccati_constants(mu, nu, omega, eps)?;
        Ok(Self { family: PhiFamily::GeneralEpsilon, mu, nu, omega, eps, params: None, t2: None })
    }

    /// Regularised closed-manifold profile for whichever regime `p` is in.
    pub fn compact(p: &ParamSet, eps: Option<f64>) -> Result<Self> {
        let regime = compact_regime(p)?;
        let d0 = derived_constants(p, 0.0, 0.0)?;
        let eps = eps.unwrap_or_else(|| default_eps(d0.nu1, d0.omega1));
        let d = derived_constants(p, eps, 0.0)?;
        match regime {
            Regime::CompactCaseIII => {
                check_riccati_constants(d.mu1, d.nu1, d.omega1, eps)?;
                Ok(Self {
                    family: PhiFamily::CompactIII,
                    mu: d.mu1,
                    nu: d.nu1,
                    omega: d.omega1,
                    eps,
                    params: Some(*p),
                    t2: None,
                })
            }
            _ => {
                if !(eps >= 0.0 && eps < d.omega1.min(1.0)) {
                    return Err(Error::InvalidProfile(format!("eps = {eps} outside [0, min(omega, 1))")));
                }
                Ok(Self {
                    family: PhiFamily::CompactIV,
                    mu: d.mu1,
                    nu: d.nu1,
                    omega: d.omega1,
                    eps,
                    params: Some(*p),
                    t2: Some(d.t2),
                })
            }
        }
    }

    /// The `ε → 0` closed-manifold profile φ₀.
    pub fn compact_limit(p: &ParamSet) -> Result<Self> {
        let regime = compact_regime(p)?;
        let d = derived_constants(p, 0.0, 0.0)?;
        let (family, t2) = match regime {
            Regime::CompactCaseIII => (PhiFamily::CompactLimitIII, None),
            _ => (PhiFamily::CompactLimitIV, Some(d.t2)),
        };
        Ok(Self { family, mu: d.mu1, nu: d.nu1, omega: d.omega1, eps: 0.0, params: Some(*p), t2 })
    }

    /// Regularised noncompact profile from the `A(ε')` constants. `ε'`
    /// defaults to the bisection result of [`find_eps_prime`].
    pub fn noncompact(p: &ParamSet, eps: Option<f64>, eps_prime: Option<f64>) -> Result<Self> {
        noncompact_guard(p)?;
        let eps_prime = match eps_prime {
            Some(e) => e,
            None => find_eps_prime(p)?,
        };
        let q = QuadraticFormConstants::new(p, eps_prime)?;
        let eps = eps.unwrap_or_else(|| default_eps(q.nu, q.omega));
        check_riccati_constants(q.mu, q.nu, q.omega, eps)?;
        Ok(Self {
            family: PhiFamily::NoncompactEpsilon,
            mu: q.mu,
            nu: q.nu,
            omega: q.omega,
            eps,
            params: Some(*p),
            t2: None,
        })
    }

    /// φ₁, with `ν₂ + ω₂` in the second denominator.
    pub fn noncompact_limit(p: &ParamSet) -> Result<Self> {
        noncompact_guard(p)?;
        let nc = derived_constants(p, 0.0, 0.0)?.noncompact()?;
        check_riccati_constants(nc.mu2, nc.nu2, nc.omega2, 0.0)?;
        Ok(Self {
            family: PhiFamily::NoncompactLimit,
            mu: nc.mu2,
            nu: nc.nu2,
            omega: nc.omega2,
            eps: 0.0,
            params: Some(*p),
            t2: None,
        })
    }

    fn shifted_omega(&self) -> f64 {
        self.omega - self.eps
    }

    fn params(&self) -> &ParamSet {
        self.params.as_ref().expect("compact limit families carry their parameters")
    }

    fn switch(&self) -> f64 {
        self.t2.expect("regime-(iv) families carry T2")
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self.family {
            PhiFamily::GeneralEpsilon
            | PhiFamily::CompactIII
            | PhiFamily::NoncompactEpsilon
            | PhiFamily::NoncompactLimit => riccati_value(self.mu, self.nu, self.shifted_omega(), t),
            PhiFamily::CompactIV => {
                let t2 = self.switch();
                if t <= t2 {
                    let p = self.params();
                    p.dim() / (2.0 * (1.0 - p.alpha) * (1.0 - self.eps) * t)
                } else {
                    switched_value(self.mu, self.nu, self.shifted_omega(), t - t2)
                }
            }
            PhiFamily::CompactLimitIII => {
                let p = self.params();
                let k = limit_iii_coefficient(p);
                let g = (-p.c * t).exp();
                (k * g - p.beta) / -(-p.c * t).exp_m1()
            }
            PhiFamily::CompactLimitIV => {
                let p = self.params();
                let t2 = self.switch();
                if t <= t2 {
                    p.dim() / (2.0 * (1.0 - p.alpha) * t)
                } else {
                    let a = p.regime_indicator();
                    let g = (-p.c * (t - t2)).exp();
                    -p.beta * p.c * (1.0 + g) / (a * g + p.c)
                }
            }
        })
    }

    /// Exact `φ_t`. At `t = T₂` the left branch is used.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self.family {
            PhiFamily::GeneralEpsilon
            | PhiFamily::CompactIII
            | PhiFamily::NoncompactEpsilon
            | PhiFamily::NoncompactLimit => riccati_derivative(self.mu, self.nu, self.shifted_omega(), t),
            PhiFamily::CompactIV => {
                let t2 = self.switch();
                if t <= t2 {
                    let p = self.params();
                    -p.dim() / (2.0 * (1.0 - p.alpha) * (1.0 - self.eps) * t * t)
                } else {
                    switched_derivative(self.mu, self.nu, self.shifted_omega(), t - t2)
                }
            }
            PhiFamily::CompactLimitIII => {
                let p = self.params();
                let k = limit_iii_coefficient(p);
                let g = (-p.c * t).exp();
                let one_minus = -(-p.c * t).exp_m1();
                p.c * g * (p.beta - k) / (one_minus * one_minus)
            }
            PhiFamily::CompactLimitIV => {
                let p = self.params();
                let t2 = self.switch();
                if t <= t2 {
                    -p.dim() / (2.0 * (1.0 - p.alpha) * t * t)
                } else {
                    let a = p.regime_indicator();
                    let g = (-p.c * (t - t2)).exp();
                    let den = a * g + p.c;
                    p.beta * p.c * p.c * (p.c - a) * g / (den * den)
                }
            }
        })
    }

    /// `-(μ+νφ)² + ((ω-ε)φ)² + φ_t`, identically zero for the regularised
    /// families (on the `t > T₂` branch for regime (iv)).
    pub fn riccati_residual(&self, t: f64) -> Result<f64> {
        self.riccati_applicable(t)?;
        self.quadratic_residual(t, self.shifted_omega())
    }

    /// `-(μ+νφ)² + (ωφ)² + φ_t`, which equals `(2εω - ε²)φ²`.
    pub fn unshifted_residual(&self, t: f64) -> Result<f64> {
        self.riccati_applicable(t)?;
        self.quadratic_residual(t, self.omega)
    }

    fn quadratic_residual(&self, t: f64, omega: f64) -> Result<f64> {
        let phi = self.eval(t)?;
        let dphi = self.derivative(t)?;
        let lin = self.mu + self.nu * phi;
        Ok(-lin * lin + (omega * phi) * (omega * phi) + dphi)
    }

    fn riccati_applicable(&self, t: f64) -> Result<()> {
        check_time(t)?;
        match self.family {
            PhiFamily::GeneralEpsilon | PhiFamily::CompactIII | PhiFamily::NoncompactEpsilon => Ok(()),
            PhiFamily::CompactIV if t > self.switch() => Ok(()),
            PhiFamily::CompactIV => Err(Error::UnsupportedFamily("compact-iv before T2")),
            other => Err(Error::UnsupportedFamily(other.name())),
        }
    }

    /// `|φ(T₂⁻) - φ(T₂⁺)|` for the regime-(iv) families.
    pub fn continuity_gap_at_t2(&self) -> Result<f64> {
        let (left, right) = self.one_sided_limits_at_t2()?;
        Ok((left - right).abs())
    }

    pub fn one_sided_limits_at_t2(&self) -> Result<(f64, f64)> {
        match self.family {
            PhiFamily::CompactIV => {
                let p = self.params();
                let t2 = self.switch();
                let left = p.dim() / (2.0 * (1.0 - p.alpha) * (1.0 - self.eps) * t2);
                Ok((left, switched_value(self.mu, self.nu, self.shifted_omega(), 0.0)))
            }
            PhiFamily::CompactLimitIV => {
                let p = self.params();
                let t2 = self.switch();
                let left = p.dim() / (2.0 * (1.0 - p.alpha) * t2);
                let right = -p.beta * p.c * 2.0 / (p.regime_indicator() + p.c);
                Ok((left, right))
            }
            other => Err(Error::UnsupportedFamily(other.name())),
        }
    }

    /// `lim_{t→∞} φ(t)`.
    pub fn limit_at_infinity(&self) -> f64 {
        let w = self.shifted_omega();
        match self.family {
            PhiFamily::CompactLimitIII | PhiFamily::CompactLimitIV => -self.params().beta,
            PhiFamily::CompactIV => self.mu / (-self.nu + w),
            _ if self.mu > 0.0 => self.mu / (-self.nu + w),
            _ => -self.mu / (self.nu + w),
        }
    }
}

/// Common value of both one-sided limits at `T₂`, `-βcn/(4β(1-α)+cn)`.
pub fn continuity_value(p: &ParamSet) -> f64 {
    let n = p.dim();
    -p.beta * p.c * n / (4.0 * p.beta * (1.0 - p.alpha) + p.c * n)
}

fn compact_regime(p: &ParamSet) -> Result<Regime> {
    let v = validate_compact(p);
    if !v.feasible {
        return Err(Error::InfeasibleParams(format!("{p}: {v}")));
    }
    Ok(v.regime)
}

fn noncompact_guard(p: &ParamSet) -> Result<()> {
    let v = validate_noncompact(p);
    if !v.feasible {
        return Err(Error::InfeasibleParams(format!("{p}: {v}")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveTime(t))
    }
}

fn check_riccati_constants(mu: f64, nu: f64, omega: f64, eps: f64) -> Result<()> {
    let w = omega - eps;
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidProfile(format!("mu must be nonzero, got {mu}")));
    }
    if !(omega > 0.0) || !(eps >= 0.0) || !(w > 0.0) {
        return Err(Error::InvalidProfile(format!("need omega > eps >= 0, got omega={omega}, eps={eps}")));
    }
    if !(nu * nu < w * w) {
        return Err(Error::InvalidProfile(format!("need nu^2 < (omega-eps)^2, got nu={nu}, omega-eps={w}")));
    }
    Ok(())
}

/// `βcn/(cn + 8β(1-α))`.
fn limit_iii_coefficient(p: &ParamSet) -> f64 {
    let n = p.dim();
    p.beta * p.c * n / (p.c * n + 8.0 * p.beta * (1.0 - p.alpha))
}

// φ = μ(e^{2μwt}/(ν-w) - 1/(ν+w)) / (1 - e^{2μwt}), rewritten with
// g = e^{-2|μ|wt} ∈ (0, 1) so nothing overflows.
fn riccati_value(mu: f64, nu: f64, w: f64, t: f64) -> f64 {
    let k = 2.0 * mu.abs() * w * t;
    let g = (-k).exp();
    let one_minus = -(-k).exp_m1();
    if mu > 0.0 {
        mu * (g / (nu + w) - 1.0 / (nu - w)) / one_minus
    } else {
        mu * (g / (nu - w) - 1.0 / (nu + w)) / one_minus
    }
}

// φ_t = 4μ²w² e / ((ν²-w²)(1-e)²), symmetric under e ↦ 1/e.
fn riccati_derivative(mu: f64, nu: f64, w: f64, t: f64) -> f64 {
    let k = 2.0 * mu.abs() * w * t;
    let g = (-k).exp();
    let one_minus = -(-k).exp_m1();
    4.0 * mu * mu * w * w * g / ((nu * nu - w * w) * one_minus * one_minus)
}

// φ = -μ(e+1)/((ν+w) + (ν-w)e), e = e^{2μw s}; μ > 0 on the closed manifold.
fn switched_value(mu: f64, nu: f64, w: f64, s: f64) -> f64 {
    let g = (-2.0 * mu * w * s).exp();
    -mu * (1.0 + g) / ((nu + w) * g + (nu - w))
}

fn switched_derivative(mu: f64, nu: f64, w: f64, s: f64) -> f64 {
    let g = (-2.0 * mu * w * s).exp();
    let den = (nu + w) * g + (nu - w);
    -4.0 * mu * mu * w * w * g / (den * den)
}

/// Which closed form integrates `φ̃`, by the sign of `8β(1-α) + cn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalCase {
    CaseI,
    CaseII,
    CaseIII,
}

impl ClassicalCase {
    pub fn of(p: &ParamSet) -> Self {
        let s = 8.0 * p.beta * (1.0 - p.alpha) + p.c * p.dim();
        if s < 0.0 {
            ClassicalCase::CaseI
        } else if s > 0.0 {
            ClassicalCase::CaseII
        } else {
            ClassicalCase::CaseIII
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClassicalCase::CaseI => "i",
            ClassicalCase::CaseII => "ii",
            ClassicalCase::CaseIII => "iii",
        }
    }
}

/// `φ̃(t) = -β - φ₀(t)`.
pub fn phi_tilde(p: &ParamSet, t: f64) -> Result<f64> {
    Ok(-p.beta - PhiProfile::compact_limit(p)?.eval(t)?)
}

/// `∫_{t1}^{t2} φ̃ dt` in closed form. Cases (ii) and (iii) need `t1 > T₂`.
pub fn tilde_integral(p: &ParamSet, t1: f64, t2: f64) -> Result<f64> {
    check_time(t1)?;
    if !(t2 >= t1) {
        return Err(Error::DegenerateInterval { t1, t2, d: 0.0 });
    }
    let (n, c, a, b) = (p.dim(), p.c, p.alpha, p.beta);
    let case = ClassicalCase::of(p);
    if case != ClassicalCase::CaseI {
        let ts = switch_time(p, 0.0);
        if t1 <= ts {
            return Err(Error::OutOfRegime { t1, t2_switch: ts });
        }
    }
    if t1 == t2 {
        return Ok(0.0);
    }
    let d = c * n + 8.0 * b * (1.0 - a);
    Ok(match case {
        ClassicalCase::CaseI => {
            let ratio = (-c * t2).exp_m1() / (-c * t1).exp_m1();
            b / c * (8.0 * b * (1.0 - a) / d) * ratio.ln()
        }
        ClassicalCase::CaseII => {
            let ts = switch_time(p, 0.0);
            let num = d * (-c * (t2 - ts)).exp() + c * n;
            let den = d * (-c * (t1 - ts)).exp() + c * n;
            8.0 * b * b * (1.0 - a) / (c * d) * (num / den).ln()
        }
        ClassicalCase::CaseIII => {
            let ts = switch_time(p, 0.0);
            -b / c * ((-c * (t2 - ts)).exp() - (-c * (t1 - ts)).exp())
        }
    })
}
