//! Parameter sets, feasibility conditions and the derived constants that
//! feed every φ profile.
//!
//! Two parameter regimes matter. On closed manifolds the estimate
//! `Δu + α|∇u|² + βe^u + φ(t) ≥ 0` needs `0 < α < 1` and
//! `β ≤ -cn(1+α)/(4α²-4α+2n)`, and the sign of `8β(1-α)/n + c` picks one of
//! two φ families. On complete noncompact manifolds the β bound becomes strict
//! and β must also lie in the window
//! `(-cn(2+√2)/(4(1-α)), -cn(2-√2)/(4(1-α)))`.

use std::fmt;

use crate::error::{Error, Result};

/// `(n, c, α, β)` plus the Ricci lower bound `K`, which is zero on every
/// supported (flat) domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k_ricci: f64,
}

impl ParamSet {
    pub fn new(n: usize, c: f64, alpha: f64, beta: f64) -> Self {
        Self { n, c, alpha, beta, k_ricci: 0.0 }
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// `8β(1-α)/n + c`; negative in regime (iii), nonnegative in regime (iv).
    pub fn regime_indicator(&self) -> f64 {
        8.0 * self.beta * (1.0 - self.alpha) / self.dim() + self.c
    }

    /// `4β(1-α)/n + c`, the combination multiplying φ in `P₅.₁`.
    pub fn half_indicator(&self) -> f64 {
        4.0 * self.beta * (1.0 - self.alpha) / self.dim() + self.c
    }

    /// `-cn - 8β(1-α)`, the radicand behind the noncompact constants.
    pub fn noncompact_radicand(&self) -> f64 {
        -self.c * self.dim() - 8.0 * self.beta * (1.0 - self.alpha)
    }

    /// The coefficient of `|∇u|²e^u` in `P₂`; nonnegative exactly when the
    /// closed-manifold β bound holds.
    pub fn gradient_coupling_coefficient(&self) -> f64 {
        let (a, b, c) = (self.alpha, self.beta, self.c);
        4.0 * a * b * (1.0 - a) / self.dim() - 2.0 * b - a * c - c
    }

    fn check_basic(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("dimension n must be at least 1".into()));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidParams(format!("reaction rate c must be positive, got {}", self.c)));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidParams("alpha and beta must be finite".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} c={} alpha={} beta={}", self.n, self.c, self.alpha, self.beta)
    }
}

/// Upper β bound on closed manifolds, `-cn(1+α)/(4α²-4α+2n)`.
///
/// The same expression is the (strict) noncompact bound, written there as
/// `-cn(1+α)/(2(2α²-2α+n))`.
pub fn compact_beta_bound(n: usize, c: f64, alpha: f64) -> f64 {
    let n = n as f64;
    -c * n * (1.0 + alpha) / (4.0 * alpha * alpha - 4.0 * alpha + 2.0 * n)
}

/// The open β window required on noncompact domains.
pub fn noncompact_beta_window(n: usize, c: f64, alpha: f64) -> (f64, f64) {
    let n = n as f64;
    let s2 = std::f64::consts::SQRT_2;
    let scale = -c * n / (4.0 * (1.0 - alpha));
    (scale * (2.0 + s2), scale * (2.0 - s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// `0 < α < 1`.
    AlphaRange,
    /// Closed-manifold β bound (non-strict).
    CompactBeta,
    /// Regime split `8β(1-α)/n + c < 0`; informational, never violated.
    RegimeSplit,
    /// Noncompact β bound (strict).
    NoncompactBeta,
    NoncompactWindowLower,
    NoncompactWindowUpper,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::AlphaRange => "i",
            Condition::CompactBeta => "ii",
            Condition::RegimeSplit => "iii",
            Condition::NoncompactBeta => "ii",
            Condition::NoncompactWindowLower => "iii-lower",
            Condition::NoncompactWindowUpper => "iii-upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    CompactCaseIII,
    CompactCaseIV,
    Noncompact,
    Infeasible,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::CompactCaseIII => "iii",
            Regime::CompactCaseIV => "iv",
            Regime::Noncompact => "noncompact",
            Regime::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub regime: Regime,
    pub violated_conditions: Vec<Condition>,
    /// Signed slack per condition, positive when strictly satisfied.
    pub margins: Vec<(Condition, f64)>,
}

impl FeasibilityVerdict {
    pub fn margin(&self, cond: Condition) -> Option<f64> {
        self.margins.iter().find(|(c, _)| *c == cond).map(|&(_, m)| m)
    }

    fn from_checks(checks: Vec<(Condition, f64, bool)>, regime_if_ok: Regime) -> Self {
        let violated: Vec<_> = checks.iter().filter(|(_, _, ok)| !ok).map(|(c, _, _)| *c).collect();
        let feasible = violated.is_empty();
        Self {
            feasible,
            regime: if feasible { regime_if_ok } else { Regime::Infeasible },
            violated_conditions: violated,
            margins: checks.into_iter().map(|(c, m, _)| (c, m)).collect(),
        }
    }
}

impl fmt::Display for FeasibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            write!(f, "feasible regime={}", self.regime.label())?;
        } else {
            let labels: Vec<_> = self.violated_conditions.iter().map(|c| c.label()).collect();
            write!(f, "infeasible ({})", labels.join(","))?;
        }
        for (cond, m) in &self.margins {
            write!(f, " margin_{}={:.17e}", cond.label(), m)?;
        }
        Ok(())
    }
}

fn alpha_margin(alpha: f64) -> f64 {
    alpha.min(1.0 - alpha)
}

/// Closed-manifold conditions (i), (ii) and the (iii)/(iv) regime split.
pub fn validate_compact(p: &ParamSet) -> FeasibilityVerdict {
    let m_i = alpha_margin(p.alpha);
    let m_ii = compact_beta_bound(p.n, p.c, p.alpha) - p.beta;
    let m_iii = -p.regime_indicator();
    let regime = if m_iii > 0.0 { Regime::CompactCaseIII } else { Regime::CompactCaseIV };
    FeasibilityVerdict::from_checks(
        vec![
            (Condition::AlphaRange, m_i, m_i > 0.0),
            (Condition::CompactBeta, m_ii, m_ii >= 0.0),
            (Condition::RegimeSplit, m_iii, true),
        ],
        regime,
    )
}

/// Noncompact conditions; every inequality is strict.
pub fn validate_noncompact(p: &ParamSet) -> FeasibilityVerdict {
    let m_i = alpha_margin(p.alpha);
    let m_ii = compact_beta_bound(p.n, p.c, p.alpha) - p.beta;
    let (lo, hi) = noncompact_beta_window(p.n, p.c, p.alpha);
    let m_lo = p.beta - lo;
    let m_hi = hi - p.beta;
    FeasibilityVerdict::from_checks(
        vec![
            (Condition::AlphaRange, m_i, m_i > 0.0),
            (Condition::NoncompactBeta, m_ii, m_ii > 0.0),
            (Condition::NoncompactWindowLower, m_lo, m_lo > 0.0),
            (Condition::NoncompactWindowUpper, m_hi, m_hi > 0.0),
        ],
        Regime::Noncompact,
    )
}

/// `A(ε') = 2β²(1-α)/n - n(c + 4β(1-α)/n)²/(8(1-α-ε'))`.
pub fn quadratic_coefficient(p: &ParamSet, eps_prime: f64) -> f64 {
    let n = p.dim();
    let h = p.half_indicator();
    2.0 * p.beta * p.beta * (1.0 - p.alpha) / n - n * h * h / (8.0 * (1.0 - p.alpha - eps_prime))
}

/// Constants of the noncompact φ₁ profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncompactConstants {
    pub mu2: f64,
    pub nu2: f64,
    pub omega2: f64,
}

/// The `A`-based constants `βc/(2√A)`, `(4β(1-α)/n + c)/(2√A)`, `√(2(1-α)/n)`.
///
/// These reuse the names μ₁, ν₁ in the source derivation but differ from the
/// closed-manifold μ₁, ν₁, so they are kept apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFormConstants {
    pub a: f64,
    pub mu: f64,
    pub nu: f64,
    pub omega: f64,
}

impl QuadraticFormConstants {
    pub fn new(p: &ParamSet, eps_prime: f64) -> Result<Self> {
        let a = quadratic_coefficient(p, eps_prime);
        if !(a > 0.0) {
            return Err(Error::NegativeRadicand { what: "A(eps')", value: a });
        }
        let root = 2.0 * a.sqrt();
        Ok(Self {
            a,
            mu: p.beta * p.c / root,
            nu: p.half_indicator() / root,
            omega: (2.0 * (1.0 - p.alpha) / p.dim()).sqrt(),
        })
    }

    /// Both hypotheses needed to build the regularised noncompact profile.
    pub fn admissible(&self) -> bool {
        self.a > 0.0 && self.nu * self.nu < self.omega * self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub mu1: f64,
    pub nu1: f64,
    pub omega1: f64,
    /// `None` when `-cn - 8β(1-α) ≤ 0`; see [`DerivedConstants::noncompact`].
    pub noncompact: Option<NoncompactConstants>,
    pub a: f64,
    /// Regime-(iv) switch time `T₂(ε)`; only meaningful in regime (iv).
    pub t2: f64,
    pub eps: f64,
    pub eps_prime: f64,
}

impl DerivedConstants {
    pub fn noncompact(&self) -> Result<NoncompactConstants> {
        self.noncompact.ok_or(Error::NegativeRadicand {
            what: "-cn - 8 beta (1 - alpha)",
            value: f64::NAN,
        })
    }
}

/// `T₂(ε) = n/(2(1-α)(1-ε)(-βc)) · (4β(1-α)/n + c)`.
pub fn switch_time(p: &ParamSet, eps: f64) -> f64 {
    p.dim() / (2.0 * (1.0 - p.alpha) * (1.0 - eps) * (-p.beta * p.c)) * p.half_indicator()
}

pub fn derived_constants(p: &ParamSet, eps: f64, eps_prime: f64) -> Result<DerivedConstants> {
    p.check_basic()?;
    if !(p.alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha must be below 1, got {}", p.alpha)));
    }
    if p.beta == 0.0 {
        return Err(Error::InvalidParams("beta must be nonzero".into()));
    }
    if !(0.0..1.0).contains(&eps) || !(0.0..1.0 - p.alpha).contains(&eps_prime) {
        return Err(Error::InvalidParams(format!(
            "regularisers out of range: eps={eps}, eps'={eps_prime}"
        )));
    }
    let n = p.dim();
    let one_minus = 1.0 - p.alpha;
    let s = (n / (2.0 * one_minus)).sqrt();
    let mu1 = 0.5 * p.c * s;
    let nu1 = p.half_indicator() / (2.0 * p.beta) * s;
    let omega1 = (2.0 * one_minus / n).sqrt();

    let radicand = p.noncompact_radicand();
    let noncompact = (radicand > 0.0).then(|| {
        let r = (2.0 * one_minus / (p.c * radicand)).sqrt();
        NoncompactConstants { mu2: p.beta * p.c * r, nu2: p.half_indicator() * r, omega2: omega1 }
    });

    Ok(DerivedConstants {
        mu1,
        nu1,
        omega1,
        noncompact,
        a: quadratic_coefficient(p, eps_prime),
        t2: switch_time(p, eps),
        eps,
        eps_prime,
    })
}

/// Bisection iterations used by [`find_eps_prime`].
const EPS_PRIME_BISECTIONS: usize = 64;

/// Finds `ε' > 0` with `A(ε') > 0` and `ν² < ω²` for the `A`-based constants.
///
/// The admissible set is an interval `[0, ε*)` because `A` decreases and `ν²`
/// increases in `ε'`. Bisection locates `ε*` on `[0, 1-α)` and the midpoint
/// `ε*/2` is returned.
pub fn find_eps_prime(p: &ParamSet) -> Result<f64> {
    let verdict = validate_noncompact(p);
    if !verdict.feasible {
        let labels: Vec<_> = verdict.violated_conditions.iter().map(|c| c.label()).collect();
        return Err(Error::NoFeasibleEpsPrime(format!("noncompact conditions violated: {}", labels.join(","))));
    }
    let holds = |e: f64| QuadraticFormConstants::new(p, e).map(|q| q.admissible()).unwrap_or(false);
    if !holds(0.0) {
        return Err(Error::NoFeasibleEpsPrime("strict inequalities fail at eps' = 0".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0 - p.alpha);
    for _ in 0..EPS_PRIME_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eps_prime = 0.5 * lo;
    if eps_prime > 0.0 && holds(eps_prime) {
        Ok(eps_prime)
    } else {
        Err(Error::NoFeasibleEpsPrime(format!("bisection collapsed to {lo}")))
    }
}

/// The β interval `[-c, -cn(1+α)/(4α²-4α+2n)]` on which the classical ratio
/// bound holds, or `None` when it is empty.
pub fn classical_beta_range(n: usize, c: f64, alpha: f64) -> Option<(f64, f64)> {
    let upper = compact_beta_bound(n, c, alpha);
    let lower = -c;
    (lower <= upper).then_some((lower, upper))
}

/// `M'''(n) = 2c(n-4+2√(4n-n²))/(n-2+√(4n-n²))`, the lower bound on η².
pub fn wave_speed_bound(n: usize, c: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let nf = n as f64;
    let r = (4.0 * nf - nf * nf).sqrt();
    Ok(2.0 * c * (nf - 4.0 + 2.0 * r) / (nf - 2.0 + r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn compact_regime_iii_example() {
        let v = validate_compact(&ParamSet::new(1, 1.0, 0.25, -1.0));
        assert!(v.feasible);
        assert_eq!(v.regime, Regime::CompactCaseIII);
        assert_eq!(v.margin(Condition::CompactBeta), Some(0.0));
        assert!(close(v.margin(Condition::RegimeSplit).unwrap(), 5.0, 1e-15));
    }

    #[test]
    fn compact_regime_iv_example() {
        let v = validate_compact(&ParamSet::new(3, 1.0, 0.9, -2.0));
        assert!(v.feasible);
        assert_eq!(v.regime, Regime::CompactCaseIV);
        assert!(close(v.margin(Condition::RegimeSplit).unwrap(), -0.466_666_666_666_666_7, 1e-14));
    }

    #[test]
    fn compact_alpha_out_of_range() {
        let v = validate_compact(&ParamSet::new(1, 1.0, 1.5, -1.0));
        assert!(!v.feasible);
        assert_eq!(v.regime, Regime::Infeasible);
        assert!(v.violated_conditions.contains(&Condition::AlphaRange));
        assert_eq!(v.margins.len(), 3);
    }

    #[test]
    fn compact_bound_is_closed_noncompact_is_strict() {
        let b = compact_beta_bound(2, 1.5, 0.4);
        assert!(validate_compact(&ParamSet::new(2, 1.5, 0.4, b)).feasible);
        let v = validate_noncompact(&ParamSet::new(2, 1.5, 0.4, b));
        assert!(v.violated_conditions.contains(&Condition::NoncompactBeta));
    }

    #[test]
    fn noncompact_examples() {
        let ok = validate_noncompact(&ParamSet::new(1, 1.0, 0.1, -0.8));
        assert!(ok.feasible);
        assert_eq!(ok.regime, Regime::Noncompact);
        assert!(close(compact_beta_bound(1, 1.0, 0.1), -0.670_731_707_317_073_2, 1e-14));
        let (lo, hi) = noncompact_beta_window(1, 1.0, 0.1);
        assert!((lo + 0.948_392_656).abs() < 1e-8 && (hi + 0.162_718_455).abs() < 1e-8);

        let v = validate_noncompact(&ParamSet::new(1, 1.0, 0.1, -0.3));
        assert_eq!(v.violated_conditions, vec![Condition::NoncompactBeta]);

        let v = validate_noncompact(&ParamSet::new(1, 1.0, 0.1, -1.2));
        assert_eq!(v.violated_conditions, vec![Condition::NoncompactWindowLower]);
    }

    #[test]
    fn derived_constants_examples() {
        let d = derived_constants(&ParamSet::new(1, 1.0, 0.25, -1.0), 0.0, 0.0).unwrap();
        assert!((d.mu1 - 0.408_248_290_463_863).abs() < 1e-12);
        assert!((d.nu1 - 0.816_496_580_927_726).abs() < 1e-12);
        assert!((d.omega1 - 1.224_744_871_391_589).abs() < 1e-12);

        let d = derived_constants(&ParamSet::new(3, 1.0, 0.9, -2.0), 0.0, 0.0).unwrap();
        assert!(close(d.t2, 5.5, 1e-14));
        assert!(d.noncompact().is_err());

        let d = derived_constants(&ParamSet::new(1, 1.0, 0.1, -0.8), 0.0, 0.0).unwrap();
        assert!(close(d.a, 4.76 / 7.2, 1e-14));
    }

    #[test]
    fn derived_constants_rejects_alpha_one() {
        assert!(matches!(
            derived_constants(&ParamSet::new(1, 1.0, 1.0, -1.0), 0.0, 0.0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn mu2_matches_quadratic_form_at_zero() {
        let p = ParamSet::new(1, 1.0, 0.1, -0.8);
        let nc = derived_constants(&p, 0.0, 0.0).unwrap().noncompact().unwrap();
        let q = QuadraticFormConstants::new(&p, 0.0).unwrap();
        assert!(close(nc.mu2, q.mu, 1e-12));
        assert!(close(nc.nu2, q.nu, 1e-12));
        assert!(close(nc.omega2, q.omega, 1e-15));
    }

    #[test]
    fn eps_prime_found_for_feasible_set() {
        let p = ParamSet::new(1, 1.0, 0.1, -0.8);
        let q0 = QuadraticFormConstants::new(&p, 0.0).unwrap();
        assert!(q0.admissible());
        let e = find_eps_prime(&p).unwrap();
        assert!(e > 0.0 && e < 0.9);
        assert!(QuadraticFormConstants::new(&p, e).unwrap().admissible());
    }

    #[test]
    fn eps_prime_rejects_window_violation() {
        assert!(matches!(find_eps_prime(&ParamSet::new(1, 1.0, 0.1, -1.2)), Err(Error::NoFeasibleEpsPrime(_))));
    }

    #[test]
    fn classical_range_examples() {
        assert_eq!(classical_beta_range(1, 1.0, 0.25), Some((-1.0, -1.0)));
        let (lo, hi) = classical_beta_range(4, 1.0, 0.5).unwrap();
        assert_eq!(lo, -1.0);
        assert!(close(hi, -6.0 / 7.0, 1e-15));
        assert_eq!(classical_beta_range(1, 1.0, 0.3), None);
    }

    #[test]
    fn wave_speed_table() {
        let s3 = 3f64.sqrt();
        assert!((wave_speed_bound(1, 1.0).unwrap() - (3.0 - s3)).abs() < 1e-12);
        assert!((wave_speed_bound(2, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((wave_speed_bound(3, 1.0).unwrap() - (7.0 - 3.0 * s3)).abs() < 1e-12);
        assert!(matches!(wave_speed_bound(4, 1.0), Err(Error::UnsupportedDimension(4))));
    }

    #[test]
    fn display_verdicts() {
        let s = validate_compact(&ParamSet::new(1, 1.0, 0.25, -1.0)).to_string();
        assert!(s.starts_with("feasible regime=iii"));
        let s = validate_compact(&ParamSet::new(1, 1.0, 1.2, -1.0)).to_string();
        assert!(s.starts_with("infeasible (i"));
    }
}
