//! The Harnack quantity `h = Δu + α|∇u|² + βf + φ(t)` with `u = log f`,
//! trajectory verification, the evolution identity for `h`, the pointwise
//! lower-bound terms and the cutoff-function inequalities.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{gradient, hessian_frobenius_sq, laplacian, ScalarField};
use crate::fmt17;
use crate::params::{validate_compact, validate_noncompact, ParamSet, QuadraticFormConstants};
use crate::phi::{PhiFamily, PhiProfile};
use crate::solver::Trajectory;

/// `h = Δu + α|∇u|² + β f + phi_value`, all derivatives discrete.
pub fn harnack_quantity(f: &ScalarField, p: &ParamSet, phi_value: f64) -> Result<ScalarField> {
    Ok(Parts::new(f, p)?.h(p, phi_value))
}

// Spatial pieces of h shared by the trajectory check and the identity residual.
struct Parts {
    f: ScalarField,
    u: ScalarField,
    grad_sq: Vec<f64>,
    lap_u: ScalarField,
}

impl Parts {
    fn new(f: &ScalarField, p: &ParamSet) -> Result<Self> {
        if let Some(index) = f.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonpositiveField { index, value: f.at(index) });
        }
        if f.grid().dim() != p.n {
            return Err(Error::InvalidGrid(format!("grid dimension {} but n = {}", f.grid().dim(), p.n)));
        }
        let u = f.map(f64::ln);
        let grad_sq = gradient(&u).norm_sq();
        let lap_u = laplacian(&u);
        Ok(Self { f: f.clone(), u, grad_sq, lap_u })
    }

    fn h(&self, p: &ParamSet, phi: f64) -> ScalarField {
        let values = self
            .lap_u
            .values()
            .iter()
            .zip(&self.grad_sq)
            .zip(self.f.values())
            .map(|((&l, &g), &f)| l + p.alpha * g + p.beta * f + phi)
            .collect();
        ScalarField::new(self.f.grid_arc().clone(), values).expect("same grid")
    }
}

/// Tolerance `factor·(Δx² + dt)·max(1, |β|, |φ(t)|)`; samples before
/// `t_min_factor / c` are skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolPolicy {
    pub factor: f64,
    pub t_min_factor: f64,
}

impl Default for TolPolicy {
    fn default() -> Self {
        Self { factor: 10.0, t_min_factor: 0.05 }
    }
}

impl TolPolicy {
    pub fn tol(&self, dx: f64, dt: f64, beta: f64, phi: f64) -> f64 {
        self.factor * (dx * dx + dt) * 1f64.max(beta.abs()).max(phi.abs())
    }

    pub fn t_min(&self, c: f64) -> f64 {
        self.t_min_factor / c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub t: f64,
    pub phi: f64,
    pub min_h: f64,
    pub argmin: Vec<usize>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport {
    pub params: ParamSet,
    pub family: PhiFamily,
    pub samples: Vec<SampleRecord>,
    /// `(t, max |residual|)` of the evolution identity, when requested.
    pub identity_residuals: Vec<(f64, f64)>,
    pub grid_spacing: f64,
    pub dt: f64,
    pub policy: TolPolicy,
    pub overall_pass: bool,
}

impl HarnackReport {
    /// Smallest `min_h` over the checked samples.
    pub fn worst(&self) -> Option<&SampleRecord> {
        self.samples.iter().min_by(|a, b| a.min_h.total_cmp(&b.min_h))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.samples {
            let _ = writeln!(
                s,
                "sample time={} phi={} min_h={} argmin={} tol={} pass={}",
                fmt17(r.t),
                fmt17(r.phi),
                fmt17(r.min_h),
                join_index(&r.argmin, ","),
                fmt17(r.tol),
                r.pass
            );
        }
        for (t, r) in &self.identity_residuals {
            let _ = writeln!(s, "identity time={} max_residual={}", fmt17(*t), fmt17(*r));
        }
        let _ = writeln!(s, "summary");
        let _ = writeln!(s, "  params = {}", self.params);
        let _ = writeln!(s, "  family = {}", self.family.name());
        let _ = writeln!(s, "  samples = {}", self.samples.len());
        let _ = writeln!(s, "  grid_spacing = {}", fmt17(self.grid_spacing));
        let _ = writeln!(s, "  dt = {}", fmt17(self.dt));
        let _ = writeln!(s, "  tol_factor = {}", fmt17(self.policy.factor));
        let _ = writeln!(s, "  t_min_factor = {}", fmt17(self.policy.t_min_factor));
        if let Some(w) = self.worst() {
            let _ = writeln!(s, "  worst_min_h = {} at t = {}", fmt17(w.min_h), fmt17(w.t));
        }
        let _ = writeln!(s, "  overall_pass = {}", self.overall_pass);
        s
    }

    /// One record per line: `t,phi,min_h,argmin,tol,pass`, argmin joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,phi,min_h,argmin,tol,pass\n");
        for r in &self.samples {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt17(r.t),
                fmt17(r.phi),
                fmt17(r.min_h),
                join_index(&r.argmin, ";"),
                fmt17(r.tol),
                r.pass
            );
        }
        s
    }
}

fn join_index(ix: &[usize], sep: &str) -> String {
    ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

/// Rejects parameter sets outside the regime the profile was built for.
pub fn check_profile_params(p: &ParamSet, profile: &PhiProfile) -> Result<()> {
    let verdict = if profile.family.is_compact() {
        Some(validate_compact(p))
    } else if profile.family.is_noncompact() {
        Some(validate_noncompact(p))
    } else {
        None
    };
    if let Some(v) = verdict {
        if !v.feasible {
            return Err(Error::InfeasibleParams(format!("{p}: {v}")));
        }
    }
    if let Some(q) = profile.params {
        if q != *p {
            return Err(Error::InvalidProfile(format!("profile built for {q}, trajectory has {p}")));
        }
    }
    Ok(())
}

/// Per-sample `min h ≥ -tol` with `ψ ≡ 0`.
pub fn check_trajectory(traj: &Trajectory, profile: &PhiProfile, policy: TolPolicy) -> Result<HarnackReport> {
    let p = traj.params;
    check_profile_params(&p, profile)?;
    let dx = traj.grid.max_spacing();
    let t_min = policy.t_min(p.c);
    let mut samples = Vec::new();
    for (t, f) in &traj.snapshots {
        if *t < t_min {
            continue;
        }
        let phi = profile.eval(*t)?;
        let h = harnack_quantity(f, &p, phi)?;
        let (index, min_h) = h.argmin();
        let tol = policy.tol(dx, traj.dt_used, p.beta, phi);
        samples.push(SampleRecord {
            t: *t,
            phi,
            min_h,
            argmin: traj.grid.multi_index(index),
            tol,
            pass: min_h >= -tol,
        });
    }
    let overall_pass = samples.iter().all(|r| r.pass);
    Ok(HarnackReport {
        params: p,
        family: profile.family,
        samples,
        identity_residuals: Vec::new(),
        grid_spacing: dx,
        dt: traj.dt_used,
        policy,
        overall_pass,
    })
}

/// Three sample times `t - tau, t, t + tau` for [`evolution_identity_residual`].
pub fn identity_stencil(t: f64, tau: f64) -> [f64; 3] {
    [t - tau, t, t + tau]
}

/// Pointwise `|(∂t - Δ)h - 2∇u·∇h - RHS|` with
/// `RHS = 2(1-α)|∇∇u|² - cfΔu - |∇u|²f(2αc+2β+c) + βcf - βcf² + φ_t`
/// (flat torus, `ψ ≡ 0`). `h_t` uses the three-point difference over the
/// neighbouring snapshots, which may be unevenly spaced.
pub fn evolution_identity_residual(traj: &Trajectory, profile: &PhiProfile, t: f64) -> Result<ScalarField> {
    let p = traj.params;
    let i = traj.index_of(t).ok_or(Error::MissingSnapshot(t))?;
    if i == 0 || i + 1 >= traj.snapshots.len() {
        return Err(Error::InsufficientSnapshots(t));
    }
    let (t0, f0) = &traj.snapshots[i - 1];
    let (t1, f1) = &traj.snapshots[i];
    let (t2, f2) = &traj.snapshots[i + 1];
    // φ is spatially constant, so only h - φ is differenced in time and the
    // exact φ_t is added back.
    let s0 = harnack_quantity(f0, &p, 0.0)?;
    let s2 = harnack_quantity(f2, &p, 0.0)?;
    let parts = Parts::new(f1, &p)?;
    let h1 = parts.h(&p, profile.eval(*t1)?);
    let s1 = parts.h(&p, 0.0);
    let phi_t = profile.derivative(*t1)?;

    let a = t1 - t0;
    let b = t2 - t1;
    let (w0, w1, w2) = (-b / (a * (a + b)), (b - a) / (a * b), a / (b * (a + b)));

    let lap_h = laplacian(&h1);
    let grad_u = gradient(&parts.u);
    let grad_h = gradient(&h1);
    let cross = grad_u.dot(&grad_h);
    let hess = hessian_frobenius_sq(&parts.u);
    let (alpha, beta, c) = (p.alpha, p.beta, p.c);

    let values = (0..h1.values().len())
        .map(|k| {
            let h_t = w0 * s0.at(k) + w1 * s1.at(k) + w2 * s2.at(k) + phi_t;
            let lhs = h_t - lap_h.at(k) - 2.0 * cross[k];
            let f = parts.f.at(k);
            let g = parts.grad_sq[k];
            let rhs = 2.0 * (1.0 - alpha) * hess.at(k) - c * f * parts.lap_u.at(k)
                - g * f * (2.0 * alpha * c + 2.0 * beta + c)
                + beta * c * f
                - beta * c * f * f
                + phi_t;
            (lhs - rhs).abs()
        })
        .collect();
    ScalarField::new(h1.grid_arc().clone(), values)
}

/// Adds `(t, max |residual|)` for each requested time to the report.
pub fn attach_identity_residuals(
    report: &mut HarnackReport,
    traj: &Trajectory,
    profile: &PhiProfile,
    times: &[f64],
) -> Result<()> {
    for &t in times {
        let r = evolution_identity_residual(traj, profile, t)?;
        report.identity_residuals.push((t, r.max()));
    }
    Ok(())
}

/// Pointwise `|∇∇u|² - (Δu)²/n` for `u = log f`.
pub fn cauchy_schwarz_gap(f: &ScalarField) -> Result<ScalarField> {
    if let Some(index) = f.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonpositiveField { index, value: f.at(index) });
    }
    let u = f.map(f64::ln);
    let n = f.grid().dim() as f64;
    Ok(hessian_frobenius_sq(&u).zip_map(&laplacian(&u), |hs, l| hs - l * l / n))
}

/// Local data at one point. The ψ entries default to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointData {
    pub grad_u_sq: f64,
    pub delta_u: f64,
    pub f: f64,
    pub phi: f64,
    pub phi_t: f64,
    pub psi: f64,
    pub grad_u_dot_grad_psi: f64,
    pub delta_psi: f64,
}

impl PointData {
    pub fn new(grad_u_sq: f64, delta_u: f64, f: f64, phi: f64, phi_t: f64) -> Self {
        Self { grad_u_sq, delta_u, f, phi, phi_t, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PTerms {
    pub h: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p5: f64,
    pub p5_1: f64,
    pub p5_2: f64,
    pub p6: f64,
    pub p7: f64,
    /// `None` when `A(ε') ≤ 0`.
    pub p8: Option<f64>,
    /// `4αβ(1-α)/n - 2β - αc - c`, the `|∇u|²e^u` coefficient inside `P₂`.
    pub gradient_coupling: f64,
}

impl PTerms {
    /// `P₁h + P₂ + P₃ + P₄`.
    pub fn lower_bound(&self) -> f64 {
        self.p1 * self.h + self.p2 + self.p3 + self.p4
    }

    /// `P₃ + P₄ - (P₆ + P₇)`, nonnegative by completing the square.
    pub fn completed_square_slack(&self) -> f64 {
        self.p3 + self.p4 - self.p6 - self.p7
    }
}

/// Closed forms of all the pointwise terms on a flat domain (`K = 0`).
/// `P₅` uses the closed-manifold `μ₁, ν₁, ω₁`; `P₆, P₇, P₈` use `A(ε')`.
pub fn p_terms(pt: &PointData, p: &ParamSet, eps_prime: f64) -> PTerms {
    let n = p.dim();
    let (alpha, beta, c) = (p.alpha, p.beta, p.c);
    let one = 1.0 - alpha;
    let g = pt.grad_u_sq;
    let e = pt.f;
    let (phi, psi) = (pt.phi, pt.psi);
    let half = p.half_indicator();
    let h = pt.delta_u + alpha * g + beta * e + phi + psi;

    let p1 = 2.0 * one / n * h - 4.0 * one / n * (alpha * g + beta * e + phi + psi) - c * e;
    let coupling = p.gradient_coupling_coefficient();
    let p2 = 2.0 * one / n * (alpha * alpha * g * g + 2.0 * phi * psi) + 4.0 * alpha * one / n * phi * g + g * e * coupling;
    let p3 = e * e * 2.0 * beta * beta * one / n + e * (4.0 * beta * one / n * phi + c * phi + c * beta) + 2.0 * one / n * phi * phi + pt.phi_t;
    let psi_gradient = 4.0 * alpha * one / n * psi * g - 2.0 * pt.grad_u_dot_grad_psi;
    let p4 = psi_gradient + e * psi * half + 2.0 * one / n * psi * psi - pt.delta_psi;

    let root = (n / (2.0 * one)).sqrt();
    let (mu1, nu1, omega1) = (c / 2.0 * root, half / (2.0 * beta) * root, (2.0 * one / n).sqrt());
    let p5 = riccati_form(mu1, nu1, omega1, phi, pt.phi_t);
    let p5_1 = half * phi + beta * c;
    let p5_2 = 2.0 * one / n * phi * phi + pt.phi_t;

    let a = crate::params::quadratic_coefficient(p, eps_prime);
    let p6 = a * e * e + e * (4.0 * beta * one * phi / n + c * beta + c * phi) + 2.0 * one / n * phi * phi + pt.phi_t;
    let p7 = psi_gradient + 2.0 * eps_prime / n * psi * psi - pt.delta_psi;
    let p8 = QuadraticFormConstants::new(p, eps_prime).ok().map(|q| riccati_form(q.mu, q.nu, q.omega, phi, pt.phi_t));

    PTerms { h, p1, p2, p3, p4, p5, p5_1, p5_2, p6, p7, p8, gradient_coupling: coupling }
}

fn riccati_form(mu: f64, nu: f64, omega: f64, phi: f64, phi_t: f64) -> f64 {
    let a = mu + nu * phi;
    -a * a + (omega * phi).powi(2) + phi_t
}

/// `Ψ(ρ) = (R²+ρ²)/(R²-ρ²)²` and its radial derivative and flat Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSample {
    pub rho: f64,
    pub psi: f64,
    pub grad: f64,
    pub laplacian: f64,
    /// `18Ψ³ - |∇Ψ|²`.
    pub gradient_margin: f64,
    /// `(6c₁+18)Ψ² - ΔΨ` with `c₁ = n - 1`.
    pub laplacian_margin: f64,
}

impl CutoffSample {
    pub fn pass(&self) -> bool {
        self.gradient_margin >= 0.0 && self.laplacian_margin >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffReport {
    pub n: usize,
    pub r: f64,
    /// Scale of the cutoff `ψ = kΨ`.
    pub k: f64,
    pub samples: Vec<CutoffSample>,
}

impl CutoffReport {
    pub fn pass(&self) -> bool {
        self.samples.iter().all(CutoffSample::pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,psi,grad,laplacian,gradient_margin,laplacian_margin,k_psi\n");
        for x in &self.samples {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                fmt17(x.rho),
                fmt17(x.psi),
                fmt17(x.grad),
                fmt17(x.laplacian),
                fmt17(x.gradient_margin),
                fmt17(x.laplacian_margin),
                fmt17(self.k * x.psi)
            );
        }
        s
    }
}

/// Evaluates `Ψ` analytically for `ρ = |x|` in flat `ℝⁿ` and checks
/// `|∇Ψ|² ≤ 18Ψ³` and `ΔΨ ≤ (6(n-1)+18)Ψ²` at every radius.
pub fn cutoff_check(n: usize, r: f64, k: f64, radii: &[f64]) -> Result<CutoffReport> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidParams(format!("cutoff radius must be at least 1, got {r}")));
    }
    let c1 = (n - 1) as f64;
    let mut samples = Vec::with_capacity(radii.len());
    for &rho in radii {
        if !(rho >= 0.0 && rho < r) {
            return Err(Error::RadiusOutOfRange { rho, r });
        }
        let (r2, p2) = (r * r, rho * rho);
        let d = r2 - p2;
        let psi = (r2 + p2) / (d * d);
        // Ψ'/ρ is finite at the origin, so the (n-1)Ψ'/ρ term is formed directly.
        let grad_over_rho = (6.0 * r2 + 2.0 * p2) / (d * d * d);
        let grad = rho * grad_over_rho;
        let second = (6.0 * r2 * r2 + 36.0 * p2 * r2 + 6.0 * p2 * p2) / (d * d * d * d);
        let lap = c1 * grad_over_rho + second;
        samples.push(CutoffSample {
            rho,
            psi,
            grad,
            laplacian: lap,
            gradient_margin: 18.0 * psi.powi(3) - grad * grad,
            laplacian_margin: (6.0 * c1 + 18.0) * psi * psi - lap,
        });
    }
    Ok(CutoffReport { n, r, k, samples })
}

/// Smallest admissible cutoff scale, `max(c₂n/ε', 18n²/(4α(1-α)ε'))` with
/// `c₂ = 6(n-1) + 18`.
pub fn cutoff_k_threshold(n: usize, alpha: f64, eps_prime: f64) -> f64 {
    let nf = n as f64;
    let c2 = 6.0 * (nf - 1.0) + 18.0;
    (c2 * nf / eps_prime).max(18.0 * nf * nf / (4.0 * alpha * (1.0 - alpha) * eps_prime))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::TorusGrid;
    use crate::params::{compact_beta_bound, derived_constants, switch_time};
    use crate::solver::{logistic_exact, make_initial, simulate, InitialKind};

    fn canonical() -> ParamSet {
        ParamSet::new(1, 1.0, 0.25, -1.0)
    }

    #[test]
    fn constant_field_reduces_to_reaction_and_phi() {
        let g = Arc::new(TorusGrid::cube(1, 16, 4.0).unwrap());
        let f = ScalarField::constant(g, 0.5);
        let p = canonical();
        let phi = PhiProfile::compact_limit(&p).unwrap().eval(2f64.ln()).unwrap();
        let h = harnack_quantity(&f, &p, phi).unwrap();
        assert!(h.values().iter().all(|&v| (v - 1.7).abs() < 1e-12));
    }

    #[test]
    fn nonpositive_field_is_rejected() {
        let g = Arc::new(TorusGrid::cube(1, 8, 1.0).unwrap());
        let mut v = vec![0.5; 8];
        v[3] = 0.0;
        let f = ScalarField::new(g, v).unwrap();
        assert!(matches!(harnack_quantity(&f, &canonical(), 1.0), Err(Error::NonpositiveField { index: 3, .. })));
    }

    #[test]
    fn constant_trajectory_passes_at_every_sample() {
        let g = Arc::new(TorusGrid::cube(1, 8, 4.0).unwrap());
        let p = canonical();
        let f0 = make_initial(&g, &InitialKind::Constant(0.2)).unwrap();
        let times: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64).collect();
        let traj = simulate(&f0, &p, 5.0, &times).unwrap();
        let profile = PhiProfile::compact_limit(&p).unwrap();
        let report = check_trajectory(&traj, &profile, TolPolicy::default()).unwrap();
        assert_eq!(report.samples.len(), 100);
        assert!(report.overall_pass);
        for r in &report.samples {
            let exact = p.beta * logistic_exact(0.2, 1.0, r.t) + profile.eval(r.t).unwrap();
            assert!(exact > 0.0);
            assert!((r.min_h - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn infeasible_params_are_rejected() {
        let g = Arc::new(TorusGrid::cube(1, 8, 4.0).unwrap());
        let bad = ParamSet::new(1, 1.0, 0.25, -0.5);
        let f0 = make_initial(&g, &InitialKind::Constant(0.5)).unwrap();
        let traj = simulate(&f0, &bad, 1.0, &[1.0]).unwrap();
        let profile = PhiProfile::compact_limit(&canonical()).unwrap();
        assert!(matches!(
            check_trajectory(&traj, &profile, TolPolicy::default()),
            Err(Error::InfeasibleParams(_))
        ));
    }

    #[test]
    fn early_samples_are_skipped() {
        let g = Arc::new(TorusGrid::cube(1, 8, 4.0).unwrap());
        let p = canonical();
        let f0 = make_initial(&g, &InitialKind::Constant(0.5)).unwrap();
        let traj = simulate(&f0, &p, 1.0, &[0.01, 0.05, 1.0]).unwrap();
        let profile = PhiProfile::compact_limit(&p).unwrap();
        let report = check_trajectory(&traj, &profile, TolPolicy::default()).unwrap();
        assert_eq!(report.samples.iter().map(|r| r.t).collect::<Vec<_>>(), vec![0.05, 1.0]);
    }

    #[test]
    fn report_formats() {
        let g = Arc::new(TorusGrid::cube(1, 8, 4.0).unwrap());
        let p = canonical();
        let f0 = make_initial(&g, &InitialKind::Constant(0.5)).unwrap();
        let traj = simulate(&f0, &p, 1.0, &[1.0]).unwrap();
        let report = check_trajectory(&traj, &PhiProfile::compact_limit(&p).unwrap(), TolPolicy::default()).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("t,phi,min_h,argmin,tol,pass\n1.0000000000000000e0,"));
        assert!(csv.trim_end().ends_with(",true"));
        let text = report.to_text();
        assert!(text.contains("overall_pass = true"));
        assert!(text.contains("family = compact-limit-iii"));
    }

    #[test]
    fn gradient_coupling_examples() {
        let pt = PointData::new(1.0, 0.0, 0.5, 1.0, 0.0);
        let on_bound = p_terms(&pt, &canonical(), 0.0);
        assert!(on_bound.gradient_coupling.abs() < 1e-15);
        let inside = p_terms(&pt, &ParamSet::new(1, 1.0, 0.25, -1.5), 0.0);
        assert!((inside.gradient_coupling - 0.625).abs() < 1e-15);
        assert_eq!(compact_beta_bound(1, 1.0, 0.25), -1.0);
    }

    #[test]
    fn p5_1_vanishes_at_switch_time() {
        let p = ParamSet::new(3, 1.0, 0.9, -2.0);
        let profile = PhiProfile::compact_limit(&p).unwrap();
        let t2 = switch_time(&p, 0.0);
        let pt = PointData::new(0.0, 0.0, 0.5, profile.eval(t2).unwrap(), profile.derivative(t2).unwrap());
        assert!(p_terms(&pt, &p, 0.0).p5_1.abs() < 1e-14);
    }

    #[test]
    fn expansion_matches_identity_right_hand_side() {
        // With |∇∇u|² = (Δu)²/n the lower bound is the identity itself.
        let p = ParamSet::new(2, 1.5, 0.3, -2.0);
        let pt = PointData {
            grad_u_sq: 0.7,
            delta_u: -0.4,
            f: 0.3,
            phi: 1.2,
            phi_t: -0.8,
            psi: 0.25,
            grad_u_dot_grad_psi: 0.1,
            delta_psi: 0.05,
        };
        let t = p_terms(&pt, &p, 0.1);
        let (a, b, c, n) = (p.alpha, p.beta, p.c, 2.0);
        let rhs = 2.0 * (1.0 - a) / n * pt.delta_u * pt.delta_u - c * pt.f * pt.delta_u
            - pt.grad_u_sq * pt.f * (2.0 * a * c + 2.0 * b + c)
            + b * c * pt.f
            - b * c * pt.f * pt.f
            + pt.phi_t
            - pt.delta_psi
            - 2.0 * pt.grad_u_dot_grad_psi;
        assert!((t.lower_bound() - rhs).abs() < 1e-12);
        assert!(t.completed_square_slack() >= 0.0);
    }

    #[test]
    fn p8_absent_when_quadratic_coefficient_nonpositive() {
        let p = ParamSet::new(3, 1.0, 0.9, -2.0);
        let d = derived_constants(&p, 0.0, 0.0).unwrap();
        let t = p_terms(&PointData::new(0.0, 0.0, 0.5, 1.0, 0.0), &p, 0.0);
        assert_eq!(t.p8.is_some(), d.a > 0.0);
    }

    #[test]
    fn cutoff_origin_and_bounds() {
        let rep = cutoff_check(3, 2.0, 1.0, &[0.0]).unwrap();
        let s = rep.samples[0];
        assert_eq!(s.psi, 0.25);
        assert_eq!(s.grad, 0.0);
        let radii: Vec<f64> = (1..=100).map(|i| 0.99 * 2.0 * i as f64 / 101.0).collect();
        assert!(cutoff_check(3, 2.0, 1.0, &radii).unwrap().pass());
        assert!(matches!(cutoff_check(3, 2.0, 1.0, &[2.0]), Err(Error::RadiusOutOfRange { .. })));
        assert!(cutoff_check(3, 0.5, 1.0, &[0.1]).is_err());
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        let (r, rho, hstep) = (2.0, 0.9, 1e-4);
        let psi = |x: f64| (r * r + x * x) / (r * r - x * x).powi(2);
        let s = cutoff_check(3, r, 1.0, &[rho]).unwrap().samples[0];
        let d1 = (psi(rho + hstep) - psi(rho - hstep)) / (2.0 * hstep);
        let d2 = (psi(rho + hstep) - 2.0 * psi(rho) + psi(rho - hstep)) / (hstep * hstep);
        assert!((s.grad - d1).abs() < 1e-6);
        assert!((s.laplacian - (d2 + 2.0 / rho * d1)).abs() < 1e-5);
    }

    #[test]
    fn threshold_formula() {
        let k = cutoff_k_threshold(1, 0.5, 0.1);
        assert!((k - 180.0).abs() < 1e-12);
    }
}
