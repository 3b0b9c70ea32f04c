//! One function per subcommand. Each reads what it needs from the
//! [`RunConfig`], writes its reports through the [`Sink`] and returns a
//! [`Verdict`].

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use fisher_harnack::classical::{checks_to_csv, parse_pairs, verify_pairs, PairQuery, RatioTol};
use fisher_harnack::field::TorusGrid;
use fisher_harnack::harnack::{
    attach_identity_residuals, check_trajectory, cutoff_check, identity_stencil, TolPolicy,
};
use fisher_harnack::params::{compact_beta_bound, validate_compact, validate_noncompact};
use fisher_harnack::solver::{make_initial, merge_times, simulate_with, write_archive, InitialKind, Trajectory, DEFAULT_SAFETY};
use fisher_harnack::study::{convergence_study, ConvergenceStudy, StudySetup};
use fisher_harnack::waves::{
    m_double_prime, shoot_profile, SpeedBounds, speed_bound_chain, verify_speed_bound, default_span, WaveReport,
    DEFAULT_SHOOT_TOL,
};
use fisher_harnack::{fmt17, Error, ParamSet, PhiFamily, PhiProfile, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{CliError, RunConfig, Sink, Verdict};

type CmdResult = Result<Verdict, CliError>;

pub const DEFAULT_SEED: u64 = 42;

pub fn params(cfg: &RunConfig) -> Result<ParamSet, CliError> {
    let p = ParamSet::new(
        cfg.get("params.n", 1usize)?,
        cfg.get("params.c", 1.0)?,
        cfg.get("params.alpha", 0.25)?,
        cfg.get("params.beta", -1.0)?,
    );
    if p.n == 0 || !(p.c > 0.0 && p.c.is_finite()) || !p.alpha.is_finite() || !p.beta.is_finite() {
        return Err(CliError::Usage(format!("need n >= 1, c > 0 and finite alpha, beta; got {p}")));
    }
    Ok(p)
}

fn seed(cfg: &RunConfig) -> Result<u64, CliError> {
    cfg.get("run.seed", DEFAULT_SEED)
}

fn grid(cfg: &RunConfig, n: usize) -> Result<Arc<TorusGrid>, CliError> {
    let points = cfg.get("grid.points", if n == 1 { 512usize } else { 128 })?;
    let length = cfg.get("grid.length", 32.0)?;
    Ok(Arc::new(TorusGrid::cube(n, points, length)?))
}

fn initial(cfg: &RunConfig, n: usize) -> Result<InitialKind, CliError> {
    let kind = cfg.get_str("initial.kind", "smooth_random");
    match kind.as_str() {
        "smooth_random" => Ok(InitialKind::SmoothRandom {
            seed: seed(cfg)?,
            band: cfg.get("initial.band", 4usize)?,
            floor: cfg.get("initial.floor", 0.05)?,
        }),
        "constant" => Ok(InitialKind::Constant(cfg.get("initial.value", 0.3)?)),
        "bump" => {
            let half = cfg.get("grid.length", 32.0)? / 2.0;
            let default_center = vec![half.to_string(); n].join(",");
            Ok(InitialKind::Bump {
                center: cfg.get_list("initial.center", &default_center)?,
                width: cfg.get("initial.width", 2.0)?,
                floor: cfg.get("initial.floor", 0.05)?,
                height: cfg.get("initial.height", 0.9)?,
            })
        }
        other => Err(CliError::Usage(format!("initial.kind: unknown kind {other:?}"))),
    }
}

/// Explicit `solver.times`, or `solver.samples` equispaced points on
/// `[t_start, t_end]`.
fn sample_times(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let explicit: Vec<f64> = cfg.get_list("solver.times", "")?;
    let mut times = if explicit.is_empty() {
        let (a, b) = (cfg.get("solver.t_start", 0.05)?, cfg.get("solver.t_end", 5.0)?);
        let k: usize = cfg.get("solver.samples", 100)?;
        if k < 2 || !(b > a && a > 0.0) {
            return Err(CliError::Usage(format!("need samples >= 2 and 0 < t_start < t_end, got {k}, {a}, {b}")));
        }
        (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
    } else {
        explicit
    };
    times = merge_times(&times);
    if times.first().is_some_and(|&t| !(t > 0.0)) {
        return Err(CliError::Usage("sample times must be positive".into()));
    }
    Ok(times)
}

fn profile(cfg: &RunConfig, p: &ParamSet) -> Result<PhiProfile, CliError> {
    let eps = cfg.get_opt("check.eps")?;
    let family = cfg.get_str("check.family", "compact_limit");
    Ok(match family.as_str() {
        "compact_limit" => PhiProfile::compact_limit(p)?,
        "compact" => PhiProfile::compact(p, eps)?,
        "noncompact_limit" => PhiProfile::noncompact_limit(p)?,
        "noncompact" => PhiProfile::noncompact(p, eps, cfg.get_opt("check.eps_prime")?)?,
        other => return Err(CliError::Usage(format!("check.family: unknown family {other:?}"))),
    })
}

fn policy(cfg: &RunConfig) -> Result<TolPolicy, CliError> {
    let d = TolPolicy::default();
    Ok(TolPolicy { factor: cfg.get("check.tol_factor", d.factor)?, t_min_factor: cfg.get("check.t_min_factor", d.t_min_factor)? })
}

fn run_simulation(cfg: &RunConfig, p: &ParamSet, extra_times: &[f64]) -> Result<Trajectory, CliError> {
    let g = grid(cfg, p.n)?;
    let f0 = make_initial(&g, &initial(cfg, p.n)?)?;
    let mut times = sample_times(cfg)?;
    times.extend_from_slice(extra_times);
    let times = merge_times(&times);
    let t_end = *times.last().expect("nonempty");
    Ok(simulate_with(&f0, p, t_end, &times, cfg.get("solver.safety", DEFAULT_SAFETY)?)?)
}

pub fn feasible(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let p = params(cfg)?;
    let compact = validate_compact(&p);
    let noncompact = validate_noncompact(&p);
    let mut s = String::new();
    let _ = writeln!(s, "params {p}");
    let _ = writeln!(s, "compact: {compact}");
    let _ = writeln!(s, "noncompact: {noncompact}");
    sink.text("feasible.txt", &s)?;
    Ok(Verdict::Pass)
}

fn open_interval(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect()
}

/// Feasibility over an `(α, β)` grid, computed in parallel and emitted in
/// row-major input order.
pub fn sweep(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let p0 = params(cfg)?;
    let mode = cfg.get_str("sweep.mode", "compact");
    let alphas = open_interval(cfg.get("sweep.alpha_min", 0.0)?, cfg.get("sweep.alpha_max", 1.0)?, cfg.get("sweep.alpha_points", 50usize)?);
    let betas = open_interval(cfg.get("sweep.beta_min", -3.0)?, cfg.get("sweep.beta_max", 0.0)?, cfg.get("sweep.beta_points", 50usize)?);
    let noncompact = match mode.as_str() {
        "compact" => false,
        "noncompact" => true,
        other => return Err(CliError::Usage(format!("sweep.mode: unknown mode {other:?}"))),
    };
    let points: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    let rows: Vec<String> = points
        .par_iter()
        .map(|&(alpha, beta)| {
            let p = ParamSet { alpha, beta, ..p0 };
            let v = if noncompact { validate_noncompact(&p) } else { validate_compact(&p) };
            let regime = if v.feasible { v.regime } else { Regime::Infeasible };
            format!(
                "{},{},{},{},{}\n",
                fmt17(alpha),
                fmt17(beta),
                regime.label(),
                fmt17(compact_beta_bound(p.n, p.c, alpha) - beta),
                fmt17(-p.regime_indicator())
            )
        })
        .collect();
    let mut csv = String::from("alpha,beta,regime,margin_ii,margin_iii\n");
    rows.iter().for_each(|r| csv.push_str(r));
    sink.csv("sweep.csv", &csv)?;
    Ok(Verdict::Pass)
}

pub fn simulate(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let dir = sink.dir.clone().ok_or_else(|| CliError::Usage("simulate needs --out DIR".into()))?;
    let p = params(cfg)?;
    let traj = run_simulation(cfg, &p, &[])?;
    write_archive(&dir, &traj)?;
    let mut s = String::new();
    let _ = writeln!(s, "params {p}");
    let _ = writeln!(s, "snapshots = {}", traj.snapshots.len());
    let _ = writeln!(s, "dt = {}", fmt17(traj.dt_used));
    let _ = writeln!(s, "global_min = {}", fmt17(traj.global_min()));
    let _ = writeln!(s, "global_max = {}", fmt17(traj.global_max()));
    sink.text("simulate.txt", &s)?;
    Ok(Verdict::Pass)
}

pub fn verify_harnack(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let p = params(cfg)?;
    let prof = profile(cfg, &p)?;
    let id_times: Vec<f64> = cfg.get_list("check.identity_times", "")?;
    let tau = cfg.get("check.identity_tau", 1e-3)?;
    let stencils: Vec<f64> = id_times.iter().flat_map(|&t| identity_stencil(t, tau)).collect();
    let traj = run_simulation(cfg, &p, &stencils)?;
    let mut report = check_trajectory(&traj, &prof, policy(cfg)?)?;
    attach_identity_residuals(&mut report, &traj, &prof, &id_times)?;
    sink.text("harnack.txt", &report.to_text())?;
    sink.csv("harnack.csv", &report.to_csv())?;
    Ok(Verdict::from_pass(report.overall_pass))
}

struct PhiCheck {
    family: PhiFamily,
    name: &'static str,
    value: f64,
    bound: f64,
}

impl PhiCheck {
    fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

fn log_times(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1).max(1) as f64)).collect()
}

pub fn verify_phi(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let p = params(cfg)?;
    let eps = cfg.get_opt("check.eps")?;
    let mut profiles = Vec::new();
    if validate_compact(&p).feasible {
        profiles.push(PhiProfile::compact(&p, eps)?);
        profiles.push(PhiProfile::compact_limit(&p)?);
    }
    if validate_noncompact(&p).feasible {
        profiles.push(PhiProfile::noncompact(&p, eps, cfg.get_opt("check.eps_prime")?)?);
        profiles.push(PhiProfile::noncompact_limit(&p)?);
    }
    if profiles.is_empty() {
        return Err(Error::InfeasibleParams(format!("{p}: {}", validate_compact(&p))).into());
    }
    let k: usize = cfg.get("phi.samples", 200)?;
    let times = log_times(cfg.get("phi.t_min", 0.01 / p.c)?, cfg.get("phi.t_max", 100.0 / p.c)?, k.max(2));
    let limit_time = cfg.get("phi.limit_time", 100.0 / p.c)?;
    let limit_tol = cfg.get("phi.limit_tol", 1e-3)?;

    let mut checks = Vec::new();
    let mut csv = String::from("family,t,phi,dphi,riccati_residual\n");
    for prof in &profiles {
        let fam = prof.family;
        let (mut min_phi, mut ric, mut unshifted) = (f64::INFINITY, 0.0f64, 0.0f64);
        for &t in &times {
            let phi = prof.eval(t)?;
            min_phi = min_phi.min(phi);
            let res = match prof.riccati_residual(t) {
                Ok(r) => {
                    ric = ric.max(r.abs() / (1.0 + phi * phi));
                    let expected = (2.0 * prof.eps * prof.omega - prof.eps * prof.eps) * phi * phi;
                    unshifted = unshifted.max((prof.unshifted_residual(t)? - expected).abs() / (1.0 + expected.abs()));
                    fmt17(r)
                }
                Err(Error::UnsupportedFamily(_)) => String::new(),
                Err(e) => return Err(e.into()),
            };
            let _ = writeln!(csv, "{},{},{},{},{}", fam.name(), fmt17(t), fmt17(phi), fmt17(prof.derivative(t)?), res);
        }
        checks.push(PhiCheck { family: fam, name: "positivity", value: -min_phi, bound: -f64::MIN_POSITIVE });
        if matches!(fam, PhiFamily::CompactIII | PhiFamily::CompactIV | PhiFamily::NoncompactEpsilon) {
            checks.push(PhiCheck { family: fam, name: "riccati_residual", value: ric, bound: 1e-10 });
            checks.push(PhiCheck { family: fam, name: "unshifted_residual", value: unshifted, bound: 1e-10 });
        }
        if prof.t2.is_some() {
            let (left, _) = prof.one_sided_limits_at_t2()?;
            checks.push(PhiCheck {
                family: fam,
                name: "continuity_at_t2",
                value: prof.continuity_gap_at_t2()? / left.abs().max(1.0),
                bound: 1e-12,
            });
        }
        let lim = prof.limit_at_infinity();
        checks.push(PhiCheck {
            family: fam,
            name: "limit",
            value: (prof.eval(limit_time)? - lim).abs() / lim.abs().max(1.0),
            bound: limit_tol,
        });
    }
    let mut s = format!("params {p}\n");
    for c in &checks {
        let _ = writeln!(
            s,
            "check family={} name={} value={} bound={} pass={}",
            c.family.name(),
            c.name,
            fmt17(c.value),
            fmt17(c.bound),
            c.pass()
        );
    }
    if profiles.iter().any(|pr| pr.family == PhiFamily::NoncompactLimit) {
        s.push_str("note: the noncompact limit profile uses nu2 + omega2 in its second denominator\n");
    }
    let pass = checks.iter().all(PhiCheck::pass);
    let _ = writeln!(s, "overall_pass = {pass}");
    sink.text("phi.txt", &s)?;
    sink.csv("phi.csv", &csv)?;
    Ok(Verdict::from_pass(pass))
}

/// Random pairs on a time lattice so that every pair time is a snapshot.
pub fn random_pairs(cfg: &RunConfig, p: &ParamSet) -> Result<Vec<PairQuery>, CliError> {
    let count: usize = cfg.get("classical.pairs", 50)?;
    let (t_min, t_max): (f64, f64) = (cfg.get("classical.t_min", 0.5)?, cfg.get("classical.t_max", 5.0)?);
    let step: f64 = cfg.get("classical.time_step", 0.05)?;
    let slots = ((t_max - t_min) / step).round() as usize;
    if slots < 1 || !(t_min > 0.0) {
        return Err(CliError::Usage(format!("need 0 < t_min < t_max with room for two time steps, got {t_min}, {t_max}")));
    }
    let length = cfg.get("grid.length", 32.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed(cfg)?);
    let point = |rng: &mut ChaCha8Rng| (0..p.n).map(|_| rng.gen_range(0.0..length)).collect::<Vec<f64>>();
    Ok((0..count)
        .map(|_| {
            let i = rng.gen_range(0..slots);
            let j = rng.gen_range(i + 1..=slots);
            let (x1, x2) = (point(&mut rng), point(&mut rng));
            PairQuery { x1, t1: t_min + step * i as f64, x2, t2: t_min + step * j as f64 }
        })
        .collect())
}

pub fn verify_classical(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let p = params(cfg)?;
    let pairs = match cfg.get_opt::<PathBuf>("classical.pair_file")? {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            parse_pairs(&text, p.n)?
        }
        None => random_pairs(cfg, &p)?,
    };
    let times: Vec<f64> = pairs.iter().flat_map(|q| [q.t1, q.t2]).collect();
    let traj = run_simulation(cfg, &p, &times)?;
    let checks = verify_pairs(&traj, &pairs, RatioTol { rel: cfg.get("classical.rel_tol", RatioTol::default().rel)? })?;
    let mut s = format!("params {p}\n");
    for c in &checks {
        s.push_str(&c.to_line());
        s.push('\n');
    }
    let pass = checks.iter().all(|c| c.pass);
    let _ = writeln!(s, "pairs = {}", checks.len());
    let _ = writeln!(s, "overall_pass = {pass}");
    sink.text("classical.txt", &s)?;
    sink.csv("classical.csv", &checks_to_csv(&checks))?;
    Ok(Verdict::from_pass(pass))
}

pub fn verify_waves(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let p = params(cfg)?;
    let root = p.c.sqrt();
    let default_scan: Vec<String> = [0.5, 0.75, 0.95, 1.05, 1.25, 1.5].iter().map(|k| (2.0 * k * root).to_string()).collect();
    let etas: Vec<f64> = cfg.get_list("waves.scan", &default_scan.join(","))?;
    let span = default_span(p.c);
    let tol = cfg.get("waves.search_tol", DEFAULT_SHOOT_TOL)?;
    let scan = etas
        .par_iter()
        .map(|&eta| shoot_profile(eta, p.c, span, tol).map(|w| (eta, w.classification)))
        .collect::<Result<Vec<_>, _>>()?;
    let speed = verify_speed_bound(p.n, p.c)?;
    let mut pass = speed.pass();
    let mut chain_csv = String::from("z,v,m_prime,m_double_prime,m_triple_prime\n");
    let mut bounds = None;
    if cfg.get("waves.chain", p.n == 1)? {
        let cp = ParamSet { alpha: cfg.get("waves.chain_alpha", 0.1)?, beta: cfg.get("waves.chain_beta", -0.8)?, ..p };
        let front = shoot_profile(cfg.get("waves.chain_eta", 2.0 * root)?, p.c, span, DEFAULT_SHOOT_TOL)?;
        let t = cfg.get("waves.chain_t", 50.0 / p.c)?;
        let slack = cfg.get("waves.chain_slack", 1e-3 * p.c)?;
        let tail = front.tail_points(cfg.get("waves.chain_v_max", 1e-4)?);
        if tail.is_empty() {
            return Err(CliError::Usage("no tail points below waves.chain_v_max".into()));
        }
        let m2 = m_double_prime(&cp)?;
        let mut worst: Option<(f64, f64, SpeedBounds)> = None;
        for (z, v) in tail {
            let b = speed_bound_chain(&cp, &front, t, z)?;
            let _ = writeln!(chain_csv, "{},{},{},{},{}", fmt17(z), fmt17(v), fmt17(b.m_prime), fmt17(m2), fmt17(b.m_triple_prime));
            if worst.as_ref().is_none_or(|w| b.m_prime < w.2.m_prime) {
                worst = Some((t, z, b));
            }
        }
        let (t, z, b) = worst.expect("nonempty tail");
        pass &= b.m_prime > b.m_double_prime - slack;
        bounds = Some((cp, t, z, b));
    }
    let report = WaveReport { scan, speed, bounds };
    let mut text = report.to_text();
    let _ = writeln!(text, "overall_pass = {pass}");
    sink.text("waves.txt", &text)?;
    let mut csv = String::from("eta,classification\n");
    for (eta, class) in &report.scan {
        let _ = writeln!(csv, "{},{}", fmt17(*eta), class.label());
    }
    sink.csv("waves.csv", &csv)?;
    if report.bounds.is_some() {
        sink.csv("waves_chain.csv", &chain_csv)?;
    }
    Ok(Verdict::from_pass(pass))
}

pub fn verify_cutoff(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let dims: Vec<usize> = cfg.get_list("cutoff.n", "1,2,3")?;
    let radii_r: Vec<f64> = cfg.get_list("cutoff.r", "1,2,10")?;
    let k = cfg.get("cutoff.k", 1.0)?;
    let samples: usize = cfg.get("cutoff.samples", 1000)?;
    let mut s = String::new();
    let mut csv = String::from("n,r,rho,psi,grad,laplacian,gradient_margin,laplacian_margin,k_psi\n");
    let mut pass = true;
    for &n in &dims {
        for &r in &radii_r {
            let radii: Vec<f64> = (0..samples).map(|i| r * i as f64 / samples as f64).collect();
            let rep = cutoff_check(n, r, k, &radii)?;
            let g = rep.samples.iter().map(|x| x.gradient_margin).fold(f64::INFINITY, f64::min);
            let l = rep.samples.iter().map(|x| x.laplacian_margin).fold(f64::INFINITY, f64::min);
            let _ = writeln!(
                s,
                "cutoff n={n} r={} samples={} min_gradient_margin={} min_laplacian_margin={} pass={}",
                fmt17(r),
                rep.samples.len(),
                fmt17(g),
                fmt17(l),
                rep.pass()
            );
            pass &= rep.pass();
            for line in rep.to_csv().lines().skip(1) {
                let _ = writeln!(csv, "{n},{},{line}", fmt17(r));
            }
        }
    }
    let _ = writeln!(s, "overall_pass = {pass}");
    sink.text("cutoff.txt", &s)?;
    sink.csv("cutoff.csv", &csv)?;
    Ok(Verdict::from_pass(pass))
}

pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceStudy, CliError> {
    let p = params(cfg)?;
    let setup = StudySetup { params: p, length: cfg.get("grid.length", 32.0)?, initial: initial(cfg, p.n)? };
    let prof = profile(cfg, &p)?;
    let resolutions: Vec<usize> = cfg.get_list("converge.resolutions", "128,256,512")?;
    let times = sample_times(cfg)?;
    let t_id = cfg.get("converge.identity_time", 1.0)?;
    let tau = cfg.get("converge.identity_tau", 1e-3)?;
    convergence_study(&setup, &prof, &resolutions, &times, t_id, tau).map_err(|e| match e {
        Error::InvalidGrid(msg) => CliError::Usage(format!("converge.resolutions: {msg}")),
        other => other.into(),
    })
}

pub fn convergence_csv(study: &ConvergenceStudy) -> String {
    let mut csv = String::from("dx,dt,max_identity_residual,min_h_negative_part\n");
    for r in &study.rows {
        let _ = writeln!(csv, "{},{},{},{}", fmt17(r.dx), fmt17(r.dt), fmt17(r.max_identity_residual), fmt17(r.min_h_negative_part));
    }
    let _ = writeln!(csv, "# identity_order = {}", fmt17(study.identity_order));
    let _ = writeln!(csv, "# min_h_order = {}", fmt17(study.min_h_order));
    let incs: Vec<String> = study.min_h_increments.iter().map(|v| fmt17(*v)).collect();
    let _ = writeln!(csv, "# min_h_increments = {}", incs.join(";"));
    csv
}

fn convergence_text(study: &ConvergenceStudy, min_order: Option<f64>) -> String {
    let mut s = String::new();
    for r in &study.rows {
        let _ = writeln!(
            s,
            "points={} dx={} dt={} max_identity_residual={} min_h_negative_part={}",
            r.points,
            fmt17(r.dx),
            fmt17(r.dt),
            fmt17(r.max_identity_residual),
            fmt17(r.min_h_negative_part)
        );
    }
    let _ = writeln!(s, "identity_order = {}", fmt17(study.identity_order));
    let _ = writeln!(s, "min_h_order = {}", fmt17(study.min_h_order));
    if let Some(m) = min_order {
        let _ = writeln!(s, "min_order = {}", fmt17(m));
        let _ = writeln!(s, "overall_pass = {}", study.identity_order >= m);
    }
    s
}

pub fn converge(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let study = run_convergence(cfg)?;
    if sink.dir.is_some() {
        sink.text("converge.txt", &convergence_text(&study, None))?;
    }
    sink.csv("converge.csv", &convergence_csv(&study))?;
    Ok(Verdict::Pass)
}

pub fn verify_identity(cfg: &RunConfig, sink: &Sink) -> CmdResult {
    let study = run_convergence(cfg)?;
    let min_order = cfg.get("converge.min_order", 1.9)?;
    sink.text("identity.txt", &convergence_text(&study, Some(min_order)))?;
    sink.csv("identity.csv", &convergence_csv(&study))?;
    Ok(Verdict::from_pass(study.identity_order >= min_order))
}
