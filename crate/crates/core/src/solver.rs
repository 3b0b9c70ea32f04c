//! Explicit RK4 integration of `f_t = Δf + cf(1-f)` on torus grids.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{geodesic_distance, laplacian_into, read_snapshot, write_snapshot, ScalarField, TorusGrid};
use crate::fmt17;
use crate::params::ParamSet;

/// Slack on the invariant range `(0, 1)` before a step is declared unstable.
pub const RANGE_SLACK: f64 = 1e-9;

pub const DEFAULT_SAFETY: f64 = 0.5;

/// `safety / (2 Σᵢ 1/Δxᵢ² + c)`.
pub fn stable_dt(grid: &TorusGrid, c: f64, safety: f64) -> f64 {
    let diffusion: f64 = grid.spacing().iter().map(|h| 1.0 / (h * h)).sum();
    safety / (2.0 * diffusion + c)
}

/// Solution of the logistic ODE, i.e. of the PDE for spatially constant data.
pub fn logistic_exact(f0: f64, c: f64, t: f64) -> f64 {
    f0 / (f0 + (1.0 - f0) * (-c * t).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    /// Random trigonometric polynomial with wavenumbers up to `band` per axis,
    /// mapped affinely into `[floor, 1 - floor]`.
    SmoothRandom { seed: u64, band: usize, floor: f64 },
    /// `floor + height · exp(-d²/(2 width²))`, `d` the torus distance to `center`.
    Bump { center: Vec<f64>, width: f64, floor: f64, height: f64 },
    Constant(f64),
}

pub fn make_initial(grid: &Arc<TorusGrid>, kind: &InitialKind) -> Result<ScalarField> {
    match kind {
        InitialKind::Constant(v) => {
            if !(*v > 0.0 && *v < 1.0) {
                return Err(Error::RangeViolation(format!("constant {v}")));
            }
            Ok(ScalarField::constant(Arc::clone(grid), *v))
        }
        InitialKind::Bump { center, width, floor, height } => {
            if center.len() != grid.dim() {
                return Err(Error::InvalidGrid("bump centre has the wrong dimension".into()));
            }
            if !(*floor > 0.0 && *height >= 0.0 && floor + height < 1.0) {
                return Err(Error::RangeViolation(format!("bump floor {floor} height {height}")));
            }
            if !(*width > 0.0) {
                return Err(Error::InvalidParams(format!("bump width must be positive, got {width}")));
            }
            let g = Arc::clone(grid);
            Ok(ScalarField::from_fn(Arc::clone(grid), |x| {
                let d = geodesic_distance(&g, x, center);
                floor + height * (-d * d / (2.0 * width * width)).exp()
            }))
        }
        InitialKind::SmoothRandom { seed, band, floor } => {
            if !(*floor > 0.0 && *floor < 0.5) {
                return Err(Error::RangeViolation(format!("floor {floor} must lie in (0, 0.5)")));
            }
            if *band == 0 {
                return Err(Error::InvalidParams("band must be at least 1".into()));
            }
            let modes = random_modes(grid.dim(), *band, *seed);
            let bound: f64 = modes.iter().map(|m| m.a.abs() + m.b.abs()).sum();
            let lengths = grid.lengths().to_vec();
            Ok(ScalarField::from_fn(Arc::clone(grid), |x| {
                let s: f64 = modes
                    .iter()
                    .map(|m| {
                        let phase: f64 =
                            m.k.iter().zip(x).zip(&lengths).map(|((&k, &xi), &l)| 2.0 * PI * k as f64 * xi / l).sum();
                        m.a * phase.cos() + m.b * phase.sin()
                    })
                    .sum();
                floor + (1.0 - 2.0 * floor) * (s + bound) / (2.0 * bound)
            }))
        }
    }
}

struct Mode {
    k: Vec<i64>,
    a: f64,
    b: f64,
}

// Wave vectors in [-band, band]^n whose first nonzero entry is positive, in
// lexicographic order, so the draws depend only on (n, band, seed).
fn random_modes(n: usize, band: usize, seed: u64) -> Vec<Mode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = band as i64;
    let side = (2 * b + 1) as usize;
    let mut modes = Vec::new();
    for code in 0..side.pow(n as u32) {
        let mut rest = code;
        let mut k = vec![0i64; n];
        for axis in (0..n).rev() {
            k[axis] = (rest % side) as i64 - b;
            rest /= side;
        }
        match k.iter().find(|&&v| v != 0) {
            Some(&first) if first > 0 => {}
            _ => continue,
        }
        let norm_sq: i64 = k.iter().map(|v| v * v).sum();
        let decay = 1.0 / (1.0 + norm_sq as f64).sqrt();
        let a = rng.gen_range(-1.0..1.0) * decay;
        let bb = rng.gen_range(-1.0..1.0) * decay;
        modes.push(Mode { k, a, b: bb });
    }
    modes
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ParamSet,
    pub grid: Arc<TorusGrid>,
    pub snapshots: Vec<(f64, ScalarField)>,
    pub dt_used: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }

    /// Index of the snapshot at `t`, matched to a relative `1e-9`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.snapshots.iter().position(|(s, _)| same_time(*s, t))
    }

    pub fn snapshot_at(&self, t: f64) -> Result<&ScalarField> {
        self.index_of(t).map(|i| &self.snapshots[i].1).ok_or(Error::MissingSnapshot(t))
    }

    pub fn global_min(&self) -> f64 {
        self.snapshots.iter().map(|(_, f)| f.min()).fold(f64::INFINITY, f64::min)
    }

    pub fn global_max(&self) -> f64 {
        self.snapshots.iter().map(|(_, f)| f.max()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// [`simulate_with`] at the default safety factor.
pub fn simulate(initial: &ScalarField, p: &ParamSet, t_end: f64, sample_times: &[f64]) -> Result<Trajectory> {
    simulate_with(initial, p, t_end, sample_times, DEFAULT_SAFETY)
}

/// Sorts `times` and drops entries that [`Trajectory::index_of`] would not
/// tell apart from their predecessor.
pub fn merge_times(times: &[f64]) -> Vec<f64> {
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for t in sorted {
        if out.last().is_none_or(|&s| !same_time(s, t)) {
            out.push(t);
        }
    }
    out
}

fn same_time(s: f64, t: f64) -> bool {
    (s - t).abs() <= 1e-9 * t.abs().max(1.0)
}

/// Classical RK4 in time with the periodic Laplacian. Every interval between
/// consecutive sample times is split into equal substeps no longer than the
/// stable step, so each sample is hit exactly.
pub fn simulate_with(
    initial: &ScalarField,
    p: &ParamSet,
    t_end: f64,
    sample_times: &[f64],
    safety: f64,
) -> Result<Trajectory> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParams(format!("safety must lie in (0, 1], got {safety}")));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParams(format!("t_end must be positive, got {t_end}")));
    }
    if !(p.c > 0.0) {
        return Err(Error::InvalidParams(format!("c must be positive, got {}", p.c)));
    }
    let samples = merge_times(sample_times);
    if let Some(&bad) = samples.iter().find(|&&s| !(s > 0.0 && s <= t_end)) {
        return Err(Error::InvalidParams(format!("sample time {bad} outside (0, {t_end}]")));
    }
    check_range(initial.values(), 0.0)?;

    let grid = Arc::clone(initial.grid_arc());
    let dt = stable_dt(&grid, p.c, safety);
    let mut stepper = Rk4::new(&grid, p.c);
    let mut state = initial.values().to_vec();
    let mut t = 0.0;
    let mut snapshots = Vec::with_capacity(samples.len());
    for &target in &samples {
        let span = target - t;
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for k in 0..steps {
            stepper.step(&mut state, h);
            let now = if k + 1 == steps { target } else { t + (k + 1) as f64 * h };
            check_range(&state, now)?;
        }
        t = target;
        snapshots.push((t, ScalarField::new(Arc::clone(&grid), state.clone())?));
    }
    Ok(Trajectory { params: *p, grid, snapshots, dt_used: dt })
}

fn check_range(values: &[f64], t: f64) -> Result<()> {
    match values.iter().position(|&v| !(v > -RANGE_SLACK && v < 1.0 + RANGE_SLACK)) {
        None => Ok(()),
        Some(index) => Err(Error::StabilityViolation { t, index, value: values[index] }),
    }
}

struct Rk4<'a> {
    grid: &'a TorusGrid,
    c: f64,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    lap: Vec<f64>,
}

impl<'a> Rk4<'a> {
    fn new(grid: &'a TorusGrid, c: f64) -> Self {
        let len = grid.len();
        Self { grid, c, k: std::array::from_fn(|_| vec![0.0; len]), stage: vec![0.0; len], lap: vec![0.0; len] }
    }

    // k[which] = Δ(stage) + c·stage·(1 - stage)
    fn rhs(&mut self, which: usize) {
        laplacian_into(self.grid, &self.stage, &mut self.lap);
        let c = self.c;
        for ((out, &l), &f) in self.k[which].iter_mut().zip(&self.lap).zip(&self.stage) {
            *out = l + c * f * (1.0 - f);
        }
    }

    fn step(&mut self, y: &mut [f64], h: f64) {
        self.stage.copy_from_slice(y);
        self.rhs(0);
        for (s, (&yi, &k)) in self.stage.iter_mut().zip(y.iter().zip(&self.k[0])) {
            *s = yi + 0.5 * h * k;
        }
        self.rhs(1);
        for (s, (&yi, &k)) in self.stage.iter_mut().zip(y.iter().zip(&self.k[1])) {
            *s = yi + 0.5 * h * k;
        }
        self.rhs(2);
        for (s, (&yi, &k)) in self.stage.iter_mut().zip(y.iter().zip(&self.k[2])) {
            *s = yi + h * k;
        }
        self.rhs(3);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
    }
}

/// Writes one snapshot file per sample plus `manifest.txt` with lines
/// `index time filename`.
pub fn write_archive(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join("manifest.txt");
    let file = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut manifest = BufWriter::new(file);
    for (index, (t, field)) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{index:05}.txt");
        write_snapshot(&dir.join(&name), field, *t)?;
        writeln!(manifest, "{index} {} {name}", fmt17(*t)).map_err(|e| Error::io(&manifest_path, e))?;
    }
    manifest.flush().map_err(|e| Error::io(&manifest_path, e))
}

/// Reads an archive written by [`write_archive`], in manifest order.
pub fn read_archive(dir: &Path) -> Result<Vec<(f64, ScalarField)>> {
    let manifest_path = dir.join("manifest.txt");
    let file = fs::File::open(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(&manifest_path, e))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        let [_, time, name] = parts[..] else {
            return Err(Error::Parse(format!("bad manifest line {line:?}")));
        };
        let time: f64 = time.parse().map_err(|_| Error::Parse(format!("bad time {time:?}")))?;
        let (field, stored) = read_snapshot(&dir.join(name))?;
        if stored != time {
            return Err(Error::Parse(format!("{name}: manifest time {time} but header time {stored}")));
        }
        out.push((time, field));
    }
    Ok(out)
}
