//! Integrated (two-point) Harnack bounds
//! `f(x₂,t₂)/f(x₁,t₁) ≥ exp(∫φ̃) · exp(-d²/(4(1-α)(t₂-t₁)))` and their check
//! on simulated trajectories.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::geodesic_distance;
use crate::fmt17;
use crate::params::{classical_beta_range, validate_compact, ParamSet};
use crate::phi::{tilde_integral, ClassicalCase};
use crate::solver::Trajectory;

/// Minimum time gap between the two points of a pair, in solver steps.
pub const MIN_GAP_STEPS: f64 = 10.0;

/// Checks the hypotheses on `(α, β)`: the closed-manifold conditions plus
/// `β ≥ -c`.
pub fn check_classical_params(p: &ParamSet) -> Result<()> {
    let v = validate_compact(p);
    if !v.feasible {
        return Err(Error::InfeasibleParams(format!("{p}: {v}")));
    }
    match classical_beta_range(p.n, p.c, p.alpha) {
        Some((lo, hi)) if p.beta >= lo && p.beta <= hi => Ok(()),
        _ => Err(Error::InfeasibleParams(format!("{p}: beta outside [-c, bound]"))),
    }
}

/// Lower bound on `f(x₂,t₂)/f(x₁,t₁)` for points a distance `d` apart.
pub fn ratio_bound(p: &ParamSet, d: f64, t1: f64, t2: f64) -> Result<f64> {
    check_classical_params(p)?;
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::InvalidParams(format!("distance must be finite and nonnegative, got {d}")));
    }
    if !(t2 >= t1) || (t1 == t2 && d > 0.0) {
        return Err(Error::DegenerateInterval { t1, t2, d });
    }
    let integral = tilde_integral(p, t1, t2)?;
    let spread = if d == 0.0 { 0.0 } else { d * d / (4.0 * (1.0 - p.alpha) * (t2 - t1)) };
    Ok((integral - spread).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairQuery {
    pub x1: Vec<f64>,
    pub t1: f64,
    pub x2: Vec<f64>,
    pub t2: f64,
}

/// Relative tolerance: a pair passes when `lhs ≥ rhs·(1 - rel)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioTol {
    pub rel: f64,
}

impl Default for RatioTol {
    fn default() -> Self {
        Self { rel: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioCheck {
    /// Grid points the query was snapped to.
    pub x1: Vec<f64>,
    pub t1: f64,
    pub x2: Vec<f64>,
    pub t2: f64,
    pub case: ClassicalCase,
    pub distance: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
}

impl RatioCheck {
    pub fn to_line(&self) -> String {
        format!(
            "x1={} t1={} x2={} t2={} case={} d={} lhs={} rhs={} margin={} tol={} pass={}",
            join_coords(&self.x1),
            fmt17(self.t1),
            join_coords(&self.x2),
            fmt17(self.t2),
            self.case.label(),
            fmt17(self.distance),
            fmt17(self.lhs),
            fmt17(self.rhs),
            fmt17(self.margin),
            fmt17(self.tol),
            self.pass
        )
    }
}

fn join_coords(x: &[f64]) -> String {
    x.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(",")
}

/// CSV with header `x1,t1,x2,t2,case,d,lhs,rhs,margin,tol,pass`; coordinates
/// joined by `;`.
pub fn checks_to_csv(checks: &[RatioCheck]) -> String {
    let mut s = String::from("x1,t1,x2,t2,case,d,lhs,rhs,margin,tol,pass\n");
    for r in checks {
        let coords = |x: &[f64]| x.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            coords(&r.x1),
            fmt17(r.t1),
            coords(&r.x2),
            fmt17(r.t2),
            r.case.label(),
            fmt17(r.distance),
            fmt17(r.lhs),
            fmt17(r.rhs),
            fmt17(r.margin),
            fmt17(r.tol),
            r.pass
        );
    }
    s
}

/// Checks each pair against the trajectory. Values are read at the nearest
/// grid points and `d` is the torus distance between those grid points.
pub fn verify_pairs(traj: &Trajectory, pairs: &[PairQuery], tol: RatioTol) -> Result<Vec<RatioCheck>> {
    let p = traj.params;
    check_classical_params(&p)?;
    for (t, f) in &traj.snapshots {
        if let Some(i) = f.values().iter().position(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::RangeViolation(format!("f = {} at index {i}, t = {t}", f.at(i))));
        }
    }
    let grid = &traj.grid;
    let case = ClassicalCase::of(&p);
    let min_gap = MIN_GAP_STEPS * traj.dt_used;
    pairs
        .iter()
        .map(|q| {
            if q.x1.len() != grid.dim() || q.x2.len() != grid.dim() {
                return Err(Error::InvalidGrid(format!("pair coordinates must have {} entries", grid.dim())));
            }
            let gap = q.t2 - q.t1;
            if gap > 0.0 && gap < min_gap {
                return Err(Error::PairTooClose { gap, min: min_gap });
            }
            let (i1, i2) = (grid.nearest_index(&q.x1), grid.nearest_index(&q.x2));
            let (x1, x2) = (grid.coords(i1), grid.coords(i2));
            let d = geodesic_distance(grid, &x1, &x2);
            let lhs = traj.snapshot_at(q.t2)?.at(i2) / traj.snapshot_at(q.t1)?.at(i1);
            let rhs = ratio_bound(&p, d, q.t1, q.t2)?;
            let tol = tol.rel * rhs;
            let margin = lhs - rhs;
            Ok(RatioCheck { x1, t1: q.t1, x2, t2: q.t2, case, distance: d, lhs, rhs, margin, tol, pass: margin >= -tol })
        })
        .collect()
}

/// Parses lines `x1 t1 x2 t2` with `dim` space-separated coordinates per
/// point. Blank lines and lines starting with `#` are skipped.
pub fn parse_pairs(text: &str, dim: usize) -> Result<Vec<PairQuery>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number {tok:?}", lineno + 1))))
            .collect::<Result<_>>()?;
        if nums.len() != 2 * dim + 2 {
            return Err(Error::Parse(format!(
                "line {}: expected {} numbers, got {}",
                lineno + 1,
                2 * dim + 2,
                nums.len()
            )));
        }
        out.push(PairQuery {
            x1: nums[..dim].to_vec(),
            t1: nums[dim],
            x2: nums[dim + 1..2 * dim + 1].to_vec(),
            t2: nums[2 * dim + 1],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::TorusGrid;
    use crate::solver::{make_initial, simulate, InitialKind};

    fn case_i() -> ParamSet {
        ParamSet::new(1, 1.0, 0.25, -1.0)
    }

    #[test]
    fn canonical_example() {
        let r = ratio_bound(&case_i(), 0.0, 1.0, 2.0).unwrap();
        assert!((r - 0.686_66).abs() < 1e-5);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(ratio_bound(&case_i(), 0.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(matches!(ratio_bound(&case_i(), 0.5, 1.0, 1.0), Err(Error::DegenerateInterval { .. })));
        let near = ratio_bound(&case_i(), 0.0, 1.0, 1.0 + 1e-9).unwrap();
        assert!((near - 1.0).abs() < 1e-8);
    }

    #[test]
    fn distance_factor() {
        let base = ratio_bound(&case_i(), 0.0, 1.0, 2.5).unwrap();
        let far = ratio_bound(&case_i(), 2.0, 1.0, 2.5).unwrap();
        assert!((far / base - (-4.0f64 / (3.0 * 1.5)).exp()).abs() < 1e-14);
    }

    #[test]
    fn hypotheses_enforced() {
        // β = -1.5 < -c violates the lower end of the range.
        assert!(matches!(
            ratio_bound(&ParamSet::new(1, 1.0, 0.25, -1.5), 0.0, 1.0, 2.0),
            Err(Error::InfeasibleParams(_))
        ));
        // Case II before the switch time.
        let p = ParamSet::new(3, 1.0, 0.9, -2.0);
        assert!(matches!(ratio_bound(&p, 0.0, 1.0, 8.0), Err(Error::InfeasibleParams(_)) | Err(Error::OutOfRegime { .. })));
    }

    fn traj() -> Trajectory {
        let g = Arc::new(TorusGrid::cube(1, 64, 16.0).unwrap());
        let f0 = make_initial(&g, &InitialKind::SmoothRandom { seed: 5, band: 3, floor: 0.05 }).unwrap();
        simulate(&f0, &case_i(), 2.0, &[0.5, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn identical_points_pass() {
        let t = traj();
        let q = PairQuery { x1: vec![3.0], t1: 1.0, x2: vec![3.0], t2: 1.0 };
        let r = &verify_pairs(&t, &[q], RatioTol::default()).unwrap()[0];
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        assert!(r.pass);
    }

    #[test]
    fn pair_errors() {
        let t = traj();
        let missing = PairQuery { x1: vec![3.0], t1: 0.7, x2: vec![3.0], t2: 2.0 };
        assert!(matches!(verify_pairs(&t, &[missing], RatioTol::default()), Err(Error::MissingSnapshot(_))));
        let mut bad = t.clone();
        let mut v = bad.snapshots[1].1.clone().into_values();
        v[0] = 1.0;
        bad.snapshots[1].1 = crate::field::ScalarField::new(Arc::clone(&bad.grid), v).unwrap();
        let q = PairQuery { x1: vec![3.0], t1: 0.5, x2: vec![3.0], t2: 2.0 };
        assert!(matches!(verify_pairs(&bad, &[q], RatioTol::default()), Err(Error::RangeViolation(_))));
    }

    #[test]
    fn simulated_pairs_pass() {
        let t = traj();
        let pairs = [
            PairQuery { x1: vec![1.0], t1: 0.5, x2: vec![9.0], t2: 2.0 },
            PairQuery { x1: vec![15.5], t1: 1.0, x2: vec![0.5], t2: 2.0 },
            PairQuery { x1: vec![4.0], t1: 0.5, x2: vec![4.0], t2: 1.0 },
        ];
        let out = verify_pairs(&t, &pairs, RatioTol::default()).unwrap();
        assert!(out.iter().all(|r| r.pass), "{out:?}");
        assert!((out[1].distance - 1.0).abs() < 1e-12);
        assert!(checks_to_csv(&out).lines().count() == 4);
    }

    #[test]
    fn parse_pair_lines() {
        let q = parse_pairs("# x1 t1 x2 t2\n1 0.5 2 1.5\n\n0.25 1 3 2\n", 1).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q[0], PairQuery { x1: vec![1.0], t1: 0.5, x2: vec![2.0], t2: 1.5 });
        assert!(parse_pairs("1 2 3\n", 1).is_err());
        assert!(parse_pairs("1 2 3 4 5 x\n", 2).is_err());
        assert_eq!(parse_pairs("1 2 0.5 3 4 1\n", 2).unwrap()[0].x2, vec![3.0, 4.0]);
    }
}
