//! Refinement studies behind the tolerance policy: self-convergence of
//! `min h` and of the evolution-identity residual.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::TorusGrid;
use crate::harnack::{evolution_identity_residual, harnack_quantity, identity_stencil};
use crate::params::ParamSet;
use crate::phi::PhiProfile;
use crate::solver::{make_initial, merge_times, simulate, InitialKind};

/// Grid and data shared by every resolution of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySetup {
    pub params: ParamSet,
    pub length: f64,
    pub initial: InitialKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionRow {
    pub points: usize,
    pub dx: f64,
    pub dt: f64,
    pub max_identity_residual: f64,
    /// `max(0, -min_t min_x h)`.
    pub min_h_negative_part: f64,
    /// `min_x h` per sample time, over the nodes of the coarsest grid.
    pub min_h_on_common_nodes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ResolutionRow>,
    pub sample_times: Vec<f64>,
    /// Least-squares slope of `log residual` against `log Δx`.
    pub identity_order: f64,
    /// `max_t |m_N(t) - m_2N(t)|` for consecutive resolutions.
    pub min_h_increments: Vec<f64>,
    /// Slope of `log increment` against `log Δx`.
    pub min_h_order: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Checks that the resolutions are at least three, strictly increasing and
/// each a multiple of the first, so the coarsest nodes are shared.
pub fn check_resolutions(points: &[usize]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 resolutions, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("resolutions must be strictly increasing, got {points:?}")));
    }
    if points.iter().any(|p| p % points[0] != 0) {
        return Err(Error::InvalidGrid(format!("resolutions must be multiples of {}", points[0])));
    }
    Ok(())
}

/// Runs the same 1-D or n-D cube problem at each resolution. `min h` is
/// tracked at `sample_times`; the identity residual at `identity_time`
/// uses neighbours `identity_time ± tau`.
pub fn convergence_study(
    setup: &StudySetup,
    profile: &PhiProfile,
    points: &[usize],
    sample_times: &[f64],
    identity_time: f64,
    tau: f64,
) -> Result<ConvergenceStudy> {
    check_resolutions(points)?;
    let p = setup.params;
    let mut times: Vec<f64> = sample_times.to_vec();
    times.extend(identity_stencil(identity_time, tau));
    let times = merge_times(&times);
    let t_end = *times.last().ok_or(Error::InvalidParams("no sample times".into()))?;
    let coarse = points[0];
    let mut rows = Vec::with_capacity(points.len());
    for &n in points {
        let grid = Arc::new(TorusGrid::cube(p.n, n, setup.length)?);
        let f0 = make_initial(&grid, &setup.initial)?;
        let traj = simulate(&f0, &p, t_end, &times)?;
        let stride = n / coarse;
        let common: Vec<usize> = (0..grid.len())
            .filter(|&i| grid.multi_index(i).iter().all(|k| k % stride == 0))
            .collect();
        let mut mins = Vec::with_capacity(sample_times.len());
        let mut global = f64::INFINITY;
        for &t in sample_times {
            let h = harnack_quantity(traj.snapshot_at(t)?, &p, profile.eval(t)?)?;
            mins.push(common.iter().map(|&i| h.at(i)).fold(f64::INFINITY, f64::min));
            global = global.min(h.min());
        }
        let residual = evolution_identity_residual(&traj, profile, identity_time)?.max();
        rows.push(ResolutionRow {
            points: n,
            dx: grid.max_spacing(),
            dt: traj.dt_used,
            max_identity_residual: residual,
            min_h_negative_part: (-global).max(0.0),
            min_h_on_common_nodes: mins,
        });
    }
    let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let res: Vec<f64> = rows.iter().map(|r| r.max_identity_residual).collect();
    let increments: Vec<f64> = rows
        .windows(2)
        .map(|w| {
            w[0].min_h_on_common_nodes
                .iter()
                .zip(&w[1].min_h_on_common_nodes)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ConvergenceStudy {
        identity_order: fitted_order(&dx, &res),
        min_h_order: fitted_order(&dx[..dx.len() - 1], &increments),
        min_h_increments: increments,
        sample_times: sample_times.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((fitted_order(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_validation() {
        assert!(check_resolutions(&[64, 128]).is_err());
        assert!(check_resolutions(&[64, 128, 128]).is_err());
        assert!(check_resolutions(&[64, 96, 128]).is_err());
        assert!(check_resolutions(&[64, 128, 256]).is_ok());
    }

    #[test]
    fn constant_data_has_no_spatial_error() {
        let setup = StudySetup {
            params: ParamSet::new(1, 1.0, 0.25, -1.0),
            length: 8.0,
            initial: InitialKind::Constant(0.4),
        };
        let prof = PhiProfile::compact_limit(&setup.params).unwrap();
        let s = convergence_study(&setup, &prof, &[16, 32, 64], &[0.5, 1.0], 1.0, 1e-3).unwrap();
        assert!(s.rows.iter().all(|r| r.max_identity_residual < 1e-6 && r.min_h_negative_part == 0.0));
    }

    #[test]
    fn near_duplicate_sample_time_keeps_the_stencil() {
        let setup = StudySetup {
            params: ParamSet::new(1, 1.0, 0.25, -1.0),
            length: 32.0,
            initial: InitialKind::SmoothRandom { seed: 42, band: 4, floor: 0.05 },
        };
        let prof = PhiProfile::compact_limit(&setup.params).unwrap();
        let times = [0.5, 0.05 + 0.95 * 9.0 / 9.0];
        let s = convergence_study(&setup, &prof, &[64, 128, 256], &times, 1.0, 1e-3).unwrap();
        assert!(s.identity_order > 1.9, "{}", s.identity_order);
    }
}
