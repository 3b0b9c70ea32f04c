//! Flat periodic grids and second-order discrete calculus on them.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fmt17;

/// Smallest accepted number of points along an axis.
pub const MIN_POINTS_PER_AXIS: usize = 8;

/// A uniform grid on the flat torus `∏ [0, Lᵢ)`, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    points: Vec<usize>,
    lengths: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

impl TorusGrid {
    pub fn new(points: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() > 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 1..=3, got {}", points.len())));
        }
        if points.len() != lengths.len() {
            return Err(Error::InvalidGrid("points and lengths differ in dimension".into()));
        }
        if let Some(p) = points.iter().find(|&&p| p < MIN_POINTS_PER_AXIS) {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS_PER_AXIS} points per axis, got {p}")));
        }
        if let Some(l) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGrid(format!("period lengths must be positive, got {l}")));
        }
        let spacing = points.iter().zip(&lengths).map(|(&p, &l)| l / p as f64).collect();
        let mut strides = vec![1; points.len()];
        for axis in (0..points.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * points[axis + 1];
        }
        Ok(Self { points, lengths, spacing, strides })
    }

    /// `n`-dimensional grid with the same resolution and period on every axis.
    pub fn cube(n: usize, points: usize, length: f64) -> Result<Self> {
        Self::new(vec![points; n], vec![length; n])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points_per_axis(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let k = flat / s;
                flat %= s;
                k
            })
            .collect()
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.spacing).map(|(&i, &h)| i as f64 * h).collect()
    }

    /// Flat index of the grid point nearest to `x` (coordinates taken modulo
    /// the periods).
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let multi: Vec<usize> = (0..self.dim())
            .map(|axis| {
                let y = x[axis].rem_euclid(self.lengths[axis]);
                ((y / self.spacing[axis]).round() as usize) % self.points[axis]
            })
            .collect();
        self.flat_index(&multi)
    }

    /// Flat index shifted by `delta` cells along `axis`, with periodic wrap.
    #[inline]
    pub fn shift(&self, flat: usize, axis: usize, delta: isize) -> usize {
        let stride = self.strides[axis];
        let m = self.points[axis] as isize;
        let i = ((flat / stride) % self.points[axis]) as isize;
        let j = (i + delta).rem_euclid(m);
        (flat as isize + (j - i) * stride as isize) as usize
    }
}

/// Torus distance: Euclidean norm of the componentwise wrapped differences.
pub fn geodesic_distance(grid: &TorusGrid, x1: &[f64], x2: &[f64]) -> f64 {
    grid.lengths
        .iter()
        .enumerate()
        .map(|(axis, &l)| {
            let d = (x1[axis] - x2[axis]).rem_euclid(l);
            let w = d.min(l - d);
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

/// Values on a [`TorusGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<TorusGrid>, v: f64) -> Self {
        let values = vec![v; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<TorusGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: Arc::clone(&self.grid), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: Arc::clone(&self.grid), values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum value and its flat index; ties go to the first index.
    pub fn argmin(&self) -> (usize, f64) {
        let mut best = (0, self.values[0]);
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn at(&self, flat: usize) -> f64 {
        self.values[flat]
    }
}

/// One component per axis, each row-major like [`ScalarField`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    /// Pointwise `|v|²`.
    pub fn norm_sq(&self) -> Vec<f64> {
        let len = self.components[0].len();
        (0..len).map(|i| self.components.iter().map(|c| c[i] * c[i]).sum()).collect()
    }

    /// Pointwise `v·w`.
    pub fn dot(&self, other: &VectorField) -> Vec<f64> {
        let len = self.components[0].len();
        (0..len)
            .map(|i| self.components.iter().zip(&other.components).map(|(a, b)| a[i] * b[i]).sum())
            .collect()
    }
}

/// Second-order central differences.
pub fn gradient(field: &ScalarField) -> VectorField {
    let g = field.grid();
    let v = field.values();
    let components = (0..g.dim())
        .map(|axis| {
            let inv = 0.5 / g.spacing[axis];
            (0..v.len()).map(|i| (v[g.shift(i, axis, 1)] - v[g.shift(i, axis, -1)]) * inv).collect()
        })
        .collect();
    VectorField { components }
}

/// The `(2n+1)`-point periodic Laplacian.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let values = laplacian_values(field.grid(), field.values());
    ScalarField { grid: Arc::clone(field.grid_arc()), values }
}

pub(crate) fn laplacian_values(g: &TorusGrid, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    laplacian_into(g, v, &mut out);
    out
}

pub(crate) fn laplacian_into(g: &TorusGrid, v: &[f64], out: &mut [f64]) {
    let inv: Vec<f64> = g.spacing.iter().map(|h| 1.0 / (h * h)).collect();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (axis, &w) in inv.iter().enumerate() {
            acc += (v[g.shift(i, axis, 1)] - 2.0 * v[i] + v[g.shift(i, axis, -1)]) * w;
        }
        *o = acc;
    }
}

/// Pointwise `|∇∇u|²`: squared diagonal second differences plus twice the
/// squared 4-point mixed differences.
pub fn hessian_frobenius_sq(field: &ScalarField) -> ScalarField {
    let g = field.grid();
    let v = field.values();
    let n = g.dim();
    let values = (0..v.len())
        .map(|i| {
            let mut acc = 0.0;
            for a in 0..n {
                let h = g.spacing[a];
                let d = (v[g.shift(i, a, 1)] - 2.0 * v[i] + v[g.shift(i, a, -1)]) / (h * h);
                acc += d * d;
                for b in a + 1..n {
                    let pp = g.shift(g.shift(i, a, 1), b, 1);
                    let pm = g.shift(g.shift(i, a, 1), b, -1);
                    let mp = g.shift(g.shift(i, a, -1), b, 1);
                    let mm = g.shift(g.shift(i, a, -1), b, -1);
                    let m = (v[pp] - v[pm] - v[mp] + v[mm]) / (4.0 * h * g.spacing[b]);
                    acc += 2.0 * m * m;
                }
            }
            acc
        })
        .collect();
    ScalarField { grid: Arc::clone(field.grid_arc()), values }
}

/// Writes `n points_per_axis lengths time` then one value per line.
pub fn write_snapshot(path: &Path, field: &ScalarField, time: f64) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_snapshot_to(&mut w, field, time).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_snapshot_to(w: &mut impl Write, field: &ScalarField, time: f64) -> std::io::Result<()> {
    let g = field.grid();
    let mut header = vec![g.dim().to_string()];
    header.extend(g.points.iter().map(|p| p.to_string()));
    header.extend(g.lengths.iter().map(|&l| fmt17(l)));
    header.push(fmt17(time));
    writeln!(w, "{}", header.join(" "))?;
    for &v in field.values() {
        writeln!(w, "{}", fmt17(v))?;
    }
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ScalarField, f64)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot_from(BufReader::new(file))
}

pub fn read_snapshot_from(r: impl BufRead) -> Result<(ScalarField, f64)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let n: usize = parse_token(tokens.first().copied())?;
    if tokens.len() != 2 * n + 2 {
        return Err(Error::Parse(format!("header needs {} tokens, got {}", 2 * n + 2, tokens.len())));
    }
    let points = (1..=n).map(|i| parse_token(Some(tokens[i]))).collect::<Result<Vec<usize>>>()?;
    let lengths = (n + 1..=2 * n).map(|i| parse_token(Some(tokens[i]))).collect::<Result<Vec<f64>>>()?;
    let time: f64 = parse_token(Some(tokens[2 * n + 1]))?;
    let grid = Arc::new(TorusGrid::new(points, lengths)?);
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if !line.is_empty() {
            values.push(parse_token(Some(line))?);
        }
    }
    Ok((ScalarField::new(grid, values)?, time))
}

fn parse_token<T: std::str::FromStr>(tok: Option<&str>) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse("missing token".into()))?;
    tok.parse().map_err(|_| Error::Parse(format!("cannot parse {tok:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(points: usize, l: f64) -> Arc<TorusGrid> {
        Arc::new(TorusGrid::cube(1, points, l).unwrap())
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGrid::new(vec![4], vec![1.0]).is_err());
        assert!(TorusGrid::new(vec![16], vec![0.0]).is_err());
        assert!(TorusGrid::new(vec![16, 16], vec![1.0]).is_err());
        assert!(TorusGrid::new(vec![8; 4], vec![1.0; 4]).is_err());
    }

    #[test]
    fn index_round_trip_and_shift() {
        let g = TorusGrid::new(vec![8, 10, 12], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.len(), 960);
        for flat in [0, 17, 500, 959] {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        let last = g.flat_index(&[7, 9, 11]);
        assert_eq!(g.multi_index(g.shift(last, 0, 1)), vec![0, 9, 11]);
        assert_eq!(g.multi_index(g.shift(last, 2, 1)), vec![7, 9, 0]);
        assert_eq!(g.multi_index(g.shift(0, 1, -1)), vec![0, 9, 0]);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = Arc::new(TorusGrid::cube(2, 16, 3.0).unwrap());
        let f = ScalarField::constant(g, 0.4);
        assert!(gradient(&f).components.iter().flatten().all(|&v| v == 0.0));
        assert!(laplacian(&f).values().iter().all(|&v| v == 0.0));
        assert!(hessian_frobenius_sq(&f).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_gradient_and_laplacian_converge_at_second_order() {
        let l = 2.0;
        let k = 2.0 * PI / l;
        let errors: Vec<(f64, f64, f64)> = [32, 64, 128]
            .iter()
            .map(|&m| {
                let g = line(m, l);
                let f = ScalarField::from_fn(Arc::clone(&g), |x| (k * x[0]).sin());
                let grad_exact: Vec<f64> = (0..m).map(|i| k * (k * g.coords(i)[0]).cos()).collect();
                let lap_exact: Vec<f64> = f.values().iter().map(|v| -k * k * v).collect();
                let hess_exact: Vec<f64> = lap_exact.iter().map(|v| v * v).collect();
                (
                    max_abs_diff(&gradient(&f).components[0], &grad_exact),
                    max_abs_diff(laplacian(&f).values(), &lap_exact),
                    max_abs_diff(hessian_frobenius_sq(&f).values(), &hess_exact),
                )
            })
            .collect();
        for w in errors.windows(2) {
            assert!((w[0].0 / w[1].0).log2() > 1.9);
            assert!((w[0].1 / w[1].1).log2() > 1.9);
            assert!((w[0].2 / w[1].2).log2() > 1.9);
        }
    }

    #[test]
    fn product_of_sines_laplacian() {
        let (lx, ly) = (1.0, 2.0);
        let (kx, ky) = (2.0 * PI / lx, 4.0 * PI / ly);
        let errs: Vec<f64> = [32, 64]
            .iter()
            .map(|&m| {
                let g = Arc::new(TorusGrid::new(vec![m, m], vec![lx, ly]).unwrap());
                let f = ScalarField::from_fn(g, |x| (kx * x[0]).sin() * (ky * x[1]).sin());
                let exact: Vec<f64> = f.values().iter().map(|v| -(kx * kx + ky * ky) * v).collect();
                max_abs_diff(laplacian(&f).values(), &exact)
            })
            .collect();
        assert!((errs[0] / errs[1]).log2() > 1.9);
    }

    #[test]
    fn mixed_partials_converge() {
        let l = 1.0;
        let k = 2.0 * PI / l;
        // u = sin(kx) sin(ky): |∇∇u|² = 2k⁴ sin²sin² + 2k⁴ cos²cos².
        let errs: Vec<f64> = [32, 64]
            .iter()
            .map(|&m| {
                let g = Arc::new(TorusGrid::cube(2, m, l).unwrap());
                let f = ScalarField::from_fn(Arc::clone(&g), |x| (k * x[0]).sin() * (k * x[1]).sin());
                let exact: Vec<f64> = (0..g.len())
                    .map(|i| {
                        let x = g.coords(i);
                        let (s0, c0, s1, c1) = ((k * x[0]).sin(), (k * x[0]).cos(), (k * x[1]).sin(), (k * x[1]).cos());
                        2.0 * k.powi(4) * (s0 * s0 * s1 * s1 + c0 * c0 * c1 * c1)
                    })
                    .collect();
                max_abs_diff(hessian_frobenius_sq(&f).values(), &exact)
            })
            .collect();
        assert!((errs[0] / errs[1]).log2() > 1.9, "{errs:?}");
    }

    #[test]
    fn geodesic_distance_examples() {
        let g1 = TorusGrid::cube(1, 8, 1.0).unwrap();
        assert_eq!(geodesic_distance(&g1, &[0.3], &[0.3]), 0.0);
        assert!((geodesic_distance(&g1, &[0.1], &[0.9]) - 0.2).abs() < 1e-15);
        let g2 = TorusGrid::cube(2, 8, 1.0).unwrap();
        assert!((geodesic_distance(&g2, &[0.0, 0.0], &[0.6, 0.3]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nearest_index_wraps() {
        let g = TorusGrid::cube(1, 10, 1.0).unwrap();
        assert_eq!(g.nearest_index(&[0.98]), 0);
        assert_eq!(g.nearest_index(&[0.31]), 3);
        assert_eq!(g.nearest_index(&[-0.1]), 9);
    }

    #[test]
    fn argmin_prefers_first_index() {
        let f = ScalarField::new(line(8, 1.0), vec![3.0, 1.0, 2.0, 1.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(f.argmin(), (1, 1.0));
    }

    #[test]
    fn snapshot_text_round_trip() {
        let g = Arc::new(TorusGrid::new(vec![8, 9], vec![1.5, 2.0]).unwrap());
        let f = ScalarField::from_fn(g, |x| 0.3 + 0.1 * (x[0] + 2.0 * x[1]).sin());
        let mut buf = Vec::new();
        write_snapshot_to(&mut buf, &f, 0.125).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 8 9 1.5000000000000000e0 2.0000000000000000e0 1.2500000000000000e-1\n"));
        let (back, t) = read_snapshot_from(&buf[..]).unwrap();
        assert_eq!(t, 0.125);
        assert_eq!(back, f);
    }
}
