//! Point patterns on `[0,1]^d`, gridded intensity functions, exact
//! simulation by thinning, and the Poisson process log-likelihood.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;

/// One observed realization of a point process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointPattern {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("pattern dimension must be positive"));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(invalid(format!("point {p:?} outside the unit cube")));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points inside the half-open box `[lower, upper)` (closed at
    /// 1 on the upper face).
    pub fn count_in_box(&self, lower: &[f64], upper: &[f64]) -> usize {
        self.points
            .iter()
            .filter(|p| {
                p.iter().zip(lower).zip(upper).all(|((&x, &lo), &hi)| {
                    x >= lo && (x < hi || (hi >= 1.0 && x <= 1.0))
                })
            })
            .count()
    }

    /// Writes the pattern as CSV: optional `#` comment lines, a header line
    /// holding the dimension, then one row of coordinates per point.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.dim)?;
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dim = None;
        let mut points = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match dim {
                None => {
                    let d: usize = line.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("expected dimension header, found {line:?}"),
                    })?;
                    if d == 0 {
                        return Err(Error::Parse { line: lineno, message: "dimension must be positive".into() });
                    }
                    dim = Some(d);
                }
                Some(d) => {
                    let row = parse_row(line, lineno)?;
                    if row.len() != d {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("expected {d} coordinates, found {}", row.len()),
                        });
                    }
                    if row.iter().any(|x| !(0.0..=1.0).contains(x)) {
                        return Err(Error::Parse { line: lineno, message: "coordinate outside [0,1]".into() });
                    }
                    points.push(row);
                }
            }
        }
        let dim = dim.ok_or(Error::Parse { line: 0, message: "missing dimension header".into() })?;
        Self::new(dim, points)
    }
}

fn parse_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a number: {:?}", t.trim()),
            })
        })
        .collect()
}

/// A nonnegative intensity function given by its values on a regular grid
/// and extended to the cube by multilinear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl IntensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(invalid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("intensity value {v} is not a finite nonnegative real")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.node_count()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| f(&grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Interpolated intensity at an arbitrary point of the cube.
    pub fn value_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self
            .grid
            .stencil(point)?
            .into_iter()
            .map(|(i, w)| w * self.values[i])
            .sum())
    }

    /// Resample onto another grid by interpolation.
    pub fn resample(&self, grid: Grid) -> Result<Self> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: grid.dim() });
        }
        let values = (0..grid.node_count())
            .map(|i| self.value_at(&grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    /// CSV with a `d,resolution` header line followed by the values in
    /// row-major order, one grid row (last axis) per line.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{},{}", self.dim(), self.grid.resolution())?;
        for row in self.values.chunks(self.grid.resolution()) {
            let row: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut grid = None;
        let mut values = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if grid.is_none() {
                let head = parse_row(line, lineno)?;
                if head.len() != 2 || head.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
                    return Err(Error::Parse { line: lineno, message: "expected header d,resolution".into() });
                }
                grid = Some(
                    Grid::new(head[0] as usize, head[1] as usize)
                        .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?,
                );
            } else {
                values.extend(parse_row(line, lineno)?);
            }
        }
        let grid = grid.ok_or(Error::Parse { line: 0, message: "missing header".into() })?;
        Self::new(grid, values)
    }
}

/// Trapezoidal approximation of the integral of the field over the cube;
/// exact for the multilinear interpolant.
pub fn integrate_field(field: &IntensityField) -> f64 {
    integrate_values(field.grid(), field.values())
}

pub(crate) fn integrate_values(grid: &Grid, values: &[f64]) -> f64 {
    grid.trapezoid_integrate(values)
}

/// Exact draw from the Poisson process whose intensity is the interpolated
/// field, by thinning a homogeneous process of rate `lambda_star`.
pub fn simulate_thinning<R: Rng + ?Sized>(
    lambda_star: f64,
    field: &IntensityField,
    rng: &mut R,
) -> Result<PointPattern> {
    if !(lambda_star > 0.0 && lambda_star.is_finite()) {
        return Err(invalid("lambda_star must be a positive real"));
    }
    let max = field.max();
    if lambda_star < max {
        return Err(Error::ThinningBound { bound: lambda_star, max });
    }
    let dim = field.dim();
    let candidates = Poisson::new(lambda_star)
        .map_err(|e| invalid(e.to_string()))?
        .sample(rng) as usize;
    let mut points = Vec::new();
    for _ in 0..candidates {
        let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let u: f64 = rng.random();
        if u * lambda_star < field.value_at(&p)? {
            points.push(p);
        }
    }
    PointPattern::new(dim, points)
}

/// Poisson process log-likelihood relative to the unit-rate process:
/// `sum_i [ sum_{x in N^i} log lambda(x) - int (lambda - 1) ]`.
/// Returns negative infinity when the intensity vanishes at an observed
/// point.
pub fn log_likelihood(patterns: &[PointPattern], field: &IntensityField) -> Result<f64> {
    let integral = integrate_field(field) - 1.0;
    let mut total = 0.0;
    for pattern in patterns {
        if pattern.dim() != field.dim() {
            return Err(Error::DimensionMismatch { expected: field.dim(), found: pattern.dim() });
        }
        let mut own = 0.0;
        for p in pattern.points() {
            let lambda = field.value_at(p)?;
            if lambda <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            own += lambda.ln();
        }
        total += own - integral;
    }
    Ok(total)
}
