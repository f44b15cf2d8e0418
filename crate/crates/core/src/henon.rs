//! The extended Hénon map
//!
//! ```text
//! x_{t+1} = 1 - a x_t² + y_t
//! y_{t+1} = b x_t + c y_t
//! ```
//!
//! observed through `x` alone, which turns it into a system with infinite
//! memory, plus tools for comparing attractors via delay embeddings.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sinar::{build_hankel, fit, Dictionary, NarModel, Term};
use crate::trajectory::{relative_error, Trajectory};

/// Orbits leaving this box count as escaped.
pub const ESCAPE_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x0: f64,
    pub y0: f64,
}

impl HenonParams {
    /// a = 1.3, b = 0.3, c = 0.3 from the origin.
    pub fn reference() -> HenonParams {
        HenonParams {
            a: 1.3,
            b: 0.3,
            c: 0.3,
            x0: 0.0,
            y0: 0.0,
        }
    }

    pub fn with_c(self, c: f64) -> HenonParams {
        HenonParams { c, ..self }
    }

    fn check(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.x0, self.y0];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("henon parameters must be finite"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HenonOrbit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl HenonOrbit {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The orbit as a two-dimensional trajectory `(x, y)`.
    pub fn joint(&self) -> Trajectory {
        let flat = self.x.iter().zip(&self.y).flat_map(|(&x, &y)| [x, y]).collect();
        Trajectory::from_flat(2, flat).expect("x and y have equal length")
    }
}

/// Iterates the map `steps` times; the orbit has `steps + 1` states.
pub fn simulate_henon(params: &HenonParams, steps: usize) -> Result<HenonOrbit> {
    params.check()?;
    let mut x = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    let (mut xt, mut yt) = (params.x0, params.y0);
    x.push(xt);
    y.push(yt);
    for step in 1..=steps {
        (xt, yt) = (1.0 - params.a * xt * xt + yt, params.b * xt + params.c * yt);
        if !(xt.abs() <= ESCAPE_RADIUS && yt.abs() <= ESCAPE_RADIUS) {
            return Err(Error::Escaped { step });
        }
        x.push(xt);
        y.push(yt);
    }
    Ok(HenonOrbit { x, y })
}

/// Coefficients of the truncated memory expansion of `x` in the layout of
/// [`Dictionary::henon`]: `[1, -a, 0, b, cb, c²b, …, c^{p-2} b]`.
pub fn exact_memory_coefficients(params: &HenonParams, p: usize) -> Result<Vec<f64>> {
    params.check()?;
    if p == 0 {
        return Err(Error::invalid("memory depth must be >= 1"));
    }
    let mut w = vec![1.0, -params.a, 0.0];
    let mut coef = params.b;
    for _ in 1..p {
        w.push(coef);
        coef *= params.c;
    }
    Ok(w)
}

/// The truncated expansion as a model over [`Dictionary::henon`].
pub fn exact_memory_model(params: &HenonParams, p: usize) -> Result<NarModel> {
    let w = exact_memory_coefficients(params, p)?;
    NarModel::from_coefficients(Dictionary::henon(p)?, DMatrix::from_row_slice(1, w.len(), &w), 0.0)
}

/// `{1, x², x, y}` over the full state, under which the map is Markovian.
pub fn full_state_dictionary() -> Dictionary {
    Dictionary::new(
        2,
        1,
        true,
        vec![Term::new(0, vec![2, 0]), Term::new(0, vec![1, 0]), Term::new(0, vec![0, 1])],
    )
    .expect("valid full-state dictionary")
}

/// Exact coefficients over [`full_state_dictionary`].
pub fn full_state_coefficients(params: &HenonParams) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 4, &[1.0, -params.a, 0.0, 1.0, 0.0, 0.0, params.b, params.c])
}

/// A finite, nonempty set of points in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<PointCloud> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be positive"));
        }
        if coords.is_empty() {
            return Err(Error::invalid("point cloud is empty"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point cloud has non-finite coordinates"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points<S: AsRef<[f64]>>(points: &[S]) -> Result<PointCloud> {
        let dim = points.first().map_or(0, |p| p.as_ref().len());
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(Error::invalid("points have mixed dimensions"));
        }
        PointCloud::new(dim, points.iter().flat_map(|p| p.as_ref().iter().copied()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }
}

/// Delay vectors `(x_t, x_{t-1}, …, x_{t-p+1})` for every `t >= p-1`.
pub fn delay_embed(series: &[f64], p: usize) -> Result<PointCloud> {
    if p == 0 {
        return Err(Error::invalid("embedding depth must be >= 1"));
    }
    if series.len() < p {
        return Err(Error::invalid(format!(
            "series of length {} is too short for embedding depth {p}",
            series.len()
        )));
    }
    let coords = (p - 1..series.len())
        .flat_map(|t| (0..p).map(move |k| series[t - k]))
        .collect();
    PointCloud::new(p, coords)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_pair(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::invalid(format!(
            "point clouds have dimensions {} and {}",
            a.dim, b.dim
        )));
    }
    Ok(())
}

fn directed_brute(a: &PointCloud, b: &PointCloud) -> f64 {
    a.coords
        .par_chunks_exact(a.dim)
        .map(|pa| b.points().map(|pb| distance(pa, pb)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Exact Hausdorff distance by comparing every pair of points.
pub fn hausdorff_brute_force(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    Ok(directed_brute(a, b).max(directed_brute(b, a)))
}

const GRID_MAX_DIM: usize = 3;

/// Uniform bucket grid over one point cloud for nearest-neighbour queries.
struct Grid<'a> {
    cloud: &'a PointCloud,
    origin: [f64; GRID_MAX_DIM],
    cell: f64,
    extent: [i64; GRID_MAX_DIM],
    buckets: HashMap<[i64; GRID_MAX_DIM], Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(cloud: &'a PointCloud) -> Grid<'a> {
        let d = cloud.dim;
        let mut lo = [0.0; GRID_MAX_DIM];
        let mut hi = [0.0; GRID_MAX_DIM];
        for j in 0..d {
            lo[j] = cloud.points().map(|p| p[j]).fold(f64::INFINITY, f64::min);
            hi[j] = cloud.points().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
        }
        let span = (0..d).map(|j| hi[j] - lo[j]).fold(0.0, f64::max);
        let per_axis = (cloud.len() as f64).powf(1.0 / d as f64).max(1.0);
        let cell = if span > 0.0 { span / per_axis } else { 1.0 };
        let mut grid = Grid {
            cloud,
            origin: lo,
            cell,
            extent: [0; GRID_MAX_DIM],
            buckets: HashMap::new(),
        };
        for (i, p) in cloud.points().enumerate() {
            let key = grid.key(p);
            for j in 0..d {
                grid.extent[j] = grid.extent[j].max(key[j]);
            }
            grid.buckets.entry(key).or_default().push(i);
        }
        grid
    }

    fn key(&self, p: &[f64]) -> [i64; GRID_MAX_DIM] {
        let mut k = [0; GRID_MAX_DIM];
        for (j, v) in p.iter().enumerate() {
            k[j] = ((v - self.origin[j]) / self.cell).floor() as i64;
        }
        k
    }

    fn nearest(&self, q: &[f64]) -> f64 {
        let d = self.cloud.dim;
        let kq = self.key(q);
        let max_ring = (0..d)
            .map(|j| kq[j].abs().max((kq[j] - self.extent[j]).abs()))
            .max()
            .unwrap_or(0);
        let mut best = f64::INFINITY;
        for r in 0..=max_ring {
            let mut lo = [0i64; GRID_MAX_DIM];
            let mut hi = [0i64; GRID_MAX_DIM];
            for j in 0..d {
                lo[j] = (kq[j] - r).max(0);
                hi[j] = (kq[j] + r).min(self.extent[j]);
            }
            let mut cur = lo;
            'cells: loop {
                let ring = (0..d).map(|j| (cur[j] - kq[j]).abs()).max().unwrap_or(0);
                if ring == r {
                    if let Some(idx) = self.buckets.get(&cur) {
                        for &i in idx {
                            best = best.min(distance(q, self.cloud.point(i)));
                        }
                    }
                }
                for j in 0..d {
                    if cur[j] < hi[j] {
                        cur[j] += 1;
                        continue 'cells;
                    }
                    cur[j] = lo[j];
                }
                break;
            }
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

fn directed_grid(a: &PointCloud, b: &PointCloud) -> f64 {
    let grid = Grid::new(b);
    a.coords
        .par_chunks_exact(a.dim)
        .map(|q| grid.nearest(q))
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance using bucket grids; agrees with
/// [`hausdorff_brute_force`]. Limited to dimension at most 3.
pub fn hausdorff_grid(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    if a.dim > GRID_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "grid search supports dimension <= {GRID_MAX_DIM}, got {}",
            a.dim
        )));
    }
    Ok(directed_grid(a, b).max(directed_grid(b, a)))
}

/// `max(sup_a inf_b |a-b|, sup_b inf_a |a-b|)`.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    if a.dim <= GRID_MAX_DIM && a.len() * b.len() > 1 << 16 {
        hausdorff_grid(a, b)
    } else {
        hausdorff_brute_force(a, b)
    }
}

/// Sizes of the recovery experiment. Both fits start after the burn-in;
/// the short-term fit is scored on the `validate` states after its training
/// window, the attractor fit by the Hausdorff distance between 2-D delay
/// embeddings of a free rollout and of the true continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct HenonExperiment {
    pub params: HenonParams,
    pub burn_in: usize,
    pub train: usize,
    pub validate: usize,
    pub attractor_train: usize,
    pub attractor_steps: usize,
    pub lambda: f64,
}

impl HenonExperiment {
    pub fn new(params: HenonParams) -> HenonExperiment {
        HenonExperiment {
            params,
            burn_in: 1000,
            train: 920,
            validate: 80,
            attractor_train: 1000,
            attractor_steps: 3000,
            lambda: 0.0,
        }
    }

    fn observed(&self) -> Result<Vec<f64>> {
        let needed = (self.train + self.validate).max(self.attractor_train + self.attractor_steps);
        let orbit = simulate_henon(&self.params, self.burn_in + needed - 1)?;
        Ok(orbit.x[self.burn_in..].to_vec())
    }

    pub fn run(&self, p_values: &[usize]) -> Result<Vec<HenonCell>> {
        if p_values.is_empty() {
            return Err(Error::invalid("no memory depths given"));
        }
        if self.train == 0 || self.attractor_train == 0 {
            return Err(Error::invalid("training windows must be nonempty"));
        }
        let x = self.observed()?;
        let short_train = Trajectory::from_scalar(&x[..self.train]);
        let held_out = Trajectory::from_scalar(&x[self.train..self.train + self.validate]);
        let long_train = Trajectory::from_scalar(&x[..self.attractor_train]);
        let continuation = &x[self.attractor_train..self.attractor_train + self.attractor_steps];
        p_values
            .par_iter()
            .map(|&p| {
                let dict = Dictionary::henon(p)?;
                let model = fit(&build_hankel(std::slice::from_ref(&short_train), p)?, &dict, self.lambda)?;
                let exact = exact_memory_coefficients(&self.params, p)?;
                let coefficient_error = model
                    .xi
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let validation_error = match model.rollout(&short_train, self.validate) {
                    Ok(pred) if self.validate > 0 => relative_error(&held_out, &pred)?,
                    Ok(_) => 0.0,
                    Err(Error::Diverged { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                let attractor_model =
                    fit(&build_hankel(std::slice::from_ref(&long_train), p)?, &dict, self.lambda)?;
                let (hausdorff, reconstruction) = match attractor_model.rollout(&long_train, self.attractor_steps) {
                    Ok(pred) if self.attractor_steps >= 2 => {
                        let truth = delay_embed(continuation, 2)?;
                        let rec = delay_embed(pred.as_flat(), 2)?;
                        (hausdorff_distance(&truth, &rec)?, Some(rec))
                    }
                    Ok(_) => (f64::NAN, None),
                    Err(Error::Diverged { .. }) => (f64::INFINITY, None),
                    Err(e) => return Err(e),
                };
                Ok(HenonCell {
                    p,
                    model,
                    coefficient_error,
                    validation_error,
                    hausdorff,
                    reconstruction,
                })
            })
            .collect()
    }

    /// 2-D delay embedding of the true continuation the attractor fit is
    /// compared against.
    pub fn true_attractor(&self) -> Result<PointCloud> {
        let x = self.observed()?;
        delay_embed(&x[self.attractor_train..self.attractor_train + self.attractor_steps], 2)
    }
}

#[derive(Debug, Clone)]
pub struct HenonCell {
    pub p: usize,
    /// Fit on the short-term training window.
    pub model: NarModel,
    /// Largest deviation from [`exact_memory_coefficients`].
    pub coefficient_error: f64,
    /// `+∞` if the rollout diverged.
    pub validation_error: f64,
    /// `+∞` if the rollout diverged.
    pub hausdorff: f64,
    /// 2-D delay embedding of the rolled-out attractor.
    pub reconstruction: Option<PointCloud>,
}
