use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, LaplacianKind, PointGrid};
use crate::kernels::KernelProfile;
use crate::manifolds::{sample_mixture, MixtureModel, Patch};
use crate::scalar::{dist_sq, dot, Scalar};

use super::functions::{ModelFunction, NodeContext};

/// Restricts the outer integral to `B(center, radius + ε)`; the caller
/// guarantees `u/√conv` is constant outside `B(center, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window<T> {
    pub center: Vec<T>,
    pub radius: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlocalOptions<T> {
    /// Cells per ε along each axis, indexed by patch dimension minus one.
    pub nodes_per_eps: Vec<usize>,
    /// Per-axis subsamples in cells cut by the ball boundary (dimension ≥ 2).
    pub boundary_subsamples: usize,
    pub window: Option<Window<T>>,
    /// Node budget; the resolution is halved until the fine grid fits.
    pub max_nodes: usize,
    /// Raises the warning flag when the error estimate exceeds it.
    pub tol: Option<T>,
    /// Sample count for the Monte Carlo path (total dimension above four).
    pub monte_carlo_samples: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for NonlocalOptions<T> {
    fn default() -> Self {
        Self {
            nodes_per_eps: vec![128, 8, 4],
            boundary_subsamples: 6,
            window: None,
            max_nodes: 600_000,
            tol: None,
            monte_carlo_samples: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlocalMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlocalEnergy<T> {
    pub value: T,
    /// `|E_h - E_{2h}| / 3` (second-order extrapolation), or the spread of
    /// two independent Monte Carlo runs.
    pub error_estimate: T,
    pub nodes: usize,
    pub method: NonlocalMethod,
    pub warning: Option<String>,
}

/// `(1/ε²) ∫∫ η(|x-y|/ε) (u(x)/√c(x) - u(y)/√c(y))² dμ(x) dμ(y)` with
/// `c = ∫ η(|·-y|/ε) dμ(y)`.
pub fn nonlocal_energy<T: Scalar, F: ModelFunction<T>>(
    model: &MixtureModel<T>,
    u: &F,
    profile: &KernelProfile<T>,
    epsilon: T,
    opts: &NonlocalOptions<T>,
) -> Result<NonlocalEnergy<T>> {
    model.validate()?;
    if !(epsilon > T::zero() && epsilon.is_finite()) {
        return Err(Error::Domain(format!("ε must be positive, got {epsilon}")));
    }
    if let Some(w) = &opts.window {
        if w.center.len() != model.ambient_dim {
            return Err(Error::LengthMismatch { expected: model.ambient_dim, got: w.center.len() });
        }
        if !(w.radius >= T::zero()) {
            return Err(Error::Domain("window radius must be non-negative".into()));
        }
    }
    if model.max_dim() > 2 {
        return monte_carlo(model, u, profile, epsilon, opts);
    }
    if opts.nodes_per_eps.len() < model.max_dim() || opts.nodes_per_eps.iter().any(|&k| k < 2) {
        return Err(Error::Domain("nodes_per_eps needs an entry of at least 2 per patch dimension".into()));
    }
    if opts.boundary_subsamples == 0 {
        return Err(Error::Domain("boundary_subsamples must be positive".into()));
    }

    let mut warning = None;
    let mut per_eps = opts.nodes_per_eps.clone();
    loop {
        let count = count_nodes(model, epsilon, &per_eps, opts.window.as_ref());
        if count <= opts.max_nodes {
            break;
        }
        if per_eps.iter().any(|&k| k < 4) {
            return Err(Error::Resolution(format!(
                "{count} nodes exceed the budget of {} even at the coarsest grid",
                opts.max_nodes
            )));
        }
        per_eps.iter_mut().for_each(|k| *k /= 2);
        warning = Some(format!("node budget exceeded; resolution reduced to {per_eps:?} cells per ε"));
    }
    let coarse: Vec<usize> = per_eps.iter().map(|&k| k / 2).collect();
    let (fine_value, nodes) = quadrature(model, u, profile, epsilon, &per_eps, opts)?;
    let (coarse_value, _) = quadrature(model, u, profile, epsilon, &coarse, opts)?;
    let error = (fine_value - coarse_value).abs() / T::lit(3.0);
    if let Some(tol) = opts.tol {
        if error > tol {
            let msg = format!("error estimate {error} exceeds tolerance {tol}");
            warning = Some(match warning {
                Some(w) => format!("{w}; {msg}"),
                None => msg,
            });
        }
    }
    if let Some(w) = &warning {
        log::warn!("nonlocal energy: {w}");
    }
    Ok(NonlocalEnergy { value: fine_value, error_estimate: error, nodes, method: NonlocalMethod::Quadrature, warning })
}

fn monte_carlo<T: Scalar, F: ModelFunction<T>>(
    model: &MixtureModel<T>,
    u: &F,
    profile: &KernelProfile<T>,
    epsilon: T,
    opts: &NonlocalOptions<T>,
) -> Result<NonlocalEnergy<T>> {
    let run = |seed: u64| -> Result<T> {
        let cloud = sample_mixture(model, opts.monte_carlo_samples, seed)?;
        let graph = build_graph(&cloud, epsilon, profile)?;
        let deg = graph.degrees();
        let values: Vec<T> = (0..cloud.len())
            .map(|i| {
                let comp = cloud.labels[i];
                let dim = model.components[comp].patch.dim();
                let ctx = NodeContext {
                    component: comp,
                    local: &cloud.local_coords(i)[..dim],
                    point: cloud.point(i),
                    conv: deg[i],
                    epsilon,
                };
                u.eval(model, &ctx)
            })
            .collect();
        graph.energy(LaplacianKind::NormalizedSym, &values)
    };
    let a = run(opts.seed)?;
    let b = run(opts.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let value = (a + b) / T::lit(2.0);
    let error = (a - b).abs();
    let warning = match opts.tol {
        Some(tol) if error > tol => Some(format!("Monte Carlo spread {error} exceeds tolerance {tol}")),
        _ => None,
    };
    Ok(NonlocalEnergy {
        value,
        error_estimate: error,
        nodes: 2 * opts.monte_carlo_samples,
        method: NonlocalMethod::MonteCarlo,
        warning,
    })
}

/// Midpoint cells of one patch.
struct CellGrid<T> {
    component: usize,
    dim: usize,
    counts: Vec<usize>,
    h: Vec<T>,
    start: Vec<T>,
    circle: bool,
    /// Cell index to node id for 1-d patches (`u32::MAX` when not kept).
    lookup: Vec<u32>,
}

impl<T: Scalar> CellGrid<T> {
    fn new(component: usize, patch: &Patch<T>, epsilon: T, per_eps: usize) -> Self {
        let target = epsilon / T::from_usize_lossy(per_eps);
        let (lengths, start, circle) = match patch {
            Patch::Flat { lengths, .. } => (lengths.clone(), lengths.iter().map(|&l| -l / T::lit(2.0)).collect(), false),
            Patch::Circle { radius, .. } => (vec![T::lit(2.0) * T::PI() * *radius], vec![T::zero()], true),
        };
        let counts: Vec<usize> = lengths
            .iter()
            .map(|&l| (l / target).ceil().to_usize().unwrap_or(1).max(1))
            .collect();
        let h = lengths.iter().zip(&counts).map(|(&l, &c)| l / T::from_usize_lossy(c)).collect();
        Self { component, dim: patch.dim(), counts, h, start, circle, lookup: Vec::new() }
    }

    fn mid(&self, axis: usize, i: usize) -> T {
        self.start[axis] + (T::from_usize_lossy(i) + T::lit(0.5)) * self.h[axis]
    }

    fn cell_volume(&self) -> T {
        self.h.iter().fold(T::one(), |a, &b| a * b)
    }

    fn half_diagonal(&self) -> T {
        self.h.iter().map(|&x| x * x).sum::<T>().sqrt() / T::lit(2.0)
    }

    /// Per-axis index ranges that can hold cells within `radius` of `center`.
    fn ranges(&self, patch: &Patch<T>, window: Option<(&[T], T)>) -> Option<Vec<(usize, usize)>> {
        let full: Vec<(usize, usize)> = self.counts.iter().map(|&c| (0, c)).collect();
        let Some((center, radius)) = window else { return Some(full) };
        if self.circle {
            return (patch.distance(center) <= radius).then_some(full);
        }
        let c = patch.local_coords(center);
        let foot = patch.embed(&c);
        let perp = dist_sq(center, &foot);
        if perp > radius * radius {
            return None;
        }
        let r = (radius * radius - perp).sqrt();
        let mut out = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let lo = ((c[j] - r - self.start[j]) / self.h[j]).floor();
            let hi = ((c[j] + r - self.start[j]) / self.h[j]).ceil();
            let clamp = |v: T| v.max(T::zero()).min(T::from_usize_lossy(self.counts[j])).to_usize().unwrap_or(0);
            let (a, b) = (clamp(lo), clamp(hi));
            if a >= b {
                return None;
            }
            out.push((a, b));
        }
        Some(out)
    }
}

fn window_radii<T: Scalar>(window: Option<&Window<T>>, epsilon: T, slack: T) -> Option<(&[T], T, T)> {
    window.map(|w| (&w.center[..], w.radius + T::lit(3.0) * epsilon + slack, w.radius + epsilon))
}

fn grid_slack<T: Scalar>(grids: &[CellGrid<T>]) -> T {
    grids.iter().map(|g| g.half_diagonal()).fold(T::zero(), T::max) * T::lit(4.0)
}

fn count_nodes<T: Scalar>(model: &MixtureModel<T>, epsilon: T, per_eps: &[usize], window: Option<&Window<T>>) -> usize {
    let grids: Vec<CellGrid<T>> = model
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| CellGrid::new(i, &c.patch, epsilon, per_eps[c.patch.dim() - 1]))
        .collect();
    let slack = grid_slack(&grids);
    let radii = window_radii(window, epsilon, slack);
    grids
        .iter()
        .zip(&model.components)
        .map(|(g, c)| match g.ranges(&c.patch, radii.map(|(x, r, _)| (x, r))) {
            Some(r) => r.iter().map(|(a, b)| b - a).product(),
            None => 0,
        })
        .sum()
}

struct Nodes<T> {
    ambient: usize,
    local_stride: usize,
    points: Vec<T>,
    local: Vec<T>,
    component: Vec<usize>,
    /// Index of the owning `CellGrid`'s 1-d cell, for interpolation.
    cell: Vec<usize>,
    /// `α ρ` at the cell midpoint.
    density: Vec<T>,
    /// `α ρ · cell volume`
    mass: Vec<T>,
    outer: Vec<bool>,
}

impl<T: Scalar> Nodes<T> {
    fn len(&self) -> usize {
        self.component.len()
    }

    fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.ambient..(i + 1) * self.ambient]
    }

    fn local(&self, i: usize, dim: usize) -> &[T] {
        &self.local[i * self.local_stride..i * self.local_stride + dim]
    }
}

fn build_nodes<T: Scalar>(
    model: &MixtureModel<T>,
    grids: &mut [CellGrid<T>],
    radii: Option<(&[T], T, T)>,
) -> Nodes<T> {
    let stride = model.max_dim();
    let mut nodes = Nodes {
        ambient: model.ambient_dim,
        local_stride: stride,
        points: Vec::new(),
        local: Vec::new(),
        component: Vec::new(),
        cell: Vec::new(),
        density: Vec::new(),
        mass: Vec::new(),
        outer: Vec::new(),
    };
    for g in grids.iter_mut() {
        let c = &model.components[g.component];
        let Some(ranges) = g.ranges(&c.patch, radii.map(|(x, r, _)| (x, r))) else {
            if g.dim == 1 {
                g.lookup = vec![u32::MAX; g.counts[0]];
            }
            continue;
        };
        if g.dim == 1 {
            g.lookup = vec![u32::MAX; g.counts[0]];
        }
        let vol = g.cell_volume();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let mut s = vec![T::zero(); g.dim];
        loop {
            for j in 0..g.dim {
                s[j] = g.mid(j, idx[j]);
            }
            let x = c.patch.embed(&s);
            let (keep, outer) = match radii {
                Some((center, keep_r, outer_r)) => {
                    let d2 = dist_sq(&x, center);
                    (d2 <= keep_r * keep_r, d2 <= outer_r * outer_r)
                }
                None => (true, true),
            };
            if keep {
                let id = nodes.len();
                if g.dim == 1 {
                    g.lookup[idx[0]] = id as u32;
                }
                let rho = c.alpha * c.density.value(&c.patch, &s);
                nodes.points.extend_from_slice(&x);
                nodes.local.extend_from_slice(&s);
                nodes.local.extend(std::iter::repeat(T::zero()).take(stride - g.dim));
                nodes.component.push(g.component);
                nodes.cell.push(if g.dim == 1 { idx[0] } else { 0 });
                nodes.density.push(rho);
                nodes.mass.push(rho * vol);
                nodes.outer.push(outer);
            }
            let mut j = 0;
            while j < g.dim {
                idx[j] += 1;
                if idx[j] < ranges[j].1 {
                    break;
                }
                idx[j] = ranges[j].0;
                j += 1;
            }
            if j == g.dim {
                break;
            }
        }
    }
    nodes
}

/// Piece of a 1-d cell inside `B(x, ε)`: cell index, local midpoint of the
/// piece, piece length.
struct Piece<T> {
    cell: usize,
    mid: T,
    len: T,
    full: bool,
}

fn line_pieces<T: Scalar>(grid: &CellGrid<T>, patch: &Patch<T>, x: &[T], epsilon: T, out: &mut Vec<Piece<T>>) {
    out.clear();
    let h = grid.h[0];
    let n = grid.counts[0];
    let (lo_arc, hi_arc, offset) = match patch {
        Patch::Flat { origin, frame, lengths } => {
            let rel: Vec<T> = x.iter().zip(origin).map(|(&a, &b)| a - b).collect();
            let s = dot(&rel, &frame[0]);
            let perp = (dot(&rel, &rel) - s * s).max(T::zero());
            if perp > epsilon * epsilon {
                return;
            }
            let r = (epsilon * epsilon - perp).sqrt();
            let half = lengths[0] / T::lit(2.0);
            let (a, b) = ((s - r).max(-half), (s + r).min(half));
            if b <= a {
                return;
            }
            (a + half, b + half, -half)
        }
        Patch::Circle { center, radius, frame } => {
            let rel: Vec<T> = x.iter().zip(center).map(|(&a, &b)| a - b).collect();
            let a = dot(&rel, &frame[0]);
            let b = dot(&rel, &frame[1]);
            let in_plane = (a * a + b * b).sqrt();
            let q = (dot(&rel, &rel) + *radius * *radius - epsilon * epsilon) / (T::lit(2.0) * *radius);
            if q > in_plane {
                return;
            }
            if q <= -in_plane {
                for j in 0..n {
                    out.push(Piece { cell: j, mid: grid.mid(0, j), len: h, full: true });
                }
                return;
            }
            let half_angle = (q / in_plane).max(-T::one()).min(T::one()).acos();
            let phi = b.atan2(a);
            (*radius * (phi - half_angle), *radius * (phi + half_angle), T::zero())
        }
    };
    let first = (lo_arc / h).floor().to_i64().unwrap_or(0);
    let last = (hi_arc / h).floor().to_i64().unwrap_or(0);
    let period = T::from_usize_lossy(n) * h;
    for j in first..=last {
        let (cell, wraps) = if grid.circle {
            (j.rem_euclid(n as i64) as usize, j.div_euclid(n as i64))
        } else {
            if j < 0 || j >= n as i64 {
                continue;
            }
            (j as usize, 0)
        };
        let cell_lo = T::from_i64(j).unwrap_or_else(T::zero) * h;
        let a = lo_arc.max(cell_lo);
        let b = hi_arc.min(cell_lo + h);
        let len = b - a;
        if len <= T::zero() {
            continue;
        }
        let full = a == cell_lo && b == cell_lo + h;
        let mid = (a + b) / T::lit(2.0) - T::from_i64(wraps).unwrap_or_else(T::zero) * period + offset;
        out.push(Piece { cell, mid: if full { grid.mid(0, cell) } else { mid }, len, full });
    }
}

/// `∫_{cell ∩ B(x, ε)} η(|x - y|/ε) dy` for a flat cell of dimension ≥ 2,
/// without the density factor.
fn box_weight<T: Scalar>(
    profile: &KernelProfile<T>,
    epsilon: T,
    s_x: &[T],
    perp: T,
    mid: &[T],
    h: &[T],
    vol: T,
    subsamples: usize,
) -> T {
    let eps2 = epsilon * epsilon;
    let mut near = perp;
    let mut far = perp;
    let mut centre = perp;
    for j in 0..mid.len() {
        let off = (s_x[j] - mid[j]).abs();
        let half = h[j] / T::lit(2.0);
        let gap = (off - half).max(T::zero());
        near += gap * gap;
        far += (off + half) * (off + half);
        centre += off * off;
    }
    if near > eps2 {
        return T::zero();
    }
    if far <= eps2 {
        return vol * profile.weight_sq(centre, epsilon);
    }
    let d = mid.len();
    let s = subsamples;
    let sf = T::from_usize_lossy(s);
    let mut idx = vec![0usize; d];
    let mut total = T::zero();
    loop {
        let mut r2 = perp;
        for j in 0..d {
            let t = mid[j] - h[j] / T::lit(2.0) + (T::from_usize_lossy(idx[j]) + T::lit(0.5)) * h[j] / sf;
            let o = s_x[j] - t;
            r2 += o * o;
        }
        total += profile.weight_sq(r2, epsilon);
        let mut j = 0;
        while j < d {
            idx[j] += 1;
            if idx[j] < s {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    total * vol / sf.powi(d as i32)
}

/// Local coordinates of `x` relative to a flat patch plus the squared
/// distance to its affine span.
fn flat_frame<T: Scalar>(patch: &Patch<T>, x: &[T]) -> (Vec<T>, T) {
    let s = patch.local_coords(x);
    let foot = patch.embed(&s);
    (s, dist_sq(x, &foot))
}

fn quadrature<T: Scalar, F: ModelFunction<T>>(
    model: &MixtureModel<T>,
    u: &F,
    profile: &KernelProfile<T>,
    epsilon: T,
    per_eps: &[usize],
    opts: &NonlocalOptions<T>,
) -> Result<(T, usize)> {
    let mut grids: Vec<CellGrid<T>> = model
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| CellGrid::new(i, &c.patch, epsilon, per_eps[c.patch.dim() - 1]))
        .collect();
    let slack = grid_slack(&grids);
    let radii = window_radii(opts.window.as_ref(), epsilon, slack);
    let nodes = build_nodes(model, &mut grids, radii);
    if nodes.len() == 0 {
        return Err(Error::EmptyCloud);
    }
    let grid_of: Vec<usize> = {
        let mut v = vec![0; model.len()];
        for (k, g) in grids.iter().enumerate() {
            v[g.component] = k;
        }
        v
    };

    // nodes on patches of dimension ≥ 2 are found through a point grid
    let area_nodes: Vec<usize> = (0..nodes.len()).filter(|&i| grids[grid_of[nodes.component[i]]].dim >= 2).collect();
    let area_reach = epsilon
        + grids.iter().filter(|g| g.dim >= 2).map(|g| g.half_diagonal()).fold(T::zero(), T::max);
    let area_points: Vec<T> = area_nodes.iter().flat_map(|&i| nodes.point(i).iter().copied()).collect();
    let area_grid = if area_nodes.is_empty() {
        None
    } else {
        Some(PointGrid::new(&area_points, nodes.ambient, area_reach).ok_or_else(|| {
            Error::Resolution("quadrature grid too fine for the bounding box".into())
        })?)
    };
    let line_grids: Vec<usize> = (0..grids.len()).filter(|&k| grids[k].dim == 1).collect();

    // visits (weight, neighbor value source) for every cell touching B(x, ε)
    let for_each_cell = |i: usize, pieces: &mut Vec<Piece<T>>, f: &mut dyn FnMut(T, Source<T>)| {
        let x = nodes.point(i);
        for &k in &line_grids {
            let g = &grids[k];
            let c = &model.components[g.component];
            line_pieces(g, &c.patch, x, epsilon, pieces);
            for p in pieces.iter() {
                let node = if p.full { g.lookup[p.cell] } else { u32::MAX };
                let (eta, rho) = if node == u32::MAX {
                    let y = c.patch.embed(&[p.mid]);
                    (profile.weight_sq(dist_sq(x, &y), epsilon), c.alpha * c.density.value(&c.patch, &[p.mid]))
                } else {
                    let j = node as usize;
                    (profile.weight_sq(dist_sq(x, nodes.point(j)), epsilon), nodes.density[j])
                };
                f(p.len * eta * rho, Source::Line { grid: k, cell: p.cell, mid: p.mid, full: p.full });
            }
        }
        if let Some(ag) = &area_grid {
            let mut frames: Vec<Option<(Vec<T>, T)>> = vec![None; model.len()];
            ag.visit(x, |a| {
                let j = area_nodes[a];
                let comp = nodes.component[j];
                let g = &grids[grid_of[comp]];
                let patch = &model.components[comp].patch;
                let (s_x, perp) = frames[comp].get_or_insert_with(|| flat_frame(patch, x));
                let w = box_weight(
                    profile,
                    epsilon,
                    s_x,
                    *perp,
                    nodes.local(j, g.dim),
                    &g.h,
                    g.cell_volume(),
                    opts.boundary_subsamples,
                );
                if w > T::zero() {
                    f(w * nodes.density[j], Source::Node(j));
                }
            });
        }
    };

    let conv: Vec<T> = (0..nodes.len())
        .into_par_iter()
        .map_init(Vec::new, |pieces, i| {
            let mut total = T::zero();
            for_each_cell(i, pieces, &mut |w, _| total += w);
            total
        })
        .collect();
    let values: Vec<T> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let comp = nodes.component[i];
            let dim = grids[grid_of[comp]].dim;
            let ctx = NodeContext {
                component: comp,
                local: nodes.local(i, dim),
                point: nodes.point(i),
                conv: conv[i],
                epsilon,
            };
            u.eval(model, &ctx) / conv[i].sqrt()
        })
        .collect();

    let line_value = |k: usize, cell: usize, mid: T, full: bool, fallback: T| -> T {
        let g = &grids[k];
        let at = |c: usize| match g.lookup[c] {
            u32::MAX => None,
            id => Some(values[id as usize]),
        };
        let Some(v0) = at(cell) else { return fallback };
        if full {
            return v0;
        }
        let n = g.counts[0];
        let t = (mid - g.mid(0, cell)) / g.h[0];
        let neighbor = if t >= T::zero() {
            if cell + 1 < n {
                Some(cell + 1)
            } else if g.circle {
                Some(0)
            } else {
                None
            }
        } else if cell > 0 {
            Some(cell - 1)
        } else if g.circle {
            Some(n - 1)
        } else {
            None
        };
        match neighbor.and_then(at) {
            Some(v1) => v0 + t.abs() * (v1 - v0),
            None => v0,
        }
    };

    let rows: Vec<T> = (0..nodes.len())
        .into_par_iter()
        .map_init(Vec::new, |pieces, i| {
            if !nodes.outer[i] {
                return T::zero();
            }
            let vx = values[i];
            let mut acc = T::zero();
            for_each_cell(i, pieces, &mut |w, src| {
                let vy = match src {
                    Source::Node(j) => values[j],
                    Source::Line { grid, cell, mid, full } => line_value(grid, cell, mid, full, vx),
                };
                acc += w * (vx - vy) * (vx - vy);
            });
            nodes.mass[i] * acc
        })
        .collect();
    let total: T = rows.iter().copied().sum();
    Ok((total / (epsilon * epsilon), nodes.len()))
}

#[derive(Clone, Copy)]
enum Source<T> {
    Node(usize),
    Line { grid: usize, cell: usize, mid: T, full: bool },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{LocalFunction, SmoothFunctionSpec};
    use crate::presets;

    #[test]
    fn constant_ratio_has_zero_energy_on_circle() {
        // u = √conv makes u/√conv constant
        struct SqrtConv;
        impl ModelFunction<f64> for SqrtConv {
            fn eval(&self, _: &MixtureModel<f64>, ctx: &NodeContext<'_, f64>) -> f64 {
                ctx.conv.sqrt()
            }
        }
        let model = presets::unit_circle::<f64>();
        let opts = NonlocalOptions { nodes_per_eps: vec![32], ..Default::default() };
        let e = nonlocal_energy(&model, &SqrtConv, &KernelProfile::Indicator, 0.2, &opts).unwrap();
        assert!(e.value.abs() < 1e-20, "{}", e.value);
    }

    #[test]
    fn circle_matches_closed_form() {
        let model = presets::unit_circle::<f64>();
        let u = SmoothFunctionSpec::new(vec![LocalFunction::CircleMode { amplitude: 1.0, m: 1, sine: false }]);
        let opts = NonlocalOptions { nodes_per_eps: vec![256], ..Default::default() };
        for eps in [0.2, 0.1] {
            let e = nonlocal_energy(&model, &u, &KernelProfile::Indicator, eps, &opts).unwrap();
            // independent closed form on the unit circle for u = cos(θ), with
            // u normalized by √conv: (φ - sin φ)/(ε² φ), φ = 2 asin(ε/2)
            let phi = 2.0 * (eps / 2.0f64).asin();
            let exact = (phi - phi.sin()) / (eps * eps * phi);
            let err = (e.value - exact).abs();
            assert!(err < 1e-6, "ε={eps}: {} vs {exact}", e.value);
            assert!(err < 2.0 * e.error_estimate && e.error_estimate < 4.0 * err, "{err} vs {}", e.error_estimate);
        }
    }
}
