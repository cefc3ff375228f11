//! Graph distances for the regularized metric.

use super::cometric::{segment_length, segment_lengths, MAX_DIM};
use crate::error::{Error, Result};
use crate::geometry::{Grid, VectorFieldSet};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Distances from one node for one regularization level.
#[derive(Clone, Debug)]
pub struct DistanceField {
    pub grid: Grid,
    pub source: usize,
    pub epsilon: f64,
    pub stencil_radius: usize,
    pub values: Vec<f64>,
    pub predecessor: Vec<usize>,
}

impl DistanceField {
    /// Node chain from the source to `target`.
    pub fn path_to(&self, target: usize) -> Vec<usize> {
        let mut out = vec![target];
        let mut cur = target;
        while cur != self.source && self.predecessor[cur] != usize::MAX {
            cur = self.predecessor[cur];
            out.push(cur);
        }
        out.reverse();
        out
    }
}

/// Primitive integer offsets in `[-r, r]^d`.
pub fn stencil_offsets(d: usize, r: usize) -> Vec<Vec<i64>> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let r = r as i64;
    let side = (2 * r + 1) as usize;
    let mut out = Vec::new();
    for code in 0..side.pow(d as u32) {
        let mut c = code;
        let v: Vec<i64> = (0..d)
            .map(|_| {
                let x = (c % side) as i64 - r;
                c /= side;
                x
            })
            .collect();
        if v.iter().fold(0, |g, &x| gcd(g, x)) == 1 {
            out.push(v);
        }
    }
    out
}

/// Field coefficients at every midpoint between two nodes, i.e. on the
/// grid with half spacing. Shared by all regularization levels.
pub(crate) struct MidpointCache {
    strides: Vec<usize>,
    nfields: usize,
    d: usize,
    coeffs: Vec<f64>,
}

impl MidpointCache {
    pub fn new(grid: &Grid, fields: &VectorFieldSet) -> Self {
        let d = grid.dim();
        let dims: Vec<usize> = grid.dims().iter().map(|&n| 2 * n - 1).collect();
        let mut strides = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let total: usize = dims.iter().product();
        let nfields = fields.len();
        let block = nfields * d;
        let mut coeffs = vec![0.0; total * block];
        coeffs
            .par_chunks_mut(block)
            .enumerate()
            .for_each(|(k, out)| {
                let mut rem = k;
                let mut x = vec![0.0; d];
                for a in (0..d).rev() {
                    let i = rem % dims[a];
                    rem /= dims[a];
                    x[a] = grid.origin()[a] + 0.5 * i as f64 * grid.spacing()[a];
                }
                for (j, f) in fields.fields().iter().enumerate() {
                    f.eval_into(&x, &mut out[j * d..(j + 1) * d]);
                }
            });
        Self {
            strides,
            nfields,
            d,
            coeffs,
        }
    }

    fn at(&self, doubled: &[i64]) -> &[f64] {
        let k: usize = doubled
            .iter()
            .zip(&self.strides)
            .map(|(&i, &s)| i as usize * s)
            .sum();
        let b = self.nfields * self.d;
        &self.coeffs[k * b..(k + 1) * b]
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Key {
    d: f64,
    node: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (distance, node index)
        other
            .d
            .total_cmp(&self.d)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct EdgeModel<'a> {
    grid: &'a Grid,
    cache: &'a MidpointCache,
    offsets: Vec<Vec<i64>>,
    physical: Vec<[f64; MAX_DIM]>,
}

impl<'a> EdgeModel<'a> {
    pub fn new(grid: &'a Grid, cache: &'a MidpointCache, r: usize) -> Self {
        let offsets = stencil_offsets(grid.dim(), r);
        let physical = offsets
            .iter()
            .map(|o| {
                let mut p = [0.0; MAX_DIM];
                for (a, &k) in o.iter().enumerate() {
                    p[a] = k as f64 * grid.spacing()[a];
                }
                p
            })
            .collect();
        Self {
            grid,
            cache,
            offsets,
            physical,
        }
    }

    /// Calls `f(neighbor, offset index, coefficients at the midpoint)` for
    /// every in-box neighbor of `node`.
    fn for_each_neighbor(&self, node: usize, mut f: impl FnMut(usize, usize, &[f64])) {
        let d = self.grid.dim();
        let dims = self.grid.dims();
        let strides = self.grid.strides();
        let mut m = [0i64; MAX_DIM];
        let mut rem = node;
        for a in 0..d {
            m[a] = (rem / strides[a]) as i64;
            rem %= strides[a];
        }
        let mut doubled = [0i64; MAX_DIM];
        'edges: for (k, o) in self.offsets.iter().enumerate() {
            let mut q = 0usize;
            for a in 0..d {
                let v = m[a] + o[a];
                if v < 0 || v >= dims[a] as i64 {
                    continue 'edges;
                }
                q += v as usize * strides[a];
                doubled[a] = 2 * m[a] + o[a];
            }
            f(q, k, self.cache.at(&doubled[..d]));
        }
    }

    /// Calls `f(neighbor, cost)` for every in-box neighbor of `node`.
    pub fn for_each_edge(&self, node: usize, epsilon: f64, mut f: impl FnMut(usize, f64)) {
        let d = self.grid.dim();
        self.for_each_neighbor(node, |q, k, c| {
            f(q, segment_length(c, d, epsilon, &self.physical[k][..d]))
        });
    }

    /// `max_e |c_k(e) - c_{k+1}(e)|` over the edges leaving `node`.
    fn max_level_gaps(&self, node: usize, eps: &[f64], out: &mut [f64]) {
        let d = self.grid.dim();
        let mut costs = vec![0.0; eps.len()];
        self.for_each_neighbor(node, |_, k, c| {
            segment_lengths(c, d, eps, &self.physical[k][..d], &mut costs);
            for (o, w) in out.iter_mut().zip(costs.windows(2)) {
                let gap = (w[1] - w[0]).abs();
                if gap.is_finite() && gap > *o {
                    *o = gap;
                }
            }
        });
    }
}

pub(crate) fn dijkstra(model: &EdgeModel, source: usize, epsilon: f64) -> (Vec<f64>, Vec<usize>) {
    let n = model.grid.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Key {
        d: 0.0,
        node: source,
    });
    while let Some(Key { d, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        model.for_each_edge(node, epsilon, |q, c| {
            let nd = d + c;
            if !done[q] && (nd < dist[q] || (nd == dist[q] && node < pred[q])) {
                dist[q] = nd;
                pred[q] = node;
                heap.push(Key { d: nd, node: q });
            }
        });
    }
    (dist, pred)
}

fn check_fields(grid: &Grid, fields: &VectorFieldSet, source: usize, r: usize) -> Result<()> {
    if fields.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: fields.dim(),
        });
    }
    if grid.dim() > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "distance supports at most {MAX_DIM} dimensions"
        )));
    }
    if source >= grid.len() {
        return Err(Error::InvalidArgument(format!(
            "source node {source} outside the grid"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("stencil radius must be >= 1".into()));
    }
    Ok(())
}

/// Graph distance from `source` for the metric `G_eps^-1`, edges of the
/// radius-`r` stencil costed at their midpoint.
pub fn riemannian_distance_field(
    grid: &Grid,
    fields: &VectorFieldSet,
    epsilon: f64,
    source: usize,
    stencil_radius: usize,
) -> Result<DistanceField> {
    check_fields(grid, fields, source, stencil_radius)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "riemannian distance needs epsilon > 0 (got {epsilon}); use the regularization schedule for the degenerate limit"
        )));
    }
    let cache = MidpointCache::new(grid, fields);
    let model = EdgeModel::new(grid, &cache, stencil_radius);
    let (values, predecessor) = dijkstra(&model, source, epsilon);
    Ok(DistanceField {
        grid: grid.clone(),
        source,
        epsilon,
        stencil_radius,
        values,
        predecessor,
    })
}

/// Strictly decreasing positive regularization levels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularizationSchedule {
    eps: Vec<f64>,
}

impl RegularizationSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidArgument(
                "regularization schedule is empty".into(),
            ));
        }
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) || eps.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidArgument(
                "schedule must be positive and strictly decreasing".into(),
            ));
        }
        Ok(Self { eps })
    }

    /// `eps0 * 2^-k` for `k = 0..levels`.
    pub fn geometric(eps0: f64, levels: usize) -> Result<Self> {
        Self::new((0..levels).map(|k| eps0 * 0.5f64.powi(k as i32)).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.eps
    }
}

impl Default for RegularizationSchedule {
    fn default() -> Self {
        Self::geometric(1.0, 12).expect("valid default")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub eps: Vec<f64>,
    /// `max_x d_{k+1}(x) - d_k(x)` per consecutive pair.
    pub max_increment: Vec<f64>,
    pub mean_increment: Vec<f64>,
    /// Nodes where the distance dropped as eps decreased.
    pub violations: Vec<usize>,
    pub max_violation: Vec<f64>,
    /// `2 max_e |c_k(e) - c_{k+1}(e)|` over all edges.
    pub tau_mono: Vec<f64>,
    pub node_count: usize,
    pub cauchy_tol: f64,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn total_violations(&self) -> usize {
        self.violations.iter().sum()
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_violation
            .iter()
            .zip(&self.tau_mono)
            .all(|(v, t)| v <= t)
    }
}

/// Distance fields along the schedule and their monotone-convergence audit.
/// The last field is the estimate of the degenerate distance.
pub fn subriemannian_distance(
    grid: &Grid,
    fields: &VectorFieldSet,
    source: usize,
    schedule: &RegularizationSchedule,
    stencil_radius: usize,
) -> Result<(Vec<DistanceField>, ConvergenceReport)> {
    check_fields(grid, fields, source, stencil_radius)?;
    let cache = MidpointCache::new(grid, fields);
    let model = EdgeModel::new(grid, &cache, stencil_radius);
    let eps = schedule.levels();
    let runs: Vec<(Vec<f64>, Vec<usize>)> = eps
        .par_iter()
        .map(|&e| dijkstra(&model, source, e))
        .collect();
    let fields_out: Vec<DistanceField> = runs
        .into_iter()
        .zip(eps)
        .map(|((values, predecessor), &e)| DistanceField {
            grid: grid.clone(),
            source,
            epsilon: e,
            stencil_radius,
            values,
            predecessor,
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..eps.len().saturating_sub(1))
        .map(|k| (k, k + 1))
        .collect();
    let npairs = pairs.len();
    let tau: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .fold(
            || vec![0.0; npairs],
            |mut acc, p| {
                model.max_level_gaps(p, eps, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0.0; npairs],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        )
        .into_iter()
        .map(|g| 2.0 * g)
        .collect();

    let mut max_increment = Vec::new();
    let mut mean_increment = Vec::new();
    let mut violations = Vec::new();
    let mut max_violation = Vec::new();
    for &(a, b) in &pairs {
        let (da, db) = (&fields_out[a].values, &fields_out[b].values);
        let mut mx = 0.0f64;
        let mut sum = 0.0;
        let mut cnt = 0usize;
        let mut viol = 0usize;
        let mut vmax = 0.0f64;
        for (x, y) in da.iter().zip(db) {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let inc = y - x;
            mx = mx.max(inc);
            sum += inc;
            cnt += 1;
            if inc < -1e-12 * x.abs().max(1.0) {
                viol += 1;
                vmax = vmax.max(-inc);
            }
        }
        max_increment.push(mx);
        mean_increment.push(if cnt > 0 { sum / cnt as f64 } else { 0.0 });
        violations.push(viol);
        max_violation.push(vmax);
    }
    let cauchy_tol = 0.02;
    let scale = fields_out
        .last()
        .map(|f| {
            f.values
                .iter()
                .copied()
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0);
    let converged = max_increment
        .last()
        .is_none_or(|&m| m <= cauchy_tol * scale.max(f64::MIN_POSITIVE));
    let report = ConvergenceReport {
        eps: eps.to_vec(),
        max_increment,
        mean_increment,
        violations,
        max_violation,
        tau_mono: tau,
        node_count: grid.len(),
        cauchy_tol,
        converged,
    };
    Ok((fields_out, report))
}
