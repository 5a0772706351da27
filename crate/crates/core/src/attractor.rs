//! Finite approximations of zipper attractors and their invariance residual.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{operator_norm, Matrix, Vector};
use crate::zipper::{uniform_line_zipper, LineZipper, Zipper};

pub const DEFAULT_DEPTH_CAP: usize = 30;

/// Hard ceiling on the number of points a subdivision may produce.
pub const MAX_POINTS: usize = 1 << 22;

/// Steps discarded before the chaos game starts recording.
pub const BURN_IN: usize = 64;

/// Above this many points in total, Hausdorff distances switch from brute
/// force to a bucketed search.
pub const BRUTE_FORCE_LIMIT: usize = 100_000;

const JUNCTION_TOLERANCE: f64 = 1e-9;

/// An ordered sample of an attractor curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Polyline {
    pub points: Vec<Vector>,
    pub params: Option<Vec<f64>>,
    /// Every attractor point lies within this distance of some polyline point.
    pub mesh_bound: f64,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vector::dim)
    }
}

/// Subdivision with parameters taken from equally spaced nodes.
pub fn refine(zipper: &Zipper, depth: usize) -> Result<Polyline> {
    let line = uniform_line_zipper(zipper.signature().clone())?;
    refine_parametrized(zipper, &line, depth)
}

/// Replaces the polyline `P` by `S_1(P) ∪ … ∪ S_m(P)` `depth` times,
/// reversing pieces whose map reverses orientation and merging the shared
/// junction points. Parameters follow the same recursion under `line`.
pub fn refine_parametrized(zipper: &Zipper, line: &LineZipper, depth: usize) -> Result<Polyline> {
    if line.count() != zipper.count() {
        return Err(Error::CountMismatch {
            left: zipper.count(),
            right: line.count(),
        });
    }
    if line.signature() != zipper.signature() {
        return Err(Error::SignatureMismatch);
    }
    if depth > DEFAULT_DEPTH_CAP {
        return Err(Error::DepthCap {
            depth,
            cap: DEFAULT_DEPTH_CAP,
        });
    }
    let m = zipper.count();
    let final_points = (m as f64).powi(depth as i32) * m as f64 + 1.0;
    if final_points > MAX_POINTS as f64 {
        return Err(Error::DepthCap {
            depth,
            cap: max_depth_for(m),
        });
    }

    let nodes = line.nodes();
    let junction_tol = JUNCTION_TOLERANCE.max(2.0 * zipper.options().tolerance);
    let radius = zipper.certificate().radius;
    let mut points = zipper.vertices().to_vec();
    let mut params = nodes.to_vec();
    let mut composites = vec![Matrix::identity(zipper.dim())];
    let mut mesh_bound = radius;

    for _ in 0..depth {
        let mut next_points = Vec::with_capacity(m * points.len());
        let mut next_params = Vec::with_capacity(m * points.len());
        for (i, s) in zipper.maps().iter().enumerate() {
            let mut piece: Vec<Vector> = points.iter().map(|p| s.apply_unchecked(p)).collect();
            let mut piece_params: Vec<f64> = params.iter().map(|&t| line.forward(i, t)).collect();
            if zipper.signature().reverses(i) {
                piece.reverse();
                piece_params.reverse();
            }
            piece_params[0] = nodes[i];
            *piece_params.last_mut().expect("non-empty") = nodes[i + 1];
            let skip = if i == 0 {
                0
            } else {
                let prev = next_points.last().expect("previous piece");
                let gap = piece[0].distance(prev);
                if !(gap <= junction_tol) || next_params.last() != Some(&piece_params[0]) {
                    return Err(Error::JunctionMismatch { piece: i, gap });
                }
                1
            };
            next_points.extend(piece.into_iter().skip(skip));
            next_params.extend(piece_params.into_iter().skip(skip));
        }
        points = next_points;
        params = next_params;

        composites = composites
            .iter()
            .flat_map(|c| {
                zipper
                    .maps()
                    .iter()
                    .map(move |s| s.linear().mul_mat_unchecked(c))
            })
            .collect();
        let level_max = composites.iter().map(operator_norm).fold(0.0, f64::max);
        mesh_bound = mesh_bound.min(level_max * radius);
    }

    Ok(Polyline {
        points,
        params: Some(params),
        mesh_bound,
    })
}

fn max_depth_for(m: usize) -> usize {
    let mut depth = 0;
    let mut count = m as f64 + 1.0;
    while count * (m as f64) <= MAX_POINTS as f64 {
        count *= m as f64;
        depth += 1;
    }
    depth
}

/// Random iteration from `z_0` with a fixed burn-in.
pub fn chaos_game(zipper: &Zipper, count: usize, seed: u64) -> Vec<Vector> {
    chaos_game_stream(zipper, count, seed, 0)
}

/// As [`chaos_game`], on an independent stream: the generator seeded with
/// `seed` is jumped ahead `stream` times (2^128 steps each).
pub fn chaos_game_stream(zipper: &Zipper, count: usize, seed: u64, stream: u32) -> Vec<Vector> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..stream {
        rng.jump();
    }
    let maps = zipper.maps();
    let mut point = zipper.first_vertex().clone();
    for _ in 0..BURN_IN {
        point = maps[rng.gen_range(0..maps.len())].apply_unchecked(&point);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        point = maps[rng.gen_range(0..maps.len())].apply_unchecked(&point);
        out.push(point.clone());
    }
    out
}

/// Symmetric Hausdorff distance between the points of `polyline` and their
/// images `∪ S_i(points)`.
pub fn hausdorff_residual(polyline: &Polyline, zipper: &Zipper) -> f64 {
    let images: Vec<Vector> = zipper
        .maps()
        .iter()
        .flat_map(|s| polyline.points.iter().map(|p| s.apply_unchecked(p)))
        .collect();
    hausdorff_distance(&polyline.points, &images)
}

pub fn hausdorff_distance(a: &[Vector], b: &[Vector]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// `max_{x ∈ from} min_{y ∈ to} ‖x - y‖`, zero if either set is empty.
pub fn directed_hausdorff(from: &[Vector], to: &[Vector]) -> f64 {
    if from.is_empty() || to.is_empty() {
        return 0.0;
    }
    if from.len() + to.len() <= BRUTE_FORCE_LIMIT {
        directed_brute_force(from, to)
    } else {
        BucketGrid::new(to).directed_from(from)
    }
}

pub(crate) fn directed_brute_force(from: &[Vector], to: &[Vector]) -> f64 {
    from.par_iter()
        .map(|x| {
            to.iter()
                .map(|y| squared_distance(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

fn squared_distance(a: &Vector, b: &Vector) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Uniform grid over the first two coordinates. The nearest-neighbour search
/// widens ring by ring and stops once no unvisited cell can be closer, so the
/// result is exact.
pub(crate) struct BucketGrid<'a> {
    points: &'a [Vector],
    origin: [f64; 2],
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    span: i64,
}

fn plane(v: &Vector) -> [f64; 2] {
    [v[0], if v.dim() > 1 { v[1] } else { 0.0 }]
}

impl<'a> BucketGrid<'a> {
    pub(crate) fn new(points: &'a [Vector]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            let q = plane(p);
            for k in 0..2 {
                lo[k] = lo[k].min(q[k]);
                hi[k] = hi[k].max(q[k]);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let cell = (extent / (points.len() as f64).sqrt()).max(extent * 1e-9);
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (idx, p) in points.iter().enumerate() {
            let q = plane(p);
            let key = (
                ((q[0] - lo[0]) / cell) as i64,
                ((q[1] - lo[1]) / cell) as i64,
            );
            cells.entry(key).or_default().push(idx);
        }
        let span = (extent / cell).ceil() as i64 + 1;
        BucketGrid {
            points,
            origin: lo,
            cell,
            cells,
            span,
        }
    }

    fn nearest_squared(&self, x: &Vector) -> f64 {
        let q = plane(x);
        let cx = ((q[0] - self.origin[0]) / self.cell).floor() as i64;
        let cy = ((q[1] - self.origin[1]) / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                        for &idx in bucket {
                            best = best.min(squared_distance(x, &self.points[idx]));
                        }
                    }
                }
            }
            // Any cell outside the rings visited so far is at least `ring`
            // whole cells away in the plane.
            let reach = ring as f64 * self.cell;
            if best.is_finite() && best <= reach * reach {
                return best;
            }
            let outside = cx.abs().max(cy.abs()) + self.span;
            if ring > outside {
                return best;
            }
            ring += 1;
        }
    }

    pub(crate) fn directed_from(&self, from: &[Vector]) -> f64 {
        from.par_iter()
            .map(|x| self.nearest_squared(x))
            .reduce(|| 0.0, f64::max)
            .sqrt()
    }
}
