#![allow(dead_code)]

use proptest::prelude::*;
use zipper::geometry::{AffineMap, Matrix, Vector};
use zipper::{line_zipper, validate_zipper, LineZipper, Signature, ValidationOptions, Zipper};

/// Complex multiplication by `c` as a 2x2 matrix.
pub fn complex(re: f64, im: f64) -> Matrix {
    Matrix::from_rows(&[vec![re, -im], vec![im, re]]).unwrap()
}

/// The similarity taking `(z_0, z_m)` to `(a, b)`.
pub fn planar_similarity(z0: &Vector, zm: &Vector, a: &Vector, b: &Vector) -> AffineMap {
    let (dx, dy) = (zm[0] - z0[0], zm[1] - z0[1]);
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let den = dx * dx + dy * dy;
    let c = complex((ex * dx + ey * dy) / den, (ey * dx - ex * dy) / den);
    let translation = a - &c.mul_vec(z0).unwrap();
    AffineMap::new(c, translation).unwrap()
}

pub fn similarity_zipper(vertices: Vec<Vector>, bits: Vec<u8>) -> zipper::Result<Zipper> {
    let m = bits.len();
    let (z0, zm) = (vertices[0].clone(), vertices[m].clone());
    let maps = (0..m)
        .map(|i| {
            let e = bits[i] as usize;
            planar_similarity(&z0, &zm, &vertices[i + e], &vertices[i + 1 - e])
        })
        .collect();
    validate_zipper(
        maps,
        vertices,
        Signature::new(bits)?,
        ValidationOptions::default(),
    )
}

pub fn scalar_zipper(values: &[f64], bits: Vec<u8>) -> zipper::Result<Zipper> {
    let m = bits.len();
    let span = values[m] - values[0];
    let maps = (0..m)
        .map(|i| {
            let e = bits[i] as usize;
            let (a, b) = (values[i + e], values[i + 1 - e]);
            let k = (b - a) / span;
            AffineMap::scalar(k, a - k * values[0])
        })
        .collect();
    let vertices = values.iter().map(|&v| Vector::scalar(v)).collect();
    validate_zipper(
        maps,
        vertices,
        Signature::new(bits)?,
        ValidationOptions::default(),
    )
}

fn gaps_ok(points: &[f64]) -> bool {
    points.windows(2).all(|w| w[1] - w[0] > 0.05)
}

/// Line nodes `0 = t_0 < … < t_m = 1` with every gap above 0.05.
pub fn nodes(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..0.95, m - 1).prop_filter_map("gaps", |mut inner| {
        inner.sort_by(f64::total_cmp);
        let mut all = vec![0.0];
        all.extend(inner);
        all.push(1.0);
        gaps_ok(&all).then_some(all)
    })
}

/// Nodes on the grid `k/8`, for which address arithmetic is exact.
pub fn dyadic_nodes(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::sample::subsequence((1..8).collect::<Vec<u32>>(), m - 1).prop_map(|inner| {
        let mut all = vec![0.0];
        all.extend(inner.into_iter().map(|k| k as f64 / 8.0));
        all.push(1.0);
        all
    })
}

/// A normalized planar similarity zipper from `0` to `(1, 0)`, with its line zipper.
pub fn planar_pair() -> impl Strategy<Value = (Zipper, LineZipper)> {
    planar_pair_on(|m| nodes(m).boxed())
}

pub fn planar_pair_dyadic() -> impl Strategy<Value = (Zipper, LineZipper)> {
    planar_pair_on(|m| dyadic_nodes(m).boxed())
}

fn planar_pair_on(
    node_strategy: fn(usize) -> BoxedStrategy<Vec<f64>>,
) -> impl Strategy<Value = (Zipper, LineZipper)> {
    (2usize..=4)
        .prop_flat_map(move |m| {
            (
                prop::collection::vec((0.1f64..0.9, -0.35f64..0.35), m - 1),
                prop::collection::vec(0u8..=1, m),
                node_strategy(m),
            )
        })
        .prop_filter_map("contractive zipper", |(inner, bits, ts)| {
            let mut pts = inner;
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut vertices = vec![Vector::from([0.0, 0.0])];
            vertices.extend(pts.iter().map(|&(x, y)| Vector::from([x, y])));
            vertices.push(Vector::from([1.0, 0.0]));
            if vertices
                .windows(2)
                .any(|w| w[0].distance(&w[1]) > 0.85 || w[0].distance(&w[1]) < 0.05)
            {
                return None;
            }
            let line = line_zipper(ts, Signature::new(bits.clone()).ok()?).ok()?;
            Some((similarity_zipper(vertices, bits).ok()?, line))
        })
}

/// A normalized scalar zipper from `0` to `1` with arbitrary interior values.
pub fn scalar_pair() -> impl Strategy<Value = (Zipper, LineZipper)> {
    (2usize..=4)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(-0.3f64..1.3, m - 1),
                prop::collection::vec(0u8..=1, m),
                nodes(m),
            )
        })
        .prop_filter_map("contractive zipper", |(inner, bits, ts)| {
            let mut values = vec![0.0];
            values.extend(inner);
            values.push(1.0);
            if values.windows(2).any(|w| (w[1] - w[0]).abs() > 0.85) {
                return None;
            }
            let line = line_zipper(ts, Signature::new(bits.clone()).ok()?).ok()?;
            Some((scalar_zipper(&values, bits).ok()?, line))
        })
}
