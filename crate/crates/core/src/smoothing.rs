//! The smooth lift: from a zipper `S` with linear parametrization `f` to the
//! self-affine zipper `W` in one more dimension whose attractor is the graph
//! of `g(t) = ∫₀ᵗ f`.
//!
//! Write each map as `S_i(z) = z_{i-1} + A_i z` (orientation preserving) or
//! `S_i(z) = z_i - A_i z` (reversing), with `q_i = t_i - t_{i-1}`. Then
//!
//! * `h = g(1)` solves `(Id - Σ (-1)^{ε_i} q_i A_i) h = Σ q_i z_{i-1+ε_i}`,
//! * `g(t_i) - g(t_{i-1}) = q_i z_{i-1+ε_i} + (-1)^{ε_i} q_i A_i h`,
//! * on `[t_{i-1}, t_i]`, `g(t) = g(t_{i-1}) + z_{i-1+ε_i}(t - t_{i-1}) + q_i A_i (g(s) - ε_i h)`
//!   where `s = T_i^{-1}(t)`,
//!
//! and `W_i(s, y) = (t_{i-1+ε_i}, g(t_{i-1+ε_i})) + (-1)^{ε_i} q_i [[1, 0], [z_{i-1+ε_i}, (-1)^{ε_i} A_i]] (s, y)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{operator_norm, solve_linear, AffineMap, Matrix, Vector};
use crate::parametrization::{check_domain, interval_of, NodeRule, DEFAULT_DEPTH_CAP};
use crate::zipper::{
    validate_zipper, LineZipper, Signature, ValidationOptions, Zipper, DEFAULT_WORD_LENGTH,
};

/// Tolerance for the telescoped node integrals reproducing `h`.
const TELESCOPE_TOLERANCE: f64 = 1e-9;

fn check_pair(zipper: &Zipper, line: &LineZipper) -> Result<()> {
    if zipper.count() != line.count() {
        return Err(Error::CountMismatch {
            left: zipper.count(),
            right: line.count(),
        });
    }
    if zipper.signature() != line.signature() {
        return Err(Error::SignatureMismatch);
    }
    if !zipper.is_normalized() {
        return Err(Error::NotNormalized(zipper.first_vertex().norm()));
    }
    Ok(())
}

/// `A_i = (-1)^{ε_i} L_i`, where `L_i` is the linear part of `S_i`.
fn similarity_parts(zipper: &Zipper) -> Vec<Matrix> {
    zipper
        .decompose()
        .into_iter()
        .map(|d| d.linear_part)
        .collect()
}

/// Vertex `z_{i-1+ε_i}` for zero-based map `i`.
fn anchor_vertex(zipper: &Zipper, i: usize) -> &Vector {
    &zipper.vertices()[i + usize::from(zipper.signature().bits()[i])]
}

/// Solves the fixed-point system for `h = g(1)`.
pub fn solve_h(zipper: &Zipper, line: &LineZipper) -> Result<Vector> {
    check_pair(zipper, line)?;
    let n = zipper.dim();
    let parts = similarity_parts(zipper);
    let mut system = Matrix::identity(n);
    let mut rhs = Vector::zeros(n);
    for (i, a) in parts.iter().enumerate() {
        let q = line.ratio(i);
        system = &system - &a.scale(zipper.signature().sign(i) * q);
        rhs = &rhs + &anchor_vertex(zipper, i).scale(q);
    }
    solve_linear(&system, &rhs)
}

/// `g(t_0), …, g(t_m)` from `h` by summing the per-interval integrals.
pub fn node_integrals(zipper: &Zipper, line: &LineZipper, h: &Vector) -> Result<Vec<Vector>> {
    check_pair(zipper, line)?;
    let parts = similarity_parts(zipper);
    let mut out = Vec::with_capacity(zipper.count() + 1);
    let mut acc = Vector::zeros(zipper.dim());
    out.push(acc.clone());
    for (i, a) in parts.iter().enumerate() {
        let q = line.ratio(i);
        let step = &anchor_vertex(zipper, i).scale(q)
            + &a.mul_vec(h)?.scale(zipper.signature().sign(i) * q);
        acc = &acc + &step;
        out.push(acc.clone());
    }
    Ok(out)
}

/// A value of `g` with a certified distance to the true integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GEvaluation {
    pub value: Vector,
    pub error_bound: f64,
    pub depth: usize,
}

/// Solved integral data for one `(S, T)` pair.
#[derive(Debug, Clone)]
pub struct SmoothLift {
    h: Vector,
    node_integrals: Vec<Vector>,
    lifted_maps: Vec<AffineMap>,
    source_signature: Signature,
    line: LineZipper,
    vertices: Vec<Vector>,
    /// `q_i A_i`.
    gains: Vec<Matrix>,
    gain_norms: Vec<f64>,
    /// `-q_i A_i h` on reversed branches, zero otherwise.
    corrections: Vec<Vector>,
    /// Bound on `sup ‖f‖`, hence on `‖g(t)‖ / t`.
    slope_bound: f64,
    depth_cap: usize,
}

impl SmoothLift {
    /// Solves for `h` and the node integrals and builds the lifted maps.
    pub fn new(zipper: &Zipper, line: &LineZipper) -> Result<Self> {
        let h = solve_h(zipper, line)?;
        let mut nodes = node_integrals(zipper, line, &h)?;
        let last = nodes.last_mut().expect("m >= 1");
        let drift = last.distance(&h);
        if drift > TELESCOPE_TOLERANCE * (1.0 + h.norm()) {
            return Err(Error::DegenerateInput(format!(
                "node integrals telescope to a value {drift:e} away from g(1)"
            )));
        }
        *last = h.clone();

        let parts = similarity_parts(zipper);
        let signature = zipper.signature().clone();
        let mut gains = Vec::with_capacity(parts.len());
        let mut corrections = Vec::with_capacity(parts.len());
        let mut lifted_maps = Vec::with_capacity(parts.len());
        for (i, a) in parts.iter().enumerate() {
            let q = line.ratio(i);
            let sign = signature.sign(i);
            let gain = a.scale(q);
            corrections.push(if signature.reverses(i) {
                -&gain.mul_vec(&h)?
            } else {
                Vector::zeros(zipper.dim())
            });
            let k = i + usize::from(signature.bits()[i]);
            let linear =
                Matrix::bordered(1.0, anchor_vertex(zipper, i), &a.scale(sign))?.scale(sign * q);
            lifted_maps.push(AffineMap::new(linear, nodes[k].prepend(line.nodes()[k]))?);
            gains.push(gain);
        }

        Ok(SmoothLift {
            gain_norms: gains.iter().map(operator_norm).collect(),
            slope_bound: zipper.certificate().radius,
            h,
            node_integrals: nodes,
            lifted_maps,
            source_signature: signature,
            line: line.clone(),
            vertices: zipper.vertices().to_vec(),
            gains,
            corrections,
            depth_cap: DEFAULT_DEPTH_CAP,
        })
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }

    /// `g(1)`.
    pub fn h(&self) -> &Vector {
        &self.h
    }

    /// `g(t_0), …, g(t_m)`.
    pub fn node_integrals(&self) -> &[Vector] {
        &self.node_integrals
    }

    /// The maps `W_1, …, W_m` (not yet validated; see [`smooth_zipper`]).
    pub fn lifted_maps(&self) -> &[AffineMap] {
        &self.lifted_maps
    }

    pub fn source_signature(&self) -> &Signature {
        &self.source_signature
    }

    pub fn line(&self) -> &LineZipper {
        &self.line
    }

    /// Lifted vertices `(t_i, g(t_i))`.
    pub fn lifted_vertices(&self) -> Vec<Vector> {
        self.node_integrals
            .iter()
            .zip(self.line.nodes())
            .map(|(g, &t)| g.prepend(t))
            .collect()
    }

    /// Constant term `c_i` of branch `i` (zero-based) written as
    /// `g(t) = c_i + z_{i-1+ε_i} t + q_i A_i g(s)`.
    pub fn branch_constant(&self, i: usize) -> Vector {
        let z = &self.vertices[i + usize::from(self.source_signature.bits()[i])];
        let t0 = self.line.nodes()[i];
        &(&self.node_integrals[i] - &z.scale(t0)) + &self.corrections[i]
    }

    /// `g(t)` within `tol`; endpoints and nodes are returned exactly.
    pub fn eval_g(&self, t: f64, tol: f64) -> Result<GEvaluation> {
        check_domain(t)?;
        if let Some(j) = self.line.nodes().iter().position(|&n| n == t) {
            return Ok(GEvaluation {
                value: self.node_integrals[j].clone(),
                error_bound: 0.0,
                depth: 0,
            });
        }
        self.eval_g_with_rule(t, tol, NodeRule::LeftClosed)
    }

    /// Recursion-driven evaluation without the node shortcut.
    pub fn eval_g_with_rule(&self, t: f64, tol: f64, rule: NodeRule) -> Result<GEvaluation> {
        check_domain(t)?;
        if !(tol > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let nodes = self.line.nodes();
        let mut steps: Vec<(usize, Vector)> = Vec::new();
        let mut r = t;
        let mut factor = 1.0f64;

        let (tail, error_bound) = loop {
            if r == 0.0 {
                break (Vector::zeros(self.h.dim()), 0.0);
            }
            if r == 1.0 {
                break (self.h.clone(), 0.0);
            }
            // ‖g(r)‖ ≤ r·sup‖f‖
            let bound = factor * r * self.slope_bound;
            if bound <= tol {
                break (Vector::zeros(self.h.dim()), bound);
            }
            if steps.len() >= self.depth_cap {
                return Err(Error::ToleranceUnreachable {
                    depth: steps.len(),
                    bound,
                });
            }
            let i = interval_of(&self.line, r, rule);
            let z = &self.vertices[i + usize::from(self.source_signature.bits()[i])];
            let constant =
                &(&self.node_integrals[i] + &z.scale(r - nodes[i])) + &self.corrections[i];
            steps.push((i, constant));
            r = self.line.inverse(i, r).clamp(0.0, 1.0);
            factor *= self.gain_norms[i];
        };

        let depth = steps.len();
        let value = steps
            .into_iter()
            .rev()
            .fold(tail, |v, (i, c)| &c + &self.gains[i].mul_vec_unchecked(&v));
        Ok(GEvaluation {
            value,
            error_bound,
            depth,
        })
    }
}

/// One-shot `g(t)`.
pub fn eval_g(t: f64, lift: &SmoothLift, tol: f64) -> Result<GEvaluation> {
    lift.eval_g(t, tol)
}

/// Validates the lifted maps as a zipper with vertices `(t_i, g(t_i))`,
/// allowing eventual contraction up to the default word length.
pub fn smooth_zipper(lift: &SmoothLift) -> Result<Zipper> {
    validate_zipper(
        lift.lifted_maps.clone(),
        lift.lifted_vertices(),
        lift.source_signature.clone(),
        ValidationOptions::eventual(DEFAULT_WORD_LENGTH),
    )
}

/// Recovers the middle and end values `(y_1, y_2)` of a two-map,
/// orientation-preserving scalar zipper from the node integrals
/// `g_1 = g(x_1)` and `g_2 = g(1)`.
pub fn inverse_design(
    q1: f64,
    q2: f64,
    x1: f64,
    g1: &Vector,
    g2: &Vector,
) -> Result<(Vector, Vector)> {
    if g1.dim() != 1 || g2.dim() != 1 {
        return Err(Error::DegenerateInput(
            "inverse design is defined for scalar zippers only".into(),
        ));
    }
    for (name, q) in [("q1", q1), ("q2", q2)] {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::DegenerateInput(format!(
                "{name} = {q} is outside (0, 1)"
            )));
        }
    }
    if (q1 + q2 - 1.0).abs() > 1e-12 {
        return Err(Error::DegenerateInput(format!(
            "q1 + q2 = {} must equal 1",
            q1 + q2
        )));
    }
    if (x1 - q1).abs() > 1e-12 {
        return Err(Error::DegenerateInput(format!(
            "x1 = {x1} must equal q1 = {q1}"
        )));
    }
    let (g1, g2) = (g1[0], g2[0]);
    if g1 == 0.0 {
        return Err(Error::DegenerateInput("g1 must be non-zero".into()));
    }
    let y1 = (1.0 / q1 - 1.0 / q2) * g1 + (1.0 / q2 - 1.0) * g2;
    let y2 = q1 * g2 / g1 * y1;
    Ok((Vector::scalar(y1), Vector::scalar(y2)))
}
