//! Evaluation of the linear parametrization `f : [0,1] → γ`, the unique
//! continuous map with `f(t_i) = z_i` and `f(T_i(t)) = S_i(f(t))`.
//!
//! `t` is expanded into its address under the line zipper: at each level
//! the subinterval containing the current residual is recorded and the
//! residual is pulled back through `T_i^{-1}`. The value is then the image
//! of an anchor point under `S_{d_1} ∘ … ∘ S_{d_k}`, and the error is at
//! most the norm of that composite times the attractor radius.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};
use crate::zipper::{LineZipper, Zipper};

/// Default cap on address length.
pub const DEFAULT_DEPTH_CAP: usize = 10_000;

/// Which interval a node point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeRule {
    /// `t ∈ [t_{i-1}, t_i)`, with `t = 1` in the last interval.
    #[default]
    LeftClosed,
    /// `t ∈ (t_{i-1}, t_i]`, with `t = 0` in the first interval.
    RightClosed,
}

/// Digits are one-based map indices, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct Address {
    pub digits: Vec<usize>,
    pub orientation: i8,
    pub anchor: f64,
}

impl Address {
    /// `T_{d_1} ∘ … ∘ T_{d_k}(anchor)`.
    pub fn reconstruct(&self, line: &LineZipper) -> f64 {
        self.digits
            .iter()
            .rev()
            .fold(self.anchor, |t, &d| line.forward(d - 1, t))
    }
}

pub(crate) fn interval_of(line: &LineZipper, t: f64, rule: NodeRule) -> usize {
    let nodes = line.nodes();
    let m = line.count();
    match rule {
        NodeRule::LeftClosed => nodes
            .partition_point(|&n| n <= t)
            .saturating_sub(1)
            .min(m - 1),
        NodeRule::RightClosed => nodes
            .partition_point(|&n| n < t)
            .saturating_sub(1)
            .min(m - 1),
    }
}

pub(crate) fn check_domain(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(t))
    }
}

/// Greedy address of `t` with `depth` digits under the left-closed rule.
pub fn address_of(t: f64, line: &LineZipper, depth: usize) -> Result<Address> {
    address_with_rule(t, line, depth, NodeRule::LeftClosed)
}

pub fn address_with_rule(
    t: f64,
    line: &LineZipper,
    depth: usize,
    rule: NodeRule,
) -> Result<Address> {
    check_domain(t)?;
    let mut residual = t;
    let mut orientation = 1i8;
    let mut digits = Vec::with_capacity(depth);
    for _ in 0..depth {
        let i = interval_of(line, residual, rule);
        residual = line.inverse(i, residual).clamp(0.0, 1.0);
        if line.signature().reverses(i) {
            orientation = -orientation;
        }
        digits.push(i + 1);
    }
    Ok(Address {
        digits,
        orientation,
        anchor: residual,
    })
}

/// A point of `γ` with a certified distance to the true `f(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamEvaluation {
    pub value: Vector,
    pub error_bound: f64,
    pub depth: usize,
}

/// Reusable evaluator for `f`; construction precomputes the contraction data.
#[derive(Debug, Clone)]
pub struct Parametrization<'a> {
    zipper: &'a Zipper,
    line: &'a LineZipper,
    radius: f64,
    per_map: bool,
    depth_cap: usize,
}

impl<'a> Parametrization<'a> {
    pub fn new(zipper: &'a Zipper, line: &'a LineZipper) -> Result<Self> {
        if zipper.count() != line.count() {
            return Err(Error::CountMismatch {
                left: zipper.count(),
                right: line.count(),
            });
        }
        if zipper.signature() != line.signature() {
            return Err(Error::SignatureMismatch);
        }
        Ok(Parametrization {
            zipper,
            line,
            radius: zipper.certificate().radius,
            per_map: zipper.max_contraction() < 1.0,
            depth_cap: DEFAULT_DEPTH_CAP,
        })
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }

    pub fn zipper(&self) -> &Zipper {
        self.zipper
    }

    pub fn line(&self) -> &LineZipper {
        self.line
    }

    /// Bound on `sup_t ‖f(t) - z_0‖`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `f(t)` within `tol`. Nodes return their vertex exactly.
    pub fn eval(&self, t: f64, tol: f64) -> Result<ParamEvaluation> {
        check_domain(t)?;
        if let Some(j) = self.line.nodes().iter().position(|&n| n == t) {
            return Ok(ParamEvaluation {
                value: self.zipper.vertices()[j].clone(),
                error_bound: 0.0,
                depth: 0,
            });
        }
        self.eval_with_rule(t, tol, NodeRule::LeftClosed)
    }

    /// Address-driven evaluation without the node shortcut.
    pub fn eval_with_rule(&self, t: f64, tol: f64, rule: NodeRule) -> Result<ParamEvaluation> {
        check_domain(t)?;
        if !(tol > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let maps = self.zipper.maps();
        let factors = self.zipper.contraction_factors();
        let mut digits = Vec::new();
        let mut residual = t;
        let mut factor = 1.0f64;
        let mut composite: Option<Matrix> = None;

        let (anchor, error_bound) = loop {
            if residual == 0.0 {
                break (self.zipper.first_vertex(), 0.0);
            }
            if residual == 1.0 {
                break (self.zipper.last_vertex(), 0.0);
            }
            let bound = factor * self.radius;
            if bound <= tol {
                break (self.zipper.first_vertex(), bound);
            }
            if digits.len() >= self.depth_cap {
                return Err(Error::ToleranceUnreachable {
                    depth: digits.len(),
                    bound,
                });
            }
            let i = interval_of(self.line, residual, rule);
            residual = self.line.inverse(i, residual).clamp(0.0, 1.0);
            digits.push(i);
            if self.per_map {
                factor *= factors[i];
            } else {
                let next = match composite.take() {
                    Some(c) => c.mul_mat_unchecked(maps[i].linear()),
                    None => maps[i].linear().clone(),
                };
                factor = (factor * factors[i]).min(next.frobenius_norm());
                composite = Some(next);
            }
        };

        let value = digits
            .iter()
            .rev()
            .fold(anchor.clone(), |v, &i| maps[i].apply_unchecked(&v));
        Ok(ParamEvaluation {
            value,
            error_bound,
            depth: digits.len(),
        })
    }
}

/// One-shot `f(t)`; prefer [`Parametrization`] when evaluating many points.
pub fn eval_f(t: f64, zipper: &Zipper, line: &LineZipper, tol: f64) -> Result<ParamEvaluation> {
    Parametrization::new(zipper, line)?.eval(t, tol)
}
