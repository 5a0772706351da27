//! Zippers: ordered systems of affine contractions glued end to end.
//!
//! A zipper `S_1..S_m` with vertices `z_0..z_m` and signature `ε` must send
//! the endpoint pair `(z_0, z_m)` to `(z_{i-1+ε_i}, z_{i-ε_i})`. Maps and
//! vertices are stored side by side and [`validate_zipper`] reconciles them.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{compose, operator_norm, AffineMap, Matrix, Vector};

/// Default band for the vertex conditions.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Per-map contraction requires `‖L_i‖ < 1 - CONTRACTION_MARGIN`.
pub const CONTRACTION_MARGIN: f64 = 1e-12;

/// Default word length for eventual-contraction validation.
pub const DEFAULT_WORD_LENGTH: usize = 8;

/// Upper bound on the number of words enumerated for one word length.
pub const WORD_BUDGET: u128 = 1_000_000;

/// Orientation bits, one per map: 0 keeps the curve direction, 1 reverses it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Signature(Vec<u8>);

impl Signature {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidConfig(format!(
                "signature entry {bad} is not 0 or 1"
            )));
        }
        Ok(Signature(bits))
    }

    /// All-zero signature of length `m`.
    pub fn preserving(m: usize) -> Self {
        Signature(vec![0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// Whether map `i` (zero-based) reverses orientation.
    pub fn reverses(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    /// `(-1)^{ε_i}`.
    pub fn sign(&self, i: usize) -> f64 {
        if self.reverses(i) {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ContractionMode {
    /// Every linear part must have spectral norm below one.
    PerMap,
    /// Some word length `L ≤ max_word_length` must have all length-`L`
    /// products with spectral norm below one.
    Eventual { max_word_length: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub tolerance: f64,
    pub contraction: ContractionMode,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            tolerance: DEFAULT_TOLERANCE,
            contraction: ContractionMode::PerMap,
        }
    }
}

impl ValidationOptions {
    pub fn eventual(max_word_length: usize) -> Self {
        ValidationOptions {
            tolerance: DEFAULT_TOLERANCE,
            contraction: ContractionMode::Eventual { max_word_length },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Endpoint {
    /// Image of `z_0`.
    First,
    /// Image of `z_m`.
    Last,
}

/// One failed vertex condition. Map and vertex indices are one-based.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VertexViolation {
    pub map: usize,
    pub endpoint: Endpoint,
    pub expected_vertex: usize,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    pub gap: f64,
}

/// Everything [`validate_zipper`] found wrong, plus the contraction data it measured.
#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub shape_errors: Vec<String>,
    pub vertex_violations: Vec<VertexViolation>,
    /// Spectral norm of each linear part, in map order.
    pub contraction_factors: Vec<f64>,
    pub contraction_failure: Option<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.shape_errors.is_empty()
            && self.vertex_violations.is_empty()
            && self.contraction_failure.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.shape_errors {
            writeln!(f, "  shape: {e}")?;
        }
        for v in &self.vertex_violations {
            let which = match v.endpoint {
                Endpoint::First => "z_0",
                Endpoint::Last => "z_m",
            };
            writeln!(
                f,
                "  S_{}({which}) = {:?}, expected z_{} = {:?} (gap {:e})",
                v.map, v.observed, v.expected_vertex, v.expected, v.gap
            )?;
        }
        if let Some(c) = &self.contraction_failure {
            writeln!(
                f,
                "  contraction: {c} (factors {:?})",
                self.contraction_factors
            )?;
        }
        Ok(())
    }
}

/// Certified a-priori data for truncating infinite compositions.
///
/// All length-`word_length` products of linear parts have norm at most
/// `factor < 1`, and every attractor point lies within `radius` of `z_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContractionCertificate {
    pub word_length: usize,
    pub factor: f64,
    pub radius: f64,
}

/// A validated zipper in R^n.
#[derive(Debug, Clone)]
pub struct Zipper {
    maps: Vec<AffineMap>,
    vertices: Vec<Vector>,
    signature: Signature,
    options: ValidationOptions,
    factors: Vec<f64>,
    certificate: ContractionCertificate,
}

impl Zipper {
    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Number of maps `m`.
    pub fn count(&self) -> usize {
        self.maps.len()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn first_vertex(&self) -> &Vector {
        &self.vertices[0]
    }

    pub fn last_vertex(&self) -> &Vector {
        &self.vertices[self.vertices.len() - 1]
    }

    pub fn options(&self) -> ValidationOptions {
        self.options
    }

    /// Spectral norm of each linear part.
    pub fn contraction_factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn max_contraction(&self) -> f64 {
        self.factors.iter().copied().fold(0.0, f64::max)
    }

    pub fn certificate(&self) -> ContractionCertificate {
        self.certificate
    }

    /// Writes each map as `S_i(z) = offset + sign·A_i (z - z_0)`.
    pub fn decompose(&self) -> Vec<SimilarityDecomposition> {
        let z0 = self.first_vertex();
        (0..self.count())
            .map(|i| {
                let sign = self.signature.sign(i);
                SimilarityDecomposition {
                    offset: self.vertices[i + usize::from(self.signature.bits()[i])].clone(),
                    linear_part: self.maps[i].linear().scale(sign),
                    sign,
                    base: z0.clone(),
                }
            })
            .collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.first_vertex().is_zero()
    }
}

/// The normal form `S_i(z) = offset + sign·A_i(z - z_0)` with `A_i` sending
/// `z_m - z_0` to `z_i - z_{i-1}`.
#[derive(Debug, Clone)]
pub struct SimilarityDecomposition {
    pub offset: Vector,
    pub linear_part: Matrix,
    pub sign: f64,
    base: Vector,
}

impl SimilarityDecomposition {
    pub fn apply(&self, z: &Vector) -> Vector {
        let rel = z - &self.base;
        &self.offset + &self.linear_part.mul_vec_unchecked(&rel).scale(self.sign)
    }
}

/// Checks the zipper vertex conditions and the requested contraction property.
pub fn validate_zipper(
    maps: Vec<AffineMap>,
    vertices: Vec<Vector>,
    signature: Signature,
    options: ValidationOptions,
) -> Result<Zipper> {
    let mut report = ValidationReport::default();
    let m = maps.len();
    if m == 0 {
        report
            .shape_errors
            .push("a zipper needs at least one map".into());
    }
    if vertices.len() != m + 1 {
        report.shape_errors.push(format!(
            "expected {} vertices, found {}",
            m + 1,
            vertices.len()
        ));
    }
    if signature.len() != m {
        report.shape_errors.push(format!(
            "expected signature of length {m}, found {}",
            signature.len()
        ));
    }
    if let Some(first) = vertices.first() {
        let n = first.dim();
        for (j, v) in vertices.iter().enumerate() {
            if v.dim() != n {
                report.shape_errors.push(format!(
                    "vertex {j} has dimension {}, expected {n}",
                    v.dim()
                ));
            }
        }
        for (i, s) in maps.iter().enumerate() {
            if s.dim() != n {
                report.shape_errors.push(format!(
                    "map {} has dimension {}, expected {n}",
                    i + 1,
                    s.dim()
                ));
            }
        }
    }
    if !report.shape_errors.is_empty() {
        return Err(Error::ZipperViolation(Box::new(report)));
    }

    let z0 = &vertices[0];
    let zm = &vertices[m];
    for (i, s) in maps.iter().enumerate() {
        let e = usize::from(signature.bits()[i]);
        for (endpoint, source, target) in [
            (Endpoint::First, z0, i + e),
            (Endpoint::Last, zm, i + 1 - e),
        ] {
            let observed = s.apply_unchecked(source);
            let gap = observed.distance(&vertices[target]);
            if !(gap <= options.tolerance) {
                report.vertex_violations.push(VertexViolation {
                    map: i + 1,
                    endpoint,
                    expected_vertex: target,
                    observed: observed.into_inner(),
                    expected: vertices[target].as_slice().to_vec(),
                    gap,
                });
            }
        }
    }

    report.contraction_factors = maps.iter().map(|s| operator_norm(s.linear())).collect();
    let max_len = match options.contraction {
        ContractionMode::PerMap => 1,
        ContractionMode::Eventual { max_word_length } => max_word_length.max(1),
    };
    let certificate = match certify(&maps, z0, max_len) {
        Ok(Some(c)) => Some(c),
        Ok(None) => {
            report.contraction_failure = Some(match options.contraction {
                ContractionMode::PerMap => "some map has spectral norm >= 1".to_string(),
                ContractionMode::Eventual { max_word_length } => {
                    format!("no word length up to {max_word_length} contracts")
                }
            });
            None
        }
        Err(e) => {
            report.contraction_failure = Some(e.to_string());
            None
        }
    };

    match certificate {
        Some(certificate) if report.is_clean() => Ok(Zipper {
            factors: report.contraction_factors,
            maps,
            vertices,
            signature,
            options,
            certificate,
        }),
        _ => Err(Error::ZipperViolation(Box::new(report))),
    }
}

/// Walks every word of length `len` depth-first, calling `visit` on each composite map.
pub(crate) fn for_each_word(
    maps: &[AffineMap],
    len: usize,
    visit: &mut dyn FnMut(&AffineMap),
) -> Result<()> {
    let words = (maps.len() as u128)
        .checked_pow(len as u32)
        .unwrap_or(u128::MAX);
    if words > WORD_BUDGET {
        return Err(Error::CombinatorialBudget {
            words,
            budget: WORD_BUDGET,
        });
    }
    fn walk(
        maps: &[AffineMap],
        prefix: &AffineMap,
        left: usize,
        visit: &mut dyn FnMut(&AffineMap),
    ) {
        if left == 0 {
            visit(prefix);
            return;
        }
        for s in maps {
            let next = compose(prefix, s).expect("maps share a dimension");
            walk(maps, &next, left - 1, visit);
        }
    }
    walk(maps, &AffineMap::identity(maps[0].dim()), len, visit);
    Ok(())
}

/// Smallest word length `L ≤ max_len` whose products all contract, with the
/// resulting attractor radius `max_w ‖S_w(z_0) - z_0‖ / (1 - c_L)`.
fn certify(
    maps: &[AffineMap],
    z0: &Vector,
    max_len: usize,
) -> Result<Option<ContractionCertificate>> {
    for len in 1..=max_len {
        let mut factor = 0.0f64;
        let mut reach = 0.0f64;
        for_each_word(maps, len, &mut |w| {
            factor = factor.max(operator_norm(w.linear()));
            reach = reach.max(w.apply_unchecked(z0).distance(z0));
        })?;
        if factor < 1.0 - CONTRACTION_MARGIN {
            return Ok(Some(ContractionCertificate {
                word_length: len,
                factor,
                radius: reach / (1.0 - factor),
            }));
        }
    }
    Ok(None)
}

/// A zipper on `[0, 1]` with nodes `0 = t_0 < … < t_m = 1`.
#[derive(Debug, Clone)]
pub struct LineZipper {
    nodes: Vec<f64>,
    signature: Signature,
    maps: Vec<AffineMap>,
}

impl LineZipper {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn count(&self) -> usize {
        self.maps.len()
    }

    /// `q_i = t_i - t_{i-1}` for map `i` (zero-based).
    pub fn ratio(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn ratios(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.ratio(i)).collect()
    }

    /// `T_i(t)`, onto `[t_{i-1}, t_i]`, reversing when `ε_i = 1`.
    pub fn forward(&self, i: usize, t: f64) -> f64 {
        if self.signature.reverses(i) {
            self.nodes[i + 1] - self.ratio(i) * t
        } else {
            self.nodes[i] + self.ratio(i) * t
        }
    }

    /// `T_i^{-1}(t)` for `t ∈ [t_{i-1}, t_i]`.
    pub fn inverse(&self, i: usize, t: f64) -> f64 {
        if self.signature.reverses(i) {
            (self.nodes[i + 1] - t) / self.ratio(i)
        } else {
            (t - self.nodes[i]) / self.ratio(i)
        }
    }

    /// The same system as a one-dimensional [`Zipper`].
    pub fn as_zipper(&self) -> Zipper {
        validate_zipper(
            self.maps.clone(),
            self.nodes.iter().map(|&t| Vector::scalar(t)).collect(),
            self.signature.clone(),
            ValidationOptions::default(),
        )
        .expect("line zippers are valid by construction")
    }
}

/// Builds the line zipper with the given nodes and signature.
pub fn line_zipper(nodes: Vec<f64>, signature: Signature) -> Result<LineZipper> {
    if nodes.len() < 2 {
        return Err(Error::InvalidNodes("need at least two nodes".into()));
    }
    if nodes[0] != 0.0 || nodes[nodes.len() - 1] != 1.0 {
        return Err(Error::InvalidNodes(format!(
            "endpoints must be exactly 0 and 1, found {} and {}",
            nodes[0],
            nodes[nodes.len() - 1]
        )));
    }
    if let Some(w) = nodes.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidNodes(format!(
            "nodes not strictly increasing at index {}",
            w + 1
        )));
    }
    let m = nodes.len() - 1;
    if signature.len() != m {
        return Err(Error::CountMismatch {
            left: m,
            right: signature.len(),
        });
    }
    let maps: Vec<AffineMap> = (0..m)
        .map(|i| {
            let q = nodes[i + 1] - nodes[i];
            if signature.reverses(i) {
                AffineMap::scalar(-q, nodes[i + 1])
            } else {
                AffineMap::scalar(q, nodes[i])
            }
        })
        .collect();
    if let Some(i) = (0..m).find(|&i| nodes[i + 1] - nodes[i] >= 1.0 - CONTRACTION_MARGIN) {
        return Err(Error::NotContracting {
            index: i + 1,
            factor: nodes[i + 1] - nodes[i],
        });
    }
    Ok(LineZipper {
        nodes,
        signature,
        maps,
    })
}

/// Line zipper with equally spaced nodes `i/m`.
pub fn uniform_line_zipper(signature: Signature) -> Result<LineZipper> {
    let m = signature.len();
    let mut nodes: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    if let Some(last) = nodes.last_mut() {
        *last = 1.0;
    }
    line_zipper(nodes, signature)
}

/// Conjugates every map by the affine change of coordinates `phi`:
/// `S_i ↦ phi ∘ S_i ∘ phi⁻¹`, `z_j ↦ phi(z_j)`.
pub fn conjugate(zipper: &Zipper, phi: &AffineMap) -> Result<Zipper> {
    let inv = phi.inverse()?;
    let maps = zipper
        .maps
        .iter()
        .map(|s| compose(phi, &compose(s, &inv)?))
        .collect::<Result<Vec<_>>>()?;
    let vertices = zipper
        .vertices
        .iter()
        .map(|z| phi.apply_unchecked(z))
        .collect();
    validate_zipper(maps, vertices, zipper.signature.clone(), zipper.options)
}

/// Translates the zipper so that `z_0` becomes the origin. Returns the new
/// zipper and the translation that was added to every point.
pub fn normalize_zipper(zipper: &Zipper) -> Result<(Zipper, Vector)> {
    let shift = -zipper.first_vertex();
    if zipper.is_normalized() {
        return Ok((zipper.clone(), Vector::zeros(zipper.dim())));
    }
    let normalized = conjugate(zipper, &AffineMap::translation_only(shift.clone()))?;
    Ok((normalized, shift))
}

/// The product system `{T_i × S_i}` acting on `(t, x)`, whose attractor is
/// the graph of the linear parametrization.
pub fn product_zipper(spatial: &Zipper, line: &LineZipper) -> Result<Zipper> {
    if spatial.count() != line.count() {
        return Err(Error::CountMismatch {
            left: spatial.count(),
            right: line.count(),
        });
    }
    if spatial.signature() != line.signature() {
        return Err(Error::SignatureMismatch);
    }
    let maps = spatial
        .maps
        .iter()
        .zip(&line.maps)
        .map(|(s, t)| {
            let linear = Matrix::bordered(
                t.linear()[(0, 0)],
                &Vector::zeros(spatial.dim()),
                s.linear(),
            )?;
            AffineMap::new(linear, s.translation().prepend(t.translation()[0]))
        })
        .collect::<Result<Vec<_>>>()?;
    let vertices = spatial
        .vertices
        .iter()
        .zip(&line.nodes)
        .map(|(z, &t)| z.prepend(t))
        .collect();
    validate_zipper(maps, vertices, spatial.signature.clone(), spatial.options)
}
