//! JSON zipper configurations, CSV and SVG polyline export.
//!
//! Config schema (strict, unknown keys are rejected):
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "maps": [ { "linear": [[0.3]], "translation": [0.0] },
//!             { "linear": [[0.7]], "translation": [0.3] } ],
//!   "vertices": [[0.0], [0.3], [1.0]],
//!   "signature": [0, 0],
//!   "lineNodes": [0.0, 0.5, 1.0]
//! }
//! ```
//!
//! `lineNodes` is optional and defaults to equally spaced nodes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attractor::Polyline;
use crate::error::Error;
use crate::geometry::{AffineMap, Matrix, Vector};
use crate::zipper::{
    line_zipper, uniform_line_zipper, validate_zipper, LineZipper, Signature, ValidationOptions,
    Zipper,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("shape error in '{field}': {message}")]
    Shape { field: String, message: String },

    #[error("cannot draw: {0}")]
    DimensionUnsupported(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Zipper(#[from] Error),
}

fn shape(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Shape {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ZipperConfig {
    pub dimension: usize,
    pub maps: Vec<MapConfig>,
    pub vertices: Vec<Vec<f64>>,
    pub signature: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_nodes: Option<Vec<f64>>,
}

/// Strict parse plus shape checks.
pub fn parse_config(text: &str) -> Result<ZipperConfig, ConfigError> {
    let config: ZipperConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    config.check_shape()?;
    Ok(config)
}

impl ZipperConfig {
    pub fn check_shape(&self) -> Result<(), ConfigError> {
        let n = self.dimension;
        if n == 0 {
            return Err(shape("dimension", "must be at least 1"));
        }
        let m = self.maps.len();
        if m == 0 {
            return Err(shape("maps", "need at least one map"));
        }
        for (i, map) in self.maps.iter().enumerate() {
            if map.linear.len() != n || map.linear.iter().any(|row| row.len() != n) {
                return Err(shape(
                    format!("maps[{i}].linear"),
                    format!("expected a {n}x{n} array"),
                ));
            }
            if map.translation.len() != n {
                return Err(shape(
                    format!("maps[{i}].translation"),
                    format!("expected {n} entries"),
                ));
            }
        }
        if self.vertices.len() != m + 1 {
            return Err(shape(
                "vertices",
                format!("expected {} points, found {}", m + 1, self.vertices.len()),
            ));
        }
        if let Some(j) = self.vertices.iter().position(|v| v.len() != n) {
            return Err(shape(
                format!("vertices[{j}]"),
                format!("expected {n} coordinates"),
            ));
        }
        if self.signature.len() != m {
            return Err(shape(
                "signature",
                format!("expected {m} entries, found {}", self.signature.len()),
            ));
        }
        if self.signature.iter().any(|&b| b > 1) {
            return Err(shape("signature", "entries must be 0 or 1"));
        }
        if let Some(nodes) = &self.line_nodes {
            if nodes.len() != m + 1 {
                return Err(shape(
                    "lineNodes",
                    format!("expected {} nodes, found {}", m + 1, nodes.len()),
                ));
            }
        }
        Ok(())
    }

    /// Builds and validates the zipper and its line zipper.
    pub fn build(&self, options: ValidationOptions) -> Result<(Zipper, LineZipper), ConfigError> {
        self.check_shape()?;
        let maps = self
            .maps
            .iter()
            .map(|m| {
                AffineMap::new(
                    Matrix::from_rows(&m.linear)?,
                    Vector::new(m.translation.clone())?,
                )
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vector::new(v.clone()))
            .collect::<Result<Vec<_>, Error>>()?;
        let signature = Signature::new(self.signature.clone())?;
        let line = match &self.line_nodes {
            Some(nodes) => line_zipper(nodes.clone(), signature.clone())?,
            None => uniform_line_zipper(signature.clone())?,
        };
        let zipper = validate_zipper(maps, vertices, signature, options)?;
        Ok((zipper, line))
    }

    pub fn from_parts(
        maps: &[AffineMap],
        vertices: &[Vector],
        signature: &Signature,
        nodes: Option<&[f64]>,
    ) -> Self {
        ZipperConfig {
            dimension: vertices[0].dim(),
            maps: maps
                .iter()
                .map(|m| MapConfig {
                    linear: m.linear().rows(),
                    translation: m.translation().as_slice().to_vec(),
                })
                .collect(),
            vertices: vertices.iter().map(|v| v.as_slice().to_vec()).collect(),
            signature: signature.bits().to_vec(),
            line_nodes: nodes.map(<[f64]>::to_vec),
        }
    }

    pub fn from_zipper(zipper: &Zipper, line: &LineZipper) -> Self {
        Self::from_parts(
            zipper.maps(),
            zipper.vertices(),
            zipper.signature(),
            Some(line.nodes()),
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ConfigError> {
    fs::write(path, contents).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// `t,x1,…,xd` (no `t` column without params), one row per point.
pub fn render_csv(polyline: &Polyline) -> String {
    let d = polyline.dim();
    let mut out = String::new();
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    if polyline.params.is_some() {
        header.insert(0, "t".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (j, p) in polyline.points.iter().enumerate() {
        let mut fields: Vec<String> = p.as_slice().iter().map(|c| c.to_string()).collect();
        if let Some(params) = &polyline.params {
            fields.insert(0, params[j].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn export_csv(polyline: &Polyline, path: &Path) -> Result<(), ConfigError> {
    write_file(path, &render_csv(polyline))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub depth: usize,
    pub width: u32,
    pub height: u32,
    pub stroke_width: f64,
    /// Axes drawn horizontally and vertically; first two when `None`.
    pub projection: Option<(usize, usize)>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            depth: 12,
            width: 800,
            height: 600,
            stroke_width: 1.0,
            projection: None,
        }
    }
}

/// A single-polyline SVG 1.1 document fitted to the data with a 5% margin,
/// with the vertical axis pointing up.
pub fn render_svg(polyline: &Polyline, spec: &RenderSpec) -> Result<String, ConfigError> {
    let d = polyline.dim();
    let (ax, ay) = spec.projection.unwrap_or((0, 1));
    if d < 2 || ax >= d || ay >= d || ax == ay {
        return Err(ConfigError::DimensionUnsupported(format!(
            "projection ({ax}, {ay}) of a {d}-dimensional polyline"
        )));
    }
    if spec.width == 0 || spec.height == 0 || !(spec.stroke_width > 0.0) {
        return Err(shape(
            "render",
            "width, height and stroke width must be positive",
        ));
    }
    if polyline.points.len() < 2 {
        return Err(shape("polyline", "need at least two points"));
    }
    let xs: Vec<f64> = polyline.points.iter().map(|p| p[ax]).collect();
    let ys: Vec<f64> = polyline.points.iter().map(|p| -p[ay]).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let extent = (x1 - x0).max(y1 - y0);
    let fallback = if extent > 0.0 { extent } else { 1.0 };
    let wx = if x1 > x0 { x1 - x0 } else { fallback };
    let wy = if y1 > y0 { y1 - y0 } else { fallback };
    let (mx, my) = (0.05 * wx, 0.05 * wy);
    let (vx, vy, vw, vh) = (x0 - mx, y0 - my, wx + 2.0 * mx, wy + 2.0 * my);
    let stroke = spec.stroke_width * (vw / spec.width as f64).max(vh / spec.height as f64);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        spec.width, spec.height, vx, vy, vw, vh
    );
    let _ = write!(
        out,
        "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke}\" points=\""
    );
    for (j, (x, y)) in xs.iter().zip(&ys).enumerate() {
        if j > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x},{y}");
    }
    out.push_str("\"/>\n</svg>\n");
    Ok(out)
}

fn bounds(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

pub fn export_svg(polyline: &Polyline, spec: &RenderSpec, path: &Path) -> Result<(), ConfigError> {
    let svg = render_svg(polyline, spec)?;
    write_file(path, &svg)
}
