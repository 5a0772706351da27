//! Ready-made two-map zippers used as fixtures and CLI presets.
//!
//! * The *split* family on the line: `S_1(x) = p x`, `S_2(x) = (1-p) x + p`
//!   with nodes `(0, 1/2, 1)`, so `f(1/2) = p`. Its general form uses a node
//!   `x_1 = q_1` and values `0 < y_1 < y_2`.
//! * The *rotation* family in the plane: `S_1 = pA`, `S_2 = pB + (1/2, h)`,
//!   with `A`, `B` rotations by `±α`, `p = √(h² + 1/4)`, `α = arctan 2h`.

use crate::error::{Error, Result};
use crate::geometry::{AffineMap, Matrix, Vector};
use crate::zipper::{
    line_zipper, validate_zipper, LineZipper, Signature, ValidationOptions, Zipper,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Example1Config {
    /// Middle value `p` at node `1/2`.
    Split { p: f64 },
    /// Node `x_1 = q1`, values `y1` at `x_1` and `y2` at `1`.
    General { q1: f64, y1: f64, y2: f64 },
}

impl Example1Config {
    pub fn split(p: f64) -> Self {
        Example1Config::Split { p }
    }

    pub fn general(q1: f64, y1: f64, y2: f64) -> Self {
        Example1Config::General { q1, y1, y2 }
    }

    /// `(q1, y1, y2)` for either form.
    pub fn normal_form(&self) -> (f64, f64, f64) {
        match *self {
            Example1Config::Split { p } => (0.5, p, 1.0),
            Example1Config::General { q1, y1, y2 } => (q1, y1, y2),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Example1Config::Split { p } if !(p > 0.0 && p < 1.0) => {
                Err(Error::InvalidConfig(format!("p = {p} must lie in (0, 1)")))
            }
            Example1Config::General { q1, y1, y2 }
                if !(q1 > 0.0 && q1 < 1.0 && 0.0 < y1 && y1 < y2) =>
            {
                Err(Error::InvalidConfig(format!(
                    "need 0 < q1 < 1 and 0 < y1 < y2, got q1 = {q1}, y1 = {y1}, y2 = {y2}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Vertical ratios `p_i = (y_i - y_{i-1}) / y_2`.
    pub fn ratios(&self) -> (f64, f64) {
        let (_, y1, y2) = self.normal_form();
        (y1 / y2, (y2 - y1) / y2)
    }

    /// `g(1) = y_1 q_2 / (1 - p_1 q_1 - p_2 q_2)`.
    pub fn closed_form_h(&self) -> f64 {
        let (q1, y1, _) = self.normal_form();
        let q2 = 1.0 - q1;
        let (p1, p2) = self.ratios();
        y1 * q2 / (1.0 - p1 * q1 - p2 * q2)
    }

    /// `g(x_1) = p_1 q_1 g(1)`.
    pub fn closed_form_g1(&self) -> f64 {
        let (q1, _, _) = self.normal_form();
        self.ratios().0 * q1 * self.closed_form_h()
    }
}

/// The split family as a scalar zipper and its line zipper.
pub fn build_example1(cfg: Example1Config) -> Result<(Zipper, LineZipper)> {
    cfg.validate()?;
    let (q1, y1, y2) = cfg.normal_form();
    let (p1, p2) = cfg.ratios();
    let zipper = validate_zipper(
        vec![AffineMap::scalar(p1, 0.0), AffineMap::scalar(p2, y1)],
        vec![Vector::scalar(0.0), Vector::scalar(y1), Vector::scalar(y2)],
        Signature::preserving(2),
        ValidationOptions::default(),
    )?;
    let line = line_zipper(vec![0.0, q1, 1.0], Signature::preserving(2))?;
    Ok((zipper, line))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2Config {
    /// Apex height, in `(0, √3/2)`.
    pub h: f64,
}

impl Example2Config {
    pub fn new(h: f64) -> Self {
        Example2Config { h }
    }

    pub fn p(&self) -> f64 {
        (self.h * self.h + 0.25).sqrt()
    }

    pub fn alpha(&self) -> f64 {
        (2.0 * self.h).atan()
    }

    /// `A`, rotation by `+α`.
    pub fn rotation_a(&self) -> Matrix {
        Matrix::rotation(self.alpha())
    }

    /// `B`, rotation by `-α`.
    pub fn rotation_b(&self) -> Matrix {
        Matrix::rotation(-self.alpha())
    }

    fn validate(&self) -> Result<()> {
        let limit = 3f64.sqrt() / 2.0;
        if !(self.h > 0.0 && self.h < limit) {
            return Err(Error::InvalidConfig(format!(
                "h = {} must lie in (0, √3/2)",
                self.h
            )));
        }
        let half = self.p() * self.alpha().cos();
        if (half - 0.5).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "p·cos α = {half}, expected 1/2"
            )));
        }
        Ok(())
    }
}

/// The rotation family as a planar zipper and its line zipper.
pub fn build_example2(cfg: Example2Config) -> Result<(Zipper, LineZipper)> {
    cfg.validate()?;
    let p = cfg.p();
    let h = cfg.h;
    let zipper = validate_zipper(
        vec![
            AffineMap::new(cfg.rotation_a().scale(p), Vector::zeros(2))?,
            AffineMap::new(cfg.rotation_b().scale(p), Vector::from([0.5, h]))?,
        ],
        vec![
            Vector::from([0.0, 0.0]),
            Vector::from([0.5, h]),
            Vector::from([1.0, 0.0]),
        ],
        Signature::preserving(2),
        ValidationOptions::default(),
    )?;
    let line = line_zipper(vec![0.0, 0.5, 1.0], Signature::preserving(2))?;
    Ok((zipper, line))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parametrization::eval_f;
    use crate::smoothing::{solve_h, SmoothLift};

    #[test]
    fn split_family() {
        let (z, t) = build_example1(Example1Config::split(0.3)).unwrap();
        assert_eq!(
            eval_f(0.5, &z, &t, 1e-9).unwrap().value,
            Vector::scalar(0.3)
        );
        let (z, t) = build_example1(Example1Config::split(0.5)).unwrap();
        assert!((eval_f(0.3, &z, &t, 1e-12).unwrap().value[0] - 0.3).abs() < 1e-12);
        assert!(build_example1(Example1Config::split(1.0)).is_err());
        assert!(build_example1(Example1Config::split(0.0)).is_err());
    }

    #[test]
    fn general_family_matches_closed_form() {
        let cfg = Example1Config::general(0.4, 0.3, 1.0);
        assert_eq!(cfg.ratios(), (0.3, 0.7));
        assert!((cfg.closed_form_h() - 0.18 / 0.46).abs() < 1e-15);
        let (z, t) = build_example1(cfg).unwrap();
        let h = solve_h(&z, &t).unwrap();
        assert!((h[0] - 0.18 / 0.46).abs() < 1e-12);
        let lift = SmoothLift::new(&z, &t).unwrap();
        assert!((lift.node_integrals()[1][0] - cfg.closed_form_g1()).abs() < 1e-12);
        assert!(build_example1(Example1Config::general(0.4, 1.0, 0.3)).is_err());
    }

    #[test]
    fn rotation_family() {
        let cfg = Example2Config::new(0.5);
        assert!((cfg.p() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((cfg.alpha() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let (z, _) = build_example2(cfg).unwrap();
        let image = z.maps()[0].apply_unchecked(&Vector::from([1.0, 0.0]));
        assert!(image.distance(&Vector::from([0.5, 0.5])) < 1e-15);
        assert!(matches!(
            build_example2(Example2Config::new(3f64.sqrt() / 2.0)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(build_example2(Example2Config::new(0.0)).is_err());
    }
}
