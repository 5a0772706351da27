//! Independent numerical checks of the construction: functional-equation
//! residuals, quadrature of `f` against `g`, central differences of `g`
//! against `f`, tangent continuity of the smooth curve, and eventual
//! contraction of the lifted maps.
//!
//! Simple checks report their raw worst error. Compound checks (quadrature,
//! derivative, tangent) fold several conditions into one normalized score,
//! reported with tolerance `1.0`; the raw numbers are in `details`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{operator_norm, Matrix, Vector};
use crate::parametrization::Parametrization;
use crate::smoothing::SmoothLift;
use crate::zipper::{normalize_zipper, LineZipper, Zipper, WORD_BUDGET};

/// Worst offenders kept in a report.
const DETAIL_LIMIT: usize = 8;

/// Margin below one for eventual contraction.
pub const EVENTUAL_MARGIN: f64 = 1e-9;

/// Tolerance for `eval_f` inside the quadrature oracle.
pub const QUADRATURE_EVAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Offender {
    /// Sample parameter, or word length for contraction checks.
    pub at: f64,
    pub error: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub check_name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub details: Vec<Offender>,
}

impl VerificationReport {
    fn from_offenders(name: &str, tolerance: f64, mut all: Vec<Offender>) -> Self {
        let samples = all.len();
        let max_error = all.iter().map(|o| o.score).fold(0.0, f64::max);
        all.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.at.total_cmp(&b.at)));
        all.truncate(DETAIL_LIMIT);
        VerificationReport {
            check_name: name.to_string(),
            max_error,
            tolerance,
            samples,
            passed: max_error <= tolerance,
            details: all,
        }
    }
}

/// Bits of the grid that functional-equation samples are drawn from.
pub const SAMPLE_GRID_BITS: i32 = 40;

/// Uniform samples on the grid `k / 2^40` in `[0, 1]`. For line zippers with
/// dyadic nodes `T_i(s)` is then exact in floating point; otherwise a one-ulp
/// change of parameter moves `f` by its Hölder modulus, which for rough
/// curves dwarfs any evaluation tolerance.
fn grid_samples(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let scale = 2f64.powi(-SAMPLE_GRID_BITS);
    (0..count)
        .map(|_| rng.gen_range(0..=1u64 << SAMPLE_GRID_BITS) as f64 * scale)
        .collect()
}

fn uniform_samples(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| lo + (hi - lo) * rng.gen::<f64>())
        .collect()
}

/// Residual of `f(T_i(s)) = S_i(f(s))` over random grid `s` and every `i`.
pub fn feq_f_residual(
    f: &Parametrization,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let line = f.line();
    let maps = f.zipper().maps();
    let ss = grid_samples(samples, seed);
    let rows = ss
        .par_iter()
        .map(|&s| {
            let fs = f.eval(s, tol)?.value;
            let mut worst = 0.0f64;
            for (i, map) in maps.iter().enumerate() {
                let lhs = f.eval(line.forward(i, s), tol)?.value;
                worst = worst.max(lhs.distance(&map.apply_unchecked(&fs)));
            }
            Ok(Offender {
                at: s,
                error: worst,
                score: worst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_offenders("feq-f", 2.0 * tol, rows))
}

/// Residual of the branch recursion for `g`:
/// `g(T_i(s)) = g(t_{i-1}) + z_{i-1+ε_i}(T_i(s) - t_{i-1}) + q_i A_i (g(s) - ε_i h)`.
pub fn feq_g_residual(
    zipper: &Zipper,
    lift: &SmoothLift,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let line = lift.line();
    let parts = zipper.decompose();
    let ss = grid_samples(samples, seed);
    let rows = ss
        .par_iter()
        .map(|&s| {
            let gs = lift.eval_g(s, tol)?.value;
            let mut worst = 0.0f64;
            for (i, part) in parts.iter().enumerate() {
                let t = line.forward(i, s);
                let lhs = lift.eval_g(t, tol)?.value;
                let reversed = zipper.signature().reverses(i);
                let inner = if reversed { &gs - lift.h() } else { gs.clone() };
                let q = line.ratio(i);
                let rhs = &(&lift.node_integrals()[i] + &part.offset.scale(t - line.nodes()[i]))
                    + &part.linear_part.mul_vec(&inner)?.scale(q);
                worst = worst.max(lhs.distance(&rhs));
            }
            Ok(Offender {
                at: s,
                error: worst,
                score: worst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_offenders("feq-g", 2.0 * tol, rows))
}

/// Composite midpoint rule for `∫₀ᵗ f` with `panels` equal panels.
pub fn quadrature_g(t: f64, zipper: &Zipper, line: &LineZipper, panels: usize) -> Result<Vector> {
    quadrature_with(&Parametrization::new(zipper, line)?, t, panels)
}

pub fn quadrature_with(f: &Parametrization, t: f64, panels: usize) -> Result<Vector> {
    if panels == 0 {
        return Err(Error::DegenerateInput(
            "quadrature needs at least one panel".into(),
        ));
    }
    crate::parametrization::check_domain(t)?;
    let dim = f.zipper().dim();
    if t == 0.0 {
        return Ok(Vector::zeros(dim));
    }
    let width = t / panels as f64;
    let values = (0..panels)
        .into_par_iter()
        .map(|k| {
            f.eval((k as f64 + 0.5) * width, QUADRATURE_EVAL_TOL)
                .map(|e| e.value)
        })
        .collect::<Result<Vec<_>>>()?;
    // Fixed summation order.
    let mut sum = Vector::zeros(dim);
    for v in &values {
        sum = &sum + v;
    }
    Ok(sum.scale(width))
}

#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    pub points: Vec<f64>,
    /// Panel counts `2^k` for each `k` here, increasing.
    pub panel_exponents: Vec<u32>,
    /// With `N` panels the disagreement may be `max(floor, constant·N^-θ)`.
    pub holder_exponent: f64,
    pub constant: f64,
    /// Below this, agreement counts as reached and growth is ignored.
    pub floor: f64,
    /// Allowed growth between consecutive panel counts.
    pub slack: f64,
    pub g_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            points: (0..=10).map(|k| k as f64 / 10.0).collect(),
            panel_exponents: (8..=16).collect(),
            holder_exponent: 0.5,
            constant: 1.0,
            floor: 1e-6,
            slack: 1.05,
            g_tol: 1e-13,
        }
    }
}

/// Disagreement `‖quadrature(t, 2^k) - g(t)‖` for each panel exponent.
pub fn quadrature_disagreements(
    f: &Parametrization,
    lift: &SmoothLift,
    t: f64,
    exponents: &[u32],
    g_tol: f64,
) -> Result<Vec<f64>> {
    let g = lift.eval_g(t, g_tol)?.value;
    exponents
        .iter()
        .map(|&k| Ok(quadrature_with(f, t, 1usize << k)?.distance(&g)))
        .collect()
}

/// Quadrature of `f` against `g` at several points. Per point, the score is
/// the worst of `e_k / max(floor, constant·N_k^-θ)` and
/// `e_{k+1} / (slack·e_k + floor)` over the panel counts `N_k`.
pub fn quadrature_check(
    f: &Parametrization,
    lift: &SmoothLift,
    options: &QuadratureOptions,
) -> Result<VerificationReport> {
    let mut rows = Vec::with_capacity(options.points.len());
    for &t in &options.points {
        let errs = quadrature_disagreements(f, lift, t, &options.panel_exponents, options.g_tol)?;
        let mut score = 0.0f64;
        for (&k, &e) in options.panel_exponents.iter().zip(&errs) {
            let panels = 2f64.powi(k as i32);
            let allowed = options
                .floor
                .max(options.constant * panels.powf(-options.holder_exponent));
            score = score.max(e / allowed);
        }
        for w in errs.windows(2) {
            score = score.max(w[1] / (options.slack * w[0] + options.floor));
        }
        rows.push(Offender {
            at: t,
            error: *errs.last().unwrap_or(&0.0),
            score,
        });
    }
    Ok(VerificationReport::from_offenders("quadrature", 1.0, rows))
}

#[derive(Debug, Clone)]
pub struct DerivativeOptions {
    pub samples: usize,
    /// Strictly decreasing step sizes.
    pub deltas: Vec<f64>,
    pub holder_exponent: f64,
    pub constant: f64,
    pub slack: f64,
    pub f_tol: f64,
    pub g_tol: f64,
    pub seed: u64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        DerivativeOptions {
            samples: 100,
            deltas: vec![1e-4, 1e-6, 1e-8],
            holder_exponent: 0.5,
            constant: 10.0,
            slack: 1.5,
            f_tol: 1e-12,
            g_tol: 1e-13,
            seed: 0x5eed,
        }
    }
}

/// Central differences of `g` against `f`.
///
/// For each sample the error at the smallest step must be at most
/// `constant·δ^θ`, and errors may grow by at most `slack` from one step to
/// the next, beyond the evaluation noise `(g_tol + 4ε(1 + ‖g‖))/δ + f_tol`
/// that any finite difference of certified values carries. The score is the
/// worst of these ratios.
pub fn derivative_check(
    f: &Parametrization,
    lift: &SmoothLift,
    options: &DerivativeOptions,
) -> Result<VerificationReport> {
    let deltas = &options.deltas;
    if deltas.is_empty()
        || deltas.windows(2).any(|w| !(w[1] < w[0]))
        || deltas[deltas.len() - 1] <= 0.0
    {
        return Err(Error::DegenerateInput(
            "deltas must be positive and strictly decreasing".into(),
        ));
    }
    let widest = deltas[0];
    let ts = uniform_samples(options.samples, widest, 1.0 - widest, options.seed);
    let rows = ts
        .par_iter()
        .map(|&t| {
            let ft = f.eval(t, options.f_tol)?.value;
            let mut errors = Vec::with_capacity(deltas.len());
            let mut noise = Vec::with_capacity(deltas.len());
            for &delta in deltas {
                let (hi, lo) = (t + delta, t - delta);
                let g_hi = lift.eval_g(hi, options.g_tol)?.value;
                let g_lo = lift.eval_g(lo, options.g_tol)?.value;
                let slope = (&g_hi - &g_lo).scale(1.0 / (hi - lo));
                errors.push(slope.distance(&ft));
                let scale = 1.0 + g_hi.norm().max(g_lo.norm());
                noise.push((options.g_tol + 4.0 * f64::EPSILON * scale) / delta + options.f_tol);
            }
            let smallest = deltas[deltas.len() - 1];
            let last = errors[errors.len() - 1];
            let mut score = last / (options.constant * smallest.powf(options.holder_exponent));
            for j in 1..errors.len() {
                score = score.max(errors[j] / (options.slack * errors[j - 1] + noise[j]));
            }
            Ok(Offender {
                at: t,
                error: last,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_offenders("derivative", 1.0, rows))
}

#[derive(Debug, Clone)]
pub struct TangentOptions {
    pub samples: usize,
    pub t_min: f64,
    /// Required drop of the largest angular increment when samples double.
    pub required_ratio: f64,
    pub f_tol: f64,
}

impl Default for TangentOptions {
    fn default() -> Self {
        TangentOptions {
            samples: 256,
            t_min: 1.0 / 64.0,
            required_ratio: 1.8,
            f_tol: 1e-12,
        }
    }
}

/// Largest angle between consecutive unit vectors `v(t)/‖v(t)‖` on a
/// `count`-point uniform grid over `[t_min, 1]`, with the `t` where it occurs.
pub fn max_angular_increment<F>(tangent: F, count: usize, t_min: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<Vector> + Sync,
{
    let ts: Vec<f64> = (0..count)
        .map(|j| t_min + (1.0 - t_min) * j as f64 / (count - 1) as f64)
        .collect();
    let tangents = ts
        .par_iter()
        .map(|&t| {
            let v = tangent(t)?;
            let norm = v.norm();
            if norm <= 1e-12 {
                return Err(Error::ZeroTangent { t, norm });
            }
            Ok(v.scale(1.0 / norm))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = (0.0, ts[0]);
    for (j, w) in tangents.windows(2).enumerate() {
        let chord = w[0].distance(&w[1]);
        let angle = 2.0 * (chord / 2.0).min(1.0).asin();
        if angle > worst.0 {
            worst = (angle, ts[j]);
        }
    }
    Ok(worst)
}

/// Continuity of the tangent field of the curve `g` away from `t = 0`.
///
/// The tangent of `g` is `f`. With `N = samples`, the score is
/// `required_ratio · inc(2N) / inc(N)` where `inc` is the largest angular
/// increment between neighbouring samples; it passes when the increment
/// shrinks by at least `required_ratio`.
pub fn tangent_scan(f: &Parametrization, options: &TangentOptions) -> Result<VerificationReport> {
    if !f.zipper().is_normalized() {
        return Err(Error::NotNormalized(f.zipper().first_vertex().norm()));
    }
    scan(|t| Ok(f.eval(t, options.f_tol)?.value), options)
}

/// [`tangent_scan`] for the graph `(t, g(t))` of a scalar-valued lift, whose
/// tangent is `(1, f(t))`.
pub fn graph_tangent_scan(
    f: &Parametrization,
    options: &TangentOptions,
) -> Result<VerificationReport> {
    scan(
        |t| Ok(f.eval(t, options.f_tol)?.value.prepend(1.0)),
        options,
    )
}

fn scan<F>(tangent: F, options: &TangentOptions) -> Result<VerificationReport>
where
    F: Fn(f64) -> Result<Vector> + Sync,
{
    if options.samples < 16 {
        return Err(Error::DegenerateInput(
            "tangent scan needs at least 16 samples".into(),
        ));
    }
    if !(options.t_min > 0.0 && options.t_min < 1.0) {
        return Err(Error::DegenerateInput(format!(
            "t_min = {} must lie in (0, 1)",
            options.t_min
        )));
    }
    let (coarse, at_coarse) = max_angular_increment(&tangent, options.samples, options.t_min)?;
    let (fine, at_fine) = max_angular_increment(&tangent, 2 * options.samples, options.t_min)?;
    let score = if coarse > 0.0 {
        options.required_ratio * fine / coarse
    } else if fine > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let rows = vec![
        Offender {
            at: at_fine,
            error: fine,
            score,
        },
        Offender {
            at: at_coarse,
            error: coarse,
            score: 0.0,
        },
    ];
    let mut report = VerificationReport::from_offenders("tangent", 1.0, rows);
    report.samples = 3 * options.samples;
    Ok(report)
}

/// Largest `‖M_w‖^{1/L}` over words of each length `L = 1..=max_word_length`,
/// stopping at the first length whose value is below `1 - EVENTUAL_MARGIN`.
pub fn eventual_contraction_of(
    linears: &[Matrix],
    max_word_length: usize,
) -> Result<VerificationReport> {
    if max_word_length == 0 || linears.is_empty() {
        return Err(Error::DegenerateInput(
            "need at least one map and word length >= 1".into(),
        ));
    }
    let words = (linears.len() as u128)
        .checked_pow(max_word_length as u32)
        .unwrap_or(u128::MAX);
    if words > WORD_BUDGET {
        return Err(Error::CombinatorialBudget {
            words,
            budget: WORD_BUDGET,
        });
    }
    let tolerance = 1.0 - EVENTUAL_MARGIN;
    let mut rows = Vec::new();
    let mut best = f64::INFINITY;
    for len in 1..=max_word_length {
        let mut worst = 0.0f64;
        word_norms(
            linears,
            &Matrix::identity(linears[0].dim()),
            len,
            &mut worst,
        );
        let value = worst.powf(1.0 / len as f64);
        rows.push(Offender {
            at: len as f64,
            error: value,
            score: value,
        });
        best = best.min(value);
        if value < tolerance {
            break;
        }
    }
    let samples = rows.len();
    let mut report = VerificationReport::from_offenders("contraction", tolerance, rows);
    report.max_error = best;
    report.passed = best < tolerance;
    report.samples = samples;
    Ok(report)
}

fn word_norms(linears: &[Matrix], prefix: &Matrix, left: usize, worst: &mut f64) {
    if left == 0 {
        *worst = worst.max(operator_norm(prefix));
        return;
    }
    for m in linears {
        word_norms(linears, &prefix.mul_mat_unchecked(m), left - 1, worst);
    }
}

pub fn eventual_contraction_check(
    zipper: &Zipper,
    max_word_length: usize,
) -> Result<VerificationReport> {
    let linears: Vec<Matrix> = zipper.maps().iter().map(|s| s.linear().clone()).collect();
    eventual_contraction_of(&linears, max_word_length)
}

/// Which checks [`run_suite`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    FunctionalEquations,
    Quadrature,
    Derivative,
    Tangent,
    Contraction,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "all" => Suite::All,
            "feq" => Suite::FunctionalEquations,
            "quad" => Suite::Quadrature,
            "deriv" => Suite::Derivative,
            "tangent" => Suite::Tangent,
            "contraction" => Suite::Contraction,
            other => return Err(format!("unknown suite '{other}'")),
        })
    }
}

/// A Hölder exponent of the parametrization: `min_i log‖L_i‖ / log q_i`,
/// or `log c_L / (L log max q_i)` from the certificate when some map does
/// not contract on its own.
pub fn holder_exponent(zipper: &Zipper, line: &LineZipper) -> f64 {
    let factors = zipper.contraction_factors();
    if factors.iter().all(|&c| c < 1.0) {
        factors
            .iter()
            .zip(line.ratios())
            .map(|(&c, q)| {
                if c == 0.0 {
                    f64::INFINITY
                } else {
                    c.ln() / q.ln()
                }
            })
            .fold(f64::INFINITY, f64::min)
    } else {
        let cert = zipper.certificate();
        let q = line.ratios().into_iter().fold(0.0, f64::max);
        cert.factor.ln() / (cert.word_length as f64 * q.ln())
    }
}

/// Runs the selected checks on a zipper, normalizing it first.
///
/// Tangent continuity is checked on the curve `g` itself when `n ≥ 2`, and
/// on the graph `(t, g(t))` for scalar zippers.
pub fn run_suite(
    zipper: &Zipper,
    line: &LineZipper,
    suite: Suite,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let (zipper, _) = normalize_zipper(zipper)?;
    let f = Parametrization::new(&zipper, line)?;
    let lift = SmoothLift::new(&zipper, line)?;
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let theta = holder_exponent(&zipper, line).min(0.5);
    let mut reports = Vec::new();
    if wants(Suite::FunctionalEquations) {
        reports.push(feq_f_residual(&f, 1000, seed, 1e-9)?);
        reports.push(feq_g_residual(&zipper, &lift, 1000, seed, 1e-9)?);
    }
    if wants(Suite::Quadrature) {
        let options = QuadratureOptions {
            holder_exponent: theta,
            ..QuadratureOptions::default()
        };
        reports.push(quadrature_check(&f, &lift, &options)?);
    }
    if wants(Suite::Derivative) {
        let options = DerivativeOptions {
            seed,
            holder_exponent: theta,
            ..DerivativeOptions::default()
        };
        reports.push(derivative_check(&f, &lift, &options)?);
    }
    if wants(Suite::Tangent) {
        if zipper.dim() == 1 {
            reports.push(graph_tangent_scan(&f, &TangentOptions::default())?);
        } else {
            reports.push(tangent_scan(&f, &TangentOptions::default())?);
        }
    }
    if wants(Suite::Contraction) {
        let lifted = crate::smoothing::smooth_zipper(&lift)?;
        reports.push(eventual_contraction_check(
            &lifted,
            crate::zipper::DEFAULT_WORD_LENGTH,
        )?);
    }
    Ok(reports)
}
