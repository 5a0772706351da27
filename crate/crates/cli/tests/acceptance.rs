//! End-to-end acceptance suite. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use zipper::attractor::{hausdorff_residual, refine};
use zipper::geometry::Vector;
use zipper::presets::{build_example1, build_example2, Example1Config, Example2Config};
use zipper::smoothing::{inverse_design, solve_h};
use zipper::verification::{
    derivative_check, eventual_contraction_check, feq_f_residual, feq_g_residual, quadrature_g,
    tangent_scan, DerivativeOptions, TangentOptions,
};
use zipper::{
    chaos_game, eval_f, eval_g, product_zipper, smooth_zipper, Parametrization, SmoothLift,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SPLIT_P: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const ROTATION_H: [f64; 4] = [0.1, 0.3, 0.5, 0.8];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn parabola() -> Outcome {
    let (z, line) = build_example1(Example1Config::split(0.5)).map_err(text)?;
    let lift = SmoothLift::new(&z, &line).map_err(text)?;
    let mut worst = 0.0f64;
    for k in 0..1024 {
        let t = k as f64 / 1023.0;
        let g = eval_g(t, &lift, 1e-12).map_err(text)?.value[0];
        worst = worst.max((g - t * t / 2.0).abs());
    }
    check(
        worst <= 1e-9,
        format!("max |g(t) - t²/2| over 1024 points = {worst:.3e} (limit 1e-9)"),
    )
}

fn closed_form_h() -> Outcome {
    let mut worst = 0.0f64;
    for p in SPLIT_P {
        let (z, line) = build_example1(Example1Config::split(p)).map_err(text)?;
        worst = worst.max((solve_h(&z, &line).map_err(text)?[0] - p).abs());
    }
    let (z, line) = build_example1(Example1Config::general(0.4, 0.3, 1.0)).map_err(text)?;
    let general = (solve_h(&z, &line).map_err(text)?[0] - 0.18 / 0.46).abs();
    check(
        worst <= 1e-12 && general <= 1e-12,
        format!("max |h - p| = {worst:.3e}, general family |h - 0.18/0.46| = {general:.3e} (limit 1e-12)"),
    )
}

fn rotation_fixed_point() -> Outcome {
    let mut fixed = f64::NAN;
    let mut closed = 0.0f64;
    let mut quad = 0.0f64;
    let mut monotone = true;
    for h in ROTATION_H {
        let cfg = Example2Config::new(h);
        let (z, line) = build_example2(cfg).map_err(text)?;
        let g1 = solve_h(&z, &line).map_err(text)?;
        let d = 1.0 - cfg.p() * cfg.alpha().cos();
        closed = closed.max(g1.distance(&Vector::from([1.0 / (4.0 * d), h / (2.0 * d)])));
        if h == 0.5 {
            fixed = g1.distance(&Vector::from([0.5, 0.5]));
        }
        let errors = (8..=16)
            .map(|k| Ok(quadrature_g(1.0, &z, &line, 1 << k)?.distance(&g1)))
            .collect::<zipper::Result<Vec<f64>>>()
            .map_err(text)?;
        quad = quad.max(*errors.last().unwrap());
        // Disagreements under 1e-6 count as converged.
        monotone &= errors.windows(2).all(|w| w[1] <= 1.05 * w[0] + 1e-6);
    }
    check(
        fixed <= 1e-12 && closed <= 1e-12 && quad <= 2e-3 && monotone,
        format!(
            "h=0.5 |g(1) - (0.5, 0.5)| = {fixed:.3e}, closed form {closed:.3e} (limit 1e-12); \
             quadrature at 2^16 panels {quad:.3e} (limit 2e-3), decreasing: {monotone}"
        ),
    )
}

fn functional_equations() -> Outcome {
    let mut cases = vec![
        build_example1(Example1Config::split(0.3)),
        build_example1(Example1Config::general(0.4, 0.3, 1.0)),
    ];
    cases.extend(
        ROTATION_H
            .iter()
            .map(|&h| build_example2(Example2Config::new(h))),
    );
    let (mut worst_f, mut worst_g) = (0.0f64, 0.0f64);
    let mut passed = true;
    for (seed, case) in cases.into_iter().enumerate() {
        let (z, line) = case.map_err(text)?;
        let f = Parametrization::new(&z, &line).map_err(text)?;
        let lift = SmoothLift::new(&z, &line).map_err(text)?;
        let rf = feq_f_residual(&f, 1000, seed as u64, 1e-9).map_err(text)?;
        let rg = feq_g_residual(&z, &lift, 1000, seed as u64, 1e-9).map_err(text)?;
        passed &= rf.max_error <= 2e-9 && rg.max_error <= 2e-9;
        worst_f = worst_f.max(rf.max_error);
        worst_g = worst_g.max(rg.max_error);
    }
    check(
        passed,
        format!("max residual f: {worst_f:.3e}, g: {worst_g:.3e} (limit 2e-9, 6 zippers x 1000 t)"),
    )
}

fn fundamental_theorem() -> Outcome {
    let mut cases: Vec<(String, _)> = [0.3, 0.5, 0.7]
        .iter()
        .map(|&p| (format!("p={p}"), build_example1(Example1Config::split(p))))
        .collect();
    cases.extend(
        [0.3, 0.5]
            .iter()
            .map(|&h| (format!("h={h}"), build_example2(Example2Config::new(h)))),
    );
    let options = DerivativeOptions {
        deltas: vec![1e-4, 1e-6, 1e-8],
        holder_exponent: 0.5,
        constant: 10.0,
        ..Default::default()
    };
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, case) in cases {
        let (z, line) = case.map_err(text)?;
        let f = Parametrization::new(&z, &line).map_err(text)?;
        let lift = SmoothLift::new(&z, &line).map_err(text)?;
        let r = derivative_check(&f, &lift, &options).map_err(text)?;
        passed &= r.passed;
        lines.push(format!("{name} score {:.3}", r.max_error));
    }
    check(
        passed,
        format!("{} (pass at ≤ 1 under 10·δ^0.5)", lines.join(", ")),
    )
}

fn lifted_zipperhood() -> Outcome {
    let mut cases: Vec<(String, _)> = [0.3, 0.7]
        .iter()
        .map(|&p| (format!("p={p}"), build_example1(Example1Config::split(p))))
        .collect();
    cases.extend(
        ROTATION_H
            .iter()
            .map(|&h| (format!("h={h}"), build_example2(Example2Config::new(h)))),
    );
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, case) in cases {
        let (z, line) = case.map_err(text)?;
        let lift = SmoothLift::new(&z, &line).map_err(text)?;
        // Validation enforces the vertex conditions at tolerance 1e-9.
        let w = smooth_zipper(&lift).map_err(|e| format!("{name}: {e}"))?;
        let contraction = eventual_contraction_check(&w, 8).map_err(text)?;
        let poly = refine(&w, 12).map_err(text)?;
        let residual = hausdorff_residual(&poly, &w);
        passed &= contraction.passed && residual <= 2.0 * poly.mesh_bound;
        lines.push(format!(
            "{name} residual {residual:.2e} vs mesh {:.2e}",
            poly.mesh_bound
        ));
    }
    check(
        passed,
        format!("vertices and contraction ok; {}", lines.join(", ")),
    )
}

fn graph_identity() -> Outcome {
    let mut worst = 0.0f64;
    let cases = [
        build_example1(Example1Config::split(0.3)),
        build_example2(Example2Config::new(0.5)),
    ];
    for (seed, case) in cases.into_iter().enumerate() {
        let (z, line) = case.map_err(text)?;
        let graph = product_zipper(&z, &line).map_err(text)?;
        for p in chaos_game(&graph, 1000, seed as u64) {
            let f = eval_f(p[0], &z, &line, 1e-12).map_err(text)?.value;
            worst = worst.max(p.tail().distance(&f));
        }
        let lift = SmoothLift::new(&z, &line).map_err(text)?;
        let w = smooth_zipper(&lift).map_err(text)?;
        for p in chaos_game(&w, 1000, 100 + seed as u64) {
            let g = eval_g(p[0], &lift, 1e-12).map_err(text)?.value;
            worst = worst.max(p.tail().distance(&g));
        }
    }
    check(
        worst <= 1e-6,
        format!("max distance to the graph over 4 x 1000 points = {worst:.3e} (limit 1e-6)"),
    )
}

fn inverse_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    for p in SPLIT_P {
        let (z, line) = build_example1(Example1Config::split(p)).map_err(text)?;
        let lift = SmoothLift::new(&z, &line).map_err(text)?;
        let g = lift.node_integrals();
        let (y1, y2) = inverse_design(0.5, 0.5, 0.5, &g[1], &g[2]).map_err(text)?;
        worst = worst.max((y1[0] - p).abs()).max((y2[0] - 1.0).abs());
    }
    check(
        worst <= 1e-9,
        format!("max |y - y_true| = {worst:.3e} (limit 1e-9)"),
    )
}

fn tangent_continuity() -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    for h in ROTATION_H {
        let (z, line) = build_example2(Example2Config::new(h)).map_err(text)?;
        let f = Parametrization::new(&z, &line).map_err(text)?;
        match tangent_scan(&f, &TangentOptions::default()) {
            Ok(r) => {
                passed &= r.passed;
                let fine = r
                    .details
                    .iter()
                    .find(|o| o.score > 0.0)
                    .map_or(0.0, |o| o.error);
                let coarse = r
                    .details
                    .iter()
                    .find(|o| o.score == 0.0)
                    .map_or(0.0, |o| o.error);
                lines.push(format!("h={h} ratio {:.3}", coarse / fine));
            }
            Err(e) => {
                passed = false;
                lines.push(format!("h={h} error {e}"));
            }
        }
    }
    check(
        passed,
        format!(
            "angular increment shrinks on doubling by {} (need ≥ 1.8)",
            lines.join(", ")
        ),
    )
}

fn branch_constant() -> Outcome {
    let (z, line) = build_example2(Example2Config::new(0.5)).map_err(text)?;
    let lift = SmoothLift::new(&z, &line).map_err(text)?;
    let residual = feq_g_residual(&z, &lift, 1000, 10, 1e-9).map_err(text)?;

    // As h → 0 the curve flattens to the segment, g(t) → (t²/2, 0), and the
    // second branch constant g(1/2) - z_1/2 tends to (-1/8, 0).
    let cfg = Example2Config::new(1e-9);
    let (z, line) = build_example2(cfg).map_err(text)?;
    let lift = SmoothLift::new(&z, &line).map_err(text)?;
    let derived = lift.branch_constant(1);
    let d = 1.0 - cfg.p() * cfg.alpha().cos();
    let closed_form = cfg
        .rotation_a()
        .mul_vec(&Vector::from([1.0 / (2.0 * d), cfg.h / d]))
        .map_err(text)?
        .scale(cfg.p() / 2.0);
    let gap = (closed_form[0] - derived[0]).abs();
    check(
        residual.max_error <= 2e-9 && gap > 0.3 && (derived[0] + 0.125).abs() < 1e-6,
        format!(
            "derived constant residual {:.3e} (limit 2e-9); at h=1e-9 derived {:.6}, rotated closed form {:.6}, gap {gap:.3} (> 0.3)",
            residual.max_error, derived[0], closed_form[0]
        ),
    )
}

fn run_twice(args: &[&str], outputs: &[&Path]) -> Result<bool, String> {
    let bin = env!("CARGO_BIN_EXE_zipper");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = Command::new(bin).args(args).output().map_err(text)?;
        let mut bytes = out.stdout;
        for path in outputs {
            bytes.extend(std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?);
            std::fs::remove_file(path).map_err(text)?;
        }
        runs.push((out.status.code(), bytes));
    }
    Ok(runs[0] == runs[1] && !runs[0].1.is_empty())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(text)?;
    let svg = dir.path().join("out.svg");
    let csv = dir.path().join("out.csv");
    let (svg_arg, csv_arg) = (svg.to_str().unwrap(), csv.to_str().unwrap());
    let render = run_twice(
        &[
            "render",
            "--example2",
            "h=0.5",
            "--depth",
            "10",
            "--lifted",
            "--projection",
            "1,2",
            "--svg",
            svg_arg,
            "--csv",
            csv_arg,
        ],
        &[&svg, &csv],
    )?;
    let verify = run_twice(
        &[
            "verify",
            "--example1",
            "p=0.3",
            "--suite",
            "all",
            "--seed",
            "7",
        ],
        &[],
    )?;
    check(
        render && verify,
        format!("render identical: {render}, verify identical: {verify}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("parabola exactness", parabola),
        ("closed-form g(1)", closed_form_h),
        (
            "rotation family fixed point and quadrature",
            rotation_fixed_point,
        ),
        ("functional-equation residuals", functional_equations),
        ("fundamental theorem", fundamental_theorem),
        ("lifted system is a zipper", lifted_zipperhood),
        ("graph identity", graph_identity),
        ("inverse design round trip", inverse_round_trip),
        ("tangent continuity", tangent_continuity),
        ("rotation lift branch constant", branch_constant),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("acceptance {:>2} {tag} {name}: {detail}", k + 1);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
