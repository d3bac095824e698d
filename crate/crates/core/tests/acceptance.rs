//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qgraph::casimir::{
    casimir_green_method, casimir_mode_sum_with_cutoff, extrapolate_tau, RegularizationConfig,
};
use qgraph::graph::{Graph, VertexCoupling};
use qgraph::greens::{free_green, star_green, trace_gamma, two_vertex_green};
use qgraph::quadrature::{integrate, QuadratureOptions};
use qgraph::scattering::{
    build_vertex_smatrix, reflection_transmission, CompositeAmplitudes, VertexSMatrix,
};
use qgraph::spectrum::{dirichlet_eigenvalues, find_eigenvalues, SpectrumResult};
use qgraph::CasimirResult;

const K: VertexCoupling = VertexCoupling::Kirchhoff;
const D: VertexCoupling = VertexCoupling::Dirichlet;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn spectrum_for(g: &Graph, cfg: &RegularizationConfig) -> Result<(SpectrumResult, f64), String> {
    let k_max = 36.0 / cfg.tau_min();
    let s = find_eigenvalues(g, k_max, 1e-10).map_err(|e| e.to_string())?;
    ensure(s.weyl_deviation <= s.weyl_bound, || {
        format!("Weyl audit failed: {} > {}", s.weyl_deviation, s.weyl_bound)
    })?;
    Ok((s, k_max))
}

fn mode_sum(g: &Graph, cfg: &RegularizationConfig) -> Result<CasimirResult, String> {
    let (s, k_max) = spectrum_for(g, cfg)?;
    casimir_mode_sum_with_cutoff(&s.with_multiplicity(), g.total_length(), k_max, cfg)
        .map_err(|e| e.to_string())
}

fn green(g: &Graph, cfg: &RegularizationConfig) -> Result<CasimirResult, String> {
    casimir_green_method(g, cfg).map_err(|e| e.to_string())
}

fn timed<T>(f: impl FnOnce() -> Result<T, String>) -> Result<(T, Duration), String> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed()))
}

fn interval_benchmark() -> Check {
    let cfg = RegularizationConfig::default();
    let limit = Duration::from_secs(10);
    let mut worst = (0.0f64, 0.0f64, Duration::ZERO);
    for ell in [0.5, 1.0, 2.0] {
        let g = Graph::interval(ell, D);
        let want = -PI / (24.0 * ell);
        let (m, tm) = timed(|| mode_sum(&g, &cfg))?;
        let (gr, tg) = timed(|| green(&g, &cfg))?;
        let (em, eg) = (rel(m.energy, want), rel(gr.energy, want));
        ensure(em <= 1e-8, || {
            format!("mode sum at ell={ell}: relative error {em:.3e}")
        })?;
        ensure(eg <= 1e-4, || {
            format!("green at ell={ell}: relative error {eg:.3e}")
        })?;
        ensure(tm < limit && tg < limit, || {
            format!("ell={ell}: runs took {tm:?} and {tg:?}")
        })?;
        worst = (worst.0.max(em), worst.1.max(eg), worst.2.max(tm).max(tg));
    }
    Ok(format!(
        "mode sum rel err <= {:.1e}, green rel err <= {:.1e}, slowest run {:.2?}",
        worst.0, worst.1, worst.2
    ))
}

fn cross_method() -> Check {
    let cfg = RegularizationConfig::default();
    let mut worst: f64 = 0.0;
    for ell in [0.5, 1.0, 2.0, 4.0] {
        let g = Graph::interval(ell, D);
        let (a, b) = (green(&g, &cfg)?.energy, mode_sum(&g, &cfg)?.energy);
        let d = rel(a, b);
        ensure(d <= 1e-3, || {
            format!("ell={ell}: green {a} vs mode sum {b}")
        })?;
        worst = worst.max(d);
    }
    Ok(format!("max relative difference {worst:.1e}"))
}

fn unitarity() -> Check {
    let couplings = [
        VertexCoupling::Delta(-2.0),
        VertexCoupling::Delta(0.0),
        VertexCoupling::Delta(0.5),
        VertexCoupling::Delta(3.0),
        D,
    ];
    let (mut defect, mut reversal): (f64, f64) = (0.0, 0.0);
    let mut cases = 0;
    for k in [0.1, 1.0, 5.0, 20.0] {
        for n in 1..=6 {
            for cp in couplings {
                let s = build_vertex_smatrix(n, cp, k).map_err(|e| e.to_string())?;
                let back = build_vertex_smatrix(n, cp, -k).map_err(|e| e.to_string())?;
                let diff = (&back.entries - s.entries.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                defect = defect.max(s.unitarity_defect());
                reversal = reversal.max(diff);
                ensure(defect <= 1e-12 && reversal <= 1e-12, || {
                    format!("k={k} N={n} {cp:?}: |SS^+ - I| {defect:.1e}, |S(-k) - S^+(k)| {reversal:.1e}")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} cases, max |SS^+ - I| {defect:.1e}, max |S(-k) - S^+(k)| {reversal:.1e}"
    ))
}

fn second_difference(
    g: impl Fn(f64) -> Result<Complex64, String>,
    x: f64,
    k: Complex64,
    h: f64,
) -> Result<f64, String> {
    let g0 = g(x)?;
    let r = (g(x + h)? - 2.0 * g0 + g(x - h)?) / (h * h) + k * k * g0;
    Ok(r.norm() / (k * k * g0).norm().max(1.0))
}

fn green_ode() -> Check {
    let h = 1e-4;
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst: f64 = 0.0;

    let s_cache: Vec<(f64, VertexSMatrix)> = (0..20)
        .map(|_| {
            let k = rng.gen_range(0.2..6.0);
            (k, build_vertex_smatrix(3, K, k).unwrap())
        })
        .collect();
    for (k, s) in &s_cache {
        let k = c(*k, 0.0);
        let (a, b) = (rng.gen_range(0..3usize), rng.gen_range(0..3usize));
        let xi: f64 = rng.gen_range(0.0..3.0);
        let xf = loop {
            let x = rng.gen_range(2.0 * h..3.0);
            if a != b || (x - xi).abs() > 100.0 * h {
                break x;
            }
        };
        let res = second_difference(
            |x| {
                star_green(a, b, k, xi, x, s)
                    .map(|d| d.total)
                    .map_err(|e| e.to_string())
            },
            xf,
            k,
            h,
        )?;
        ensure(res <= 1e-5, || {
            format!("star k={k} leads ({a},{b}) xi={xi} xf={xf}: {res:.2e}")
        })?;
        worst = worst.max(res);
    }

    let mut done = 0;
    while done < 20 {
        let ell = rng.gen_range(0.5..3.0);
        let kr: f64 = rng.gen_range(0.2..6.0);
        if ((kr * ell / PI).round() - kr * ell / PI).abs() < 0.05 {
            continue;
        }
        let k = c(kr, 0.0);
        let ca = CompositeAmplitudes::reflecting_bond(c(-1.0, 0.0), ell, k)
            .map_err(|e| e.to_string())?;
        let xi = rng.gen_range(0.0..ell);
        let xf = rng.gen_range(2.0 * h..ell - 2.0 * h);
        if (xf - xi).abs() <= 100.0 * h {
            continue;
        }
        let res = second_difference(
            |x| {
                two_vertex_green(k, xi, x, &ca)
                    .map(|d| d.total)
                    .map_err(|e| e.to_string())
            },
            xf,
            k,
            h,
        )?;
        ensure(res <= 1e-5, || {
            format!("two-vertex k={k} ell={ell} xi={xi} xf={xf}: {res:.2e}")
        })?;
        worst = worst.max(res);
        done += 1;
    }

    let mut jump_err: f64 = 0.0;
    let hj = 1e-5;
    for _ in 0..20 {
        let k = c(rng.gen_range(0.1..10.0), rng.gen_range(0.0..2.0));
        let x0 = rng.gen_range(-3.0..3.0);
        let g = |x: f64| free_green(k, x0, x).unwrap();
        let right = (-3.0 * g(x0) + 4.0 * g(x0 + hj) - g(x0 + 2.0 * hj)) / (2.0 * hj);
        let left = (3.0 * g(x0) - 4.0 * g(x0 - hj) + g(x0 - 2.0 * hj)) / (2.0 * hj);
        jump_err = jump_err.max((right - left - 1.0).norm());
    }
    ensure(jump_err <= 1e-6, || {
        format!("free Green jump off by {jump_err:.2e}")
    })?;
    Ok(format!(
        "40 points, max scaled residual {worst:.1e}, jump error {jump_err:.1e}"
    ))
}

fn eigenvalue_oracle() -> Check {
    let mut worst: f64 = 0.0;
    for ell in [0.5, 1.0, 2.0] {
        let g = Graph::interval(ell, D);
        let k_max = 20.0 * PI / ell;
        let s = find_eigenvalues(&g, k_max, 1e-12).map_err(|e| e.to_string())?;
        let want = dirichlet_eigenvalues(ell, 20);
        ensure(s.eigenvalues.len() == 20, || {
            format!("interval ell={ell}: {} roots", s.eigenvalues.len())
        })?;
        for (a, b) in s.eigenvalues.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        ensure(s.weyl_deviation <= s.weyl_bound, || {
            format!("interval ell={ell}: Weyl audit")
        })?;
    }
    let star = Graph::star(3, 1.0, K, D);
    let s = find_eigenvalues(&star, 5.0, 1e-12).map_err(|e| e.to_string())?;
    let want = [(0.5 * PI, 1), (PI, 2), (1.5 * PI, 1)];
    ensure(s.eigenvalues.len() == want.len(), || {
        format!("3-star roots {:?}", s.eigenvalues)
    })?;
    for ((&k, &m), (wk, wm)) in s.eigenvalues.iter().zip(&s.multiplicities).zip(want) {
        worst = worst.max((k - wk).abs());
        ensure(m == wm, || {
            format!("3-star root {k} multiplicity {m}, want {wm}")
        })?;
    }
    ensure(worst <= 1e-10, || {
        format!("max eigenvalue error {worst:.2e}")
    })?;

    let mut weyl_margin: f64 = 0.0;
    for g in [
        Graph::interval(1.0, D),
        Graph::interval(1.3, K),
        star.clone(),
        Graph::star(5, 0.7, K, K),
        Graph::star(4, 1.0, VertexCoupling::Delta(2.0), D),
    ] {
        let s = find_eigenvalues(&g, 100.0, 1e-10).map_err(|e| e.to_string())?;
        ensure(s.weyl_deviation <= s.weyl_bound, || {
            format!(
                "Weyl audit failed on {g:?}: {} > {}",
                s.weyl_deviation, s.weyl_bound
            )
        })?;
        weyl_margin = weyl_margin.max(s.weyl_deviation / s.weyl_bound);
    }
    Ok(format!(
        "max eigenvalue error {worst:.1e}, Weyl deviation <= {:.0}% of V+B",
        100.0 * weyl_margin
    ))
}

fn trace_vs_quadrature() -> Check {
    let opts = QuadratureOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_segments: 4000,
    };
    let points = [
        (0.3, 0.5),
        (1.0, 1.0),
        (2.5, 0.8),
        (0.7, 3.0),
        (4.0, 0.25),
        (0.15, 2.0),
        (1.7, 1.6),
        (3.3, 0.4),
        (0.9, 2.2),
        (6.0, 0.6),
    ];
    let mut worst: f64 = 0.0;
    for (j, &(kappa, ell)) in points.iter().enumerate() {
        let k = c(0.0, kappa);
        let ca = match j % 3 {
            0 => CompositeAmplitudes::reflecting_bond(c(-1.0, 0.0), ell, k),
            1 => CompositeAmplitudes::reflecting_bond(c(1.0, 0.0), ell, k),
            _ => {
                let (r, t) = reflection_transmission(3, VertexCoupling::Delta(1.0 + j as f64), k)
                    .map_err(|e| e.to_string())?;
                CompositeAmplitudes::from_rt(r, t, ell, k)
            }
        }
        .map_err(|e| e.to_string())?;
        let closed = trace_gamma(k, &ca).map_err(|e| e.to_string())?;
        let quad = integrate(
            |x| two_vertex_green(k, x, x, &ca).map(|d| d.total),
            0.0,
            ell,
            opts,
        )
        .map_err(|e| e.to_string())?
        .value;
        let d = (closed - quad).norm() / closed.norm();
        ensure(d <= 1e-8, || {
            format!("kappa={kappa} ell={ell}: {closed} vs {quad}")
        })?;
        worst = worst.max(d);
    }
    Ok(format!("10 points, max relative difference {worst:.1e}"))
}

fn scale_covariance() -> Check {
    let cfg = RegularizationConfig::default();
    let interval = Graph::interval(1.0, D);
    let star = Graph::star(3, 1.0, K, D);
    let bases = [
        ("interval green", green(&interval, &cfg)?.energy),
        ("interval mode sum", mode_sum(&interval, &cfg)?.energy),
        ("star mode sum", mode_sum(&star, &cfg)?.energy),
    ];
    let mut worst_e: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    for factor in [0.5, 2.0] {
        let scaled = [
            green(&interval.scaled(factor), &cfg)?.energy,
            mode_sum(&interval.scaled(factor), &cfg)?.energy,
            mode_sum(&star.scaled(factor), &cfg)?.energy,
        ];
        for ((name, base), e) in bases.iter().zip(scaled) {
            let d = rel(e * factor, *base);
            ensure(d <= 1e-6, || {
                format!("{name} at c={factor}: {e} * c vs {base}")
            })?;
            worst_e = worst_e.max(d);
        }
        for g in [&interval, &star] {
            let a = find_eigenvalues(g, 30.0, 1e-12).map_err(|e| e.to_string())?;
            let b = find_eigenvalues(&g.scaled(factor), 30.0 / factor, 1e-12)
                .map_err(|e| e.to_string())?;
            ensure(
                a.eigenvalues.len() == b.eigenvalues.len() && a.multiplicities == b.multiplicities,
                || format!("spectrum changed shape under c={factor}"),
            )?;
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                worst_k = worst_k.max((x / factor - y).abs());
            }
        }
    }
    ensure(worst_k <= 1e-10, || {
        format!("eigenvalue mapping off by {worst_k:.2e}")
    })?;
    Ok(format!(
        "max energy deviation {worst_e:.1e}, max eigenvalue deviation {worst_k:.1e}"
    ))
}

fn divergence_coefficient() -> Check {
    let cfg = RegularizationConfig::default();
    let mut report = Vec::new();
    for (name, g) in [
        ("interval", Graph::interval(1.0, D)),
        ("3-star", Graph::star(3, 1.0, K, D)),
    ] {
        let want = g.total_length() / (2.0 * PI);
        let r = mode_sum(&g, &cfg)?;
        let reported = r.divergence_coefficient();

        // Fit the bare half-sums with no Weyl subtraction.
        let (s, k_max) = spectrum_for(&g, &cfg)?;
        let eig = s.with_multiplicity();
        let raw: Vec<(f64, f64)> = cfg
            .tau_values
            .iter()
            .map(|&t| {
                let x = k_max * t;
                let sum: f64 = eig.iter().map(|k| k * (-k * t).exp()).sum();
                // Smooth tail above the cutoff, so the fit sees the full sum.
                let tail = g.total_length() / (PI * t * t) * (1.0 + x) * (-x).exp();
                (t, 0.5 * (sum + tail))
            })
            .collect();
        let fit = extrapolate_tau(&raw, cfg.fit_order).map_err(|e| e.to_string())?;
        let direct = fit.coefficient(-2).unwrap_or(f64::NAN);

        for (label, v) in [("reported", reported), ("direct", direct)] {
            ensure(rel(v, want) <= 1e-2, || {
                format!("{name} {label} coefficient {v} vs {want}")
            })?;
        }
        report.push(format!(
            "{name} {:.1e}/{:.1e}",
            rel(reported, want),
            rel(direct, want)
        ));
    }
    Ok(format!(
        "relative deviation (reported/direct): {}",
        report.join(", ")
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qgraph"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, g: &Graph| std::fs::write(dir.path().join(name), g.to_json());
    write("interval.json", &Graph::interval(1.0, D)).map_err(|e| e.to_string())?;
    write("star.json", &Graph::star(3, 1.0, K, D)).map_err(|e| e.to_string())?;
    write("open.json", &Graph::open_star(3, K)).map_err(|e| e.to_string())?;

    let runs: [&[&str]; 5] = [
        &["spectrum", "--graph", "star.json", "--kmax", "40"],
        &["casimir", "--graph", "interval.json", "--method", "both"],
        &[
            "casimir",
            "--graph",
            "star.json",
            "--method",
            "modesum",
            "--tau-min",
            "0.04",
        ],
        &[
            "greens",
            "--graph",
            "open.json",
            "--k",
            "2,0.5",
            "--xi",
            "0.3",
            "--xf",
            "1.1",
            "--lead-in",
            "0",
            "--lead-out",
            "1",
        ],
        &[
            "sweep",
            "--graph",
            "interval.json",
            "--from",
            "0.5",
            "--to",
            "2",
            "--steps",
            "5",
            "--method",
            "green",
        ],
    ];
    let read = |name: &str| std::fs::read(dir.path().join(name)).map_err(|e| e.to_string());
    for (j, args) in runs.iter().enumerate() {
        let ext = if args[0] == "sweep" { "csv" } else { "json" };
        let (a, b, r) = (
            format!("a{j}.{ext}"),
            format!("b{j}.{ext}"),
            format!("r{j}.{ext}"),
        );
        for out in [&a, &b] {
            let mut full = args.to_vec();
            full.extend(["--output", out.as_str()]);
            run_cli(dir.path(), &full)?;
        }
        run_cli(dir.path(), &["replay", "--manifest", &a, "--output", &r])?;
        let first = read(&a)?;
        ensure(first == read(&b)?, || format!("{} runs differ", args[0]))?;
        ensure(first == read(&r)?, || format!("{} replay differs", args[0]))?;
    }
    Ok(format!(
        "{} commands repeated and replayed byte-identically",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("interval benchmark", interval_benchmark),
        ("cross-method agreement", cross_method),
        ("vertex S-matrix unitarity", unitarity),
        ("Green function ODE residuals", green_ode),
        ("eigenvalue oracle and Weyl audit", eigenvalue_oracle),
        ("trace closed form vs quadrature", trace_vs_quadrature),
        ("scale covariance", scale_covariance),
        ("divergence coefficient", divergence_coefficient),
        ("CLI determinism and replay", determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
