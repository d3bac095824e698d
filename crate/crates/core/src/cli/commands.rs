use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::output::{self, CasimirJson, CasimirOutput, GreensOutput, Manifest, SpectrumOutput};
use super::{
    CasimirArgs, Failure, GreensArgs, MethodArg, Outcome, RegularizationArgs, SpectrumArgs,
    SweepArgs, SweepMethodArg, EXIT_NUMERICAL, EXIT_OK, EXIT_PARTIAL,
};
use crate::casimir::{
    casimir_green_method, casimir_mode_sum_graph, CasimirResult, RegularizationConfig,
    TwoVertexConfig, SPECTRUM_CUTOFF_TAU,
};
use crate::error::Error;
use crate::graph::{parse_graph, Graph};
use crate::greens::{star_green, two_vertex_green};
use crate::numfmt;
use crate::scattering::{reflection_transmission, CompositeAmplitudes, VertexSMatrix};
use crate::spectrum::{find_eigenvalues, SecularSystem};

const MANIFEST_PREFIX: &str = "# qgraph-manifest ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(serialize_with = "numfmt::serialize")]
    pub k_max: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationParams {
    #[serde(serialize_with = "numfmt::serialize_vec")]
    pub tau_values: Vec<f64>,
    #[serde(serialize_with = "numfmt::serialize")]
    pub quadrature_tol: f64,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub kappa_max: Option<f64>,
    pub fit_order: usize,
    #[serde(serialize_with = "numfmt::serialize")]
    pub spectrum_tol: f64,
    /// Spectrum ceiling for the mode sum.
    #[serde(serialize_with = "numfmt::serialize")]
    pub spectrum_k_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Green,
    Modesum,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasimirParams {
    pub method: MethodName,
    pub regularization: RegularizationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub method: MethodName,
    #[serde(serialize_with = "numfmt::serialize")]
    pub from: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub to: f64,
    pub steps: usize,
    pub regularization: RegularizationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensParams {
    #[serde(serialize_with = "numfmt::serialize")]
    pub k_re: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub k_im: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub x_initial: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub x_final: f64,
    pub lead_in: usize,
    pub lead_out: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Spectrum(SpectrumParams),
    Casimir(CasimirParams),
    Sweep(SweepParams),
    Greens(GreensParams),
}

impl Params {
    fn command(&self) -> &'static str {
        match self {
            Params::Spectrum(_) => "spectrum",
            Params::Casimir(_) => "casimir",
            Params::Sweep(_) => "sweep",
            Params::Greens(_) => "greens",
        }
    }
}

struct Input {
    path: String,
    sha256: String,
    graph: Graph,
}

impl Input {
    fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        let graph = parse_graph(&text)?;
        Ok(Input {
            path: path.to_string_lossy().into_owned(),
            sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
            graph,
        })
    }

    fn manifest<P>(&self, command: &str, parameters: P) -> Manifest<P> {
        Manifest {
            command: command.to_string(),
            graph_path: self.path.clone(),
            graph_sha256: self.sha256.clone(),
            parameters,
            tool_version: format!("qgraph {}", crate::VERSION),
        }
    }
}

fn resolve_regularization(a: &RegularizationArgs) -> Result<RegularizationParams, Failure> {
    let defaults = RegularizationConfig::default();
    let tau_values = if a.tau_max.is_none() && a.tau_min.is_none() && a.tau_steps.is_none() {
        defaults.tau_values
    } else {
        let tau_max = a.tau_max.unwrap_or(defaults.tau_values[0]);
        let tau_min = a.tau_min.unwrap_or(defaults.tau_min());
        let steps = a.tau_steps.unwrap_or(defaults.tau_values.len());
        RegularizationConfig::with_tau_range(tau_max, tau_min, steps)?.tau_values
    };
    let params = RegularizationParams {
        spectrum_k_max: SPECTRUM_CUTOFF_TAU / tau_values[tau_values.len() - 1],
        tau_values,
        quadrature_tol: a.quad_tol,
        kappa_max: a.kappa_max,
        fit_order: a.fit_order,
        spectrum_tol: a.spectrum_tol,
    };
    params.config()?;
    Ok(params)
}

impl RegularizationParams {
    fn config(&self) -> Result<RegularizationConfig, Failure> {
        let cfg = RegularizationConfig {
            tau_values: self.tau_values.clone(),
            quadrature_tol: self.quadrature_tol,
            kappa_max: self.kappa_max,
            fit_order: self.fit_order,
        };
        cfg.validate()?;
        if !(self.spectrum_tol > 0.0) {
            return Err(Failure::input("--spectrum-tol must be positive"));
        }
        if !(self.spectrum_k_max > 0.0 && self.spectrum_k_max.is_finite()) {
            return Err(Failure::input("spectrum ceiling must be positive"));
        }
        Ok(cfg)
    }
}

fn method_name(m: MethodArg) -> MethodName {
    match m {
        MethodArg::Green => MethodName::Green,
        MethodArg::Modesum => MethodName::Modesum,
        MethodArg::Both => MethodName::Both,
    }
}

pub fn spectrum(a: SpectrumArgs) -> Result<Outcome, Failure> {
    let input = Input::load(&a.graph)?;
    execute(
        &input,
        Params::Spectrum(SpectrumParams {
            k_max: a.kmax,
            tol: a.tol,
        }),
    )
}

pub fn casimir(a: CasimirArgs) -> Result<Outcome, Failure> {
    let regularization = resolve_regularization(&a.regularization)?;
    let input = Input::load(&a.graph)?;
    execute(
        &input,
        Params::Casimir(CasimirParams {
            method: method_name(a.method),
            regularization,
        }),
    )
}

pub fn sweep(a: SweepArgs) -> Result<Outcome, Failure> {
    let regularization = resolve_regularization(&a.regularization)?;
    let method = match a.method {
        SweepMethodArg::Green => MethodName::Green,
        SweepMethodArg::Modesum => MethodName::Modesum,
    };
    let params = SweepParams {
        method,
        from: a.from,
        to: a.to,
        steps: a.steps,
        regularization,
    };
    check_sweep(&params)?;
    let input = Input::load(&a.graph)?;
    execute(&input, Params::Sweep(params))
}

pub fn greens(a: GreensArgs) -> Result<Outcome, Failure> {
    let (k_re, k_im) = parse_complex(&a.k)?;
    let input = Input::load(&a.graph)?;
    execute(
        &input,
        Params::Greens(GreensParams {
            k_re,
            k_im,
            x_initial: a.xi,
            x_final: a.xf,
            lead_in: a.lead_in,
            lead_out: a.lead_out,
        }),
    )
}

fn parse_complex(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::input(format!("--k must be \"re,im\", got {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok((re, im))
}

/// Rerun the manifest stored in an earlier output file.
pub fn replay(path: &Path) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest<serde_json::Value> = match text.strip_prefix(MANIFEST_PREFIX) {
        Some(rest) => serde_json::from_str(rest.lines().next().unwrap_or_default()),
        None => serde_json::from_str::<serde_json::Value>(&text).and_then(|mut v| {
            serde_json::from_value(
                v.get_mut("manifest")
                    .map(serde_json::Value::take)
                    .unwrap_or_default(),
            )
        }),
    }
    .map_err(|e| Failure::input(format!("no readable manifest in {}: {e}", path.display())))?;

    let bad = |e: serde_json::Error| Failure::input(format!("malformed manifest parameters: {e}"));
    let p = manifest.parameters;
    let params = match manifest.command.as_str() {
        "spectrum" => Params::Spectrum(serde_json::from_value(p).map_err(bad)?),
        "casimir" => Params::Casimir(serde_json::from_value(p).map_err(bad)?),
        "sweep" => Params::Sweep(serde_json::from_value(p).map_err(bad)?),
        "greens" => Params::Greens(serde_json::from_value(p).map_err(bad)?),
        other => {
            return Err(Failure::input(format!(
                "unknown command {other:?} in manifest"
            )))
        }
    };
    let input = Input::load(Path::new(&manifest.graph_path))?;
    if input.sha256 != manifest.graph_sha256 {
        return Err(Failure::input(format!(
            "{} changed since the recorded run (sha256 {} != {})",
            manifest.graph_path, input.sha256, manifest.graph_sha256
        )));
    }
    execute(&input, params)
}

fn execute(input: &Input, params: Params) -> Result<Outcome, Failure> {
    let command = params.command();
    match params {
        Params::Spectrum(p) => run_spectrum(input, input.manifest(command, p)),
        Params::Casimir(p) => run_casimir(input, input.manifest(command, p)),
        Params::Sweep(p) => run_sweep(input, input.manifest(command, p)),
        Params::Greens(p) => run_greens(input, input.manifest(command, p)),
    }
}

fn run_spectrum(input: &Input, manifest: Manifest<SpectrumParams>) -> Result<Outcome, Failure> {
    let p = &manifest.parameters;
    if !(p.k_max > 0.0 && p.k_max.is_finite()) {
        return Err(Failure::input(format!(
            "--kmax must be positive, got {}",
            p.k_max
        )));
    }
    if !(p.tol > 0.0) {
        return Err(Failure::input(format!(
            "--tol must be positive, got {}",
            p.tol
        )));
    }
    let s = find_eigenvalues(&input.graph, p.k_max, p.tol)?;
    let out = SpectrumOutput::new(manifest, &s);
    let (code, warning) = if out.weyl_audit.passed {
        (EXIT_OK, None)
    } else {
        (
            EXIT_NUMERICAL,
            Some(format!(
                "Weyl audit failed: deviation {} exceeds {}",
                s.weyl_deviation, s.weyl_bound
            )),
        )
    };
    Ok(Outcome {
        bytes: output::to_json(&out),
        code,
        warning,
    })
}

/// Mode-sum energy from a freshly computed spectrum.
fn mode_sum(
    g: &Graph,
    p: &RegularizationParams,
    cfg: &RegularizationConfig,
) -> Result<(CasimirResult, usize), Error> {
    casimir_mode_sum_graph(g, cfg, p.spectrum_k_max, p.spectrum_tol)
}

fn run_casimir(input: &Input, manifest: Manifest<CasimirParams>) -> Result<Outcome, Failure> {
    let p = &manifest.parameters;
    let cfg = p.regularization.config()?;
    let g = &input.graph;
    let mut results = Vec::new();
    let mut energies = (None, None);
    if matches!(p.method, MethodName::Green | MethodName::Both) {
        let r = casimir_green_method(g, &cfg)?;
        energies.0 = Some(r.energy);
        results.push(CasimirJson::new(&r, None));
    }
    if matches!(p.method, MethodName::Modesum | MethodName::Both) {
        let (r, n) = mode_sum(g, &p.regularization, &cfg)?;
        energies.1 = Some(r.energy);
        results.push(CasimirJson::new(&r, Some(n)));
    }
    let relative_difference = match energies {
        (Some(green), Some(modes)) => Some((green - modes).abs() / modes.abs()),
        _ => None,
    };
    let out = CasimirOutput {
        manifest,
        results,
        relative_difference,
    };
    Ok(Outcome {
        bytes: output::to_json(&out),
        code: EXIT_OK,
        warning: None,
    })
}

fn check_sweep(p: &SweepParams) -> Result<(), Failure> {
    if !(p.from > 0.0 && p.from.is_finite()) {
        return Err(Failure::input(format!(
            "--from must be positive, got {}",
            p.from
        )));
    }
    if !(p.to > p.from && p.to.is_finite()) {
        return Err(Failure::input(format!(
            "--to must exceed --from, got {}",
            p.to
        )));
    }
    if p.steps < 2 {
        return Err(Failure::input(format!(
            "--steps must be at least 2, got {}",
            p.steps
        )));
    }
    if p.method == MethodName::Both {
        return Err(Failure::input("sweep takes a single method"));
    }
    Ok(())
}

fn run_sweep(input: &Input, manifest: Manifest<SweepParams>) -> Result<Outcome, Failure> {
    let p = &manifest.parameters;
    check_sweep(p)?;
    let cfg = p.regularization.config()?;
    // Topology problems are the same at every scale; report them once.
    match p.method {
        MethodName::Green => {
            TwoVertexConfig::from_graph(&input.graph)?;
        }
        _ => {
            SecularSystem::new(&input.graph)?;
        }
    }

    let scales: Vec<f64> = (0..p.steps)
        .map(|i| {
            if i + 1 == p.steps {
                p.to
            } else {
                p.from + (p.to - p.from) * i as f64 / (p.steps - 1) as f64
            }
        })
        .collect();
    let rows: Vec<Result<CasimirResult, Error>> = scales
        .par_iter()
        .map(|&scale| {
            let g = input.graph.scaled(scale);
            match p.method {
                MethodName::Green => casimir_green_method(&g, &cfg),
                _ => mode_sum(&g, &p.regularization, &cfg).map(|r| r.0),
            }
        })
        .collect();

    let mut bytes = Vec::new();
    bytes.extend_from_slice(MANIFEST_PREFIX.as_bytes());
    bytes.extend(serde_json::to_vec(&manifest).expect("manifest serialization is infallible"));
    bytes.push(b'\n');
    let mut failed = 0;
    {
        let mut w = csv::Writer::from_writer(&mut bytes);
        let csv_err = |e: csv::Error| Failure::input(format!("cannot write CSV: {e}"));
        w.write_record(["scale", "energy", "estimated_error", "status"])
            .map_err(csv_err)?;
        for (scale, row) in scales.iter().zip(&rows) {
            let scale = numfmt::format_f64(*scale);
            let record = match row {
                Ok(r) => [
                    scale,
                    numfmt::format_f64(r.energy),
                    numfmt::format_f64(r.estimated_error),
                    "ok".to_string(),
                ],
                Err(e) => {
                    failed += 1;
                    [scale, "nan".into(), "nan".into(), format!("error: {e}")]
                }
            };
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Failure::input(format!("cannot write CSV: {e}")))?;
    }
    Ok(Outcome {
        bytes,
        code: if failed > 0 { EXIT_PARTIAL } else { EXIT_OK },
        warning: (failed > 0).then(|| format!("{failed} of {} sweep points failed", scales.len())),
    })
}

fn run_greens(input: &Input, manifest: Manifest<GreensParams>) -> Result<Outcome, Failure> {
    let p = manifest.parameters.clone();
    let k = Complex64::new(p.k_re, p.k_im);
    let g = &input.graph;
    g.require_zero_potential()?;
    let out = if g.bonds.is_empty() && g.vertices.len() == 1 && !g.leads.is_empty() {
        let v = &g.vertices[0];
        let s = VertexSMatrix::at_complex(g.valency(v.id), v.coupling, k)?;
        let d = star_green(p.lead_in, p.lead_out, k, p.x_initial, p.x_final, &s)?;
        GreensOutput::new(manifest, "star", Some((p.lead_in, p.lead_out)), &d)
    } else if g.is_compact() && g.vertices.len() == 2 && g.bonds.len() == 1 {
        let (a, b) = (g.vertices[0].coupling, g.vertices[1].coupling);
        if a != b {
            return Err(Error::Unsupported(
                "two-vertex Green function needs identical end conditions".into(),
            )
            .into());
        }
        let (r, _) = reflection_transmission(1, a, k)?;
        let ca = CompositeAmplitudes::reflecting_bond(r, g.bonds[0].length, k)?;
        let d = two_vertex_green(k, p.x_initial, p.x_final, &ca)?;
        GreensOutput::new(manifest, "two_vertex", None, &d)
    } else {
        return Err(Error::Unsupported(
            "greens supports an open star or a single bond between two vertices".into(),
        )
        .into());
    };
    Ok(Outcome {
        bytes: output::to_json(&out),
        code: EXIT_OK,
        warning: None,
    })
}
