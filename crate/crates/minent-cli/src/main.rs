//! Thin command-line front-end over the minent library. All numerics live
//! in the library; this binary only parses inputs, dispatches, and writes
//! reports (JSON or CSV) atomically.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use minent::dephasing::{check_min_entropy_nondecrease, plan_catalytic_dephasing, run_dephasing};
use minent::entropy::{masking_power_of_spectrum, renyi_entropy, Alpha};
use minent::error::{MinentError, Tolerances};
use minent::json::{MatrixJson, ProtocolJson, TransitionPlanJson, VectorJson};
use minent::masking::{mask_state, masking_diagnostics, MaskingScheme};
use minent::pst::{plan_pst, verify_pst};
use minent::state::{
    random_state, BipartitePureState, DensityMatrix, RandomKind, Spectrum,
};
use minent::transition::{execute_transition, plan_transition};


#[derive(Parser)]
#[command(name = "minent", version = concat!(env!("CARGO_PKG_VERSION"), " (format 1.0)"))]
struct Cli {
    /// RNG seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Uniform tolerance override (also via MINENT_TOL; the flag wins).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report destination; stdout when omitted. Written atomically.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Renyi entropy of a spectrum or a density matrix.
    Entropy {
        /// Order: a non-negative number, or inf/min.
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long)]
        spectrum: Option<String>,
        /// Matrix JSON (density matrix) or JSON array (spectrum).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Feasibility of a task for a given spectrum.
    Feasibility {
        #[arg(long)]
        task: Task,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        spectrum: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Synthesize a private-transfer protocol and write it as one document.
    SynthPst {
        #[arg(long)]
        d: usize,
        /// Pad marginal spectrum (canonical pad is built from it).
        #[arg(long)]
        spectrum: Option<String>,
        /// Pad amplitudes as vector JSON.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the protocol on random secrets and verify both security clauses.
    VerifyPst {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        secrets: usize,
        #[arg(long)]
        spectrum: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Mask a secret state and report marginal deviations and diagnostics.
    Mask {
        #[arg(long)]
        d: usize,
        /// Secret state as matrix JSON; defaults to |0><0|.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Catalytically dephase a d^2-dimensional state.
    Dephase {
        #[arg(long)]
        d: usize,
        /// Precatalyst as matrix JSON; defaults to I/d.
        #[arg(long)]
        sigma: Option<PathBuf>,
        /// System state as matrix JSON; defaults to the maximally coherent state.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Plan and execute a catalyst-driven state transition.
    Transit {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Catalyst as matrix JSON; defaults to I/ceil(sqrt(D)).
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Entropy/feasibility table over a list of spectra or seeded states.
    Sweep {
        /// JSON: {"spectra": [[...], ...]} and/or {"seeds": n, "dim": D}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Pst,
    Mask,
    Dephase,
    Transition,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = resolve_tol(cli.tol);
    let result = dispatch(&cli, &tol);
    match result {
        Ok((report, code)) => {
            let text = render(&report, cli.format);
            if let Err(e) = emit(cli.output.as_deref(), &text) {
                eprintln!("error: failed to write report: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> Tolerances {
    let from_env = std::env::var("MINENT_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok());
    match flag.or(from_env) {
        Some(t) if t > 0.0 => Tolerances::uniform(t),
        _ => Tolerances::default(),
    }
}

/// Exit-code contract: 1 = clean theorem violation, 2 = invalid input,
/// 3 = verification failure (handled at call sites).
fn classify(e: &MinentError) -> u8 {
    match e {
        MinentError::InfeasiblePad { .. }
        | MinentError::InfeasibleSor { .. }
        | MinentError::InfeasibleSpectrum { .. }
        | MinentError::NotMajorized { .. }
        | MinentError::InsufficientCatalyst { .. }
        | MinentError::UnsupportedOrder { .. } => 1,
        _ => 2,
    }
}

type Outcome = Result<(Value, u8), MinentError>;

fn dispatch(cli: &Cli, tol: &Tolerances) -> Outcome {
    match &cli.command {
        Command::Entropy { alpha, spectrum, input } => {
            let spec = load_spectrum(spectrum.as_deref(), input.as_deref(), tol)?;
            let a = Alpha::parse(alpha)?;
            let bits = renyi_entropy(&spec, a)?;
            Ok((json!({ "alpha": alpha, "bits": bits }), 0))
        }
        Command::Feasibility { task, d, spectrum, input } => {
            let spec = load_spectrum(spectrum.as_deref(), input.as_deref(), tol)?;
            feasibility(*task, *d, &spec)
        }
        Command::SynthPst { d, spectrum, input } => {
            let pad = load_pad(spectrum.as_deref(), input.as_deref(), tol)?;
            let proto = plan_pst(&pad, *d)?;
            let doc = serde_json::to_value(ProtocolJson::from_protocol(&proto))
                .map_err(|e| MinentError::Malformed(e.to_string()))?;
            Ok((doc, 0))
        }
        Command::VerifyPst { d, secrets, spectrum, input } => {
            let pad = load_pad(spectrum.as_deref(), input.as_deref(), tol)?;
            let proto = plan_pst(&pad, *d)?;
            let report = verify_pst(&proto, *secrets, cli.seed)?;
            let pass = report.pass;
            let doc = serde_json::to_value(&report)
                .map_err(|e| MinentError::Malformed(e.to_string()))?;
            Ok((doc, if pass { 0 } else { 3 }))
        }
        Command::Mask { d, input } => {
            let secret = match input {
                Some(p) => load_state(p, tol)?,
                None => DensityMatrix::pure(&minent::linalg::basis_vec(*d, 0), vec![*d])?,
            };
            let scheme = MaskingScheme::new(*d)?;
            let masked = mask_state(&scheme, &secret)?;
            let ma = minent::state::partial_trace(&masked, &[0])?;
            let mb = minent::state::partial_trace(&masked, &[1])?;
            let uniform = DensityMatrix::maximally_mixed(*d);
            let diag = masking_diagnostics(&scheme)?;
            let pass = diag.pass;
            let doc = json!({
                "d": d,
                "masked": MatrixJson::from_state(&masked),
                "marginal_a_dev": minent::linalg::max_abs_diff(ma.entries(), uniform.entries()),
                "marginal_b_dev": minent::linalg::max_abs_diff(mb.entries(), uniform.entries()),
                "i_ra": diag.i_ra,
                "i_rb": diag.i_rb,
                "i_rab": diag.i_rab,
                "pass": pass,
            });
            Ok((doc, if pass { 0 } else { 3 }))
        }
        Command::Dephase { d, sigma, input } => {
            let sigma = match sigma {
                Some(p) => load_state(p, tol)?,
                None => DensityMatrix::maximally_mixed(*d),
            };
            let rho = match input {
                Some(p) => load_state(p, tol)?,
                None => {
                    let dim = d * d;
                    let amp = minent::linalg::CVec::from_element(
                        dim,
                        minent::linalg::cr(1.0 / (dim as f64).sqrt()),
                    );
                    DensityMatrix::pure(&amp, vec![dim])?
                }
            };
            let plan = plan_catalytic_dephasing(&sigma, *d)?;
            let run = run_dephasing(&plan, &rho.with_dims(vec![d * d])?)?;
            let rep = check_min_entropy_nondecrease(&plan);
            let pass = rep.pass;
            let doc = json!({
                "d": d,
                "system_out": MatrixJson::from_state(&run.system_out),
                "catalyst_out": MatrixJson::from_state(&run.catalyst_out),
                "post_guess_prob": rep.post_guess_prob,
                "pre_guess_prob": rep.pre_guess_prob,
                "equality_dev": rep.equality_dev,
                "pass": pass,
            });
            Ok((doc, if pass { 0 } else { 3 }))
        }
        Command::Transit { source, target, sigma } => {
            let src = load_state(source, tol)?;
            let tgt = load_state(target, tol)?;
            let req = minent::transition::catalyst_requirement(src.dim());
            let sig = match sigma {
                Some(p) => load_state(p, tol)?,
                None => DensityMatrix::maximally_mixed(req.d),
            };
            let plan = plan_transition(&src, &tgt, &sig)?;
            let exec = execute_transition(&plan)?;
            let pass = exec.distance_to_target <= tol.eq.max(1e-10);
            let doc = json!({
                "plan": TransitionPlanJson::from_plan(&plan),
                "output": MatrixJson::from_state(&exec.output),
                "distance_to_target": exec.distance_to_target,
                "pass": pass,
            });
            Ok((doc, if pass { 0 } else { 3 }))
        }
        Command::Sweep { spec, d } => sweep(spec, *d, cli.seed, tol),
    }
}

fn feasibility(task: Task, d: usize, spec: &Spectrum) -> Outcome {
    let lambda_max = spec.max();
    let smin = -lambda_max.log2();
    let need = 1.0 / d as f64;
    let feasible = lambda_max <= need + Tolerances::default().major;
    let doc = json!({
        "d": d,
        "lambda_max": lambda_max,
        "smin_bits": smin,
        "required_bits": (d as f64).log2(),
        "feasible": feasible,
        "masking_power": masking_power_of_spectrum(spec),
    });
    if feasible {
        return Ok((doc, 0));
    }
    // name the violated criterion with the offending quantity
    let err = match task {
        Task::Pst => MinentError::InfeasiblePad { lambda_max, d },
        Task::Mask => MinentError::InfeasibleSpectrum { lambda_max, d },
        Task::Dephase => MinentError::InfeasibleSor { smin, d },
        Task::Transition => MinentError::InsufficientCatalyst {
            smin,
            required: (d as f64).log2(),
        },
    };
    Err(err)
}

fn sweep(spec_path: &Path, d: usize, seed: u64, tol: &Tolerances) -> Outcome {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", spec_path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| MinentError::Malformed(format!("sweep spec: {e}")))?;
    let mut spectra: Vec<Spectrum> = Vec::new();
    if let Some(arr) = v.get("spectra") {
        let raw: Vec<Vec<f64>> = serde_json::from_value(arr.clone())
            .map_err(|e| MinentError::Malformed(format!("spectra: {e}")))?;
        for probs in raw {
            spectra.push(Spectrum::with_tol(probs, tol)?);
        }
    }
    if let Some(n) = v.get("seeds") {
        let n: u64 = serde_json::from_value(n.clone())
            .map_err(|e| MinentError::Malformed(format!("seeds: {e}")))?;
        let dim: usize = match v.get("dim") {
            Some(x) => serde_json::from_value(x.clone())
                .map_err(|e| MinentError::Malformed(format!("dim: {e}")))?,
            None => return Err(MinentError::Malformed("seeds needs dim".into())),
        };
        for k in 0..n {
            let s = random_state(RandomKind::GinibreMixed, &[dim], seed + k, None)?;
            spectra.push(s.spectrum());
        }
    }
    let mut rows = Vec::new();
    for spec in &spectra {
        let lambda_max = spec.max();
        let feasible = lambda_max <= 1.0 / d as f64 + Tolerances::default().major;
        let mut row = Map::new();
        row.insert("spectrum".into(), json!(spec.probs()));
        row.insert("s0".into(), json!(renyi_entropy(spec, Alpha::Order(0.0))?));
        row.insert("s1".into(), json!(renyi_entropy(spec, Alpha::Order(1.0))?));
        row.insert("s2".into(), json!(renyi_entropy(spec, Alpha::Order(2.0))?));
        row.insert("smin".into(), json!(renyi_entropy(spec, Alpha::Infinity)?));
        row.insert("lambda_max".into(), json!(lambda_max));
        row.insert("feasible".into(), json!(feasible));
        row.insert("masking_power".into(), json!(masking_power_of_spectrum(spec)));
        rows.push(Value::Object(row));
    }
    Ok((json!({ "d": d, "rows": rows }), 0))
}

// ---------- input loading ----------

fn parse_spectrum_arg(s: &str, tol: &Tolerances) -> Result<Spectrum, MinentError> {
    let probs: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let probs = probs.map_err(|e| MinentError::Malformed(format!("spectrum: {e}")))?;
    Spectrum::with_tol(probs, tol)
}

fn load_spectrum(
    inline: Option<&str>,
    path: Option<&Path>,
    tol: &Tolerances,
) -> Result<Spectrum, MinentError> {
    if let Some(s) = inline {
        return parse_spectrum_arg(s, tol);
    }
    let path = path.ok_or_else(|| {
        MinentError::Malformed("need --spectrum or --input".into())
    })?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", path.display())))?;
    if v.is_array() {
        let probs: Vec<f64> = serde_json::from_value(v)
            .map_err(|e| MinentError::Malformed(format!("spectrum: {e}")))?;
        return Spectrum::with_tol(probs, tol);
    }
    let m: MatrixJson = serde_json::from_value(v)
        .map_err(|e| MinentError::Malformed(format!("matrix: {e}")))?;
    Ok(m.to_state()?.spectrum())
}

fn load_pad(
    inline: Option<&str>,
    path: Option<&Path>,
    tol: &Tolerances,
) -> Result<BipartitePureState, MinentError> {
    if let Some(s) = inline {
        return Ok(BipartitePureState::from_marginal_spectrum(&parse_spectrum_arg(
            s, tol,
        )?));
    }
    let path = path.ok_or_else(|| {
        MinentError::Malformed("need --spectrum or --input".into())
    })?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", path.display())))?;
    if v.is_array() {
        let probs: Vec<f64> = serde_json::from_value(v)
            .map_err(|e| MinentError::Malformed(format!("spectrum: {e}")))?;
        return Ok(BipartitePureState::from_marginal_spectrum(&Spectrum::with_tol(
            probs, tol,
        )?));
    }
    let vj: VectorJson = serde_json::from_value(v)
        .map_err(|e| MinentError::Malformed(format!("pad vector: {e}")))?;
    vj.to_pad()
}

fn load_state(path: &Path, tol: &Tolerances) -> Result<DensityMatrix, MinentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", path.display())))?;
    let m: MatrixJson = serde_json::from_str(&text)
        .map_err(|e| MinentError::Malformed(format!("{}: {e}", path.display())))?;
    DensityMatrix::with_tol(m.to_mat()?, m.dims.clone(), tol)
}

// ---------- output ----------

fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report is valid JSON");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
    }
}

/// CSV: '.' decimal, 17 significant digits. A report with a "rows" array
/// becomes a table; a flat object becomes header + one row.
fn render_csv(report: &Value) -> String {
    fn cell(v: &Value) -> String {
        match v {
            Value::Number(n) => match n.as_f64() {
                Some(f) if n.is_f64() => format!("{:.16e}", f),
                _ => n.to_string(),
            },
            Value::Bool(b) => b.to_string(),
            Value::String(s) => s.replace(',', ";"),
            other => serde_json::to_string(other)
                .unwrap_or_default()
                .replace(',', ";"),
        }
    }
    let rows: Vec<&Map<String, Value>> = match report.get("rows").and_then(Value::as_array) {
        Some(arr) => arr.iter().filter_map(Value::as_object).collect(),
        None => report.as_object().into_iter().collect(),
    };
    let Some(first) = rows.first() else {
        return String::new();
    };
    let headers: Vec<&String> = first.keys().collect();
    let mut out = headers
        .iter()
        .map(|h| h.as_str())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in &rows {
        let line: Vec<String> = headers
            .iter()
            .map(|h| row.get(*h).map(cell).unwrap_or_default())
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Atomic write: temp file in the target directory, then rename.
fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty());
            let tmp = match dir {
                Some(d) => d.join(format!(
                    ".{}.tmp-{}",
                    p.file_name().and_then(|n| n.to_str()).unwrap_or("report"),
                    std::process::id()
                )),
                None => PathBuf::from(format!(".report.tmp-{}", std::process::id())),
            };
            std::fs::write(&tmp, text)?;
            std::fs::rename(&tmp, p)
        }
    }
}
