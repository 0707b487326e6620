use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hgsoliton::dhm::{d1, discrete_dh, pushforward_density};
use hgsoliton::invariants::{
    delta_toric, derivative_via_ding, ding, geodesic_check, hg_grad_hess, s_weighted, working_interval, DeltaReport,
};
use hgsoliton::io::{dh_json, polytope_json, read_polytope, read_profile, read_weight};
use hgsoliton::rankone::{beta_jet, minimize_beta};
use hgsoliton::rational::{parse_vector, to_f64, to_f64_vec};
use hgsoliton::solver::{polystable_report, weight_sweep, SolitonCert, SolverOptions, SweepRow};
use hgsoliton::weights::{check_admissible, Weight};
use hgsoliton::{Error, Normalization, Polytope, QuadConfig, WeightFn, Q};
use serde_json::{json, Value};

use crate::report::{matrix, num, nums, rat, rats, InputDigest, Report};
use crate::{Command, Common, NormalizationArg};

pub const MAX_EVALS_VAR: &str = "HGSOLITON_MAX_EVALS";

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(Error::NoConvergence(cert)) => write!(
                f,
                "Newton iteration did not converge after {} iterations (|grad| = {:e}, xi = {:?})",
                cert.iterations, cert.grad_norm, cert.xi0
            ),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(..) | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::NotCoercive { .. } | Error::NonCoercive { .. } => 3,
                Error::NoConvergence(_) | Error::ToleranceNotMet { .. } | Error::BracketNotClosed(_) => 4,
                _ => 2,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn quad_config() -> Result<QuadConfig> {
    let mut cfg = QuadConfig::default();
    if let Ok(v) = std::env::var(MAX_EVALS_VAR) {
        cfg.max_evals = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{MAX_EVALS_VAR}={v} is not a node count")))?;
    }
    Ok(cfg)
}

struct Ctx {
    digest: InputDigest,
    inputs: serde_json::Map<String, Value>,
    started: Instant,
    cfg: QuadConfig,
}

impl Ctx {
    fn new(command: &str) -> Result<Self> {
        let cfg = quad_config()?;
        let mut digest = InputDigest::default();
        digest.field("command", command);
        digest.field("max_evals", &cfg.max_evals.to_string());
        Ok(Ctx {
            digest,
            inputs: serde_json::Map::new(),
            started: Instant::now(),
            cfg,
        })
    }

    fn flag(&mut self, name: &str, value: impl ToString) {
        let value = value.to_string();
        self.digest.field(name, &value);
        self.inputs.insert(name.to_string(), Value::String(value));
    }

    fn file(&mut self, name: &str, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        self.flag(name, path.display());
        self.digest.field(&format!("{name}:contents"), &text);
        Ok(text)
    }

    fn polytope(&mut self, path: &Path) -> Result<Polytope> {
        Ok(read_polytope(&self.file("polytope", path)?)?)
    }

    fn weight(&mut self, path: &Path) -> Result<WeightFn> {
        Ok(read_weight(&self.file("weight", path)?)?)
    }

    fn vector(&mut self, name: &str, text: &str, p: &Polytope) -> Result<Vec<Q>> {
        self.flag(name, text);
        let v = parse_vector(text)?;
        if v.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: v.len(),
            }
            .into());
        }
        Ok(v)
    }

    fn common(&mut self, common: &Common) -> Normalization {
        let n = match common.normalization {
            NormalizationArg::Probability => Normalization::Probability,
            NormalizationArg::Lebesgue => Normalization::Lebesgue,
        };
        self.flag(
            "normalization",
            if n == Normalization::Lebesgue {
                "lebesgue"
            } else {
                "probability"
            },
        );
        n
    }

    fn finish(
        self,
        command: &'static str,
        results: Value,
        quadrature_error: Option<f64>,
        out: &Option<PathBuf>,
    ) -> Result<()> {
        let report = Report {
            command,
            inputs: Value::Object(self.inputs),
            inputs_digest: self.digest.finish(),
            results,
            quadrature_error,
            wall_time: self.started.elapsed(),
        };
        emit(&report.to_json(), out)
    }
}

fn emit(value: &Value, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `log vol(P)` under Lebesgue normalization, else 0.
fn log_normalization(p: &Polytope, n: Normalization) -> f64 {
    to_f64(&n.factor(p)).ln()
}

fn delta_json(d: &DeltaReport) -> Value {
    json!({
        "value": num(d.value),
        "exact": d.exact.as_ref().map_or(Value::Null, rat),
        "argmin": d.argmin.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "barycenter": nums(&d.barycenter),
        "ratios": d.ratios.iter().map(|(rho, r)| json!({
            "normal": rho.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "ratio": num(*r),
        })).collect::<Vec<_>>(),
    })
}

fn cert_json(c: &SolitonCert, shift: f64) -> Value {
    json!({
        "xi0": nums(&c.xi0),
        "hg_value": num(c.hg_value + shift),
        "label": "h^g (toric twist restriction)",
        "grad_norm": num(c.grad_norm),
        "hessian_min_eig": num(c.hessian_min_eig),
        "ding_residuals": nums(&c.ding_residuals),
        "weight_ratio": num(c.weight_ratio),
        "delta_at_min": num(c.delta_at_min),
        "iterations": c.iterations,
        "converged": c.converged,
        "history": nums(&c.history.iter().map(|h| h + shift).collect::<Vec<_>>()),
        "digest": c.digest(),
    })
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Soliton {
            polytope,
            weight,
            tol,
            common,
        } => {
            let mut ctx = Ctx::new("soliton")?;
            let norm = ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let g = ctx.weight(&weight)?;
            ctx.flag("tol", tol);
            let opts = SolverOptions {
                tol,
                quad: ctx.cfg,
                ..SolverOptions::default()
            };
            let rep = polystable_report(&p, &g, &opts)?;
            let mut results = cert_json(&rep.cert, log_normalization(&p, norm));
            let extra = json!({
                "weight_residuals": nums(&rep.weight_residuals),
                "delta": delta_json(&rep.delta_at_min),
                "classical_delta": delta_json(&rep.classical_delta),
                "certified": rep.passed,
                "verdict": rep.verdict,
            });
            results
                .as_object_mut()
                .unwrap()
                .extend(extra.as_object().unwrap().clone());
            ctx.finish("soliton", results, Some(rep.cert.quadrature_error), &common.out)
        }
        Command::Eval {
            polytope,
            weight,
            xi,
            common,
        } => {
            let mut ctx = Ctx::new("eval")?;
            let norm = ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let g = ctx.weight(&weight)?;
            let xi = to_f64_vec(&ctx.vector("xi", &xi, &p)?);
            let rep = hg_grad_hess(&p, &g, &xi, &ctx.cfg)?;
            let results = json!({
                "value": num(rep.value + log_normalization(&p, norm)),
                "gradient": nums(&rep.gradient),
                "hessian": matrix(&rep.hessian),
                "hessian_min_eig": num(rep.hessian_min_eig),
            });
            ctx.finish("eval", results, Some(rep.quadrature_error), &common.out)
        }
        Command::Ding {
            polytope,
            weight,
            xi,
            eta,
            common,
        } => {
            let mut ctx = Ctx::new("ding")?;
            ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let g = ctx.weight(&weight)?;
            let xi = to_f64_vec(&ctx.vector("xi", &xi, &p)?);
            let eta = to_f64_vec(&ctx.vector("eta", &eta, &p)?);
            let gp = g.derivative()?;
            let results = json!({
                "ding": num(ding(&p, &gp, &xi, &eta, &ctx.cfg)?),
                "s_weighted": num(s_weighted(&p, &gp, &xi, &eta, &ctx.cfg)?),
                "directional_derivative": num(derivative_via_ding(&p, &g, &xi, &eta, &ctx.cfg)?),
            });
            let err = hg_grad_hess(&p, &g, &xi, &ctx.cfg)?.quadrature_error;
            ctx.finish("ding", results, Some(err), &common.out)
        }
        Command::Dh {
            polytope,
            xi,
            m,
            common,
        } => {
            let mut ctx = Ctx::new("dh")?;
            let norm = ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let xi = ctx.vector("xi", &xi, &p)?;
            let dh = match m {
                Some(m) => {
                    ctx.flag("m", m);
                    discrete_dh(&p, &xi, m)?
                }
                None => pushforward_density(&p, &xi)?,
            };
            let dh = dh.scaled(&norm.factor(&p));
            let results = json!({
                "dh": dh_json(&dh),
                "total_mass": rat(&dh.total_mass()),
                "mean": rat(&(dh.moment(1)? / dh.total_mass())),
            });
            ctx.finish("dh", results, Some(0.0), &common.out)
        }
        Command::D1 {
            polytope,
            xi,
            eta,
            common,
        } => {
            let mut ctx = Ctx::new("d1")?;
            ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let xi = ctx.vector("xi", &xi, &p)?;
            let eta = ctx.vector("eta", &eta, &p)?;
            let d = d1(&p, &xi, &eta)?;
            ctx.finish(
                "d1",
                json!({ "d1": rat(&d), "value": num(to_f64(&d)) }),
                Some(0.0),
                &common.out,
            )
        }
        Command::Delta {
            polytope,
            weight,
            xi,
            common,
        } => {
            let mut ctx = Ctx::new("delta")?;
            ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let g = ctx.weight(&weight)?;
            let xi = to_f64_vec(&ctx.vector("xi", &xi, &p)?);
            let d = delta_toric(&p, &g.derivative()?, &xi, &ctx.cfg)?;
            let mut results = delta_json(&d);
            results["label"] = json!("toric-restricted delta");
            ctx.finish("delta", results, None, &common.out)
        }
        Command::Geodesic {
            polytope,
            weight,
            xi,
            eta,
            samples,
            common,
        } => {
            let mut ctx = Ctx::new("geodesic")?;
            ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let g = ctx.weight(&weight)?;
            let xi = to_f64_vec(&ctx.vector("xi", &xi, &p)?);
            let eta = to_f64_vec(&ctx.vector("eta", &eta, &p)?);
            ctx.flag("samples", samples);
            let ts: Vec<f64> = (1..=samples).map(|k| k as f64 / (samples + 1) as f64).collect();
            let rep = geodesic_check(&p, &g, &xi, &eta, &ts, &ctx.cfg)?;
            let results = json!({
                "residuals": rep.residuals.iter().map(|(t, r)| json!([num(*t), num(*r)])).collect::<Vec<_>>(),
                "min_residual": num(rep.min_residual),
                "midpoint_residual": num(rep.midpoint_residual),
                "convex": rep.convex,
                "strict": rep.strict,
            });
            ctx.finish("geodesic", results, None, &common.out)
        }
        Command::Rankone {
            profile,
            weight,
            eval,
            minimize: _,
            common,
        } => {
            let mut ctx = Ctx::new("rankone")?;
            ctx.common(&common);
            let prof = read_profile(&ctx.file("profile", &profile)?)?;
            let g = ctx.weight(&weight)?;
            let mut results = json!({
                "label": prof.label,
                "A": rat(&prof.a),
                "support": rats(&[prof.dh.support().0, prof.dh.support().1]),
                "mean": num(prof.mean()),
            });
            let err = match eval {
                Some(a) => {
                    ctx.flag("eval", a);
                    let jet = beta_jet(&prof, &g, a, &ctx.cfg)?;
                    results["a"] = num(a);
                    results["beta"] = num(jet.value);
                    results["derivative"] = num(jet.d1);
                    results["second_derivative"] = num(jet.d2);
                    Some(jet.quadrature_error)
                }
                None => {
                    ctx.flag("minimize", true);
                    let m = minimize_beta(&prof, &g, &ctx.cfg)?;
                    results["a_star"] = num(m.a_star);
                    results["beta"] = num(m.value);
                    results["interior"] = json!(m.interior);
                    results["derivative_at_zero"] = num(m.derivative_at_zero);
                    None
                }
            };
            ctx.finish("rankone", results, err, &common.out)
        }
        Command::Sweep {
            polytope,
            weights_dir,
            tol,
            common,
        } => sweep(&polytope, &weights_dir, tol, &common),
        Command::Check {
            polytope,
            weight,
            common,
        } => {
            let mut ctx = Ctx::new("check")?;
            ctx.common(&common);
            let p = ctx.polytope(&polytope)?;
            let coercive = hgsoliton::solver::check_coercive(&p);
            let mut results = json!({
                "polytope": polytope_json(&p),
                "volume": rat(&p.volume()),
                "barycenter": rats(&p.barycenter()),
                "origin_interior": p.origin_interior(),
                "coercive": coercive.is_ok(),
            });
            if let Some(path) = weight {
                let g = ctx.weight(&path)?;
                let ones = vec![1.0; p.dim()];
                let radius = p.vertices_f64().iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
                let (lo, hi) = working_interval(&p, &ones);
                let span = radius.max(hi).max(-lo) * p.dim() as f64 + 1.0;
                let adm = check_admissible(&g, -span, span);
                results["weight"] = json!({
                    "label": g.label(),
                    "structurally_admissible": g.structurally_admissible(),
                    "sampled_interval": nums(&[adm.interval.0, adm.interval.1]),
                    "sampled_pass": adm.pass,
                    "log_convexity_margin": num(adm.log_convexity_margin),
                    "failures": adm.failures,
                });
                if !adm.pass {
                    ctx.finish("check", results, None, &common.out)?;
                    return Err(Error::NotAdmissible(adm.failures.join("; ")).into());
                }
            }
            ctx.finish("check", results, None, &common.out)?;
            coercive.map_err(CliError::from)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sweep(polytope: &Path, dir: &Path, tol: f64, common: &Common) -> Result<()> {
    let mut ctx = Ctx::new("sweep")?;
    let norm = ctx.common(common);
    let p = ctx.polytope(polytope)?;
    ctx.flag("tol", tol);
    ctx.flag("weights_dir", dir.display());
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Io(dir.to_path_buf(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("{}: no weight files", dir.display())));
    }
    let mut family = Vec::new();
    let mut rejected = Vec::new();
    for path in &paths {
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?;
        ctx.digest.field(&format!("weight:{id}"), &text);
        match read_weight(&text) {
            Ok(g) => family.push((id, g)),
            Err(e) => rejected.push(SweepRow {
                id,
                weight: String::new(),
                xi0: None,
                hg_value: None,
                digest: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let opts = SolverOptions {
        tol,
        quad: ctx.cfg,
        ..SolverOptions::default()
    };
    let shift = log_normalization(&p, norm);
    let mut rows = weight_sweep(&p, &family, &opts);
    rows.extend(rejected);
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let mut csv = String::from("id,weight,xi0,hg_value,digest,error\n");
    let mut json_rows = Vec::new();
    for r in &rows {
        let xi0 = r.xi0.as_ref().map(|x| nums(x));
        let hg_value = r.hg_value.map(|h| num(h + shift));
        let line = [
            r.id.clone(),
            r.weight.clone(),
            r.xi0
                .as_ref()
                .map(|x| {
                    x.iter()
                        .map(|v| hgsoliton::rational::format_f64(*v))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default(),
            hg_value
                .as_ref()
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string(),
            r.digest.clone().unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ];
        csv += &line.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
        csv.push('\n');
        json_rows.push(json!({
            "id": r.id,
            "weight": r.weight,
            "xi0": xi0,
            "hg_value": hg_value,
            "digest": r.digest,
            "error": r.error,
        }));
    }
    if let Some(out) = &common.out {
        let csv_path = out.with_extension("csv");
        fs::write(&csv_path, &csv).map_err(|e| CliError::Io(csv_path.clone(), e))?;
    } else {
        eprint!("{csv}");
    }
    ctx.finish("sweep", json!({ "rows": json_rows }), None, &common.out)
}
