// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use semiflow::gallery::{make_laplacian_problem, GalleryRecipe};
use semiflow::harness::{
    error_curve_with_reference, instability_sweep, verdict, verify_all, ExactReference, LemmaGrids,
    LemmaReport, RateOptions, RateReport, Weight,
};
use semiflow::{Error, Execution};

use crate::config::{ConfigError, Emit, ExperimentConfig};
use crate::output;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Config = 2,
    Oracle = 3,
    BoundViolation = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Core(Error::OracleMismatch(_) | Error::Integration(_)) => Exit::Oracle,
            CliError::Core(Error::AssemblyMismatch(_)) => Exit::Oracle,
            _ => Exit::Config,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    ExperimentConfig::parse(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

pub fn gallery_list(as_json: bool, out: &mut dyn Write) -> CliResult<Exit> {
    let recipes = semiflow::gallery_list();
    if as_json {
        #[derive(serde::Serialize)]
        struct Entry<'a> {
            #[serde(flatten)]
            recipe: &'a GalleryRecipe,
            contraction: bool,
            holomorphic: bool,
            spd: bool,
            certified: bool,
        }
        let mut entries = Vec::new();
        let instances = recipes
            .iter()
            .map(|r| r.build())
            .collect::<Result<Vec<_>, _>>()?;
        for (recipe, p) in recipes.iter().zip(&instances) {
            entries.push(Entry {
                recipe,
                contraction: p.is_contraction(),
                holomorphic: p.is_holomorphic(),
                spd: p.is_spd(),
                certified: p.is_certified(),
            });
        }
        write!(out, "{}", output::json(&entries)).map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(Exit::Success);
    }
    let mut text = format!(
        "{:<20} {:<15} {:>7} {:<22} {:<9} {}\n",
        "id", "family", "dims", "coupling", "certified", "description"
    );
    for r in &recipes {
        let p = r.build()?;
        let dims = format!("{}+{}", r.dims.0, r.dims.1);
        let status = if p.is_certified() { "yes" } else { "no" };
        text.push_str(&format!(
            "{:<20} {:<15} {:>7} {:<22} {:<9} {}\n",
            r.id,
            r.family.name(),
            dims,
            r.coupling.to_string(),
            status,
            r.description
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Exit::Success)
}

fn report_path(dir: &Path, problem: &str, scheme: &str, ext: &str) -> PathBuf {
    dir.join(format!("{problem}__{scheme}.{ext}"))
}

/// Error curves for every (problem, scheme, t) of the config; one file per
/// (problem, scheme).
pub fn run(cfg: &ExperimentConfig, exec: Execution, out: &mut dyn Write) -> CliResult<Exit> {
    let dir = PathBuf::from(&cfg.output_path);
    let opts = RateOptions {
        fit_window: cfg.fit_window,
        execution: exec,
        record_timing: cfg.record_timing,
        ..RateOptions::default()
    };
    let mut violations = 0usize;
    for recipe in cfg.recipes() {
        let p = recipe.build()?;
        let weight = Weight::for_problem(&p)?;
        let references = cfg
            .t_values
            .iter()
            .map(|&t| ExactReference::compute(&p, t, opts.ode))
            .collect::<Result<Vec<_>, _>>()?;
        for &scheme in &cfg.schemes {
            let reports = references
                .iter()
                .map(|r| error_curve_with_reference(&p, scheme, r, &weight, &cfg.n_values, &opts))
                .collect::<Result<Vec<RateReport>, _>>()?;
            for r in &reports {
                violations += r.bound_violations;
                let _ = writeln!(
                    out,
                    "{} {} t={} slope_op={} slope_weighted={} violations={}",
                    r.problem_id,
                    r.scheme,
                    r.t,
                    fit_label(r.fitted_slope_op),
                    fit_label(r.fitted_slope_weighted),
                    r.bound_violations
                );
            }
            let (ext, body) = match cfg.emit {
                Emit::Csv => ("csv", output::rate_csv(&reports)),
                Emit::Json => ("json", output::json(&reports)),
            };
            write_file(&report_path(&dir, p.id(), scheme.name(), ext), &body)?;
        }
    }
    Ok(if violations == 0 {
        Exit::Success
    } else {
        Exit::BoundViolation
    })
}

fn fit_label(f: semiflow::harness::RateFit) -> String {
    match f {
        semiflow::harness::RateFit::Slope(s) => format!("{s:.4}"),
        semiflow::harness::RateFit::Exact => "exact".into(),
        semiflow::harness::RateFit::Insufficient => "insufficient".into(),
    }
}

/// The lemma suite on every configured problem.
pub fn verify_lemmas(
    cfg: &ExperimentConfig,
    exec: Execution,
    out: &mut dyn Write,
) -> CliResult<Exit> {
    let grids = LemmaGrids::default();
    let mut reports: Vec<LemmaReport> = Vec::new();
    for recipe in cfg.recipes() {
        let p = recipe.build()?;
        reports.extend(verify_all(&p, &grids, exec)?);
    }
    for r in &reports {
        let constant = r
            .measured_constant
            .map(|c| format!(" constant={c:.4e}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<20} {:<8} {} ratio={:.6}{}",
            r.problem_id,
            r.lemma_id.name(),
            if r.pass { "pass" } else { "FAIL" },
            r.max_ratio,
            constant
        );
    }
    let dir = PathBuf::from(&cfg.output_path);
    let (name, body) = match cfg.emit {
        Emit::Csv => ("lemmas.csv", output::lemma_csv(&reports)),
        Emit::Json => ("lemmas.json", output::json(&reports)),
    };
    write_file(&dir.join(name), &body)?;
    let explicit_ok = reports.iter().filter(|r| r.explicit).all(|r| r.pass);
    Ok(if explicit_ok {
        Exit::Success
    } else {
        Exit::BoundViolation
    })
}

/// Powers of two below `n_max`, then `n_max` itself.
pub fn sweep_n_list(n_max: u64) -> Vec<u64> {
    let mut ns: Vec<u64> = (0..64)
        .map(|k| 1u64 << k)
        .take_while(|&n| n < n_max)
        .collect();
    ns.push(n_max);
    ns
}

pub fn instability(
    betas: &[f64],
    t: f64,
    n_max: u64,
    output_path: Option<&Path>,
    exec: Execution,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> CliResult<Exit> {
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(CliError::Usage(format!(
            "--beta must lie in (0, 1], got {b}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Usage(format!("--t must be positive, got {t}")));
    }
    if n_max == 0 {
        return Err(CliError::Usage("--n-max must be positive".into()));
    }
    let base = make_laplacian_problem(16, 16, 1.0, 1)?;
    let rows = instability_sweep(&base, betas, t, &sweep_n_list(n_max), exec)?;
    let csv = output::instability_csv(&rows);
    let v = verdict(&rows);
    let line = match v.worst_beta {
        Some(b) => format!(
            "verdict: {} (beta {b} grows {:.4}x over the beta 0 control at n = {})",
            v.label(),
            v.growth_factor,
            v.n
        ),
        None => format!("verdict: {} (beta 0 control only)", v.label()),
    };
    match output_path {
        Some(path) => {
            write_file(path, &csv)?;
            let _ = writeln!(out, "{line}");
        }
        None => {
            out.write_all(csv.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
            let _ = writeln!(diag, "{line}");
        }
    }
    Ok(Exit::Success)
}
