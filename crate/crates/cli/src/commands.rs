//! Subcommand implementations. Every report is JSON with a top-level
//! `"schema": "sbm-ident/1"` marker; failures in the estimator domain
//! still produce a report carrying a machine-readable error code.

use std::path::{Path, PathBuf};

use serde::Serialize;

use sbm_ident::affiliation::{
    estimate_group_count_uniform, estimate_two_group_k3, estimate_with_known_priors_tol,
    UNIFORMITY_TOL,
};
use sbm_ident::kruskal::{conditional_rank_report, erdos_gallai_realizable, kruskal_rank};
use sbm_ident::mixture::{
    check_bin_independence, discretize_params, power_sums_from_all_in_weights,
    priors_from_power_sums, recover_affiliation_weighted, recover_from_k3,
};
use sbm_ident::moments::{empirical_moments, theoretical_moments, MomentDepth, Provenance};
use sbm_ident::numeric::{numerical_rank, RANK_REL_TOL};
use sbm_ident::oracle::exact_distribution;
use sbm_ident::params::{affiliation_to_block, ModelParams};
use sbm_ident::sampler::sample_graph;

use crate::args::{
    CheckArgs, EstimateArgs, MomentsArgs, OracleArgs, RecoverArgs, SimulateArgs,
};
use crate::error::{io_err, CliError};
use crate::formats::{
    component_set_to_json, load_params, parse_moments_json, read_edge_list, to_component_set,
    write_edge_list, ComponentsFile, MomentsJson,
};

pub const SCHEMA: &str = "sbm-ident/1";

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_err("writing output", e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_report<T: Serialize>(out: &Option<PathBuf>, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    text.push('\n');
    write_output(out, &text)
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema: &'static str,
    command: &'a str,
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
}

/// Write an error report (when the failure is estimator-domain) and pass
/// the error through for the exit code.
fn surface_error(command: &str, out: &Option<PathBuf>, e: CliError) -> CliError {
    if let CliError::Estimator { code, ref message } = e {
        let report = ErrorReport {
            schema: SCHEMA,
            command,
            error: ErrorBody {
                code,
                message: message.clone(),
            },
        };
        let _ = write_report(out, &report);
    }
    e
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err("reading input file", e))
}

pub fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let loaded = load_params(&args.params)?;
    let keep_latent = matches!(args.mode.as_deref(), Some("latent"));
    let graph = sample_graph(&loaded.model, args.n, args.seed, keep_latent)?;
    write_output(&args.out, &write_edge_list(&graph))?;
    if keep_latent {
        let Some(path) = &args.out else {
            return Err(CliError::Usage(
                "--mode latent needs --out to place the latent file next to".to_string(),
            ));
        };
        let z = graph.latent.as_ref().expect("latent kept");
        let mut text = format!("# n={}\n", graph.n);
        for (i, g) in z.iter().enumerate() {
            text.push_str(&format!("{}\t{}\n", i + 1, g + 1));
        }
        let mut latent_path = path.clone().into_os_string();
        latent_path.push(".latent");
        std::fs::write(latent_path, text).map_err(|e| io_err("writing latent file", e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MomentsReport {
    schema: &'static str,
    command: &'static str,
    n: usize,
    provenance: &'static str,
    moments: MomentsJson,
}

pub fn run_moments(args: &MomentsArgs) -> Result<(), CliError> {
    let graph = read_edge_list(&read_to_string(&args.input)?)?;
    let depth = match args.mode.as_deref() {
        Some("k3") => MomentDepth::K3,
        Some("k4") => MomentDepth::K4,
        None => {
            if graph.n >= 4 {
                MomentDepth::K4
            } else {
                MomentDepth::K3
            }
        }
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown moments mode {other:?} (expected k3 or k4)"
            )))
        }
    };
    let ms = empirical_moments(&graph, depth)?;
    write_report(
        &args.out,
        &MomentsReport {
            schema: SCHEMA,
            command: "moments",
            n: graph.n,
            provenance: "empirical",
            moments: MomentsJson::from(&ms),
        },
    )
}

#[derive(Serialize)]
struct EstimateReport {
    schema: &'static str,
    command: &'static str,
    mode: String,
    branch: &'static str,
    alpha: f64,
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pi: Option<Vec<f64>>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    residuals: Vec<f64>,
    moments: MomentsJson,
}

pub fn run_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let inner = || -> Result<(), CliError> {
        let text = read_to_string(&args.input)?;
        let mode = args.mode.as_deref().unwrap_or("k3-q2");
        let ms = if text.trim_start().starts_with('{') {
            parse_moments_json(&text)?.into_moment_set(Provenance::Theoretical)
        } else {
            let graph = read_edge_list(&text)?;
            let depth = if mode == "uniform-q" {
                MomentDepth::K4
            } else {
                MomentDepth::K3
            };
            empirical_moments(&graph, depth)?
        };
        let (result, branch) = match mode {
            "k3-q2" => (estimate_two_group_k3(&ms)?, "k3-cubic"),
            "known-pi" => {
                let Some(params_path) = &args.params else {
                    return Err(CliError::Usage(
                        "--mode known-pi needs --params for the priors".to_string(),
                    ));
                };
                let loaded = load_params(params_path)?;
                let pi = loaded.model.priors().to_vec();
                let tol = args.tol.unwrap_or(UNIFORMITY_TOL);
                let result = estimate_with_known_priors_tol(&ms, &pi, tol)?;
                let branch = if (ms.m2 - ms.m1 * ms.m1).abs() <= tol {
                    "known-pi-uniform"
                } else {
                    "known-pi-rational"
                };
                (result, branch)
            }
            "uniform-q" => (estimate_group_count_uniform(&ms)?, "uniform-q"),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown estimate mode {other:?} (expected k3-q2, known-pi or uniform-q)"
                )))
            }
        };
        write_report(
            &args.out,
            &EstimateReport {
                schema: SCHEMA,
                command: "estimate",
                mode: mode.to_string(),
                branch,
                alpha: result.alpha,
                beta: result.beta,
                pi: result.pi,
                q: result.q,
                residuals: result.residuals,
                moments: MomentsJson::from(&ms),
            },
        )
    };
    inner().map_err(|e| surface_error("estimate", &args.out, e))
}

#[derive(Serialize)]
struct OracleTableEntry {
    config: String,
    prob: f64,
}

#[derive(Serialize)]
struct OracleTableReport {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    n: usize,
    kappa: usize,
    total: f64,
    entries: Vec<OracleTableEntry>,
}

#[derive(Serialize)]
struct OracleMomentsReport {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    moments: MomentsJson,
}

pub fn run_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let loaded = load_params(&args.params)?;
    match args.mode.as_deref().unwrap_or("table") {
        "table" => {
            let n = args.n.ok_or_else(|| {
                CliError::Usage("oracle --mode table needs --n".to_string())
            })?;
            let dist = match &loaded.model {
                ModelParams::Binary(b) => exact_distribution(b, n)?,
                ModelParams::Affiliation(a) => exact_distribution(&affiliation_to_block(a), n)?,
                ModelParams::Finite(f) => exact_distribution(f, n)?,
                ModelParams::Weighted(_) => {
                    return Err(CliError::Usage(
                        "weighted models have no exact configuration table; bin them first"
                            .to_string(),
                    ))
                }
            };
            let e = n * (n - 1) / 2;
            let entries = dist
                .probs
                .iter()
                .enumerate()
                .map(|(c, &prob)| {
                    let mut digits = String::with_capacity(e);
                    for k in 0..e {
                        let mut rest = c;
                        for _ in 0..(e - 1 - k) {
                            rest /= dist.kappa;
                        }
                        digits.push_str(&(rest % dist.kappa).to_string());
                    }
                    OracleTableEntry {
                        config: digits,
                        prob,
                    }
                })
                .collect::<Vec<_>>();
            write_report(
                &args.out,
                &OracleTableReport {
                    schema: SCHEMA,
                    command: "oracle",
                    mode: "table",
                    n,
                    kappa: dist.kappa,
                    total: dist.probs.iter().sum(),
                    entries,
                },
            )
        }
        "moments" => {
            let ModelParams::Affiliation(a) = &loaded.model else {
                return Err(CliError::Usage(
                    "oracle --mode moments needs affiliation parameters".to_string(),
                ));
            };
            let ms = theoretical_moments(a);
            write_report(
                &args.out,
                &OracleMomentsReport {
                    schema: SCHEMA,
                    command: "oracle",
                    mode: "moments",
                    moments: MomentsJson::from(&ms),
                },
            )
        }
        other => Err(CliError::Usage(format!(
            "unknown oracle mode {other:?} (expected table or moments)"
        ))),
    }
}

#[derive(Serialize)]
struct BaseCaseReportJson {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    #[serde(rename = "Q")]
    q: usize,
    m: usize,
    rows: usize,
    cols: usize,
    rank: usize,
    full_row_rank: bool,
    node_bound: usize,
    meets_node_bound: bool,
    extension_nodes: usize,
    extension_condition_met: bool,
}

#[derive(Serialize)]
struct DegreeVerdict {
    degrees: Vec<usize>,
    realizable: bool,
}

#[derive(Serialize)]
struct DegreesReport {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    entries: Vec<DegreeVerdict>,
}

#[derive(Serialize)]
struct KruskalRankReport {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    rows: usize,
    cols: usize,
    rank: usize,
    kruskal_rank: usize,
}

#[derive(Serialize)]
struct BinsReport {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    kappa: usize,
    rows: usize,
    rank: usize,
    independent: bool,
    binned: Vec<Vec<Vec<f64>>>,
}

pub fn run_check(args: &CheckArgs) -> Result<(), CliError> {
    let mode = args.mode.as_deref().ok_or_else(|| {
        CliError::Usage("check needs --mode (base-case | degrees | kruskal-rank | bins)".to_string())
    })?;
    match mode {
        "base-case" => {
            let params_path = args.params.as_ref().ok_or_else(|| {
                CliError::Usage("check --mode base-case needs --params".to_string())
            })?;
            let m = args
                .n
                .ok_or_else(|| CliError::Usage("check --mode base-case needs --n".to_string()))?;
            let loaded = load_params(params_path)?;
            let report = match &loaded.model {
                ModelParams::Binary(b) => conditional_rank_report(b, m)?,
                ModelParams::Affiliation(a) => {
                    conditional_rank_report(&affiliation_to_block(a), m)?
                }
                ModelParams::Finite(f) => conditional_rank_report(f, m)?,
                ModelParams::Weighted(_) => {
                    return Err(CliError::Usage(
                        "base-case rank checks need a discrete model".to_string(),
                    ))
                }
            };
            write_report(
                &args.out,
                &BaseCaseReportJson {
                    schema: SCHEMA,
                    command: "check",
                    mode: "base-case",
                    q: report.q,
                    m: report.m,
                    rows: report.rows,
                    cols: report.cols,
                    rank: report.rank,
                    full_row_rank: report.full_row_rank,
                    node_bound: report.node_bound,
                    meets_node_bound: report.meets_node_bound,
                    extension_nodes: report.extension_nodes,
                    extension_condition_met: report.extension_condition_met,
                },
            )
        }
        "degrees" => {
            let input = args.input.as_ref().ok_or_else(|| {
                CliError::Usage("check --mode degrees needs --input".to_string())
            })?;
            let text = read_to_string(input)?;
            let mut entries = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let degrees: Result<Vec<usize>, _> = line
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>())
                    .collect();
                let degrees = degrees
                    .map_err(|e| CliError::Usage(format!("bad degree line {line:?}: {e}")))?;
                let realizable = erdos_gallai_realizable(&degrees);
                entries.push(DegreeVerdict {
                    degrees,
                    realizable,
                });
            }
            write_report(
                &args.out,
                &DegreesReport {
                    schema: SCHEMA,
                    command: "check",
                    mode: "degrees",
                    entries,
                },
            )
        }
        "kruskal-rank" => {
            let input = args.input.as_ref().ok_or_else(|| {
                CliError::Usage("check --mode kruskal-rank needs --input".to_string())
            })?;
            let text = read_to_string(input)?;
            let rows: Vec<Vec<f64>> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    l.split_whitespace()
                        .map(|t| {
                            t.parse::<f64>().map_err(|e| {
                                CliError::Usage(format!("bad matrix entry {t:?}: {e}"))
                            })
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
                return Err(CliError::Usage("matrix rows must be nonempty and equal length".to_string()));
            }
            let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
            let kr = kruskal_rank(&m)?;
            write_report(
                &args.out,
                &KruskalRankReport {
                    schema: SCHEMA,
                    command: "check",
                    mode: "kruskal-rank",
                    rows: m.nrows(),
                    cols: m.ncols(),
                    rank: numerical_rank(&m, RANK_REL_TOL),
                    kruskal_rank: kr,
                },
            )
        }
        "bins" => {
            let params_path = args.params.as_ref().ok_or_else(|| {
                CliError::Usage("check --mode bins needs --params".to_string())
            })?;
            let loaded = load_params(params_path)?;
            let ModelParams::Weighted(w) = &loaded.model else {
                return Err(CliError::Usage(
                    "check --mode bins needs weighted parameters".to_string(),
                ));
            };
            let cutpoints = match (&args.input, &loaded.cutpoints) {
                (Some(path), _) => read_to_string(path)?
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|e| CliError::Usage(format!("bad cutpoint {t:?}: {e}")))
                    })
                    .collect::<Result<Vec<f64>, _>>()?,
                (None, Some(c)) => c.clone(),
                (None, None) => {
                    return Err(CliError::Usage(
                        "bins mode needs cutpoints, via --input or a \"cutpoints\" field in the parameter file".to_string(),
                    ))
                }
            };
            let fsp = discretize_params(w, &cutpoints).map_err(CliError::from)?;
            let rep = check_bin_independence(&fsp);
            write_report(
                &args.out,
                &BinsReport {
                    schema: SCHEMA,
                    command: "check",
                    mode: "bins",
                    kappa: fsp.kappa,
                    rows: rep.rows,
                    rank: rep.rank,
                    independent: rep.independent,
                    binned: fsp.pvec,
                },
            )
        }
        other => Err(CliError::Usage(format!(
            "unknown check mode {other:?} (expected base-case, degrees, kruskal-rank or bins)"
        ))),
    }
}

#[derive(Serialize)]
struct RecoverK3Report {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    #[serde(rename = "Q")]
    q: usize,
    pi: Vec<f64>,
    sparsity: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    family: &'static str,
}

#[derive(Serialize)]
struct RecoverAffiliationReport {
    schema: &'static str,
    command: &'static str,
    mode: &'static str,
    alpha: f64,
    beta: f64,
    theta_in: f64,
    theta_out: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pi: Option<Vec<f64>>,
}

pub fn run_recover(args: &RecoverArgs) -> Result<(), CliError> {
    let inner = || -> Result<(), CliError> {
        let text = read_to_string(&args.input)?;
        let file: ComponentsFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad components file: {e}")))?;
        let components = to_component_set(file.arity, &file.components);
        match args.mode.as_deref().unwrap_or("k3") {
            "k3" => {
                let marginal_raw = file.marginal.as_ref().ok_or_else(|| {
                    CliError::Usage("recover --mode k3 needs a \"marginal\" block".to_string())
                })?;
                let marginal = to_component_set(1, marginal_raw);
                let rec = recover_from_k3(&components, &marginal)?;
                write_report(
                    &args.out,
                    &RecoverK3Report {
                        schema: SCHEMA,
                        command: "recover",
                        mode: "k3",
                        q: rec.q,
                        pi: rec.pi,
                        sparsity: rec.sparsity,
                        theta: rec.theta,
                        family: "truncated-poisson",
                    },
                )
            }
            "affiliation" => {
                let est = recover_affiliation_weighted(&components.without_dirac(), &components)?;
                let pi = match &file.kn_all_in_weights {
                    Some(weights) => {
                        let s = power_sums_from_all_in_weights(weights, est.alpha)?;
                        Some(priors_from_power_sums(&s)?)
                    }
                    None => None,
                };
                write_report(
                    &args.out,
                    &RecoverAffiliationReport {
                        schema: SCHEMA,
                        command: "recover",
                        mode: "affiliation",
                        alpha: est.alpha,
                        beta: est.beta,
                        theta_in: est.theta_in,
                        theta_out: est.theta_out,
                        pi,
                    },
                )
            }
            other => Err(CliError::Usage(format!(
                "unknown recover mode {other:?} (expected k3 or affiliation)"
            ))),
        }
    };
    inner().map_err(|e| surface_error("recover", &args.out, e))
}

/// Serialize a component set the same way `recover` consumes it (used by
/// tests and by downstream tooling that expands models).
pub fn components_to_file_json(
    set: &sbm_ident::mixture::MixtureComponentSet,
    marginal: Option<&sbm_ident::mixture::MixtureComponentSet>,
    kn_all_in_weights: Option<Vec<f64>>,
) -> ComponentsFile {
    ComponentsFile {
        arity: set.arity,
        components: component_set_to_json(set),
        marginal: marginal.map(component_set_to_json),
        kn_all_in_weights,
    }
}
