use std::fs;

use lowrank_poly::concentration::{concentrate, verify_chain, ConcentrationReport};
use lowrank_poly::gen::{generate, GenModel};
use lowrank_poly::low_rank::{greedy_approximate, reconstruct, step_bound};
use lowrank_poly::oracle::{operator_norm_oracle, subspace_norm_oracle};
use lowrank_poly::sphere::{norm_ratio_probe, operator_norm, subspace_norm, OptimizerConfig};
use lowrank_poly::{json, Error, HomPoly64};
use serde::Serialize;

use crate::args::{Cli, Command, Common, Format};
use crate::output::{
    ApproxOutput, BenchCell, BenchOutput, ConcentrateOutput, NormOutput, OracleOutput,
};
use crate::text;

/// Largest dense `n^d` tensor a bench cell may build.
pub const BENCH_DENSE_LIMIT: u128 = 10_000_000;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input combination.
    Usage(String),
    Core(Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// What to print and how to exit. `exit` is 0, or 2 when a checked
/// invariant failed.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub exit: u8,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, exit: 0 }
    }
}

type Res<T> = std::result::Result<T, CliError>;

fn optimizer_config(c: &Common) -> Res<OptimizerConfig> {
    let cfg = OptimizerConfig {
        restarts: c.restarts,
        max_iters: c.max_iters,
        tol: c.tol,
        seed: c.seed,
        shift: None,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_poly(c: &Common) -> Res<HomPoly64> {
    let src = match (&c.input, &c.poly) {
        (Some(path), None) => fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        (None, Some(s)) => s.clone(),
        (None, None) => {
            return Err(CliError::Usage(
                "one of --input or --poly is required".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--input and --poly are mutually exclusive".into(),
            ))
        }
    };
    Ok(json::parse_poly(&src)?)
}

fn no_input(c: &Common, cmd: &str) -> Res<()> {
    if c.input.is_some() || c.poly.is_some() {
        return Err(CliError::Usage(format!(
            "`{cmd}` takes no polynomial input"
        )));
    }
    Ok(())
}

fn no_oracle(c: &Common, cmd: &str) -> Res<()> {
    if c.oracle {
        return Err(CliError::Usage(format!("`{cmd}` has no oracle path")));
    }
    Ok(())
}

fn emit<S: Serialize>(c: &Common, value: &S, render: impl FnOnce(&S) -> String) -> Res<String> {
    Ok(match c.format {
        Format::Json => {
            let mut s = json::to_string(value, true)?;
            s.push('\n');
            s
        }
        Format::Text => render(value),
    })
}

fn oracle_method(p: &HomPoly64) -> &'static str {
    if p.d() == 2 {
        "eigen"
    } else {
        "grid"
    }
}

pub fn run(cli: &Cli) -> Res<Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Norm => {
            no_oracle(c, "norm")?;
            let p = load_poly(c)?;
            let out = NormOutput {
                bombieri: p.bombieri_norm(),
                max_coeff: p.max_coeff_norm(),
            };
            Ok(Outcome::ok(emit(c, &out, text::norm)?))
        }
        Command::Opnorm => {
            let p = load_poly(c)?;
            if c.oracle {
                let out = OracleOutput {
                    value: operator_norm_oracle(&p)?,
                    method: oracle_method(&p).into(),
                };
                return Ok(Outcome::ok(emit(c, &out, text::oracle)?));
            }
            let m = operator_norm(&p, &optimizer_config(c)?)?;
            Ok(Outcome::ok(emit(c, &m, text::sphere_max)?))
        }
        Command::Subnorm { k } => {
            let p = load_poly(c)?;
            if c.oracle {
                let out = OracleOutput {
                    value: subspace_norm_oracle(&p, *k)?,
                    method: "eigen".into(),
                };
                return Ok(Outcome::ok(emit(c, &out, text::oracle)?));
            }
            let m = subspace_norm(&p, *k, &optimizer_config(c)?)?;
            Ok(Outcome::ok(emit(c, &m, text::frame_max)?))
        }
        Command::Approx { eps } => {
            let p = load_poly(c)?;
            let approx = greedy_approximate(&p, *eps, &optimizer_config(c)?)?;
            let residual_opnorm_oracle = if c.oracle {
                let q = reconstruct(&approx, p.n(), p.d())?;
                Some(operator_norm_oracle(&p.sub(&q)?)?)
            } else {
                None
            };
            let bound = step_bound(*eps);
            let out = ApproxOutput {
                within_bound: approx.terms.len() <= bound,
                step_bound: bound,
                approx,
                residual_opnorm_oracle,
            };
            let exit = if out.within_bound { 0 } else { 2 };
            Ok(Outcome {
                output: emit(c, &out, text::approx)?,
                exit,
            })
        }
        Command::Concentrate { eps, eps_inner } => {
            no_oracle(c, "concentrate")?;
            let p = load_poly(c)?;
            let cfg = optimizer_config(c)?;
            let report = concentrate(&p, *eps, &cfg, *eps_inner)?;
            let verdict = verify_chain(&p, &report, &cfg)?;
            let exit = if verdict.all_pass { 0 } else { 2 };
            let out = ConcentrateOutput { report, verdict };
            Ok(Outcome {
                output: emit(c, &out, text::concentrate)?,
                exit,
            })
        }
        Command::ChainCheck { report } => {
            no_oracle(c, "chain-check")?;
            let p = load_poly(c)?;
            let raw = fs::read_to_string(report)
                .map_err(|e| CliError::Io(format!("{}: {e}", report.display())))?;
            let report = read_report(&raw)?;
            let verdict = verify_chain(&p, &report, &optimizer_config(c)?)?;
            let exit = if verdict.all_pass { 0 } else { 2 };
            Ok(Outcome {
                output: emit(c, &verdict, text::verdict)?,
                exit,
            })
        }
        Command::Gen { n, d, model, noise } => {
            no_input(c, "gen")?;
            no_oracle(c, "gen")?;
            let model = parse_model(model, *noise)?;
            let p: HomPoly64 = generate(model, *n, *d, c.seed)?;
            let mut s = json::poly_to_string(&p, true)?;
            s.push('\n');
            Ok(Outcome::ok(s))
        }
        Command::Bench {
            eps,
            d,
            n,
            samples,
            model,
            no_defect,
        } => {
            no_input(c, "bench")?;
            no_oracle(c, "bench")?;
            let out = bench(c, eps, d, n, *samples, model, !*no_defect)?;
            let exit = if out.cells.iter().all(|cell| cell.violations == 0) {
                0
            } else {
                2
            };
            let output = match c.format {
                Format::Json => {
                    let mut s = json::to_string(&out, true)?;
                    s.push('\n');
                    s
                }
                Format::Text => text::bench_csv(&out).map_err(|e| CliError::Io(e.to_string()))?,
            };
            Ok(Outcome { output, exit })
        }
        Command::RatioProbe { d, k, n, samples } => {
            no_input(c, "ratio-probe")?;
            let r = norm_ratio_probe(*d, *k, *n, *samples, c.seed, &optimizer_config(c)?)?;
            Ok(Outcome::ok(emit(c, &r, text::ratio)?))
        }
    }
}

fn parse_model(s: &str, noise: f64) -> Res<GenModel> {
    let model: GenModel = s.parse()?;
    Ok(match model {
        GenModel::PlantedLowRank { rank, .. } => GenModel::PlantedLowRank { rank, noise },
        m if noise != 0.0 => {
            return Err(CliError::Usage(format!(
                "--noise only applies to planted-lowrank, not {m}"
            )))
        }
        m => m,
    })
}

/// Accepts either the full `concentrate` output or a bare report.
pub fn read_report(raw: &str) -> Res<ConcentrationReport<f64>> {
    let v: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| Error::Parse(format!("report: {e}")))?;
    let inner = v.get("report").cloned().unwrap_or(v);
    serde_json::from_value(inner).map_err(|e| Error::Parse(format!("report: {e}")).into())
}

fn bench(
    c: &Common,
    eps_list: &[f64],
    d_list: &[u32],
    n_list: &[usize],
    samples: usize,
    model: &str,
    with_defect: bool,
) -> Res<BenchOutput> {
    let cfg = optimizer_config(c)?;
    let model = parse_model(model, 0.0)?;
    if samples == 0 {
        return Err(CliError::Usage("--samples must be ≥ 1".into()));
    }
    for &n in n_list {
        for &d in d_list {
            let dense = (n as u128).checked_pow(d).unwrap_or(u128::MAX);
            if dense > BENCH_DENSE_LIMIT {
                return Err(CliError::Usage(format!(
                    "cell n = {n}, d = {d} needs a dense expansion of {dense} entries (limit {BENCH_DENSE_LIMIT})"
                )));
            }
        }
    }
    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for &eps in eps_list {
        for &d in d_list {
            for &n in n_list {
                let bound = step_bound(eps);
                let mut terms = Vec::with_capacity(samples);
                let mut residual_violations = 0;
                let mut ratios = [0.0f64; 3];
                for s in 0..samples {
                    let run = cfg.derive((cell_index << 32) | s as u64);
                    let p: HomPoly64 = generate(model, n, d, run.seed)?;
                    if p.is_zero() {
                        terms.push(0);
                        continue;
                    }
                    let a = greedy_approximate(&p, eps, &run)?;
                    if a.final_residual_opnorm() > eps * a.input_norm {
                        residual_violations += 1;
                    }
                    terms.push(a.terms.len());
                    if with_defect {
                        let r = concentrate(&p, eps, &run, None)?;
                        ratios[0] += r.ratios.over_norm;
                        ratios[1] += r.ratios.over_norm_sq;
                        ratios[2] += r.ratios.over_eps_sq_norm_sq;
                    }
                }
                let mean = |x: f64| with_defect.then(|| x / samples as f64);
                cells.push(BenchCell {
                    eps,
                    d,
                    n,
                    samples,
                    model: model.to_string(),
                    bound,
                    mean_terms: terms.iter().sum::<usize>() as f64 / samples as f64,
                    max_terms: terms.iter().copied().max().unwrap_or(0),
                    violations: terms.iter().filter(|&&t| t > bound).count(),
                    residual_violations,
                    mean_defect_over_norm: mean(ratios[0]),
                    mean_defect_over_norm_sq: mean(ratios[1]),
                    mean_defect_over_eps_sq_norm_sq: mean(ratios[2]),
                });
                cell_index += 1;
            }
        }
    }
    Ok(BenchOutput {
        seed: c.seed,
        cells,
    })
}
