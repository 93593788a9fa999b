use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method, RuleKind};
use super::experiment::{self, Case, Outcome, Shared};
use super::CliError;
use crate::error::Error;
use crate::problems::{add_noise, write_array, write_matrix, write_problem_dir};
use crate::regularization::{stop_lcurve, RunRecord, StopFlag};
use crate::wgkb::{BidiagOptions, Wgkb};
use crate::wsvd::Wsvd;

pub const ITERATION_HEADER: &str = "k,res_norm,sol_mnorm,rel_err";
pub const SUMMARY_HEADER: &str = "problem,rule,method,stop_k,rel_err,wall_ms";
pub const SWEEP_HEADER: &str = "problem,epsilon,seed,method,rule,stop_k,rel_err,status";
pub const LCURVE_HEADER: &str = "k,log_res,log_mnorm,curvature,is_corner";

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(e.into())
}

fn opt<T: std::fmt::LowerExp>(v: Option<T>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn one<T: Copy>(what: &str, values: &[T]) -> Result<T, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::Usage(format!(
            "this command takes a single {what}, got {}; use `sweep` for several",
            values.len()
        ))),
    }
}

/// The single case a non-sweep command works on.
fn single_case(cfg: &ExperimentConfig) -> Result<Case, CliError> {
    if let Some(dir) = &cfg.input {
        return experiment::load_case(dir);
    }
    let kind = one("problem", &cfg.problems)?;
    let eps = one("noise level", &cfg.epsilons)?;
    let seed = one("seed", &cfg.seeds)?;
    let shared = Shared::from(experiment::build(cfg, kind)?);
    experiment::noisy_case(&shared, eps, seed)
}

fn write_or_print(
    cfg: &ExperimentConfig,
    file: &str,
    text: &str,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io)?;
            fs::write(dir.join(file), text).map_err(io)
        }
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

pub fn gen(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.input.is_some() {
        return Err(CliError::Usage(
            "gen writes problems; --input does not apply".into(),
        ));
    }
    let count = cfg.problems.len() * cfg.epsilons.len() * cfg.seeds.len();
    for &kind in &cfg.problems {
        let problem = experiment::build(cfg, kind)?;
        for &eps in &cfg.epsilons {
            for &seed in &cfg.seeds {
                let data = add_noise(&problem, eps, seed)?;
                let dir: PathBuf = match (&cfg.out, count) {
                    (Some(base), 1) => base.clone(),
                    (None, 1) => PathBuf::from(kind.name()),
                    (base, _) => base
                        .clone()
                        .unwrap_or_default()
                        .join(format!("{kind}-eps{eps:e}-seed{seed}")),
                };
                write_problem_dir(&dir, &problem, &data)?;
                writeln!(out, "{}", dir.display()).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn iteration_csv(record: &RunRecord) -> String {
    let mut s = String::from(ITERATION_HEADER);
    s.push('\n');
    for (i, it) in record.iterations.iter().enumerate() {
        let err = record.relative_errors.as_ref().map(|e| e[i]);
        let _ = writeln!(
            s,
            "{},{:e},{:e},{}",
            it.k,
            it.residual_norm,
            it.solution_m_norm,
            opt(err)
        );
    }
    s
}

fn summary_row(case: &Case, rule: RuleKind, method: Method, o: &Outcome) -> String {
    format!(
        "{},{},{},{},{},{:.3}",
        case.name,
        rule,
        method,
        o.stop_k.map(|k| k.to_string()).unwrap_or_default(),
        opt(o.rel_err),
        o.wall.as_secs_f64() * 1e3
    )
}

fn report_flag(flag: Option<StopFlag>) {
    match flag {
        Some(StopFlag::Degenerate) => {
            log::warn!("discrepancy threshold is above ||b||; returning the first iterate")
        }
        Some(StopFlag::NotReached) => {
            log::warn!("stopping rule never fired; returning the last iterate")
        }
        Some(StopFlag::NoCorner) => log::warn!("L-curve has no clear corner"),
        None => {}
    }
}

pub fn solve(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let rule_kind = one("rule", &cfg.rules)?;
    let method = one("method", &cfg.methods)?;
    let case = single_case(cfg)?;
    let rule = experiment::make_rule(rule_kind, &case, cfg.tau)?;
    let outcome = experiment::run(&case, method, &rule, cfg, None)?;
    report_flag(outcome.flag);
    if let Some(l) = outcome.lambda {
        log::info!("optimal Tikhonov parameter {l:e}");
    }

    let summary = format!(
        "{SUMMARY_HEADER}\n{}\n",
        summary_row(&case, rule_kind, method, &outcome)
    );
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(io)?;
        if let Some(record) = &outcome.record {
            fs::write(dir.join("iterations.csv"), iteration_csv(record)).map_err(io)?;
        }
        fs::write(dir.join("summary.csv"), &summary).map_err(io)?;
        write_array(&dir.join("x"), outcome.x.as_slice())?;
    }
    out.write_all(summary.as_bytes()).map_err(io)
}

#[derive(Debug, Clone, PartialEq)]
struct SweepRow {
    problem: String,
    epsilon: f64,
    seed: u64,
    method: Method,
    rule: RuleKind,
    stop_k: Option<usize>,
    rel_err: Option<f64>,
    status: String,
}

impl SweepRow {
    fn line(&self) -> String {
        format!(
            "{},{:e},{},{},{},{},{},{}",
            self.problem,
            self.epsilon,
            self.seed,
            self.method,
            self.rule,
            self.stop_k.map(|k| k.to_string()).unwrap_or_default(),
            opt(self.rel_err),
            self.status
        )
    }
}

struct Target {
    shared: Option<Shared>,
    loaded: Option<Case>,
    wsvd: Option<Wsvd>,
}

pub fn sweep(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let needs_wsvd = cfg.methods.iter().any(|m| m.needs_wsvd());
    let mut targets = Vec::new();
    if let Some(dir) = &cfg.input {
        let case = experiment::load_case(dir)?;
        for &rule in &cfg.rules {
            experiment::make_rule(rule, &case, cfg.tau)?;
        }
        let wsvd = needs_wsvd
            .then(|| Wsvd::compute(&case.a, &case.weight))
            .transpose()?;
        targets.push(Target {
            shared: None,
            loaded: Some(case),
            wsvd,
        });
    } else {
        for &kind in &cfg.problems {
            let shared = Shared::from(experiment::build(cfg, kind)?);
            let wsvd = needs_wsvd
                .then(|| Wsvd::compute(&shared.a, &shared.weight))
                .transpose()?;
            targets.push(Target {
                shared: Some(shared),
                loaded: None,
                wsvd,
            });
        }
    }

    let mut cells = Vec::new();
    for (t, target) in targets.iter().enumerate() {
        let noise: Vec<(f64, u64)> = match &target.loaded {
            Some(c) => vec![(c.epsilon, c.seed)],
            None => cfg
                .epsilons
                .iter()
                .flat_map(|&e| cfg.seeds.iter().map(move |&s| (e, s)))
                .collect(),
        };
        for (eps, seed) in noise {
            for &method in &cfg.methods {
                for &rule in &cfg.rules {
                    cells.push((t, eps, seed, method, rule));
                }
            }
        }
    }

    let run_cell = |&(t, eps, seed, method, rule): &(usize, f64, u64, Method, RuleKind)| {
        let target: &Target = &targets[t];
        let case = match (&target.loaded, &target.shared) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(s)) => experiment::noisy_case(s, eps, seed),
            (None, None) => unreachable!("every target has a source"),
        };
        let mut row = SweepRow {
            problem: String::new(),
            epsilon: eps,
            seed,
            method,
            rule,
            stop_k: None,
            rel_err: None,
            status: String::new(),
        };
        let result = case.and_then(|case| {
            row.problem = case.name.clone();
            if !method.supports(rule) {
                return Ok(None);
            }
            let r = experiment::make_rule(rule, &case, cfg.tau)?;
            experiment::run(&case, method, &r, cfg, target.wsvd.as_ref()).map(Some)
        });
        match result {
            Ok(Some(o)) => {
                row.stop_k = o.stop_k;
                row.rel_err = o.rel_err;
                row.status = o.flag.map_or("ok", StopFlag::as_str).to_string();
            }
            Ok(None) => row.status = "unsupported".into(),
            Err(e) => row.status = format!("error: {e}").replace(',', ";"),
        }
        if row.problem.is_empty() {
            if let Some(s) = &target.shared {
                row.problem = s.kind.name().to_string();
            }
        }
        row
    };

    let mut rows: Vec<SweepRow> = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Runtime(Error::InvalidParameter(e.to_string())))?
            .install(|| cells.par_iter().map(run_cell).collect()),
        None => cells.par_iter().map(run_cell).collect(),
    };
    rows.sort_by(|a, b| {
        a.problem
            .cmp(&b.problem)
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.seed.cmp(&b.seed))
            .then(a.method.cmp(&b.method))
            .then(a.rule.cmp(&b.rule))
    });

    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&row.line());
        text.push('\n');
    }
    write_or_print(cfg, "sweep.csv", &text, out)
}

/// Reads `res_norm` and `sol_mnorm` columns from a per-iteration CSV.
fn read_history(path: &Path) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(e.into()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Config(Error::Format("empty history file".into())))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| {
            CliError::Config(Error::Format(format!(
                "history file has no `{name}` column"
            )))
        })
    };
    let (ck, cr, cn) = (col("k")?, col("res_norm")?, col("sol_mnorm")?);
    let (mut ks, mut res, mut norm) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || {
            CliError::Config(Error::Format(format!(
                "history line {}: {line}",
                lineno + 2
            )))
        };
        let get = |c: usize| fields.get(c).copied().ok_or_else(bad);
        ks.push(get(ck)?.parse().map_err(|_| bad())?);
        res.push(get(cr)?.parse().map_err(|_| bad())?);
        norm.push(get(cn)?.parse().map_err(|_| bad())?);
    }
    Ok((ks, res, norm))
}

pub fn lcurve(
    cfg: &ExperimentConfig,
    history: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (ks, res, norm) = match history {
        Some(path) => read_history(path)?,
        None => {
            let method = one("method", &cfg.methods)?;
            if method == Method::TikhOpt {
                return Err(CliError::Usage(
                    "lcurve needs an iterative method or twsvd".into(),
                ));
            }
            let case = single_case(cfg)?;
            let rule = experiment::make_rule(RuleKind::Lc, &case, cfg.tau)?;
            let o = experiment::run(&case, method, &rule, cfg, None)?;
            let record = o.record.expect("iterative methods keep a history");
            (
                record.iterations.iter().map(|r| r.k).collect(),
                record.residual_norms(),
                record.solution_norms(),
            )
        }
    };
    let corner = stop_lcurve(&res, &norm)?;
    if corner.no_corner {
        log::warn!("L-curve has no clear corner");
    }
    let mut text = String::from(LCURVE_HEADER);
    text.push('\n');
    for i in 0..ks.len() {
        let _ = writeln!(
            text,
            "{},{:e},{:e},{},{}",
            ks[i],
            corner.log_res[i],
            corner.log_norm[i],
            opt(corner.curvature[i]),
            i + 1 == corner.k
        );
    }
    write_or_print(cfg, "lcurve.csv", &text, out)
}

pub fn wsvd(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let case = single_case(cfg)?;
    if case.a.ncols() > 1000 {
        log::warn!(
            "dense weighted SVD of a {}x{} matrix may take a while",
            case.a.nrows(),
            case.a.ncols()
        );
    }
    let f = Wsvd::compute(&case.a, &case.weight)?;
    let mut text = String::from("i,sigma\n");
    for (i, s) in f.sigma().iter().enumerate() {
        let _ = writeln!(text, "{},{s:e}", i + 1);
    }
    out.write_all(text.as_bytes()).map_err(io)?;
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(io)?;
        write_matrix(&dir.join("U"), f.u())?;
        write_array(&dir.join("sigma"), f.sigma().as_slice())?;
        write_matrix(&dir.join("V"), f.v_full())?;
    }
    Ok(())
}

pub fn triplets(
    cfg: &ExperimentConfig,
    steps: usize,
    count: usize,
    tol: Option<f64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if steps == 0 || count == 0 || count > steps {
        return Err(CliError::Usage(format!(
            "need 1 <= count <= steps, got count {count} and steps {steps}"
        )));
    }
    let case = single_case(cfg)?;
    let opts = BidiagOptions {
        reorth: cfg.reorth,
        ..BidiagOptions::default()
    };
    let mut gkb = Wgkb::new(&case.a, &case.weight, &case.b, opts)?;
    while gkb.steps() < steps && gkb.step() {}
    if gkb.steps() < steps {
        log::warn!("bidiagonalization terminated after {} steps", gkb.steps());
    }
    let available = gkb.steps();
    if available == 0 {
        return Err(CliError::Runtime(Error::InvalidParameter(
            "bidiagonalization terminated before the first step".into(),
        )));
    }
    let found = gkb.approx_triplets(count.min(available))?;
    let tol = tol.unwrap_or(1e-8 * found[0].sigma);
    let mut text = String::from("i,sigma,residual_bound,converged\n");
    for (i, t) in found.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{:e},{:e},{}",
            i + 1,
            t.sigma,
            t.residual_bound,
            t.converged(tol)
        );
    }
    write_or_print(cfg, "triplets.csv", &text, out)
}
