//! Execution of the four modes. Each mode computes its cells in parallel,
//! then writes CSVs single-threaded in a fixed order so reruns are
//! byte-identical. Timings and timestamps go to the sidecar `run.log` only.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use fracstep::analysis::{
    error_series, r1_fit_series, spatial_floor, truncation_r3_oracle, ConvergenceReport,
};
use fracstep::kernel::{
    audit_properties, is_admissible, solve_scalar_recurrence, write_weights_csv, RecurrenceSpec,
};
use fracstep::{
    example1_with, example2, march, par, FracError, Method, ProblemSpec, SchemeParams, TemporalMesh,
    WeightTable,
};

use crate::config::{Example, ExperimentConfig, Grading, Mode};
use crate::error::CliError;
use crate::format::{rate, render_rows, sci};

/// Appends timestamped lines to `<out>/run.log`.
pub struct RunLog {
    file: File,
}

impl RunLog {
    fn open(dir: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(dir.join("run.log"))?;
        Ok(Self { file })
    }

    fn line(&mut self, msg: &str) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        // best effort: the log never decides the outcome of a run
        let _ = writeln!(self.file, "[{}.{:03}] {msg}", now.as_secs(), now.subsec_millis());
    }
}

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: usize,
    /// Human-readable summary for stdout.
    pub summary: String,
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    fs::create_dir_all(&config.out).map_err(|source| CliError::OutputDir {
        path: config.out.clone(),
        source,
    })?;
    let mut log = RunLog::open(&config.out).map_err(|source| CliError::OutputDir {
        path: config.out.clone(),
        source,
    })?;
    log.line(&format!("start {config:?}"));
    let started = Instant::now();
    let outcome = par::with_jobs(config.jobs, || match config.mode {
        Mode::Table => run_table(config, &mut log),
        Mode::Audit => run_audit(config, &mut log),
        Mode::Recurrence => run_recurrence(config, &mut log),
        Mode::Truncation => run_truncation(config, &mut log),
    })?;
    log.line(&format!(
        "done in {:.3}s, {} file(s), {} failure(s)",
        started.elapsed().as_secs_f64(),
        outcome.files.len(),
        outcome.failures
    ));
    Ok(outcome)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(contents.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn spec_for(config: &ExperimentConfig, alpha: f64, r: f64, n: usize) -> ProblemSpec {
    let mut spec = match config.example {
        Example::One => example1_with(alpha, r, n, config.m1, config.nu, config.t_final),
        Example::Two => example2(alpha, r, n, config.m1),
    };
    spec.m2 = config.m2;
    spec.nu = config.nu;
    spec.t_final = config.t_final;
    spec
}

// ---------------------------------------------------------------- table

/// One computed table cell.
struct Cell {
    local: f64,
    global: Option<f64>,
    hashes: String,
    floor: Option<f64>,
}

fn table_cell(config: &ExperimentConfig, alpha: f64, r: f64, n: usize) -> Result<Cell, FracError> {
    let spec = spec_for(config, alpha, r, n);
    match config.example {
        Example::One => {
            let series = error_series(&march(&spec)?, &spec)?;
            Ok(Cell {
                local: series.local(),
                global: Some(series.global()),
                hashes: spec.spec_hash(),
                floor: spatial_floor(&spec)?,
            })
        }
        Example::Two => {
            let fine = spec.with_steps(2 * n);
            let (a, b) = (march(&spec)?, march(&fine)?);
            Ok(Cell {
                local: a.final_state().sub(b.final_state()).l2_norm(),
                global: None,
                hashes: format!("{}+{}", spec.spec_hash(), fine.spec_hash()),
                floor: None,
            })
        }
    }
}

fn m_label(config: &ExperimentConfig) -> String {
    if config.m1 == config.m2 {
        config.m1.to_string()
    } else {
        format!("{}x{}", config.m1, config.m2)
    }
}

fn run_table(config: &ExperimentConfig, log: &mut RunLog) -> Result<Outcome, CliError> {
    let mut work = Vec::new();
    for &g in &config.gradings {
        for &alpha in &config.alphas {
            for &n in &config.ns {
                work.push((g, alpha, n));
            }
        }
    }
    let results = par::map_items(&work, |&(g, alpha, n)| {
        let t = Instant::now();
        (table_cell(config, alpha, g.resolve(alpha), n), t.elapsed())
    });

    let mut files = Vec::new();
    let mut failures = 0;
    let mut summary = String::new();
    let example = config.example.id();
    let m = m_label(config);
    let mut results = results.into_iter();
    for &g in &config.gradings {
        let stem = format!("example{example}_r{}", g.label());
        let mut csv = String::from(
            "alpha,r,N,M,E_L,rate_L,E_G,rate_G,expected_local,expected_global\n",
        );
        let mut prov = String::from("alpha,r,N,M,spec_hash,spatial_floor\n");
        let mut rendered = vec![vec![
            "alpha".to_string(),
            "N".into(),
            "E_L".into(),
            "rate".into(),
            "E_G".into(),
            "rate".into(),
        ]];
        for &alpha in &config.alphas {
            let r = g.resolve(alpha);
            let cells: Vec<Option<Cell>> = config
                .ns
                .iter()
                .map(|&n| {
                    let (res, wall) = results.next().expect("one result per cell");
                    match res {
                        Ok(c) => {
                            log.line(&format!(
                                "cell example={example} alpha={alpha} r={g} N={n} hash={} wall={:.3}s",
                                c.hashes,
                                wall.as_secs_f64()
                            ));
                            Some(c)
                        }
                        Err(e) => {
                            failures += 1;
                            log.line(&format!("FAILED example={example} alpha={alpha} r={g} N={n}: {e}"));
                            log::error!("alpha={alpha} r={g} N={n}: {e}");
                            None
                        }
                    }
                })
                .collect();
            let local: Vec<f64> = cells.iter().map(|c| c.as_ref().map_or(f64::NAN, |c| c.local)).collect();
            let global: Option<Vec<f64>> = (config.example == Example::One).then(|| {
                cells
                    .iter()
                    .map(|c| c.as_ref().and_then(|c| c.global).unwrap_or(f64::NAN))
                    .collect()
            });
            let report = if config.ns.len() >= 2 {
                Some(ConvergenceReport::new(alpha, r, config.m1, config.ns.clone(), local.clone(), global.clone())?)
            } else {
                None
            };
            let expected = fracstep::analysis::expected_orders(alpha, r);
            for (k, &n) in config.ns.iter().enumerate() {
                let rl = report.as_ref().and_then(|rep| rep.local_rate(k));
                let rg = report.as_ref().and_then(|rep| rep.global_rate(k));
                let eg = global.as_ref().map(|g| sci(g[k])).unwrap_or_default();
                writeln!(
                    csv,
                    "{alpha},{r},{n},{m},{},{},{eg},{},{:.4},{:.4}",
                    sci(local[k]),
                    rate(rl),
                    rate(rg),
                    expected.local,
                    expected.global
                )
                .unwrap();
                let (hash, floor) = cells[k]
                    .as_ref()
                    .map(|c| (c.hashes.clone(), c.floor.map(sci).unwrap_or_default()))
                    .unwrap_or_default();
                writeln!(prov, "{alpha},{r},{n},{m},{hash},{floor}").unwrap();
                rendered.push(vec![
                    if k == 0 { alpha.to_string() } else { String::new() },
                    n.to_string(),
                    sci(local[k]),
                    rate(rl),
                    eg,
                    rate(rg),
                ]);
            }
            let eps = if expected.epsilon { "-eps" } else { "" };
            rendered.push(vec![
                String::new(),
                "expected".into(),
                String::new(),
                format!("{:.4}{eps}", expected.local),
                String::new(),
                if config.example == Example::One {
                    format!("{:.4}", expected.global)
                } else {
                    String::new()
                },
            ]);
        }
        let title = match config.example {
            Example::One => format!("Example 1: local (E_L) and global (E_G) L2 errors, r = {g}, M = {m}\n"),
            Example::Two => format!("Example 2: two-mesh errors E_L = |U^N - V^2N|, r = {g}, M = {m}\n"),
        };
        let table = format!("{title}{}", render_rows(&rendered));
        summary.push_str(&table);
        summary.push('\n');
        for (ext, body) in [("csv", &csv), ("provenance.csv", &prov), ("txt", &table)] {
            let path = config.out.join(format!("{stem}.{ext}"));
            write_file(&path, body)?;
            files.push(path);
        }
    }
    Ok(Outcome {
        files,
        failures,
        summary,
    })
}

// ---------------------------------------------------------------- audit

struct AuditRow {
    line: String,
    pass: bool,
}

fn audit_cell(config: &ExperimentConfig, alpha: f64, g: Grading, n: usize) -> Result<(AuditRow, TemporalMesh), FracError> {
    let r = g.resolve(alpha);
    let params = SchemeParams::new(alpha)?;
    let mesh = TemporalMesh::graded(config.t_final, n, r)?;
    let report = audit_properties(&mesh, &params, n)?;

    // quadratic exactness of the discrete derivative
    let table = WeightTable::build(&mesh, &params, Method::ClosedForm)?;
    let u: Vec<f64> = mesh.points().iter().map(|t| t * t).collect();
    let gamma_3ma = (2.0 - alpha) * params.gamma_2ma();
    let mut quad_err = 0.0f64;
    for k in 1..=n {
        let exact = 2.0 * mesh.star(k, params.sigma()).powf(2.0 - alpha) / gamma_3ma;
        quad_err = quad_err.max((table.derivative(k, &u[..=k])? - exact).abs());
    }
    let quad_tol = 1e-10 * config.t_final.powi(2).max(1.0);

    // closed form vs quadrature on the first rows
    let rows = n.min(256);
    let quad = WeightTable::build_upto(&mesh, &params, Method::Quadrature, rows)?;
    let mut dual = 0.0f64;
    for k in 1..=rows {
        for (a, b) in table.row(k).iter().zip(quad.row(k)) {
            dual = dual.max((a - b).abs() / a.abs());
        }
    }

    let status = |c: &fracstep::kernel::PropertyCheck| {
        if !c.evaluated {
            "skipped"
        } else if c.holds {
            "pass"
        } else {
            "FAIL"
        }
    };
    let pass = report.all_pass() && quad_err <= quad_tol && dual <= 1e-11;
    let line = format!(
        "{alpha},{g},{r},{n},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        report.mesh.rho_min.map(sci).unwrap_or_default(),
        report.mesh.rho_max.map(sci).unwrap_or_default(),
        report.mesh.max_inverse_ratio.map(sci).unwrap_or_default(),
        status(&report.p1),
        sci(report.p1.worst_margin),
        status(&report.p2),
        sci(report.p2.worst_margin),
        status(&report.p3),
        sci(report.p3.worst_margin),
        status(&report.p4),
        sci(report.p4.worst_margin),
        sci(quad_err),
        sci(dual),
        if pass { "pass" } else { "FAIL" },
    );
    Ok((AuditRow { line, pass }, mesh))
}

fn run_audit(config: &ExperimentConfig, log: &mut RunLog) -> Result<Outcome, CliError> {
    let mut work = Vec::new();
    for &alpha in &config.alphas {
        for &g in &config.gradings {
            for &n in &config.ns {
                work.push((alpha, g, n));
            }
        }
    }
    let results = par::map_items(&work, |&(alpha, g, n)| audit_cell(config, alpha, g, n));
    let mesh_dir = config.out.join("meshes");
    fs::create_dir_all(&mesh_dir)?;
    let mut csv = String::from(
        "alpha,r_spec,r,N,rho_min,rho_max,max_inverse_ratio,P1,P1_margin,P2,P2_margin,P3,P3_margin,P4,P4_margin,quadratic_error,dual_path_rel,all\n",
    );
    let mut files = Vec::new();
    let (mut failures, mut failing) = (0, Vec::new());
    for (&(alpha, g, n), res) in work.iter().zip(results) {
        match res {
            Ok((row, mesh)) => {
                csv.push_str(&row.line);
                csv.push('\n');
                if !row.pass {
                    failing.push(format!("alpha={alpha} r={g} N={n}"));
                }
                let stem = format!("a{alpha}_r{}_N{n}", g.label());
                let path = mesh_dir.join(format!("mesh_{stem}.csv"));
                mesh.write_csv(BufWriter::new(File::create(&path)?))?;
                files.push(path);
                if config.dump_weights {
                    let params = SchemeParams::new(alpha)?;
                    let path = mesh_dir.join(format!("weights_{stem}.csv"));
                    write_weights_csv(BufWriter::new(File::create(&path)?), &mesh, &params, Method::ClosedForm, n)?;
                    files.push(path);
                }
            }
            Err(e) => {
                failures += 1;
                log.line(&format!("FAILED audit alpha={alpha} r={g} N={n}: {e}"));
            }
        }
    }
    let path = config.out.join("audit.csv");
    write_file(&path, &csv)?;
    files.insert(0, path);
    let summary = if failing.is_empty() {
        format!("audit: {} cell(s), all properties hold\n", work.len() - failures)
    } else {
        format!("audit: {} cell(s) with failing properties:\n  {}\n", failing.len(), failing.join("\n  "))
    };
    log.line(summary.trim_end());
    Ok(Outcome {
        files,
        failures,
        summary,
    })
}

// ---------------------------------------------------------------- recurrence

fn run_recurrence(config: &ExperimentConfig, log: &mut RunLog) -> Result<Outcome, CliError> {
    let mut work = Vec::new();
    for &alpha in &config.alphas {
        for &g in &config.gradings {
            for gamma in config.gammas_for(alpha) {
                for &l1 in &config.lambda1 {
                    for &l2 in &config.lambda2 {
                        for &n in &config.ns {
                            work.push((alpha, g, gamma, l1, l2, n));
                        }
                    }
                }
            }
        }
    }
    let results = par::map_items(&work, |&(alpha, g, gamma, l1, l2, n)| {
        let r = g.resolve(alpha);
        if !is_admissible(alpha, r, gamma) {
            return Ok(None);
        }
        let params = SchemeParams::new(alpha)?;
        let mesh = TemporalMesh::graded(config.t_final, n, r)?;
        let spec = RecurrenceSpec::new(params, mesh.clone(), gamma, l1, l2);
        match solve_scalar_recurrence(&spec) {
            Ok(res) => Ok(Some(Ok((res, mesh)))),
            Err(FracError::StepSizeCondition { lhs, rhs }) => Ok(Some(Err(format!(
                "step-size condition fails ({} > {})",
                sci(lhs),
                sci(rhs)
            )))),
            Err(e) => Err(e),
        }
    });
    let dir = config.out.join("recurrence");
    fs::create_dir_all(&dir)?;
    let mut csv = String::from("alpha,r_spec,r,gamma,lambda1,lambda2,N,status,constant,argmax,ratio_to_previous\n");
    let mut files = Vec::new();
    let mut failures = 0;
    let mut worst_ratio = 1.0f64;
    let mut previous: Option<f64> = None;
    for (k, (&(alpha, g, gamma, l1, l2, n), res)) in work.iter().zip(results).enumerate() {
        if k == 0 || n <= work[k - 1].5 {
            previous = None;
        }
        let r = g.resolve(alpha);
        let head = format!("{alpha},{g},{r},{gamma},{l1},{l2},{n}");
        match res {
            Ok(None) => writeln!(csv, "{head},not admissible,,,").unwrap(),
            Ok(Some(Err(reason))) => {
                writeln!(csv, "{head},{reason},,,").unwrap();
                previous = None;
            }
            Ok(Some(Ok((res, mesh)))) => {
                let ratio = previous.map(|p| res.constant / p);
                if let Some(q) = ratio {
                    worst_ratio = worst_ratio.max(q.max(1.0 / q));
                }
                writeln!(
                    csv,
                    "{head},ok,{},{},{}",
                    sci(res.constant),
                    res.argmax,
                    ratio.map(|q| format!("{q:.4}")).unwrap_or_default()
                )
                .unwrap();
                previous = Some(res.constant);
                let path = dir.join(format!("v_a{alpha}_r{}_g{gamma}_l{l1}_{l2}_N{n}.csv", g.label()));
                res.write_csv(BufWriter::new(File::create(&path)?), &mesh)?;
                files.push(path);
            }
            Err(e) => {
                failures += 1;
                previous = None;
                writeln!(csv, "{head},error,,,").unwrap();
                log.line(&format!("FAILED recurrence {head}: {e}"));
            }
        }
    }
    let path = config.out.join("recurrence.csv");
    write_file(&path, &csv)?;
    files.insert(0, path);
    let summary = format!(
        "recurrence: {} run(s); largest change of the bound constant between consecutive N: x{worst_ratio:.4}\n",
        files.len() - 1
    );
    Ok(Outcome {
        files,
        failures,
        summary,
    })
}

// ---------------------------------------------------------------- truncation

fn run_truncation(config: &ExperimentConfig, log: &mut RunLog) -> Result<Outcome, CliError> {
    let mut r1_work = Vec::new();
    for &alpha in &config.alphas {
        for &g in &config.gradings {
            for beta in [alpha, 1.0, 2.0] {
                r1_work.push((alpha, g, beta));
            }
        }
    }
    let r1 = par::map_items(&r1_work, |&(alpha, g, beta)| {
        r1_fit_series(alpha, g.resolve(alpha), beta, &config.ns)
    });
    let mut failures = 0;
    let mut csv = String::from("alpha,r_spec,r,beta,N,max_residual,constant,ratio_to_previous\n");
    for (&(alpha, g, beta), res) in r1_work.iter().zip(r1) {
        let r = g.resolve(alpha);
        match res {
            Ok(series) => {
                let ratios = series.ratios();
                for (k, fit) in series.fits.iter().enumerate() {
                    let q = k.checked_sub(1).map(|i| format!("{:.4}", ratios[i])).unwrap_or_default();
                    writeln!(
                        csv,
                        "{alpha},{g},{r},{beta},{},{},{},{q}",
                        fit.n_steps,
                        sci(fit.max_residual),
                        sci(fit.constant)
                    )
                    .unwrap();
                }
            }
            Err(e) => {
                failures += 1;
                log.line(&format!("FAILED r1 alpha={alpha} r={g} beta={beta}: {e}"));
            }
        }
    }
    let mut files = vec![config.out.join("truncation_r1.csv")];
    write_file(&files[0], &csv)?;

    // r3 / r2 need an exact solution: always use the manufactured problem.
    let mut r3_work = Vec::new();
    for &alpha in &config.alphas {
        for &g in &config.gradings {
            for &n in &config.ns {
                r3_work.push((alpha, g, n));
            }
        }
    }
    let r3 = par::map_items(&r3_work, |&(alpha, g, n)| {
        let mut spec = example1_with(alpha, g.resolve(alpha), n, config.m1, config.nu, config.t_final);
        spec.m2 = config.m2;
        truncation_r3_oracle(&spec)
    });
    let mut csv = String::from("alpha,r_spec,r,N,M,r3_max,r3_constant,r2_max,r2_constant,r2_temporal_constant,r2_spatial_max\n");
    let m = m_label(config);
    for (&(alpha, g, n), res) in r3_work.iter().zip(r3) {
        match res {
            Ok(f) => writeln!(
                csv,
                "{alpha},{g},{},{n},{m},{},{},{},{},{},{}",
                g.resolve(alpha),
                sci(f.r3.max_residual),
                sci(f.r3.constant),
                sci(f.r2.max_residual),
                sci(f.r2.constant),
                sci(f.r2_temporal.constant),
                sci(f.r2_spatial.max_residual)
            )
            .unwrap(),
            Err(e) => {
                failures += 1;
                log.line(&format!("FAILED r3 alpha={alpha} r={g} N={n}: {e}"));
            }
        }
    }
    let path = config.out.join("truncation_r3.csv");
    write_file(&path, &csv)?;
    files.push(path);
    Ok(Outcome {
        summary: format!("truncation: wrote {} file(s)\n", files.len()),
        files,
        failures,
    })
}
