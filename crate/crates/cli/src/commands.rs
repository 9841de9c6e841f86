use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use gave_core::format;
use gave_core::nsna::{self, TraceError};
use gave_core::problems::{self, REFERENCE_TABLES};
use gave_core::verify;
use gave_core::{ExampleSpec, Family, GaveProblem, RealVector, SolveReport, SolveStatus, SolverConfig};

use crate::table::Table;
use crate::{exit, input_err, parallel, OutputFormat, BenchArgs, CliError, GenerateArgs, OracleArgs, ProblemArgs, SolveArgs, VerifyArgs};

fn family(k: u8) -> Result<Family, CliError> {
    Family::from_number(k).ok_or_else(|| CliError::Input(format!("unknown family {k}")))
}

fn example_spec(args: &ProblemArgs, k: u8) -> Result<ExampleSpec, CliError> {
    ExampleSpec::new(family(k)?, args.m, args.xi, args.zeta).map_err(input_err)
}

fn load_problem(args: &ProblemArgs) -> Result<GaveProblem, CliError> {
    if let Some(path) = &args.file {
        let f = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let parsed = format::read_problem(BufReader::new(f))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        return Ok(parsed.into_gave());
    }
    if let Some(k) = args.example {
        return problems::example_gave(&example_spec(args, k)?).map_err(input_err);
    }
    if let Some(n) = args.random_n {
        if n == 0 {
            return Err(CliError::Input("--random-n must be positive".into()));
        }
        return problems::random_solvable_gave(n, args.seed).map_err(input_err);
    }
    Err(CliError::Input(
        "no problem given: pass a file, --example or --random-n".into(),
    ))
}

fn run_solver(p: &GaveProblem, cfg: &SolverConfig, x0: f64) -> Result<SolveReport, CliError> {
    nsna::solve(p, cfg, &RealVector::filled(p.n(), x0)).map_err(input_err)
}

fn status_code(status: &SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => exit::OK,
        SolveStatus::InvariantViolation { .. } => exit::INVARIANT,
        _ => exit::NOT_CONVERGED,
    }
}

fn write_trace(path: &Path, report: &SolveReport) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    nsna::write_trace_csv(&mut w, &report.trace)?;
    w.flush()?;
    Ok(())
}

/// Re-reads a written trace and checks it row by row.
fn check_trace_file(path: &Path) -> Result<(), CliError> {
    let f = File::open(path)?;
    let records = nsna::read_trace_csv(BufReader::new(f)).map_err(|e| match e {
        TraceError::Io(e) => CliError::Io(e),
        other => CliError::Invariant(format!("{}: {other}", path.display())),
    })?;
    nsna::check_trace(&records).map_err(|e| CliError::Invariant(format!("{}: {e}", path.display())))
}

fn secs(d: Duration) -> String {
    format!("{:.4}", d.as_secs_f64())
}

fn worst(codes: impl IntoIterator<Item = u8>) -> u8 {
    codes.into_iter().fold(exit::OK, |acc, c| match (acc, c) {
        (exit::INVARIANT, _) | (_, exit::INVARIANT) => exit::INVARIANT,
        (a, b) => a.max(b),
    })
}

struct Cell {
    table: Option<u8>,
    spec: ExampleSpec,
    reference: Option<usize>,
    monotone: bool,
}

impl Cell {
    fn method(&self) -> &'static str {
        if self.monotone {
            "nsna-monotone"
        } else {
            "nsna"
        }
    }

    fn file_name(&self) -> String {
        let s = &self.spec;
        let stem = match self.table {
            Some(t) => format!("table{t}_n{}", s.n()),
            None => format!("ex{}_xi{}_zeta{}_n{}", s.family.number(), s.xi, s.zeta, s.n()),
        };
        format!("{stem}_{}.csv", self.method())
    }
}

fn bench_cells(args: &BenchArgs) -> Result<Vec<Cell>, CliError> {
    let mut base = Vec::new();
    if let Some(k) = args.example {
        let fam = family(k)?;
        for &m in &args.block_dims {
            let spec = ExampleSpec::new(fam, m, args.xi, args.zeta).map_err(input_err)?;
            base.push((None, spec, None));
        }
    } else {
        for t in REFERENCE_TABLES.iter() {
            if !args.tables.is_empty() && !args.tables.contains(&t.id) {
                continue;
            }
            for (spec, &iters) in t.specs().zip(&t.iterations) {
                if args.only_m.is_empty() || args.only_m.contains(&spec.block_dim) {
                    base.push((Some(t.id), spec, Some(iters)));
                }
            }
        }
    }
    let mut cells = Vec::new();
    for (table, spec, reference) in base {
        let modes: &[bool] = if args.compare_monotone { &[false, true] } else { &[false] };
        for &monotone in modes {
            cells.push(Cell {
                table,
                spec,
                reference,
                monotone,
            });
        }
    }
    Ok(cells)
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

pub fn bench(args: &BenchArgs) -> Result<u8, CliError> {
    let base_cfg = args.solver.config();
    base_cfg.validate().map_err(input_err)?;
    if let Some(dir) = &args.trace {
        std::fs::create_dir_all(dir)?;
    }
    let cells = bench_cells(args)?;
    let repeats = args.repeats.max(1);
    let results = parallel::map(&cells, args.jobs, |cell| -> Result<(SolveReport, Duration), CliError> {
        let cfg = SolverConfig {
            monotone: base_cfg.monotone || cell.monotone,
            ..base_cfg.clone()
        };
        let p = problems::example_gave(&cell.spec).map_err(input_err)?;
        let first = run_solver(&p, &cfg, 2.0)?;
        let mut times = vec![first.wall_time];
        for _ in 1..repeats {
            times.push(run_solver(&p, &cfg, 2.0)?.wall_time);
        }
        Ok((first, median(times)))
    });

    let mut table = Table::new(vec![
        "table", "family", "xi", "zeta", "method", "n", "iter", "ref_iter", "cpu_s", "res", "status",
    ]);
    let mut codes = Vec::new();
    let mut problems_found = Vec::new();
    for (cell, result) in cells.iter().zip(results) {
        let (report, cpu) = result?;
        codes.push(status_code(&report.status));
        if let Some(dir) = &args.trace {
            let path = dir.join(cell.file_name());
            write_trace(&path, &report)?;
            if args.check {
                if let Err(e) = check_trace_file(&path) {
                    problems_found.push(e.to_string());
                    codes.push(exit::INVARIANT);
                }
            }
        } else if args.check {
            if let Err(e) = nsna::check_trace(&report.trace) {
                problems_found.push(format!("{}: {e}", cell.file_name()));
                codes.push(exit::INVARIANT);
            }
        }
        let s = &cell.spec;
        table.push(vec![
            cell.table.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
            s.family.number().to_string(),
            s.xi.to_string(),
            s.zeta.to_string(),
            cell.method().into(),
            s.n().to_string(),
            report.iterations.to_string(),
            cell.reference.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
            secs(cpu),
            format!("{:.3e}", report.res),
            report.status.label().into(),
        ]);
    }
    print!("{}", table.render(args.format));
    for p in &problems_found {
        eprintln!("trace check failed: {p}");
    }
    Ok(worst(codes))
}

pub fn solve(args: &SolveArgs) -> Result<u8, CliError> {
    let p = load_problem(&args.problem)?;
    let cfg = args.solver.config();
    let report = run_solver(&p, &cfg, args.x0)?;
    println!("status: {}", report.status.label());
    println!("n: {}", p.n());
    println!("iterations: {}", report.iterations);
    println!("res: {:e}", report.res);
    println!("gamma: {:e}", report.gamma);
    println!("time_s: {}", secs(report.wall_time));
    if let SolveStatus::InvariantViolation { kind, record } = &report.status {
        eprintln!("invariant violated ({kind:?}) at iteration {}", record.k);
    }
    if args.print_solution {
        for v in report.iterate.x.iter() {
            println!("{v:?}");
        }
    }
    if let Some(path) = &args.trace {
        write_trace(path, &report)?;
        if args.check {
            check_trace_file(path)?;
            println!("trace check: ok");
        }
    }
    Ok(status_code(&report.status))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn pattern(p: &[i8]) -> String {
    p.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// One verdict line: check name, `yes` / `no` / `skipped`, and details.
struct Check {
    name: &'static str,
    verdict: String,
    detail: String,
}

pub fn verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let p = load_problem(&args.problem)?;
    let n = p.n();
    let mut checks = Vec::new();
    let mut push = |name, verdict: &str, detail: String| {
        checks.push(Check {
            name,
            verdict: verdict.to_string(),
            detail,
        })
    };
    if n <= verify::MAX_W_SWEEP_DIM {
        let w = verify::gave_w_property(&p).map_err(input_err)?;
        let detail = match (w.sign, &w.witness) {
            (Some(s), _) if w.holds => format!("all {} representatives have sign {s:+}", w.n_representatives),
            (_, Some(witness)) => format!("failing representative {}", pattern(witness)),
            _ => String::new(),
        };
        push("W-property", yes_no(w.holds), detail);
    } else {
        push(
            "W-property",
            "skipped",
            format!("exact sweep is limited to n <= {}", verify::MAX_W_SWEEP_DIM),
        );
    }
    let s = verify::bd_nonsingularity_sample(p.a(), p.b_mat(), args.samples, args.sample_seed)
        .map_err(input_err)?;
    let finding = if s.singular_found {
        "singular member found"
    } else if s.sign_change {
        "determinant changes sign"
    } else {
        "no singular member found"
    };
    push(
        "A+BD nonsingular (sampled)",
        yes_no(!s.singular_found && !s.sign_change),
        format!("{finding}; {} samples; worst relative pivot {:.3e}", s.samples, s.worst_margin),
    );
    if n <= gave_core::linalg::MAX_SVD_DIM {
        let sigma = verify::sigma_sufficient_condition(p.a(), p.b_mat()).map_err(input_err)?;
        push(
            "sigma-condition",
            yes_no(sigma.holds),
            format!(
                "sigma_min(A) = {:.6e}; sigma_max(B) = {:.6e}; margin {:.3e}",
                sigma.sigma_min_a, sigma.sigma_max_b, sigma.margin
            ),
        );
    } else {
        push("sigma-condition", "skipped", format!("n > {}", gave_core::linalg::MAX_SVD_DIM));
    }
    if n <= verify::MAX_ORACLE_DIM {
        let o = verify::sign_enumeration_oracle(&p).map_err(input_err)?;
        push(
            "unique solution (oracle)",
            yes_no(o.solutions.len() == 1),
            format!(
                "{} solution(s); {} singular sign pattern(s)",
                o.solutions.len(),
                o.singular_patterns
            ),
        );
    }
    match args.format {
        OutputFormat::Md => {
            println!("n: {n}");
            for c in &checks {
                println!("{}: {} ({})", c.name, c.verdict, c.detail);
            }
        }
        OutputFormat::Csv => {
            let mut t = Table::new(vec!["check", "verdict", "detail"]);
            for c in checks {
                t.push(vec![c.name.into(), c.verdict, c.detail]);
            }
            print!("{}", t.render(OutputFormat::Csv));
        }
    }
    Ok(exit::OK)
}

struct OracleOutcome {
    n: usize,
    index: usize,
    deviation: Option<f64>,
    oracle_solutions: usize,
    status: SolveStatus,
    trace_ok: bool,
}

impl OracleOutcome {
    fn mismatch(&self, threshold: f64) -> bool {
        self.oracle_solutions != 1
            || !self.status.is_converged()
            || self.deviation.is_none_or(|d| !(d <= threshold))
    }
}

pub fn oracle_compare(args: &OracleArgs) -> Result<u8, CliError> {
    if args.n_min == 0 || args.n_min > args.n_max || args.n_max > 12 {
        return Err(CliError::Input(format!(
            "sizes must satisfy 1 <= n-min <= n-max <= 12, got {}..={}",
            args.n_min, args.n_max
        )));
    }
    let cfg = args.solver.config();
    cfg.validate().map_err(input_err)?;
    let span = args.n_max - args.n_min + 1;
    let indices: Vec<usize> = (0..args.count).collect();
    let outcomes = parallel::map(&indices, args.jobs, |&i| -> Result<OracleOutcome, CliError> {
        let n = args.n_min + i % span;
        let p = problems::random_solvable_gave_stream(n, args.seed, i as u64).map_err(input_err)?;
        let report = run_solver(&p, &cfg, 2.0)?;
        let oracle = verify::sign_enumeration_oracle(&p).map_err(input_err)?;
        let deviation = (oracle.solutions.len() == 1).then(|| {
            let exact = &oracle.solutions[0];
            report.iterate.x.sub(exact).norm() / exact.norm().max(1e-12)
        });
        Ok(OracleOutcome {
            n,
            index: i,
            deviation,
            oracle_solutions: oracle.solutions.len(),
            trace_ok: nsna::check_trace(&report.trace).is_ok(),
            status: report.status,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(vec!["n", "instances", "max_rel_deviation", "mismatches"]);
    let fmt_dev = |d: Option<f64>| d.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into());
    for n in args.n_min..=args.n_max {
        let group: Vec<&OracleOutcome> = outcomes.iter().filter(|o| o.n == n).collect();
        if group.is_empty() {
            continue;
        }
        let max_dev = group.iter().filter_map(|o| o.deviation).reduce(f64::max);
        table.push(vec![
            n.to_string(),
            group.len().to_string(),
            fmt_dev(max_dev),
            group.iter().filter(|o| o.mismatch(args.threshold)).count().to_string(),
        ]);
    }
    print!("{}", table.render(args.format));
    let max_dev = outcomes.iter().filter_map(|o| o.deviation).fold(0.0_f64, f64::max);
    let mismatches: Vec<&OracleOutcome> = outcomes.iter().filter(|o| o.mismatch(args.threshold)).collect();
    println!(
        "total: {} instances, max relative deviation {}, {} mismatch(es)",
        outcomes.len(),
        if outcomes.is_empty() { "-".to_string() } else { format!("{max_dev:.3e}") },
        mismatches.len()
    );
    for o in &mismatches {
        println!(
            "mismatch: instance {} (n = {}): status {}, oracle solutions {}, deviation {}",
            o.index,
            o.n,
            o.status.label(),
            o.oracle_solutions,
            fmt_dev(o.deviation)
        );
    }
    if outcomes.iter().any(|o| !o.trace_ok) {
        eprintln!("trace invariants violated in at least one run");
        return Ok(exit::INVARIANT);
    }
    Ok(exit::OK)
}

pub fn generate(args: &GenerateArgs) -> Result<u8, CliError> {
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    if args.hlcp {
        let k = args.problem.example.unwrap_or(1);
        let h = problems::example_hlcp(&example_spec(&args.problem, k)?).map_err(input_err)?;
        format::write_hlcp(&mut out, &h)?;
    } else {
        let p = load_problem(&args.problem)?;
        format::write_gave(&mut out, &p)?;
    }
    Ok(exit::OK)
}
