//! Command-line front end: solve, classify, sweep, profile.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ldg_core::analysis::{analyze, AnalysisOptions};
use ldg_core::grid::Grid;
use ldg_core::io;
use ldg_core::profile::shoot_profile;
use ldg_core::solver::{solve, ConstraintMode, Family, SeedKind, SolveLog, SolverConfig};
use ldg_core::tensor::Params;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "ldg",
    about = "Axially symmetric droplet states: obstacle-constrained minimization and disclination analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the constrained energy and write the field
    Solve(SolveArgs),
    /// Analyze a field file and emit the structure report
    Classify(ClassifyArgs),
    /// Continuation along an increasing temperature schedule
    Sweep(SweepArgs),
    /// Tabulate the radial core profile
    Profile(ProfileArgs),
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Obstacle family: plus or minus
    #[arg(long)]
    family: Option<String>,
    /// Reduced temperature parameter
    #[arg(long)]
    a: Option<f64>,
    /// Coupling mu = a R^2
    #[arg(long)]
    mu: Option<f64>,
    /// Obstacle level: b in (-1, -1/2] for plus, c in (0, 1) for minus
    #[arg(long, allow_hyphen_values = true)]
    level: Option<f64>,
    /// Grid resolution (cells per unit radius)
    #[arg(long)]
    n: Option<usize>,
    /// Seed: hedgehog | ring | split | file:<path>
    #[arg(long)]
    seed: Option<String>,
    /// Constraint mode: projection | penalty:<eps>
    #[arg(long)]
    mode: Option<String>,
    /// Output field path
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Input field file
    #[arg(long = "in")]
    input: PathBuf,
    /// Force ring detection (always on; kept for interface stability)
    #[arg(long)]
    ring: bool,
    /// Report axis cores and the segment summary
    #[arg(long)]
    cores: bool,
    /// Winding circle: rho z r
    #[arg(long, num_args = 3, value_names = ["RHO", "Z", "R"], allow_hyphen_values = true)]
    winding: Option<Vec<f64>>,
    /// Report output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    family: String,
    /// Fixed coupling mu along the sweep
    #[arg(long)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    level: f64,
    /// Comma-separated increasing temperatures, e.g. 10,20,40,80
    #[arg(long)]
    schedule: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Output directory for per-stage fields and the summary table
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, default_value_t = 30.0)]
    rmax: f64,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Ok(threads) = std::env::var("LDG_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => run(cmd_solve(args)),
        Command::Classify(args) => run(cmd_classify(args)),
        Command::Sweep(args) => run(cmd_sweep(args)),
        Command::Profile(args) => run(cmd_profile(args)),
    };
    std::process::exit(code);
}

fn run(result: Result<i32>) -> i32 {
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn parse_seed(s: &str) -> Result<SeedKind> {
    Ok(match s {
        "hedgehog" => SeedKind::Hedgehog,
        "ring" => SeedKind::RingSeed,
        "split" => SeedKind::SplitSeed,
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                SeedKind::FromFile(PathBuf::from(path))
            } else {
                bail!("unknown seed '{other}', expected hedgehog|ring|split|file:<path>");
            }
        }
    })
}

fn parse_mode(s: &str) -> Result<ConstraintMode> {
    Ok(match s {
        "projection" => ConstraintMode::Projection,
        other => {
            if let Some(eps) = other.strip_prefix("penalty:") {
                let eps: f64 = eps.parse().context("penalty epsilon")?;
                if eps <= 0.0 {
                    bail!("penalty epsilon must be positive, got {eps}");
                }
                ConstraintMode::Penalty(eps)
            } else {
                bail!("unknown mode '{other}', expected projection|penalty:<eps>");
            }
        }
    })
}

fn parse_family(name: &str, level: f64) -> Result<Family> {
    let family = match name {
        "plus" => Family::Plus(level),
        "minus" => Family::Minus(level),
        other => bail!("unknown family '{other}', expected plus|minus"),
    };
    family.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(family)
}

fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut map = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {} is not key = value: '{line}'", k + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flags override config-file entries with the same key.
fn merge_solve_args(mut args: SolveArgs) -> Result<SolveArgs> {
    if let Some(path) = args.config.clone() {
        let map = read_config_file(&path)?;
        let get = |key: &str| map.get(key).cloned();
        if args.family.is_none() {
            args.family = get("family");
        }
        if args.a.is_none() {
            args.a = get("a").map(|v| v.parse()).transpose().context("config a")?;
        }
        if args.mu.is_none() {
            args.mu = get("mu").map(|v| v.parse()).transpose().context("config mu")?;
        }
        if args.level.is_none() {
            args.level = get("level").map(|v| v.parse()).transpose().context("config level")?;
        }
        if args.n.is_none() {
            args.n = get("n").map(|v| v.parse()).transpose().context("config n")?;
        }
        if args.seed.is_none() {
            args.seed = get("seed");
        }
        if args.mode.is_none() {
            args.mode = get("mode");
        }
        if args.out.is_none() {
            args.out = get("out").map(PathBuf::from);
        }
        if args.max_iters.is_none() {
            args.max_iters =
                get("max_iters").map(|v| v.parse()).transpose().context("config max_iters")?;
        }
        if args.grad_tol.is_none() {
            args.grad_tol =
                get("grad_tol").map(|v| v.parse()).transpose().context("config grad_tol")?;
        }
    }
    Ok(args)
}

fn write_manifest(
    path: &Path,
    command: &str,
    entries: &[(&str, String)],
    outputs: &[&Path],
) -> Result<()> {
    let mut text = String::new();
    writeln!(text, "command = {command}")?;
    writeln!(text, "field_format = ldg-field {}", io::FORMAT_VERSION)?;
    for (key, value) in entries {
        writeln!(text, "{key} = {value}")?;
    }
    for out in outputs {
        writeln!(text, "output = {}", out.display())?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_log(path: &Path, log: &SolveLog) -> Result<()> {
    let mut text = String::with_capacity(log.rows.len() * 90 + 64);
    writeln!(text, "# iter total dirichlet axis bulk grad_norm")?;
    for row in &log.rows {
        writeln!(text, "{}", row.format())?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let start = Instant::now();
    let args = merge_solve_args(args)?;
    let family_name = args.family.ok_or_else(|| anyhow!("--family is required"))?;
    let a = args.a.ok_or_else(|| anyhow!("--a is required"))?;
    let mu = args.mu.ok_or_else(|| anyhow!("--mu is required"))?;
    let level = args.level.ok_or_else(|| anyhow!("--level is required"))?;
    let n = args.n.ok_or_else(|| anyhow!("--n is required"))?;
    let out = args.out.ok_or_else(|| anyhow!("--out is required"))?;

    let family = parse_family(&family_name, level)?;
    let params = Params::new(a, mu, family.obstacle()).map_err(|e| anyhow!("{e}"))?;
    let grid = Grid::build(n).map_err(|e| anyhow!("{e}"))?;

    let mut config = SolverConfig::new(family);
    config.seed = parse_seed(args.seed.as_deref().unwrap_or("hedgehog"))?;
    config.constraint_mode = parse_mode(args.mode.as_deref().unwrap_or("projection"))?;
    if let Some(iters) = args.max_iters {
        config.max_iters = iters;
    }
    if let Some(tol) = args.grad_tol {
        config.grad_tol = tol;
    }

    let (field, log) = solve(&config, &grid, &params).map_err(|e| anyhow!("{e}"))?;
    io::write_field(&out, &field, &grid, a, mu).map_err(|e| anyhow!("{e}"))?;
    let log_path = out.with_extension("log");
    write_log(&log_path, &log)?;
    let manifest_path = out.with_extension("manifest");
    write_manifest(
        &manifest_path,
        "solve",
        &[
            ("family", family_name.clone()),
            ("a", format!("{a}")),
            ("mu", format!("{mu}")),
            ("level", format!("{level}")),
            ("n", format!("{n}")),
            ("seed", args.seed.unwrap_or_else(|| "hedgehog".into())),
            ("mode", args.mode.unwrap_or_else(|| "projection".into())),
            ("iterations", format!("{}", log.iterations)),
            ("converged", format!("{}", log.converged)),
            ("final_total", format!("{:.12e}", log.final_energy.total)),
            ("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64())),
        ],
        &[&out, &log_path],
    )?;
    println!(
        "{} after {} iterations, total energy {:.8e}",
        if log.converged { "converged" } else { "hit iteration budget" },
        log.iterations,
        log.final_energy.total
    );
    Ok(if log.converged { 0 } else { 2 })
}

fn cmd_classify(args: ClassifyArgs) -> Result<i32> {
    let (header, grid, field) = io::read_field(&args.input).map_err(|e| anyhow!("{e}"))?;
    // the field file does not carry the obstacle level; analysis only
    // needs a, mu and the derived amplitude
    let params = Params::new(header.a, header.mu, ldg_core::tensor::Obstacle::PlusFamily(-0.95))
        .map_err(|e| anyhow!("{e}"))?;
    // ring detection is cheap and always reported; --ring and --cores
    // select the extra sections
    let mut opts = AnalysisOptions::standard(&params);
    opts.detect_ring = true;
    if let Some(w) = &args.winding {
        opts.winding = Some((w[0], w[1], w[2], 256));
    }
    let report = analyze(&field, &grid, &params, &opts).map_err(|e| anyhow!("{e}"))?;
    let mut text = report.to_text(&grid);
    if args.cores {
        let mut extra = String::new();
        writeln!(extra, "\n[cores]")?;
        for (k, z) in report.axis_zeros.iter().enumerate() {
            writeln!(extra, "core_{} = {:.10e}", k + 1, z)?;
        }
        text.push_str(&extra);
    }
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let start = Instant::now();
    let family = parse_family(&args.family, args.level)?;
    let schedule: Vec<f64> = args
        .schedule
        .split(',')
        .map(|s| s.trim().parse::<f64>().context("schedule entry"))
        .collect::<Result<_>>()?;
    if schedule.len() < 2 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        bail!("schedule must be strictly increasing with at least 2 entries");
    }
    let grid = Grid::build(args.n).map_err(|e| anyhow!("{e}"))?;
    let mut config = SolverConfig::new(family);
    config.seed = parse_seed(args.seed.as_deref().unwrap_or("hedgehog"))?;
    if let Some(iters) = args.max_iters {
        config.max_iters = iters;
    }
    if let Some(tol) = args.grad_tol {
        config.grad_tol = tol;
    }
    std::fs::create_dir_all(&args.out_dir)?;

    // stages run one at a time and every artifact is flushed before
    // the next stage starts, so an interrupted sweep keeps its prefix
    let mut summary = String::from("# a total potential_integral zeros parity ring_rho\n");
    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut warm: Option<ldg_core::grid::OrderField> = None;
    let mut all_converged = true;
    for &a in &schedule {
        let params = Params::new(a, args.mu, family.obstacle()).map_err(|e| anyhow!("{e}"))?;
        if let Some(field) = warm.take() {
            config.seed = SeedKind::FromField(field);
        }
        let (field, log) =
            solve(&config, &grid, &params).with_context(|| format!("stage a = {a}"))?;
        all_converged &= log.converged;
        let path = args.out_dir.join(format!("stage_a{a}.field"));
        io::write_field(&path, &field, &grid, a, args.mu).map_err(|e| anyhow!("{e}"))?;
        let log_path = path.with_extension("log");
        write_log(&log_path, &log)?;
        let stage_manifest = path.with_extension("manifest");
        write_manifest(
            &stage_manifest,
            "sweep-stage",
            &[
                ("a", format!("{a}")),
                ("mu", format!("{}", args.mu)),
                ("converged", format!("{}", log.converged)),
            ],
            &[&path, &log_path],
        )?;
        let mut dens = vec![0.0; grid.node_count()];
        for (i, j) in grid.mask_nodes() {
            let dev = field.at(&grid, i, j).norm_sq() - 1.0;
            dens[grid.idx(i, j)] = a * dev * dev;
        }
        let potential = ldg_core::grid::integrate(&dens, &grid).map_err(|e| anyhow!("{e}"))?;
        let report = analyze(&field, &grid, &params, &AnalysisOptions::standard(&params))
            .map_err(|e| anyhow!("{e}"))?;
        writeln!(
            summary,
            "{} {:.12e} {:.12e} {} {} {}",
            a,
            log.final_energy.total,
            potential,
            report.axis_zeros.len(),
            if report.parity_even { "even" } else { "odd" },
            report.ring.map(|r| format!("{:.8e}", r.rho)).unwrap_or_else(|| "-".into()),
        )?;
        std::fs::write(args.out_dir.join("summary.txt"), &summary)?;
        outputs.push(path);
        warm = Some(field);
    }
    let manifest_path = args.out_dir.join("sweep.manifest");
    let output_refs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
    write_manifest(
        &manifest_path,
        "sweep",
        &[
            ("family", args.family.clone()),
            ("mu", format!("{}", args.mu)),
            ("schedule", args.schedule.clone()),
            ("n", format!("{}", args.n)),
            ("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64())),
        ],
        &output_refs,
    )?;
    print!("{summary}");
    Ok(if all_converged { 0 } else { 2 })
}

fn cmd_profile(args: ProfileArgs) -> Result<i32> {
    let profile = shoot_profile(args.rmax, args.rtol).map_err(|e| anyhow!("{e}"))?;
    let mut text = String::with_capacity(profile.samples.len() * 60 + 64);
    writeln!(text, "# r f fprime  (alpha = {:.12e})", profile.alpha)?;
    for (r, f, fp) in &profile.samples {
        writeln!(text, "{r:.6e} {f:.12e} {fp:.12e}")?;
    }
    std::fs::write(&args.out, text)?;
    println!("alpha = {:.12}", profile.alpha);
    Ok(0)
}
