//! `unsemi`: compile semialgebraic formulas into polynomial lifts, check
//! the projections numerically, bridge components and plot the results.

mod config;
mod output;
mod plot;

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use unsemi_core::formula::{parse, ParseError};
use unsemi_core::gadget::reduce_components;
use unsemi_core::lift::compile_formula;
use unsemi_core::rational::to_short_string;
use unsemi_core::verify::{
    check_projection, classify_solution, estimate_components, grid, sample_formula, sample_variety, ComponentEstimate,
    Pass,
};
use unsemi_core::{Formula, Lift, VerifyConfig, VerifyReport, WitnessPair};

use config::ConfigArgs;
use output::{read_text, write_with_manifest, RunManifest};
use plot::PlotData;

#[derive(Debug, Parser)]
#[command(name = "unsemi", version, about = "Compile semialgebraic sets into polynomial lifts and check them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a formula file into a lift file
    Compile {
        formula: PathBuf,
        /// Output path; defaults to the formula path with a `.lift` extension
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Check that a lift projects exactly onto a formula's set
    Verify {
        formula: PathBuf,
        lift: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write the JSON report here
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Join lift components above shared base points with circle bridges
    Bridge {
        lift: PathBuf,
        /// JSON array of `{"x": [..], "y1": [..], "y2": [..]}`; may be empty
        pairs: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Draw grid membership and projected solver points (SVG plus CSV)
    Plot {
        #[arg(required_unless_present = "lift")]
        formula: Option<PathBuf>,
        /// Overlay solver points on this lift's zero set
        #[arg(long)]
        lift: Option<PathBuf>,
        /// Write only the comma-separated table; works in any dimension
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// List grid points of a formula's set, or solver points on a lift
    Sample {
        #[arg(required_unless_present = "lift", conflicts_with = "lift")]
        formula: Option<PathBuf>,
        #[arg(long)]
        lift: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write the CSV here instead of standard output
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

/// Misuse that is the caller's to fix; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<ParseError>() || e.is::<UsageError>()) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Compile { formula, output } => compile(&formula, output),
        Command::Verify { formula, lift, cfg, output } => verify(&formula, &lift, &settings(&cfg)?, output.as_deref()),
        Command::Bridge { lift, pairs, cfg, output } => bridge(&lift, &pairs, &settings(&cfg)?, &output),
        Command::Plot { formula, lift, table, cfg, output } => {
            plot(formula.as_deref(), lift.as_deref(), table, &settings(&cfg)?, &output)
        }
        Command::Sample { formula, lift, cfg, output } => {
            sample(formula.as_deref(), lift.as_deref(), &settings(&cfg)?, output.as_deref())
        }
    }
}

fn settings(args: &ConfigArgs) -> Result<VerifyConfig> {
    args.resolve().map_err(|e| UsageError(format!("{e:#}")).into())
}

fn read_formula(path: &Path) -> Result<Formula> {
    let text = read_text(path)?;
    parse(&text).with_context(|| path.display().to_string())
}

fn read_lift(path: &Path) -> Result<Lift> {
    let text = read_text(path)?;
    Lift::from_json(&text).with_context(|| format!("loading lift {}", path.display()))
}

fn compile(formula: &Path, output: Option<PathBuf>) -> Result<u8> {
    let f = read_formula(formula)?;
    let lift = compile_formula(&f)?;
    let out = output.unwrap_or_else(|| formula.with_extension("lift"));
    println!("base_dim: {}", lift.base_dim());
    println!("aux_dim: {}", lift.aux_dim());
    println!("degree: {}", lift.degree());
    println!("terms: {}", lift.poly().num_terms());
    write_with_manifest(&out, lift.to_json().as_bytes(), &RunManifest::new("compile", &[formula], None))?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn summary(report: &VerifyReport) -> String {
    let c = &report.counts;
    let mut s = String::new();
    writeln!(s, "grid: {} points, {} in the set", report.grid_points, report.in_set_grid_points).unwrap();
    writeln!(s, "solver: {} of {} starts accepted", report.solver_accepted, report.solver_starts).unwrap();
    writeln!(s, "completeness: {} witnessed, {} failed", c.in_set_witnessed, c.in_set_witness_failed).unwrap();
    writeln!(
        s,
        "soundness: {} hits, {} misses, {} boundary skipped ({:.2}% of examined)",
        c.sound_hits,
        c.sound_misses,
        c.boundary_skipped,
        100.0 * report.boundary_fraction()
    )
    .unwrap();
    writeln!(s, "components: {} (estimate; {})", report.component_estimate, report.component_note).unwrap();
    for w in &report.warnings {
        writeln!(s, "warning: {w}").unwrap();
    }
    for f in &report.failures {
        let pass = match f.pass {
            Pass::Completeness => "completeness",
            Pass::Soundness => "soundness",
        };
        let names: Vec<String> = f.point.iter().enumerate().map(|(i, v)| format!("x{}={v}", i + 1)).collect();
        writeln!(s, "FAIL {pass} at {}: {}", names.join(", "), f.detail).unwrap();
    }
    if report.failures_omitted > 0 {
        writeln!(s, "... {} more failures omitted", report.failures_omitted).unwrap();
    }
    let status = match report.exit_status() {
        0 => "pass",
        1 => "fail",
        _ => "warnings",
    };
    writeln!(s, "status: {status}").unwrap();
    s
}

fn verify(formula: &Path, lift: &Path, cfg: &VerifyConfig, output: Option<&Path>) -> Result<u8> {
    let f = read_formula(formula)?;
    let l = read_lift(lift)?;
    let report = check_projection(&f, &l, cfg)?;
    print!("{}", summary(&report));
    if let Some(out) = output {
        write_with_manifest(
            out,
            report.to_json().as_bytes(),
            &RunManifest::new("verify", &[formula, lift], Some(cfg)),
        )?;
    }
    Ok(report.exit_status() as u8)
}

fn read_pairs(path: &Path) -> Result<Vec<WitnessPair>> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    serde_json::from_str(&text).with_context(|| format!("parsing witness pairs {}", path.display()))
}

fn describe(e: &ComponentEstimate) -> String {
    if e.no_points {
        "0 (no solver points)".into()
    } else {
        e.count.to_string()
    }
}

fn bridge(lift: &Path, pairs_file: &Path, cfg: &VerifyConfig, output: &Path) -> Result<u8> {
    let text = read_text(lift)?;
    let l = Lift::from_json(&text).with_context(|| format!("loading lift {}", lift.display()))?;
    let pairs = read_pairs(pairs_file)?;
    let bridged = reduce_components(&l, &pairs, cfg.delta_variety)?;
    // With nothing to bridge the input is passed through untouched.
    let bytes = if pairs.is_empty() { text.into_bytes() } else { bridged.to_json().into_bytes() };
    let before = estimate_components(&l, cfg)?;
    let after = estimate_components(&bridged, cfg)?;
    println!("pairs: {}", pairs.len());
    println!("aux_dim: {} → {}", l.aux_dim(), bridged.aux_dim());
    println!("components: {} → {}", describe(&before), describe(&after));
    write_with_manifest(output, &bytes, &RunManifest::new("bridge", &[lift, pairs_file], Some(cfg)))?;
    println!("wrote {}", output.display());
    Ok(0)
}

fn plot(formula: Option<&Path>, lift: Option<&Path>, table: bool, cfg: &VerifyConfig, output: &Path) -> Result<u8> {
    let l = lift.map(read_lift).transpose()?;
    let f = match (formula, &l) {
        (Some(p), _) => read_formula(p)?,
        (None, Some(l)) => l.source().to_formula(),
        (None, None) => return Err(UsageError("plot needs a formula or --lift".into()).into()),
    };
    let m = f.base_dim();
    if let Some(l) = &l {
        if l.base_dim() != m {
            anyhow::bail!("formula has base dimension {m}, lift has {}", l.base_dim());
        }
    }
    if !table && !(1..=2).contains(&m) {
        return Err(
            UsageError(format!("cannot draw base dimension {m}; use --table for comma-separated output")).into()
        );
    }
    let bounds = cfg.base_bounds(m)?;
    let grid = grid(&bounds, cfg.grid_res)
        .into_iter()
        .map(|x| {
            let inside = f.contains(&x).expect("dimension checked");
            (x, inside)
        })
        .collect();
    let solver = match &l {
        Some(l) => sample_variety(l, cfg)?
            .accepted
            .into_iter()
            .map(|s| {
                let x = s.point[..m].to_vec();
                let class = classify_solution(&f, &x, cfg);
                (x, class)
            })
            .collect(),
        None => Vec::new(),
    };
    let data = PlotData {
        title: f.to_string(),
        bounds: bounds.iter().map(|i| (i.lo_f64(), i.hi_f64())).collect(),
        grid_res: cfg.grid_res,
        grid,
        solver,
    };
    let inputs: Vec<&Path> = formula.into_iter().chain(lift).collect();
    let manifest = RunManifest::new("plot", &inputs, Some(cfg));
    if table {
        write_with_manifest(output, plot::csv(&data).as_bytes(), &manifest)?;
        println!("wrote {}", output.display());
    } else {
        let table_path = output.with_extension("csv");
        write_with_manifest(output, plot::svg(&data).as_bytes(), &manifest)?;
        write_with_manifest(&table_path, plot::csv(&data).as_bytes(), &manifest)?;
        println!("wrote {} and {}", output.display(), table_path.display());
    }
    Ok(0)
}

fn sample(formula: Option<&Path>, lift: Option<&Path>, cfg: &VerifyConfig, output: Option<&Path>) -> Result<u8> {
    let mut csv = String::new();
    let input = match (formula, lift) {
        (_, Some(path)) => {
            let l = read_lift(path)?;
            let names = l.var_names().join(",");
            writeln!(csv, "{names},residual").unwrap();
            for s in sample_variety(&l, cfg)?.accepted {
                let coords: Vec<String> = s.point.iter().map(|v| v.to_string()).collect();
                writeln!(csv, "{},{:e}", coords.join(","), s.residual).unwrap();
            }
            path
        }
        (Some(path), None) => {
            let f = read_formula(path)?;
            let m = f.base_dim();
            let names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
            writeln!(csv, "{}", names.join(",")).unwrap();
            for x in sample_formula(&f, &cfg.base_bounds(m)?, cfg.grid_res) {
                let coords: Vec<String> = x.iter().map(to_short_string).collect();
                writeln!(csv, "{}", coords.join(",")).unwrap();
            }
            path
        }
        (None, None) => return Err(UsageError("sample needs a formula or --lift".into()).into()),
    };
    match output {
        Some(out) => {
            write_with_manifest(out, csv.as_bytes(), &RunManifest::new("sample", &[input], Some(cfg)))?;
            println!("wrote {}", out.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}
