mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poisson_heat::acceptance::{run_acceptance, Target};
use poisson_heat::asymptotics::{
    closed_constant, decomposition, decomposition_sweep, default_t_grid, heat_content, third_term,
};
use poisson_heat::kernel::KernelConstants;
use poisson_heat::shapes::{covariance, directional_variation};
use poisson_heat::{mc_covariance, mc_heat_content, Error, QuadSpec, ShapeSpec};
use serde_json::{json, Value};

use output::{Cell, Format, Table};

#[derive(Parser, Debug)]
#[command(
    name = "poisson-heat",
    version,
    about = "Heat content of bounded sets under the Poisson kernel"
)]
struct Cli {
    /// Absolute and relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for Monte Carlo estimates.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NamedShape {
    Ball2,
    Ball3,
    Square,
    /// The unit interval (0, 1).
    Interval,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ShapeArgs {
    #[arg(long, value_enum)]
    shape: Option<NamedShape>,
    /// JSON shape description.
    #[arg(long)]
    shape_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel constants, geometry and the third-order constant of a shape.
    Constants {
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Set covariance g(y), optionally with a Monte Carlo estimate.
    Covariance {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Comma-separated point, e.g. 0.5,0.25.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        y: Vec<f64>,
        #[arg(long)]
        mc_samples: Option<u64>,
    },
    /// Heat content H(t), optionally with a Monte Carlo estimate.
    HeatContent {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        mc_samples: Option<u64>,
    },
    /// All terms of the small-time decomposition at one t.
    Expansion {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        t: f64,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        #[arg(value_enum, default_value_t = VerifyTarget::All)]
        target: VerifyTarget,
    },
    /// Decomposition rows over a geometric grid of t.
    Sweep {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 13)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerifyTarget {
    Ball2,
    Ball3,
    Square,
    Interval,
    All,
}

impl From<VerifyTarget> for Target {
    fn from(t: VerifyTarget) -> Target {
        match t {
            VerifyTarget::Ball2 => Target::Ball2,
            VerifyTarget::Ball3 => Target::Ball3,
            VerifyTarget::Square => Target::Square,
            VerifyTarget::Interval => Target::Interval,
            VerifyTarget::All => Target::All,
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

type CliResult = Result<(), Failure>;

fn load_shape(args: &ShapeArgs) -> Result<ShapeSpec, Failure> {
    if let Some(path) = &args.shape_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        return Ok(ShapeSpec::from_json(&text)?);
    }
    Ok(match args.shape.expect("clap enforces one shape source") {
        NamedShape::Ball2 => ShapeSpec::unit_ball(2)?,
        NamedShape::Ball3 => ShapeSpec::unit_ball(3)?,
        NamedShape::Square => ShapeSpec::square(),
        NamedShape::Interval => ShapeSpec::interval(0.0, 1.0)?,
    })
}

fn meta(cli: &Cli, command: &str, shape: Option<&ShapeSpec>, extra: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "shape": shape,
        "tol": cli.tol,
        "seed": cli.seed,
        "config": extra,
    })
}

/// t_min·(t_max/t_min)^{i/(count-1)}, largest first.
fn geometric_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    let ratio = (t_max / t_min).ln();
    (0..count)
        .rev()
        .map(|i| {
            if i == 0 {
                t_min
            } else if i == count - 1 {
                t_max
            } else {
                t_min * (ratio * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

fn cmd_constants(cli: &Cli, args: &ShapeArgs, quad: &QuadSpec) -> CliResult {
    let shape = load_shape(args)?;
    let geo = shape.geometry();
    let k = KernelConstants::new(geo.dim, 1e-13)?;
    let rep = third_term(&shape, quad, &default_t_grid())?;
    let mut table = Table::new(vec!["quantity", "value"]);
    let rows: Vec<(&str, Cell)> = vec![
        ("dim", Cell::Int(geo.dim.get() as u64)),
        ("kappa", k.kappa.into()),
        ("ball_volume", k.ball_volume.into()),
        ("sphere_area", k.sphere_area.into()),
        ("J", k.tanh_deficit.into()),
        ("volume", geo.volume.into()),
        ("perimeter", geo.perimeter.into()),
        ("support_radius", geo.support_radius.into()),
        ("gamma_integral", rep.pieces.gamma_integral.into()),
        ("F_limit", rep.pieces.f_limit.into()),
        ("phi_slope", rep.pieces.phi_slope.into()),
        ("C_formula", rep.c_formula.into()),
        (
            "C_closed",
            closed_constant(&shape).map_or(Cell::Empty, Cell::Num),
        ),
        ("C_extrapolated", rep.c_extrapolated.into()),
        ("extrapolation_err", rep.extrapolation_err.into()),
        ("observed_order", rep.fit.observed_order.into()),
    ];
    for (name, value) in rows {
        table.push(vec![name.into(), value]);
    }
    let grid: Vec<f64> = default_t_grid();
    table.emit(
        cli.format,
        meta(cli, "constants", Some(&shape), json!({ "t_grid": grid })),
        cli.out.as_deref(),
    )?;
    Ok(())
}

fn cmd_covariance(
    cli: &Cli,
    args: &ShapeArgs,
    y: &[f64],
    mc_samples: Option<u64>,
) -> CliResult {
    let shape = load_shape(args)?;
    let g = covariance(&shape, y)?;
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let v_u = if r > 0.0 {
        let u: Vec<f64> = y.iter().map(|v| v / r).collect();
        Cell::Num(directional_variation(&shape, &u)?)
    } else {
        Cell::Empty
    };
    let mut table = Table::new(vec!["y", "g", "V_u", "mc_mean", "mc_stderr"]);
    let point = y.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ");
    let (mean, stderr) = match mc_samples {
        Some(n) => {
            let e = mc_covariance(&shape, y, n, cli.seed)?;
            (Cell::Num(e.mean), Cell::Num(e.stderr))
        }
        None => (Cell::Empty, Cell::Empty),
    };
    table.push(vec![point.into(), g.into(), v_u, mean, stderr]);
    table.emit(
        cli.format,
        meta(cli, "covariance", Some(&shape), json!({ "y": y, "mc_samples": mc_samples })),
        cli.out.as_deref(),
    )?;
    Ok(())
}

fn cmd_heat_content(
    cli: &Cli,
    args: &ShapeArgs,
    t: f64,
    mc_samples: Option<u64>,
    quad: &QuadSpec,
) -> CliResult {
    let shape = load_shape(args)?;
    let h = heat_content(&shape, t, quad)?;
    let (mean, stderr) = match mc_samples {
        Some(n) => {
            let e = mc_heat_content(&shape, t, n, cli.seed)?;
            (Cell::Num(e.mean), Cell::Num(e.stderr))
        }
        None => (Cell::Empty, Cell::Empty),
    };
    let mut table = Table::new(vec!["t", "H", "mc_mean", "mc_stderr"]);
    table.push(vec![t.into(), h.into(), mean, stderr]);
    table.emit(
        cli.format,
        meta(cli, "heat-content", Some(&shape), json!({ "t": t, "mc_samples": mc_samples })),
        cli.out.as_deref(),
    )?;
    Ok(())
}

const SWEEP_COLUMNS: [&str; 9] = ["t", "H", "phi", "psi", "F", "R", "residual", "D", "status"];

fn cmd_expansion(cli: &Cli, args: &ShapeArgs, t: f64, quad: &QuadSpec) -> CliResult {
    let shape = load_shape(args)?;
    let b = decomposition(&shape, t, quad)?;
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    table.push(vec![
        b.t.into(),
        b.h.into(),
        b.phi.into(),
        b.psi.into(),
        b.f.into(),
        b.r.into(),
        b.residual.into(),
        b.d.into(),
        "ok".into(),
    ]);
    table.emit(
        cli.format,
        meta(cli, "expansion", Some(&shape), json!({ "t": t })),
        cli.out.as_deref(),
    )?;
    Ok(())
}

fn cmd_sweep(
    cli: &Cli,
    args: &ShapeArgs,
    t_min: f64,
    t_max: f64,
    count: usize,
    quad: &QuadSpec,
) -> CliResult {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Failure::Usage(format!(
            "need 0 < t-min < t-max, got {t_min} and {t_max}"
        )));
    }
    if count < 2 {
        return Err(Failure::Usage(format!("count must be at least 2, got {count}")));
    }
    let shape = load_shape(args)?;
    let ts = geometric_grid(t_min, t_max, count);
    let rows = decomposition_sweep(&shape, &ts, quad)?;
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    let mut failed = 0;
    for (t, row) in ts.iter().zip(rows) {
        match row {
            Ok(b) => table.push(vec![
                b.t.into(),
                b.h.into(),
                b.phi.into(),
                b.psi.into(),
                b.f.into(),
                b.r.into(),
                b.residual.into(),
                b.d.into(),
                "ok".into(),
            ]),
            Err(e) => {
                failed += 1;
                let mut cells = vec![Cell::Num(*t)];
                cells.extend((0..7).map(|_| Cell::Empty));
                cells.push(format!("error: {e}").into());
                table.push(cells);
            }
        }
    }
    table.emit(
        cli.format,
        meta(
            cli,
            "sweep",
            Some(&shape),
            json!({ "t_min": t_min, "t_max": t_max, "count": count }),
        ),
        cli.out.as_deref(),
    )?;
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} of {count} rows failed")));
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, target: VerifyTarget, quad: &QuadSpec) -> CliResult {
    let results = run_acceptance(target.into(), quad);
    for r in &results {
        println!("{r}");
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(path) = &cli.out {
        let report = json!({
            "meta": meta(cli, "verify", None, json!({ "target": format!("{target:?}").to_lowercase() })),
            "criteria": results,
        });
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, text + "\n")?;
    }
    if passed == results.len() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: &Cli) -> CliResult {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    let quad = QuadSpec::with_tol(cli.tol);
    match &cli.command {
        Command::Constants { shape } => cmd_constants(cli, shape, &quad),
        Command::Covariance { shape, y, mc_samples } => cmd_covariance(cli, shape, y, *mc_samples),
        Command::HeatContent { shape, t, mc_samples } => {
            cmd_heat_content(cli, shape, *t, *mc_samples, &quad)
        }
        Command::Expansion { shape, t } => cmd_expansion(cli, shape, *t, &quad),
        Command::Verify { target } => cmd_verify(cli, *target, &quad),
        Command::Sweep {
            shape,
            t_min,
            t_max,
            count,
        } => cmd_sweep(cli, shape, *t_min, *t_max, *count, &quad),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric_and_hits_endpoints() {
        let g = geometric_grid(2f64.powi(-16), 2f64.powi(-4), 13);
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 0.0625);
        assert_eq!(g[12], 2f64.powi(-16));
        for (k, t) in g.iter().enumerate() {
            assert!((t / 2f64.powi(-4 - k as i32) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
