mod grid;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use callspace::algebra::{bullet, hat, involute, materialize};
use callspace::blackscholes::ybs_detailed;
use callspace::generator::{generator_h, reconstruct, GeneratorHat, Reconstruction};
use callspace::peacock::{gumbel_martingale_sim, verify_peacock, PeacockFamily};
use callspace::surface::{implied_vol_surface, TimeChange};
use callspace::zonoid::lift_zonoid_from_curve;
use callspace::{suites, CallCurve, Error, LogConcaveDensity, Tolerances};

use crate::grid::{parse_grid, parse_points};
use crate::output::{csv, Failure};

#[derive(Parser)]
#[command(name = "callspace", version, about = "Call price curves, their algebra and log-concave surfaces")]
struct Cli {
    /// Worker threads for parallel loops; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DensityArgs {
    /// normal, gumbel, logistic, laplace, exponential or uniform.
    #[arg(long, default_value = "normal")]
    family: String,
    /// Family parameters as a JSON object, e.g. '{"mu":0,"sigma":1}'.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Price C(κ) of a curve file, or C_f(κ, y) of a density.
    Price {
        #[arg(long)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        #[arg(long, conflicts_with = "y")]
        curve: Option<PathBuf>,
        #[command(flatten)]
        density: DensityArgs,
    },
    /// Black–Scholes implied total volatility.
    Implied {
        #[arg(long)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        price: f64,
    },
    /// The product C₁ • C₂ of two curve files.
    Compose {
        left: PathBuf,
        right: PathBuf,
        /// Grid size used when the product has no exact piecewise-linear form.
        #[arg(long, default_value_t = 1025)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The involution C*(κ) = 1 − κ + κC(1/κ).
    Involute {
        curve: PathBuf,
        #[arg(long, default_value_t = 1025)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concave conjugate Ĉ(p) sampled on a p grid.
    Hat {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value = "0:1:101")]
        ps: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price and implied-volatility surface (CSV: kappa,t,price,implied_vol).
    Surface {
        #[command(flatten)]
        density: DensityArgs,
        /// log1p, sqrt:<sigma> or linear:<a>.
        #[arg(long)]
        yfun: String,
        #[arg(long)]
        kappas: String,
        #[arg(long)]
        ts: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Samples of the generator Ĥ = f ∘ F⁻¹ (readable by `reconstruct`).
    Generator {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value = "0:1:101")]
        ps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density table rebuilt from a generator file.
    Reconstruct {
        /// JSON with either {"ps": [...], "values": [...]} or {"family": ..., "params": {...}}.
        #[arg(long = "hatH")]
        hat_h: PathBuf,
        #[arg(long, default_value = "-4:4:81")]
        zs: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift zonoid boundaries (CSV: p,lower,upper).
    Zonoid {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value = "0:1:101")]
        ps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convex-order scans and the Gumbel martingale simulation.
    Peacock {
        #[command(subcommand)]
        action: PeacockAction,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

#[derive(Subcommand)]
enum PeacockAction {
    Verify {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value = "log1p")]
        yfun: String,
        #[arg(long, default_value = "0:2:9")]
        ts: String,
        #[arg(long, default_value = "log:0.1:10:50")]
        kappas: String,
    },
    Simulate {
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "0.25,0.5,1")]
        ts: String,
    },
}

#[derive(Subcommand)]
enum Suite {
    Semigroup {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 1.0)]
        y1: f64,
        #[arg(long, default_value_t = 1.0)]
        y2: f64,
        #[arg(long, default_value = "0.1:10:50")]
        kappas: String,
    },
    Involution {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
        #[arg(long, default_value = "0.1:10:50")]
        kappas: String,
    },
    Isomorphism {
        /// Curve files; the bundled fixtures are used when none are given.
        curves: Vec<PathBuf>,
    },
    Zonoid {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    Peacock {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value = "log1p")]
        yfun: String,
        #[arg(long, default_value = "0:2:9")]
        ts: String,
        #[arg(long, default_value = "log:0.1:10:50")]
        kappas: String,
    },
    Inequality {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

type Outcome = Result<Output, Failure>;

/// What a command produced: a document for stdout or a file, and whether the
/// run counts as a pass.
struct Output {
    text: String,
    out: Option<PathBuf>,
    pass: bool,
}

impl Output {
    fn json(value: &impl serde::Serialize, out: Option<PathBuf>) -> Outcome {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
        Ok(Output { text: text + "\n", out, pass: true })
    }
}

fn density(args: &DensityArgs) -> Result<LogConcaveDensity, Failure> {
    let params: Map<String, Value> = match &args.params {
        None => Map::new(),
        Some(raw) => serde_json::from_str(raw)
            .map_err(|e| Failure::from(Error::InvalidParameter(format!("--params: {e}"))))?,
    };
    Ok(LogConcaveDensity::from_params(&args.family, &params)?)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Loads and validates a curve file.
fn load_curve(path: &Path, tol: &Tolerances) -> Result<CallCurve, Failure> {
    let curve = CallCurve::from_json(&read(path)?)?;
    let violations = curve.validate_with(tol);
    if !violations.is_empty() {
        return Err(Error::InvalidCurve(violations).into());
    }
    Ok(curve)
}

fn curve_document(curve: &CallCurve, points: usize) -> Result<Value, Failure> {
    let exact = if curve.is_piecewise_linear() || curve.to_doc().is_ok() {
        curve.clone()
    } else {
        materialize(curve, points)?
    };
    serde_json::to_value(exact.to_doc()?).map_err(|e| Failure::io(e.to_string()))
}

fn load_generator(path: &Path) -> Result<GeneratorHat, Failure> {
    let doc: Value = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::from(Error::Malformed(format!("generator JSON: {e}"))))?;
    let floats = |key: &str| -> Option<Vec<f64>> { doc.get(key)?.as_array()?.iter().map(Value::as_f64).collect() };
    if let (Some(ps), Some(values)) = (floats("ps"), floats("values")) {
        return Ok(GeneratorHat::table(ps, values)?);
    }
    if let Some(family) = doc.get("family").and_then(Value::as_str) {
        let params = doc.get("params").and_then(Value::as_object).cloned().unwrap_or_default();
        return Ok(GeneratorHat::of_density(&LogConcaveDensity::from_params(family, &params)?));
    }
    Err(Error::Malformed("generator JSON needs ps/values or family".into()).into())
}

fn run(cli: Cli, tol: Tolerances) -> Outcome {
    match cli.command {
        Command::Price { kappa, y, curve, density: d } => {
            if kappa < 0.0 || kappa.is_nan() {
                return Err(Error::InvalidParameter(format!("kappa must be nonnegative, got {kappa}")).into());
            }
            let price = match (curve, y) {
                (Some(path), _) => load_curve(&path, &tol)?.eval(kappa),
                (None, Some(y)) => density(&d)?.surface_price(kappa, y)?,
                (None, None) => return Err(Error::InvalidParameter("give --y or --curve".into()).into()),
            };
            Output::json(&json!({ "price": price }), None)
        }
        Command::Implied { kappa, price } => {
            let r = ybs_detailed(kappa, price)?;
            Output::json(&json!({ "implied_vol": r.y, "saturated": r.saturated }), None)
        }
        Command::Compose { left, right, points, out } => {
            let (c1, c2) = (load_curve(&left, &tol)?, load_curve(&right, &tol)?);
            Output::json(&curve_document(&bullet(&c1, &c2)?, points)?, out)
        }
        Command::Involute { curve, points, out } => {
            let c = load_curve(&curve, &tol)?;
            Output::json(&curve_document(&involute(&c)?, points)?, out)
        }
        Command::Hat { curve, ps, format, out } => {
            let c = load_curve(&curve, &tol)?;
            let ps = parse_grid(&ps)?;
            let h = hat(&c)?;
            let values: Vec<f64> = ps.iter().map(|&p| h.eval(p)).collect();
            match format {
                Format::Json => Output::json(&json!({ "ps": ps, "values": values }), out),
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = ps.iter().zip(&values).map(|(p, v)| vec![*p, *v]).collect();
                    Ok(Output { text: csv(&["p", "hat"], &rows), out, pass: true })
                }
            }
        }
        Command::Surface { density: d, yfun, kappas, ts, out } => {
            let f = density(&d)?;
            let y: TimeChange = yfun.parse()?;
            let rows = implied_vol_surface(&f, &y, &parse_points(&kappas)?, &parse_points(&ts)?)?;
            let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.kappa, r.t, r.price, r.implied_vol]).collect();
            Ok(Output { text: csv(&["kappa", "t", "price", "implied_vol"], &table), out, pass: true })
        }
        Command::Generator { density: d, ps, out } => {
            let f = density(&d)?;
            let pair = generator_h(GeneratorHat::of_density(&f))?;
            let ps = parse_grid(&ps)?;
            let values: Vec<f64> = ps.iter().map(|&p| pair.hat_h.eval(p)).collect();
            Output::json(&json!({ "ps": ps, "values": values, "a": pair.a, "b": pair.b }), out)
        }
        Command::Reconstruct { hat_h, zs, out } => {
            let g = load_generator(&hat_h)?;
            let zs = parse_points(&zs)?;
            match reconstruct(g)? {
                Reconstruction::Trivial => Output::json(&json!({ "trivial": true }), out),
                Reconstruction::Density(f) => {
                    let (lower, upper) = f.support();
                    let pdf: Vec<f64> = zs.iter().map(|&z| f.pdf(z)).collect();
                    let cdf: Vec<f64> = zs.iter().map(|&z| f.cdf(z)).collect();
                    let doc = json!({
                        "trivial": false,
                        "lower": finite_or_string(lower),
                        "upper": finite_or_string(upper),
                        "z": zs,
                        "pdf": pdf,
                        "cdf": cdf,
                    });
                    Output::json(&doc, out)
                }
            }
        }
        Command::Zonoid { curve, ps, out } => {
            let c = load_curve(&curve, &tol)?;
            let z = lift_zonoid_from_curve(&c, &parse_grid(&ps)?)?;
            let rows: Vec<Vec<f64>> =
                z.ps.iter().zip(z.lower.iter().zip(&z.upper)).map(|(p, (l, u))| vec![*p, *l, *u]).collect();
            Ok(Output { text: csv(&["p", "lower", "upper"], &rows), out, pass: true })
        }
        Command::Peacock { action } => match action {
            PeacockAction::Verify { density: d, yfun, ts, kappas } => {
                let family = PeacockFamily::new(density(&d)?, yfun.parse()?, parse_points(&ts)?)?;
                let report = verify_peacock(&family, &parse_points(&kappas)?)?;
                let pass = report.pass;
                Output::json(&report, None).map(|o| Output { pass, ..o })
            }
            PeacockAction::Simulate { paths, seed, ts } => {
                let report = gumbel_martingale_sim(&parse_points(&ts)?, paths, seed)?;
                let pass = report.pass;
                Output::json(&report, None).map(|o| Output { pass, ..o })
            }
        },
        Command::Verify { suite } => {
            let report = match suite {
                Suite::Semigroup { density: d, y1, y2, kappas } => {
                    suites::semigroup(&density(&d)?, y1, y2, &parse_points(&kappas)?)?
                }
                Suite::Involution { density: d, y, kappas } => {
                    suites::involution(&density(&d)?, y, &parse_points(&kappas)?)?
                }
                Suite::Isomorphism { curves } => {
                    let curves = if curves.is_empty() {
                        suites::fixture_curves()
                    } else {
                        curves.iter().map(|p| load_curve(p, &tol)).collect::<Result<_, _>>()?
                    };
                    suites::isomorphism(&curves)?
                }
                Suite::Zonoid { samples, seed } => suites::zonoid(samples, seed)?,
                Suite::Peacock { density: d, yfun, ts, kappas } => {
                    suites::peacock(&density(&d)?, &yfun.parse()?, &parse_points(&ts)?, &parse_points(&kappas)?)?
                }
                Suite::Inequality { samples, seed } => suites::inequality(samples, seed),
            };
            let pass = report.pass;
            Output::json(&report, None).map(|o| Output { pass, ..o })
        }
    }
}

fn finite_or_string(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return Failure::usage(e.to_string()).report();
        }
    };
    let tol = match Tolerances::from_env() {
        Ok(t) => t,
        Err(e) => return Failure::from(e).report(),
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return Failure::usage(format!("--threads: {e}")).report();
        }
    }
    match run(cli, tol) {
        Ok(output) => {
            if let Err(f) = output::emit(&output.text, output.out.as_deref()) {
                return f.report();
            }
            if output.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => f.report(),
    }
}
