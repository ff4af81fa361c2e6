use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ritt_calculus::calculus::{contour_calculus, CalculusSettings, HoloFunction, Polynomial, CATALOG};
use ritt_calculus::fm::{alpha_coefficients, build_basis, reconstruct, reconstruction_error, FMContour, FmParams, Truncation};
use ritt_calculus::geometry::UnimodularVertexSet;
use ritt_calculus::harness::config::DomainSpec;
use ritt_calculus::harness::experiments::fm::test_function;
use ritt_calculus::harness::textio::{format_complex, format_matrix, parse_complex, parse_operator, parse_vector};
use ritt_calculus::harness::{self, ExperimentConfig};
use ritt_calculus::operator::{classify_ritt, FiniteOperator};
use ritt_calculus::random::{random_complex_vector, substream};
use ritt_calculus::rademacher::{square_function, SquareFunctionSpec};
use ritt_calculus::{calculus, Error, Result};

/// Ritt_E operators: functional calculus, square functions and the
/// verification experiments.
#[derive(Parser)]
#[command(name = "ritt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered experiments.
    List,
    /// Run an experiment and write its report.
    Verify {
        experiment: String,
        /// TOML configuration layered over the experiment defaults.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Dotted override, e.g. `operator.instances=5`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (default: $RITT_OUTPUT_DIR or ./ritt-output).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Skip writing report.json and the CSV artifacts.
        #[arg(long)]
        no_write: bool,
        /// Print the assembled configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Classify a matrix as Ritt_E and estimate its type and constant.
    CheckRitt {
        #[command(flatten)]
        input: OperatorInput,
    },
    /// Apply a holomorphic function to a matrix through the contour calculus.
    Calc {
        #[command(flatten)]
        input: OperatorInput,
        /// Catalog function (vertex_power, exp_vertex, cauchy_vertex).
        #[arg(long, conflicts_with = "poly")]
        function: Option<String>,
        /// Parameter of the catalog function.
        #[arg(long, default_value_t = 1.5)]
        param: f64,
        /// Polynomial coefficients c0,c1,... (lowest degree first).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        poly: Option<Vec<String>>,
        /// Stolz radius of the function's domain.
        #[arg(short, long, default_value_t = 0.9)]
        s: f64,
        /// Contour radius (default: midway between the type and s).
        #[arg(short, long)]
        u: Option<f64>,
    },
    /// Square function ‖x‖_{T,α}.
    Sqfn {
        #[command(flatten)]
        input: OperatorInput,
        /// Vector file (`n` then n entries); a seeded random vector otherwise.
        #[arg(long)]
        vector: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Franks-McIntosh reconstruction of a test function on E_r.
    Fm {
        #[command(flatten)]
        vertices: VertexArgs,
        #[arg(short, long, default_value_t = 0.6)]
        r: f64,
        #[arg(short, long, default_value_t = 0.8)]
        s: f64,
        /// one, z, sqrt_vertex or vertex_poly.
        #[arg(long, default_value = "one")]
        function: String,
        #[arg(long, default_value_t = 25)]
        k_cut: usize,
        #[arg(long, default_value_t = 15)]
        p_cut: usize,
        /// Points to evaluate at, e.g. `0.1+0.2j`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<String>,
        /// Size of the interior grid for the max-error summary.
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
}

#[derive(Args)]
struct VertexArgs {
    /// Use the N-th roots of unity as vertices.
    #[arg(long, conflicts_with = "vertices")]
    roots: Option<usize>,
    /// Vertices as complex numbers, e.g. `1,-1` or `1,0.5+0.866j`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    vertices: Option<Vec<String>>,
}

#[derive(Args)]
struct OperatorInput {
    /// Matrix file: header `n p` (p may be `inf`), then n rows.
    #[arg(short, long)]
    matrix: PathBuf,
    #[command(flatten)]
    vertices: VertexArgs,
}

impl VertexArgs {
    fn resolve(&self) -> Result<UnimodularVertexSet> {
        if let Some(n) = self.roots {
            if n == 0 {
                return Err(Error::Config {
                    field: "--roots".into(),
                    message: "need at least one vertex".into(),
                });
            }
            return Ok(UnimodularVertexSet::roots_of_unity(n));
        }
        let tokens = self.vertices.clone().unwrap_or_else(|| vec!["1".into()]);
        let mut points = Vec::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            let z = parse_complex(t).map_err(|e| Error::Config {
                field: format!("--vertices[{i}]"),
                message: e.to_string(),
            })?;
            points.push([z.re, z.im]);
        }
        let spec = DomainSpec {
            vertices: points,
            ..DomainSpec::default()
        };
        spec.vertex_set().map_err(|e| match e {
            Error::Config { field, message } => Error::Config {
                field: field.replace("domain.vertices", "--vertices"),
                message,
            },
            other => other,
        })
    }
}

impl OperatorInput {
    fn load(&self) -> Result<(FiniteOperator, UnimodularVertexSet)> {
        Ok((read_operator(&self.matrix)?, self.vertices.resolve()?))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_operator(path: &Path) -> Result<FiniteOperator> {
    parse_operator(&read(path)?)
}

fn list() {
    for e in &harness::REGISTRY {
        println!("{:<24} {}", e.name, e.summary);
    }
}

struct VerifyArgs<'a> {
    experiment: &'a str,
    config: Option<&'a Path>,
    overrides: &'a [String],
    out: Option<&'a Path>,
    json: bool,
    no_write: bool,
    print_config: bool,
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let exp = harness::find(args.experiment).ok_or_else(|| Error::UnknownExperiment(args.experiment.into()))?;
    let mut config = ExperimentConfig::assemble(&(exp.defaults)(), args.config, args.overrides)?;
    if let Some(out) = args.out {
        config.output.dir = Some(out.display().to_string());
    }
    if args.print_config {
        print!("{}", config.to_toml());
        return Ok(true);
    }
    let mut report = harness::run_config(exp, &config)?;
    if !args.no_write {
        let path = report.write(&config.output.resolve())?;
        eprintln!("report written to {}", path.display());
    }
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(report.passed())
}

fn check_ritt(input: &OperatorInput) -> Result<bool> {
    let (op, e) = input.load()?;
    let c = classify_ritt(&op, &e);
    println!("is_ritt       {}", c.is_ritt);
    println!("type_estimate {:.6}", c.type_estimate);
    println!("constant      {:.6e}", c.constant);
    println!("samples       {}", c.samples_used);
    Ok(c.is_ritt)
}

fn calc(
    input: &OperatorInput,
    function: Option<&str>,
    param: f64,
    poly: Option<&[String]>,
    s: f64,
    u: Option<f64>,
) -> Result<bool> {
    let (op, e) = input.load()?;
    let phi = match (function, poly) {
        (_, Some(tokens)) => {
            let coeffs = tokens.iter().map(|t| parse_complex(t)).collect::<Result<Vec<_>>>()?;
            HoloFunction::from_polynomial(Polynomial::new(coeffs), &e, s)
        }
        (Some(name), None) => HoloFunction::catalog(name, param, &e, s)?,
        (None, None) => {
            return Err(Error::Config {
                field: "--function".into(),
                message: format!("give --function ({}) or --poly", CATALOG.join(", ")),
            })
        }
    };
    let settings = CalculusSettings {
        s,
        u,
        ..CalculusSettings::default()
    };
    let u = settings.contour_radius(&op, &e)?;
    let value = contour_calculus(&phi, &op, &e, u, settings.quadrature)?;
    print!("{}", format_matrix(&value, op.ambient_p()));
    eprintln!("contour radius {u:.6}, ‖φ(T)‖ = {:.6e}", op.norm_of(&value));
    if let Some(p) = phi.polynomial() {
        let horner = p.eval_matrix(op.entries());
        let rel = (&value - &horner).norm() / horner.norm().max(f64::MIN_POSITIVE);
        eprintln!("relative difference from Horner {rel:.3e}");
    }
    Ok(true)
}

fn sqfn(input: &OperatorInput, vector: Option<&Path>, alpha: f64, seed: u64) -> Result<bool> {
    let (op, e) = input.load()?;
    let x = match vector {
        Some(path) => parse_vector(&read(path)?)?,
        None => random_complex_vector(&mut substream(seed, 0), op.dim()),
    };
    let sf = square_function(&op, &e, &SquareFunctionSpec::with_alpha(alpha), &x)?;
    println!("value       {:.12e}", sf.value.value);
    println!("std_error   {:.3e}", sf.value.std_error);
    println!("method      {:?}", sf.value.method);
    println!("terms       {}", sf.terms);
    println!("tail_bound  {:.3e}", sf.tail_bound);
    println!("lattice     {:.12e}", sf.lattice);
    println!("‖x‖         {:.12e}", op.vector_norm(&x));
    if sf.divergence_suspected {
        println!("divergence suspected");
    }
    Ok(!sf.divergence_suspected)
}

#[allow(clippy::too_many_arguments)]
fn fm(
    vertices: &VertexArgs,
    r: f64,
    s: f64,
    function: &str,
    k_cut: usize,
    p_cut: usize,
    at: &[String],
    grid: usize,
) -> Result<bool> {
    let e = vertices.resolve()?;
    let params = FmParams {
        k_max: k_cut.max(1),
        p_max: p_cut.max(1),
        ..FmParams::default()
    };
    let contour = FMContour::build(&e, r, s, &params)?;
    let basis = build_basis(&contour, params.p_max)?;
    let h = test_function(function, &e)?;
    let coeffs = alpha_coefficients(&contour, &basis, &h);
    let t = Truncation::new(k_cut, p_cut);
    for token in at {
        let z = parse_complex(token)?;
        let v = reconstruct(&contour, &basis, &coeffs, z, t)?;
        println!("{}  {}  error {:.3e}", format_complex(z), format_complex(v), (v - h(z)).norm());
    }
    let points = calculus::interior_grid(&contour.inner_domain(), grid);
    let err = reconstruction_error(&contour, &basis, &coeffs, &h, &points, t)?;
    println!("rho {:.4}  segment length {:.4e}", contour.rho(), contour.l());
    println!("max error over {} grid points: {:.3e}", points.len(), err.max_error);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List => {
            list();
            Ok(true)
        }
        Command::Verify {
            experiment,
            config,
            overrides,
            out,
            json,
            no_write,
            print_config,
        } => verify(VerifyArgs {
            experiment,
            config: config.as_deref(),
            overrides,
            out: out.as_deref(),
            json: *json,
            no_write: *no_write,
            print_config: *print_config,
        }),
        Command::CheckRitt { input } => check_ritt(input),
        Command::Calc {
            input,
            function,
            param,
            poly,
            s,
            u,
        } => calc(input, function.as_deref(), *param, poly.as_deref(), *s, *u),
        Command::Sqfn {
            input,
            vector,
            alpha,
            seed,
        } => sqfn(input, vector.as_deref(), *alpha, *seed),
        Command::Fm {
            vertices,
            r,
            s,
            function,
            k_cut,
            p_cut,
            at,
            grid,
        } => fm(vertices, *r, *s, function, *k_cut, *p_cut, at, *grid),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnknownExperiment(_) = e {
                eprintln!("known experiments: {}", harness::names().join(", "));
            }
            ExitCode::from(2)
        }
    }
}
