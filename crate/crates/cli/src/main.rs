//! Command-line front end: certification reports, degrees, flow censuses and
//! mesh dumps.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use gradcert::certifier::{analyze, AnalysisConfig, AnalysisError, AnalysisReport, RuleStatus};
use gradcert::degree::{
    map_degree, negative_gradient, quadrature_degree, simplicial_degree, DegreeConfig, DegreeResult,
};
use gradcert::flow::{grid_census, FlowConfig, SeedGrid};
use gradcert::morse::MorseConfig;
use gradcert::poly::{parse_polynomial, Polynomial, Variables};
use gradcert::sphere::{auto_radii, Label, SignRegion};

#[derive(Parser, Debug)]
#[command(name = "gradcert", version, about = "Certify that infinitely many gradient trajectories converge to a critical point")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct PolyArgs {
    /// Ordered variable names, e.g. `x,y,z`.
    #[arg(long)]
    vars: String,
    /// The polynomial, e.g. `x^3 - y^2`.
    #[arg(long)]
    poly: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Both,
    Simplicial,
    Quadrature,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Region {
    Neg,
    Pos,
    Mixed,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the invariants and apply every rule.
    Analyze {
        #[command(flatten)]
        poly: PolyArgs,
        /// `auto` or a comma separated, strictly decreasing list.
        #[arg(long, default_value = "auto")]
        radii: String,
        #[arg(long, default_value_t = 9)]
        max_depth: u32,
        /// Newton starts for the critical points of the initial form.
        #[arg(long, default_value_t = 512)]
        attempts: usize,
        /// Comma separated, strictly decreasing radii for the degree.
        #[arg(long, default_value = "0.25,0.125,0.0625")]
        degree_radii: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Degree of `-grad f` on a small sphere.
    Degree {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 0.125)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, default_value_t = 26)]
        max_depth: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate the gradient flow from a grid of seeds (empirical).
    Flow {
        #[command(flatten)]
        poly: PolyArgs,
        /// `NxN:LO,HI`, one count per variable.
        #[arg(long)]
        grid: String,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG phase portrait, planar polynomials only.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write the sign-labelled sphere mesh as OFF.
    MeshDump {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 9)]
        max_depth: u32,
        #[arg(long, value_enum, default_value_t = Region::Neg)]
        region: Region,
        /// OFF destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit 1 for bad input, 2 for a computation that could not certify.
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Internal(e) => e,
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn internal<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Internal(e.into())
}

fn parse_poly(args: &PolyArgs) -> Result<(Variables, Polynomial), Failure> {
    let vars = Variables::parse_list(&args.vars).map_err(input)?;
    let f = parse_polynomial(&args.poly, &vars)
        .with_context(|| format!("cannot parse `{}`", args.poly))
        .map_err(input)?;
    Ok((vars, f))
}

fn parse_radii(text: &str) -> Result<Vec<f64>, Failure> {
    if text.trim() == "auto" {
        return Ok(auto_radii());
    }
    let radii: Vec<f64> = text
        .split(',')
        .map(|r| r.trim().parse::<f64>().with_context(|| format!("invalid radius `{r}`")))
        .collect::<Result<_, _>>()
        .map_err(input)?;
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(input(anyhow!("radii must be positive")));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(input(anyhow!("radii must be strictly decreasing")));
    }
    Ok(radii)
}

fn check_radius(r: f64) -> Result<(), Failure> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(input(anyhow!("radius must be positive, got {r}")))
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display())).map_err(input)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn report_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let b = |h: &gradcert::sphere::HomologySummary| {
        format!(
            "betti {:?}, chi {}, {}{}",
            h.betti,
            h.euler,
            if h.stabilized { "stabilized" } else { "not stabilized" },
            if h.empty { ", EMPTY" } else { "" }
        )
    };
    s.push_str(&format!("f = {}\n", r.input.poly));
    s.push_str(&format!("omega = {} (degree {})\n", r.omega, r.d));
    s.push_str(&format!("S_r (r = {}): {}\n", r.invariants.s_r.radius, b(&r.invariants.s_r)));
    s.push_str(&format!("Omega: {}\n", b(&r.invariants.omega_region)));
    if let Some(d) = &r.degree {
        match d.degree {
            Some(deg) => s.push_str(&format!(
                "degree of -grad f: {deg}, chi(f >= 0) = {}, chi(S_r) = {}\n",
                d.chi_nonneg.unwrap_or_default(),
                d.chi_s_r.unwrap_or_default()
            )),
            None => s.push_str("degree of -grad f: disabled\n"),
        }
    }
    if let Some(q) = r.quadratic {
        s.push_str(&format!("quadratic inertia: {} negative, {} positive\n", q.neg, q.pos));
    }
    s.push_str(&format!("critical points of omega on the sphere: {}\n", r.morse.critical_points.len()));
    for o in &r.rules {
        let tag = match o.status {
            RuleStatus::Fired => "FIRED",
            RuleStatus::NotFired => "not fired",
            RuleStatus::Skipped => "SKIPPED",
            RuleStatus::NotApplicable => "n/a",
        };
        s.push_str(&format!("  {:?} {tag}: {}\n", o.rule, o.justification));
    }
    s.push_str(&format!("verdict: {}\n", serde_json::to_value(r.verdict).unwrap().as_str().unwrap()));
    for n in &r.diagnostics.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    s
}

fn run_analyze(
    poly: &PolyArgs,
    radii: &str,
    max_depth: u32,
    attempts: usize,
    degree_radii: &str,
    format: Format,
    seed: u64,
) -> Result<(), Failure> {
    let (vars, f) = parse_poly(poly)?;
    if attempts == 0 {
        return Err(input(anyhow!("--attempts must be positive")));
    }
    let config = AnalysisConfig {
        radii: parse_radii(radii)?,
        max_depth,
        morse: MorseConfig { attempts, seed },
        degree_radii: parse_radii(degree_radii)?,
        degree: DegreeConfig {
            seed,
            ..DegreeConfig::default()
        },
    };
    let report = analyze(&f, &vars, &config).map_err(|e| match e {
        AnalysisError::Poly(_) | AnalysisError::Sphere(_) | AnalysisError::NotCritical => input(e),
        AnalysisError::Morse(_) => internal(e),
    })?;
    let text = match format {
        Format::Json => {
            for n in &report.diagnostics.notes {
                eprintln!("note: {n}");
            }
            serde_json::to_string_pretty(&report).map_err(internal)? + "\n"
        }
        Format::Text => report_text(&report),
    };
    io::stdout().write_all(text.as_bytes()).map_err(internal)
}

fn run_degree(poly: &PolyArgs, radius: f64, method: Method, max_depth: u32, seed: u64) -> Result<(), Failure> {
    let (_, f) = parse_poly(poly)?;
    check_radius(radius)?;
    let config = DegreeConfig {
        max_depth,
        seed,
        ..DegreeConfig::default()
    };
    let field = negative_gradient(&f);
    let result: DegreeResult = match method {
        Method::Both => map_degree(&field, radius, &config),
        Method::Simplicial => simplicial_degree(&field, radius, &config),
        Method::Quadrature => quadrature_degree(&field, radius, &config),
    }
    .map_err(|e| match e {
        gradcert::degree::DegreeError::Sphere(_) => input(e),
        _ => internal(e),
    })?;
    let text = serde_json::to_string_pretty(&result).map_err(internal)? + "\n";
    io::stdout().write_all(text.as_bytes()).map_err(internal)
}

fn run_flow(poly: &PolyArgs, grid: &str, out: &Option<PathBuf>, svg: &Option<PathBuf>) -> Result<(), Failure> {
    let (vars, f) = parse_poly(poly)?;
    let grid = SeedGrid::parse(grid).map_err(input)?;
    if svg.is_some() && vars.len() != 2 {
        return Err(input(anyhow!("--svg needs a planar polynomial")));
    }
    let census = grid_census(&f, &grid, &FlowConfig::default()).map_err(input)?;
    let mut w = open_output(out)?;
    census.write_csv(vars.names(), &mut w).map_err(internal)?;
    w.flush().map_err(internal)?;
    if let Some(path) = svg {
        let picture = census.svg(grid.lo, grid.hi).expect("planar census");
        std::fs::write(path, picture)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(input)?;
    }
    let counts: Vec<String> = census
        .counts
        .iter()
        .map(|c| format!("{} {}", c.outcome.as_str(), c.count))
        .collect();
    eprintln!("{}; {}", gradcert::flow::EMPIRICAL, counts.join(", "));
    Ok(())
}

fn run_mesh_dump(
    poly: &PolyArgs,
    radius: f64,
    max_depth: u32,
    region: Region,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let (_, f) = parse_poly(poly)?;
    check_radius(radius)?;
    let sr = SignRegion::build(&f, radius, max_depth).map_err(input)?;
    let cells = match region {
        Region::Neg => sr.cells_with(Label::Neg),
        Region::Pos => sr.cells_with(Label::Pos),
        Region::Mixed => sr.cells_with(Label::Mixed),
        Region::All => sr.complex().alive_cells().collect(),
    };
    let mut w = open_output(out)?;
    sr.complex().write_off(&cells, &mut w).map_err(internal)?;
    w.flush().map_err(internal)?;
    let (neg, pos, mixed) = sr.label_counts();
    eprintln!("cells: {neg} NEG, {pos} POS, {mixed} MIXED at depth {}", sr.depth());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("GRADCERT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| input(anyhow!("GRADCERT_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(internal)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Analyze {
            poly,
            radii,
            max_depth,
            attempts,
            degree_radii,
            format,
            seed,
        } => run_analyze(poly, radii, *max_depth, *attempts, degree_radii, *format, *seed),
        Command::Degree {
            poly,
            radius,
            method,
            max_depth,
            seed,
        } => run_degree(poly, *radius, *method, *max_depth, *seed),
        Command::Flow { poly, grid, out, svg } => run_flow(poly, grid, out, svg),
        Command::MeshDump {
            poly,
            radius,
            max_depth,
            region,
            out,
        } => run_mesh_dump(poly, *radius, *max_depth, *region, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
