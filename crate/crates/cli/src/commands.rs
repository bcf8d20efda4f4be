//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vbquant_core::fiberq::quantize_group;
use vbquant_core::gauge::{
    connection_quadrature, BaseChart, BasePoint, BaseSpace, BaseTangent, ConnectionField, GaugeModel, Potential,
    QuadratureConnection, RepConnection,
};
use vbquant_core::numerics::{cis, hermitian_eigenvalues, ComplexMatrix};
use vbquant_core::orbit::moment_hamiltonian;
use vbquant_core::su2::Su2;
use vbquant_core::transport::{covariant_section_solve, transport, wilson_loop, BasePath, PathPiece};
use vbquant_core::Complex64;

use crate::document::{complex, matrix, num, reals, vector, Check, ResultDocument};
use crate::scenario::{
    parse_chart, parse_scenario, resolve_config_path, OutputFormat, Scenario, ScenarioError, ScenarioFile, Tolerances,
};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ACCURACY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "vbquant", version, about = "Quantize SU(2) coadjoint-orbit fibers over gauge backgrounds and verify the results")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (JSON). Relative paths also resolve under $VBQUANT_CONFIG_DIR.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Twice the spin, overriding the scenario.
    #[arg(long, global = true, value_name = "TWO_J", allow_hyphen_values = true)]
    pub spin: Option<String>,

    /// Moment-map coefficients a1,a2,a3 of the fiber Hamiltonian.
    #[arg(long, global = true, value_name = "A1,A2,A3", allow_hyphen_values = true)]
    pub hamiltonian: Option<String>,

    /// Base point q1,q2 or q1,q2,p1,p2.
    #[arg(long, global = true, value_name = "Q1,Q2[,P1,P2]", allow_hyphen_values = true)]
    pub point: Option<String>,

    /// Base tangent dq1,dq2 or dq1,dq2,dp1,dp2.
    #[arg(long, global = true, value_name = "DQ1,DQ2[,DP1,DP2]", allow_hyphen_values = true)]
    pub tangent: Option<String>,

    /// Name of a path in the scenario.
    #[arg(long, global = true, value_name = "NAME")]
    pub path: Option<String>,

    /// How the connection is assembled.
    #[arg(long, global = true, value_enum, default_value_t = Source::Rep)]
    pub source: Source,

    /// Replace every tolerance by this value.
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    pub tol: Option<String>,

    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,

    /// su(2) element x1,x2,x3; the group element is its exponential.
    #[arg(long, global = true, value_name = "X1,X2,X3", allow_hyphen_values = true)]
    pub element: Option<String>,

    /// Base chart of --point: global, regauged, north or south.
    #[arg(long, global = true, value_name = "NAME")]
    pub chart: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Quadrature Gram matrix of the fiber monomials.
    Gram,
    /// Prequantization matrix of a moment-map Hamiltonian.
    Prequant,
    /// Quantized transition X(g) of an SU(2) element.
    Transition,
    /// Connection matrix A(v) at a base point.
    Connection,
    /// Parallel transport along a scenario path.
    Transport,
    /// Holonomy around a closed scenario path.
    Wilson,
    /// Covariantly constant section along the momentum directions.
    Section,
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

impl Command {
    fn name(self) -> String {
        match self {
            Command::Gram => "gram".into(),
            Command::Prequant => "prequant".into(),
            Command::Transition => "transition".into(),
            Command::Connection => "connection".into(),
            Command::Transport => "transport".into(),
            Command::Wilson => "wilson".into(),
            Command::Section => "section".into(),
            Command::Verify { suite } => format!("verify {}", suite.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Orbit,
    Fiber,
    Gauge,
    Transport,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Orbit => "orbit",
            Suite::Fiber => "fiber",
            Suite::Gauge => "gauge",
            Suite::Transport => "transport",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    /// Representation of the potential.
    Rep,
    /// Quadrature of prequantization operators.
    Quad,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input, configuration or chart: exit 2.
    Input(String),
    /// An invariant failed beyond tolerance while computing: exit 3.
    Accuracy(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Accuracy(_) => EXIT_ACCURACY,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Accuracy(m) => f.write_str(m),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<vbquant_core::Error> for CliError {
    fn from(e: vbquant_core::Error) -> Self {
        match e {
            vbquant_core::Error::Accuracy { .. } => CliError::Accuracy(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (program name first) and runs the command. Nothing is
/// printed; the caller emits the returned text.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match execute(&cli) {
        Ok((doc, format)) => {
            let stdout = match format {
                OutputFormat::Json => doc.render_json(),
                OutputFormat::Table => doc.render_table(),
            };
            let (code, stderr) = if doc.passed() {
                (EXIT_OK, String::new())
            } else {
                let failed: Vec<&str> = doc.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                (EXIT_ACCURACY, format!("error: checks beyond tolerance: {}\n", failed.join(", ")))
            };
            Outcome { code, stdout, stderr }
        }
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Comma-separated finite numbers; `counts` lists the accepted lengths.
pub fn parse_numbers(flag: &str, text: &str, counts: &[usize]) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let x: f64 = part
            .trim()
            .parse()
            .map_err(|_| input(format!("--{flag}: `{}` is not a number", part.trim())))?;
        if !x.is_finite() {
            return Err(input(format!("--{flag}: values must be finite")));
        }
        out.push(x);
    }
    if !counts.contains(&out.len()) {
        let want: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
        return Err(input(format!("--{flag}: expected {} comma-separated values, got {}", want.join(" or "), out.len())));
    }
    Ok(out)
}

fn parse_two_j(text: &str) -> Result<i64, CliError> {
    text.trim()
        .parse::<i64>()
        .map_err(|_| input(format!("--spin: `{text}` is not an integer (twice the spin)")))
}

fn parse_tol(text: &str) -> Result<f64, CliError> {
    match text.trim().parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(input(format!("--tol: `{text}` is not a positive number"))),
    }
}

fn triple(flag: &str, text: &str) -> Result<[f64; 3], CliError> {
    let v = parse_numbers(flag, text, &[3])?;
    Ok([v[0], v[1], v[2]])
}

/// Reads the scenario named by `--config`, or a trivial one, applies
/// `--spin` and `--tol`, and validates it.
pub fn build_scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let mut file = match &cli.config {
        Some(p) => {
            let resolved = resolve_config_path(p);
            let text = std::fs::read_to_string(&resolved)
                .map_err(|e| input(format!("cannot read {}: {e}", resolved.display())))?;
            parse_scenario(&text)?
        }
        None => ScenarioFile::minimal(1),
    };
    if let Some(s) = &cli.spin {
        file.orbit.two_j = parse_two_j(s)?;
    }
    let mut scenario = Scenario::validate(file)?;
    if let Some(t) = &cli.tol {
        scenario.tolerances = Tolerances::uniform(parse_tol(t)?);
    }
    Ok(scenario)
}

fn execute(cli: &Cli) -> Result<(ResultDocument, OutputFormat), CliError> {
    let scenario = build_scenario(cli)?;
    let format = cli.output.or(scenario.file.output).unwrap_or(OutputFormat::Json);
    let echo = serde_json::to_value(&scenario.file).map_err(|e| input(e.to_string()))?;
    let mut doc = ResultDocument::new(cli.command.name(), echo);
    match cli.command {
        Command::Gram => gram(&scenario, &mut doc),
        Command::Prequant => prequant(cli, &scenario, &mut doc)?,
        Command::Transition => transition(cli, &scenario, &mut doc)?,
        Command::Connection => connection(cli, &scenario, &mut doc)?,
        Command::Transport => run_transport(cli, &scenario, &mut doc)?,
        Command::Wilson => wilson(cli, &scenario, &mut doc)?,
        Command::Section => section(cli, &scenario, &mut doc)?,
        Command::Verify { suite } => verify::run_suite(suite, &scenario, &mut doc)?,
    }
    Ok((doc, format))
}

fn gram(s: &Scenario, doc: &mut ResultDocument) {
    let b = &s.fiber.basis;
    doc.set("two_j", json!(s.spec.two_j));
    doc.set("dim", json!(s.spec.dim()));
    doc.set("norms", reals(&b.norms));
    doc.set("gram", matrix(&b.gram));
    doc.check(Check::at_most("gram_relative_error", b.gram_relative_error(), s.tolerances.gram));
}

fn prequant(cli: &Cli, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let a = match &cli.hamiltonian {
        Some(t) => triple("hamiltonian", t)?,
        None => [0.0, 0.0, 1.0],
    };
    let w = moment_hamiltonian(&s.spec, a);
    let o = s.fiber.prequant(&w)?.matrix;
    let eig = hermitian_eigenvalues(&o)?;
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let j = s.spec.j();
    let spectrum = eig
        .iter()
        .enumerate()
        .map(|(k, e)| (e - norm * (k as f64 - j)).abs())
        .fold(0.0, f64::max);
    doc.set("hamiltonian", reals(&a));
    doc.set("matrix", matrix(&o));
    doc.set("eigenvalues", reals(&eig));
    let t = &s.tolerances;
    doc.check(Check::at_most("hermiticity", o.hermiticity_deviation(), t.hermiticity));
    doc.check(Check::at_most("spectrum", spectrum, t.spectrum));
    doc.check(Check::at_most("polarization", s.fiber.polarization_residual(&w), t.polarization));
    Ok(())
}

fn transition(cli: &Cli, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let x = match &cli.element {
        Some(t) => triple("element", t)?,
        None => [0.0; 3],
    };
    let g = Su2(x).exp();
    let m = quantize_group(&s.fiber.basis, &g);
    let inv = quantize_group(&s.fiber.basis, &g.inverse());
    let id = ComplexMatrix::identity(s.spec.dim());
    doc.set("element", reals(&x));
    doc.set("group", matrix(&g.matrix()));
    doc.set("matrix", matrix(&m));
    let t = &s.tolerances;
    doc.check(Check::at_most("unitarity", m.unitarity_deviation(), t.unitarity));
    doc.check(Check::at_most("inverse", (&(&m * &inv) - &id).max_abs(), t.representation));
    Ok(())
}

fn chart_name(c: BaseChart) -> Value {
    Value::String(c.name().to_string())
}

/// Base point and tangent from `--point`, `--tangent` and `--chart`.
fn point_and_tangent(cli: &Cli, model: &GaugeModel) -> Result<(BasePoint, BaseTangent), CliError> {
    let (q, p) = match &cli.point {
        Some(t) => {
            let v = parse_numbers("point", t, &[2, 4])?;
            ([v[0], v[1]], if v.len() == 4 { [v[2], v[3]] } else { [0.0; 2] })
        }
        None => (model.sample_points()[1], [0.0; 2]),
    };
    let v = match &cli.tangent {
        Some(t) => {
            let v = parse_numbers("tangent", t, &[2, 4])?;
            BaseTangent::new([v[0], v[1]], if v.len() == 4 { [v[2], v[3]] } else { [0.0; 2] })
        }
        None => BaseTangent::position([1.0, 0.0]),
    };
    let chart = match &cli.chart {
        Some(name) => match parse_chart(name) {
            Some(c) if model.charts().contains(&c) => c,
            _ => return Err(input(format!("--chart: `{name}` is not a chart of this model"))),
        },
        None => model.default_chart(q),
    };
    let b = BasePoint::new(chart, q, p);
    model.check_point(&b)?;
    Ok((b, v))
}

fn base_point_json(b: &BasePoint) -> Value {
    json!({"chart": chart_name(b.chart), "q": reals(&b.q), "p": reals(&b.p)})
}

fn connection(cli: &Cli, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let (b, v) = point_and_tangent(cli, &s.model)?;
    let rep = RepConnection::new(&s.model, &s.fiber);
    let a_rep = rep.connection(&b, &v)?;
    let a_quad = connection_quadrature(&s.model, &s.fiber, &b, &v)?.matrix;
    let a = match cli.source {
        Source::Rep => &a_rep,
        Source::Quad => &a_quad,
    };
    doc.set("point", base_point_json(&b));
    doc.set("tangent", json!({"dq": reals(&v.dq), "dp": reals(&v.dp)}));
    doc.set("source", source_name(cli.source));
    doc.set("matrix", matrix(a));
    let t = &s.tolerances;
    doc.check(Check::at_most("anti_hermiticity", a.anti_hermiticity_deviation(), t.anti_hermiticity));
    doc.check(Check::at_most("equivalence", (&a_rep - &a_quad).norm_op(), t.equivalence));
    Ok(())
}

fn source_name(s: Source) -> Value {
    Value::String(match s {
        Source::Rep => "rep".into(),
        Source::Quad => "quad".into(),
    })
}

/// Connection of the requested kind over the scenario's model.
pub fn connection_field<'a>(s: &'a Scenario, source: Source) -> Box<dyn ConnectionField + 'a> {
    match source {
        Source::Rep => Box::new(RepConnection::new(&s.model, &s.fiber)),
        Source::Quad => Box::new(QuadratureConnection {
            model: &s.model,
            fiber: &s.fiber,
        }),
    }
}

fn run_transport(cli: &Cli, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let (name, path) = s.path(cli.path.as_deref())?;
    let conn = connection_field(s, cli.source);
    let r = transport(conn.as_ref(), path)?;
    let crossings: Vec<Value> = r
        .crossings
        .iter()
        .map(|c| json!({"piece": c.piece, "s": num(c.s), "from": chart_name(c.from), "to": chart_name(c.to)}))
        .collect();
    doc.set("path", Value::String(name));
    doc.set("source", source_name(cli.source));
    doc.set("unitary", matrix(&r.unitary));
    doc.set("alpha_phase", num(r.alpha_phase));
    doc.set("steps", json!(r.steps));
    doc.set("initial_chart", chart_name(r.initial_chart));
    doc.set("final_chart", chart_name(r.final_chart));
    doc.set("crossings", Value::Array(crossings));
    doc.check(Check::at_most(
        "unitarity",
        r.max_unitarity_deviation,
        s.tolerances.transport_unitarity,
    ));
    Ok(())
}

/// Diagonal of the monopole holonomy around a latitude at colatitude
/// `theta`: `exp(i k (j - m) Omega)` with `Omega = 2 pi (1 - cos theta)`.
pub fn monopole_law(s: &Scenario, theta: f64) -> Option<Vec<Complex64>> {
    let Potential::Monopole { charge } = s.model.potential else {
        return None;
    };
    let j = s.spec.j();
    let omega = 2.0 * std::f64::consts::PI * (1.0 - theta.cos());
    let sign = vbquant_core::conventions::MONOPOLE_HOLONOMY_SIGN;
    Some(
        (0..s.spec.dim())
            .map(|m| cis(sign * f64::from(charge) * (j - m as f64) * omega))
            .collect(),
    )
}

/// Colatitude of a path that is one full latitude turn.
pub fn latitude_of(path: &BasePath) -> Option<f64> {
    match path.pieces.as_slice() {
        [(PathPiece::Latitude { theta, sweep, .. }, _)] if (sweep.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-12 => {
            Some(*theta)
        }
        _ => None,
    }
}

fn wilson(cli: &Cli, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let (name, path) = s.path(cli.path.as_deref())?;
    let conn = connection_field(s, cli.source);
    let w = wilson_loop(conn.as_ref(), path)?;
    let n = s.spec.dim();
    let diag: Vec<Complex64> = (0..n).map(|k| w.unitary[(k, k)]).collect();
    let phases: Vec<f64> = diag.iter().map(|z| z.im.atan2(z.re)).collect();
    doc.set("path", Value::String(name));
    doc.set("source", source_name(cli.source));
    doc.set("unitary", matrix(&w.unitary));
    doc.set("trace", complex(w.trace));
    doc.set("alpha_phase", num(w.alpha_phase));
    doc.set("diagonal", vector(&diag));
    doc.set("phases", reals(&phases));
    let t = &s.tolerances;
    doc.check(Check::at_most("unitarity", w.unitary.unitarity_deviation(), t.transport_unitarity));
    if let (BaseSpace::Sphere, Some(theta)) = (s.model.base, latitude_of(path)) {
        if let Some(want) = monopole_law(s, theta) {
            doc.set("expected_diagonal", vector(&want));
            let dev = (&w.unitary - &ComplexMatrix::from_diag(&want)).max_abs();
            doc.check(Check::at_most("holonomy_law", dev, t.holonomy));
        }
    }
    Ok(())
}

/// Boundary rows: the scenario's, or the first basis vector at every q.
pub fn section_rows(s: &Scenario, q_count: usize, psi0: Option<&Vec<Vec<[f64; 2]>>>) -> Vec<Vec<Complex64>> {
    match psi0 {
        Some(rows) => rows
            .iter()
            .map(|r| r.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            .collect(),
        None => {
            let mut e0 = vec![Complex64::new(0.0, 0.0); s.spec.dim()];
            e0[0] = Complex64::new(1.0, 0.0);
            vec![e0; q_count]
        }
    }
}

fn section(cli: &Cli, s: &Scenario, doc: &mut ResultDocument) -> Result<(), CliError> {
    let spec = s
        .file
        .section
        .as_ref()
        .ok_or_else(|| input("the scenario has no `section` entry"))?;
    let rows = section_rows(s, spec.q_points.len(), spec.psi0.as_ref());
    let conn = connection_field(s, cli.source);
    let sec = covariant_section_solve(conn.as_ref(), &spec.q_points, &rows, &spec.p_points)?;
    let values: Vec<Value> = sec
        .values
        .iter()
        .map(|per_q| Value::Array(per_q.iter().map(|v| vector(v)).collect()))
        .collect();
    doc.set("source", source_name(cli.source));
    doc.set("values", Value::Array(values));
    doc.check(Check::at_most("section_residual", sec.residual, s.tolerances.section));
    Ok(())
}
