//! Scenario files: JSON description of an orbit, a gauge model, paths and
//! tolerance overrides, validated before anything is computed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use vbquant_core::conventions::DEFAULT_STEPS_PER_UNIT;
use vbquant_core::fiberq::QuantumFiber;
use vbquant_core::gauge::{BaseChart, BaseSpace, GaugeModel, Potential};
use vbquant_core::orbit::OrbitSpec;
use vbquant_core::su2::Su2;
use vbquant_core::transport::{BasePath, ChartPolicy, PathPiece};

/// Environment variable naming the directory searched for relative
/// `--config` paths.
pub const CONFIG_DIR_ENV: &str = "VBQUANT_CONFIG_DIR";

/// Largest supported `two_j`.
pub const MAX_TWO_J: i64 = 40;

#[derive(Debug)]
pub enum ScenarioError {
    Io { path: PathBuf, message: String },
    Parse { line: usize, column: usize, message: String },
    Validation { field: String, message: String },
    Configuration(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Io { path, message } => write!(f, "cannot read {}: {message}", path.display()),
            ScenarioError::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            ScenarioError::Validation { field, message } => write!(f, "invalid field `{field}`: {message}"),
            ScenarioError::Configuration(m) => write!(f, "configuration error: {m}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    pub two_j: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    #[default]
    Trivial,
    Constant {
        a1: [f64; 3],
        a2: [f64; 3],
    },
    Monopole {
        #[serde(default = "unit_charge")]
        charge: i64,
    },
    PureGauge {
        xi1: [f64; 3],
        xi2: [f64; 3],
    },
    Regauged {
        a1: [f64; 3],
        a2: [f64; 3],
        xi1: [f64; 3],
        xi2: [f64; 3],
    },
}

fn unit_charge() -> i64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub n_t: usize,
    pub n_phi: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub q: [f64; 2],
    #[serde(default)]
    pub p: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathShape {
    /// Full turn at colatitude `theta` (radians).
    Latitude {
        theta: f64,
        #[serde(default)]
        phi0: f64,
    },
    Segment {
        q0: [f64; 2],
        q1: [f64; 2],
        #[serde(default)]
        p0: [f64; 2],
        #[serde(default)]
        p1: [f64; 2],
    },
    Polyline {
        vertices: Vec<Vertex>,
    },
    MomentumCircle {
        q: [f64; 2],
        center: [f64; 2],
        radius: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PathSpec {
    #[serde(flatten)]
    pub shape: PathShape,
    /// Steps per piece.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// `auto`, or the name of a fixed chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charts: Option<String>,
    /// Switch charts where `q[0]` crosses this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub q_points: Vec<[f64; 2]>,
    pub p_points: Vec<[f64; 2]>,
    /// One row per q point, entries as `[re, im]`; defaults to the first
    /// basis vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Table,
}

macro_rules! tolerances {
    ($($name:ident = $default:expr;)*) => {
        /// Tolerance overrides as written in a scenario.
        #[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct ToleranceOverrides {
            $(
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $name: Option<f64>,
            )*
        }

        /// Every tolerance a command can check against.
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct Tolerances {
            $(pub $name: f64,)*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Self { $($name: $default,)* }
            }
        }

        impl Tolerances {
            fn apply(&mut self, o: &ToleranceOverrides) -> Result<(), ScenarioError> {
                $(
                    if let Some(v) = o.$name {
                        if !(v.is_finite() && v > 0.0) {
                            return Err(invalid(concat!("tolerances.", stringify!($name)), "must be positive and finite"));
                        }
                        self.$name = v;
                    }
                )*
                Ok(())
            }

            /// Sets every tolerance to `v`.
            pub fn uniform(v: f64) -> Self {
                Self { $($name: v,)* }
            }
        }
    };
}

tolerances! {
    gram = 1e-10;
    hermiticity = 1e-9;
    spectrum = 1e-8;
    dirac = 1e-8;
    polarization = 1e-8;
    representation = 1e-9;
    unitarity = 1e-9;
    orbit = 1e-10;
    chart = 1e-9;
    poisson = 1e-9;
    lift = 1e-8;
    gauge = 1e-6;
    equivalence = 1e-8;
    anti_hermiticity = 1e-9;
    linearity = 1e-9;
    holonomy = 1e-6;
    transport_unitarity = 1e-8;
    reversal = 1e-8;
    source = 1e-6;
    total_space = 1e-5;
    section = 1e-12;
}

/// Scenario as written on disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub orbit: OrbitSection,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub paths: BTreeMap<String, PathSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerances: ToleranceOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputFormat>,
}

fn is_default(t: &ToleranceOverrides) -> bool {
    *t == ToleranceOverrides::default()
}

impl ScenarioFile {
    pub fn minimal(two_j: i64) -> Self {
        Self {
            orbit: OrbitSection { two_j },
            model: ModelSpec::Trivial,
            quadrature: None,
            paths: BTreeMap::new(),
            tolerances: ToleranceOverrides::default(),
            section: None,
            output: None,
        }
    }
}

/// A validated scenario with its model built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub spec: OrbitSpec,
    pub model: GaugeModel,
    pub fiber: QuantumFiber,
    pub paths: BTreeMap<String, BasePath>,
    pub tolerances: Tolerances,
}

/// Resolves a `--config` argument: as given if it exists, otherwise under
/// the directory named by [`CONFIG_DIR_ENV`].
pub fn resolve_config_path(path: &Path) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    match std::env::var_os(CONFIG_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            // data errors name the offending field in their message
            ScenarioError::Validation {
                field: format!("line {}, column {}", e.line(), e.column()),
                message: e.to_string(),
            }
        } else {
            ScenarioError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        }
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let resolved = resolve_config_path(path);
    let text = std::fs::read_to_string(&resolved).map_err(|e| ScenarioError::Io {
        path: resolved.clone(),
        message: e.to_string(),
    })?;
    Scenario::validate(parse_scenario(&text)?)
}

fn su2(field: &str, c: [f64; 3]) -> Result<Su2, ScenarioError> {
    if c.iter().all(|x| x.is_finite()) {
        Ok(Su2(c))
    } else {
        Err(invalid(field, "coefficients must be finite"))
    }
}

fn finite2(field: &str, v: [f64; 2]) -> Result<[f64; 2], ScenarioError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(invalid(field, "coordinates must be finite"))
    }
}

pub fn parse_chart(name: &str) -> Option<BaseChart> {
    match name {
        "global" => Some(BaseChart::Global),
        "regauged" => Some(BaseChart::Regauged),
        "north" => Some(BaseChart::North),
        "south" => Some(BaseChart::South),
        _ => None,
    }
}

impl Scenario {
    pub fn validate(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let two_j = file.orbit.two_j;
        if !(0..=MAX_TWO_J).contains(&two_j) {
            return Err(invalid("orbit.two_j", format!("must be an integer in 0..={MAX_TWO_J}")));
        }
        let spec = OrbitSpec::new(two_j as u32);

        let potential = match file.model {
            ModelSpec::Trivial => Potential::Trivial,
            ModelSpec::Constant { a1, a2 } => Potential::Constant {
                a: [su2("model.a1", a1)?, su2("model.a2", a2)?],
            },
            ModelSpec::Monopole { charge } => {
                if charge.unsigned_abs() > 1000 {
                    return Err(invalid("model.charge", "must be an integer of magnitude at most 1000"));
                }
                Potential::Monopole { charge: charge as i32 }
            }
            ModelSpec::PureGauge { xi1, xi2 } => Potential::Regauged {
                a: [Su2::ZERO; 2],
                xi: [su2("model.xi1", xi1)?, su2("model.xi2", xi2)?],
            },
            ModelSpec::Regauged { a1, a2, xi1, xi2 } => Potential::Regauged {
                a: [su2("model.a1", a1)?, su2("model.a2", a2)?],
                xi: [su2("model.xi1", xi1)?, su2("model.xi2", xi2)?],
            },
        };

        let fiber = match &file.quadrature {
            None => QuantumFiber::new(spec),
            Some(q) => {
                if q.n_t == 0 || q.n_phi == 0 {
                    return Err(invalid("quadrature", "n_t and n_phi must be positive"));
                }
                QuantumFiber::with_rule(spec, q.n_t, q.n_phi)
            }
        }
        .map_err(|e| ScenarioError::Configuration(format!("quadrature: {e}")))?;

        let model = GaugeModel::new(spec, potential).map_err(|e| ScenarioError::Configuration(e.to_string()))?;

        let mut tolerances = Tolerances::default();
        tolerances.apply(&file.tolerances)?;

        let mut paths = BTreeMap::new();
        for (name, p) in &file.paths {
            paths.insert(name.clone(), build_path(name, p, &model)?);
        }

        if let Some(s) = &file.section {
            if s.q_points.is_empty() || s.p_points.is_empty() {
                return Err(invalid("section", "q_points and p_points must be non-empty"));
            }
            if let Some(rows) = &s.psi0 {
                if rows.len() != s.q_points.len() || rows.iter().any(|r| r.len() != spec.dim()) {
                    return Err(invalid("section.psi0", "one row of 2j + 1 entries per q point"));
                }
            }
        }

        Ok(Self {
            file,
            spec,
            model,
            fiber,
            paths,
            tolerances,
        })
    }

    pub fn path(&self, name: Option<&str>) -> Result<(String, &BasePath), ScenarioError> {
        match name {
            Some(n) => self
                .paths
                .get(n)
                .map(|p| (n.to_string(), p))
                .ok_or_else(|| invalid("--path", format!("no path named `{n}` in the scenario"))),
            None if self.paths.len() == 1 => {
                let (n, p) = self.paths.iter().next().expect("one path");
                Ok((n.clone(), p))
            }
            None => Err(invalid("--path", "name one of the scenario's paths")),
        }
    }
}

fn build_path(name: &str, spec: &PathSpec, model: &GaugeModel) -> Result<BasePath, ScenarioError> {
    let field = |f: &str| format!("paths.{name}.{f}");
    let steps = spec.steps.unwrap_or(DEFAULT_STEPS_PER_UNIT);
    if steps == 0 {
        return Err(invalid(field("steps"), "must be positive"));
    }
    let path = match &spec.shape {
        PathShape::Latitude { theta, phi0 } => {
            if !(theta.is_finite() && *theta > 0.0 && *theta < PI && phi0.is_finite()) {
                return Err(invalid(field("theta"), "must lie strictly between 0 and pi"));
            }
            BasePath::new(vec![(
                PathPiece::Latitude {
                    theta: *theta,
                    phi0: *phi0,
                    sweep: 2.0 * PI,
                },
                steps,
            )])
        }
        PathShape::Segment { q0, q1, p0, p1 } => BasePath::segment(
            finite2(&field("q0"), *q0)?,
            finite2(&field("q1"), *q1)?,
            finite2(&field("p0"), *p0)?,
            finite2(&field("p1"), *p1)?,
            steps,
        ),
        PathShape::Polyline { vertices } => {
            let mut vs = Vec::with_capacity(vertices.len());
            for (i, v) in vertices.iter().enumerate() {
                vs.push((
                    finite2(&field(&format!("vertices[{i}].q")), v.q)?,
                    finite2(&field(&format!("vertices[{i}].p")), v.p)?,
                ));
            }
            BasePath::polyline(&vs, steps)
        }
        PathShape::MomentumCircle { q, center, radius } => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(invalid(field("radius"), "must be positive"));
            }
            BasePath::momentum_circle(finite2(&field("q"), *q)?, finite2(&field("center"), *center)?, *radius, steps)
        }
    }
    .map_err(|e| invalid(field("kind"), e.to_string()))?;

    let policy = match (spec.charts.as_deref(), spec.split) {
        (_, Some(v)) => {
            if model.base != BaseSpace::Sphere || !(v.is_finite() && v > 0.0 && v < PI) {
                return Err(invalid(field("split"), "needs a sphere model and 0 < split < pi"));
            }
            ChartPolicy::Boundary {
                coord: 0,
                value: v,
                below: BaseChart::North,
                above: BaseChart::South,
            }
        }
        (None | Some("auto"), None) => ChartPolicy::Auto,
        (Some(c), None) => match parse_chart(c) {
            Some(chart) if model.charts().contains(&chart) => ChartPolicy::Fixed(chart),
            _ => return Err(invalid(field("charts"), format!("`{c}` is not a chart of this model"))),
        },
    };
    Ok(path.with_charts(policy))
}
