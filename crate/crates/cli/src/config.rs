//! TOML experiment configuration.
//!
//! Parsing runs in three stages: the document is read into a TOML tree,
//! `--override` assignments are applied to that tree, and the typed config is
//! resolved (defaults filled in, parameter arity checked) and validated by
//! assembling the grid, kernels, nonlinearity and initial data. Every problem
//! found in the last stage is reported together, keyed by its dotted path.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use nlwave::kernels::{check_zero_mode, ZERO_MODE_TOL};
use nlwave::nonlinearity::{SampleBox, Tolerance};
use nlwave::{
    EvolutionConfig, Grid, InitialData, KernelSpec, NonlinearitySpec, RealField, SingularKernelDescriptor, WaveSystem,
};

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: GridConfig,
    pub kernel1: KernelConfig,
    pub kernel2: KernelConfig,
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// `exponential`, `higher_order {a, b}`, `gaussian {width}` or `mildly_singular`.
    pub family: String,
    #[serde(default)]
    pub params: Params,
    /// Radial profile for `mildly_singular`; only `exponential` is built in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<String>,
}

impl KernelConfig {
    pub fn named(family: &str) -> Self {
        KernelConfig {
            family: family.into(),
            params: Params::new(),
            descriptor: None,
        }
    }

    pub fn with_params(family: &str, params: &[(&str, f64)]) -> Self {
        KernelConfig {
            params: params_of(params),
            ..Self::named(family)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// `linear`, `quartic {kappa1, kappa2}` or `isotropic_power {kappa, p}`.
    pub family: String,
    #[serde(default)]
    pub params: Params,
}

impl NonlinearityConfig {
    pub fn quartic(kappa1: f64, kappa2: f64) -> Self {
        NonlinearityConfig {
            family: "quartic".into(),
            params: params_of(&[("kappa1", kappa1), ("kappa2", kappa2)]),
        }
    }

    pub fn linear() -> Self {
        NonlinearityConfig {
            family: "linear".into(),
            params: Params::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub phi1: FieldConfig,
    #[serde(default)]
    pub phi2: FieldConfig,
    #[serde(default)]
    pub psi1: FieldConfig,
    #[serde(default)]
    pub psi2: FieldConfig,
}

/// One initial field.
///
/// * `zero`
/// * `gaussian {amplitude, width, center = 0}`: `A·exp(−(x−c)²/w²)` minus its mean
/// * `cosine {amplitude, wavenumber, phase = 0}`: `A·cos(ξx + θ)`
/// * `modes`: a sum of cosines listed under `modes`
/// * `samples`: nodal values listed under `values`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

fn default_shape() -> String {
    "zero".into()
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            shape: default_shape(),
            params: Params::new(),
            modes: Vec::new(),
            values: Vec::new(),
        }
    }
}

impl FieldConfig {
    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Self {
        FieldConfig {
            shape: "gaussian".into(),
            params: params_of(&[("amplitude", amplitude), ("width", width), ("center", center)]),
            ..Default::default()
        }
    }

    pub fn cosine(amplitude: f64, wavenumber: f64) -> Self {
        FieldConfig {
            shape: "cosine".into(),
            params: params_of(&[("amplitude", amplitude), ("wavenumber", wavenumber), ("phase", 0.0)]),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub amplitude: f64,
    pub wavenumber: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub dealias: bool,
}

fn default_threshold() -> f64 {
    1e6
}

fn default_stride() -> usize {
    100
}

impl EvolutionSection {
    pub fn new(dt: f64, t_end: f64) -> Self {
        EvolutionSection {
            dt,
            t_end,
            threshold: default_threshold(),
            stride: default_stride(),
            dealias: false,
        }
    }

    pub fn to_solver(&self) -> EvolutionConfig {
        EvolutionConfig {
            dt: self.dt,
            t_end: self.t_end,
            blowup_threshold: self.threshold,
            stride: self.stride,
            dealias: self.dealias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "yes")]
    pub energy: bool,
    /// Compare every snapshot with the exact linear solution (linear runs only).
    #[serde(default)]
    pub oracle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypotheses: Vec<HypothesisConfig>,
}

fn yes() -> bool {
    true
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            energy: true,
            oracle: false,
            certificate: None,
            hypotheses: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub nu: f64,
}

/// A sampled hypothesis check. Without `u1`/`u2` the box is the symmetric
/// range visited by the run, `[−max|u_i|, max|u_i|]`.
///
/// * `exactness {h = 1e-4, tol = 1e-6}`
/// * `gradient_consistency {h = 1e-5, tol = 1e-6}`
/// * `blowup_growth {nu}`
/// * `global_g_bound {k}`
/// * `global_g_power_bound {c, k, q1, q2}`
///
/// The last three also take `abs_tol` and `rel_tol` (both `1e-9`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisConfig {
    pub check: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<[f64; 2]>,
    #[serde(default = "default_per_axis")]
    pub per_axis: usize,
}

fn default_per_axis() -> usize {
    201
}

impl HypothesisConfig {
    /// Check over the visited range.
    pub fn visited(check: &str, params: &[(&str, f64)]) -> Self {
        HypothesisConfig {
            check: check.into(),
            params: params_of(params),
            u1: None,
            u2: None,
            per_axis: default_per_axis(),
        }
    }

    pub fn sample_box(&self, visited: [f64; 2]) -> SampleBox {
        let u1 = self.u1.unwrap_or([-visited[0], visited[0]]);
        let u2 = self.u2.unwrap_or([-visited[1], visited[1]]);
        let tolerance = Tolerance {
            abs: self.params.get("abs_tol").copied().unwrap_or(1e-9),
            rel: self.params.get("rel_tol").copied().unwrap_or(1e-9),
        };
        SampleBox::new(u1, u2)
            .with_per_axis(self.per_axis)
            .with_tolerance(tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Time-series file name inside the output directory; empty disables it.
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_csv() -> String {
    "timeseries.csv".into()
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv: default_csv(),
            report: default_report(),
        }
    }
}

pub fn params_of(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("bad override `{assignment}`: {reason}")]
    Override { assignment: String, reason: String },
    #[error("{} problem(s) in config:\n{}", .0.len(), list(.0))]
    Invalid(Vec<FieldError>),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

fn list(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    /// Field errors, empty for the other variants.
    pub fn fields(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(errors) => errors,
            _ => &[],
        }
    }
}

#[derive(Default)]
struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Required parameter names and optional ones with their defaults.
struct Arity {
    required: &'static [&'static str],
    optional: &'static [(&'static str, f64)],
}

const NONE: Arity = Arity {
    required: &[],
    optional: &[],
};

const SAMPLE_TOL: [(&str, f64); 2] = [("abs_tol", 1e-9), ("rel_tol", 1e-9)];

fn kernel_arity(family: &str) -> Option<Arity> {
    Some(match family {
        "exponential" | "mildly_singular" => NONE,
        "higher_order" => Arity {
            required: &["a", "b"],
            optional: &[],
        },
        "gaussian" => Arity {
            required: &["width"],
            optional: &[],
        },
        _ => return None,
    })
}

fn nonlinearity_arity(family: &str) -> Option<Arity> {
    Some(match family {
        "linear" => NONE,
        "quartic" => Arity {
            required: &["kappa1", "kappa2"],
            optional: &[],
        },
        "isotropic_power" => Arity {
            required: &["kappa", "p"],
            optional: &[],
        },
        _ => return None,
    })
}

fn shape_arity(shape: &str) -> Option<Arity> {
    Some(match shape {
        "zero" | "modes" | "samples" => NONE,
        "gaussian" => Arity {
            required: &["amplitude", "width"],
            optional: &[("center", 0.0)],
        },
        "cosine" => Arity {
            required: &["amplitude", "wavenumber"],
            optional: &[("phase", 0.0)],
        },
        _ => return None,
    })
}

fn check_arity(check: &str) -> Option<Arity> {
    Some(match check {
        "exactness" => Arity {
            required: &[],
            optional: &[("h", 1e-4), ("tol", 1e-6)],
        },
        "gradient_consistency" => Arity {
            required: &[],
            optional: &[("h", 1e-5), ("tol", 1e-6)],
        },
        "blowup_growth" => Arity {
            required: &["nu"],
            optional: &SAMPLE_TOL,
        },
        "global_g_bound" => Arity {
            required: &["k"],
            optional: &SAMPLE_TOL,
        },
        "global_g_power_bound" => Arity {
            required: &["c", "k", "q1", "q2"],
            optional: &SAMPLE_TOL,
        },
        _ => return None,
    })
}

pub const KERNEL_FAMILIES: &[&str] = &["exponential", "higher_order", "gaussian", "mildly_singular"];
pub const NONLINEARITY_FAMILIES: &[&str] = &["linear", "quartic", "isotropic_power"];
pub const FIELD_SHAPES: &[&str] = &["zero", "gaussian", "cosine", "modes", "samples"];
pub const HYPOTHESIS_CHECKS: &[&str] = &[
    "exactness",
    "gradient_consistency",
    "blowup_growth",
    "global_g_bound",
    "global_g_power_bound",
];

/// Fills optional parameters and reports missing, unknown and non-finite ones.
fn resolve_params(path: &str, params: &mut Params, arity: &Arity, errors: &mut Errors) {
    for name in arity.required {
        if !params.contains_key(*name) {
            errors.push(format!("{path}.params.{name}"), "missing required parameter");
        }
    }
    for &(name, default) in arity.optional {
        params.entry(name.to_owned()).or_insert(default);
    }
    for (name, value) in params.iter() {
        let known = arity.required.contains(&name.as_str()) || arity.optional.iter().any(|(o, _)| o == name);
        if !known {
            errors.push(format!("{path}.params.{name}"), "unknown parameter");
        } else if !value.is_finite() {
            errors.push(format!("{path}.params.{name}"), format!("{value} is not finite"));
        }
    }
}

fn unknown(kind: &str, name: &str, options: &[&str]) -> String {
    format!("unknown {kind} `{name}` (expected one of: {})", options.join(", "))
}

/// The built-in descriptor is shared so the `γ″` symbol cache survives across runs.
fn exponential_descriptor() -> Arc<SingularKernelDescriptor> {
    static SHARED: OnceLock<Arc<SingularKernelDescriptor>> = OnceLock::new();
    SHARED
        .get_or_init(|| Arc::new(SingularKernelDescriptor::exponential()))
        .clone()
}

/// Everything needed to run: the assembled system, data and step schedule.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: Grid,
    pub system: WaveSystem,
    pub init: InitialData,
    pub evolution: EvolutionConfig,
}

/// Parses a TOML document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let tree: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    from_tree(tree, overrides)
}

/// Re-parses an in-memory config with overrides applied.
pub fn reconfigure(cfg: &ExperimentConfig, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let tree = toml::Table::try_from(cfg).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    from_tree(tree, overrides)
}

fn from_tree(mut tree: toml::Table, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    for assignment in overrides {
        apply_override(&mut tree, assignment)?;
    }
    let cfg: ExperimentConfig = toml::Value::Table(tree)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    cfg.resolved()
}

/// The config as TOML, defaults included.
pub fn echo(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("config is representable in TOML")
}

/// Applies `dotted.path=value`. The value is read as a TOML value and falls
/// back to a bare string; numeric path segments index into arrays.
pub fn apply_override(tree: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let fail = |reason: &str| ConfigError::Override {
        assignment: assignment.to_owned(),
        reason: reason.to_owned(),
    };
    let (path, raw) = assignment.split_once('=').ok_or_else(|| fail("expected key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(fail("empty path segment"));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));

    let (last, parents) = keys.split_last().expect("at least one segment");
    let mut slot = tree
        .entry(parents.first().copied().unwrap_or(last).to_owned())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    if parents.is_empty() {
        *slot = value;
        return Ok(());
    }
    for key in parents[1..].iter().chain(std::iter::once(last)) {
        slot = match slot {
            toml::Value::Table(t) => t
                .entry(key.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(items) => {
                let index: usize = key
                    .parse()
                    .map_err(|_| fail(&format!("`{key}` is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(index)
                    .ok_or_else(|| fail(&format!("index {index} out of range for {len} items")))?
            }
            _ => return Err(fail(&format!("cannot descend into `{key}`"))),
        };
    }
    *slot = value;
    Ok(())
}

impl ExperimentConfig {
    /// Fills defaults, then validates by assembling the scenario.
    pub fn resolved(mut self) -> Result<Self, ConfigError> {
        let mut errors = Errors::default();
        self.resolve(&mut errors);
        if errors.0.is_empty() {
            if let Err(ConfigError::Invalid(found)) = self.scenario() {
                errors.0.extend(found);
            }
        }
        if errors.0.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError::Invalid(errors.0))
        }
    }

    fn resolve(&mut self, errors: &mut Errors) {
        for (path, k) in [("kernel1", &mut self.kernel1), ("kernel2", &mut self.kernel2)] {
            match kernel_arity(&k.family) {
                Some(arity) => resolve_params(path, &mut k.params, &arity, errors),
                None => errors.push(
                    format!("{path}.family"),
                    unknown("kernel family", &k.family, KERNEL_FAMILIES),
                ),
            }
            match (k.family.as_str(), k.descriptor.as_deref()) {
                ("mildly_singular", None) => errors.push(format!("{path}.descriptor"), "required for mildly_singular"),
                ("mildly_singular", Some("exponential")) => {}
                ("mildly_singular", Some(other)) => errors.push(
                    format!("{path}.descriptor"),
                    unknown("descriptor", other, &["exponential"]),
                ),
                (_, Some(_)) => errors.push(format!("{path}.descriptor"), "only used by mildly_singular"),
                _ => {}
            }
        }

        let nl = &mut self.nonlinearity;
        match nonlinearity_arity(&nl.family) {
            Some(arity) => resolve_params("nonlinearity", &mut nl.params, &arity, errors),
            None => errors.push(
                "nonlinearity.family",
                unknown("nonlinearity family", &nl.family, NONLINEARITY_FAMILIES),
            ),
        }

        let n = self.grid.n;
        let init = &mut self.initial;
        for (path, field) in [
            ("initial.phi1", &mut init.phi1),
            ("initial.phi2", &mut init.phi2),
            ("initial.psi1", &mut init.psi1),
            ("initial.psi2", &mut init.psi2),
        ] {
            match shape_arity(&field.shape) {
                Some(arity) => resolve_params(path, &mut field.params, &arity, errors),
                None => errors.push(format!("{path}.shape"), unknown("shape", &field.shape, FIELD_SHAPES)),
            }
            match field.shape.as_str() {
                "modes" if field.modes.is_empty() => errors.push(format!("{path}.modes"), "needs at least one mode"),
                "samples" if field.values.len() != n => errors.push(
                    format!("{path}.values"),
                    format!("{} values for a grid of {n} points", field.values.len()),
                ),
                _ => {}
            }
            if field.shape != "modes" && !field.modes.is_empty() {
                errors.push(format!("{path}.modes"), "only used by shape `modes`");
            }
            if field.shape != "samples" && !field.values.is_empty() {
                errors.push(format!("{path}.values"), "only used by shape `samples`");
            }
            if field.values.iter().any(|v| !v.is_finite()) {
                errors.push(format!("{path}.values"), "contains non-finite entries");
            }
        }

        let ev = &self.evolution;
        if !(ev.dt > 0.0 && ev.dt.is_finite()) {
            errors.push("evolution.dt", format!("{} must be positive", ev.dt));
        }
        if !(ev.t_end >= 0.0 && ev.t_end.is_finite()) {
            errors.push("evolution.t_end", format!("{} must be nonnegative", ev.t_end));
        }
        if !(ev.threshold > 0.0) {
            errors.push("evolution.threshold", format!("{} must be positive", ev.threshold));
        }
        if ev.stride == 0 {
            errors.push("evolution.stride", "must be at least 1");
        }

        let diag = &mut self.diagnostics;
        if let Some(c) = diag.certificate {
            if !(c.nu > 0.0 && c.nu.is_finite()) {
                errors.push("diagnostics.certificate.nu", format!("{} must be positive", c.nu));
            }
        }
        if diag.oracle && self.nonlinearity.family != "linear" {
            errors.push(
                "diagnostics.oracle",
                "the exact solution is only available for the linear family",
            );
        }
        for (i, h) in diag.hypotheses.iter_mut().enumerate() {
            let path = format!("diagnostics.hypotheses.{i}");
            match check_arity(&h.check) {
                Some(arity) => resolve_params(&path, &mut h.params, &arity, errors),
                None => errors.push(format!("{path}.check"), unknown("check", &h.check, HYPOTHESIS_CHECKS)),
            }
            if h.per_axis == 0 {
                errors.push(format!("{path}.per_axis"), "must be at least 1");
            }
            for (axis, range) in [("u1", h.u1), ("u2", h.u2)] {
                if let Some([lo, hi]) = range {
                    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                        errors.push(format!("{path}.{axis}"), format!("[{lo}, {hi}] is not a finite range"));
                    }
                }
            }
        }

        for (path, name) in [("output.report", &self.output.report), ("output.csv", &self.output.csv)] {
            if name.contains(['/', '\\']) {
                errors.push(path, "must be a plain file name");
            }
        }
        if self.output.report.is_empty() {
            errors.push("output.report", "must not be empty");
        }
    }

    /// Assembles grid, system and initial data. Call on a resolved config.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let mut errors = Errors::default();
        let grid = match Grid::new(self.grid.n, self.grid.period) {
            Ok(g) => g,
            Err(e) => {
                errors.push("grid", e.to_string());
                return Err(ConfigError::Invalid(errors.0));
            }
        };
        let k1 = build_kernel(&self.kernel1, &grid)
            .map_err(|e| errors.push("kernel1", e))
            .ok();
        let k2 = build_kernel(&self.kernel2, &grid)
            .map_err(|e| errors.push("kernel2", e))
            .ok();
        let nl = build_nonlinearity(&self.nonlinearity)
            .map_err(|e| errors.push("nonlinearity", e))
            .ok();

        let mut fields = Vec::with_capacity(4);
        let init = &self.initial;
        for (path, field) in [
            ("initial.phi1", &init.phi1),
            ("initial.phi2", &init.phi2),
            ("initial.psi1", &init.psi1),
            ("initial.psi2", &init.psi2),
        ] {
            match build_field(field, &grid) {
                Ok(f) => fields.push(f),
                Err(e) => errors.push(path, e),
            }
        }
        // P is undefined on the mean, and energy and Φ apply it to velocities
        // and (for Φ) to displacements
        let needs_p = self.diagnostics.energy || self.diagnostics.certificate.is_some();
        if fields.len() == 4 && needs_p {
            let mut checked = vec![("initial.psi1", &fields[2]), ("initial.psi2", &fields[3])];
            if self.diagnostics.certificate.is_some() {
                checked.extend([("initial.phi1", &fields[0]), ("initial.phi2", &fields[1])]);
            }
            for (path, f) in checked {
                if let Err(e) = check_zero_mode(f, ZERO_MODE_TOL) {
                    errors.push(path, e.to_string());
                }
            }
        }

        let system = match (k1, k2, nl) {
            (Some(k1), Some(k2), Some(nl)) => WaveSystem::new(&grid, k1, k2, nl)
                .map_err(|e| errors.push("kernel1", e.to_string()))
                .ok(),
            _ => None,
        };
        match (system, errors.0.is_empty()) {
            (Some(system), true) => {
                let mut it = fields.into_iter();
                let mut next = || it.next().expect("four fields");
                let init = InitialData::new(next(), next(), next(), next()).expect("fields share the grid");
                Ok(Scenario {
                    grid,
                    system,
                    init,
                    evolution: self.evolution.to_solver(),
                })
            }
            _ => Err(ConfigError::Invalid(errors.0)),
        }
    }
}

fn param(params: &Params, name: &str) -> f64 {
    params[name]
}

fn build_kernel(cfg: &KernelConfig, grid: &Grid) -> Result<KernelSpec, String> {
    let p = &cfg.params;
    let kernel = match cfg.family.as_str() {
        "exponential" => KernelSpec::exponential(),
        "higher_order" => KernelSpec::higher_order(param(p, "a"), param(p, "b")).map_err(|e| e.to_string())?,
        "gaussian" => KernelSpec::gaussian(param(p, "width")).map_err(|e| e.to_string())?,
        "mildly_singular" => KernelSpec::mildly_singular(exponential_descriptor()),
        other => return Err(format!("unknown family `{other}`")),
    };
    kernel.validate_on(grid).map_err(|e| e.to_string())?;
    Ok(kernel)
}

fn build_nonlinearity(cfg: &NonlinearityConfig) -> Result<NonlinearitySpec, String> {
    let p = &cfg.params;
    match cfg.family.as_str() {
        "linear" => Ok(NonlinearitySpec::linear()),
        "quartic" => Ok(NonlinearitySpec::quartic(param(p, "kappa1"), param(p, "kappa2"))),
        "isotropic_power" => {
            NonlinearitySpec::isotropic_power(param(p, "kappa"), param(p, "p")).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown family `{other}`")),
    }
}

/// `ξ` must be a frequency of the grid for `cos(ξx)` to be periodic.
fn check_wavenumber(xi: f64, grid: &Grid) -> Result<(), String> {
    let k = xi * grid.period() / (2.0 * std::f64::consts::PI);
    if (k - k.round()).abs() > 1e-9 * k.abs().max(1.0) {
        return Err(format!("wavenumber {xi} is not a multiple of 2π/period"));
    }
    if xi.abs() > grid.max_frequency() {
        return Err(format!(
            "wavenumber {xi} exceeds the grid's largest frequency {}",
            grid.max_frequency()
        ));
    }
    Ok(())
}

fn build_field(cfg: &FieldConfig, grid: &Grid) -> Result<RealField, String> {
    let p = &cfg.params;
    match cfg.shape.as_str() {
        "zero" => Ok(grid.zeros()),
        "gaussian" => {
            let (a, w, c) = (param(p, "amplitude"), param(p, "width"), param(p, "center"));
            if !(w > 0.0) {
                return Err(format!("width {w} must be positive"));
            }
            Ok(grid.sample(|x| a * (-((x - c) / w).powi(2)).exp()).centered())
        }
        "cosine" => {
            let (a, xi, theta) = (param(p, "amplitude"), param(p, "wavenumber"), param(p, "phase"));
            check_wavenumber(xi, grid)?;
            Ok(grid.sample(|x| a * (xi * x + theta).cos()))
        }
        "modes" => {
            for m in &cfg.modes {
                check_wavenumber(m.wavenumber, grid)?;
            }
            Ok(grid.sample(|x| {
                cfg.modes
                    .iter()
                    .map(|m| m.amplitude * (m.wavenumber * x + m.phase).cos())
                    .sum()
            }))
        }
        "samples" => RealField::new(grid, cfg.values.clone()).map_err(|e| e.to_string()),
        other => Err(format!("unknown shape `{other}`")),
    }
}
