use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use bergbal_core::surface::{
    make_fs_potential, make_perturbed_potential, PerturbationSpec, RadialPotential,
};
use bergbal_core::solvers::SolverOptions;

pub const MAX_LEVEL: usize = 200;
pub const DEFAULT_WINDOW: f64 = 20.0;
pub const DEFAULT_GRID_SIZE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Balance,
    Tbalance,
    Newton,
    Family,
    Expand,
    Beta,
    Fourier,
    Probe,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Balance,
        Command::Tbalance,
        Command::Newton,
        Command::Family,
        Command::Expand,
        Command::Beta,
        Command::Fourier,
        Command::Probe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Balance => "balance",
            Command::Tbalance => "tbalance",
            Command::Newton => "newton",
            Command::Family => "family",
            Command::Expand => "expand",
            Command::Beta => "beta",
            Command::Fourier => "fourier",
            Command::Probe => "probe",
        }
    }

    fn needs_potential(self) -> bool {
        !matches!(self, Command::Fourier | Command::Probe)
    }

    fn needs_levels(self) -> bool {
        self != Command::Fourier
    }

    fn needs_increasing_levels(self) -> bool {
        matches!(self, Command::Family | Command::Expand)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Metric descriptor: the Fubini–Study reference or a perturbation of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialDescriptor {
    Fs,
    GaussianBump {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    Tabulated {
        t: Vec<f64>,
        phi: Vec<f64>,
    },
}

impl PotentialDescriptor {
    pub fn build(&self, q: &QuadratureConfig) -> bergbal_core::Result<RadialPotential> {
        match self {
            PotentialDescriptor::Fs => make_fs_potential(q.window, q.grid_size),
            PotentialDescriptor::GaussianBump {
                amplitude,
                width,
                center,
            } => make_perturbed_potential(
                &PerturbationSpec::GaussianBump {
                    amplitude: *amplitude,
                    width: *width,
                    center: *center,
                },
                q.window,
                q.grid_size,
            ),
            PotentialDescriptor::Tabulated { t, phi } => make_perturbed_potential(
                &PerturbationSpec::Tabulated {
                    t: t.clone(),
                    phi: phi.clone(),
                },
                q.window,
                q.grid_size,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub window: f64,
    pub grid_size: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            window: DEFAULT_WINDOW,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Also write flat CSV tables next to the JSON report.
    pub tables: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            tables: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FourierConfig {
    /// `S = constant + Σ cos[k−1] cos kθ + sin[k−1] sin kθ`.
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    /// Equispaced samples on `[0, 2π)`; replaces the trigonometric form.
    pub samples: Option<Vec<f64>>,
    /// Partition widths, at least two.
    pub widths: Vec<f64>,
    pub m_min: i64,
    pub m_max: i64,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            constant: 0.0,
            cos: Vec::new(),
            sin: Vec::new(),
            samples: None,
            widths: vec![0.5, 0.9],
            m_min: -20,
            m_max: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub seeds: Vec<PotentialDescriptor>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TbalanceConfig {
    /// Keep the torus weight fixed instead of solving for it.
    pub frozen_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub potential: Option<PotentialDescriptor>,
    pub levels: Vec<usize>,
    pub solver: SolverOptions,
    pub quadrature: QuadratureConfig,
    pub output: OutputConfig,
    pub fourier: Option<FourierConfig>,
    pub probe: Option<ProbeConfig>,
    pub tbalance: TbalanceConfig,
}

/// A parsed config together with non-fatal findings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

const TOP_KEYS: &[&str] = &[
    "command",
    "potential",
    "levels",
    "solver",
    "quadrature",
    "output",
    "fourier",
    "probe",
    "tbalance",
];
const SOLVER_KEYS: &[&str] = &[
    "tolerance",
    "max_iterations",
    "recentering",
    "damping",
    "jacobian",
];
const QUADRATURE_KEYS: &[&str] = &["window", "grid_size"];
const OUTPUT_KEYS: &[&str] = &["dir", "tables"];
const FOURIER_KEYS: &[&str] = &["constant", "cos", "sin", "samples", "widths", "m_min", "m_max"];
const PROBE_KEYS: &[&str] = &["seeds"];
const TBALANCE_KEYS: &[&str] = &["frozen_weight"];

fn potential_keys(kind: &str) -> Option<&'static [&'static str]> {
    match kind {
        "fs" => Some(&["type"]),
        "gaussian-bump" => Some(&["type", "amplitude", "width", "center"]),
        "tabulated" => Some(&["type", "t", "phi"]),
        _ => None,
    }
}

struct Collector {
    strict: bool,
    errors: Vec<String>,
    warnings: Vec<String>,
}

impl Collector {
    fn unknown_keys(&mut self, table: &Table, path: &str, known: &[&str]) {
        for key in table.keys().filter(|k| !known.contains(&k.as_str())) {
            let msg = format!("{}: unknown key", join(path, key));
            if self.strict {
                self.errors.push(msg);
            } else {
                self.warnings.push(format!("{msg} (ignored)"));
            }
        }
    }

    /// Deserializes `value` after dropping unknown keys (already reported).
    fn section<T: DeserializeOwned>(&mut self, value: &Value, path: &str, known: &[&str]) -> Option<T> {
        let Some(table) = value.as_table() else {
            self.errors.push(format!("{path}: expected a table"));
            return None;
        };
        self.unknown_keys(table, path, known);
        let kept: Table = table
            .iter()
            .filter(|(k, _)| known.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        match T::deserialize(Value::Table(kept)) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{path}: {}", e.message()));
                None
            }
        }
    }

    fn potential(&mut self, value: &Value, path: &str) -> Option<PotentialDescriptor> {
        let Some(table) = value.as_table() else {
            self.errors.push(format!("{path}: expected a table"));
            return None;
        };
        let Some(kind) = table.get("type").and_then(Value::as_str) else {
            self.errors.push(format!("{path}.type: missing potential type (fs, gaussian-bump, tabulated)"));
            return None;
        };
        let Some(known) = potential_keys(kind) else {
            self.errors.push(format!(
                "{path}.type: unknown potential type `{kind}` (expected fs, gaussian-bump, tabulated)"
            ));
            return None;
        };
        self.section(value, path, known)
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// All validation problems found in a config document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Parses and validates a TOML experiment document. Every problem is
/// reported, not just the first. Unknown keys are errors in strict mode and
/// warnings otherwise.
pub fn parse_config(document: &str, strict: bool) -> Result<Parsed, ConfigErrors> {
    parse_config_with_default(document, None, strict)
}

/// As [`parse_config`], taking `command` from `default` when the document
/// does not name one.
pub fn parse_config_with_default(
    document: &str,
    default: Option<Command>,
    strict: bool,
) -> Result<Parsed, ConfigErrors> {
    let mut root: Table = document
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("malformed document: {}", e.message())]))?;
    if let Some(cmd) = default {
        root.entry("command")
            .or_insert_with(|| Value::String(cmd.name().to_string()));
    }
    let mut c = Collector {
        strict,
        errors: Vec::new(),
        warnings: Vec::new(),
    };
    c.unknown_keys(&root, "", TOP_KEYS);

    let command = match root.get("command") {
        None => {
            c.errors.push("command: missing required field".into());
            None
        }
        Some(v) => match v.as_str().and_then(|s| Command::ALL.into_iter().find(|c| c.name() == s)) {
            Some(cmd) => Some(cmd),
            None => {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                c.errors.push(format!("command: expected one of {}, got {v}", names.join(", ")));
                None
            }
        },
    };

    let potential = root.get("potential").and_then(|v| c.potential(v, "potential"));
    let levels: Option<Vec<i64>> = root.get("levels").and_then(|v| match v.as_array() {
        Some(items) => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                match item.as_integer() {
                    Some(n) => out.push(n),
                    None => c.errors.push(format!("levels[{i}]: expected an integer, got {item}")),
                }
            }
            Some(out)
        }
        None => {
            c.errors.push(format!("levels: expected an array of integers, got {v}"));
            None
        }
    });
    if let Some(levels) = &levels {
        for (i, m) in levels.iter().enumerate() {
            if *m < 1 {
                c.errors.push(format!("levels[{i}]: level {m} below 1"));
            } else if *m > MAX_LEVEL as i64 {
                c.errors.push(format!("levels[{i}]: level {m} above {MAX_LEVEL}"));
            }
        }
    }

    let solver: SolverOptions = root
        .get("solver")
        .and_then(|v| c.section(v, "solver", SOLVER_KEYS))
        .unwrap_or_default();
    if let Err(e) = solver.validate() {
        c.errors.push(format!("solver: {e}"));
    }
    let quadrature: QuadratureConfig = root
        .get("quadrature")
        .and_then(|v| c.section(v, "quadrature", QUADRATURE_KEYS))
        .unwrap_or_default();
    let output: OutputConfig = root
        .get("output")
        .and_then(|v| c.section(v, "output", OUTPUT_KEYS))
        .unwrap_or_default();
    let fourier: Option<FourierConfig> = root
        .get("fourier")
        .and_then(|v| c.section(v, "fourier", FOURIER_KEYS));
    let tbalance: TbalanceConfig = root
        .get("tbalance")
        .and_then(|v| c.section(v, "tbalance", TBALANCE_KEYS))
        .unwrap_or_default();
    let probe = root.get("probe").and_then(|v| {
        let table = v.as_table().or_else(|| {
            c.errors.push("probe: expected a table".into());
            None
        })?;
        c.unknown_keys(table, "probe", PROBE_KEYS);
        let seeds = table.get("seeds").and_then(|s| {
            s.as_array().or_else(|| {
                c.errors.push("probe.seeds: expected an array of potentials".into());
                None
            })
        })?;
        let parsed: Vec<Option<PotentialDescriptor>> = seeds
            .iter()
            .enumerate()
            .map(|(i, s)| c.potential(s, &format!("probe.seeds[{i}]")))
            .collect();
        parsed
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .map(|seeds| ProbeConfig { seeds })
    });

    if let Some(cmd) = command {
        if cmd.needs_potential() && !root.contains_key("potential") {
            c.errors.push("potential: missing required field".into());
        }
        if cmd.needs_levels() && !root.contains_key("levels") {
            c.errors.push("levels: missing required field".into());
        }
        if let Some(levels) = &levels {
            if cmd.needs_levels() && levels.is_empty() {
                c.errors.push("levels: must not be empty".into());
            }
            if cmd.needs_increasing_levels() && levels.windows(2).any(|w| w[1] <= w[0]) {
                c.errors.push(format!("levels: `{cmd}` needs strictly increasing levels"));
            }
            if cmd == Command::Probe && levels.len() != 1 {
                c.errors.push("levels: `probe` takes exactly one level".into());
            }
        }
        match cmd {
            Command::Fourier => match (&fourier, root.contains_key("fourier")) {
                (_, false) => c.errors.push("fourier: missing required section".into()),
                (Some(f), true) => validate_fourier(f, &mut c.errors),
                (None, true) => {}
            },
            Command::Probe => {
                if !root.contains_key("probe") {
                    c.errors.push("probe: missing required section".into());
                } else if let Some(p) = &probe {
                    if p.seeds.is_empty() {
                        c.errors.push("probe.seeds: at least one seed required".into());
                    }
                }
            }
            _ => {}
        }
    }

    if !c.errors.is_empty() {
        return Err(ConfigErrors(c.errors));
    }
    let config = ExperimentConfig {
        command: command.expect("checked"),
        potential,
        levels: levels.unwrap_or_default().into_iter().map(|m| m as usize).collect(),
        solver,
        quadrature,
        output,
        fourier,
        probe,
        tbalance,
    };
    Ok(Parsed {
        config,
        warnings: c.warnings,
    })
}

fn validate_fourier(f: &FourierConfig, errors: &mut Vec<String>) {
    if f.samples.is_some() && (!f.cos.is_empty() || !f.sin.is_empty() || f.constant != 0.0) {
        errors.push("fourier: give either `samples` or trigonometric coefficients, not both".into());
    }
    if f.widths.len() < 2 {
        errors.push(format!("fourier.widths: at least two partitions required, got {}", f.widths.len()));
    }
    if f.m_min > f.m_max {
        errors.push(format!("fourier: m_min = {} exceeds m_max = {}", f.m_min, f.m_max));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_balance() {
        let doc = r#"
            command = "balance"
            levels = [8]
            [potential]
            type = "gaussian-bump"
            amplitude = 0.1
            width = 1
            center = 0
        "#;
        let p = parse_config(doc, true).unwrap();
        assert_eq!(p.config.command, Command::Balance);
        assert_eq!(p.config.levels, vec![8]);
        assert_eq!(p.config.solver, SolverOptions::default());
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn lists_every_missing_field() {
        let err = parse_config("command = \"balance\"", true).unwrap_err();
        let text = err.0.join("\n");
        assert!(text.contains("potential: missing"), "{text}");
        assert!(text.contains("levels: missing"), "{text}");
    }

    #[test]
    fn level_zero() {
        let err = parse_config("command = \"balance\"\nlevels = [0]", true).unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("levels[0]: level 0 below 1")), "{err}");
    }

    #[test]
    fn unknown_keys_strict_and_lenient() {
        let doc = "command = \"fourier\"\ncolour = 1\n[fourier]\ncos = [1.0]\nwidth = 2";
        let err = parse_config(doc, true).unwrap_err();
        assert!(err.0.iter().any(|e| e == "colour: unknown key"), "{err}");
        assert!(err.0.iter().any(|e| e == "fourier.width: unknown key"), "{err}");
        let ok = parse_config(doc, false).unwrap();
        assert_eq!(ok.warnings.len(), 2);
    }

    #[test]
    fn nested_type_errors_carry_paths() {
        let doc = r#"
            command = "probe"
            levels = [8, 9]
            [solver]
            damping = 2.0
            [[probe.seeds]]
            type = "fs"
            [[probe.seeds]]
            type = "spline"
        "#;
        let err = parse_config(doc, true).unwrap_err();
        let text = err.0.join("\n");
        assert!(text.contains("probe.seeds[1].type"), "{text}");
        assert!(text.contains("damping"), "{text}");
        assert!(text.contains("exactly one level"), "{text}");
    }
}
