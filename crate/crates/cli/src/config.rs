//! Flat `key = value` run configuration with dotted keys.
//!
//! Resolution order: built-in defaults, then the config file, then
//! `QSR_*` environment variables, then command-line overrides. The
//! environment variable for `bath.n_modes` is `QSR_BATH__N_MODES`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qsr::kernel::{chi, CutoffKind, CutoffSpec};
use qsr::oracle::{BathDiscretization, PropagatorKind, QuadratureRule};
use qsr::spin::{ladder, pauli, SpinObservable};
use qsr::C64;

pub const ENV_PREFIX: &str = "QSR_";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected key = value")]
    Syntax { path: String, line: usize },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for {key}: {message}")]
    Value { key: String, message: String },
    #[error("invalid cutoff: {0}")]
    Cutoff(String),
    #[error("golden-rule condition violated: chi(2 beta) = {0}")]
    GoldenRule(f64),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Every recognised key with its default.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("beta", "1.0"),
    ("g", "0.1"),
    ("g_list", "0.2,0.1,0.05"),
    ("cutoff.kind", "gaussian"),
    ("cutoff.lambda", "4.0"),
    ("times.t_max", "10.0"),
    ("times.n_points", "101"),
    ("bath.omega_max", "16.0"),
    ("bath.n_modes", "200"),
    ("bath.rule", "midpoint"),
    ("oracle.excitation_cap", "2"),
    ("oracle.dim_budget", "4000000"),
    ("oracle.propagator", "auto"),
    ("oracle.observable", "sigma3"),
    ("oracle.window", "auto"),
    ("oracle.grid_step", "0.5"),
    ("evolve.initial", "up"),
    ("evolve.observable", "bloch"),
    ("sweep.axis", "n_modes"),
    ("sweep.values", "50,100,200"),
    ("sweep.watch", "kernel"),
    ("tolerances.quad_abs", "1e-9"),
    ("tolerances.principal_value", "1e-10"),
    ("tolerances.tail", "1e-8"),
    ("tolerances.kernel", "1e-4"),
    ("tolerances.krylov", "1e-11"),
    ("output.directory", "qsr-out"),
    ("output.formats", "csv,json,svg"),
    ("seed", "0"),
];

/// Raw resolved key/value pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if !self.values.contains_key(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        &self.values[key]
    }

    /// Overlay `key = value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.merge_text(&text, &path.display().to_string())
    }

    /// Apply `QSR_SECTION__KEY=value` variables from `vars`.
    pub fn merge_env<I>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut found: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|s| (env_to_key(s), v)))
            .collect();
        found.sort();
        for (k, v) in found {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn pairs(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

/// `BATH__N_MODES` → `bath.n_modes`.
pub fn env_to_key(suffix: &str) -> String {
    suffix.to_ascii_lowercase().replace("__", ".")
}

/// `bath.n_modes` → `QSR_BATH__N_MODES`.
pub fn key_to_env(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "__").to_ascii_uppercase())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NModes,
    ExcitationCap,
    OmegaMax,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NModes => "n_modes",
            Self::ExcitationCap => "excitation_cap",
            Self::OmegaMax => "omega_max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepWatch {
    Kernel,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub excitation_cap: usize,
    pub dim_budget: usize,
    pub propagator: PropagatorKind,
    pub observable: (String, SpinObservable),
    /// `None` = `3/(2 g_min² Re d₁)` capped by the working window.
    pub window: Option<f64>,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub initial: (String, [C64; 2]),
    /// `None` = Bloch vector.
    pub observable: Option<(String, SpinObservable)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub watch: SweepWatch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub quad_abs: f64,
    pub principal_value: f64,
    pub tail: f64,
    pub kernel: f64,
    pub krylov: f64,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub g: f64,
    pub g_list: Vec<f64>,
    pub cutoff: CutoffSpec,
    pub t_max: f64,
    pub n_points: usize,
    pub bath: BathDiscretization,
    pub oracle: OracleConfig,
    pub evolve: EvolveConfig,
    pub sweep: SweepConfig,
    pub tolerances: Tolerances,
    pub output_directory: PathBuf,
    pub formats: Formats,
    pub seed: u64,
    raw: RawConfig,
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

fn float(raw: &RawConfig, key: &str) -> Result<f64> {
    let v: f64 = raw.get(key).parse().map_err(|_| bad(key, format!("'{}' is not a number", raw.get(key))))?;
    if !v.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(v)
}

fn positive(raw: &RawConfig, key: &str) -> Result<f64> {
    let v = float(raw, key)?;
    if v <= 0.0 {
        return Err(bad(key, "must be positive"));
    }
    Ok(v)
}

fn count(raw: &RawConfig, key: &str) -> Result<usize> {
    raw.get(key)
        .parse()
        .map_err(|_| bad(key, format!("'{}' is not a nonnegative integer", raw.get(key))))
}

fn float_list(raw: &RawConfig, key: &str) -> Result<Vec<f64>> {
    let text = raw.get(key);
    if text.trim().is_empty() {
        return Err(bad(key, "list must not be empty"));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(key, format!("'{}' is not a number", s.trim())))
        })
        .collect()
}

/// `sigma1 | sigma2 | sigma3 | identity | plus | zero | minus`.
pub fn parse_observable(name: &str) -> Option<SpinObservable> {
    match name {
        "sigma1" => pauli(1).ok(),
        "sigma2" => pauli(2).ok(),
        "sigma3" => pauli(3).ok(),
        "identity" => Some(SpinObservable::identity()),
        "plus" => ladder(1).ok(),
        "zero" => ladder(0).ok(),
        "minus" => ladder(-1).ok(),
        _ => None,
    }
}

/// `up | down | plus_x | plus_y` or four reals `re0,im0,re1,im1`.
pub fn parse_spinor(text: &str) -> Option<[C64; 2]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match text {
        "up" => Some([one, zero]),
        "down" => Some([zero, one]),
        "plus_x" => Some([one * r, one * r]),
        "plus_y" => Some([one * r, C64::new(0.0, r)]),
        other => {
            let v: Vec<f64> = other.split(',').map(|s| s.trim().parse().ok()).collect::<Option<_>>()?;
            (v.len() == 4).then(|| [C64::new(v[0], v[1]), C64::new(v[2], v[3])])
        }
    }
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let beta = positive(&raw, "beta")?;
        let g = float(&raw, "g")?;
        if g < 0.0 {
            return Err(bad("g", "must be nonnegative"));
        }
        let g_list = float_list(&raw, "g_list")?;
        if g_list.iter().any(|&x| x < 0.0) {
            return Err(bad("g_list", "couplings must be nonnegative"));
        }

        let kind: CutoffKind = raw
            .get("cutoff.kind")
            .parse()
            .map_err(|_| ConfigError::Cutoff(format!("unknown kind '{}'", raw.get("cutoff.kind"))))?;
        let lambda: f64 = raw
            .get("cutoff.lambda")
            .parse()
            .map_err(|_| ConfigError::Cutoff(format!("lambda '{}' is not a number", raw.get("cutoff.lambda"))))?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ConfigError::Cutoff(format!("lambda must be positive, got {lambda}")));
        }
        let cutoff = CutoffSpec::new(kind, lambda).map_err(|e| ConfigError::Cutoff(e.to_string()))?;
        let chi_2b = chi(&cutoff, 2.0 * beta).map_err(|e| ConfigError::Cutoff(e.to_string()))?;
        if !(chi_2b > 0.0) {
            return Err(ConfigError::GoldenRule(chi_2b));
        }

        let t_max = float(&raw, "times.t_max")?;
        if t_max < 0.0 {
            return Err(bad("times.t_max", "must be nonnegative"));
        }
        let n_points = count(&raw, "times.n_points")?;
        if n_points == 0 {
            return Err(bad("times.n_points", "must be at least 1"));
        }

        let rule: QuadratureRule = raw.get("bath.rule").parse().map_err(|_| bad("bath.rule", "expected midpoint or gauss"))?;
        let n_modes = count(&raw, "bath.n_modes")?;
        if n_modes == 0 {
            return Err(bad("bath.n_modes", "must be at least 1"));
        }
        let tolerances = Tolerances {
            quad_abs: positive(&raw, "tolerances.quad_abs")?,
            principal_value: positive(&raw, "tolerances.principal_value")?,
            tail: positive(&raw, "tolerances.tail")?,
            kernel: positive(&raw, "tolerances.kernel")?,
            krylov: positive(&raw, "tolerances.krylov")?,
        };
        let bath = BathDiscretization {
            omega_max: positive(&raw, "bath.omega_max")?,
            n_modes,
            rule,
            tail_tol: tolerances.tail,
        };

        let obs_name = raw.get("oracle.observable").to_string();
        let obs = parse_observable(&obs_name).ok_or_else(|| bad("oracle.observable", format!("unknown observable '{obs_name}'")))?;
        let window = match raw.get("oracle.window") {
            "auto" => None,
            _ => Some(positive(&raw, "oracle.window")?),
        };
        let oracle = OracleConfig {
            excitation_cap: count(&raw, "oracle.excitation_cap")?,
            dim_budget: count(&raw, "oracle.dim_budget")?,
            propagator: raw
                .get("oracle.propagator")
                .parse()
                .map_err(|_| bad("oracle.propagator", "expected auto, dense or krylov"))?,
            observable: (obs_name, obs),
            window,
            grid_step: positive(&raw, "oracle.grid_step")?,
        };

        let init = raw.get("evolve.initial").to_string();
        let spinor = parse_spinor(&init).ok_or_else(|| bad("evolve.initial", format!("unknown spinor '{init}'")))?;
        let norm = (spinor[0].norm_sqr() + spinor[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(bad("evolve.initial", format!("spinor norm is {norm}, expected 1")));
        }
        let ev_obs = match raw.get("evolve.observable") {
            "bloch" => None,
            name => Some((
                name.to_string(),
                parse_observable(name).ok_or_else(|| bad("evolve.observable", format!("unknown observable '{name}'")))?,
            )),
        };

        let axis = match raw.get("sweep.axis") {
            "n_modes" => SweepAxis::NModes,
            "excitation_cap" => SweepAxis::ExcitationCap,
            "omega_max" => SweepAxis::OmegaMax,
            other => return Err(bad("sweep.axis", format!("unknown axis '{other}'"))),
        };
        let values = float_list(&raw, "sweep.values")?;
        let integral = matches!(axis, SweepAxis::NModes | SweepAxis::ExcitationCap);
        if values.iter().any(|&v| v < 0.0 || (integral && v.fract() != 0.0)) {
            return Err(bad("sweep.values", format!("values do not fit axis {}", axis.name())));
        }
        let watch = match raw.get("sweep.watch") {
            "kernel" => SweepWatch::Kernel,
            "error" => SweepWatch::Error,
            other => return Err(bad("sweep.watch", format!("expected kernel or error, got '{other}'"))),
        };

        let mut formats = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for f in raw.get("output.formats").split(',').map(str::trim) {
            match f {
                "csv" => formats.csv = true,
                "json" => formats.json = true,
                "svg" => formats.svg = true,
                other => return Err(bad("output.formats", format!("unknown format '{other}'"))),
            }
        }
        let seed = raw.get("seed").parse().map_err(|_| bad("seed", "expected an unsigned integer"))?;

        Ok(Self {
            beta,
            g,
            g_list,
            cutoff,
            t_max,
            n_points,
            bath,
            oracle,
            evolve: EvolveConfig {
                initial: (init, spinor),
                observable: ev_obs,
            },
            sweep: SweepConfig { axis, values, watch },
            tolerances,
            output_directory: PathBuf::from(raw.get("output.directory")),
            formats,
            seed,
            raw,
        })
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    /// `n_points` equally spaced times on `[0, t_max]` (`[0]` for one point).
    pub fn time_grid(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![0.0];
        }
        let n = self.n_points - 1;
        (0..=n).map(|i| self.t_max * i as f64 / n as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<RunConfig> {
        let mut raw = RawConfig::default();
        raw.merge_text(text, "test")?;
        RunConfig::from_raw(raw)
    }

    #[test]
    fn defaults_are_valid() {
        let c = resolve("").unwrap();
        assert_eq!(c.beta, 1.0);
        assert_eq!(c.cutoff.lambda(), 4.0);
        assert_eq!(c.bath.n_modes, 200);
        assert_eq!(c.g_list, vec![0.2, 0.1, 0.05]);
        assert_eq!(c.time_grid().len(), 101);
    }

    #[test]
    fn file_syntax() {
        let c = resolve("# comment\nbeta = 2.0  # trailing\n\ncutoff.lambda=3\n").unwrap();
        assert_eq!(c.beta, 2.0);
        assert_eq!(c.cutoff.lambda(), 3.0);
        assert!(matches!(resolve("beta 2"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(resolve("nope = 1"), Err(ConfigError::UnknownKey(_))));
    }

    #[test]
    fn nonpositive_lambda_is_an_invalid_cutoff() {
        for text in ["cutoff.lambda = 0", "cutoff.lambda = -1", "cutoff.lambda = x"] {
            let e = resolve(text).unwrap_err();
            assert!(e.to_string().starts_with("invalid cutoff"), "{e}");
        }
        assert!(matches!(resolve("cutoff.kind = box"), Err(ConfigError::Cutoff(_))));
    }

    #[test]
    fn golden_rule_check_at_load() {
        // χ(2β) underflows to zero for a field far beyond the cutoff
        assert!(matches!(resolve("beta = 1e3\ncutoff.lambda = 1"), Err(ConfigError::GoldenRule(_))));
    }

    #[test]
    fn env_mapping_round_trips() {
        for (k, _) in DEFAULTS {
            let env = key_to_env(k);
            assert_eq!(env_to_key(env.strip_prefix(ENV_PREFIX).unwrap()), *k);
        }
        let mut raw = RawConfig::default();
        raw.merge_env(vec![
            ("QSR_BATH__N_MODES".to_string(), "50".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ])
        .unwrap();
        assert_eq!(raw.get("bath.n_modes"), "50");
        assert!(raw.merge_env(vec![("QSR_BOGUS".to_string(), "1".to_string())]).is_err());
    }

    #[test]
    fn spinors_and_observables() {
        assert!(parse_spinor("0.6,0,0,0.8").is_some());
        assert!(parse_spinor("1,2,3").is_none());
        assert!(resolve("evolve.initial = 1,0,1,0").is_err());
        assert!(parse_observable("plus").is_some());
        assert!(resolve("oracle.observable = sigma4").is_err());
    }

    #[test]
    fn single_point_grid_is_origin() {
        let c = resolve("times.n_points = 1").unwrap();
        assert_eq!(c.time_grid(), vec![0.0]);
        assert!(resolve("times.n_points = 0").is_err());
    }

    #[test]
    fn sweep_validation() {
        assert!(resolve("sweep.values =").is_err());
        assert!(resolve("sweep.axis = excitation_cap\nsweep.values = 1.5").is_err());
        assert!(resolve("sweep.axis = depth").is_err());
    }
}
