//! Flat `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use quasihelm::cell1d::TEvaluation;
use quasihelm::halfguide::{Backend, HalfGuideOptions, Method};
use quasihelm::media::{
    CoefficientTable, CutVector, Frequency, MediumSpec, PeriodicCoefficient2D, PeriodicMedium, PiecewiseConstant,
    Profile, Source,
};
use quasihelm::oracle::{ErrorNorm, TruncationPolicy};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("override `{0}` is missing its value")]
    MissingValue(String),
    #[error("override `{0}` must start with `--`")]
    NotAFlag(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

pub const KEYS: &[&str] = &[
    "mu",
    "rho",
    "theta",
    "irrational",
    "omega",
    "method",
    "backend",
    "h",
    "h_theta",
    "order",
    "t_eval",
    "cells",
    "phi",
    "a",
    "interior_mu",
    "interior_rho",
    "source",
    "h_interior",
    "inv_h",
    "reference_h",
    "truncation_target",
    "max_dofs",
    "error_norm",
    "radius_samples",
    "reference_radius",
    "band",
    "window",
    "samples",
    "guide_n",
    "length",
    "step",
    "output",
];

/// Raw key/value pairs in input order of precedence (later wins).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parse the config file text. `#` starts a comment anywhere on a line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            }
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate { line: i + 1, key });
            }
        }
        Ok(Self { entries })
    }

    /// Apply `--key value` pairs; `--key=value` is accepted too.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<(), ConfigError> {
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let flag = a.strip_prefix("--").ok_or_else(|| ConfigError::NotAFlag(a.clone()))?;
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| ConfigError::MissingValue(a.clone()))?;
                    (flag.to_string(), v.clone())
                }
            };
            let key = key.replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            self.entries.insert(key, value.trim().to_string());
        }
        Ok(())
    }

    /// `key = value` lines, sorted by key.
    pub fn echo(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parsed `--key value` override list.
pub fn parse_overrides(args: &[String]) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig::default();
    raw.apply_overrides(args)?;
    Ok(raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryData {
    One,
    Cos,
}

impl BoundaryData {
    pub fn at(self, s: f64) -> Complex64 {
        match self {
            BoundaryData::One => Complex64::new(1.0, 0.0),
            BoundaryData::Cos => Complex64::new((2.0 * std::f64::consts::PI * s).cos(), 0.0),
        }
    }
}

/// Typed configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub medium: PeriodicMedium,
    pub omega: Frequency,
    pub halfguide: HalfGuideOptions,
    pub cells: usize,
    pub phi: BoundaryData,
    pub spec: MediumSpec,
    pub h_interior: f64,
    pub inv_h: Vec<usize>,
    pub reference_h: f64,
    pub truncation: TruncationPolicy,
    pub error_norm: ErrorNorm,
    pub radius_samples: usize,
    pub reference_radius: Option<f64>,
    pub band: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub guide_n: usize,
    pub length: f64,
    pub step: f64,
    pub output: PathBuf,
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// A real number, allowing `p/q` fractions.
pub fn parse_real(key: &str, text: &str) -> Result<f64, ConfigError> {
    let t = text.trim();
    let v = match t.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad(key, format!("bad number {t:?}")))?;
            let q: f64 = q.trim().parse().map_err(|_| bad(key, format!("bad number {t:?}")))?;
            p / q
        }
        None => t.parse().map_err(|_| bad(key, format!("bad number {t:?}")))?,
    };
    if !v.is_finite() {
        return Err(bad(key, format!("{t:?} is not finite")));
    }
    Ok(v)
}

fn parse_positive(key: &str, text: &str) -> Result<f64, ConfigError> {
    let v = parse_real(key, text)?;
    if v <= 0.0 {
        return Err(bad(key, format!("{v} must be positive")));
    }
    Ok(v)
}

fn parse_count(key: &str, text: &str) -> Result<usize, ConfigError> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| bad(key, format!("{text:?} is not a non-negative integer")))
}

fn parse_pair(key: &str, text: &str) -> Result<(f64, f64), ConfigError> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| bad(key, format!("expected two comma-separated numbers, got {text:?}")))?;
    Ok((parse_real(key, a)?, parse_real(key, b)?))
}

/// `name(arg)` -> (name, Some(arg)); `name` -> (name, None).
fn call_syntax(text: &str) -> Option<(&str, Option<&str>)> {
    let t = text.trim();
    match t.split_once('(') {
        Some((name, rest)) => rest.strip_suffix(')').map(|arg| (name.trim(), Some(arg.trim()))),
        None => Some((t, None)),
    }
}

fn read_relative(key: &str, base: &Path, file: &str) -> Result<String, ConfigError> {
    let path = base.join(file);
    std::fs::read_to_string(&path).map_err(|e| ConfigError::Io {
        path: format!("{} (key `{key}`)", path.display()),
        reason: e.to_string(),
    })
}

fn parse_coefficient(key: &str, text: &str, base: &Path, trig: PeriodicCoefficient2D) -> Result<PeriodicCoefficient2D, ConfigError> {
    let lib = |e: quasihelm::Error| bad(key, e.to_string());
    match call_syntax(text) {
        Some(("trig", None)) => Ok(trig),
        Some(("constant", Some(c))) => PeriodicCoefficient2D::constant(parse_real(key, c)?).map_err(lib),
        Some(("table", Some(file))) => {
            let table = CoefficientTable::parse(&read_relative(key, base, file)?).map_err(lib)?;
            PeriodicCoefficient2D::new(Profile::Table(std::sync::Arc::new(table))).map_err(lib)
        }
        _ => Err(bad(key, format!("expected trig, constant(c) or table(FILE), got {text:?}"))),
    }
}

fn parse_interior(key: &str, text: &str, base: &Path, a: f64, preset: PiecewiseConstant) -> Result<PiecewiseConstant, ConfigError> {
    let lib = |e: quasihelm::Error| bad(key, e.to_string());
    match call_syntax(text) {
        Some(("preset", None)) => Ok(preset),
        Some(("constant", Some(c))) => PiecewiseConstant::constant(-a, a, parse_real(key, c)?).map_err(lib),
        Some(("file", Some(file))) => PiecewiseConstant::parse(read_relative(key, base, file)?.trim()).map_err(lib),
        Some(("table", Some(inline))) => PiecewiseConstant::parse(inline).map_err(lib),
        _ => Err(bad(key, format!("expected preset, constant(c), table(x0, .., xk : v1, .., vk) or file(PATH), got {text:?}"))),
    }
}

fn parse_theta(text: &str) -> Result<CutVector, ConfigError> {
    let key = "theta";
    let t = text.trim();
    let lib = |e: quasihelm::Error| bad(key, e.to_string());
    if let Some(deg) = t.strip_suffix("deg") {
        return CutVector::from_angle(parse_real(key, deg)?.to_radians()).map_err(lib);
    }
    if let Some(("angle", Some(rad))) = call_syntax(t) {
        return CutVector::from_angle(parse_real(key, rad)?).map_err(lib);
    }
    let (a, b) = parse_pair(key, t)?;
    CutVector::new(a, b).map_err(lib)
}

impl RunConfig {
    /// Build from raw entries; relative file names and `output` resolve against `base`.
    pub fn from_raw(raw: &RawConfig, base: &Path) -> Result<Self, ConfigError> {
        let get = |k: &str| raw.entries.get(k).map(String::as_str);
        let or = |k: &str, d: &'static str| get(k).unwrap_or(d);

        let mut theta = parse_theta(or("theta", "60deg"))?;
        match or("irrational", "true") {
            "true" | "yes" => theta = theta.assume_irrational(),
            "false" | "no" => {}
            other => return Err(bad("irrational", format!("expected true or false, got {other:?}"))),
        }
        let mu = parse_coefficient("mu", or("mu", "trig"), base, PeriodicCoefficient2D::trig_mu())?;
        let rho = parse_coefficient("rho", or("rho", "trig"), base, PeriodicCoefficient2D::trig_rho())?;
        let medium = PeriodicMedium::new(mu, rho, theta);

        let (re, im) = parse_pair("omega", or("omega", "8, 0.25"))?;
        let omega = Frequency::new(Complex64::new(re, im)).map_err(|e| bad("omega", e.to_string()))?;

        let method = match or("method", "quasi1d") {
            "quasi1d" => Method::Quasi1d,
            "2d" => Method::TwoD,
            other => return Err(bad("method", format!("expected quasi1d or 2d, got {other:?}"))),
        };
        let h = parse_positive("h", or("h", "1/64"))?;
        let mut halfguide = HalfGuideOptions::new(method, h);
        if let Some(v) = get("h_theta") {
            halfguide.h_theta = parse_positive("h_theta", v)?;
        }
        halfguide.order = parse_count("order", or("order", "1"))?;
        if !(1..=4).contains(&halfguide.order) {
            return Err(bad("order", "element order must be 1 to 4"));
        }
        halfguide.t_evaluation = match or("t_eval", "interpolated") {
            "interpolated" => TEvaluation::Interpolated,
            "fresh" => TEvaluation::FreshSolve,
            other => return Err(bad("t_eval", format!("expected interpolated or fresh, got {other:?}"))),
        };
        if let Some(b) = get("backend") {
            halfguide.backend = match b {
                "spectral" => Backend::Spectral,
                "cyclic-reduction" => Backend::CyclicReduction,
                other => return Err(bad("backend", format!("expected spectral or cyclic-reduction, got {other:?}"))),
            };
        }

        let cells = parse_count("cells", or("cells", "4"))?;
        if cells == 0 {
            return Err(bad("cells", "need at least one cell"));
        }
        let phi = match or("phi", "one") {
            "one" => BoundaryData::One,
            "cos" => BoundaryData::Cos,
            other => return Err(bad("phi", format!("expected one or cos, got {other:?}"))),
        };

        let a = parse_positive("a", or("a", "1"))?;
        let preset = MediumSpec::reference_setup();
        let mu_i_text = or("interior_mu", "preset");
        let rho_i_text = or("interior_rho", "preset");
        if a != preset.a && (mu_i_text == "preset" || rho_i_text == "preset") {
            return Err(bad("a", "the interior presets need a = 1"));
        }
        let mu_interior = parse_interior("interior_mu", mu_i_text, base, a, preset.mu_interior)?;
        let rho_interior = parse_interior("interior_rho", rho_i_text, base, a, preset.rho_interior)?;
        let source = match or("source", "bump") {
            "bump" => Some(Source::bump()),
            "none" => None,
            other => return Err(bad("source", format!("expected bump or none, got {other:?}"))),
        };
        let spec = MediumSpec::new(medium.clone(), a, mu_interior, rho_interior, source).map_err(|e| bad("a", e.to_string()))?;
        let h_interior = match get("h_interior") {
            Some(v) => parse_positive("h_interior", v)?,
            None => h,
        };

        let inv_h = or("inv_h", "32, 64, 128, 256")
            .split(',')
            .map(|t| parse_count("inv_h", t))
            .collect::<Result<Vec<_>, _>>()?;
        if inv_h.is_empty() || inv_h.contains(&0) {
            return Err(bad("inv_h", "entries must be positive"));
        }
        let reference_h = parse_positive("reference_h", or("reference_h", "5e-4"))?;
        let mut truncation = TruncationPolicy::default();
        truncation.target = parse_positive("truncation_target", or("truncation_target", "1e-10"))?;
        if truncation.target >= 1.0 {
            return Err(bad("truncation_target", "must be below 1"));
        }
        if let Some(v) = get("max_dofs") {
            truncation.max_dofs = parse_count("max_dofs", v)?;
        }
        let error_norm = match or("error_norm", "approximation") {
            "approximation" => ErrorNorm::ApproximationSpace,
            "union" => ErrorNorm::UnionGrid,
            other => return Err(bad("error_norm", format!("expected approximation or union, got {other:?}"))),
        };
        let radius_samples = parse_count("radius_samples", or("radius_samples", "256"))?;
        if radius_samples == 0 {
            return Err(bad("radius_samples", "need at least one sample"));
        }
        let reference_radius = match or("reference_radius", "auto") {
            "auto" => None,
            v => Some(parse_positive("reference_radius", v)?),
        };
        let band = parse_positive("band", or("band", "0.05"))?;
        let window = parse_pair("window", or("window", "-6, 6"))?;
        if !(window.0 < window.1) {
            return Err(bad("window", "lower end must be below upper end"));
        }
        let samples = parse_count("samples", or("samples", "1201"))?;
        if samples < 2 {
            return Err(bad("samples", "need at least two samples"));
        }
        let guide_n = parse_count("guide_n", or("guide_n", "32"))?;
        let length = parse_positive("length", or("length", "80"))?;
        let step = parse_positive("step", or("step", "0.01"))?;
        let output = base.join(or("output", "out"));
        Ok(Self {
            medium,
            omega,
            halfguide,
            cells,
            phi,
            spec,
            h_interior,
            inv_h,
            reference_h,
            truncation,
            error_norm,
            radius_samples,
            reference_radius,
            band,
            window,
            samples,
            guide_n,
            length,
            step,
            output,
        })
    }
}
