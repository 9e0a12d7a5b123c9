//! Experiment configuration: a `key=value` text format with `#` comments.
//!
//! Every key has a default, and the effective value of every key is echoed
//! into the report, so an archived config plus its report fully determine a
//! rerun. Validation collects all violations rather than stopping at the
//! first.

use mwlp_core::linalg::SymMat;
use mwlp_core::weights::MatrixWeight;
use std::collections::BTreeMap;
use std::fmt;

/// Experiment kinds driven by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ApCheck,
    Reduce,
    Norms,
    Equivalence,
    Wavelet,
    Sobolev,
    Inequalities,
    Riesz,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ApCheck => "ap-check",
            ExperimentKind::Reduce => "reduce",
            ExperimentKind::Norms => "norms",
            ExperimentKind::Equivalence => "equivalence",
            ExperimentKind::Wavelet => "wavelet",
            ExperimentKind::Sobolev => "sobolev",
            ExperimentKind::Inequalities => "inequalities",
            ExperimentKind::Riesz => "riesz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ap-check" => ExperimentKind::ApCheck,
            "reduce" => ExperimentKind::Reduce,
            "norms" => ExperimentKind::Norms,
            "equivalence" => ExperimentKind::Equivalence,
            "wavelet" => ExperimentKind::Wavelet,
            "sobolev" => ExperimentKind::Sobolev,
            "inequalities" => ExperimentKind::Inequalities,
            "riesz" => ExperimentKind::Riesz,
            _ => return None,
        })
    }
}

/// Wavelet family selector in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletChoice {
    Meyer,
    Daubechies(u32),
}

impl fmt::Display for WaveletChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveletChoice::Meyer => write!(f, "meyer"),
            WaveletChoice::Daubechies(n) => write!(f, "daubechies{n}"),
        }
    }
}

/// A fully validated experiment configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid_j: u32,
    /// Optional second grid for refinement-trend comparisons.
    pub grid_j2: Option<u32>,
    pub dim: usize,
    pub m: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub homogeneous: bool,
    pub sobolev_k: u32,
    pub riesz_beta: f64,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: String,
    pub weight: MatrixWeight,
    pub wavelet: WaveletChoice,
    /// The raw echoed key/value map, defaults included.
    echoed: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Every key with its effective value, for reports and hashing.
    pub fn echoed(&self) -> &BTreeMap<String, String> {
        &self.echoed
    }

    /// Canonical one-line-per-key text form of the effective config.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.echoed {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// A parse failure (bad syntax or unknown key) with its line number.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// A validation failure naming the offending field.
#[derive(Debug, Clone)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field {}: {}", self.field, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Parse(ParseError),
    /// All validation violations, collected.
    Validation(Vec<ValidationError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(e) => write!(f, "parse error: {e}"),
            ConfigError::Validation(errors) => {
                writeln!(f, "invalid configuration:")?;
                for e in errors {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "grid_j",
    "grid_j2",
    "dim",
    "m",
    "p",
    "q",
    "alpha",
    "homogeneous",
    "sobolev_k",
    "riesz_beta",
    "trials",
    "seed",
    "out",
    "weight.model",
    "weight.m",
    "weight.a",
    "weight.center",
    "weight.matrix",
    "weight.angle_freq",
    "wavelet",
];

/// Parses the raw `key=value` lines; `#` starts a comment. Unknown keys and
/// malformed lines are parse errors with their line number.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ParseError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ParseError {
            line,
            message: format!("expected key=value, got {content:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ParseError {
                line,
                message: format!("unknown key {key:?}"),
            });
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

struct Validator<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<ValidationError>,
}

impl<'a> Validator<'a> {
    fn get_parsed<T: std::str::FromStr>(&mut self, key: &str, default: T) -> T {
        match self.map.get(key) {
            None => default,
            Some(raw) => match raw.parse::<T>() {
                Ok(v) => v,
                Err(_) => {
                    self.errors.push(ValidationError {
                        field: key.to_string(),
                        message: format!("cannot parse {raw:?}"),
                    });
                    default
                }
            },
        }
    }

    fn fail(&mut self, field: &str, message: String) {
        self.errors.push(ValidationError {
            field: field.to_string(),
            message,
        });
    }

    fn float_list(&mut self, key: &str, default: Vec<f64>) -> Vec<f64> {
        match self.map.get(key) {
            None => default,
            Some(raw) => {
                let parsed: Result<Vec<f64>, _> =
                    raw.split(',').map(|t| t.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(v) => v,
                    Err(_) => {
                        self.fail(key, format!("cannot parse float list {raw:?}"));
                        default
                    }
                }
            }
        }
    }
}

/// Parses and validates a config text. On success every key's effective
/// value (defaults included) is recorded for the report echo.
pub fn parse_config(text: &str, kind_override: Option<ExperimentKind>) -> Result<ExperimentConfig, ConfigError> {
    let map = parse_key_values(text).map_err(ConfigError::Parse)?;
    let mut v = Validator {
        map: &map,
        errors: Vec::new(),
    };

    let kind = match kind_override {
        Some(k) => k,
        None => {
            let name = map.get("kind").cloned().unwrap_or_else(|| "norms".into());
            match ExperimentKind::parse(&name) {
                Some(k) => k,
                None => {
                    v.fail("kind", format!("unknown experiment kind {name:?}"));
                    ExperimentKind::Norms
                }
            }
        }
    };

    let grid_j: u32 = v.get_parsed("grid_j", 10);
    if !(4..=14).contains(&grid_j) {
        v.fail("grid_j", format!("{grid_j} outside [4, 14]"));
    }
    let grid_j2: Option<u32> = map.get("grid_j2").map(|raw| {
        raw.parse().unwrap_or_else(|_| {
            v.errors.push(ValidationError {
                field: "grid_j2".into(),
                message: format!("cannot parse {raw:?}"),
            });
            grid_j
        })
    });
    if let Some(j2) = grid_j2 {
        if !(4..=14).contains(&j2) {
            v.fail("grid_j2", format!("{j2} outside [4, 14]"));
        }
    }
    let dim: usize = v.get_parsed("dim", 1);
    if dim != 1 && dim != 2 {
        v.fail("dim", format!("{dim} not in {{1, 2}}"));
    }
    let mut m: usize = v.get_parsed("m", 1);
    if !(1..=3).contains(&m) {
        v.fail("m", format!("{m} outside [1, 3]"));
        m = 1;
    }
    let p: f64 = v.get_parsed("p", 2.0);
    if !(p > 0.0 && p <= 16.0) {
        v.fail("p", format!("{p} outside (0, 16]"));
    }
    let q: f64 = match map.get("q").map(|s| s.as_str()) {
        None => 2.0,
        Some("inf") => f64::INFINITY,
        Some(raw) => raw.parse().unwrap_or_else(|_| {
            v.errors.push(ValidationError {
                field: "q".into(),
                message: format!("cannot parse {raw:?} (use a positive number or `inf`)"),
            });
            2.0
        }),
    };
    if !(q > 0.0) {
        v.fail("q", format!("{q} must be positive"));
    }
    let alpha: f64 = v.get_parsed("alpha", 0.0);
    if !(-8.0..=8.0).contains(&alpha) {
        v.fail("alpha", format!("{alpha} outside [-8, 8]"));
    }
    let homogeneous: bool = v.get_parsed("homogeneous", true);
    let sobolev_k: u32 = v.get_parsed("sobolev_k", 1);
    if sobolev_k > 4 {
        v.fail("sobolev_k", format!("{sobolev_k} outside [0, 4]"));
    }
    let riesz_beta: f64 = v.get_parsed("riesz_beta", 1.0);
    if !(-4.0..=4.0).contains(&riesz_beta) {
        v.fail("riesz_beta", format!("{riesz_beta} outside [-4, 4]"));
    }
    let trials: usize = v.get_parsed("trials", 50);
    if trials == 0 || trials > 10_000 {
        v.fail("trials", format!("{trials} outside [1, 10000]"));
    }
    let seed: u64 = v.get_parsed("seed", 7);
    let out_dir: String = map.get("out").cloned().unwrap_or_else(|| "out".into());

    // Weight model.
    let weight_m: usize = v.get_parsed("weight.m", m);
    if weight_m != m {
        v.fail(
            "weight.m",
            format!("weight dimension {weight_m} must equal m = {m}"),
        );
    }
    let model_name = map
        .get("weight.model")
        .cloned()
        .unwrap_or_else(|| "identity".into());
    let a_list = v.float_list("weight.a", vec![0.5]);
    let center = v.float_list("weight.center", vec![0.5; dim.max(1)]);
    if center.len() != dim {
        v.fail(
            "weight.center",
            format!("expected {dim} coordinates, got {}", center.len()),
        );
    }
    let angle_freq: i64 = v.get_parsed("weight.angle_freq", 1);
    let weight = match model_name.as_str() {
        "identity" => MatrixWeight::identity(m),
        "constant" => {
            let entries = v.float_list("weight.matrix", {
                let mut id = vec![0.0; m * m];
                for i in 0..m {
                    id[i * m + i] = 1.0;
                }
                id
            });
            if entries.len() != m * m {
                v.fail(
                    "weight.matrix",
                    format!("expected {} row-major entries, got {}", m * m, entries.len()),
                );
                MatrixWeight::identity(m)
            } else {
                MatrixWeight::Constant(SymMat::from_rows(m, &entries))
            }
        }
        "scalar-power" => MatrixWeight::ScalarPower {
            m,
            a: a_list[0],
            center: center.clone(),
        },
        "diagonal-power" => {
            if a_list.len() != m {
                v.fail(
                    "weight.a",
                    format!("diagonal-power wants {m} exponents, got {}", a_list.len()),
                );
            }
            MatrixWeight::DiagonalPower {
                a: a_list.clone(),
                center: center.clone(),
            }
        }
        "rotated-diagonal" => {
            if m != 2 {
                v.fail("weight.model", "rotated-diagonal requires m = 2".into());
            }
            MatrixWeight::RotatedDiagonal {
                a: if a_list.len() == 2 {
                    a_list.clone()
                } else {
                    vec![a_list[0], -a_list[0]]
                },
                center: center.clone(),
                angle_freq,
            }
        }
        other => {
            v.fail("weight.model", format!("unknown model {other:?}"));
            MatrixWeight::identity(m)
        }
    };

    let wavelet = match map.get("wavelet").map(|s| s.as_str()).unwrap_or("meyer") {
        "meyer" => WaveletChoice::Meyer,
        "daubechies2" => WaveletChoice::Daubechies(2),
        "daubechies3" => WaveletChoice::Daubechies(3),
        other => {
            v.fail("wavelet", format!("unknown wavelet {other:?}"));
            WaveletChoice::Meyer
        }
    };

    // Cross-field constraints.
    if p <= 1.0 && kind == ExperimentKind::ApCheck && map.get("p").is_none() {
        // Default p stays valid for both branches; nothing to flag.
    }
    if kind == ExperimentKind::Sobolev && p <= 1.0 {
        v.fail("p", format!("{p} must exceed 1 for the Sobolev experiment"));
    }

    let errors = v.errors;
    if !errors.is_empty() {
        return Err(ConfigError::Validation(errors));
    }

    let mut echoed = BTreeMap::new();
    echoed.insert("kind".into(), kind.name().to_string());
    echoed.insert("grid_j".into(), grid_j.to_string());
    echoed.insert(
        "grid_j2".into(),
        grid_j2.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
    );
    echoed.insert("dim".into(), dim.to_string());
    echoed.insert("m".into(), m.to_string());
    echoed.insert("p".into(), format!("{p}"));
    echoed.insert(
        "q".into(),
        if q.is_infinite() { "inf".into() } else { format!("{q}") },
    );
    echoed.insert("alpha".into(), format!("{alpha}"));
    echoed.insert("homogeneous".into(), homogeneous.to_string());
    echoed.insert("sobolev_k".into(), sobolev_k.to_string());
    echoed.insert("riesz_beta".into(), format!("{riesz_beta}"));
    echoed.insert("trials".into(), trials.to_string());
    echoed.insert("seed".into(), seed.to_string());
    echoed.insert("out".into(), out_dir.clone());
    echoed.insert("weight.model".into(), model_name.clone());
    echoed.insert("weight.m".into(), m.to_string());
    echoed.insert(
        "weight.a".into(),
        a_list
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    echoed.insert(
        "weight.center".into(),
        center
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    echoed.insert(
        "weight.matrix".into(),
        map.get("weight.matrix").cloned().unwrap_or_else(|| "identity".into()),
    );
    echoed.insert("weight.angle_freq".into(), angle_freq.to_string());
    echoed.insert("wavelet".into(), wavelet.to_string());

    Ok(ExperimentConfig {
        kind,
        grid_j,
        grid_j2,
        dim,
        m,
        p,
        q,
        alpha,
        homogeneous,
        sobolev_k,
        riesz_beta,
        trials,
        seed,
        out_dir,
        weight,
        wavelet,
        echoed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("kind=norms\n", None).unwrap();
        assert_eq!(cfg.grid_j, 10);
        assert_eq!(cfg.dim, 1);
        assert_eq!(cfg.m, 1);
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.q, 2.0);
        assert_eq!(cfg.alpha, 0.0);
        assert_eq!(cfg.echoed().get("p").unwrap(), "2");
    }

    #[test]
    fn out_of_range_p_names_the_field() {
        let err = parse_config("kind=norms\np=0\n", None).unwrap_err();
        match err {
            ConfigError::Validation(list) => {
                assert!(list.iter().any(|e| e.field == "p"), "{list:?}");
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_key_is_a_parse_error_with_line() {
        let err = parse_config("kind=norms\nfoo=1\n", None).unwrap_err();
        match err {
            ConfigError::Parse(e) => {
                assert_eq!(e.line, 2);
                assert!(e.message.contains("foo"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn all_violations_are_collected() {
        let err = parse_config("kind=norms\np=0\nalpha=99\nm=7\n", None).unwrap_err();
        match err {
            ConfigError::Validation(list) => {
                let fields: Vec<&str> = list.iter().map(|e| e.field.as_str()).collect();
                assert!(fields.contains(&"p"));
                assert!(fields.contains(&"alpha"));
                assert!(fields.contains(&"m"));
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn comments_and_q_inf() {
        let cfg = parse_config("# experiment\nkind=norms # trailing\nq=inf\n", None).unwrap();
        assert!(cfg.q.is_infinite());
        assert_eq!(cfg.echoed().get("q").unwrap(), "inf");
    }
}
