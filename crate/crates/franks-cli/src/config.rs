//! Flat key=value configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use franks::numkit::jet::Jet4;
use franks::numkit::{MatrixCurve, SmoothFn};
use nalgebra::DMatrix;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// The six experiment workflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Invariants,
    SurfaceRealize,
    HighdimRealize,
    MetricBounds,
    Scaling,
    Avoidance,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Invariants,
        Experiment::SurfaceRealize,
        Experiment::HighdimRealize,
        Experiment::MetricBounds,
        Experiment::Scaling,
        Experiment::Avoidance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Invariants => "invariants",
            Experiment::SurfaceRealize => "surface-realize",
            Experiment::HighdimRealize => "highdim-realize",
            Experiment::MetricBounds => "metric-bounds",
            Experiment::Scaling => "scaling",
            Experiment::Avoidance => "avoidance",
        }
    }

    pub fn from_name(s: &str) -> Result<Experiment, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| err(format!("unknown experiment '{s}'")))
    }
}

/// Parsed configuration: lines of `key=value`, `#` comments, later values
/// win; command-line `--key value` pairs override file entries.
#[derive(Debug, Clone, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Config::from_str_content(&text)
    }

    pub fn from_str_content(text: &str) -> Result<Config, ConfigError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key=value", lineno + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Config { map })
    }

    /// Apply `--key value` pairs.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<(), ConfigError> {
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| err(format!("expected --key, got '{flag}'")))?;
            let value = it
                .next()
                .ok_or_else(|| err(format!("missing value for --{key}")))?;
            self.map.insert(key.to_string(), value.to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn experiment(&self) -> Result<Experiment, ConfigError> {
        let name = self
            .get("experiment")
            .ok_or_else(|| err("missing key 'experiment'"))?;
        Experiment::from_name(name)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| err(format!("key '{key}': not a number: '{s}'")))?;
                if !v.is_finite() || v <= 0.0 {
                    return Err(err(format!("key '{key}': must be positive, got {v}")));
                }
                Ok(v)
            }
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| err(format!("key '{key}': not an integer: '{s}'"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| err(format!("key '{key}': not an integer: '{s}'"))),
        }
    }

    /// Comma-separated positive reals.
    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| err(format!("key '{key}': bad list entry '{p}'")))
                })
                .collect(),
        }
    }

    /// Scalar curvature profile on `[0, 1]`.
    pub fn curvature(&self) -> Result<SmoothFn, ConfigError> {
        curvature_from_spec(self.get("curvature").unwrap_or("zero"))
    }

    /// Matrix curvature profile on `[0, 1]`.
    pub fn matrix_curvature(&self) -> Result<MatrixCurve, ConfigError> {
        matrix_curvature_from_spec(self.get("curvature").unwrap_or("diag:1,-1"))
    }
}

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Named closed forms: `zero`, `const:<v>`, `sin2pi[:amp]`, `cos2pi[:amp]`,
/// or `table:t0:v0;t1:v1;...` (at least 9 samples, strictly increasing t),
/// interpolated by a normalized Gaussian kernel so the result is C∞.
pub fn curvature_from_spec(spec: &str) -> Result<SmoothFn, ConfigError> {
    let domain = (0.0, 1.0);
    if spec == "zero" {
        return Ok(SmoothFn::zero(domain));
    }
    if let Some(v) = spec.strip_prefix("const:") {
        let c: f64 = v
            .parse()
            .map_err(|_| err(format!("curvature const: bad value '{v}'")))?;
        return Ok(SmoothFn::constant(domain, c));
    }
    if spec == "sin2pi" || spec.starts_with("sin2pi:") {
        let amp = amp_of(spec, "sin2pi")?;
        return Ok(SmoothFn::sinusoid(domain, amp, TAU, 0.0));
    }
    if spec == "cos2pi" || spec.starts_with("cos2pi:") {
        let amp = amp_of(spec, "cos2pi")?;
        return Ok(SmoothFn::cosine(domain, amp, TAU, 0.0));
    }
    if let Some(rows) = spec.strip_prefix("table:") {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for row in rows.split(';') {
            let (t, v) = row
                .split_once(':')
                .ok_or_else(|| err(format!("table row '{row}': expected t:v")))?;
            ts.push(
                t.parse::<f64>()
                    .map_err(|_| err(format!("table: bad time '{t}'")))?,
            );
            vs.push(
                v.parse::<f64>()
                    .map_err(|_| err(format!("table: bad value '{v}'")))?,
            );
        }
        if ts.len() < 9 {
            return Err(err(format!("table: need at least 9 samples, got {}", ts.len())));
        }
        if !ts.windows(2).all(|w| w[0] < w[1]) {
            return Err(err("table: sample times must be strictly increasing"));
        }
        // Gaussian kernel interpolation: C∞, bandwidth tied to the spacing.
        let sigma = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        return Ok(SmoothFn::from_jet4(domain, move |t| {
            let mut num = Jet4::constant(0.0);
            let mut den = Jet4::constant(0.0);
            for (&ti, &vi) in ts.iter().zip(&vs) {
                let u = Jet4::affine(t, 1.0 / sigma, -ti / sigma);
                let w = u.mul(u).scale(-0.5).exp();
                num = num.add(w.scale(vi));
                den = den.add(w);
            }
            num.div(den)
        }));
    }
    Err(err(format!("unknown curvature spec '{spec}'")))
}

fn amp_of(spec: &str, prefix: &str) -> Result<f64, ConfigError> {
    match spec.strip_prefix(prefix) {
        Some("") => Ok(1.0),
        Some(rest) => rest
            .strip_prefix(':')
            .unwrap_or("1")
            .parse()
            .map_err(|_| err(format!("bad amplitude in '{spec}'"))),
        None => Ok(1.0),
    }
}

/// Matrix profiles: `diag:a,b[,c...]` (constant diagonal) or
/// `sym:a11,a12,a22` (constant symmetric 2×2).
pub fn matrix_curvature_from_spec(spec: &str) -> Result<MatrixCurve, ConfigError> {
    let domain = (0.0, 1.0);
    if let Some(list) = spec.strip_prefix("diag:") {
        let vals: Vec<f64> = list
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| err(format!("diag: bad entry '{p}'")))
            })
            .collect::<Result<_, _>>()?;
        let n = vals.len();
        if n < 2 {
            return Err(err("diag: need at least 2 entries"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { vals[i] } else { 0.0 });
        return Ok(MatrixCurve::constant(domain, &m));
    }
    if let Some(list) = spec.strip_prefix("sym:") {
        let vals: Vec<f64> = list
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| err(format!("sym: bad entry '{p}'")))
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != 3 {
            return Err(err("sym: expected a11,a12,a22"));
        }
        let m = DMatrix::from_row_slice(2, 2, &[vals[0], vals[1], vals[1], vals[2]]);
        return Ok(MatrixCurve::constant(domain, &m));
    }
    Err(err(format!("unknown matrix curvature spec '{spec}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_overrides() {
        let mut c = Config::from_str_content("# demo\nexperiment=invariants\neps=0.01\n").unwrap();
        assert_eq!(c.experiment().unwrap(), Experiment::Invariants);
        assert_eq!(c.f64_or("eps", 1.0).unwrap(), 0.01);
        c.apply_overrides(&["--eps".into(), "0.02".into()]).unwrap();
        assert_eq!(c.f64_or("eps", 1.0).unwrap(), 0.02);
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(Config::from_str_content("nonsense without equals").is_err());
        let c = Config::from_str_content("experiment=bogus\n").unwrap();
        assert!(c.experiment().is_err());
        let c = Config::from_str_content("eps=-1\n").unwrap();
        assert!(c.f64_or("eps", 1.0).is_err());
    }

    #[test]
    fn named_curvatures_evaluate() {
        assert_eq!(curvature_from_spec("zero").unwrap().value(0.3), 0.0);
        assert_eq!(curvature_from_spec("const:2.5").unwrap().value(0.3), 2.5);
        let s = curvature_from_spec("sin2pi").unwrap();
        assert!((s.value(0.25) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_curvature_is_smooth_and_close() {
        let rows: Vec<String> = (0..=10)
            .map(|i| {
                let t = i as f64 / 10.0;
                format!("{t}:{}", t * t)
            })
            .collect();
        let spec = format!("table:{}", rows.join(";"));
        let f = curvature_from_spec(&spec).unwrap();
        // kernel smoother tracks the quadratic loosely but smoothly
        for i in 1..10 {
            let t = i as f64 / 10.0;
            assert!((f.value(t) - t * t).abs() < 0.05, "t={t}: {}", f.value(t));
        }
        // C² data is well-defined
        let (_, d1, d2) = f.eval(0.5);
        assert!(d1.is_finite() && d2.is_finite());
    }

    #[test]
    fn table_needs_nine_monotone_samples() {
        assert!(curvature_from_spec("table:0:1;1:2").is_err());
        let bad = "table:0:0;0.2:0;0.1:0;0.3:0;0.4:0;0.5:0;0.6:0;0.7:0;0.8:0";
        assert!(curvature_from_spec(bad).is_err());
    }

    #[test]
    fn matrix_specs_parse() {
        let d = matrix_curvature_from_spec("diag:1,-1").unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.eval(0.5)[(0, 0)], 1.0);
        assert!(matrix_curvature_from_spec("diag:1").is_err());
        let s = matrix_curvature_from_spec("sym:1,0.5,-1").unwrap();
        assert_eq!(s.eval(0.1)[(0, 1)], 0.5);
    }
}
