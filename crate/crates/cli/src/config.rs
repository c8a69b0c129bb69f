//! Flat `key = value` run configuration.
//!
//! UTF-8 text, one assignment per line, `#` starts a comment. Unknown and
//! duplicate keys are rejected with their line number. The canonical key list
//! is in the README; `extent`, `dt` and `delta` accept `auto`.

use kgtx_core::nlsolver::NonlinearitySpec;
use kgtx_core::{InitialDatum, PhysicsParams, Profile};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Leapfrog,
    Conserving,
    SpectralLinear,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Leapfrog => "leapfrog",
            Mode::Conserving => "conserving",
            Mode::SpectralLinear => "spectral-linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    None,
    Cubic,
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::None => "none",
            Nonlinearity::Cubic => "cubic",
        }
    }
}

/// One fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub c: f64,
    pub a1: f64,
    pub a2: f64,
    pub nonlinearity: Nonlinearity,
    /// Cubic coupling strength; ignored when `nonlinearity = none`.
    pub lambda: f64,
    pub bump_amplitude: f64,
    pub bump_center: f64,
    pub bump_width: f64,
    pub h: f64,
    pub extent: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub mode: Mode,
    pub eps_rel: f64,
    pub delta: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            a1: 1.0,
            a2: 5.0,
            nonlinearity: Nonlinearity::None,
            lambda: 1.0,
            bump_amplitude: 1.0,
            bump_center: 1.5,
            bump_width: 0.4,
            h: 1.0 / 512.0,
            extent: None,
            dt: None,
            t_end: 1.0,
            snapshots: vec![0.25, 0.5, 0.75, 1.0],
            mode: Mode::Leapfrog,
            eps_rel: 1e-8,
            delta: None,
            seed: 42,
            out: None,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "c",
    "a1",
    "a2",
    "nonlinearity",
    "lambda",
    "bump_amplitude",
    "bump_center",
    "bump_width",
    "h",
    "extent",
    "dt",
    "t_end",
    "snapshots",
    "mode",
    "eps_rel",
    "delta",
    "seed",
    "out",
];

fn parse_f64(value: &str, key: &str, line: Option<usize>) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key}: expected a number, got `{value}`")))
}

impl RunConfig {
    /// Parse and validate a config file body.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                err(
                    Some(line_no),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(err(Some(line_no), format!("unknown key `{key}`")));
            }
            if seen.iter().any(|s| s == key) {
                return Err(err(Some(line_no), format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            cfg.apply_raw(key, value, Some(line_no))?;
        }
        for required in ["c", "a1", "a2"] {
            if !seen.iter().any(|s| s == required) {
                return Err(err(None, format!("missing key `{required}`")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply a single `key = value` override (used by sweeps). Re-validates.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(err(None, format!("unknown key `{key}`")));
        }
        self.apply_raw(key, value, None)?;
        self.validate()
    }

    fn apply_raw(
        &mut self,
        key: &str,
        value: &str,
        line: Option<usize>,
    ) -> Result<(), ConfigError> {
        match key {
            "c" => self.c = parse_f64(value, key, line)?,
            "a1" => self.a1 = parse_f64(value, key, line)?,
            "a2" => self.a2 = parse_f64(value, key, line)?,
            "nonlinearity" => {
                self.nonlinearity = match value {
                    "none" => Nonlinearity::None,
                    "cubic" => Nonlinearity::Cubic,
                    other => {
                        return Err(err(
                            line,
                            format!("nonlinearity: expected none | cubic, got `{other}`"),
                        ))
                    }
                }
            }
            "lambda" => self.lambda = parse_f64(value, key, line)?,
            "bump_amplitude" => self.bump_amplitude = parse_f64(value, key, line)?,
            "bump_center" => self.bump_center = parse_f64(value, key, line)?,
            "bump_width" => self.bump_width = parse_f64(value, key, line)?,
            "h" => self.h = parse_f64(value, key, line)?,
            "extent" => {
                self.extent = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(value, key, line)?)
                }
            }
            "dt" => {
                self.dt = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(value, key, line)?)
                }
            }
            "t_end" => self.t_end = parse_f64(value, key, line)?,
            "snapshots" => {
                let mut times = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    times.push(parse_f64(part, key, line)?);
                }
                self.snapshots = times;
            }
            "mode" => {
                self.mode = match value {
                    "leapfrog" => Mode::Leapfrog,
                    "conserving" => Mode::Conserving,
                    "spectral-linear" => Mode::SpectralLinear,
                    other => {
                        return Err(err(
                            line,
                            format!(
                            "mode: expected leapfrog | conserving | spectral-linear, got `{other}`"
                        ),
                        ))
                    }
                }
            }
            "eps_rel" => self.eps_rel = parse_f64(value, key, line)?,
            "delta" => {
                self.delta = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(value, key, line)?)
                }
            }
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| err(line, format!("seed: expected an integer, got `{value}`")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => unreachable!("key list checked by the caller"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(err(None, format!("c must be positive, got {}", self.c)));
        }
        if !(self.a1.is_finite() && self.a1 > 0.0) {
            return Err(err(None, format!("a1 must be positive, got {}", self.a1)));
        }
        if !(self.a2.is_finite() && self.a2 > self.a1) {
            return Err(err(None, "a2 must exceed a1".to_string()));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(err(None, format!("h must be positive, got {}", self.h)));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(err(None, format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(err(
                None,
                format!("t_end must be positive, got {}", self.t_end),
            ));
        }
        if !(self.bump_width.is_finite() && self.bump_width > 0.0) {
            return Err(err(
                None,
                format!("bump_width must be positive, got {}", self.bump_width),
            ));
        }
        if self.bump_amplitude != 0.0 && self.bump_center - self.bump_width <= 0.0 {
            return Err(err(
                None,
                "bump must be supported strictly inside the half-axis (bump_center - bump_width > 0)"
                    .to_string(),
            ));
        }
        if !(self.eps_rel > 0.0 && self.eps_rel < 1.0) {
            return Err(err(
                None,
                format!("eps_rel must lie in (0, 1), got {}", self.eps_rel),
            ));
        }
        if self.mode == Mode::SpectralLinear && self.nonlinearity != Nonlinearity::None {
            return Err(err(
                None,
                "mode spectral-linear requires nonlinearity = none".to_string(),
            ));
        }
        if self.snapshots.iter().any(|&t| t < 0.0 || t > self.t_end) {
            return Err(err(
                None,
                "snapshot times must lie in [0, t_end]".to_string(),
            ));
        }
        Ok(())
    }

    /// `extent` or the auto rule `x0 + w + c*t_end + 10h`.
    pub fn resolved_extent(&self) -> f64 {
        self.extent
            .unwrap_or(self.bump_center + self.bump_width + self.c * self.t_end + 10.0 * self.h)
    }

    /// `dt` or the auto rule `0.5 h / c`.
    pub fn resolved_dt(&self) -> f64 {
        self.dt.unwrap_or(0.5 * self.h / self.c)
    }

    /// `delta` or the auto rule `2h`.
    pub fn resolved_delta(&self) -> f64 {
        self.delta.unwrap_or(2.0 * self.h)
    }

    pub fn params(&self) -> Result<PhysicsParams, kgtx_core::Error> {
        PhysicsParams::new(self.c, self.a1, self.a2)
    }

    pub fn datum(&self) -> Result<InitialDatum, kgtx_core::Error> {
        let f1 = if self.bump_amplitude == 0.0 {
            // Width/center validation still applies, but the profile is zero.
            Profile::zero()
        } else {
            Profile::bump(self.bump_amplitude, self.bump_center, self.bump_width)?
        };
        InitialDatum::new(f1, Profile::zero())
    }

    pub fn nonlinearity_spec(&self) -> NonlinearitySpec {
        match self.nonlinearity {
            Nonlinearity::None => NonlinearitySpec::linear(),
            Nonlinearity::Cubic => NonlinearitySpec::cubic(self.lambda),
        }
    }

    /// Canonical serialization (echoed into metadata; reparses to the same
    /// config).
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let f = crate::output::fmt_f64;
        s.push_str(&format!("c = {}\n", f(self.c)));
        s.push_str(&format!("a1 = {}\n", f(self.a1)));
        s.push_str(&format!("a2 = {}\n", f(self.a2)));
        s.push_str(&format!("nonlinearity = {}\n", self.nonlinearity.name()));
        s.push_str(&format!("lambda = {}\n", f(self.lambda)));
        s.push_str(&format!("bump_amplitude = {}\n", f(self.bump_amplitude)));
        s.push_str(&format!("bump_center = {}\n", f(self.bump_center)));
        s.push_str(&format!("bump_width = {}\n", f(self.bump_width)));
        s.push_str(&format!("h = {}\n", f(self.h)));
        match self.extent {
            None => s.push_str("extent = auto\n"),
            Some(v) => s.push_str(&format!("extent = {}\n", f(v))),
        }
        match self.dt {
            None => s.push_str("dt = auto\n"),
            Some(v) => s.push_str(&format!("dt = {}\n", f(v))),
        }
        s.push_str(&format!("t_end = {}\n", f(self.t_end)));
        let snaps: Vec<String> = self.snapshots.iter().map(|&t| f(t)).collect();
        s.push_str(&format!("snapshots = {}\n", snaps.join(",")));
        s.push_str(&format!("mode = {}\n", self.mode.as_str()));
        s.push_str(&format!("eps_rel = {}\n", f(self.eps_rel)));
        match self.delta {
            None => s.push_str("delta = auto\n"),
            Some(v) => s.push_str(&format!("delta = {}\n", f(v))),
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = RunConfig::parse("c = 1\na1 = 1\na2 = 5\n").unwrap();
        assert_eq!(cfg.h, 1.0 / 512.0);
        assert!(cfg.extent.is_none());
        assert!((cfg.resolved_dt() - 0.5 * cfg.h).abs() < 1e-18);
        assert!((cfg.resolved_extent() - (1.5 + 0.4 + 1.0 + 10.0 / 512.0)).abs() < 1e-12);
    }

    #[test]
    fn physics_keys_are_required() {
        let e = RunConfig::parse("c = 1\na1 = 1\n").unwrap_err();
        assert!(e.message.contains("missing key `a2`"), "{e}");
        assert!(RunConfig::parse("").is_err());
    }

    #[test]
    fn a2_must_exceed_a1() {
        let e = RunConfig::parse("c = 1\na1 = 2\na2 = 2\n").unwrap_err();
        assert!(e.message.contains("a2 must exceed a1"), "{e}");
    }

    #[test]
    fn spectral_mode_rejects_nonlinearity() {
        let e = RunConfig::parse("c=1\na1=1\na2=5\nmode = spectral-linear\nnonlinearity = cubic\n")
            .unwrap_err();
        assert!(e.message.contains("spectral-linear"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_keys_carry_line_numbers() {
        let e = RunConfig::parse("c=1\nbogus = 3\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = RunConfig::parse("c=1\nc=2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn type_mismatch_carries_line_number() {
        let e = RunConfig::parse("c = fast\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(e.message.contains("expected a number"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# physics\nc = 2 # speed\n\na1=1\na2=3\n").unwrap();
        assert_eq!(cfg.c, 2.0);
    }

    #[test]
    fn canonical_round_trips() {
        let cfg = RunConfig::parse("c=1\na1=1\na2=5\nnonlinearity=cubic\nlambda=0.5\n").unwrap();
        let echo = cfg.canonical();
        let re = RunConfig::parse(&echo).unwrap();
        assert_eq!(re.canonical(), echo);
    }

    #[test]
    fn sweep_override_revalidates() {
        let mut cfg = RunConfig::parse("c=1\na1=1\na2=5\n").unwrap();
        cfg.apply_override("lambda", "0.5").unwrap();
        cfg.apply_override("nonlinearity", "cubic").unwrap();
        assert_eq!(cfg.nonlinearity, Nonlinearity::Cubic);
        assert_eq!(cfg.lambda, 0.5);
        assert!(cfg.apply_override("a2", "0.5").is_err());
    }
}
