//! Hull configuration files.
//!
//! ```toml
//! label = "fig5"
//! epsilon = 0.15
//!
//! [[corners]]
//! K = 0.8
//! sigma = "1/4"
//!
//! [[corners]]
//! K = 0.2
//! sigma = 0.25
//! ```

use num_rational::Ratio;
use serde::{Deserialize, Deserializer};
use shipwave::{Hull, HullSpec};
use std::fmt;
use std::path::{Path, PathBuf};
use toml::Spanned;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path.display(), self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Corner angle in units of pi, exact when written as a fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Float(f64),
    Exact(Ratio<i64>),
}

impl Angle {
    pub fn value(self) -> f64 {
        match self {
            Angle::Float(x) => x,
            Angle::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
        }
    }
}

pub fn parse_angle(s: &str) -> Result<Angle, String> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| format!("bad numerator in {t:?}"))?;
        let d: i64 = d.trim().parse().map_err(|_| format!("bad denominator in {t:?}"))?;
        if d == 0 {
            return Err(format!("zero denominator in {t:?}"));
        }
        return Ok(Angle::Exact(Ratio::new(n, d)));
    }
    t.parse::<f64>().map(Angle::Float).map_err(|_| format!("cannot read angle {t:?}"))
}

fn angle<'de, D: Deserializer<'de>>(d: D) -> Result<Angle, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(Angle::Float(x)),
        Raw::Text(s) => parse_angle(&s).map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorner {
    #[serde(rename = "K", alias = "k")]
    k: f64,
    #[serde(deserialize_with = "angle")]
    sigma: Angle,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    label: Option<String>,
    epsilon: Option<f64>,
    corners: Spanned<Vec<Spanned<RawCorner>>>,
}

#[derive(Debug, Clone)]
pub struct HullConfig {
    pub label: String,
    pub epsilon: Option<f64>,
    pub hull: Hull<f64>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_config(text: &str, path: &Path) -> Result<HullConfig, ConfigError> {
    let err = |offset: usize, message: String| {
        let (line, column) = line_col(text, offset);
        ConfigError { path: path.to_path_buf(), line, column, message }
    };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let at = e.span().map_or(0, |s| s.start);
        err(at, e.message().to_string())
    })?;
    let corners_at = raw.corners.span().start;
    let corners = raw.corners.into_inner();
    if corners.is_empty() {
        return Err(err(corners_at, "at least one corner is required".into()));
    }
    if let Some(eps) = raw.epsilon {
        if !(eps > 0.0) {
            return Err(err(0, format!("epsilon must be positive, got {eps}")));
        }
    }
    let list: Vec<(f64, Angle)> = corners.iter().map(|c| (c.get_ref().k, c.get_ref().sigma)).collect();
    let label = raw.label.unwrap_or_else(|| path.file_stem().map_or("hull".into(), |s| s.to_string_lossy().into_owned()));
    let spec = if list.iter().all(|(_, a)| matches!(a, Angle::Exact(_))) {
        let exact: Vec<(f64, (i64, i64))> = list
            .iter()
            .map(|&(k, a)| match a {
                Angle::Exact(r) => (k, (*r.numer(), *r.denom())),
                Angle::Float(_) => unreachable!(),
            })
            .collect();
        HullSpec::rational(label.clone(), &exact)
    } else {
        HullSpec::new(label.clone(), &list.iter().map(|&(k, a)| (k, a.value())).collect::<Vec<_>>())
    };
    let hull = spec.normalize().map_err(|e| {
        // point at the offending corner when the message names one
        let at = corners
            .iter()
            .enumerate()
            .find(|(i, _)| e.to_string().contains(&format!("corner {}", i + 1)))
            .map_or(corners_at, |(_, c)| c.span().start);
        err(at, e.to_string())
    })?;
    Ok(HullConfig { label, epsilon: raw.epsilon, hull })
}

pub fn load_config(path: &Path) -> Result<HullConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { path: path.to_path_buf(), line: 0, column: 0, message: e.to_string() })?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<HullConfig, ConfigError> {
        parse_config(s, Path::new("t.toml"))
    }

    #[test]
    fn fractions_stay_exact() {
        let c = parse("[[corners]]\nK = 0.8\nsigma = \"1/4\"\n[[corners]]\nK = 0.2\nsigma = \"1/4\"\n").unwrap();
        assert!(c.hull.sigma_exact().is_some());
        assert_eq!(c.label, "t");
    }

    #[test]
    fn floats_and_fractions_mix() {
        let c = parse("label = \"m\"\nepsilon = 0.2\n[[corners]]\nK = 1\nsigma = 0.5\n[[corners]]\nK = 2\nsigma = \"-1/4\"\n").unwrap();
        assert!(c.hull.sigma_exact().is_none());
        assert_eq!(c.epsilon, Some(0.2));
        assert_eq!(c.hull.sigma()[0], -0.25);
    }

    #[test]
    fn bad_fraction_reports_position() {
        let e = parse("[[corners]]\nK = 1\nsigma = \"1/0\"\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("zero denominator"), "{}", e.message);
    }

    #[test]
    fn empty_file_is_an_error() {
        let e = parse("").unwrap_err();
        assert!(e.message.contains("corners"), "{}", e.message);
    }

    #[test]
    fn invalid_hull_points_at_corner() {
        let e = parse("[[corners]]\nK = 1\nsigma = 0.5\n\n[[corners]]\nK = -2\nsigma = 0.1\n").unwrap_err();
        assert_eq!(e.line, 5, "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse("[[corners]]\nK = 1\nsigma = 0.5\nangle = 3\n").unwrap_err();
        assert_eq!(e.line, 4, "{e}");
    }
}
