//! JSON scenario files.

use std::path::Path;

use serde::Deserialize;

use hitchplan::planner::AlphaOptions;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "AlphaRaw")]
pub enum AlphaSpec {
    Fixed(f64),
    Search,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphaRaw {
    Number(f64),
    Word(String),
}

impl TryFrom<AlphaRaw> for AlphaSpec {
    type Error = String;
    fn try_from(raw: AlphaRaw) -> Result<Self, String> {
        match raw {
            AlphaRaw::Number(a) if a.is_finite() && a > 0.0 => Ok(AlphaSpec::Fixed(a)),
            AlphaRaw::Number(a) => Err(format!("alpha must be positive, got {a}")),
            AlphaRaw::Word(w) => w.parse(),
        }
    }
}

impl std::str::FromStr for AlphaSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "search" {
            return Ok(AlphaSpec::Search);
        }
        match s.parse::<f64>() {
            Ok(a) if a.is_finite() && a > 0.0 => Ok(AlphaSpec::Fixed(a)),
            _ => Err(format!("alpha must be a positive number or \"search\", got {s:?}")),
        }
    }
}

impl From<AlphaSpec> for AlphaOptions {
    fn from(a: AlphaSpec) -> Self {
        match a {
            AlphaSpec::Fixed(v) => AlphaOptions::Fixed(v),
            AlphaSpec::Search => AlphaOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub l_r: f64,
    pub l_t: f64,
    #[serde(default)]
    pub phi_max: Option<f64>,
    pub q0: [f64; 4],
    pub q1: [f64; 4],
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_alpha")]
    pub alpha: AlphaSpec,
    #[serde(default)]
    pub seed: u64,
    /// RK4 steps per unit time.
    #[serde(default = "default_steps")]
    pub steps: f64,
}

fn default_tol() -> f64 {
    1e-3
}
fn default_max_iter() -> usize {
    20
}
fn default_alpha() -> AlphaSpec {
    AlphaSpec::Fixed(1.0)
}
fn default_steps() -> f64 {
    400.0
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let s: Scenario = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if !(s.steps.is_finite() && s.steps >= 1.0) {
            return Err(format!("{}: field `steps` must be at least 1, got {}", path.display(), s.steps));
        }
        Ok(s)
    }
}
