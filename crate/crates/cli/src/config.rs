//! Serializable description of a build run.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sublevel::ToleranceConfig;

use crate::CliError;

/// Where the landmarks of a run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LandmarkSource {
    /// The model's own fixed landmarks.
    Model,
    /// A points CSV file.
    File(PathBuf),
    /// `count` maxmin landmarks from the candidate pool.
    Maxmin { count: usize },
    /// The `count` lowest-energy ±1 states of an Ising model.
    IsingLowest { count: usize },
}

impl FromStr for LandmarkSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let count = |v: &str| {
            v.parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| CliError::Config(format!("bad landmark count in `{s}`")))
        };
        if s == "model" {
            Ok(LandmarkSource::Model)
        } else if let Some(v) = s.strip_prefix("maxmin:") {
            Ok(LandmarkSource::Maxmin { count: count(v)? })
        } else if let Some(v) = s.strip_prefix("ising-lowest:") {
            Ok(LandmarkSource::IsingLowest { count: count(v)? })
        } else if s.is_empty() {
            Err(CliError::Config("empty landmark source".into()))
        } else {
            Ok(LandmarkSource::File(PathBuf::from(s)))
        }
    }
}

impl fmt::Display for LandmarkSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LandmarkSource::Model => write!(f, "model"),
            LandmarkSource::File(p) => write!(f, "{}", p.display()),
            LandmarkSource::Maxmin { count } => write!(f, "maxmin:{count}"),
            LandmarkSource::IsingLowest { count } => write!(f, "ising-lowest:{count}"),
        }
    }
}

impl TryFrom<String> for LandmarkSource {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<LandmarkSource> for String {
    fn from(s: LandmarkSource) -> String {
        s.to_string()
    }
}

/// Solver tolerances as stored in run metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_feas: f64,
    pub tol_dup: f64,
    pub tol_opt: f64,
    pub n_starts: usize,
    pub trust_radius: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let t = ToleranceConfig::default();
        Tolerances {
            tol_feas: t.tol_feas,
            tol_dup: t.tol_dup,
            tol_opt: t.tol_opt,
            n_starts: t.n_starts,
            trust_radius: t.trust_radius,
            max_iter: t.max_iter,
        }
    }
}

/// Everything needed to reproduce a build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Built-in model name; `density` when only data is given.
    pub model: String,
    /// Points CSV the density model is fitted to.
    pub data: Option<PathBuf>,
    pub sites: Option<usize>,
    pub h: Option<f64>,
    pub landmarks: LandmarkSource,
    /// Candidate pool for maxmin selection.
    pub pool: Option<PathBuf>,
    /// Sample of the region whose covering radius is reported.
    pub region: Option<PathBuf>,
    pub max_dim: Option<usize>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn tolerance_config(&self) -> ToleranceConfig {
        let t = &self.tolerances;
        ToleranceConfig {
            tol_feas: t.tol_feas,
            tol_dup: t.tol_dup,
            tol_opt: t.tol_opt,
            n_starts: t.n_starts,
            max_dim: self.max_dim,
            trust_radius: t.trust_radius,
            max_iter: t.max_iter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn landmark_sources_parse() {
        assert_eq!("maxmin:50".parse::<LandmarkSource>().unwrap(), LandmarkSource::Maxmin { count: 50 });
        assert_eq!(
            "ising-lowest:20".parse::<LandmarkSource>().unwrap(),
            LandmarkSource::IsingLowest { count: 20 }
        );
        assert_eq!("model".parse::<LandmarkSource>().unwrap(), LandmarkSource::Model);
        assert_eq!(
            "pts.csv".parse::<LandmarkSource>().unwrap(),
            LandmarkSource::File("pts.csv".into())
        );
        assert!("maxmin:0".parse::<LandmarkSource>().is_err());
        assert!("maxmin:x".parse::<LandmarkSource>().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            model: "density".into(),
            data: Some("data/infinity.csv".into()),
            sites: None,
            h: Some(50.0),
            landmarks: LandmarkSource::Maxmin { count: 50 },
            pool: None,
            region: None,
            max_dim: Some(2),
            seed: 7,
            tolerances: Tolerances::default(),
            out: "out".into(),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
