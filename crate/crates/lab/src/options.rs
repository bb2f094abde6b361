//! Command-line flags and the JSON config file that can supply them.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    #[default]
    Csv,
    Json,
}

/// A scalar or a list in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(de: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Option::<OneOrMany<T>>::deserialize(de)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

/// Every flag is optional here; commands pick defaults for what they use.
/// The same keys are accepted in a JSON config file, and flags given on the
/// command line take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Group element `a,b,c,d` with ad − bc = 1; a Haar-random point from
    /// `--seed` is used when absent.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Point `x,y` of the upper half plane.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Orbit length(s), comma separated.
    #[arg(long = "T", global = true, value_delimiter = ',')]
    #[serde(rename = "T", default, deserialize_with = "one_or_many")]
    pub t: Option<Vec<f64>>,
    /// Step(s) of the discrete orbit, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub s: Option<Vec<f64>>,
    /// Sieve level; defaults to T^θ where relevant.
    #[arg(long = "R", global = true)]
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Window length of the closed-horocycle approximation.
    #[arg(long = "K", global = true)]
    #[serde(rename = "K")]
    pub window: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub t0: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Test function: `height:Y=2,w=0.25`, `angular` or `constant:c`.
    #[arg(long, global = true)]
    pub f: Option<String>,
    /// `uniform`, `nu`, `prime` or `progression:q=3,j=1`.
    #[arg(long, global = true)]
    pub weight: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub out: Option<OutFormat>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Divisor parameter(s) of the sieve identities, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub k: Option<Vec<u64>>,
    /// Modulus of a progression.
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// Residue of a progression.
    #[arg(long, global = true)]
    pub j: Option<u64>,
    /// First index of a sieve interval.
    #[arg(long, global = true)]
    pub start: Option<u64>,
    /// Length of a sieve interval.
    #[arg(long, global = true)]
    pub len: Option<u64>,
    /// Which sieve identity to evaluate.
    #[arg(long, global = true)]
    pub op: Option<String>,
    /// Period of the closed horocycle in `smallaps`.
    #[arg(long, global = true)]
    pub period: Option<f64>,
    /// Horizontal offset of the closed horocycle in `smallaps`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($cli:ident, $file:ident, $($field:ident),*) => {
        Options { $($field: $cli.$field.or($file.$field),)* config: $cli.config }
    };
}

impl Options {
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| LabError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Fills unset flags from the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Self, LabError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = Self::from_file(&path)?;
        let cli = self;
        Ok(merge_fields!(
            cli, file, g, z, t, s, r, theta, beta, delta, window, eta, t0, samples, f, weight, out,
            seed, threads, k, q, j, start, len, op, period, x0
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_accepts_scalars_and_lists() {
        let o: Options = serde_json::from_str(r#"{"T": 1e4, "s": [1, 2], "R": 50, "k": 3, "out": "json"}"#).unwrap();
        assert_eq!(o.t, Some(vec![1e4]));
        assert_eq!(o.s, Some(vec![1.0, 2.0]));
        assert_eq!((o.r, o.k, o.out), (Some(50.0), Some(vec![3]), Some(OutFormat::Json)));
        assert!(serde_json::from_str::<Options>(r#"{"TT": 1}"#).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = std::env::temp_dir().join(format!("horolab-opts-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"T": [10, 20], "theta": 0.3, "seed": 9}"#).unwrap();
        let cli = Options {
            theta: Some(0.1),
            config: Some(path.clone()),
            ..Options::default()
        };
        let o = cli.resolve().unwrap();
        assert_eq!((o.t, o.theta, o.seed), (Some(vec![10.0, 20.0]), Some(0.1), Some(9)));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
