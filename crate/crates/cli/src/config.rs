//! Job file: options, named matrices, pairs and output paths.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use planar_dwell::comparison::BasisPolicy;
use planar_dwell::rootfind::Tolerances;
use planar_dwell::{AnalysisOptions, Matrix2};
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub tol_arg: Option<f64>,
    pub tol_res: Option<f64>,
    pub basis_policy: Option<String>,
    pub optimal_basis: Option<bool>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub margin: Option<f64>,
    /// Worker threads for the pair list.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub analyze: Option<PathBuf>,
    pub compare: Option<PathBuf>,
    pub contour: Option<PathBuf>,
    pub simulate: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixRef {
    Name(String),
    Inline(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    name: String,
    a1: MatrixRef,
    a2: MatrixRef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    options: Options,
    #[serde(default)]
    matrices: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pairs: Vec<RawPair>,
    #[serde(default)]
    outputs: Outputs,
}

#[derive(Debug, Clone)]
pub struct Pair {
    pub name: String,
    pub a1: Matrix2,
    pub a2: Matrix2,
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub options: Options,
    pub pairs: Vec<Pair>,
    pub outputs: Outputs,
}

fn to_matrix(what: &str, v: &[f64]) -> Result<Matrix2, ConfigError> {
    let arr: [f64; 4] = v
        .try_into()
        .map_err(|_| ConfigError(format!("{what}: expected 4 numbers, got {}", v.len())))?;
    if arr.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError(format!("{what}: entries must be finite")));
    }
    Ok(Matrix2::from_row_major(arr))
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<JobConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        let mut matrices = BTreeMap::new();
        for (k, v) in &raw.matrices {
            matrices.insert(k.clone(), to_matrix(&format!("matrix {k}"), v)?);
        }
        let resolve = |pair: &str, r: &MatrixRef| match r {
            MatrixRef::Name(n) => matrices
                .get(n)
                .copied()
                .ok_or_else(|| ConfigError(format!("pair {pair}: unknown matrix `{n}`"))),
            MatrixRef::Inline(v) => to_matrix(&format!("pair {pair}"), v),
        };
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(raw.pairs.len());
        for p in &raw.pairs {
            if !seen.insert(p.name.clone()) {
                return Err(ConfigError(format!("duplicate pair name `{}`", p.name)));
            }
            pairs.push(Pair {
                name: p.name.clone(),
                a1: resolve(&p.name, &p.a1)?,
                a2: resolve(&p.name, &p.a2)?,
            });
        }
        let cfg = JobConfig {
            options: raw.options,
            pairs,
            outputs: raw.outputs,
        };
        cfg.basis_policy()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<JobConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        JobConfig::parse(&text)
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        let d = AnalysisOptions::default();
        AnalysisOptions {
            tol: Tolerances {
                arg_tol: self.options.tol_arg.unwrap_or(d.tol.arg_tol),
                res_tol: self.options.tol_res.unwrap_or(d.tol.res_tol),
            },
            optimal_basis: self.options.optimal_basis.unwrap_or(d.optimal_basis),
            ..d
        }
    }

    pub fn basis_policy(&self) -> Result<BasisPolicy, ConfigError> {
        match &self.options.basis_policy {
            None => Ok(BasisPolicy::default()),
            Some(s) => s.parse().map_err(|e: planar_dwell::DwellError| ConfigError(e.to_string())),
        }
    }

    pub fn pair(&self, name: &str) -> Result<&Pair, ConfigError> {
        self.pairs
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| ConfigError(format!("no pair named `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_inline() {
        let cfg = JobConfig::parse(
            r#"
            [matrices]
            A = [-1, 0, 0, -2]
            [[pairs]]
            name = "p"
            a1 = "A"
            a2 = [-1, 1, 0, -1]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.pairs[0].a2, Matrix2::new(-1.0, 1.0, 0.0, -1.0));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "[[pairs]]\nname='p'\na1='B'\na2=[1,2,3,4]",
            "[[pairs]]\nname='p'\na1=[1,2,3]\na2=[1,2,3,4]",
            "[[pairs]]\nname='p'\na1=[1,2,3,4]\na2=[1,2,3,4]\n[[pairs]]\nname='p'\na1=[1,2,3,4]\na2=[1,2,3,4]",
            "[options]\nbasis_policy='frob'",
            "[options]\nbogus=1",
        ] {
            assert!(JobConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn empty_is_fine() {
        assert!(JobConfig::parse("").unwrap().pairs.is_empty());
    }
}
