//! Problem configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use expseries_core::euler::EulerSpec;
use expseries_core::fieldeval::{AxisRange, GridSpec};
use expseries_core::lattice::MultiIndex;
use expseries_core::ns::NsSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::json::{exppolys, rationals, Poly, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Euler,
    NavierStokes,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: ProblemKind,
    #[serde(default)]
    pub euler: Option<EulerSection>,
    #[serde(default, rename = "navier-stokes")]
    pub navier_stokes: Option<NsSection>,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerSection {
    pub zero_mode: [Q; 3],
    pub epsilon: Q,
    pub max_level: u32,
    #[serde(default)]
    pub modes: Vec<EulerMode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerMode {
    pub k: [u32; 3],
    pub b: [Q; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsSection {
    pub nu: Q,
    pub lambda: [Q; 3],
    pub n: u32,
    #[serde(default)]
    pub a: Vec<NsInitial>,
    #[serde(default)]
    pub b: Vec<NsForcing>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsInitial {
    pub k: u32,
    pub value: [Q; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsForcing {
    pub k: u32,
    pub value: [Poly; 3],
}

/// Grid ranges in flag syntax: `x` is `a:b:n,a:b:n,a:b:n`, `t` is `a:b:n`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x: String,
    pub t: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub table: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// A validated problem, ready for the solver.
#[derive(Debug)]
pub enum Problem {
    Euler(EulerSpec),
    NavierStokes(NsSpec),
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(format!("field {path}: {}", e.inner()))
        })
    }

    /// Assembles solver input; `levels` overrides the truncation level.
    pub fn problem(&self, levels: Option<u32>) -> Result<Problem, CliError> {
        match self.kind {
            ProblemKind::Euler => {
                let s = self
                    .euler
                    .as_ref()
                    .ok_or_else(|| CliError::config("field euler: missing for kind \"euler\""))?;
                let mut data = BTreeMap::new();
                for (i, m) in s.modes.iter().enumerate() {
                    let k = MultiIndex(m.k);
                    if data.insert(k, rationals(m.b.clone())).is_some() {
                        return Err(CliError::config(format!("field euler.modes[{i}].k: mode {k} listed twice")));
                    }
                }
                Ok(Problem::Euler(EulerSpec {
                    zero_mode: rationals(s.zero_mode.clone()),
                    data,
                    epsilon: s.epsilon.0.clone(),
                    max_level: levels.unwrap_or(s.max_level),
                }))
            }
            ProblemKind::NavierStokes => {
                let s = self.navier_stokes.as_ref().ok_or_else(|| {
                    CliError::config("field navier-stokes: missing for kind \"navier-stokes\"")
                })?;
                let mut a = BTreeMap::new();
                for (i, m) in s.a.iter().enumerate() {
                    if a.insert(m.k, rationals(m.value.clone())).is_some() {
                        return Err(CliError::config(format!("field navier-stokes.a[{i}].k: mode {} listed twice", m.k)));
                    }
                }
                let mut b = BTreeMap::new();
                for (i, m) in s.b.iter().enumerate() {
                    if b.insert(m.k, exppolys(m.value.clone())).is_some() {
                        return Err(CliError::config(format!("field navier-stokes.b[{i}].k: mode {} listed twice", m.k)));
                    }
                }
                Ok(Problem::NavierStokes(NsSpec {
                    nu: s.nu.0.clone(),
                    lambda: rationals(s.lambda.clone()),
                    n: levels.unwrap_or(s.n),
                    a,
                    b,
                }))
            }
        }
    }

    pub fn grid(&self) -> Result<Option<GridSpec>, CliError> {
        self.grid
            .as_ref()
            .map(|g| parse_grid(&g.x, &g.t).map_err(|e| CliError::config(format!("field grid: {e}"))))
            .transpose()
    }
}

fn parse_axis(s: &str) -> Result<AxisRange, String> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let [min, max, n] = parts.as_slice() else {
        return Err(format!("\"{s}\" is not of the form min:max:count"));
    };
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("\"{p}\" is not a number"));
    let count = n
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("\"{n}\" is not a point count"))?;
    Ok(AxisRange::new(num(min)?, num(max)?, count))
}

/// Parses `x1min:x1max:n1,x2min:x2max:n2,x3min:x3max:n3` and `tmin:tmax:nt`.
pub fn parse_grid(x: &str, t: &str) -> Result<GridSpec, String> {
    let axes: Vec<&str> = x.split(',').collect();
    let [a, b, c] = axes.as_slice() else {
        return Err(format!("\"{x}\" must list three axes"));
    };
    Ok(GridSpec {
        x: [parse_axis(a)?, parse_axis(b)?, parse_axis(c)?],
        t: parse_axis(t)?,
    })
}

/// Sample times as `a,b,c` or `min:max:count`.
pub fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        return Ok(parse_axis(s)?.values());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("\"{p}\" is not a number")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use expseries_core::ring::{int, rat};

    const EULER: &str = r#"{
        "kind": "euler",
        "euler": {
            "zero_mode": [[-2, 1], [-2, 1], [-2, 1]],
            "epsilon": [1, 2],
            "max_level": 3,
            "modes": [{"k": [1, 1, 0], "b": [[1, 10000], [-1, 10000], [0, 1]]}]
        },
        "grid": {"x": "0:2:3,0:2:3,0:1:2", "t": "0:1:2"}
    }"#;

    #[test]
    fn euler_config() {
        let c = ConfigFile::parse(EULER).unwrap();
        let Problem::Euler(spec) = c.problem(None).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(spec.epsilon, rat(1, 2));
        assert_eq!(spec.data[&MultiIndex::new(1, 1, 0)][1], rat(-1, 10000));
        assert_eq!(c.grid().unwrap().unwrap().cardinality(), 36);
        let Problem::Euler(spec) = c.problem(Some(5)).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(spec.max_level, 5);
    }

    #[test]
    fn ns_config() {
        let text = r#"{
            "kind": "navier-stokes",
            "navier-stokes": {
                "nu": [1, 1], "lambda": [[1,1],[1,1],[1,1]], "n": 2,
                "a": [{"k": 1, "value": [[1,1],[-1,1],[0,1]]}],
                "b": [{"k": 2, "value": [[[[1,1],0,[-1,1]]], [[[-1,1],0,[-1,1]]], []]}]
            }
        }"#;
        let Problem::NavierStokes(spec) = ConfigFile::parse(text).unwrap().problem(None).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(spec.n, 2);
        assert_eq!(spec.initial(1)[1], int(-1));
        assert!(spec.forcing(2)[2].is_zero());
    }

    #[test]
    fn errors_name_the_field() {
        let bad = EULER.replace("[-1, 10000]", "0.5");
        let e = ConfigFile::parse(&bad).unwrap_err();
        assert!(e.message.contains("euler.modes[0].b[1]"), "{}", e.message);
        let bad = EULER.replace("[1, 2]", "[\"0.5\", 1]");
        let e = ConfigFile::parse(&bad).unwrap_err();
        assert!(e.message.contains("euler.epsilon"), "{}", e.message);
        let e = ConfigFile::parse(r#"{"kind": "euler"}"#).unwrap().problem(None).unwrap_err();
        assert!(e.message.contains("euler"));
        assert!(ConfigFile::parse(r#"{"kind": "euler", "extra": 1}"#).is_err());
    }

    #[test]
    fn grid_syntax() {
        let g = parse_grid("0:1:2,0:1:3,-1:1:4", "0:2:5").unwrap();
        assert_eq!(g.cardinality(), 120);
        assert!(parse_grid("0:1:2,0:1:3", "0:1:2").is_err());
        assert!(parse_grid("0:1,0:1:3,0:1:1", "0:1:2").is_err());
        assert_eq!(parse_times("0,0.5,1,2").unwrap(), vec![0.0, 0.5, 1.0, 2.0]);
        assert_eq!(parse_times("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
