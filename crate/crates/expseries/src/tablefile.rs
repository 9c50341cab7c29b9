//! Persisted coefficient tables.
//!
//! The header comes first, then one entry per line in mode order, so equal
//! tables always serialize to identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use expseries_core::lattice::MultiIndex;
use expseries_core::table::{CoefficientTable, ModeCoeffs, ProblemMeta};
use serde::{Deserialize, Serialize};

use crate::config::ProblemKind;
use crate::error::CliError;
use crate::json::{exppolys, polys3, q3, rationals, Poly, Q};

pub const FORMAT: &str = "expseries-table/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EulerHeader {
    zero_mode: [Q; 3],
    epsilon: Q,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NsHeader {
    nu: Q,
    lambda: [Q; 3],
    forcing: Vec<ForcingEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForcingEntry {
    k: u32,
    value: [Poly; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    k: [u32; 3],
    velocity: [Poly; 3],
    pressure: Poly,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    format: String,
    kind: ProblemKind,
    spec_hash: String,
    max_level: u32,
    #[serde(default)]
    euler: Option<EulerHeader>,
    #[serde(default, rename = "navier-stokes")]
    navier_stokes: Option<NsHeader>,
    entries: Vec<Entry>,
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("table values serialize")
}

/// Serializes a table to its canonical text.
pub fn to_string(table: &CoefficientTable) -> String {
    let mut out = String::new();
    let (kind, header_key, header) = match table.meta() {
        ProblemMeta::Euler { zero_mode, epsilon } => (
            ProblemKind::Euler,
            "euler",
            json(&EulerHeader {
                zero_mode: q3(zero_mode),
                epsilon: Q(epsilon.clone()),
            }),
        ),
        ProblemMeta::NavierStokes { nu, lambda, forcing } => (
            ProblemKind::NavierStokes,
            "navier-stokes",
            json(&NsHeader {
                nu: Q(nu.clone()),
                lambda: q3(lambda),
                forcing: forcing
                    .iter()
                    .map(|(k, b)| ForcingEntry {
                        k: *k,
                        value: polys3(b),
                    })
                    .collect(),
            }),
        ),
    };
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"format\": {},", json(&FORMAT));
    let _ = writeln!(out, "  \"kind\": {},", json(&kind));
    let _ = writeln!(out, "  \"spec_hash\": \"{:016x}\",", table.spec_hash());
    let _ = writeln!(out, "  \"max_level\": {},", table.max_level());
    let _ = writeln!(out, "  \"{header_key}\": {header},");
    let _ = writeln!(out, "  \"entries\": [");
    let n = table.len();
    for (i, (k, c)) in table.iter().enumerate() {
        let entry = Entry {
            k: k.0,
            velocity: polys3(&c.velocity),
            pressure: Poly(c.pressure.clone()),
        };
        let sep = if i + 1 < n { "," } else { "" };
        let _ = writeln!(out, "    {}{sep}", json(&entry));
    }
    let _ = writeln!(out, "  ]");
    let _ = writeln!(out, "}}");
    out
}

pub fn save(table: &CoefficientTable, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, to_string(table)).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn from_str(text: &str) -> Result<CoefficientTable, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: TableFile = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::config(format!("table field {}: {}", e.path(), e.inner())))?;
    if file.format != FORMAT {
        return Err(CliError::config(format!("table field format: unsupported \"{}\"", file.format)));
    }
    let spec_hash = u64::from_str_radix(&file.spec_hash, 16)
        .map_err(|_| CliError::config("table field spec_hash: not a 64-bit hex value"))?;
    let meta = match (file.kind, file.euler, file.navier_stokes) {
        (ProblemKind::Euler, Some(h), None) => ProblemMeta::Euler {
            zero_mode: rationals(h.zero_mode),
            epsilon: h.epsilon.0,
        },
        (ProblemKind::NavierStokes, None, Some(h)) => {
            let mut forcing = BTreeMap::new();
            for f in h.forcing {
                if forcing.insert(f.k, exppolys(f.value)).is_some() {
                    return Err(CliError::config(format!("table field navier-stokes.forcing: mode {} twice", f.k)));
                }
            }
            ProblemMeta::NavierStokes {
                nu: h.nu.0,
                lambda: rationals(h.lambda),
                forcing,
            }
        }
        _ => return Err(CliError::config("table header does not match its kind")),
    };
    let ns = matches!(meta, ProblemMeta::NavierStokes { .. });
    let mut table = CoefficientTable::new(meta, spec_hash, file.max_level);
    for (i, e) in file.entries.into_iter().enumerate() {
        let k = MultiIndex(e.k);
        if k.level() > file.max_level || (ns && (e.k[1] != 0 || e.k[2] != 0)) {
            return Err(CliError::config(format!("table field entries[{i}].k: mode {k} out of range")));
        }
        if table.get(&k).is_some() {
            return Err(CliError::config(format!("table field entries[{i}].k: mode {k} twice")));
        }
        table.insert(
            k,
            ModeCoeffs {
                velocity: exppolys(e.velocity),
                pressure: e.pressure.0,
            },
        );
    }
    if table.get(&MultiIndex::ZERO).is_none() {
        return Err(CliError::config("table has no zero mode"));
    }
    Ok(table)
}

pub fn load(path: &Path) -> Result<CoefficientTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    from_str(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
}
