//! Instance and report file formats.
//!
//! Documents are JSON with sorted keys and floats printed at 17 significant
//! digits, so files are bit-stable across runs and parse back losslessly.

use casorati::slant_model::{SecondFundamentalForm, SlantInstance};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io::Write;

use crate::CliError;

/// Maximum tolerated asymmetry in a parsed `h` matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// On-disk form of a slant instance. The `h` field holds one full `n x n`
/// matrix per normal direction; the lower triangle is authoritative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub theta: f64,
    pub h: Vec<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl InstanceFile {
    pub fn from_instance(inst: &SlantInstance, seed: Option<u64>, label: Option<String>) -> Self {
        let n = inst.tangent_dim();
        let h = (0..inst.normal_count())
            .map(|alpha| {
                (0..n)
                    .map(|i| (0..n).map(|j| inst.sff().get(alpha, i, j)).collect())
                    .collect()
            })
            .collect();
        Self {
            n,
            m: inst.quaternionic_dim(),
            c: inst.curvature_constant(),
            theta: inst.theta(),
            h,
            seed,
            label,
        }
    }

    /// Validates shapes and symmetry and assembles the instance.
    #[allow(clippy::needless_range_loop)] // indices address matrix[i][j] and matrix[j][i]
    pub fn to_instance(&self) -> Result<SlantInstance, CliError> {
        let k = (4 * self.m).checked_sub(self.n).ok_or_else(|| {
            CliError::Input(format!(
                "n = {} exceeds ambient dimension {}",
                self.n,
                4 * self.m
            ))
        })?;
        if self.h.len() != k {
            return Err(CliError::Input(format!(
                "h has {} matrices, expected 4m - n = {k}",
                self.h.len()
            )));
        }
        let mut sff = SecondFundamentalForm::zeros(self.n, k);
        for (alpha, matrix) in self.h.iter().enumerate() {
            if matrix.len() != self.n || matrix.iter().any(|row| row.len() != self.n) {
                return Err(CliError::Input(format!(
                    "h[{alpha}] is not an {n} x {n} matrix",
                    n = self.n
                )));
            }
            for i in 0..self.n {
                for j in 0..=i {
                    let lower = matrix[i][j];
                    let upper = matrix[j][i];
                    if (lower - upper).abs() > SYMMETRY_TOL {
                        return Err(CliError::Input(format!(
                            "h[{alpha}] asymmetric at ({i},{j}): {lower} vs {upper}"
                        )));
                    }
                    sff.set(alpha, i, j, lower);
                }
            }
        }
        SlantInstance::new(self.n, self.m, self.c, self.theta, sff).map_err(CliError::from)
    }

    pub fn read(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
    }
}

/// Serializes any value as canonical JSON: object keys sorted, two-space
/// indentation, floats at 17 significant digits.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(value)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    let mut out = String::new();
    write_value(&value, 0, &mut out)?;
    out.push('\n');
    Ok(out)
}

fn write_value(value: &Value, indent: usize, out: &mut String) -> Result<(), CliError> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if let Some(f) = num.as_f64().filter(|_| num.is_f64()) {
                if !f.is_finite() {
                    return Err(CliError::Internal("non-finite number in report".into()));
                }
                out.push_str(&format!("{f:.16e}"));
            } else {
                out.push_str(&num.to_string());
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                write_value(item, indent + 1, out)?;
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push('{');
            // serde_json's default map is a BTreeMap, so iteration is sorted
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key serialization"));
                out.push_str(": ");
                write_value(item, indent + 1, out)?;
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
    Ok(())
}

/// Writes a canonical JSON document to a file or stdout.
pub fn emit<T: Serialize>(value: &T, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let text = to_canonical_json(value)?;
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(format!("stdout write failed: {e}"))),
    }
}
