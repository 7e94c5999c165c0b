use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::components::ComponentKind;
use crate::error::{BbqpError, Result};

/// Tolerance on row sums of a valid configuration.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Rows read from a file whose sums are within this distance of 1 are
/// renormalised on load; it absorbs percentages that were rounded when
/// transcribed.
pub const ROUNDING_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matrix {
    Succ,
    Fail,
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Matrix::Succ => "msucc",
            Matrix::Fail => "mfail",
        })
    }
}

/// One broken configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoComponents,
    DuplicateComponent(ComponentKind),
    Shape {
        matrix: Matrix,
        expected: usize,
        row: Option<usize>,
        actual: usize,
    },
    Entry {
        matrix: Matrix,
        row: usize,
        col: usize,
        value: f64,
    },
    RowSum {
        matrix: Matrix,
        row: usize,
        sum: f64,
    },
    Prohibited {
        matrix: Matrix,
        component: ComponentKind,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoComponents => write!(f, "component list is empty"),
            Violation::DuplicateComponent(k) => write!(f, "component {k} listed more than once"),
            Violation::Shape {
                matrix,
                expected,
                row: None,
                actual,
            } => write!(f, "{matrix}: expected {expected} rows, found {actual}"),
            Violation::Shape {
                matrix,
                expected,
                row: Some(r),
                actual,
            } => write!(f, "{matrix}[{r}]: expected {expected} entries, found {actual}"),
            Violation::Entry {
                matrix,
                row,
                col,
                value,
            } => write!(f, "{matrix}[{row}][{col}] = {value} is not a probability"),
            Violation::RowSum { matrix, row, sum } => {
                write!(f, "{matrix}[{row}] sums to {sum}, expected 1")
            }
            Violation::Prohibited {
                matrix,
                component,
                value,
            } => write!(
                f,
                "{matrix}[{component}][{component}] = {value}, must be 0 (repeating {component} is pointless)"
            ),
        }
    }
}

/// A CMCS configuration: the component pool and both transition matrices.
/// Row `h`, column `h'` holds the probability of moving from component `h`
/// to `h'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmcsConfig {
    pub name: String,
    pub components: Vec<ComponentKind>,
    pub msucc: Vec<Vec<f64>>,
    pub mfail: Vec<Vec<f64>>,
}

/// Whether a self-transition of `k` is forbidden in `matrix`. With a shared
/// matrix (`msucc == mfail`) the chain cannot tell success from failure, so
/// only the idempotence rule applies.
pub(crate) fn self_loop_prohibited(matrix: Matrix, k: ComponentKind, shared: bool) -> bool {
    match matrix {
        Matrix::Succ => k.is_idempotent(),
        Matrix::Fail if shared => k.is_idempotent(),
        Matrix::Fail => k.is_hill_climber() && k.is_deterministic(),
    }
}

/// Checks every configuration invariant and lists what is broken. An empty
/// list means the configuration is valid.
pub fn validate_config(config: &CmcsConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let h = config.components.len();
    if h == 0 {
        out.push(Violation::NoComponents);
    }
    for (a, k) in config.components.iter().enumerate() {
        if config.components[..a].contains(k) {
            out.push(Violation::DuplicateComponent(*k));
        }
    }
    let shared = config.msucc == config.mfail;
    for (matrix, rows) in [(Matrix::Succ, &config.msucc), (Matrix::Fail, &config.mfail)] {
        if rows.len() != h {
            out.push(Violation::Shape {
                matrix,
                expected: h,
                row: None,
                actual: rows.len(),
            });
            continue;
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != h {
                out.push(Violation::Shape {
                    matrix,
                    expected: h,
                    row: Some(r),
                    actual: row.len(),
                });
                continue;
            }
            let mut entries_ok = true;
            for (c, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    entries_ok = false;
                    out.push(Violation::Entry {
                        matrix,
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if entries_ok && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                out.push(Violation::RowSum { matrix, row: r, sum });
            }
            let k = config.components[r];
            if self_loop_prohibited(matrix, k, shared) && row[r] != 0.0 {
                out.push(Violation::Prohibited {
                    matrix,
                    component: k,
                    value: row[r],
                });
            }
        }
    }
    out
}

/// True iff every row of both matrices has at most `k` non-zero entries.
pub fn is_k_row(config: &CmcsConfig, k: usize) -> bool {
    config
        .msucc
        .iter()
        .chain(&config.mfail)
        .all(|row| row.iter().filter(|&&v| v != 0.0).count() <= k)
}

impl CmcsConfig {
    pub fn validate(&self) -> Result<()> {
        let violations = validate_config(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(BbqpError::Config(violations))
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn matrix(&self, matrix: Matrix) -> &[Vec<f64>] {
        match matrix {
            Matrix::Succ => &self.msucc,
            Matrix::Fail => &self.mfail,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Rescales every row whose sum lies within `tolerance` of 1 so that it
    /// sums to exactly 1. Other rows are left for validation to report.
    pub fn renormalize_rows(&mut self, tolerance: f64) {
        for row in self.msucc.iter_mut().chain(self.mfail.iter_mut()) {
            let sum: f64 = row.iter().sum();
            let finite = row.iter().all(|v| v.is_finite() && *v >= 0.0);
            if finite && sum > 0.0 && (sum - 1.0).abs() <= tolerance {
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }

    /// Parses the JSON config format and renormalises rows within
    /// [`ROUNDING_TOLERANCE`] of summing to 1. Does not validate.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut config: CmcsConfig = serde_json::from_str(text)?;
        config.renormalize_rows(ROUNDING_TOLERANCE);
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BbqpError::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// JSON with one matrix row per line.
    pub fn to_json_string(&self) -> String {
        let rows = |m: &[Vec<f64>]| {
            m.iter()
                .map(|r| format!("    {}", serde_json::to_string(r).expect("floats serialise")))
                .collect::<Vec<_>>()
                .join(",\n")
        };
        format!(
            "{{\n  \"name\": {},\n  \"components\": {},\n  \"msucc\": [\n{}\n  ],\n  \"mfail\": [\n{}\n  ]\n}}\n",
            serde_json::to_string(&self.name).expect("string serialises"),
            serde_json::to_string(&self.components).expect("names serialise"),
            rows(&self.msucc),
            rows(&self.mfail),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| BbqpError::io(path, e))
    }
}
