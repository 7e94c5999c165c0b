//! BBQP problem data and its text file format.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BbqpError, Result};

/// Instance family tag carried in the file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Random,
    Biclique,
    MaxInduced,
    BMaxCut,
    MatrixFactor,
    Custom,
}

impl Family {
    pub const GENERATED: [Family; 5] = [
        Family::Random,
        Family::Biclique,
        Family::MaxInduced,
        Family::BMaxCut,
        Family::MatrixFactor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "Random",
            Family::Biclique => "Biclique",
            Family::MaxInduced => "MaxInduced",
            Family::BMaxCut => "BMaxCut",
            Family::MatrixFactor => "MatrixFactor",
            Family::Custom => "Custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BbqpError;

    fn from_str(s: &str) -> Result<Self> {
        let family = match s.to_ascii_lowercase().as_str() {
            "random" | "rand" => Family::Random,
            "biclique" => Family::Biclique,
            "maxinduced" | "max-induced" => Family::MaxInduced,
            "bmaxcut" | "maxcut" => Family::BMaxCut,
            "matrixfactor" | "matrix-factor" => Family::MatrixFactor,
            "custom" => Family::Custom,
            _ => {
                return Err(BbqpError::InvalidArgument(format!(
                    "unknown instance family `{s}`"
                )))
            }
        };
        Ok(family)
    }
}

/// A BBQP instance: dense `m × n` weights `Q`, row weights `c`, column
/// weights `d`. The constant term is always zero.
///
/// `Q` is stored twice, row-major and column-major, so that row and column
/// sweeps are both contiguous. Instances are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BbqpInstance {
    m: usize,
    n: usize,
    q: Vec<f64>,
    q_t: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    family: Family,
    seed: u64,
}

impl BbqpInstance {
    /// Builds an instance from a row-major `m·n` weight vector.
    pub fn new(
        m: usize,
        n: usize,
        q: Vec<f64>,
        c: Vec<f64>,
        d: Vec<f64>,
        family: Family,
        seed: u64,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(BbqpError::InvalidArgument(format!(
                "instance dimensions must be positive, got {m}x{n}"
            )));
        }
        check_len("Q", m * n, q.len())?;
        check_len("c", m, c.len())?;
        check_len("d", n, d.len())?;
        if let Some(bad) = q.iter().chain(&c).chain(&d).find(|w| !w.is_finite()) {
            return Err(BbqpError::InvalidArgument(format!(
                "instance weights must be finite, found {bad}"
            )));
        }
        let mut q_t = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                q_t[j * m + i] = q[i * n + j];
            }
        }
        Ok(BbqpInstance {
            m,
            n,
            q,
            q_t,
            c,
            d,
            family,
            seed,
        })
    }

    /// Builds a custom instance from nested rows.
    pub fn from_rows(q: &[Vec<f64>], c: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let m = q.len();
        let n = q.first().map_or(0, Vec::len);
        if let Some(row) = q.iter().find(|r| r.len() != n) {
            return Err(BbqpError::Dimension {
                what: "Q row",
                expected: n,
                actual: row.len(),
            });
        }
        let flat = q.iter().flatten().copied().collect();
        BbqpInstance::new(m, n, flat, c, d, Family::Custom, 0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    /// Row `i` of `Q` (length `n`).
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    /// Column `j` of `Q` (length `m`).
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.q_t[j * self.m..(j + 1) * self.m]
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Default identifier used by the registry and reports:
    /// `<Family>_<m>x<n>_s<seed>`.
    pub fn default_id(&self) -> String {
        format!("{}_{}x{}_s{}", self.family, self.m, self.n, self.seed)
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Returns the instance with rows and columns interchanged (`Qᵀ`, `d`, `c`).
    pub fn transposed(&self) -> BbqpInstance {
        BbqpInstance {
            m: self.n,
            n: self.m,
            q: self.q_t.clone(),
            q_t: self.q.clone(),
            c: self.d.clone(),
            d: self.c.clone(),
            family: self.family,
            seed: self.seed,
        }
    }

    /// Serialises to the text format:
    ///
    /// ```text
    /// BBQP <m> <n> <family> <seed>
    /// <c_1> ... <c_m>
    /// <d_1> ... <d_n>
    /// <q_11> ... <q_1n>
    /// ...
    /// ```
    ///
    /// Values use Rust's shortest round-trip float formatting.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "BBQP {} {} {} {}", self.m, self.n, self.family, self.seed)?;
        write_values(&mut w, &self.c)?;
        write_values(&mut w, &self.d)?;
        for i in 0..self.m {
            write_values(&mut w, self.row(i))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("instance text is ASCII")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| BbqpError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| BbqpError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BbqpError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses the text format; `origin` is only used in error messages.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| BbqpError::parse(origin, 1, "empty instance file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "BBQP" {
            return Err(BbqpError::parse(
                origin,
                hline + 1,
                "expected header `BBQP <m> <n> <family> <seed>`",
            ));
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| BbqpError::parse(origin, hline + 1, format!("bad {what} `{s}`")))
        };
        let m = num(fields[1], "row count")?;
        let n = num(fields[2], "column count")?;
        let family = fields[3]
            .parse::<Family>()
            .map_err(|e| BbqpError::parse(origin, hline + 1, e.to_string()))?;
        let seed = fields[4]
            .parse::<u64>()
            .map_err(|_| BbqpError::parse(origin, hline + 1, "bad seed"))?;

        let mut read_row = |len: usize, what: &str| -> Result<Vec<f64>> {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| BbqpError::parse(origin, 0, format!("missing {what} line")))?;
            let values = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        BbqpError::parse(origin, lno + 1, format!("bad number `{t}`"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != len {
                return Err(BbqpError::parse(
                    origin,
                    lno + 1,
                    format!("{what}: expected {len} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };
        let c = read_row(m, "c")?;
        let d = read_row(n, "d")?;
        let mut q = Vec::with_capacity(m * n);
        for _ in 0..m {
            q.extend(read_row(n, "Q row")?);
        }
        if lines.next().is_some() {
            return Err(BbqpError::parse(origin, 0, "trailing data after Q"));
        }
        BbqpInstance::new(m, n, q, c, d, family, seed)
    }
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(BbqpError::Dimension {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

fn write_values<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b" ")?;
        }
        first = false;
        write!(w, "{v}")?;
    }
    w.write_all(b"\n")
}

/// Direct evaluation of `f(x, y) = Σ c_i x_i + Σ d_j y_j + Σ q_ij x_i y_j`.
///
/// This is the reference used to check every incremental update; the
/// search itself never calls it.
pub fn objective_full(instance: &BbqpInstance, x: &[bool], y: &[bool]) -> Result<f64> {
    check_len("x", instance.m(), x.len())?;
    check_len("y", instance.n(), y.len())?;
    let mut total = 0.0;
    for (i, _) in x.iter().enumerate().filter(|(_, &xi)| xi) {
        total += instance.c()[i];
        for (j, &q) in instance.row(i).iter().enumerate() {
            if y[j] {
                total += q;
            }
        }
    }
    for (j, &dj) in instance.d().iter().enumerate() {
        if y[j] {
            total += dj;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> BbqpInstance {
        BbqpInstance::from_rows(
            &[vec![2.0, -1.0], vec![3.0, 5.0]],
            vec![1.0, -2.0],
            vec![0.0, 4.0],
        )
        .unwrap()
    }

    #[test]
    fn objective_of_empty_selection_is_zero() {
        let inst = toy();
        assert_eq!(objective_full(&inst, &[false; 2], &[false; 2]).unwrap(), 0.0);
    }

    #[test]
    fn objective_of_toy_selection() {
        let inst = toy();
        assert_eq!(objective_full(&inst, &[true, false], &[true, true]).unwrap(), 6.0);
    }

    #[test]
    fn objective_of_full_selection() {
        let inst = toy();
        // Σc + Σd + ΣQ = -1 + 4 + 9
        assert_eq!(objective_full(&inst, &[true; 2], &[true; 2]).unwrap(), 12.0);
    }

    #[test]
    fn objective_rejects_bad_dimensions() {
        let inst = toy();
        assert!(matches!(
            objective_full(&inst, &[true], &[true, true]),
            Err(BbqpError::Dimension { what: "x", .. })
        ));
    }

    #[test]
    fn construction_rejects_non_finite_and_bad_shapes() {
        assert!(BbqpInstance::from_rows(&[vec![f64::NAN]], vec![0.0], vec![0.0]).is_err());
        assert!(BbqpInstance::from_rows(&[vec![1.0, 2.0], vec![1.0]], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(BbqpInstance::from_rows(&[vec![1.0]], vec![0.0; 2], vec![0.0]).is_err());
        assert!(BbqpInstance::new(0, 1, vec![], vec![], vec![0.0], Family::Custom, 0).is_err());
    }

    #[test]
    fn text_format_round_trips_exactly() {
        let inst = BbqpInstance::new(
            2,
            3,
            vec![0.1, -1e300, 7.0, 1.0 / 3.0, -0.0, 12345678.9],
            vec![-2.5, 4.0],
            vec![0.0, 1e-12, -7.0],
            Family::BMaxCut,
            99,
        )
        .unwrap();
        let text = inst.to_text();
        assert!(text.starts_with("BBQP 2 3 BMaxCut 99\n"));
        let back = BbqpInstance::parse(&text, "mem").unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn parse_reports_malformed_input() {
        assert!(BbqpInstance::parse("", "mem").is_err());
        assert!(BbqpInstance::parse("BBQP 1 1 Custom 0\n0\n0\n", "mem").is_err());
        assert!(BbqpInstance::parse("BBQP 1 1 Custom 0\n0\n0\nx\n", "mem").is_err());
        assert!(BbqpInstance::parse("BBQP 1 2 Custom 0\n0\n0 0\n1\n", "mem").is_err());
        assert!(BbqpInstance::parse("QUBO 1 1 Custom 0\n0\n0\n1\n", "mem").is_err());
        assert!(BbqpInstance::parse("BBQP 1 1 Weird 0\n0\n0\n1\n", "mem").is_err());
        assert!(BbqpInstance::parse("BBQP 1 1 Custom 0\n0\n0\n1\n1\n", "mem").is_err());
    }

    #[test]
    fn transposed_swaps_roles() {
        let inst = toy();
        let t = inst.transposed();
        assert_eq!(t.q(1, 0), inst.q(0, 1));
        assert_eq!(t.c(), inst.d());
        assert_eq!(t.col(1), inst.row(1));
    }
}
