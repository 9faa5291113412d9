//! Observations `(Y, A)`, file ingestion, and the grouped counts every
//! estimator works from.
//!
//! Labels carry model-dependent meaning:
//!
//! | label | Model I          | Model II         | Turnbull        |
//! |-------|------------------|------------------|-----------------|
//! | 0     | `T` observed     | `T` observed     | exact           |
//! | 1     | `V₁` observed    | right-censored   | right-censored  |
//! | 2     | left-censored    | `U₂` observed    | left-censored   |

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::measures::StepMeasure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    y: f64,
    a: u8,
}

impl Observation {
    pub fn new(y: f64, a: u8) -> Result<Self> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::Domain(format!("observation time {y} must be finite and nonnegative")));
        }
        if a > 2 {
            return Err(Error::Domain(format!("label {a} must be 0, 1 or 2")));
        }
        // fold -0.0 into 0.0 so grouping by equality and by ordering agree
        Ok(Self { y: if y == 0.0 { 0.0 } else { y }, a })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn a(&self) -> u8 {
        self.a
    }
}

/// Delimiter-separated layout of an observation file.
#[derive(Debug, Clone, Copy)]
pub struct CsvFormat {
    pub delimiter: char,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self { delimiter: ',' }
    }
}

/// Reads one observation per line: decimal `y`, delimiter, integer `a`.
/// An optional `y,a` header on the first non-blank line is skipped and blank lines are ignored.
pub fn parse_dataset<R: BufRead>(reader: R, format: CsvFormat) -> std::result::Result<Vec<Observation>, ParseError> {
    let mut out = Vec::new();
    let mut seen_row = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ParseError::Io(e.to_string()))?;
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        if !seen_row {
            seen_row = true;
            let fields: Vec<&str> = row.split(format.delimiter).map(str::trim).collect();
            if fields == ["y", "a"] {
                continue;
            }
        }
        out.push(parse_row(row, line_no, format.delimiter)?);
    }
    Ok(out)
}

fn parse_row(row: &str, line: usize, delimiter: char) -> std::result::Result<Observation, ParseError> {
    let fields: Vec<&str> = row.split(delimiter).map(str::trim).collect();
    if fields.len() != 2 {
        return Err(ParseError::FieldCount { line, found: fields.len() });
    }
    let y: f64 = fields[0].parse().map_err(|_| ParseError::NonNumeric { line })?;
    if !y.is_finite() {
        return Err(ParseError::NonFinite { line });
    }
    if y < 0.0 {
        return Err(ParseError::NegativeTime { line });
    }
    let a: u8 = match fields[1].parse() {
        Ok(a) if a <= 2 => a,
        _ => return Err(ParseError::InvalidLabel { line }),
    };
    Ok(Observation { y: if y == 0.0 { 0.0 } else { y }, a })
}

/// Sufficient statistics of a sample: distinct times `Z_1 < … < Z_M`, the
/// per-label counts `D_kj`, `N_j = #{Y_i ≤ Z_j}` and `Ñ_j = #{Y_i ≥ Z_j}`.
///
/// Indices are 0-based here; `n_rev(M)` is the conventional `Ñ_{M+1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSample {
    n: usize,
    z: Vec<f64>,
    d: [Vec<usize>; 3],
    n_cum: Vec<usize>,
    n_rev: Vec<usize>,
}

impl GroupedSample {
    /// Groups by exact floating-point equality of the times.
    pub fn group(obs: &[Observation]) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::Domain("cannot group an empty sample".into()));
        }
        let mut sorted: Vec<(f64, u8)> = obs.iter().map(|o| (o.y, o.a)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut z = Vec::new();
        let mut d: [Vec<usize>; 3] = Default::default();
        for (y, a) in sorted {
            if z.last() != Some(&y) {
                z.push(y);
                for dk in d.iter_mut() {
                    dk.push(0);
                }
            }
            *d[a as usize].last_mut().unwrap() += 1;
        }
        Ok(Self::assemble(z, d))
    }

    /// Builds a grouped sample from counts; grid points with no observation are dropped.
    pub fn from_counts(z: Vec<f64>, d0: Vec<usize>, d1: Vec<usize>, d2: Vec<usize>) -> Result<Self> {
        let m = z.len();
        if d0.len() != m || d1.len() != m || d2.len() != m {
            return Err(Error::Domain("count vectors must match the grid length".into()));
        }
        if z.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || z.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("grid must be strictly increasing finite nonnegative times".into()));
        }
        let keep: Vec<usize> = (0..m).filter(|&j| d0[j] + d1[j] + d2[j] > 0).collect();
        if keep.is_empty() {
            return Err(Error::Domain("cannot group an empty sample".into()));
        }
        let pick = |v: &[usize]| keep.iter().map(|&j| v[j]).collect::<Vec<_>>();
        let zz = keep.iter().map(|&j| z[j]).collect();
        Ok(Self::assemble(zz, [pick(&d0), pick(&d1), pick(&d2)]))
    }

    fn assemble(z: Vec<f64>, d: [Vec<usize>; 3]) -> Self {
        let m = z.len();
        let mut n_cum = Vec::with_capacity(m);
        let mut acc = 0;
        for j in 0..m {
            acc += d[0][j] + d[1][j] + d[2][j];
            n_cum.push(acc);
        }
        let n = acc;
        let n_rev = (0..m).map(|j| n - if j == 0 { 0 } else { n_cum[j - 1] }).collect();
        Self { n, z, d, n_cum, n_rev }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct times `M`.
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `D_k` for label `k`.
    pub fn d(&self, k: usize) -> &[usize] {
        &self.d[k]
    }

    /// `N_j` for every grid point.
    pub fn n_cum(&self) -> &[usize] {
        &self.n_cum
    }

    /// `Ñ_j` for every grid point.
    pub fn n_rev(&self) -> &[usize] {
        &self.n_rev
    }

    /// `N_j` with the convention `N_0 = 0`; `j` is 1-based.
    pub(crate) fn n_cum_1(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            self.n_cum[j - 1]
        }
    }

    /// `Ñ_j` with `Ñ_{M+1} = 0`; `j` is 1-based.
    pub(crate) fn n_rev_1(&self, j: usize) -> usize {
        if j > self.len() {
            0
        } else {
            self.n_rev[j - 1]
        }
    }

    pub fn count_label(&self, k: usize) -> usize {
        self.d[k].iter().sum()
    }

    /// Empirical subdistributions `H_n0, H_n1, H_n2` with masses `D_kj / n`.
    pub fn empirical_measures(&self) -> [StepMeasure; 3] {
        let n = self.n as f64;
        let build = |k: usize| {
            let atoms = self.z.iter().zip(&self.d[k]).map(|(&t, &c)| (t, c as f64 / n));
            StepMeasure::from_atoms(atoms).expect("empirical masses form a valid subdistribution")
        };
        [build(0), build(1), build(2)]
    }

    /// The multiset of observations, in grid order with labels ascending.
    pub fn expand(&self) -> Vec<Observation> {
        let mut out = Vec::with_capacity(self.n);
        for (j, &t) in self.z.iter().enumerate() {
            for k in 0..3 {
                for _ in 0..self.d[k][j] {
                    out.push(Observation { y: t, a: k as u8 });
                }
            }
        }
        out
    }
}

/// Convenience wrapper for [`GroupedSample::group`].
pub fn group(obs: &[Observation]) -> Result<GroupedSample> {
    GroupedSample::group(obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[serde(rename = "one")]
    One,
    #[serde(rename = "two")]
    Two,
    Turnbull,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::One => "one",
            Model::Two => "two",
            Model::Turnbull => "turnbull",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// observations at `y = 0` with label 0
    H0AtZero { count: usize },
    /// observations at `y = 0` with label 1 (Model I only)
    H1AtZero { count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::H0AtZero { count } => write!(f, "H0AtZero: {count} observation(s) with y = 0 and a = 0"),
            Violation::H1AtZero { count } => write!(f, "H1AtZero: {count} observation(s) with y = 0 and a = 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Model I needs `H_0({0}) = H_1({0}) = 0`; Model II and Turnbull need `H_0({0}) = 0`.
pub fn validate_for_model(g: &GroupedSample, model: Model) -> ValidationReport {
    let mut violations = Vec::new();
    if g.z.first() == Some(&0.0) {
        let d0 = g.d[0][0];
        let d1 = g.d[1][0];
        if d0 > 0 {
            violations.push(Violation::H0AtZero { count: d0 });
        }
        if model == Model::One && d1 > 0 {
            violations.push(Violation::H1AtZero { count: d1 });
        }
    }
    ValidationReport { violations }
}
