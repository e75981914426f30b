//! Discrete probability measures on R^d and their one-dimensional push-forwards.
//!
//! An [`EmpiricalMeasure`] stores one support per row together with an explicit
//! weight vector. Projecting onto a [`Direction`] yields a [`ProjectedMeasure`]
//! holding `theta . x_i` for every support with the weights copied unchanged.

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a weight vector.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Tolerance on the Euclidean norm of a [`Direction`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Weighted finite point set in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    supports: Array2<f64>,
    weights: Array1<f64>,
    uniform: bool,
}

/// First invariant violated by a candidate measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    ZeroDimension,
    WeightCount { supports: usize, weights: usize },
    NonFiniteCoordinate { row: usize, col: usize },
    NegativeWeight { index: usize, value: f64 },
    NonFiniteWeight { index: usize },
    WeightSum(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "measure has no supports"),
            Violation::ZeroDimension => write!(f, "supports have dimension 0"),
            Violation::WeightCount { supports, weights } => {
                write!(f, "{supports} supports but {weights} weights")
            }
            Violation::NonFiniteCoordinate { row, col } => {
                write!(f, "non-finite coordinate at row {row}, column {col}")
            }
            Violation::NegativeWeight { index, value } => {
                write!(f, "negative weight {value} at index {index}")
            }
            Violation::NonFiniteWeight { index } => write!(f, "non-finite weight at index {index}"),
            Violation::WeightSum(s) => write!(f, "weights sum {s}"),
        }
    }
}

/// Checks the measure invariants on raw parts, reporting the first violation.
pub fn validate_parts(supports: ArrayView2<f64>, weights: ArrayView1<f64>) -> Result<(), Violation> {
    let (n, d) = supports.dim();
    if n == 0 {
        return Err(Violation::Empty);
    }
    if d == 0 {
        return Err(Violation::ZeroDimension);
    }
    if weights.len() != n {
        return Err(Violation::WeightCount { supports: n, weights: weights.len() });
    }
    for ((row, col), v) in supports.indexed_iter() {
        if !v.is_finite() {
            return Err(Violation::NonFiniteCoordinate { row, col });
        }
    }
    for (index, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Violation::NonFiniteWeight { index });
        }
        if w < 0.0 {
            return Err(Violation::NegativeWeight { index, value: w });
        }
    }
    let total: f64 = weights.sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Violation::WeightSum(total));
    }
    Ok(())
}

/// Reports the first violated invariant of an already built measure.
pub fn validate(mu: &EmpiricalMeasure) -> Result<(), Violation> {
    validate_parts(mu.supports.view(), mu.weights.view())
}

impl EmpiricalMeasure {
    /// Builds a weighted measure, rejecting any invariant violation.
    pub fn new(supports: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        validate_parts(supports.view(), weights.view())
            .map_err(|v| Error::InvalidMeasure(v.to_string()))?;
        let n = weights.len();
        let w0 = 1.0 / n as f64;
        let uniform = weights.iter().all(|&w| w == w0);
        Ok(Self { supports, weights, uniform })
    }

    /// Builds the uniform measure `(1/n) sum_i delta_{x_i}` over the rows of `supports`.
    pub fn uniform(supports: Array2<f64>) -> Result<Self> {
        let n = supports.nrows();
        if n == 0 {
            return Err(Error::InvalidMeasure(Violation::Empty.to_string()));
        }
        let weights = Array1::from_elem(n, 1.0 / n as f64);
        validate_parts(supports.view(), weights.view())
            .map_err(|v| Error::InvalidMeasure(v.to_string()))?;
        Ok(Self { supports, weights, uniform: true })
    }

    /// Uniform measure from a slice of points, each of length `d`.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let d = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(points.len() * d);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != d {
                return Err(Error::InvalidMeasure(format!(
                    "point {i} has {} coordinates, expected {d}",
                    p.len()
                )));
            }
            flat.extend_from_slice(p);
        }
        let supports = Array2::from_shape_vec((points.len(), d), flat)
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Self::uniform(supports)
    }

    pub fn len(&self) -> usize {
        self.supports.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.supports.ncols()
    }

    pub fn supports(&self) -> &Array2<f64> {
        &self.supports
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    /// True when every weight is exactly `1/n`.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Returns a copy with the same weights and new supports of identical shape.
    pub fn with_supports(&self, supports: Array2<f64>) -> Result<Self> {
        if supports.dim() != self.supports.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: supports.ncols() });
        }
        validate_parts(supports.view(), self.weights.view())
            .map_err(|v| Error::InvalidMeasure(v.to_string()))?;
        Ok(Self { supports, weights: self.weights.clone(), uniform: self.uniform })
    }

    /// Total order on measures by the bit patterns of their shape, supports and weights.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.supports
            .dim()
            .cmp(&other.supports.dim())
            .then_with(|| bits_cmp(self.supports.iter(), other.supports.iter()))
            .then_with(|| bits_cmp(self.weights.iter(), other.weights.iter()))
    }

    /// Reads the CSV point-cloud format: header `x1,...,xd[,w]`, one support per row.
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let has_weight = headers.iter().last().is_some_and(|h| h.eq_ignore_ascii_case("w"));
        let d = headers.len() - usize::from(has_weight);
        if d == 0 {
            return Err(Error::Parse("header declares no coordinate columns".into()));
        }
        let mut flat = Vec::new();
        let mut weights = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Parse(format!("row {}, column {}: cannot parse {field:?}", row + 1, col + 1))
                })?;
                if has_weight && col == d {
                    weights.push(v);
                } else {
                    flat.push(v);
                }
            }
        }
        let n = flat.len() / d;
        let supports = Array2::from_shape_vec((n, d), flat).map_err(|e| Error::Parse(e.to_string()))?;
        if has_weight {
            Self::new(supports, Array1::from(weights))
        } else {
            Self::uniform(supports)
        }
    }

    /// Writes the CSV point-cloud format; the weight column is emitted only for non-uniform measures.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        if !self.uniform {
            header.push("w".into());
        }
        wtr.write_record(&header)?;
        for (row, w) in self.supports.axis_iter(Axis(0)).zip(self.weights.iter()) {
            let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if !self.uniform {
                fields.push(w.to_string());
            }
            wtr.write_record(&fields)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn bits_cmp<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> Ordering {
    a.map(|v| v.to_bits()).cmp(b.map(|v| v.to_bits()))
}

/// A unit vector on S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Array1<f64>);

impl Direction {
    /// Wraps `coords`, requiring unit Euclidean norm within [`UNIT_TOLERANCE`].
    pub fn new(coords: Array1<f64>) -> Result<Self> {
        let norm = coords.dot(&coords).sqrt();
        if coords.is_empty() {
            return Err(Error::InvalidDimension(0, "direction must have at least one coordinate"));
        }
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidParameter(format!("direction norm {norm} is not 1")));
        }
        Ok(Self(coords))
    }

    /// Wraps coordinates already known to be normalized.
    pub(crate) fn from_normalized(coords: Array1<f64>) -> Self {
        Self(coords)
    }

    /// The `i`-th standard basis vector in R^d.
    pub fn axis(d: usize, i: usize) -> Self {
        let mut v = Array1::zeros(d);
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array1<f64> {
        self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.dot(&other.0)
    }
}

/// One-dimensional push-forward `theta # mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedMeasure {
    values: Vec<f64>,
    weights: Vec<f64>,
    uniform: bool,
}

impl ProjectedMeasure {
    /// Builds a 1D measure directly, checking the weight invariants.
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        let supports = Array2::from_shape_vec((values.len(), 1), values.clone())
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        validate_parts(supports.view(), ArrayView1::from(&weights[..]))
            .map_err(|v| Error::InvalidMeasure(v.to_string()))?;
        let w0 = 1.0 / values.len() as f64;
        let uniform = weights.iter().all(|&w| w == w0);
        Ok(Self { values, weights, uniform })
    }

    /// Uniform 1D measure over `values`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, vec![1.0 / n as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

/// Projects every support of `mu` onto `theta`.
pub fn project(mu: &EmpiricalMeasure, theta: &Direction) -> Result<ProjectedMeasure> {
    if theta.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: theta.dim() });
    }
    Ok(project_unchecked(mu, theta.coords().view()))
}

pub(crate) fn project_unchecked(mu: &EmpiricalMeasure, theta: ArrayView1<f64>) -> ProjectedMeasure {
    ProjectedMeasure {
        values: mu.supports.dot(&theta).to_vec(),
        weights: mu.weights.to_vec(),
        uniform: mu.uniform,
    }
}

pub(crate) fn check_same_dim(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<usize> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    Ok(mu.dim())
}
