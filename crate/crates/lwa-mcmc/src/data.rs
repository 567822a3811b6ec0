//! Observation stores, subset selections and parameter vectors.

use crate::error::{Error, Result};

/// Correlation structure of the observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Iid,
    /// Observations are ordered by time index; subsets are contiguous windows.
    TimeSeries,
}

/// Immutable observation store: `n` real vectors of dimension `dim`,
/// optionally labeled. Stored row-major.
#[derive(Debug)]
pub struct Dataset {
    values: Vec<f64>,
    dim: usize,
    labels: Option<Vec<u32>>,
    flavor: Flavor,
    bounds: std::sync::OnceLock<Vec<Vec<(f64, f64)>>>,
}

impl Clone for Dataset {
    fn clone(&self) -> Self {
        Self {
            values: self.values.clone(),
            dim: self.dim,
            labels: self.labels.clone(),
            flavor: self.flavor,
            bounds: std::sync::OnceLock::new(),
        }
    }
}

impl Dataset {
    pub fn new(
        values: Vec<f64>,
        dim: usize,
        labels: Option<Vec<u32>>,
        flavor: Flavor,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("observation dimension must be >= 1".into()));
        }
        if values.is_empty() || values.len() % dim != 0 {
            return Err(Error::Config(format!(
                "value buffer length {} is not a positive multiple of dim {}",
                values.len(),
                dim
            )));
        }
        let n = values.len() / dim;
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(Error::Config(format!(
                    "labels length {} does not match {} observations",
                    l.len(),
                    n
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("observations must be finite".into()));
        }
        Ok(Self { values, dim, labels, flavor, bounds: std::sync::OnceLock::new() })
    }

    /// Univariate series, `dim = 1`.
    pub fn univariate(values: Vec<f64>, flavor: Flavor) -> Result<Self> {
        Self::new(values, 1, None, flavor)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees n >= 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Scalar value of observation `i`; only valid when `dim == 1`.
    pub fn value(&self, i: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.values[i]
    }

    /// Raw row-major buffer.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<u32> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// Number of label classes (`max + 1`), if labeled.
    pub fn n_classes(&self) -> Option<u32> {
        self.labels.as_ref().map(|l| l.iter().copied().max().unwrap_or(0) + 1)
    }

    /// Per-class, per-coordinate (min, max) bounds, computed once on first
    /// use. Unlabeled data form a single group. Used by analytic
    /// log-likelihood-ratio range bounds.
    pub fn class_coord_bounds(&self) -> &[Vec<(f64, f64)>] {
        self.bounds.get_or_init(|| {
            let classes = self.n_classes().unwrap_or(1) as usize;
            let mut bounds =
                vec![vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim]; classes];
            for i in 0..self.len() {
                let class = self.label(i).unwrap_or(0) as usize;
                for (d, &v) in self.row(i).iter().enumerate() {
                    let slot = &mut bounds[class][d];
                    slot.0 = slot.0.min(v);
                    slot.1 = slot.1.max(v);
                }
            }
            bounds
        })
    }
}

/// The latent subset variable: an explicit index set or a contiguous window.
///
/// Index sets are canonical (sorted, deduplicated); equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubsetSelection {
    Indices(Vec<usize>),
    Window { start: usize, len: usize },
}

impl SubsetSelection {
    /// Canonicalizing constructor: sorts and deduplicates.
    pub fn index_set(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput("subset must be non-empty".into()));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(SubsetSelection::Indices(indices))
    }

    pub fn window(start: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput("window must be non-empty".into()));
        }
        Ok(SubsetSelection::Window { start, len })
    }

    /// Subset size n.
    pub fn n(&self) -> usize {
        match self {
            SubsetSelection::Indices(v) => v.len(),
            SubsetSelection::Window { len, .. } => *len,
        }
    }

    /// Indices denoted by the selection, in increasing order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match self {
            SubsetSelection::Indices(v) => Box::new(v.iter().copied()),
            SubsetSelection::Window { start, len } => Box::new(*start..*start + *len),
        }
    }

    pub fn contains(&self, idx: usize) -> bool {
        match self {
            SubsetSelection::Indices(v) => v.binary_search(&idx).is_ok(),
            SubsetSelection::Window { start, len } => idx >= *start && idx < *start + *len,
        }
    }

    /// Check the selection against a dataset size.
    pub fn validate(&self, n_data: usize) -> Result<()> {
        match self {
            SubsetSelection::Indices(v) => {
                if v.last().is_some_and(|&last| last >= n_data) {
                    return Err(Error::Config(format!(
                        "subset index {} out of range for {} observations",
                        v.last().unwrap(),
                        n_data
                    )));
                }
            }
            SubsetSelection::Window { start, len } => {
                if start + len > n_data {
                    return Err(Error::Config(format!(
                        "window [{start}, {}) out of range for {n_data} observations",
                        start + len
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short display form for diagnostics and errors.
    pub fn describe(&self) -> String {
        match self {
            SubsetSelection::Indices(v) if v.len() <= 8 => format!("{v:?}"),
            SubsetSelection::Indices(v) => format!("{{{} indices}}", v.len()),
            SubsetSelection::Window { start, len } => format!("window[{start}..{}]", start + len),
        }
    }
}

/// Parameter vector; entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("parameter vector must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite parameter vector {values:?}")));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values.clone()
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
