//! Dense metric storage, clustering costs, ball queries and radius grids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MetricViolation, Result};

/// Above this many points the O(n^3) triangle check is skipped.
pub const TRIANGLE_CHECK_LIMIT: usize = 512;

/// Relative slack used by the triangle check and by threshold comparisons on
/// distances that came out of floating point arithmetic.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Median,
    Means,
    Supplier,
}

impl Objective {
    /// Per-client contribution of a distance: `d` for median and supplier, `d^2` for means.
    #[inline]
    pub fn contribution(self, d: f64) -> f64 {
        match self {
            Objective::Means => d * d,
            _ => d,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Median => "median",
            Objective::Means => "means",
            Objective::Supplier => "supplier",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Objective::Median),
            "means" => Ok(Objective::Means),
            "supplier" => Ok(Objective::Supplier),
            other => Err(Error::BadParameter(format!("unknown objective `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Finite, non-negative, zero diagonal, symmetric.
    Basic,
    /// Basic plus the triangle inequality over every triple.
    Full,
    /// Full below [`TRIANGLE_CHECK_LIMIT`] points, Basic above it.
    Auto,
}

/// Symmetric distance matrix over a point universe, with the client and
/// facility index sets it was loaded with.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    clients: Vec<usize>,
    facilities: Vec<usize>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major `data` (n*n entries) and validates it
    /// with [`Validation::Auto`].
    pub fn new(n: usize, data: Vec<f64>, clients: Vec<usize>, facilities: Vec<usize>) -> Result<Self> {
        Self::with_validation(n, data, clients, facilities, Validation::Auto)
    }

    pub fn with_validation(
        n: usize,
        data: Vec<f64>,
        mut clients: Vec<usize>,
        mut facilities: Vec<usize>,
        validation: Validation,
    ) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::BadParameter(format!(
                "distance data has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        for ids in [&mut clients, &mut facilities] {
            ids.sort_unstable();
            ids.dedup();
            if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: bad, len: n });
            }
        }
        let m = DistanceMatrix {
            n,
            data,
            clients,
            facilities,
        };
        m.check_basic()?;
        let full = match validation {
            Validation::Basic => false,
            Validation::Full => true,
            Validation::Auto => {
                if n > TRIANGLE_CHECK_LIMIT {
                    log::warn!("skipping triangle-inequality check for {n} points");
                }
                n <= TRIANGLE_CHECK_LIMIT
            }
        };
        if full {
            if let Some(v) = m.triangle_violation() {
                return Err(Error::Metric(v));
            }
        }
        Ok(m)
    }

    /// Euclidean distances between coordinate rows.
    pub fn from_points(points: &[Vec<f64>], clients: Vec<usize>, facilities: Vec<usize>) -> Result<Self> {
        let n = points.len();
        if let Some(dim) = points.first().map(Vec::len) {
            if let Some(i) = points.iter().position(|p| p.len() != dim) {
                return Err(Error::Schema(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    points[i].len()
                )));
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self::with_validation(n, data, clients, facilities, Validation::Basic)
    }

    fn check_basic(&self) -> Result<()> {
        let n = self.n;
        for u in 0..n {
            if self.data[u * n + u] != 0.0 {
                return Err(Error::Metric(MetricViolation::NonZeroDiagonal { u }));
            }
            for v in 0..n {
                let d = self.data[u * n + v];
                if !d.is_finite() {
                    return Err(Error::Metric(MetricViolation::NonFinite { u, v }));
                }
                if d < 0.0 {
                    return Err(Error::Metric(MetricViolation::Negative { u, v }));
                }
                if v > u && d != self.data[v * n + u] {
                    return Err(Error::Metric(MetricViolation::Asymmetric { u, v }));
                }
            }
        }
        Ok(())
    }

    /// First triple violating the triangle inequality, if any.
    pub fn triangle_violation(&self) -> Option<MetricViolation> {
        let n = self.n;
        for u in 0..n {
            for v in 0..n {
                let duv = self.data[u * n + v];
                for w in 0..n {
                    let duw = self.data[u * n + w];
                    let bound = duv + self.data[v * n + w];
                    if duw > bound + REL_TOL * duw.max(1.0) {
                        return Some(MetricViolation::Triangle { u, v, w });
                    }
                }
            }
        }
        None
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    pub fn clients(&self) -> &[usize] {
        &self.clients
    }

    pub fn facilities(&self) -> &[usize] {
        &self.facilities
    }

    pub fn is_facility(&self, f: usize) -> bool {
        self.facilities.binary_search(&f).is_ok()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.n })
        }
    }

    /// `d(p, S) = min_{s in S} d(p, s)`; infinite for empty `S`.
    #[inline]
    pub fn nearest(&self, p: usize, set: &[usize]) -> f64 {
        let row = &self.data[p * self.n..(p + 1) * self.n];
        set.iter().map(|&s| row[s]).fold(f64::INFINITY, f64::min)
    }

    /// Clustering cost of `set` against the matrix's own client set.
    pub fn cost(&self, set: &[usize], objective: Objective, weights: Option<&[f64]>) -> Result<f64> {
        self.cost_over(&self.clients, weights, set, objective)
    }

    /// Clustering cost of `set` against an explicit client list. Weights, when
    /// given, are parallel to `clients`. Supplier ignores weights.
    pub fn cost_over(
        &self,
        clients: &[usize],
        weights: Option<&[f64]>,
        set: &[usize],
        objective: Objective,
    ) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::EmptySolution);
        }
        for &i in set.iter().chain(clients) {
            self.check_index(i)?;
        }
        if let Some(w) = weights {
            if w.len() != clients.len() {
                return Err(Error::BadParameter(format!(
                    "{} weights for {} clients",
                    w.len(),
                    clients.len()
                )));
            }
        }
        Ok(self.cost_unchecked(clients, weights, set, objective))
    }

    pub(crate) fn cost_unchecked(
        &self,
        clients: &[usize],
        weights: Option<&[f64]>,
        set: &[usize],
        objective: Objective,
    ) -> f64 {
        match objective {
            Objective::Supplier => clients.iter().map(|&c| self.nearest(c, set)).fold(0.0, f64::max),
            _ => clients
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let w = weights.map_or(1.0, |w| w[i]);
                    w * objective.contribution(self.nearest(c, set))
                })
                .sum(),
        }
    }

    /// Closed ball `{p in within : d(center, p) <= radius}`.
    pub fn ball(&self, center: usize, radius: f64, within: &[usize]) -> Result<Vec<usize>> {
        self.check_index(center)?;
        if radius < 0.0 {
            return Err(Error::BadParameter(format!("negative radius {radius}")));
        }
        let mut out = Vec::new();
        for &p in within {
            self.check_index(p)?;
            if self.d(center, p) <= radius {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Smallest positive and largest distance among clients and facilities.
    pub fn distance_range(&self) -> Option<(f64, f64)> {
        let mut pts: Vec<usize> = self.clients.iter().chain(&self.facilities).copied().collect();
        pts.sort_unstable();
        pts.dedup();
        positive_range(self, &pts)
    }
}

pub(crate) fn positive_range(m: &DistanceMatrix, pts: &[usize]) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (i, &u) in pts.iter().enumerate() {
        for &v in &pts[i + 1..] {
            let d = m.d(u, v);
            if d > 0.0 {
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
    }
    (hi > 0.0).then_some((lo, hi))
}

/// Ascending list of admissible radii, always starting with an exact-hit zero level.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusGrid {
    eta: Option<f64>,
    levels: Vec<f64>,
}

impl RadiusGrid {
    /// `{0} ∪ {d_min (1+eta)^j : d_min (1+eta)^j < delta} ∪ {delta}`.
    pub fn geometric(d_min: f64, delta: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::BadParameter(format!("eta must be positive, got {eta}")));
        }
        if !(d_min > 0.0) || delta < d_min {
            return Err(Error::DegenerateMetric);
        }
        let mut levels = vec![0.0];
        let mut j = 0i32;
        loop {
            let level = d_min * (1.0 + eta).powi(j);
            if level >= delta * (1.0 - 1e-12) {
                break;
            }
            levels.push(level);
            j += 1;
        }
        levels.push(delta);
        Ok(RadiusGrid { eta: Some(eta), levels })
    }

    /// A grid holding exactly the given values (plus zero).
    pub fn exact<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut levels: Vec<f64> = std::iter::once(0.0).chain(values).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        RadiusGrid { eta: None, levels }
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Index of the smallest level `>= d`, i.e. the bucket `(prev, level]` holding `d`.
    #[inline]
    pub fn round_up(&self, d: f64) -> Option<usize> {
        let i = self.levels.partition_point(|&l| l < d);
        (i < self.levels.len()).then_some(i)
    }
}

/// Geometric grid spanning the positive distances among the matrix's clients and facilities.
pub fn radius_grid(metric: &DistanceMatrix, eta: f64) -> Result<RadiusGrid> {
    let (lo, hi) = metric.distance_range().ok_or(Error::DegenerateMetric)?;
    RadiusGrid::geometric(lo, hi, eta)
}

/// Grid made of every distinct client-facility distance.
pub fn exact_grid(metric: &DistanceMatrix, clients: &[usize], facilities: &[usize]) -> RadiusGrid {
    RadiusGrid::exact(
        clients
            .iter()
            .flat_map(|&c| facilities.iter().map(move |&f| metric.d(c, f))),
    )
}
