//! Weighted client subsets that preserve k-median / k-means costs.
//!
//! Construction is sensitivity sampling: a bicriteria seeding (D^z sampling
//! of `2k` centers) gives every client an importance score, clients are drawn
//! i.i.d. in proportion to it and weighted by inverse probability, and the
//! weights of each seeding cluster are rescaled to the cluster's true size.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, Objective};

/// Client ids with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedClients {
    ids: Vec<usize>,
    weights: Vec<f64>,
    nu: f64,
    delta: f64,
}

impl WeightedClients {
    /// Every client of `metric` with unit weight.
    pub fn all(metric: &DistanceMatrix) -> Self {
        Self::unit(metric.clients().to_vec())
    }

    pub fn unit(ids: Vec<usize>) -> Self {
        let weights = vec![1.0; ids.len()];
        WeightedClients {
            ids,
            weights,
            nu: 0.0,
            delta: 0.0,
        }
    }

    pub fn new(ids: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(Error::BadParameter(format!(
                "{} ids but {} weights",
                ids.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::BadParameter(format!("client weight {w} is not positive")));
        }
        Ok(WeightedClients {
            ids,
            weights,
            nu: 0.0,
            delta: 0.0,
        })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Distortion parameter; zero for pass-through sets.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_pass_through(&self) -> bool {
        self.nu == 0.0 && self.weights.iter().all(|&w| w == 1.0)
    }
}

/// `⌈2 ν^-2 · k · ln|U|⌉`.
pub fn coreset_size_bound(universe: usize, k: usize, nu: f64) -> usize {
    let ln_u = (universe.max(2) as f64).ln();
    (2.0 / (nu * nu) * k as f64 * ln_u).ceil() as usize
}

pub fn build_coreset(
    metric: &DistanceMatrix,
    k: usize,
    nu: f64,
    delta: f64,
    objective: Objective,
    seed: u64,
) -> Result<WeightedClients> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::BadParameter(format!("nu must lie in (0,1), got {nu}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if objective == Objective::Supplier {
        return Err(Error::BadParameter(
            "no coreset construction for the supplier objective".into(),
        ));
    }
    if k == 0 || metric.facilities().is_empty() {
        return Err(Error::BadParameter("coreset needs k >= 1 and a facility".into()));
    }
    let clients = metric.clients();
    let m = coreset_size_bound(metric.n(), k, nu);
    if m >= clients.len() {
        return Ok(WeightedClients::all(metric));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (assign, dist) = seed_centers(metric, k, objective, &mut rng);

    let mut cluster_size: BTreeMap<usize, usize> = BTreeMap::new();
    for &a in &assign {
        *cluster_size.entry(a).or_default() += 1;
    }
    let contrib: Vec<f64> = dist.iter().map(|&d| objective.contribution(d)).collect();
    let total: f64 = contrib.iter().sum();
    let sens: Vec<f64> = contrib
        .iter()
        .zip(&assign)
        .map(|(&c, a)| {
            let share = if total > 0.0 { c / total } else { 0.0 };
            share + 1.0 / cluster_size[a] as f64
        })
        .collect();
    let sens_total: f64 = sens.iter().sum();
    let sampler = WeightedIndex::new(&sens).map_err(|e| Error::BadParameter(e.to_string()))?;

    let mut picked: BTreeMap<usize, f64> = BTreeMap::new();
    for _ in 0..m {
        let i = sampler.sample(&mut rng);
        let q = sens[i] / sens_total;
        *picked.entry(i).or_default() += 1.0 / (m as f64 * q);
    }

    let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
    for (&i, &w) in &picked {
        *mass.entry(assign[i]).or_default() += w;
    }
    let mut ids = Vec::with_capacity(picked.len());
    let mut weights = Vec::with_capacity(picked.len());
    for (&i, &w) in &picked {
        let cluster = assign[i];
        ids.push(clients[i]);
        weights.push(w * cluster_size[&cluster] as f64 / mass[&cluster]);
    }
    let mut out = WeightedClients::new(ids, weights)?;
    out.nu = nu;
    out.delta = delta;
    Ok(out)
}

/// D^z seeding of up to `2k` facility centers. Returns, per client (in client
/// order), the index of its center and the distance to it.
fn seed_centers(
    metric: &DistanceMatrix,
    k: usize,
    objective: Objective,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<f64>) {
    let clients = metric.clients();
    let facilities = metric.facilities();
    let budget = (2 * k).min(facilities.len());
    let nearest_facility = |c: usize, taken: &[usize]| -> Option<usize> {
        facilities
            .iter()
            .copied()
            .filter(|f| !taken.contains(f))
            .min_by(|&a, &b| metric.d(c, a).total_cmp(&metric.d(c, b)).then(a.cmp(&b)))
    };

    let mut centers = Vec::with_capacity(budget);
    let first = clients[rng.gen_range(0..clients.len())];
    centers.extend(nearest_facility(first, &centers));
    let mut dist: Vec<f64> = clients.iter().map(|&c| metric.d(c, centers[0])).collect();
    let mut assign = vec![0usize; clients.len()];

    while centers.len() < budget {
        let w: Vec<f64> = dist.iter().map(|&d| objective.contribution(d)).collect();
        let Ok(pick) = WeightedIndex::new(&w) else { break };
        let c = clients[pick.sample(rng)];
        let Some(f) = nearest_facility(c, &centers) else { break };
        let idx = centers.len();
        centers.push(f);
        for (i, &cl) in clients.iter().enumerate() {
            let d = metric.d(cl, f);
            if d < dist[i] {
                dist[i] = d;
                assign[i] = idx;
            }
        }
    }
    (assign, dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> DistanceMatrix {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        DistanceMatrix::from_points(&pts, (0..n).collect(), (0..n).collect()).unwrap()
    }

    #[test]
    fn small_instances_pass_through() {
        let m = line(10);
        let w = build_coreset(&m, 3, 0.5, 0.1, Objective::Median, 7).unwrap();
        assert!(w.is_pass_through());
        assert_eq!(w, WeightedClients::all(&m));
        for s in [[0usize, 5, 9], [1, 2, 3]] {
            assert_eq!(
                m.cost_over(w.ids(), Some(w.weights()), &s, Objective::Median).unwrap(),
                m.cost(&s, Objective::Median, None).unwrap()
            );
        }
    }

    #[test]
    fn bad_parameters() {
        let m = line(10);
        for (nu, delta, obj) in [
            (0.0, 0.1, Objective::Median),
            (1.0, 0.1, Objective::Median),
            (0.5, 0.0, Objective::Means),
            (0.5, 0.1, Objective::Supplier),
        ] {
            assert!(matches!(
                build_coreset(&m, 2, nu, delta, obj, 0),
                Err(Error::BadParameter(_))
            ));
        }
        assert!(WeightedClients::new(vec![0, 1], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn size_bound_and_total_weight() {
        let m = line(1200);
        let nu = 0.4;
        let w = build_coreset(&m, 2, nu, 0.1, Objective::Median, 3).unwrap();
        assert!(!w.is_pass_through());
        assert!(w.len() <= coreset_size_bound(m.n(), 2, nu));
        let total = w.total_weight();
        let n = m.clients().len() as f64;
        assert!(
            total >= (1.0 - nu) * n && total <= (1.0 + nu) * n,
            "total weight {total}"
        );
        // singleton solutions: both sides of the coreset inequality are linear in the weights
        for f in [0usize, 600, 1199] {
            let exact = m.cost(&[f], Objective::Median, None).unwrap();
            let approx = m
                .cost_over(w.ids(), Some(w.weights()), &[f], Objective::Median)
                .unwrap();
            assert!((approx - exact).abs() <= nu * exact, "f={f}: {approx} vs {exact}");
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let m = line(1200);
        let a = build_coreset(&m, 2, 0.4, 0.1, Objective::Means, 11).unwrap();
        let b = build_coreset(&m, 2, 0.4, 0.1, Objective::Means, 11).unwrap();
        assert_eq!(a, b);
    }
}
