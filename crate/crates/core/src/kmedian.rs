//! k-median / k-means under a k-partition matroid.
//!
//! For every guess of a leader client and a radius level per block, the
//! candidate set `Π_j` holds the block's facilities whose distance to the
//! leader falls in that radius bucket. A fictitious facility `F'_j` at distance
//! `2λ_j + min_{f∈Π_j} d(f,v)` from every point turns the objective into the
//! monotone submodular `improve(S) = cost(F') - cost(F' ∪ S)`, which is
//! maximized over transversals of the `Π_j`. The best transversal over all
//! guesses, measured on the real metric, is returned.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeMap;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{better, PartitionInstance, Transversal};
use crate::metric::{positive_range, DistanceMatrix, Objective, RadiusGrid, Validation};

/// How the inner transversal maximization is done for each guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Lazy greedy over the partition matroid.
    #[default]
    LazyGreedy,
    /// Every transversal of the candidate sets; exact but exponential in k.
    Exhaustive,
    /// Lowest slot of each candidate set (the 3-approximation warm-up).
    Arbitrary,
}

impl Selection {
    pub fn as_str(self) -> &'static str {
        match self {
            Selection::LazyGreedy => "lazy-greedy",
            Selection::Exhaustive => "exhaustive",
            Selection::Arbitrary => "arbitrary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridMode {
    #[default]
    Geometric,
    /// Every distinct client–facility distance is a level.
    Exact,
}

impl GridMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GridMode::Geometric => "geometric",
            GridMode::Exact => "exact",
        }
    }
}

/// Which leader clients are tried per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeaderSpace {
    /// Only options whose leader is the nearest client (lowest id on ties) of
    /// some facility in the candidate set. The optimal guess is always among them.
    #[default]
    Anchored,
    /// Every client.
    All,
}

impl LeaderSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            LeaderSpace::Anchored => "anchored",
            LeaderSpace::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmOptions {
    pub epsilon: f64,
    pub selection: Selection,
    pub grid: GridMode,
    pub leaders: LeaderSpace,
}

impl Default for PmOptions {
    fn default() -> Self {
        PmOptions {
            epsilon: 0.25,
            selection: Selection::default(),
            grid: GridMode::default(),
            leaders: LeaderSpace::default(),
        }
    }
}

/// Grid resolution used for a given objective: `e·ε/2` for median, `e·ε/16` for means.
pub fn grid_eta(objective: Objective, epsilon: f64) -> f64 {
    let e = std::f64::consts::E;
    match objective {
        Objective::Means => e * epsilon / 16.0,
        _ => e * epsilon / 2.0,
    }
}

/// One leader client and one radius per block.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderGuess {
    pub leaders: Vec<usize>,
    pub radii: Vec<f64>,
}

/// `Π_1..Π_k` as slot lists; an empty set rejects the guess.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSets {
    pub pis: Vec<Vec<usize>>,
}

impl CandidateSets {
    pub fn all_nonempty(&self) -> bool {
        self.pis.iter().all(|p| !p.is_empty())
    }
}

/// The grid the solver uses for `pinst`.
pub fn instance_grid(pinst: &PartitionInstance, grid: GridMode, epsilon: f64) -> Result<RadiusGrid> {
    let m = pinst.metric();
    let fs = pinst.facility_points();
    match grid {
        GridMode::Exact => Ok(crate::metric::exact_grid(m, pinst.clients().ids(), &fs)),
        GridMode::Geometric => {
            let mut pts: Vec<usize> = pinst.clients().ids().iter().chain(&fs).copied().collect();
            pts.sort_unstable();
            pts.dedup();
            match positive_range(m, &pts) {
                Some((lo, hi)) => RadiusGrid::geometric(lo, hi, grid_eta(pinst.objective(), epsilon)),
                None => Ok(RadiusGrid::exact([])),
            }
        }
    }
}

/// `f ∈ Π_j` iff `d(f, leader_j)` rounds up to the level of `radii[j]`.
pub fn candidate_sets(pinst: &PartitionInstance, grid: &RadiusGrid, guess: &LeaderGuess) -> Result<CandidateSets> {
    if guess.leaders.len() != pinst.k() || guess.radii.len() != pinst.k() {
        return Err(Error::BadParameter(format!(
            "guess has {} leaders for {} blocks",
            guess.leaders.len(),
            pinst.k()
        )));
    }
    let m = pinst.metric();
    let pis = pinst
        .blocks()
        .iter()
        .zip(guess.leaders.iter().zip(&guess.radii))
        .map(|(block, (&c, &r))| {
            let level = grid.round_up(r);
            block
                .iter()
                .copied()
                .filter(|&s| grid.round_up(m.d(c, pinst.point(s))) == level)
                .collect()
        })
        .collect();
    Ok(CandidateSets { pis })
}

/// The base metric extended by one fictitious facility per block.
#[derive(Debug, Clone)]
pub struct ExtendedMetric<'a> {
    pinst: &'a PartitionInstance,
    pis: Vec<Vec<usize>>,
    radii: Vec<f64>,
    /// Per client (instance order), base distance to the nearest fictitious facility.
    anchor: Vec<f64>,
}

impl<'a> ExtendedMetric<'a> {
    pub fn new(pinst: &'a PartitionInstance, cands: &CandidateSets, radii: &[f64]) -> Result<Self> {
        if let Some(j) = cands.pis.iter().position(Vec::is_empty) {
            return Err(Error::EmptyCandidate(j));
        }
        if cands.pis.len() != pinst.k() || radii.len() != pinst.k() {
            return Err(Error::BadParameter(
                "candidate sets and radii must have one entry per block".into(),
            ));
        }
        let mut ext = ExtendedMetric {
            pinst,
            pis: cands.pis.clone(),
            radii: radii.to_vec(),
            anchor: Vec::new(),
        };
        ext.anchor = pinst
            .clients()
            .ids()
            .iter()
            .map(|&c| {
                (0..pinst.k())
                    .map(|j| ext.fictitious_distance(j, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Ok(ext)
    }

    pub fn pis(&self) -> &[Vec<usize>] {
        &self.pis
    }

    /// `d(F'_j, v) = 2λ_j + min_{f∈Π_j} d(f, v)` for a point `v` of the base metric.
    pub fn fictitious_distance(&self, j: usize, v: usize) -> f64 {
        let m = self.pinst.metric();
        let near = self.pis[j]
            .iter()
            .map(|&s| m.d(self.pinst.point(s), v))
            .fold(f64::INFINITY, f64::min);
        2.0 * self.radii[j] + near
    }

    /// `cost(C', F' ∪ S)` for a set of slots `S`.
    pub fn cost_with(&self, set: &[usize]) -> f64 {
        let m = self.pinst.metric();
        let obj = self.pinst.objective();
        let clients = self.pinst.clients();
        clients
            .ids()
            .iter()
            .zip(clients.weights())
            .zip(&self.anchor)
            .map(|((&c, &w), &a)| {
                let d = set.iter().map(|&s| m.d(c, self.pinst.point(s))).fold(a, f64::min);
                w * obj.contribution(d)
            })
            .sum()
    }

    /// `cost(C', F')`.
    pub fn anchor_cost(&self) -> f64 {
        self.cost_with(&[])
    }

    pub fn improve(&self, set: &[usize]) -> f64 {
        self.anchor_cost() - self.cost_with(set)
    }

    /// Extended metric as a matrix: base points first, then `F'_1..F'_k`.
    pub fn to_matrix(&self) -> Result<DistanceMatrix> {
        let m = self.pinst.metric();
        let n = m.n();
        let k = self.pis.len();
        let size = n + k;
        let mut data = vec![0.0; size * size];
        for u in 0..n {
            for v in 0..n {
                data[u * size + v] = m.d(u, v);
            }
        }
        for j in 0..k {
            for v in 0..n {
                let d = self.fictitious_distance(j, v);
                data[(n + j) * size + v] = d;
                data[v * size + n + j] = d;
            }
            for j2 in 0..k {
                if j2 != j {
                    // shortest route through the base metric
                    let d = (0..n)
                        .map(|v| self.fictitious_distance(j, v) + self.fictitious_distance(j2, v))
                        .fold(f64::INFINITY, f64::min);
                    data[(n + j) * size + n + j2] = d;
                }
            }
        }
        let facilities = (0..size).collect();
        DistanceMatrix::with_validation(size, data, m.clients().to_vec(), facilities, Validation::Basic)
    }

    /// Lazy greedy over the partition matroid: `k` rounds, each adding the slot
    /// with the largest marginal gain among blocks not yet covered. Ties go to
    /// the lowest point id, then the lowest block.
    pub fn greedy_max(&self) -> Vec<usize> {
        let obj = self.pinst.objective();
        let m = self.pinst.metric();
        let clients = self.pinst.clients();
        let mut cur: Vec<f64> = self.anchor.clone();
        let gain = |s: usize, cur: &[f64]| -> f64 {
            let p = self.pinst.point(s);
            clients
                .ids()
                .iter()
                .zip(clients.weights())
                .zip(cur)
                .map(|((&c, &w), &d0)| {
                    let d = m.d(c, p);
                    if d < d0 {
                        w * (obj.contribution(d0) - obj.contribution(d))
                    } else {
                        0.0
                    }
                })
                .sum()
        };

        // (gain, point, block, slot, round the gain was computed in)
        type Entry = (Gain, Reverse<usize>, Reverse<usize>, usize, usize);
        let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
        for (j, pi) in self.pis.iter().enumerate() {
            for &s in pi {
                heap.push((Gain(gain(s, &cur)), Reverse(self.pinst.point(s)), Reverse(j), s, 0));
            }
        }
        let k = self.pis.len();
        let mut picks = vec![usize::MAX; k];
        let mut round = 0;
        while round < k {
            let Some((_, p, Reverse(j), s, stamp)) = heap.pop() else {
                break;
            };
            if picks[j] != usize::MAX {
                continue;
            }
            if stamp != round {
                heap.push((Gain(gain(s, &cur)), p, Reverse(j), s, round));
                continue;
            }
            picks[j] = s;
            let pt = self.pinst.point(s);
            for (c, d0) in clients.ids().iter().zip(cur.iter_mut()) {
                *d0 = d0.min(m.d(*c, pt));
            }
            round += 1;
        }
        picks
    }

    /// The transversal minimizing `cost(F' ∪ S)`, first in lexicographic order on ties.
    pub fn exhaustive_max(&self) -> Vec<usize> {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut idx = vec![0usize; self.pis.len()];
        let mut picks: Vec<usize> = self.pis.iter().map(|p| p[0]).collect();
        loop {
            let c = self.cost_with(&picks);
            if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                best = Some((c, picks.clone()));
            }
            // odometer, last block fastest
            let mut j = self.pis.len();
            loop {
                if j == 0 {
                    return best.map(|(_, p)| p).unwrap_or_default();
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.pis[j].len() {
                    picks[j] = self.pis[j][idx[j]];
                    break;
                }
                idx[j] = 0;
                picks[j] = self.pis[j][0];
            }
        }
    }

    pub fn arbitrary(&self) -> Vec<usize> {
        self.pis.iter().map(|p| p[0]).collect()
    }

    pub fn select(&self, selection: Selection) -> Vec<usize> {
        match selection {
            Selection::LazyGreedy => self.greedy_max(),
            Selection::Exhaustive => self.exhaustive_max(),
            Selection::Arbitrary => self.arbitrary(),
        }
    }
}

/// Total order on gains for the heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Gain(f64);

impl Eq for Gain {}

impl PartialOrd for Gain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gain {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn improve(ext: &ExtendedMetric<'_>, set: &[usize]) -> f64 {
    ext.improve(set)
}

pub fn greedy_matroid_max(ext: &ExtendedMetric<'_>) -> Vec<usize> {
    ext.greedy_max()
}

/// A distinct `(Π, λ)` pair available to one block.
#[derive(Debug, Clone, PartialEq)]
struct BlockOption {
    leader: usize,
    radius: f64,
    pi: Vec<usize>,
}

/// Per block, the distinct non-empty candidate sets over all leaders and
/// levels. Identical `(Π, λ)` pairs keep the lowest leader.
fn block_options(pinst: &PartitionInstance, grid: &RadiusGrid, leaders: LeaderSpace) -> Vec<Vec<BlockOption>> {
    let m = pinst.metric();
    let clients = pinst.clients().ids();
    let nearest_client = |p: usize| -> usize {
        *clients
            .iter()
            .min_by(|&&a, &&b| m.d(p, a).total_cmp(&m.d(p, b)).then(a.cmp(&b)))
            .expect("clients are non-empty")
    };
    pinst
        .blocks()
        .iter()
        .map(|block| {
            let anchors: Vec<usize> = block.iter().map(|&s| nearest_client(pinst.point(s))).collect();
            let mut seen: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut opts = Vec::new();
            for &c in clients {
                let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for (i, &s) in block.iter().enumerate() {
                    if let Some(level) = grid.round_up(m.d(c, pinst.point(s))) {
                        buckets.entry(level).or_default().push(i);
                    }
                }
                for (level, members) in buckets {
                    if leaders == LeaderSpace::Anchored && !members.iter().any(|&i| anchors[i] == c) {
                        continue;
                    }
                    let pi: Vec<usize> = members.iter().map(|&i| block[i]).collect();
                    // compare by block position so identical blocks get aligned option lists
                    let key = (level, members);
                    if seen.contains_key(&key) {
                        continue;
                    }
                    seen.insert(key, opts.len());
                    opts.push(BlockOption {
                        leader: c,
                        radius: grid.levels()[level],
                        pi,
                    });
                }
            }
            opts
        })
        .collect()
}

/// Solves one partition instance; the guess loop runs on the current rayon pool.
pub fn solve_kmedian_pm(pinst: &PartitionInstance, opts: &PmOptions) -> Result<Transversal> {
    if pinst.objective() == Objective::Supplier {
        return Err(Error::BadParameter(
            "k-median solver called with the supplier objective".into(),
        ));
    }
    if !(opts.epsilon > 0.0) || !opts.epsilon.is_finite() {
        return Err(Error::BadParameter(format!(
            "epsilon must be positive, got {}",
            opts.epsilon
        )));
    }
    if pinst.clients().is_empty() {
        return Err(Error::BadParameter("no clients".into()));
    }
    let grid = instance_grid(pinst, opts.grid, opts.epsilon)?;
    let options = block_options(pinst, &grid, opts.leaders);
    if let Some(j) = options.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCandidate(j));
    }

    // blocks listing the same points are interchangeable: only non-decreasing option indices
    let k = pinst.k();
    let twin_of: Vec<Option<usize>> = (0..k)
        .map(|j| (0..j).rev().find(|&i| pinst.block_points(i) == pinst.block_points(j)))
        .collect();

    let radix: Vec<u64> = options.iter().map(|o| o.len() as u64).collect();
    let total = radix
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r))
        .ok_or_else(|| Error::BadParameter("guess space exceeds 2^64".into()))?;

    let eval = |code: u64| -> Option<(f64, Vec<usize>)> {
        let mut rest = code;
        let mut choice = vec![0usize; k];
        for j in (0..k).rev() {
            choice[j] = (rest % radix[j]) as usize;
            rest /= radix[j];
        }
        if (0..k).any(|j| twin_of[j].is_some_and(|i| choice[i] > choice[j])) {
            return None;
        }
        let cands = CandidateSets {
            pis: (0..k).map(|j| options[j][choice[j]].pi.clone()).collect(),
        };
        let radii: Vec<f64> = (0..k).map(|j| options[j][choice[j]].radius).collect();
        let ext = ExtendedMetric::new(pinst, &cands, &radii).ok()?;
        let picks = ext.select(opts.selection);
        Some((pinst.transversal_cost(&picks), picks))
    };

    let (best, evaluated) = (0..total)
        .into_par_iter()
        .map(|code| match eval(code) {
            Some(r) => (Some(r), 1u64),
            None => (None, 0),
        })
        .reduce(
            || (None, 0),
            |(a, na), (b, nb)| {
                let best = match (a, b) {
                    (Some(a), Some(b)) => Some(if better((b.0, &b.1), (a.0, &a.1)) { b } else { a }),
                    (a, b) => a.or(b),
                };
                (best, na + nb)
            },
        );
    let (cost, picks) = best.ok_or(Error::Infeasible)?;
    log::debug!("k-median PM: {evaluated} guesses over {} grid levels", grid.len());
    Ok(Transversal {
        picks,
        cost,
        guesses: evaluated,
    })
}

/// Per block, the single-block guesses the solver enumerates.
pub fn guess_options(pinst: &PartitionInstance, opts: &PmOptions) -> Result<Vec<Vec<(LeaderGuess, CandidateSets)>>> {
    let grid = instance_grid(pinst, opts.grid, opts.epsilon)?;
    Ok(block_options(pinst, &grid, opts.leaders)
        .into_iter()
        .map(|os| {
            os.into_iter()
                .map(|o| {
                    (
                        LeaderGuess {
                            leaders: vec![o.leader],
                            radii: vec![o.radius],
                        },
                        CandidateSets { pis: vec![o.pi] },
                    )
                })
                .collect()
        })
        .collect())
}
