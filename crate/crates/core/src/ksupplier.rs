//! 3-approximation for k-supplier under a k-partition matroid: guess the
//! optimal radius `L`, cover the clients greedily with `2L` balls, match the
//! cover representatives to blocks that have a facility within `L`, and fill
//! the unmatched blocks arbitrarily.

use crate::error::{Error, Result};
use crate::instance::{PartitionInstance, Transversal};
use crate::matching::hopcroft_karp;
use crate::metric::{Objective, REL_TOL};

/// Closed-ball test with a relative slack so that distances equal up to
/// rounding (e.g. `d(c,c') = d(c,o) + d(o,c')` on a line) stay inside.
#[inline]
fn within(d: f64, radius: f64) -> bool {
    d <= radius + REL_TOL * radius
}

/// Sorted distinct client–facility distances; contains the optimal radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdLadder(Vec<f64>);

impl ThresholdLadder {
    pub fn new(pinst: &PartitionInstance) -> Self {
        let m = pinst.metric();
        let fs = pinst.facility_points();
        let mut v: Vec<f64> = pinst
            .clients()
            .ids()
            .iter()
            .flat_map(|&c| fs.iter().map(move |&f| m.d(c, f)))
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        ThresholdLadder(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Greedy cover: representatives `X` and, per client, the index in `X` of the
/// representative that marked it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverSet {
    pub reps: Vec<usize>,
    /// Parallel to the instance's client list.
    pub rep_of: Vec<usize>,
}

pub fn build_cover(pinst: &PartitionInstance, radius: f64) -> CoverSet {
    cover_up_to(pinst, radius, usize::MAX)
}

/// Stops once more than `limit` representatives were taken.
fn cover_up_to(pinst: &PartitionInstance, radius: f64, limit: usize) -> CoverSet {
    let m = pinst.metric();
    let clients = pinst.clients().ids();
    let mut rep_of = vec![usize::MAX; clients.len()];
    let mut reps = Vec::new();
    for i in 0..clients.len() {
        if rep_of[i] != usize::MAX {
            continue;
        }
        let x = clients[i];
        let idx = reps.len();
        reps.push(x);
        if reps.len() > limit {
            break;
        }
        for (j, &c) in clients.iter().enumerate() {
            if rep_of[j] == usize::MAX && within(m.d(x, c), 2.0 * radius) {
                rep_of[j] = idx;
            }
        }
    }
    CoverSet { reps, rep_of }
}

/// Bipartite graph between representatives and blocks, plus a maximum matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchGraph {
    /// Per representative, the blocks having a facility within the radius.
    pub edges: Vec<Vec<usize>>,
    /// Per representative, its matched block.
    pub matching: Vec<Option<usize>>,
}

impl MatchGraph {
    pub fn saturates(&self) -> bool {
        self.matching.iter().all(Option::is_some)
    }
}

pub fn match_cover(pinst: &PartitionInstance, cover: &CoverSet, radius: f64) -> MatchGraph {
    let m = pinst.metric();
    let edges: Vec<Vec<usize>> = cover
        .reps
        .iter()
        .map(|&x| {
            (0..pinst.k())
                .filter(|&b| {
                    pinst.blocks()[b]
                        .iter()
                        .any(|&s| within(m.d(x, pinst.point(s)), radius))
                })
                .collect()
        })
        .collect();
    let matching = hopcroft_karp(&edges, pinst.k());
    MatchGraph { edges, matching }
}

/// One slot per block: for a matched `(x, b)` the lowest slot of block `b`
/// within `radius` of `x`, otherwise the lowest slot of the block.
pub fn assemble(pinst: &PartitionInstance, cover: &CoverSet, graph: &MatchGraph, radius: f64) -> Vec<usize> {
    let m = pinst.metric();
    let mut picks: Vec<Option<usize>> = vec![None; pinst.k()];
    for (xi, b) in graph.matching.iter().enumerate() {
        if let Some(b) = *b {
            let x = cover.reps[xi];
            picks[b] = pinst.blocks()[b]
                .iter()
                .copied()
                .find(|&s| within(m.d(x, pinst.point(s)), radius));
        }
    }
    picks
        .into_iter()
        .enumerate()
        .map(|(b, p)| p.unwrap_or(pinst.blocks()[b][0]))
        .collect()
}

/// Cover and matching at `radius`, if the radius is accepted
/// (`|X| <= k` and the matching saturates `X`).
pub fn try_threshold(pinst: &PartitionInstance, radius: f64) -> Option<(CoverSet, MatchGraph)> {
    let cover = cover_up_to(pinst, radius, pinst.k());
    if cover.reps.len() > pinst.k() {
        return None;
    }
    let graph = match_cover(pinst, &cover, radius);
    graph.saturates().then_some((cover, graph))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdSearch {
    #[default]
    Binary,
    Linear,
    /// Runs both and falls back to the linear result when they disagree.
    Checked,
}

/// Index of the smallest accepted threshold found by the given search.
///
/// Acceptance can flicker below OPT but holds at every value from OPT up, so
/// the binary search (which only steps past rejected values) still ends at or
/// below OPT.
fn search(pinst: &PartitionInstance, ladder: &[f64], mode: ThresholdSearch, evals: &mut u64) -> Option<usize> {
    let mut accepts = |i: usize| {
        *evals += 1;
        try_threshold(pinst, ladder[i]).is_some()
    };
    match mode {
        ThresholdSearch::Linear => (0..ladder.len()).find(|&i| accepts(i)),
        ThresholdSearch::Binary => {
            if ladder.is_empty() || !accepts(ladder.len() - 1) {
                return None;
            }
            let (mut lo, mut hi) = (0, ladder.len() - 1);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if accepts(mid) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Some(hi)
        }
        ThresholdSearch::Checked => {
            let linear = search(pinst, ladder, ThresholdSearch::Linear, evals);
            let binary = search(pinst, ladder, ThresholdSearch::Binary, evals);
            if linear != binary {
                log::warn!(
                    "threshold acceptance is not monotone here: binary search chose {binary:?}, linear scan {linear:?}"
                );
            }
            linear
        }
    }
}

pub fn solve_ksupplier_pm(pinst: &PartitionInstance, mode: ThresholdSearch) -> Result<Transversal> {
    if pinst.objective() != Objective::Supplier {
        return Err(Error::BadParameter(format!(
            "k-supplier solver called with {} objective",
            pinst.objective()
        )));
    }
    if pinst.clients().is_empty() {
        return Err(Error::BadParameter("no clients".into()));
    }
    let ladder = ThresholdLadder::new(pinst);
    let mut evals = 0;
    // at the largest client-facility distance every client is within reach of every block
    let idx = search(pinst, ladder.values(), mode, &mut evals).ok_or(Error::Infeasible)?;
    let radius = ladder.values()[idx];
    let (cover, graph) = try_threshold(pinst, radius).ok_or(Error::Infeasible)?;
    let picks = assemble(pinst, &cover, &graph, radius);
    let cost = pinst.transversal_cost(&picks);
    Ok(Transversal {
        picks,
        cost,
        guesses: evals,
    })
}
