//! Problem objects: diversity instances over possibly intersecting groups,
//! partition-matroid instances, and solutions with their feasibility checks.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::coreset::WeightedClients;
use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, Objective};

/// Group membership of one facility, one bit per group. Packs 64 groups per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharacteristicVector {
    len: usize,
    words: Vec<u64>,
}

impl CharacteristicVector {
    pub fn zeros(len: usize) -> Self {
        CharacteristicVector {
            len,
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            v.set(i);
        }
        v
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Adds this vector into an integer accumulator of the same length.
    pub fn add_to(&self, acc: &mut [usize]) {
        for (i, a) in acc.iter_mut().enumerate() {
            *a += usize::from(self.get(i));
        }
    }

    /// `self >= other` element-wise.
    pub fn dominates(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == *b)
    }
}

impl fmt::Display for CharacteristicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `k` facilities to choose from `F` with at least `r_i` of them in each group `G_i`.
#[derive(Debug, Clone)]
pub struct DiversityInstance {
    metric: Arc<DistanceMatrix>,
    groups: Vec<Vec<usize>>,
    requirements: Vec<usize>,
    k: usize,
    objective: Objective,
    labels: Option<Vec<String>>,
    /// Parallel to `metric.facilities()`.
    membership: Vec<CharacteristicVector>,
}

impl DiversityInstance {
    pub fn new(
        metric: Arc<DistanceMatrix>,
        mut groups: Vec<Vec<usize>>,
        requirements: Vec<usize>,
        k: usize,
        objective: Objective,
    ) -> Result<Self> {
        let t = groups.len();
        if t == 0 {
            return Err(Error::Schema("at least one group is required".into()));
        }
        if requirements.len() != t {
            return Err(Error::Schema(format!(
                "{} requirements for {t} groups",
                requirements.len()
            )));
        }
        if k == 0 {
            return Err(Error::Schema("k must be positive".into()));
        }
        if k > metric.facilities().len() {
            return Err(Error::Schema(format!(
                "k = {k} exceeds the {} facilities",
                metric.facilities().len()
            )));
        }
        if metric.clients().is_empty() {
            return Err(Error::Schema("client set is empty".into()));
        }
        if let Some(i) = requirements.iter().position(|&r| r > k) {
            return Err(Error::Schema(format!(
                "requirement r[{i}] = {} exceeds k = {k}",
                requirements[i]
            )));
        }
        let facilities = metric.facilities();
        let mut membership = vec![CharacteristicVector::zeros(t); facilities.len()];
        for (gi, g) in groups.iter_mut().enumerate() {
            g.sort_unstable();
            g.dedup();
            for &f in g.iter() {
                let pos = facilities
                    .binary_search(&f)
                    .map_err(|_| Error::Schema(format!("group {gi} contains {f}, which is not a facility")))?;
                membership[pos].set(gi);
            }
        }
        Ok(DiversityInstance {
            metric,
            groups,
            requirements,
            k,
            objective,
            labels: None,
            membership,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.metric.n() {
            return Err(Error::Schema(format!(
                "{} labels for {} points",
                labels.len(),
                self.metric.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn metric(&self) -> &Arc<DistanceMatrix> {
        &self.metric
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn requirements(&self) -> &[usize] {
        &self.requirements
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.groups.len()
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn characteristic_vector(&self, f: usize) -> Result<&CharacteristicVector> {
        let pos = self
            .metric
            .facilities()
            .binary_search(&f)
            .map_err(|_| Error::IndexOutOfRange {
                index: f,
                len: self.metric.n(),
            })?;
        Ok(&self.membership[pos])
    }

    /// `(facility, χ_f)` pairs in facility order.
    pub fn memberships(&self) -> impl Iterator<Item = (usize, &CharacteristicVector)> {
        self.metric.facilities().iter().copied().zip(&self.membership)
    }

    /// `|S| = k`, `S ⊆ F` and `|S ∩ G_i| >= r_i` for every group.
    pub fn check_div_r_sat(&self, set: &[usize]) -> bool {
        let distinct: BTreeSet<usize> = set.iter().copied().collect();
        if distinct.len() != set.len() || set.len() != self.k {
            return false;
        }
        let mut counts = vec![0usize; self.t()];
        for &f in set {
            match self.characteristic_vector(f) {
                Ok(chi) => chi.add_to(&mut counts),
                Err(_) => return false,
            }
        }
        counts.iter().zip(&self.requirements).all(|(c, r)| c >= r)
    }

    /// True when the groups are pairwise disjoint and requirements sum to `k`.
    pub fn is_fair_instance(&self) -> bool {
        self.fair_check().is_ok()
    }

    pub(crate) fn fair_check(&self) -> Result<()> {
        let sum: usize = self.requirements.iter().sum();
        if sum != self.k {
            return Err(Error::RequirementSumMismatch { sum, k: self.k });
        }
        let mut owner = vec![usize::MAX; self.metric.n()];
        for (gi, g) in self.groups.iter().enumerate() {
            for &f in g {
                if owner[f] != usize::MAX {
                    return Err(Error::NotDisjoint { a: owner[f], b: gi });
                }
                owner[f] = gi;
            }
        }
        Ok(())
    }

    /// Exactly `r_i` chosen facilities per group (fair clustering feasibility).
    pub fn check_exact_per_group(&self, set: &[usize]) -> bool {
        let distinct: BTreeSet<usize> = set.iter().copied().collect();
        if distinct.len() != set.len() || set.len() != self.k {
            return false;
        }
        self.groups
            .iter()
            .zip(&self.requirements)
            .all(|(g, &r)| set.iter().filter(|f| g.binary_search(f).is_ok()).count() == r)
    }

    pub fn cost(&self, set: &[usize]) -> Result<f64> {
        self.metric.cost(set, self.objective, None)
    }
}

/// `k` disjoint facility blocks; a solution takes exactly one facility per block.
///
/// Block members are *slots*. Each slot names a point of `metric`; two slots
/// may name the same point, which models a zero-distance copy of a facility.
/// `origin` maps every point of `metric` back to a point id of the instance the
/// partition was derived from.
#[derive(Debug, Clone)]
pub struct PartitionInstance {
    metric: Arc<DistanceMatrix>,
    slots: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    clients: WeightedClients,
    objective: Objective,
    origin: Vec<usize>,
}

impl PartitionInstance {
    /// Blocks are given as lists of points; a point listed in several blocks
    /// becomes one slot per block.
    pub fn new(
        metric: Arc<DistanceMatrix>,
        block_points: Vec<Vec<usize>>,
        clients: WeightedClients,
        objective: Objective,
    ) -> Result<Self> {
        let origin = (0..metric.n()).collect();
        Self::with_origin(metric, block_points, clients, objective, origin)
    }

    pub fn with_origin(
        metric: Arc<DistanceMatrix>,
        block_points: Vec<Vec<usize>>,
        clients: WeightedClients,
        objective: Objective,
        origin: Vec<usize>,
    ) -> Result<Self> {
        if origin.len() != metric.n() {
            return Err(Error::BadParameter("origin map must cover every point".into()));
        }
        if block_points.is_empty() {
            return Err(Error::BadParameter("at least one block is required".into()));
        }
        for &c in clients.ids() {
            if c >= metric.n() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    len: metric.n(),
                });
            }
        }
        let mut slots = Vec::new();
        let mut blocks = Vec::with_capacity(block_points.len());
        for (bi, mut pts) in block_points.into_iter().enumerate() {
            if pts.is_empty() {
                return Err(Error::EmptyBlock(bi));
            }
            pts.sort_unstable();
            if pts.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::BadParameter(format!("block {bi} lists a point twice")));
            }
            let mut block = Vec::with_capacity(pts.len());
            for p in pts {
                if p >= metric.n() {
                    return Err(Error::IndexOutOfRange {
                        index: p,
                        len: metric.n(),
                    });
                }
                if !metric.is_facility(p) {
                    return Err(Error::BadParameter(format!("block {bi} contains non-facility {p}")));
                }
                block.push(slots.len());
                slots.push(p);
            }
            blocks.push(block);
        }
        Ok(PartitionInstance {
            metric,
            slots,
            blocks,
            clients,
            objective,
            origin,
        })
    }

    pub fn metric(&self) -> &Arc<DistanceMatrix> {
        &self.metric
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Point of `metric` named by a slot.
    #[inline]
    pub fn point(&self, slot: usize) -> usize {
        self.slots[slot]
    }

    pub fn block_points(&self, block: usize) -> Vec<usize> {
        self.blocks[block].iter().map(|&s| self.slots[s]).collect()
    }

    /// Distinct facility points used by any block.
    pub fn facility_points(&self) -> Vec<usize> {
        let mut pts = self.slots.clone();
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    pub fn clients(&self) -> &WeightedClients {
        &self.clients
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn origin(&self, point: usize) -> usize {
        self.origin[point]
    }

    /// Cost of a transversal (one slot per block) on this instance's metric and clients.
    pub fn transversal_cost(&self, picks: &[usize]) -> f64 {
        let pts: Vec<usize> = picks.iter().map(|&s| self.slots[s]).collect();
        self.metric
            .cost_unchecked(self.clients.ids(), Some(self.clients.weights()), &pts, self.objective)
    }

    /// `|S ∩ E_i| = 1` for every block, and `S` has no slot outside the blocks.
    pub fn check_partition_feasible(&self, set: &[usize]) -> bool {
        let distinct: BTreeSet<usize> = set.iter().copied().collect();
        if distinct.len() != set.len() || set.len() != self.k() {
            return false;
        }
        self.blocks
            .iter()
            .all(|b| b.iter().filter(|s| distinct.contains(s)).count() == 1)
    }

    /// Maps a transversal to distinct original facilities.
    ///
    /// Picks are translated through `origin`. When two blocks resolve to the same
    /// original facility, later blocks are re-filled with the unused member of
    /// their own block that lowers the cost on `base` the most (lowest id on ties).
    pub fn collapse(&self, picks: &[usize], base: &DistanceMatrix) -> Result<Vec<usize>> {
        if picks.len() != self.k() {
            return Err(Error::BadParameter(format!(
                "{} picks for {} blocks",
                picks.len(),
                self.k()
            )));
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(picks.len());
        let mut pending = Vec::new();
        for (b, &s) in picks.iter().enumerate() {
            let f = self.origin[self.slots[s]];
            if chosen.contains(&f) {
                pending.push(b);
            } else {
                chosen.push(f);
            }
        }
        let ids = self.clients.ids();
        let weights = Some(self.clients.weights());
        for b in pending {
            let mut candidates: Vec<usize> = self.blocks[b]
                .iter()
                .map(|&s| self.origin[self.slots[s]])
                .filter(|f| !chosen.contains(f))
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            let mut best: Option<(f64, usize)> = None;
            for f in candidates {
                chosen.push(f);
                let c = base.cost_unchecked(ids, weights, &chosen, self.objective);
                chosen.pop();
                if best.is_none_or(|(bc, _)| c < bc) {
                    best = Some((c, f));
                }
            }
            let (_, f) = best.ok_or(Error::EmptyPart)?;
            chosen.push(f);
        }
        chosen.sort_unstable();
        Ok(chosen)
    }
}

/// Transversal returned by a partition-matroid solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Transversal {
    /// One slot per block, in block order.
    pub picks: Vec<usize>,
    pub cost: f64,
    /// Leader/radius guesses (k-median/means) or thresholds (k-supplier) evaluated.
    pub guesses: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub patterns: u64,
    pub guesses: u64,
    pub coreset_size: usize,
}

/// A chosen facility set reported in original facility ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub facilities: Vec<usize>,
    pub cost: f64,
    pub objective: Objective,
    pub feasible: bool,
    pub provenance: String,
    pub stats: SolveStats,
}

/// Total order used to pick among equal-cost candidates: cost, then lexicographic ids.
pub(crate) fn better(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.1 < b.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::e1;

    #[test]
    fn characteristic_vectors() {
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let m = Arc::new(DistanceMatrix::from_points(&pts, vec![0, 1], vec![0, 1, 2, 3]).unwrap());
        let inst = DiversityInstance::new(
            m,
            vec![vec![0, 1], vec![3], vec![0, 2]],
            vec![0, 0, 0],
            2,
            Objective::Median,
        )
        .unwrap();
        assert_eq!(inst.characteristic_vector(0).unwrap().bits(), vec![true, false, true]);
        assert_eq!(inst.characteristic_vector(1).unwrap().to_string(), "100");
        assert_eq!(inst.characteristic_vector(3).unwrap().to_string(), "010");
        assert!(inst.characteristic_vector(7).is_err());

        let one = CharacteristicVector::from_bits(&[true]);
        assert_eq!(one.bits(), vec![true]);
        assert!(
            CharacteristicVector::from_bits(&[true, true]).dominates(&CharacteristicVector::from_bits(&[false, true]))
        );
    }

    #[test]
    fn wide_vectors_pack_multiple_words() {
        let mut v = CharacteristicVector::zeros(130);
        v.set(0);
        v.set(129);
        assert!(v.get(129) && v.get(0) && !v.get(64));
        let mut acc = vec![0; 130];
        v.add_to(&mut acc);
        assert_eq!(acc.iter().sum::<usize>(), 2);
    }

    #[test]
    fn div_r_sat_on_e1() {
        let inst = e1(Objective::Median);
        assert!(inst.check_div_r_sat(&[1, 3]));
        assert!(!inst.check_div_r_sat(&[0, 1]));
        assert!(!inst.check_div_r_sat(&[1]));
        assert!(!inst.check_div_r_sat(&[1, 1]));
        assert!(!inst.check_div_r_sat(&[1, 3, 4]));
    }

    #[test]
    fn instance_validation() {
        let m = e1(Objective::Median).metric().clone();
        let bad_k = DiversityInstance::new(m.clone(), vec![vec![0]], vec![0], 9, Objective::Median);
        assert!(matches!(bad_k, Err(Error::Schema(_))));
        let bad_r = DiversityInstance::new(m.clone(), vec![vec![0]], vec![3], 2, Objective::Median);
        assert!(matches!(bad_r, Err(Error::Schema(_))));
        let no_groups = DiversityInstance::new(m, vec![], vec![], 2, Objective::Median);
        assert!(no_groups.is_err());
    }

    #[test]
    fn partition_feasibility() {
        let inst = e1(Objective::Median);
        let clients = WeightedClients::all(inst.metric());
        let p = PartitionInstance::new(
            inst.metric().clone(),
            vec![vec![0], vec![1]],
            clients.clone(),
            Objective::Median,
        )
        .unwrap();
        assert!(p.check_partition_feasible(&[0, 1]));
        assert!(!p.check_partition_feasible(&[]));

        let p = PartitionInstance::new(
            inst.metric().clone(),
            vec![vec![0, 1], vec![2]],
            clients,
            Objective::Median,
        )
        .unwrap();
        assert!(!p.check_partition_feasible(&[0, 1]));
        assert!(p.check_partition_feasible(&[1, 2]));
    }

    #[test]
    fn collapse_replaces_duplicate_copies() {
        let inst = e1(Objective::Median);
        let clients = WeightedClients::all(inst.metric());
        // two zero-distance copies of the part {0, 1}
        let p = PartitionInstance::new(
            inst.metric().clone(),
            vec![vec![0, 1], vec![0, 1]],
            clients,
            Objective::Median,
        )
        .unwrap();
        assert_eq!(p.point(0), p.point(2));
        // both blocks pick point 1; the second is re-filled with 0
        let out = p.collapse(&[1, 3], inst.metric()).unwrap();
        assert_eq!(out, vec![0, 1]);
    }

    #[test]
    fn fair_checks() {
        let inst = e1(Objective::Median);
        assert!(inst.is_fair_instance());
        assert!(inst.check_exact_per_group(&[0, 4]));
        assert!(!inst.check_exact_per_group(&[0, 1]));
        let m = inst.metric().clone();
        let overlapping =
            DiversityInstance::new(m, vec![vec![0, 1], vec![1, 2]], vec![1, 1], 2, Objective::Median).unwrap();
        assert!(matches!(
            overlapping.fair_check(),
            Err(Error::NotDisjoint { a: 0, b: 1 })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Swapping a chosen facility for one whose membership dominates keeps the set feasible.
            #[test]
            fn feasibility_monotone_in_membership(
                groups in prop::collection::vec(prop::collection::btree_set(0usize..8, 0..5), 1..4),
                pick in prop::collection::btree_set(0usize..8, 3),
                req_seed in any::<u64>(),
            ) {
                let pts: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
                let m = Arc::new(DistanceMatrix::from_points(&pts, (0..8).collect(), (0..8).collect()).unwrap());
                let groups: Vec<Vec<usize>> = groups.into_iter().map(|g| g.into_iter().collect()).collect();
                let reqs: Vec<usize> = (0..groups.len()).map(|i| ((req_seed >> (2 * i)) & 1) as usize).collect();
                let inst = DiversityInstance::new(m, groups, reqs, 3, Objective::Median).unwrap();
                let set: Vec<usize> = pick.into_iter().collect();
                prop_assume!(inst.check_div_r_sat(&set));
                for (i, &f) in set.iter().enumerate() {
                    for g in 0..8 {
                        if set.contains(&g) { continue; }
                        let chi_g = inst.characteristic_vector(g).unwrap();
                        if chi_g.dominates(inst.characteristic_vector(f).unwrap()) {
                            let mut swapped = set.clone();
                            swapped[i] = g;
                            prop_assert!(inst.check_div_r_sat(&swapped));
                        }
                    }
                }
            }
        }
    }
}
