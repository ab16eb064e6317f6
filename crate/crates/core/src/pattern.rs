//! Facility parts keyed by characteristic vector and the lazy stream of
//! feasible constraint patterns over them.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coreset::WeightedClients;
use crate::error::{Error, Result};
use crate::instance::{CharacteristicVector, DiversityInstance, PartitionInstance};
use crate::metric::{DistanceMatrix, Objective};

/// Partition of the facilities by group membership; empty parts are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityPartition {
    parts: Vec<(CharacteristicVector, Vec<usize>)>,
}

impl FacilityPartition {
    pub fn parts(&self) -> &[(CharacteristicVector, Vec<usize>)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn key(&self, part: usize) -> &CharacteristicVector {
        &self.parts[part].0
    }

    pub fn members(&self, part: usize) -> &[usize] {
        &self.parts[part].1
    }

    pub fn part_of(&self, key: &CharacteristicVector) -> Option<usize> {
        self.parts.iter().position(|(k, _)| k == key)
    }
}

pub fn build_partition(inst: &DiversityInstance) -> FacilityPartition {
    let mut parts: BTreeMap<CharacteristicVector, Vec<usize>> = BTreeMap::new();
    for (f, chi) in inst.memberships() {
        parts.entry(chi.clone()).or_default().push(f);
    }
    FacilityPartition {
        parts: parts.into_iter().collect(),
    }
}

/// A k-multiset of parts, stored as non-decreasing part indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintPattern {
    parts: Vec<usize>,
    sum: Vec<usize>,
}

impl ConstraintPattern {
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Element-wise sum of the characteristic vectors.
    pub fn sum(&self) -> &[usize] {
        &self.sum
    }

    pub fn is_feasible(&self, requirements: &[usize]) -> bool {
        self.sum.iter().zip(requirements).all(|(s, r)| s >= r)
    }

    pub fn keys<'a>(&'a self, partition: &'a FacilityPartition) -> impl Iterator<Item = &'a CharacteristicVector> {
        self.parts.iter().map(|&p| partition.key(p))
    }

    /// `(part, multiplicity)` pairs.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

/// Lazily yields every feasible k-multiset of parts in lexicographic order.
/// A part is used at most as many times as it has facilities.
pub struct PatternStream<'a> {
    partition: &'a FacilityPartition,
    requirements: Vec<usize>,
    t: usize,
    next: Option<Vec<usize>>,
}

impl<'a> PatternStream<'a> {
    fn advance(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let p = self.partition.len();
        let mut succ = cur.clone();
        if let Some(i) = (0..succ.len()).rev().find(|&i| succ[i] + 1 < p) {
            let v = succ[i] + 1;
            succ[i..].iter_mut().for_each(|x| *x = v);
            self.next = Some(succ);
        }
        Some(cur)
    }

    fn admissible(&self, idx: &[usize]) -> Option<ConstraintPattern> {
        let mut run = 0;
        for (i, &p) in idx.iter().enumerate() {
            run = if i > 0 && idx[i - 1] == p { run + 1 } else { 1 };
            if run > self.partition.members(p).len() {
                return None;
            }
        }
        let mut sum = vec![0usize; self.t];
        for &p in idx {
            self.partition.key(p).add_to(&mut sum);
        }
        let pattern = ConstraintPattern {
            parts: idx.to_vec(),
            sum,
        };
        pattern.is_feasible(&self.requirements).then_some(pattern)
    }
}

impl Iterator for PatternStream<'_> {
    type Item = ConstraintPattern;

    fn next(&mut self) -> Option<ConstraintPattern> {
        loop {
            let idx = self.advance()?;
            if let Some(p) = self.admissible(&idx) {
                return Some(p);
            }
        }
    }
}

/// An empty stream means the requirements cannot be met with `k` facilities.
pub fn enumerate_feasible_patterns<'a>(
    partition: &'a FacilityPartition,
    requirements: &[usize],
    k: usize,
) -> PatternStream<'a> {
    let t = partition.parts.first().map_or(requirements.len(), |(key, _)| key.len());
    let next = (k >= 1 && !partition.is_empty()).then(|| vec![0; k]);
    PatternStream {
        partition,
        requirements: requirements.to_vec(),
        t,
        next,
    }
}

/// Builds the k-block partition instance for a pattern. A part of multiplicity
/// `m` becomes `m` blocks sharing the same facility points (zero-distance copies).
pub fn materialize(
    partition: &FacilityPartition,
    pattern: &ConstraintPattern,
    metric: Arc<DistanceMatrix>,
    clients: WeightedClients,
    objective: Objective,
) -> Result<PartitionInstance> {
    let blocks = pattern
        .parts
        .iter()
        .map(|&p| partition.parts.get(p).map(|(_, m)| m.clone()).ok_or(Error::EmptyPart))
        .collect::<Result<Vec<_>>>()?;
    PartitionInstance::new(metric, blocks, clients, objective)
}

/// `C(parts + k - 1, k)`: the number of k-multisets over the parts.
pub fn multiset_count(parts: usize, k: usize) -> u128 {
    if parts == 0 {
        return 0;
    }
    let n = (parts + k - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::e1;
    use crate::instance::CharacteristicVector as Cv;

    #[test]
    fn e1_partition() {
        let p = build_partition(&e1(Objective::Median));
        let got: BTreeMap<String, Vec<usize>> = p.parts().iter().map(|(k, m)| (k.to_string(), m.clone())).collect();
        let expected: BTreeMap<String, Vec<usize>> = [("10", vec![0, 1]), ("01", vec![3, 4]), ("00", vec![2])]
            .map(|(k, m)| (k.to_string(), m))
            .into();
        assert_eq!(got, expected);
    }

    #[test]
    fn e1_single_feasible_pattern() {
        let inst = e1(Objective::Median);
        let p = build_partition(&inst);
        let pats: Vec<_> = enumerate_feasible_patterns(&p, inst.requirements(), 2).collect();
        assert_eq!(pats.len(), 1);
        let keys: Vec<String> = pats[0].keys(&p).map(|k| k.to_string()).collect();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort();
        assert_eq!(keys_sorted, vec!["01", "10"]);
        assert_eq!(pats[0].sum(), &[1, 1]);

        let pinst = materialize(
            &p,
            &pats[0],
            inst.metric().clone(),
            WeightedClients::all(inst.metric()),
            Objective::Median,
        )
        .unwrap();
        let mut blocks: Vec<Vec<usize>> = (0..2).map(|b| pinst.block_points(b)).collect();
        blocks.sort();
        assert_eq!(blocks, vec![vec![0, 1], vec![3, 4]]);
    }

    fn single_group(n: usize, k: usize, r: usize) -> DiversityInstance {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let m = Arc::new(DistanceMatrix::from_points(&pts, (0..n).collect(), (0..n).collect()).unwrap());
        DiversityInstance::new(m, vec![(0..n).collect()], vec![r], k, Objective::Median).unwrap()
    }

    #[test]
    fn all_in_one_group() {
        let inst = single_group(4, 2, 1);
        let p = build_partition(&inst);
        assert_eq!(p.len(), 1);
        assert_eq!(p.key(0).to_string(), "1");
        let pats: Vec<_> = enumerate_feasible_patterns(&p, &[1], 2).collect();
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].parts(), &[0, 0]);
        assert_eq!(pats[0].multiplicities(), vec![(0, 2)]);

        let pinst = materialize(
            &p,
            &pats[0],
            inst.metric().clone(),
            WeightedClients::all(inst.metric()),
            Objective::Median,
        )
        .unwrap();
        // copies: distinct slots naming the same points
        assert_eq!(pinst.block_points(0), pinst.block_points(1));
        assert_ne!(pinst.blocks()[0], pinst.blocks()[1]);
        assert_eq!(pinst.metric().d(pinst.point(0), pinst.point(4)), 0.0);
    }

    #[test]
    fn k1_single_block() {
        let inst = single_group(3, 1, 1);
        let p = build_partition(&inst);
        let pats: Vec<_> = enumerate_feasible_patterns(&p, &[1], 1).collect();
        let pinst = materialize(
            &p,
            &pats[0],
            inst.metric().clone(),
            WeightedClients::all(inst.metric()),
            Objective::Median,
        )
        .unwrap();
        assert_eq!(pinst.k(), 1);
        assert_eq!(pinst.block_points(0), vec![0, 1, 2]);
    }

    #[test]
    fn multiplicity_capped_by_part_size() {
        // part {0} has a single facility, so it may appear at most once
        let pts: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64]).collect();
        let m = Arc::new(DistanceMatrix::from_points(&pts, vec![0, 1, 2], vec![0, 1, 2]).unwrap());
        let inst = DiversityInstance::new(m, vec![vec![0]], vec![0], 2, Objective::Median).unwrap();
        let p = build_partition(&inst);
        let pats: Vec<Vec<usize>> = enumerate_feasible_patterns(&p, &[0], 2)
            .map(|c| c.parts().to_vec())
            .collect();
        let single = p.part_of(&Cv::from_bits(&[true])).unwrap();
        assert!(!pats.contains(&vec![single, single]));
        assert_eq!(pats.len(), 2);
    }

    #[test]
    fn zero_requirements_admit_every_multiset() {
        let inst = e1(Objective::Median);
        let p = build_partition(&inst);
        // parts of sizes 2, 2, 1 → 6 multisets minus the one using the singleton twice
        assert_eq!(enumerate_feasible_patterns(&p, &[0, 0], 2).count(), 5);
        assert_eq!(multiset_count(3, 2), 6);
    }

    #[test]
    fn infeasible_gives_empty_stream() {
        let inst = e1(Objective::Median);
        let p = build_partition(&inst);
        assert_eq!(enumerate_feasible_patterns(&p, &[2, 2], 2).count(), 0);
    }

    #[test]
    fn materialize_rejects_unknown_part() {
        let inst = e1(Objective::Median);
        let p = build_partition(&inst);
        let bogus = ConstraintPattern {
            parts: vec![0, 9],
            sum: vec![0, 0],
        };
        let err = materialize(
            &p,
            &bogus,
            inst.metric().clone(),
            WeightedClients::all(inst.metric()),
            Objective::Median,
        );
        assert!(matches!(err, Err(Error::EmptyPart)));
    }
}
