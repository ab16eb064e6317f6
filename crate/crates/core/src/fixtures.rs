//! Small reference instances and random instance families for tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coreset::WeightedClients;
use crate::instance::{DiversityInstance, PartitionInstance};
use crate::metric::{DistanceMatrix, Objective};

/// Five points on a line at 0..4, all of them clients and facilities,
/// `G1 = {0,1}`, `G2 = {3,4}`, `r = (1,1)`, `k = 2`.
///
/// Optimal costs: median 3, means 3, supplier 1.
pub fn e1(objective: Objective) -> DiversityInstance {
    let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
    let m = DistanceMatrix::from_points(&pts, (0..5).collect(), (0..5).collect()).expect("valid line metric");
    DiversityInstance::new(Arc::new(m), vec![vec![0, 1], vec![3, 4]], vec![1, 1], 2, objective).expect("valid instance")
}

/// The only feasible pattern of [`e1`]: blocks `{0,1}` and `{3,4}`.
pub fn e1_partition(objective: Objective) -> PartitionInstance {
    let inst = e1(objective);
    let m = inst.metric().clone();
    PartitionInstance::new(
        m.clone(),
        vec![vec![0, 1], vec![3, 4]],
        WeightedClients::all(&m),
        objective,
    )
    .expect("valid partition")
}

/// Uniform points in `[0,10)^2` with two decimals: clients `0..nc`, facilities `nc..nc+nf`.
pub fn random_points<R: Rng>(rng: &mut R, nc: usize, nf: usize) -> Arc<DistanceMatrix> {
    let pts: Vec<Vec<f64>> = (0..nc + nf)
        .map(|_| {
            (0..2)
                .map(|_| (rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0)
                .collect()
        })
        .collect();
    let m = DistanceMatrix::from_points(&pts, (0..nc).collect(), (nc..nc + nf).collect()).expect("euclidean metric");
    Arc::new(m)
}

/// `k <= max_k` blocks partitioning `k..=max_f` facilities, `1..=max_c` clients.
pub fn random_partition_instance<R: Rng>(
    rng: &mut R,
    max_f: usize,
    max_c: usize,
    max_k: usize,
    objective: Objective,
) -> PartitionInstance {
    let k = rng.gen_range(1..=max_k.min(max_f));
    let nf = rng.gen_range(k..=max_f);
    let nc = rng.gen_range(1..=max_c);
    let m = random_points(rng, nc, nf);
    let mut fs: Vec<usize> = (nc..nc + nf).collect();
    fs.shuffle(rng);
    let mut blocks = vec![Vec::new(); k];
    for (i, f) in fs.into_iter().enumerate() {
        let b = if i < k { i } else { rng.gen_range(0..k) };
        blocks[b].push(f);
    }
    PartitionInstance::new(m, blocks, WeightedClients::unit((0..nc).collect()), objective).expect("valid partition")
}

/// Intersecting groups: every facility joins each of `1..=max_t` groups with
/// probability 0.4; requirements are drawn from `0..=min(k, |G_i|, 2)`.
/// The instance may be infeasible.
pub fn random_div_instance<R: Rng>(
    rng: &mut R,
    max_f: usize,
    max_c: usize,
    max_k: usize,
    max_t: usize,
    objective: Objective,
) -> DiversityInstance {
    let k = rng.gen_range(1..=max_k.min(max_f));
    let nf = rng.gen_range(k..=max_f);
    let nc = rng.gen_range(1..=max_c);
    let t = rng.gen_range(1..=max_t);
    let m = random_points(rng, nc, nf);
    let groups: Vec<Vec<usize>> = (0..t)
        .map(|_| (nc..nc + nf).filter(|_| rng.gen_bool(0.4)).collect())
        .collect();
    let requirements = groups
        .iter()
        .map(|g| rng.gen_range(0..=g.len().min(k).min(2)))
        .collect();
    DiversityInstance::new(m, groups, requirements, k, objective).expect("valid instance")
}

/// Disjoint groups covering every facility, with requirements summing to `k`.
pub fn random_fair_instance<R: Rng>(
    rng: &mut R,
    max_f: usize,
    max_c: usize,
    max_k: usize,
    max_t: usize,
    objective: Objective,
) -> DiversityInstance {
    let k = rng.gen_range(1..=max_k.min(max_f));
    let nf = rng.gen_range(k..=max_f);
    let nc = rng.gen_range(1..=max_c);
    let t = rng.gen_range(1..=max_t.min(nf));
    let m = random_points(rng, nc, nf);
    let mut groups = vec![Vec::new(); t];
    for (i, f) in (nc..nc + nf).enumerate() {
        let g = if i < t { i } else { rng.gen_range(0..t) };
        groups[g].push(f);
    }
    let mut requirements = vec![0usize; t];
    for _ in 0..k {
        let open: Vec<usize> = (0..t).filter(|&g| requirements[g] < groups[g].len()).collect();
        requirements[*open.choose(rng).expect("nf >= k leaves room")] += 1;
    }
    DiversityInstance::new(m, groups, requirements, k, objective).expect("valid instance")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_families_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = random_partition_instance(&mut rng, 10, 8, 3, Objective::Median);
            assert!(p.k() >= 1 && p.k() <= 3);
            let f = random_fair_instance(&mut rng, 10, 8, 3, 3, Objective::Supplier);
            assert!(f.is_fair_instance());
            let d = random_div_instance(&mut rng, 10, 8, 3, 3, Objective::Means);
            assert!(d.t() <= 3 && d.k() <= 3);
        }
    }
}
