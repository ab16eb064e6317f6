//! Exhaustive reference solvers and a submodularity checker. Exponential;
//! meant for ground truth at small sizes.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{better, DiversityInstance, PartitionInstance, Solution, SolveStats, Transversal};

pub const DEFAULT_CAP: u128 = 2_000_000;

/// Enumeration cap from `DIVCLUST_CAP`, else [`DEFAULT_CAP`].
pub fn cap_from_env() -> u128 {
    std::env::var("DIVCLUST_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    (0..k).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

pub fn brute_force_div(inst: &DiversityInstance) -> Result<Solution> {
    brute_force_div_with_cap(inst, cap_from_env())
}

/// Exact optimum over every k-subset of facilities meeting the requirements.
pub fn brute_force_div_with_cap(inst: &DiversityInstance, cap: u128) -> Result<Solution> {
    brute_force_subsets(inst, cap, |s| inst.check_div_r_sat(s))
}

/// Exact optimum with exactly `r_i` facilities from every group.
pub fn brute_force_fair(inst: &DiversityInstance) -> Result<Solution> {
    brute_force_subsets(inst, cap_from_env(), |s| inst.check_exact_per_group(s))
}

fn brute_force_subsets(
    inst: &DiversityInstance,
    cap: u128,
    admit: impl Fn(&[usize]) -> bool + Sync,
) -> Result<Solution> {
    let fs = inst.metric().facilities();
    let count = binomial(fs.len(), inst.k());
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let best = fs
        .iter()
        .copied()
        .combinations(inst.k())
        .par_bridge()
        .filter(|s| admit(s))
        .map(|s| (inst.cost(&s).expect("facilities are valid"), s))
        .reduce_with(|a, b| if better((b.0, &b.1), (a.0, &a.1)) { b } else { a });
    let (cost, facilities) = best.ok_or(Error::Infeasible)?;
    Ok(Solution {
        facilities,
        cost,
        objective: inst.objective(),
        feasible: true,
        provenance: "exact".into(),
        stats: SolveStats {
            patterns: 0,
            guesses: count as u64,
            coreset_size: inst.metric().clients().len(),
        },
    })
}

pub fn brute_force_pm(pinst: &PartitionInstance) -> Result<Transversal> {
    brute_force_pm_with_cap(pinst, cap_from_env())
}

/// Exact optimum over every transversal of the blocks.
pub fn brute_force_pm_with_cap(pinst: &PartitionInstance, cap: u128) -> Result<Transversal> {
    let count = pinst
        .blocks()
        .iter()
        .fold(1u128, |acc, b| acc.saturating_mul(b.len() as u128));
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let best = pinst
        .blocks()
        .iter()
        .map(|b| b.iter().copied())
        .multi_cartesian_product()
        .map(|picks| (pinst.transversal_cost(&picks), picks))
        .reduce(|a, b| if better((b.0, &b.1), (a.0, &a.1)) { b } else { a });
    let (cost, picks) = best.ok_or(Error::EmptySolution)?;
    Ok(Transversal {
        picks,
        cost,
        guesses: count as u64,
    })
}

/// Which triples a submodularity check visits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TripleSampling {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `f(S ∪ {x}) < f(S)`.
    Monotonicity,
    /// `f(S ∪ {x}) - f(S) < f(T ∪ {x}) - f(T)` with `S ⊆ T`.
    DiminishingReturns,
}

/// A failing triple, as bitmasks over the ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: Violation,
    pub s: u32,
    pub t: u32,
    pub x: usize,
}

/// Checks monotonicity and diminishing returns of a set function over a ground
/// set of `n <= 12` elements; sets are bitmasks. Returns the first failure.
pub fn check_submodular(n: usize, f: impl Fn(u32) -> f64, sampling: TripleSampling) -> Result<Option<Counterexample>> {
    if n > 12 {
        return Err(Error::BadParameter(format!("ground set of {n} elements is too large")));
    }
    let values: Vec<f64> = (0..1u32 << n).map(&f).collect();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let check = |s: u32, t: u32, x: usize| -> Option<Counterexample> {
        let bit = 1u32 << x;
        if values[(s | bit) as usize] < values[s as usize] - tol {
            return Some(Counterexample {
                kind: Violation::Monotonicity,
                s,
                t: s,
                x,
            });
        }
        let gain_s = values[(s | bit) as usize] - values[s as usize];
        let gain_t = values[(t | bit) as usize] - values[t as usize];
        (gain_s < gain_t - tol).then_some(Counterexample {
            kind: Violation::DiminishingReturns,
            s,
            t,
            x,
        })
    };
    let full = (1u32 << n) - 1;
    match sampling {
        TripleSampling::Exhaustive => {
            for t in 0..=full {
                for x in (0..n).filter(|&x| t & (1 << x) == 0) {
                    // every submask s of t
                    let mut s = t;
                    loop {
                        if let Some(c) = check(s, t, x) {
                            return Ok(Some(c));
                        }
                        if s == 0 {
                            break;
                        }
                        s = (s - 1) & t;
                    }
                }
            }
            Ok(None)
        }
        TripleSampling::Sampled { count, seed } => {
            if n == 0 {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let x = rng.gen_range(0..n);
                let t = rng.gen_range(0..=full) & !(1 << x);
                let s = rng.gen_range(0..=full) & t;
                if let Some(c) = check(s, t, x) {
                    return Ok(Some(c));
                }
            }
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreset::WeightedClients;
    use crate::fixtures::{e1, e1_partition};
    use crate::kmedian::{candidate_sets, instance_grid, ExtendedMetric, GridMode, LeaderGuess};
    use crate::metric::Objective;

    #[test]
    fn e1_optima() {
        let s = brute_force_div(&e1(Objective::Median)).unwrap();
        assert_eq!((s.facilities.clone(), s.cost), (vec![0, 3], 3.0));
        assert_eq!(brute_force_div(&e1(Objective::Means)).unwrap().cost, 3.0);
        assert_eq!(brute_force_div(&e1(Objective::Supplier)).unwrap().cost, 1.0);

        let t = brute_force_pm(&e1_partition(Objective::Supplier)).unwrap();
        assert_eq!((t.cost, t.guesses), (1.0, 4));
        assert_eq!(brute_force_pm(&e1_partition(Objective::Median)).unwrap().cost, 3.0);
    }

    #[test]
    fn degenerate_cases() {
        let e = e1(Objective::Median);
        let all = DiversityInstance::new(
            e.metric().clone(),
            e.groups().to_vec(),
            vec![1, 1],
            5,
            Objective::Median,
        )
        .unwrap();
        let s = brute_force_div(&all).unwrap();
        assert_eq!(s.facilities, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.stats.guesses, 1);

        let bad = DiversityInstance::new(
            e.metric().clone(),
            e.groups().to_vec(),
            vec![2, 2],
            2,
            Objective::Median,
        )
        .unwrap();
        assert!(matches!(brute_force_div(&bad), Err(Error::Infeasible)));
        assert!(matches!(
            brute_force_div_with_cap(&e, 5),
            Err(Error::CapExceeded { count: 10, cap: 5 })
        ));

        let p = PartitionInstance::new(
            e.metric().clone(),
            vec![vec![0], vec![4]],
            WeightedClients::all(e.metric()),
            Objective::Median,
        )
        .unwrap();
        let t = brute_force_pm(&p).unwrap();
        assert_eq!(t.picks, vec![0, 1]);
    }

    #[test]
    fn submodularity_checker() {
        let sets: [u32; 3] = [0b0011, 0b0110, 0b1100];
        let coverage = |mask: u32| {
            let covered = (0..3)
                .filter(|i| mask & (1 << i) != 0)
                .fold(0u32, |acc, i| acc | sets[i]);
            covered.count_ones() as f64
        };
        assert_eq!(check_submodular(3, coverage, TripleSampling::Exhaustive).unwrap(), None);

        let square = |mask: u32| (mask.count_ones() as f64).powi(2);
        let c = check_submodular(3, square, TripleSampling::Exhaustive)
            .unwrap()
            .unwrap();
        assert_eq!(c.kind, Violation::DiminishingReturns);
        assert!(
            check_submodular(3, square, TripleSampling::Sampled { count: 200, seed: 1 })
                .unwrap()
                .is_some()
        );

        let decreasing = |mask: u32| -(mask.count_ones() as f64);
        let c = check_submodular(2, decreasing, TripleSampling::Exhaustive)
            .unwrap()
            .unwrap();
        assert_eq!(c.kind, Violation::Monotonicity);
        assert!(check_submodular(13, coverage, TripleSampling::Exhaustive).is_err());
    }

    #[test]
    fn improve_on_e1_optimal_guess() {
        let p = e1_partition(Objective::Median);
        let grid = instance_grid(&p, GridMode::Exact, 0.25).unwrap();
        let guess = LeaderGuess {
            leaders: vec![0, 4],
            radii: vec![1.0, 1.0],
        };
        let c = candidate_sets(&p, &grid, &guess).unwrap();
        let ext = ExtendedMetric::new(&p, &c, &guess.radii).unwrap();
        // ground set: every slot of both blocks
        let ground: Vec<usize> = p.blocks().concat();
        let f = |mask: u32| {
            let set: Vec<usize> = (0..ground.len())
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| ground[i])
                .collect();
            ext.improve(&set)
        };
        assert_eq!(
            check_submodular(ground.len(), f, TripleSampling::Exhaustive).unwrap(),
            None
        );
    }
}
