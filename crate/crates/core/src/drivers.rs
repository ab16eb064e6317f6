//! End-to-end solvers: diversity-aware clustering through constraint patterns,
//! and fair clustering through a direct reduction to a partition matroid.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coreset::{build_coreset, WeightedClients};
use crate::error::{Error, Result};
use crate::instance::{better, DiversityInstance, PartitionInstance, Solution, SolveStats, Transversal};
use crate::kmedian::{solve_kmedian_pm, GridMode, LeaderSpace, PmOptions, Selection};
use crate::ksupplier::{solve_ksupplier_pm, ThresholdSearch};
use crate::metric::{positive_range, DistanceMatrix, Objective};
use crate::pattern::{build_partition, enumerate_feasible_patterns, materialize};

/// Client sets with more members than this get a coreset in [`CoresetMode::Auto`].
pub const CORESET_AUTO_THRESHOLD: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoresetMode {
    #[default]
    Auto,
    On,
    Off,
}

impl CoresetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoresetMode::Auto => "auto",
            CoresetMode::On => "on",
            CoresetMode::Off => "off",
        }
    }
}

/// How a facility needed by several blocks is duplicated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CopyMode {
    /// Blocks share the facility's point; copies are at distance 0.
    #[default]
    ZeroCopy,
    /// Extra copies become new points at a small positive distance.
    PaperEpsilon,
}

impl CopyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CopyMode::ZeroCopy => "zero-copy",
            CopyMode::PaperEpsilon => "paper-epsilon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub epsilon: f64,
    pub selection: Selection,
    pub grid: GridMode,
    pub leaders: LeaderSpace,
    pub threshold: ThresholdSearch,
    pub coreset: CoresetMode,
    /// Overrides the coreset distortion `ε/16`.
    pub coreset_nu: Option<f64>,
    pub copy_mode: CopyMode,
    pub seed: u64,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: 0.25,
            selection: Selection::default(),
            grid: GridMode::default(),
            leaders: LeaderSpace::default(),
            threshold: ThresholdSearch::default(),
            coreset: CoresetMode::default(),
            coreset_nu: None,
            copy_mode: CopyMode::default(),
            seed: 0,
            threads: None,
        }
    }
}

impl SolveOptions {
    fn pm(&self) -> PmOptions {
        PmOptions {
            epsilon: self.epsilon / 4.0,
            selection: self.selection,
            grid: self.grid,
            leaders: self.leaders,
        }
    }

    fn provenance(&self, objective: Objective) -> &'static str {
        match (objective, self.selection) {
            (Objective::Supplier, _) => "supplier-matching",
            (_, Selection::LazyGreedy) => "fpt-submodular",
            (_, Selection::Exhaustive) => "fpt-exhaustive",
            (_, Selection::Arbitrary) => "fpt-warmup",
        }
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::BadParameter(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn check_epsilon(objective: Objective, epsilon: f64) -> Result<()> {
    if objective != Objective::Supplier && !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::BadParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

fn client_set(metric: &DistanceMatrix, k: usize, objective: Objective, opts: &SolveOptions) -> Result<WeightedClients> {
    let wanted = match opts.coreset {
        CoresetMode::Off => false,
        CoresetMode::On => true,
        CoresetMode::Auto => metric.clients().len() > CORESET_AUTO_THRESHOLD,
    };
    if !wanted || objective == Objective::Supplier {
        return Ok(WeightedClients::all(metric));
    }
    let nu = opts.coreset_nu.unwrap_or(opts.epsilon / 16.0);
    build_coreset(metric, k, nu, 0.1, objective, opts.seed)
}

fn solve_pm(pinst: &PartitionInstance, opts: &SolveOptions) -> Result<Transversal> {
    match pinst.objective() {
        Objective::Supplier => solve_ksupplier_pm(pinst, opts.threshold),
        _ => solve_kmedian_pm(pinst, &opts.pm()),
    }
}

#[derive(Default)]
struct Best {
    best: Option<(f64, Vec<usize>)>,
    patterns: u64,
    guesses: u64,
}

impl Best {
    fn merge(self, other: Best) -> Best {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(if better((b.0, &b.1), (a.0, &a.1)) { b } else { a }),
            (a, b) => a.or(b),
        };
        Best {
            best,
            patterns: self.patterns + other.patterns,
            guesses: self.guesses + other.guesses,
        }
    }
}

/// Div-k-Median / Means / Supplier: the best solution over every feasible
/// constraint pattern.
pub fn solve_div_clustering(inst: &DiversityInstance, opts: &SolveOptions) -> Result<Solution> {
    check_epsilon(inst.objective(), opts.epsilon)?;
    with_threads(opts.threads, || solve_div_inner(inst, opts))?
}

fn solve_div_inner(inst: &DiversityInstance, opts: &SolveOptions) -> Result<Solution> {
    let metric = inst.metric();
    let objective = inst.objective();
    let clients = client_set(metric, inst.k(), objective, opts)?;
    let partition = build_partition(inst);
    log::info!(
        "{} facility parts, {} clients after reduction",
        partition.len(),
        clients.len()
    );

    let acc = enumerate_feasible_patterns(&partition, inst.requirements(), inst.k())
        .par_bridge()
        .map(|pattern| -> Result<Best> {
            let pinst = materialize(&partition, &pattern, metric.clone(), clients.clone(), objective)?;
            let tr = solve_pm(&pinst, opts)?;
            let facilities = pinst.collapse(&tr.picks, metric)?;
            let cost = metric.cost_over(clients.ids(), Some(clients.weights()), &facilities, objective)?;
            Ok(Best {
                best: Some((cost, facilities)),
                patterns: 1,
                guesses: tr.guesses,
            })
        })
        .try_reduce(Best::default, |a, b| Ok(a.merge(b)))?;

    let (_, facilities) = acc.best.ok_or(Error::Infeasible)?;
    let cost = inst.cost(&facilities)?;
    Ok(Solution {
        feasible: inst.check_div_r_sat(&facilities),
        cost,
        objective,
        provenance: opts.provenance(objective).to_string(),
        stats: SolveStats {
            patterns: acc.patterns,
            guesses: acc.guesses,
            coreset_size: clients.len(),
        },
        facilities,
    })
}

/// Fair instance as a k-block partition instance: `r_i` copies of every group.
pub fn reduce_fair_to_pm(
    inst: &DiversityInstance,
    epsilon: f64,
    mode: CopyMode,
    clients: WeightedClients,
) -> Result<PartitionInstance> {
    inst.fair_check()?;
    if let Some((g, _)) = inst
        .groups()
        .iter()
        .zip(inst.requirements())
        .find(|(g, &r)| g.len() < r)
    {
        log::info!("group of size {} cannot supply its requirement", g.len());
        return Err(Error::Infeasible);
    }
    let metric = inst.metric();
    let objective = inst.objective();
    let copies = || {
        inst.groups()
            .iter()
            .zip(inst.requirements())
            .flat_map(|(g, &r)| (0..r).map(move |j| (g, j)))
    };

    match mode {
        CopyMode::ZeroCopy => {
            let blocks = copies().map(|(g, _)| g.clone()).collect();
            PartitionInstance::new(metric.clone(), blocks, clients, objective)
        }
        CopyMode::PaperEpsilon => {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::BadParameter(format!("epsilon must be positive, got {epsilon}")));
            }
            let all: Vec<usize> = (0..metric.n()).collect();
            let (d_min, _) = positive_range(metric, &all).ok_or(Error::DegenerateMetric)?;
            let spacing = epsilon / 9.0 * d_min;

            // the first copy of a group is the group itself; later copies are new points
            let n = metric.n();
            let mut base: Vec<usize> = (0..n).collect();
            let mut blocks = Vec::with_capacity(inst.k());
            for (g, j) in copies() {
                if j == 0 {
                    blocks.push(g.clone());
                } else {
                    blocks.push((base.len()..base.len() + g.len()).collect());
                    base.extend(g.iter().copied());
                }
            }
            let size = base.len();
            let lift = |x: usize| if x < n { 0.0 } else { spacing };
            let mut data = vec![0.0; size * size];
            for x in 0..size {
                for y in 0..size {
                    if x == y {
                        continue;
                    }
                    data[x * size + y] = if base[x] == base[y] {
                        spacing
                    } else {
                        metric.d(base[x], base[y]) + lift(x) + lift(y)
                    };
                }
            }
            let mut facilities: Vec<usize> = metric.facilities().to_vec();
            facilities.extend(n..size);
            let expanded = DistanceMatrix::new(size, data, metric.clients().to_vec(), facilities)?;
            PartitionInstance::with_origin(Arc::new(expanded), blocks, clients, objective, base)
        }
    }
}

/// Fair clustering: exactly `r_i` facilities from each disjoint group.
pub fn solve_fair(inst: &DiversityInstance, opts: &SolveOptions) -> Result<Solution> {
    check_epsilon(inst.objective(), opts.epsilon)?;
    inst.fair_check()?;
    with_threads(opts.threads, || {
        let metric = inst.metric();
        let clients = client_set(metric, inst.k(), inst.objective(), opts)?;
        let coreset_size = clients.len();
        let pinst = reduce_fair_to_pm(inst, opts.epsilon, opts.copy_mode, clients)?;
        let tr = solve_pm(&pinst, opts)?;
        let facilities = pinst.collapse(&tr.picks, metric)?;
        Ok(Solution {
            feasible: inst.check_exact_per_group(&facilities),
            cost: inst.cost(&facilities)?,
            objective: inst.objective(),
            provenance: format!("fair-{}/{}", opts.copy_mode.as_str(), opts.provenance(inst.objective())),
            stats: SolveStats {
                patterns: 1,
                guesses: tr.guesses,
                coreset_size,
            },
            facilities,
        })
    })?
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{e1, random_fair_instance};
    use crate::oracle::{brute_force_div, brute_force_fair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn e1_div() {
        let s = solve_div_clustering(&e1(Objective::Median), &SolveOptions::default()).unwrap();
        // {0,3}, {1,3} and {1,4} all cost 3; ties go to the lowest ids
        assert_eq!(s.facilities, vec![0, 3]);
        assert_eq!(s.cost, 3.0);
        assert!(s.feasible);
        assert_eq!(s.stats.patterns, 1);

        let s = solve_div_clustering(&e1(Objective::Supplier), &SolveOptions::default()).unwrap();
        assert_eq!(s.cost, 1.0);

        let s = solve_div_clustering(&e1(Objective::Means), &SolveOptions::default()).unwrap();
        assert!(s.cost <= (1.0 + 8.0 / std::f64::consts::E + 0.25) * 3.0);
    }

    #[test]
    fn infeasible_requirements() {
        let e = e1(Objective::Median);
        let inst = DiversityInstance::new(
            e.metric().clone(),
            e.groups().to_vec(),
            vec![2, 2],
            2,
            Objective::Median,
        )
        .unwrap();
        assert!(matches!(
            solve_div_clustering(&inst, &SolveOptions::default()),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn copies_are_collapsed_to_distinct_facilities() {
        let e = e1(Objective::Median);
        let inst = DiversityInstance::new(
            e.metric().clone(),
            vec![(0..5).collect()],
            vec![3],
            3,
            Objective::Median,
        )
        .unwrap();
        let s = solve_div_clustering(&inst, &SolveOptions::default()).unwrap();
        assert!(s.feasible);
        assert_eq!(s.facilities.len(), 3);
    }

    #[test]
    fn fair_reduction_shapes() {
        let e = e1(Objective::Median);
        let p = reduce_fair_to_pm(&e, 0.25, CopyMode::ZeroCopy, WeightedClients::all(e.metric())).unwrap();
        assert_eq!(
            (0..2).map(|b| p.block_points(b)).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![3, 4]]
        );

        let one = DiversityInstance::new(e.metric().clone(), vec![vec![0, 1]], vec![2], 2, Objective::Median).unwrap();
        let z = reduce_fair_to_pm(&one, 0.25, CopyMode::ZeroCopy, WeightedClients::all(e.metric())).unwrap();
        assert_eq!(z.block_points(0), z.block_points(1));

        let pe = reduce_fair_to_pm(&one, 0.9, CopyMode::PaperEpsilon, WeightedClients::all(e.metric())).unwrap();
        assert_eq!(pe.block_points(0), vec![0, 1]);
        assert_eq!(pe.block_points(1), vec![5, 6]);
        assert_eq!((pe.origin(5), pe.origin(6)), (0, 1));
        let m = pe.metric();
        assert!((m.d(0, 5) - 0.1).abs() < 1e-12);
        assert!((m.d(2, 5) - 2.1).abs() < 1e-12);
        assert!((m.d(5, 6) - 1.2).abs() < 1e-12);
        assert_eq!(m.triangle_violation(), None);
    }

    #[test]
    fn fair_errors() {
        let e = e1(Objective::Median);
        let overlap = DiversityInstance::new(
            e.metric().clone(),
            vec![vec![0, 1], vec![1, 2]],
            vec![1, 1],
            2,
            Objective::Median,
        )
        .unwrap();
        assert!(matches!(
            solve_fair(&overlap, &SolveOptions::default()),
            Err(Error::NotDisjoint { .. })
        ));
        let short = DiversityInstance::new(
            e.metric().clone(),
            vec![vec![0], vec![3]],
            vec![1, 0],
            2,
            Objective::Median,
        )
        .unwrap();
        assert!(matches!(
            solve_fair(&short, &SolveOptions::default()),
            Err(Error::RequirementSumMismatch { .. })
        ));
    }

    #[test]
    fn e1_fair() {
        let s = solve_fair(&e1(Objective::Supplier), &SolveOptions::default()).unwrap();
        assert_eq!(s.cost, 1.0);
        assert!(s.feasible);
        let s = solve_fair(&e1(Objective::Median), &SolveOptions::default()).unwrap();
        assert!(s.cost <= (1.0 + 2.0 / std::f64::consts::E + 0.25) * 3.0);
        // r_i = |G_i|: the only feasible set
        let e = e1(Objective::Median);
        let forced = DiversityInstance::new(
            e.metric().clone(),
            vec![vec![0, 1], vec![3, 4]],
            vec![2, 2],
            4,
            Objective::Median,
        )
        .unwrap();
        assert_eq!(
            solve_fair(&forced, &SolveOptions::default()).unwrap().facilities,
            vec![0, 1, 3, 4]
        );
    }

    #[test]
    fn fair_copy_modes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eps = 0.25;
        for _ in 0..30 {
            let inst = random_fair_instance(&mut rng, 7, 6, 3, 2, Objective::Median);
            let opts = SolveOptions {
                epsilon: eps,
                selection: Selection::Exhaustive,
                grid: GridMode::Exact,
                ..Default::default()
            };
            let z = solve_fair(&inst, &opts).unwrap();
            let p = solve_fair(
                &inst,
                &SolveOptions {
                    copy_mode: CopyMode::PaperEpsilon,
                    ..opts
                },
            )
            .unwrap();
            assert!(z.feasible && p.feasible);
            let opt = brute_force_fair(&inst).unwrap().cost;
            let bound = (1.0 + 2.0 / std::f64::consts::E) * (1.0 + eps);
            assert!(z.cost <= bound * opt + 1e-9 && p.cost <= bound * opt + 1e-9);
        }
    }

    #[test]
    fn div_supplier_matches_oracle_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let inst = crate::fixtures::random_div_instance(&mut rng, 8, 6, 3, 3, Objective::Supplier);
            match (
                brute_force_div(&inst),
                solve_div_clustering(&inst, &SolveOptions::default()),
            ) {
                (Ok(opt), Ok(s)) => assert!(s.feasible && s.cost <= 3.0 * opt.cost + 1e-9),
                (Err(Error::Infeasible), Err(Error::Infeasible)) => {}
                (a, b) => panic!("oracle {a:?} vs driver {b:?}"),
            }
        }
    }
}
