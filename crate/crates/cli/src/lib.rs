//! Configuration, dispatch and the `key=value` run report behind the `divclust` binary.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use divclust::io::{load_instance, Format};
use divclust::oracle::{brute_force_div, brute_force_fair};
use divclust::{
    solve_div_clustering, solve_fair, CopyMode, CoresetMode, DiversityInstance, Error, GridMode, LeaderSpace,
    Objective, Selection, Solution, SolveOptions, ThresholdSearch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    FptSubmodular,
    FptWarmup,
    SupplierMatching,
    Fair,
    Exact,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::FptSubmodular => "fpt-submodular",
            Algorithm::FptWarmup => "fpt-warmup",
            Algorithm::SupplierMatching => "supplier-matching",
            Algorithm::Fair => "fair",
            Algorithm::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub instance: PathBuf,
    pub format: Format,
    /// Overrides the objective stored in the instance.
    pub objective: Option<Objective>,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub exact: bool,
    pub coreset: CoresetMode,
    pub grid: GridMode,
    pub fair_mode: CopyMode,
    pub inner: Selection,
    pub leaders: LeaderSpace,
    pub threshold: ThresholdSearch,
    pub seed: u64,
    pub threads: usize,
}

impl Config {
    pub fn new(instance: PathBuf) -> Self {
        Config {
            instance,
            format: Format::Json,
            objective: None,
            algorithm: Algorithm::FptSubmodular,
            epsilon: 0.25,
            exact: false,
            coreset: CoresetMode::Auto,
            grid: GridMode::Geometric,
            fair_mode: CopyMode::ZeroCopy,
            inner: Selection::LazyGreedy,
            leaders: LeaderSpace::Anchored,
            threshold: ThresholdSearch::Binary,
            seed: 0,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            epsilon: self.epsilon,
            selection: match self.algorithm {
                Algorithm::FptWarmup => Selection::Arbitrary,
                _ => self.inner,
            },
            grid: self.grid,
            leaders: self.leaders,
            threshold: self.threshold,
            coreset: self.coreset,
            coreset_nu: None,
            copy_mode: self.fair_mode,
            seed: self.seed,
            threads: Some(self.threads),
        }
    }
}

/// Process exit code for an error: 2 input, 3 infeasible, 4 enumeration cap, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Schema(_) | Error::Metric(_) | Error::Io(_) => 2,
        Error::Infeasible => 3,
        Error::CapExceeded { .. } => 4,
        _ => 1,
    }
}

/// Ordered `key=value` lines. Keys under `time.` carry wall-clock values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    fields: Vec<(String, String)>,
}

impl Report {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// The report without timing lines, for comparisons across runs.
    pub fn canonical(&self) -> String {
        let mut r = self.clone();
        r.fields.retain(|(k, _)| !k.starts_with("time."));
        r.render()
    }
}

fn ids(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn ms(start: Instant) -> String {
    format!("{:.3}", start.elapsed().as_secs_f64() * 1e3)
}

fn push_solution(report: &mut Report, inst: &DiversityInstance, sol: &Solution) {
    report.push("status", "ok");
    report.push("provenance", &sol.provenance);
    report.push("facilities", ids(&sol.facilities));
    if let Some(labels) = inst.labels() {
        let names: Vec<&str> = sol.facilities.iter().map(|&f| labels[f].as_str()).collect();
        report.push("labels", names.join(","));
    }
    report.push("cost", sol.cost);
    report.push("feasible", sol.feasible);
    report.push("patterns", sol.stats.patterns);
    report.push("guesses", sol.stats.guesses);
    report.push("coreset_size", sol.stats.coreset_size);
}

/// Loads, solves and reports. On failure the partial report (ending in
/// `status=...` and `error=...`) is returned with the error.
pub fn run(cfg: &Config) -> Result<Report, (Report, Error)> {
    let mut report = Report::default();
    report.push("instance", cfg.instance.display());
    report.push("algorithm", cfg.algorithm.as_str());
    report.push("epsilon", cfg.epsilon);
    report.push("seed", cfg.seed);
    report.push("threads", cfg.threads);
    report.push("coreset", cfg.coreset.as_str());
    report.push("grid", cfg.grid.as_str());
    report.push("fair_mode", cfg.fair_mode.as_str());
    report.push("inner", cfg.solve_options().selection.as_str());
    report.push("leaders", cfg.leaders.as_str());

    let mut timings = Vec::new();
    let fail = |mut report: Report, timings: Vec<(&str, String)>, err: Error| {
        report.push(
            "status",
            if matches!(err, Error::Infeasible) {
                "infeasible"
            } else {
                "error"
            },
        );
        report.push("error", &err);
        for (k, v) in timings {
            report.push(k, v);
        }
        (report, err)
    };

    let t = Instant::now();
    let inst = match load_instance(&cfg.instance, cfg.format) {
        Ok(i) => i,
        Err(e) => return Err(fail(report, timings, e)),
    };
    let objective = match (cfg.algorithm, cfg.objective) {
        (Algorithm::SupplierMatching, Some(o)) if o != Objective::Supplier => {
            let e = Error::BadParameter("supplier-matching needs the supplier objective".into());
            return Err(fail(report, timings, e));
        }
        (Algorithm::SupplierMatching, _) => Objective::Supplier,
        (_, Some(o)) => o,
        (_, None) => inst.objective(),
    };
    if objective != inst.objective() {
        log::info!("objective overridden: {} -> {objective}", inst.objective());
    }
    let inst = inst.with_objective(objective);
    timings.push(("time.load_ms", ms(t)));
    report.push("objective", objective);
    report.push("points", inst.metric().n());
    report.push("clients", inst.metric().clients().len());
    report.push("facilities_total", inst.metric().facilities().len());
    report.push("groups", inst.t());
    report.push("k", inst.k());

    let t = Instant::now();
    let opts = cfg.solve_options();
    let oracle = |inst: &DiversityInstance| {
        let fair = cfg.algorithm == Algorithm::Fair;
        divclust::drivers::with_threads(Some(cfg.threads), || {
            if fair {
                brute_force_fair(inst)
            } else {
                brute_force_div(inst)
            }
        })
        .and_then(|r| r)
    };
    let solved = match cfg.algorithm {
        Algorithm::Exact => oracle(&inst),
        Algorithm::Fair => solve_fair(&inst, &opts),
        _ => solve_div_clustering(&inst, &opts),
    };
    timings.push(("time.solve_ms", ms(t)));
    let sol = match solved {
        Ok(s) => s,
        Err(e) => return Err(fail(report, timings, e)),
    };
    push_solution(&mut report, &inst, &sol);

    if cfg.exact && cfg.algorithm != Algorithm::Exact {
        let t = Instant::now();
        let exact = oracle(&inst);
        timings.push(("time.exact_ms", ms(t)));
        match exact {
            Ok(opt) => {
                report.push("exact_cost", opt.cost);
                let ratio = if opt.cost > 0.0 {
                    sol.cost / opt.cost
                } else if sol.cost == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                };
                report.push("ratio", ratio);
            }
            Err(e) => report.push("exact_error", e),
        }
    }
    for (k, v) in timings {
        report.push(k, v);
    }
    Ok(report)
}
