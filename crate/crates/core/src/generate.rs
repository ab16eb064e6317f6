//! Seeded instance generators.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::InstanceFile;
use crate::metric::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// Uniform points in the unit cube scaled by 100, random intersecting groups.
    EuclideanRandom,
    /// Clustered points; each facility joins its cluster's group and sometimes one more.
    PlantedGroups,
    /// Graph instance where feasibility is vertex cover: one group `{u,v}` per edge, `r = 1`.
    VertexCoverHard,
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean-random" => Ok(GenKind::EuclideanRandom),
            "planted-groups" => Ok(GenKind::PlantedGroups),
            "vertex-cover-hard" => Ok(GenKind::VertexCoverHard),
            _ => Err(Error::BadParameter(format!("unknown generator '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub clients: usize,
    pub facilities: usize,
    pub dim: usize,
    pub groups: usize,
    pub k: usize,
    /// Membership probability (euclidean-random) or extra-group probability (planted-groups).
    pub group_prob: f64,
    /// Vertex count for vertex-cover-hard.
    pub vertices: usize,
    pub edge_prob: f64,
    pub objective: Objective,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            clients: 60,
            facilities: 20,
            dim: 2,
            groups: 3,
            k: 4,
            group_prob: 0.3,
            vertices: 8,
            edge_prob: 0.4,
            objective: Objective::Median,
        }
    }
}

impl GenParams {
    fn validate(&self, kind: GenKind) -> Result<()> {
        let bad = |m: &str| Err(Error::BadParameter(m.into()));
        if !(0.0..=1.0).contains(&self.group_prob) || !(0.0..=1.0).contains(&self.edge_prob) {
            return bad("probabilities must lie in [0,1]");
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        match kind {
            GenKind::VertexCoverHard => {
                if self.vertices < 2 || self.k > self.vertices {
                    return bad("vertex-cover-hard needs at least 2 vertices and k <= vertices");
                }
            }
            _ => {
                if self.clients == 0 || self.facilities < self.k || self.dim == 0 || self.groups == 0 {
                    return bad("need clients >= 1, facilities >= k, dim >= 1 and groups >= 1");
                }
            }
        }
        Ok(())
    }
}

pub fn generate(kind: GenKind, params: &GenParams, seed: u64) -> Result<InstanceFile> {
    params.validate(kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        GenKind::EuclideanRandom => euclidean_random(params, &mut rng),
        GenKind::PlantedGroups => planted_groups(params, &mut rng),
        GenKind::VertexCoverHard => vertex_cover_hard(params, &mut rng),
    })
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Clients first, then facilities.
fn layout(p: &GenParams, points: Vec<Vec<f64>>, groups: Vec<Vec<usize>>, requirements: Vec<usize>) -> InstanceFile {
    let nc = p.clients;
    InstanceFile {
        objective: p.objective,
        k: p.k,
        points: Some(points),
        distances: None,
        clients: Some((0..nc).collect()),
        facilities: Some((nc..nc + p.facilities).collect()),
        groups,
        requirements,
        labels: None,
    }
}

fn euclidean_random(p: &GenParams, rng: &mut ChaCha8Rng) -> InstanceFile {
    let n = p.clients + p.facilities;
    let points = (0..n)
        .map(|_| (0..p.dim).map(|_| round2(rng.gen_range(0.0..100.0))).collect())
        .collect();
    let fs = p.clients..n;
    let groups: Vec<Vec<usize>> = (0..p.groups)
        .map(|_| fs.clone().filter(|_| rng.gen_bool(p.group_prob)).collect())
        .collect();
    let requirements = groups
        .iter()
        .map(|g| rng.gen_range(0..=g.len().min(p.k).min(2)))
        .collect();
    layout(p, points, groups, requirements)
}

fn planted_groups(p: &GenParams, rng: &mut ChaCha8Rng) -> InstanceFile {
    let centers: Vec<Vec<f64>> = (0..p.groups)
        .map(|_| (0..p.dim).map(|_| rng.gen_range(0.0..100.0)).collect())
        .collect();
    let near = |c: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
        c.iter().map(|x| round2(x + rng.gen_range(-8.0..8.0))).collect()
    };
    let mut points = Vec::with_capacity(p.clients + p.facilities);
    for _ in 0..p.clients {
        let c = &centers[rng.gen_range(0..p.groups)];
        points.push(near(c, rng));
    }
    let mut groups = vec![Vec::new(); p.groups];
    for i in 0..p.facilities {
        let home = i % p.groups;
        points.push(near(&centers[home], rng));
        groups[home].push(p.clients + i);
        if p.groups > 1 && rng.gen_bool(p.group_prob) {
            let other = (home + rng.gen_range(1..p.groups)) % p.groups;
            groups[other].push(p.clients + i);
        }
    }
    let requirements = groups.iter().map(|g| (p.k / p.groups).min(g.len())).collect();
    layout(p, points, groups, requirements)
}

/// Vertices are clients and facilities. Adjacent vertices are at distance 1; other
/// pairs take the shortest-path distance, with `n + 1` between components, so the
/// matrix is a metric.
fn vertex_cover_hard(p: &GenParams, rng: &mut ChaCha8Rng) -> InstanceFile {
    let n = p.vertices;
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p.edge_prob))
        .collect();
    if edges.is_empty() {
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(rng);
        edges.push((vs[0].min(vs[1]), vs[0].max(vs[1])));
    }
    let far = (n + 1) as f64;
    let mut d = vec![vec![far; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
    }
    for &(u, v) in &edges {
        d[u][v] = 1.0;
        d[v][u] = 1.0;
    }
    for w in 0..n {
        for u in 0..n {
            for v in 0..n {
                let via = d[u][w] + d[w][v];
                if via < d[u][v] {
                    d[u][v] = via;
                }
            }
        }
    }
    InstanceFile {
        objective: p.objective,
        k: p.k,
        points: None,
        distances: Some(d),
        clients: None,
        facilities: None,
        groups: edges.iter().map(|&(u, v)| vec![u, v]).collect(),
        requirements: vec![1; edges.len()],
        labels: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_div;

    #[test]
    fn same_seed_same_bytes() {
        for kind in [
            GenKind::EuclideanRandom,
            GenKind::PlantedGroups,
            GenKind::VertexCoverHard,
        ] {
            let p = GenParams::default();
            let a = generate(kind, &p, 42).unwrap().to_json();
            let b = generate(kind, &p, 42).unwrap().to_json();
            assert_eq!(a, b);
            assert_ne!(a, generate(kind, &p, 43).unwrap().to_json());
            generate(kind, &p, 42).unwrap().into_instance().unwrap();
        }
    }

    #[test]
    fn triangle_graph_is_feasible() {
        let p = GenParams {
            vertices: 3,
            edge_prob: 1.0,
            k: 2,
            ..GenParams::default()
        };
        let f = generate(GenKind::VertexCoverHard, &p, 0).unwrap();
        assert_eq!(f.groups, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let inst = f.into_instance().unwrap();
        assert!(inst.check_div_r_sat(&[0, 1]));
        assert!(brute_force_div(&inst).is_ok());
    }

    #[test]
    fn vertex_cover_metric_is_valid() {
        let p = GenParams {
            vertices: 10,
            edge_prob: 0.2,
            k: 3,
            ..GenParams::default()
        };
        for seed in 0..10 {
            let inst = generate(GenKind::VertexCoverHard, &p, seed)
                .unwrap()
                .into_instance()
                .unwrap();
            assert!(inst.groups().iter().all(|g| g.len() == 2));
            assert!(inst.requirements().iter().all(|&r| r == 1));
            for g in inst.groups() {
                assert_eq!(inst.metric().d(g[0], g[1]), 1.0);
            }
        }
    }

    #[test]
    fn planted_single_group_is_plain_clustering() {
        let p = GenParams {
            groups: 1,
            ..GenParams::default()
        };
        let inst = generate(GenKind::PlantedGroups, &p, 3)
            .unwrap()
            .into_instance()
            .unwrap();
        assert_eq!(inst.groups()[0], inst.metric().facilities());
        assert_eq!(inst.requirements(), &[p.k]);
        // any k facilities are feasible
        assert!(inst.check_div_r_sat(&inst.metric().facilities()[..p.k]));
    }

    #[test]
    fn bad_params() {
        let p = GenParams {
            k: 0,
            ..GenParams::default()
        };
        assert!(generate(GenKind::EuclideanRandom, &p, 0).is_err());
        let p = GenParams {
            vertices: 3,
            k: 4,
            ..GenParams::default()
        };
        assert!(generate(GenKind::VertexCoverHard, &p, 0).is_err());
        assert!("nope".parse::<GenKind>().is_err());
    }
}
