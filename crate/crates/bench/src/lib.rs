//! Instance builders shared by the benchmarks.

use divclust::generate::{generate, GenKind, GenParams};
use divclust::{DiversityInstance, Objective};

/// Euclidean instance with intersecting planted groups.
pub fn planted(clients: usize, facilities: usize, k: usize, objective: Objective, seed: u64) -> DiversityInstance {
    let params = GenParams {
        clients,
        facilities,
        k,
        groups: 3,
        objective,
        ..GenParams::default()
    };
    generate(GenKind::PlantedGroups, &params, seed)
        .and_then(|f| f.into_instance())
        .expect("generator parameters are valid")
}

/// Uniform random instance with sparse random groups.
pub fn uniform(clients: usize, facilities: usize, k: usize, objective: Objective, seed: u64) -> DiversityInstance {
    let params = GenParams {
        clients,
        facilities,
        k,
        groups: 3,
        objective,
        ..GenParams::default()
    };
    generate(GenKind::EuclideanRandom, &params, seed)
        .and_then(|f| f.into_instance())
        .expect("generator parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_are_seeded() {
        let a = planted(30, 10, 3, Objective::Median, 1);
        let b = planted(30, 10, 3, Objective::Median, 1);
        assert_eq!(a.groups(), b.groups());
        assert_eq!(a.metric().n(), b.metric().n());
        assert_eq!(uniform(20, 8, 2, Objective::Supplier, 4).k(), 2);
    }
}
