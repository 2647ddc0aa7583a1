//! DBSCAN over word vectors with the Manhattan metric.
//!
//! The neighborhood predicate is strictly `< eps` and always includes the
//! query point itself. Expansion is iterative: a new cluster grows a
//! worklist by joining the neighborhoods of core points, and border points
//! previously marked noise are adopted into the first cluster that reaches
//! them. Given a fixed input order the assignment is deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{LahjaError, Result};

/// Cluster id used for noise points.
pub const NOISE: i32 = -1;

const UNCLASSIFIED: i32 = -2;

/// Distance metric for clustering. Only Manhattan is implemented; the enum
/// exists so configuration files state the metric explicitly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    #[default]
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbscanConfig {
    pub eps: f64,
    pub min_samples: usize,
    pub metric: DistanceMetric,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        DbscanConfig {
            eps: 0.5,
            min_samples: 9,
            metric: DistanceMetric::Manhattan,
        }
    }
}

impl DbscanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(LahjaError::Config("eps must be positive and finite".into()));
        }
        if self.min_samples < 1 {
            return Err(LahjaError::Config("min_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-point cluster labels: ids `0..cluster_count` or [`NOISE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<i32>,
    pub cluster_count: usize,
}

impl ClusterAssignment {
    pub fn noise_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == NOISE)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn members(&self, cluster: i32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Manhattan (L1) distance.
pub fn manhattan_distance(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(LahjaError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(manhattan_unchecked(a, b))
}

fn manhattan_unchecked(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (f64::from(*x) - f64::from(*y)).abs())
        .sum()
}

/// Indices of all points with distance to point `k` strictly less than
/// `eps`, in ascending order. Always contains `k` itself.
pub fn region_query(points: &[Vec<f32>], k: usize, eps: f64) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| manhattan_unchecked(&points[k], p) < eps)
        .map(|(i, _)| i)
        .collect()
}

/// Density clustering over `points`.
pub fn dbscan(points: &[Vec<f32>], config: &DbscanConfig) -> Result<ClusterAssignment> {
    config.validate()?;
    if points.is_empty() {
        return Err(LahjaError::InvalidInput(
            "cannot cluster an empty point set".into(),
        ));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(LahjaError::DimensionMismatch {
                left: dim,
                right: p.len(),
            });
        }
    }

    let n = points.len();
    let mut labels = vec![UNCLASSIFIED; n];
    let mut visited = vec![false; n];
    let mut cluster: i32 = 0;

    for p in 0..n {
        if visited[p] {
            continue;
        }
        visited[p] = true;
        let neighborhood = region_query(points, p, config.eps);
        if neighborhood.len() < config.min_samples {
            labels[p] = NOISE;
            continue;
        }

        labels[p] = cluster;
        let mut queued = vec![false; n];
        let mut worklist = neighborhood;
        for &q in &worklist {
            queued[q] = true;
        }
        let mut i = 0;
        while i < worklist.len() {
            let q = worklist[i];
            i += 1;
            if !visited[q] {
                visited[q] = true;
                let q_neighborhood = region_query(points, q, config.eps);
                if q_neighborhood.len() >= config.min_samples {
                    for r in q_neighborhood {
                        if !queued[r] {
                            queued[r] = true;
                            worklist.push(r);
                        }
                    }
                }
            }
            if labels[q] == UNCLASSIFIED || labels[q] == NOISE {
                labels[q] = cluster;
            }
        }
        cluster += 1;
    }

    debug_assert!(labels.iter().all(|&l| l != UNCLASSIFIED));
    Ok(ClusterAssignment {
        labels,
        cluster_count: cluster as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points_1d(xs: &[f64]) -> Vec<Vec<f32>> {
        xs.iter().map(|&x| vec![x as f32]).collect()
    }

    /// Independent reference implementation: precompute all neighborhoods
    /// and core flags, then breadth-first flood from each unlabeled core
    /// point in index order.
    fn reference_dbscan(points: &[Vec<f32>], eps: f64, min_samples: usize) -> ClusterAssignment {
        let n = points.len();
        let neighborhoods: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        points[i]
                            .iter()
                            .zip(&points[j])
                            .map(|(a, b)| (f64::from(*a) - f64::from(*b)).abs())
                            .sum::<f64>()
                            < eps
                    })
                    .collect()
            })
            .collect();
        let core: Vec<bool> = neighborhoods
            .iter()
            .map(|nb| nb.len() >= min_samples)
            .collect();
        let mut labels = vec![UNCLASSIFIED; n];
        let mut cluster = 0i32;
        for start in 0..n {
            if labels[start] != UNCLASSIFIED || !core[start] {
                continue;
            }
            labels[start] = cluster;
            let mut frontier = vec![start];
            while let Some(q) = frontier.pop() {
                for &r in &neighborhoods[q] {
                    if labels[r] == UNCLASSIFIED || labels[r] == NOISE {
                        labels[r] = cluster;
                        if core[r] {
                            frontier.push(r);
                        }
                    }
                }
            }
            cluster += 1;
        }
        for l in labels.iter_mut() {
            if *l == UNCLASSIFIED {
                *l = NOISE;
            }
        }
        ClusterAssignment {
            labels,
            cluster_count: cluster as usize,
        }
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f32>> {
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0f32..1.0)).collect())
            .collect()
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(
            manhattan_distance(&[1.0, 2.0], &[3.0, 5.0]).unwrap(),
            5.0
        );
        assert_eq!(manhattan_distance(&[0.7, -2.0], &[0.7, -2.0]).unwrap(), 0.0);
        assert!(manhattan_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn manhattan_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a: Vec<f32> = (0..4).map(|_| rng.random_range(-5.0f32..5.0)).collect();
            let b: Vec<f32> = (0..4).map(|_| rng.random_range(-5.0f32..5.0)).collect();
            assert_eq!(
                manhattan_distance(&a, &b).unwrap(),
                manhattan_distance(&b, &a).unwrap()
            );
        }
    }

    #[test]
    fn region_query_is_strict_and_contains_self() {
        let pts = points_1d(&[0.0, 0.1, 0.2]);
        assert_eq!(region_query(&pts, 0, 0.15), [0, 1]);
        // Distance exactly eps is excluded.
        let pts = points_1d(&[0.0, 0.5]);
        assert_eq!(region_query(&pts, 0, 0.5), [0]);
        assert_eq!(region_query(&pts, 0, 1e-9), [0]);
    }

    #[test]
    fn two_well_separated_clusters() {
        let pts = points_1d(&[0.0, 0.1, 0.2, 5.0, 5.1, 5.2]);
        let config = DbscanConfig {
            eps: 0.3,
            min_samples: 3,
            ..DbscanConfig::default()
        };
        let got = dbscan(&pts, &config).unwrap();
        assert_eq!(got.cluster_count, 2);
        assert_eq!(got.labels, [0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn far_point_is_noise() {
        let pts = points_1d(&[0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 10.0]);
        let config = DbscanConfig {
            eps: 0.3,
            min_samples: 3,
            ..DbscanConfig::default()
        };
        let got = dbscan(&pts, &config).unwrap();
        assert_eq!(got.labels[6], NOISE);
        assert_eq!(got.noise_indices(), [6]);
    }

    #[test]
    fn tiny_eps_gives_all_noise() {
        let pts = points_1d(&[0.0, 0.1, 0.2, 5.0, 5.1, 5.2]);
        let config = DbscanConfig {
            eps: 0.01,
            min_samples: 3,
            ..DbscanConfig::default()
        };
        let got = dbscan(&pts, &config).unwrap();
        assert_eq!(got.cluster_count, 0);
        assert!(got.labels.iter().all(|&l| l == NOISE));
    }

    #[test]
    fn noise_can_be_adopted_as_border() {
        // Index 0 is visited first, has a thin neighborhood, and is marked
        // noise; the dense cluster to its right later adopts it.
        let pts = points_1d(&[0.0, 0.25, 0.3, 0.35, 0.4]);
        let config = DbscanConfig {
            eps: 0.3,
            min_samples: 4,
            ..DbscanConfig::default()
        };
        let got = dbscan(&pts, &config).unwrap();
        assert_eq!(got.labels[0], 0);
        assert_eq!(got.cluster_count, 1);
    }

    #[test]
    fn config_validation() {
        assert!(DbscanConfig::default().validate().is_ok());
        assert!(DbscanConfig {
            eps: 0.0,
            ..DbscanConfig::default()
        }
        .validate()
        .is_err());
        assert!(DbscanConfig {
            min_samples: 0,
            ..DbscanConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(dbscan(&[], &DbscanConfig::default()).is_err());
    }

    #[test]
    fn matches_reference_on_random_data() {
        for seed in 0..6 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for d in [2usize, 8] {
                let pts = random_points(&mut rng, 150, d);
                let config = DbscanConfig {
                    eps: 0.4 * d as f64,
                    min_samples: 5,
                    ..DbscanConfig::default()
                };
                let got = dbscan(&pts, &config).unwrap();
                let want = reference_dbscan(&pts, config.eps, config.min_samples);
                assert_eq!(got, want, "seed {seed} dim {d}");
            }
        }
    }

    #[test]
    fn every_cluster_contains_a_core_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts = random_points(&mut rng, 200, 3);
        let config = DbscanConfig {
            eps: 1.0,
            min_samples: 6,
            ..DbscanConfig::default()
        };
        let got = dbscan(&pts, &config).unwrap();
        for c in 0..got.cluster_count as i32 {
            let members = got.members(c);
            assert!(!members.is_empty());
            assert!(
                members
                    .iter()
                    .any(|&m| region_query(&pts, m, config.eps).len() >= config.min_samples),
                "cluster {c} has no core point"
            );
        }
    }

    #[test]
    fn core_neighborhoods_stay_within_their_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = random_points(&mut rng, 200, 2);
        let config = DbscanConfig {
            eps: 0.5,
            min_samples: 5,
            ..DbscanConfig::default()
        };
        let got = dbscan(&pts, &config).unwrap();
        for p in 0..pts.len() {
            let nb = region_query(&pts, p, config.eps);
            if nb.len() >= config.min_samples {
                for q in nb {
                    assert_eq!(
                        got.labels[q], got.labels[p],
                        "neighbor {q} of core {p} escaped its cluster"
                    );
                }
            }
        }
    }

    #[test]
    fn core_partition_is_permutation_invariant() {
        use std::collections::{BTreeSet, HashMap};
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pts = random_points(&mut rng, 120, 2);
        let config = DbscanConfig {
            eps: 0.5,
            min_samples: 5,
            ..DbscanConfig::default()
        };

        let mut perm: Vec<usize> = (0..pts.len()).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let shuffled: Vec<Vec<f32>> = perm.iter().map(|&i| pts[i].clone()).collect();

        let core_partition = |points: &[Vec<f32>], assignment: &ClusterAssignment| {
            let mut groups: HashMap<i32, BTreeSet<Vec<u32>>> = HashMap::new();
            for (i, &label) in assignment.labels.iter().enumerate() {
                if label == NOISE {
                    continue;
                }
                if region_query(points, i, config.eps).len() >= config.min_samples {
                    // Identify points by value bits, not index.
                    groups
                        .entry(label)
                        .or_default()
                        .insert(points[i].iter().map(|x| x.to_bits()).collect());
                }
            }
            let mut sets: Vec<BTreeSet<Vec<u32>>> = groups.into_values().collect();
            sets.sort();
            sets
        };

        let a = dbscan(&pts, &config).unwrap();
        let b = dbscan(&shuffled, &config).unwrap();
        assert_eq!(core_partition(&pts, &a), core_partition(&shuffled, &b));
    }

    #[test]
    fn shrinking_eps_never_rescues_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts = random_points(&mut rng, 150, 2);
        let wide = DbscanConfig {
            eps: 0.6,
            min_samples: 5,
            ..DbscanConfig::default()
        };
        let narrow = DbscanConfig { eps: 0.3, ..wide };
        let noisy_wide: std::collections::HashSet<usize> =
            dbscan(&pts, &wide).unwrap().noise_indices().into_iter().collect();
        let noisy_narrow: std::collections::HashSet<usize> =
            dbscan(&pts, &narrow).unwrap().noise_indices().into_iter().collect();
        assert!(noisy_wide.is_subset(&noisy_narrow));
    }
}
