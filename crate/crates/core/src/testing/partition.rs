//! Grouping of reference indices into clusters of equal (or empirically
//! close) values. The cluster count d decides which null law applies.

use crate::error::{Error, Result};

/// A partition of the index set {0, …, k−1} into d disjoint clusters, each
/// carrying a center value on the scale of the reference vector. Clusters
/// are ordered by ascending center.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    centers: Vec<f64>,
}

impl Partition {
    pub fn new(clusters: Vec<Vec<usize>>, centers: Vec<f64>) -> Result<Self> {
        if clusters.len() != centers.len() || clusters.is_empty() {
            return Err(Error::InvalidPartition(
                "need one center per nonempty cluster".into(),
            ));
        }
        if clusters.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidPartition("empty cluster".into()));
        }
        let k: usize = clusters.iter().map(|c| c.len()).sum();
        let mut seen = vec![false; k];
        for &idx in clusters.iter().flatten() {
            if idx >= k || seen[idx] {
                return Err(Error::InvalidPartition(format!(
                    "clusters must cover 0..{k} exactly once"
                )));
            }
            seen[idx] = true;
        }
        Ok(Self { clusters, centers })
    }

    pub fn d(&self) -> usize {
        self.clusters.len()
    }

    pub fn k(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len()).collect()
    }

    /// Map each index to its cluster id.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.k()];
        for (h, cluster) in self.clusters.iter().enumerate() {
            for &j in cluster {
                out[j] = h;
            }
        }
        out
    }
}

/// Group exactly-equal reference values into clusters. The distinct values
/// become the centers; d is their count.
pub fn detect_null_partition(reference: &[f64]) -> Partition {
    let mut order: Vec<usize> = (0..reference.len()).collect();
    order.sort_by(|&i, &j| reference[i].partial_cmp(&reference[j]).unwrap());
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut centers: Vec<f64> = Vec::new();
    for &idx in &order {
        match centers.last() {
            Some(&c) if c == reference[idx] => clusters.last_mut().unwrap().push(idx),
            _ => {
                clusters.push(vec![idx]);
                centers.push(reference[idx]);
            }
        }
    }
    Partition { clusters, centers }
}

/// Data-driven clustering of empirical frequencies on the √ scale: sort p̂,
/// then grow each cluster from its first (smallest) element while
/// √n·|√p̂_σ(j) − √p̂_first| ≤ λ. Centers are √r_g = cluster means of √p̂,
/// stored on the probability scale.
pub fn cluster_empirical(p_hat: &[f64], n: u64, lambda: f64) -> Partition {
    debug_assert!(lambda > 0.0);
    let k = p_hat.len();
    let sqrt_n = (n as f64).sqrt();
    let sqrt_p: Vec<f64> = p_hat.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sqrt_p[i].partial_cmp(&sqrt_p[j]).unwrap());

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut centers: Vec<f64> = Vec::new();
    let mut pos = 0;
    while pos < k {
        let anchor = sqrt_p[order[pos]];
        let mut end = pos + 1;
        while end < k && sqrt_n * (sqrt_p[order[end]] - anchor) <= lambda {
            end += 1;
        }
        let members: Vec<usize> = order[pos..end].to_vec();
        let mean_sqrt: f64 = members.iter().map(|&j| sqrt_p[j]).sum::<f64>() / members.len() as f64;
        clusters.push(members);
        centers.push(mean_sqrt * mean_sqrt);
        pos = end;
    }
    Partition { clusters, centers }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_figure_one_configuration() {
        let p = detect_null_partition(&[1.0, 3.0, 3.0, 3.0, 5.0, 5.0]);
        assert_eq!(p.d(), 3);
        assert_eq!(p.cluster_sizes(), vec![1, 3, 2]);
        assert_eq!(p.centers(), &[1.0, 3.0, 5.0]);
        assert_eq!(p.clusters()[1], vec![1, 2, 3]);
    }

    #[test]
    fn detect_non_degenerate_and_flat() {
        assert_eq!(detect_null_partition(&[0.1, 0.2, 0.3, 0.4]).d(), 4);
        assert_eq!(detect_null_partition(&[2.0, 2.0, 2.0]).d(), 1);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0, 1], vec![1]], vec![0.0, 1.0]).is_err());
        assert!(Partition::new(vec![vec![0], vec![]], vec![0.0, 1.0]).is_err());
        assert!(Partition::new(vec![vec![0, 2], vec![1]], vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn cluster_recovers_separated_groups() {
        // Two groups with a √-scale gap far above λ/√n.
        let n = 2000u64;
        let lambda = (2.0 * (n as f64).ln()).sqrt();
        let p_hat = [0.101, 0.099, 0.402, 0.398];
        let part = cluster_empirical(&p_hat, n, lambda);
        assert_eq!(part.d(), 2);
        assert_eq!(part.cluster_sizes(), vec![2, 2]);
        let c0 = part.centers()[0];
        assert!((c0.sqrt() - (0.101f64.sqrt() + 0.099f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn huge_lambda_gives_single_cluster() {
        let p_hat = [0.1, 0.2, 0.3, 0.4];
        let n = 100u64;
        let spread = (n as f64).sqrt() * (0.4f64.sqrt() - 0.1f64.sqrt());
        let part = cluster_empirical(&p_hat, n, spread + 1.0);
        assert_eq!(part.d(), 1);
        assert_eq!(part.cluster_sizes(), vec![4]);
    }

    #[test]
    fn vanishing_lambda_gives_singletons() {
        let p_hat = [0.1, 0.2, 0.3, 0.4];
        let part = cluster_empirical(&p_hat, 100, 1e-12);
        assert_eq!(part.d(), 4);
        assert!(part.cluster_sizes().iter().all(|&s| s == 1));
    }
}
