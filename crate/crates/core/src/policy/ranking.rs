//! Empirical arm ranking.

use crate::env::ArmId;

/// Arms ordered by descending empirical mean. Ties break toward the lower
/// original arm index so that every player derives the same order from the
/// same estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingEstimate {
    by_rank: Vec<ArmId>,
    rank_of: Vec<u32>,
    means: Vec<f64>,
}

impl RankingEstimate {
    /// Build from per-arm estimates indexed by arm (`means[i]` is arm `i+1`).
    pub fn from_means(means: Vec<f64>) -> Self {
        let k = means.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then_with(|| a.cmp(&b)));
        let mut rank_of = vec![0u32; k];
        let by_rank: Vec<ArmId> = order
            .iter()
            .enumerate()
            .map(|(rank, &arm_idx)| {
                rank_of[arm_idx] = rank as u32 + 1;
                ArmId::from_raw(arm_idx as u32 + 1)
            })
            .collect();
        RankingEstimate {
            by_rank,
            rank_of,
            means,
        }
    }

    pub fn k(&self) -> u32 {
        self.by_rank.len() as u32
    }

    /// Arm holding the given 1-based rank.
    pub fn arm_at_rank(&self, rank: u32) -> ArmId {
        self.by_rank[(rank - 1) as usize]
    }

    /// 1-based rank of the given arm.
    pub fn rank_of(&self, arm: ArmId) -> u32 {
        self.rank_of[arm.index()]
    }

    pub fn mean_of(&self, arm: ArmId) -> f64 {
        self.means[arm.index()]
    }

    /// Whether this ordering is epsilon-correct against the true means:
    /// whenever `mu_i - mu_j >= epsilon`, arm `i` must precede arm `j`.
    pub fn is_epsilon_correct(&self, true_means: &[f64], epsilon: f64) -> bool {
        let k = true_means.len();
        for i in 0..k {
            for j in 0..k {
                if true_means[i] - true_means[j] >= epsilon && self.rank_of[i] >= self.rank_of[j] {
                    return false;
                }
            }
        }
        true
    }
}
