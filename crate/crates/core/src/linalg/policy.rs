/// Tolerance policy for every rank decision in the crate.
///
/// A singular value counts as nonzero when it exceeds `rel * σ_max`; a
/// matrix whose largest singular value is at most `abs_floor` has rank 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy {
    pub rel: f64,
    pub abs_floor: f64,
}

impl RankPolicy {
    pub const DEFAULT_REL: f64 = 1e-9;
    pub const DEFAULT_ABS_FLOOR: f64 = 1e-14;

    pub fn new(rel: f64) -> Self {
        assert!(rel > 0.0, "relative tolerance must be positive");
        Self {
            rel,
            abs_floor: Self::DEFAULT_ABS_FLOOR,
        }
    }

    /// Number of entries of a nonincreasing singular value list above threshold.
    pub fn rank_of(&self, singular_values: &[f64]) -> usize {
        let smax = singular_values.first().copied().unwrap_or(0.0);
        if smax <= self.abs_floor {
            return 0;
        }
        let cut = self.rel * smax;
        singular_values.iter().take_while(|&&s| s > cut).count()
    }
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self::new(Self::DEFAULT_REL)
    }
}
