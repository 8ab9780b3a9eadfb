/// Numerical thresholds used throughout the crate.
///
/// `projection`, `kernel` and `zero` are relative: they are multiplied by
/// `1 + ‖x‖` (projection) or `max(1, ‖x‖)` (kernel, zero) of the operator
/// under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Idempotence / selfadjointness slack for projections.
    pub projection: f64,
    /// Singular values at or below this count as kernel.
    pub kernel: f64,
    /// Eigenvalues in `[-zero, 0)` still belong to the nonnegative spectral projection.
    pub zero: f64,
    /// Minimum quotient gap for Fredholm / invertibility decisions.
    pub gap: f64,
    /// Eigenvalues of `p + q` above `2 - intersection` span `p ∩ q`.
    pub intersection: f64,
    /// Safety margin below 1/2 for partition acceptance.
    pub partition_margin: f64,
    /// Maximum bisection depth for path certification and partitioning.
    pub max_depth: u32,
    /// Dyadic depth of the interior check grid used on each partition interval.
    pub check_depth: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            projection: 1e-8,
            kernel: 1e-10,
            zero: 1e-10,
            gap: 1e-8,
            intersection: 1e-8,
            partition_margin: 0.05,
            max_depth: 20,
            check_depth: 3,
        }
    }
}

impl Tolerances {
    pub fn projection_slack(&self, norm: f64) -> f64 {
        self.projection * (1.0 + norm)
    }

    pub fn kernel_threshold(&self, norm: f64) -> f64 {
        self.kernel * norm.max(1.0)
    }

    pub fn zero_threshold(&self, norm: f64) -> f64 {
        self.zero * norm.max(1.0)
    }
}
