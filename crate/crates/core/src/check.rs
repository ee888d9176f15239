//! Shared settings for numerical diagram checks.

use crate::curvespace::DEFAULT_GRID;

/// Tolerance for morphisms built algebraically (exact up to round-off).
pub const CONSTRUCTED_TOLERANCE: f64 = 1e-6;
/// Tolerance for measured or tabulated morphisms.
pub const MEASURED_TOLERANCE: f64 = 1e-2;

/// How residuals are measured and judged.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    /// Residuals at or below this value count as commuting.
    pub tolerance: f64,
    /// Comparison grid size for curve distances.
    pub grid: usize,
    /// Overrides the probe-set seed label (default: the space name).
    pub seed_label: Option<String>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tolerance: CONSTRUCTED_TOLERANCE,
            grid: DEFAULT_GRID,
            seed_label: None,
        }
    }
}

impl CheckOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    pub fn measured() -> Self {
        Self::with_tolerance(MEASURED_TOLERANCE)
    }

    pub fn seed_label(&self) -> Option<&str> {
        self.seed_label.as_deref()
    }
}
