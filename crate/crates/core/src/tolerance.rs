//! Numerical thresholds shared by the verifiers.
//!
//! Quantities of the size of `R_k` scale like `n = 2^k`, so most thresholds
//! are given relative to `n` (or `sqrt(n)` for values of `P_k` itself).

/// Absolute tolerance for modulus-squared quantities, per unit of `n`.
pub const EVAL_REL: f64 = 1e-6;

/// Half-width of the band around a level, per unit of `n`, inside which a
/// sample's sign is not trusted.
pub const AMBIGUITY_REL: f64 = 1e-7;

/// Subdivision factor for ambiguous cells.
pub const AMBIGUOUS_SUBDIVISION: usize = 16;

/// Refined crossing brackets are narrower than `2 pi / (REFINE_FACTOR * N)`.
pub const REFINE_FACTOR: f64 = 64.0;

/// Default grid oversampling: `N = 16 n`.
pub const DEFAULT_OVERSAMPLE: usize = 16;

/// Oversampling the level-crossing verifiers escalate to before failing.
pub const ESCALATED_OVERSAMPLE: usize = 64;

/// Log clipping for Mahler-measure quadrature: `log |f|` is floored at `-L`.
pub const DEFAULT_LOG_CLIP: f64 = 40.0;

/// Successive moment estimates must agree to this relative precision.
pub const MOMENT_CONVERGENCE: f64 = 1e-9;

/// Relative sensitivity above which a Mahler quadrature is flagged.
pub const MAHLER_SENSITIVITY: f64 = 1e-6;

/// Mahler quadrature grids are doubled until the doubling changes the
/// estimate by less than this.
pub const MAHLER_GRID_TARGET: f64 = 1e-9;

/// Most doublings attempted for a Mahler quadrature grid.
pub const MAHLER_MAX_DOUBLINGS: u32 = 12;

/// `tau_eval` for a sequence of length `n`.
pub fn tau_eval(n: usize) -> f64 {
    EVAL_REL * n as f64
}

/// `tau_amb` for a sequence of length `n`.
pub fn tau_ambiguity(n: usize) -> f64 {
    AMBIGUITY_REL * n as f64
}
