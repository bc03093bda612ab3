use thiserror::Error;

#[derive(Debug, Error)]
pub enum MinentError {
    #[error("matrix is not Hermitian: max deviation {dev:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eig:.6e} below -{tol:.3e}")]
    NotPositive { min_eig: f64, tol: f64 },

    #[error("trace {trace:.12} differs from 1 beyond tolerance {tol:.3e}")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("vector norm {norm:.12} differs from 1 beyond tolerance {tol:.3e}")]
    NotUnitNorm { norm: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for {nfactors} tensor factors")]
    IndexOutOfRange { index: usize, nfactors: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("Renyi order must be non-negative, got {0}")]
    NegativeAlpha(f64),

    #[error("infeasible spectrum: \u{3bb}_max = {lambda_max:.6} > 1/{d} = {:.6}", 1.0 / *d as f64)]
    InfeasibleSpectrum { lambda_max: f64, d: usize },

    #[error("target diagonal is not majorized by the spectrum (partial sum {index}: {target_sum:.9} > {spectrum_sum:.9})")]
    NotMajorized { index: usize, target_sum: f64, spectrum_sum: f64 },

    #[error("infeasible pad: \u{3bb}_max = {lambda_max:.6} > 1/{d} = {:.6} (min-entropy below log2 {d})", 1.0 / *d as f64)]
    InfeasiblePad { lambda_max: f64, d: usize },

    #[error("no pair of orthogonal Latin squares of order {d} (orders 1, 2, 6 and d \u{2261} 2 mod 4 are obstructed); smallest supported order is {next_supported}, embedding overhead {overhead_bits:.6} bits of min-entropy")]
    UnsupportedOrder { d: usize, next_supported: usize, overhead_bits: f64 },

    #[error("infeasible SOR: S_min = {smin:.6} bits < required log2 {d} = {:.6} bits", (*d as f64).log2())]
    InfeasibleSor { smin: f64, d: usize },

    #[error("insufficient catalyst: S_min = {smin:.6} bits < required {required:.6} bits")]
    InsufficientCatalyst { smin: f64, required: f64 },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, MinentError>;

/// Numerical tolerances used by constructors and verifiers. All absolute.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Hermiticity check.
    pub herm: f64,
    /// Negative-eigenvalue slack before a state is rejected.
    pub psd: f64,
    /// Trace / norm deviation from 1.
    pub tr: f64,
    /// Matrix-equality assertions.
    pub eq: f64,
    /// Per-partial-sum slack in majorization comparisons.
    pub major: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-9, psd: 1e-9, tr: 1e-9, eq: 1e-10, major: 1e-9 }
    }
}

impl Tolerances {
    /// Uniform override: every field set to `t` except `eq`, which scales
    /// by the same factor relative to the defaults.
    pub fn uniform(t: f64) -> Self {
        Tolerances { herm: t, psd: t, tr: t, eq: t * 0.1, major: t }
    }
}

/// Eigenvalues below `RANK_EPS * dim` count as zero for rank decisions.
pub const RANK_EPS: f64 = 1e-12;

pub fn zero_threshold(dim: usize) -> f64 {
    RANK_EPS * dim as f64
}
