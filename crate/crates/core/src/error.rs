use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(
        "lattice of {sites} sites is incommensurate with the unit cell of {cell} sites \
         (lcm of mosaic period and family cell); sites must be a multiple of {cell}"
    )]
    Incommensurate { sites: usize, cell: usize },

    #[error("modulation ratio {p}/{q} is not in lowest terms")]
    NotCoprime { p: u32, q: u32 },

    #[error("{0} requires an open-boundary chain")]
    RequiresObc(&'static str),

    #[error("beta must be nonzero")]
    ZeroBeta,

    #[error("QR iteration did not converge after {iterations} iterations; {unconverged} eigenvalues unresolved")]
    NoConvergence { iterations: usize, unconverged: usize },

    #[error("inverse iteration stagnated for eigenvalue {re}{im:+}i (residual {residual:e})")]
    Stagnation { re: f64, im: f64, residual: f64 },

    #[error("no diagonal gauge: hopping product on bond {bond} has the wrong sign or vanishes")]
    NoGauge { bond: usize },

    #[error("lattice is disconnected: hopping on bond {bond} of the unit cell vanishes")]
    Disconnected { bond: usize },

    #[error("no closed-form critical manifold for {0}")]
    UnsupportedFamily(String),

    #[error("reference energy {re}{im:+}i lies on the periodic spectrum (distance {distance:e})")]
    OnSpectrum { re: f64, im: f64, distance: f64 },

    #[error("winding number not stable after refining to {nk} momenta")]
    UnstableWinding { nk: usize },

    #[error("spectrum carries no eigenvectors")]
    MissingEigenvectors,

    #[error("zero vector has no localization")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unknown parameter `{0}` for this model family")]
    UnknownParam(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("corrupt eigenvector file: {0}")]
    Corrupt(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::Stagnation { .. }
                | Error::UnstableWinding { .. }
                | Error::OnSpectrum { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
