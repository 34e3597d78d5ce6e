use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unusable discretization: {0}")]
    InvalidDiscretization(String),

    #[error("Kähler positivity fails: Φ''(t) = {value:e} at t = {t}")]
    NotPositive { t: f64, value: f64 },

    #[error("tabulated perturbation rejected: {0}")]
    NonSmooth(String),

    #[error("perturbation does not decay at the window boundary: {0}")]
    NoDecay(String),

    #[error("grid function does not live on this potential's quadrature nodes")]
    NodeMismatch,

    #[error("grid function `{name}` lacks derivatives of order {needed}")]
    InsufficientSmoothness { name: String, needed: usize },

    #[error("non-finite values in `{0}`")]
    NonFinite(String),

    #[error("level m = {0} outside the supported range 1..=200")]
    LevelOutOfRange(usize),

    #[error("quadrature too coarse for level m = {level}: relative error {error:e}; use grid_size >= {required_grid_size}")]
    QuadratureTooCoarse {
        level: usize,
        error: f64,
        required_grid_size: usize,
    },

    #[error("C_ξ has a pole at ξ = 0; got ξ = {0}")]
    NonPositiveXi(f64),

    #[error("weight scaling |y|·m = {0} exceeds the floating range")]
    WeightOverflow(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("direction is not mean-zero: ∫ψ dμ = {0:e}")]
    NotMeanZero(f64),

    #[error("singular Jacobian on the gauge-fixed subspace (σ_min = {sigma_min:e}); kernel direction: {direction}")]
    SingularJacobian { sigma_min: f64, direction: String },

    #[error("root bracket failure: {0}")]
    BracketFailure(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid partition profile: {0}")]
    InvalidProfile(String),

    #[error("|Im ξ| = {0} exceeds the supported bound 50")]
    ImaginaryPartTooLarge(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
