use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid subgroup representation: {0}")]
    InvalidSubgroup(String),

    #[error("duality is only defined over Z_m^n (got exponent k = {0})")]
    PerpRequiresPrimeLevel(u32),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("relation lattice has an infinite quotient (zero invariant factor)")]
    InfiniteQuotient,

    #[error("root order {order} is not a multiple of {required}")]
    RootOrder { order: u32, required: u32 },

    #[error("register error: {0}")]
    Register(String),

    #[error("classical map is not a bijection: two labels collide at {0}")]
    NotBijection(String),

    #[error("state support exceeds the hard limit of {0} labels")]
    StateTooLarge(usize),

    #[error("outcome mass is not a rational number")]
    IrrationalMass,

    #[error("measurement outcome is not confined to the announced class")]
    NotConfined,

    #[error("state does not factor across the requested partition")]
    NotProduct,

    #[error("promise violated: {0}")]
    Promise(String),

    #[error("group error: {0}")]
    Group(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
