use alloc::boxed::Box;
use alloc::string::String;

use crate::bounds::GoodnessCertificate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("column {column} of the sensing matrix is zero")]
    ZeroColumn { column: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("{what} has size {size}, above the configured limit {limit}")]
    TooLarge {
        what: &'static str,
        size: u64,
        limit: u64,
    },

    #[error("matrix does not have full row rank")]
    RankDeficient,

    #[error("image of the unit l1-ball does not contain a ball around the origin")]
    DegenerateImageBall,

    #[error("linear program reported {status:?}: {context}")]
    Solver {
        status: crate::lp::LpStatus,
        context: String,
    },

    /// A certification loop stopped early; `best` is the strongest certificate
    /// obtained before `cause` occurred.
    #[error("stopped early ({cause}); best certificate so far: s = {}", best.s_certified)]
    Interrupted {
        best: Box<GoodnessCertificate>,
        cause: Box<Error>,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
