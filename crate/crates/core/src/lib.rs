//! Evaluation, optimization and self-testing certification for the 3-bit
//! prepare-and-measure random access code in which Alice and Bob share a
//! two-qubit state and Alice encodes with local unitaries.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`]: 2×2 / 4×4 complex matrices, Jacobi eigensolver, matrix
//!   sign, partial trace, Kronecker factorization.
//! * [`classical`]: exact classical bounds by exhaustive enumeration.
//! * [`game`]: strategies, success probabilities, the `M_y`/`N_y`
//!   observables and the optimal example strategy.
//! * [`seesaw`]: best responses and multistart seesaw optimization.
//! * [`certify`]: the named self-testing checks and the report type.
//! * [`schema`]: the strategy JSON format.
//!
//! ```
//! use pmrac::game::{canonical_strategy, success_direct};
//!
//! let s = canonical_strategy();
//! let optimum = 0.5 + 1.0 / 6f64.sqrt();
//! assert!((success_direct(&s) - optimum).abs() < 1e-12);
//! ```

pub mod certify;
pub mod classical;
mod error;
pub mod game;
pub mod linalg;
pub mod schema;
pub mod seesaw;

pub use error::{Error, Result};
pub use linalg::CMatrix;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linalg.md")]
    mod linalg {}
    #[doc = include_str!("../../../book/src/classical.md")]
    mod classical {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/seesaw.md")]
    mod seesaw {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
