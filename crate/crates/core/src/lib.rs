//! Pointwise Hardy inequalities on finite metric measure graphs.
//!
//! The crate works on connected weighted graphs with the shortest-path
//! metric and a positive vertex measure. It evaluates restricted maximal
//! functions, minimal line integrals over length-constrained curve families,
//! Poincaré and Hardy curve characterizations, the α-function, and the
//! self-improvement construction for pointwise Hardy inequalities.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod alpha;
pub mod certificate;
pub mod curves;
pub mod error;
pub mod exec;
pub mod field;
pub mod gen;
pub mod hardy;
pub mod maximal;
pub mod poincare;
pub mod rng;
pub mod sampling;
pub mod selfimprove;
pub mod space;

pub use certificate::{Certificate, PathWitness, EPS_NUM};
pub use error::{Error, Result};
pub use exec::Exec;
pub use field::Field;
pub use space::{Ball, Domain, Space, Vertex};
