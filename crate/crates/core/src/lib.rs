//! Information-theoretically secure summation over prime fields.
//!
//! `K` users each hold a private vector `W_k` over `F_q` and send one message `X_k`
//! to a server, which must recover `W_1 + ... + W_K` and nothing more, even when it
//! colludes with some users. The crate builds schemes for coded keys and for
//! groupwise keys (symmetric or on an arbitrary key hypergraph), runs them, and
//! audits them: rank certificates, exact brute-force mutual information, and
//! achieved rates against the optimal region.

pub mod audit;
pub mod field;
pub mod harness;
pub mod hypergraph;
pub mod linalg;
pub mod schemes;
pub mod stream;

pub use field::{FieldElement, FieldError, FieldSpec};
pub use hypergraph::{feasibility, CollusionFamily, FeasibilityVerdict, KeyHypergraph, UserSet};
pub use linalg::{FieldMatrix, FieldVector};
pub use schemes::{decode_sum, KeyRealization, Scheme, SchemeError, SchemeKind, SchemeParams};
pub use stream::RandomStream;
