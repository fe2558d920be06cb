//! Noncommutative Schur–Agler interpolation at finite matrix scale.
//!
//! Points are `d`-tuples of square complex matrices ([`MatrixTuple`]); nc
//! polynomials ([`NcPoly`]) are evaluated with the layout
//! `Q(Z) = Σ Q_w ⊗ Z^w`, so block `(i, j)` of size `n × n` of `Q(Z)` is
//! `Σ (Q_w)_{ij} Z^w`. Every matrix-valued quantity in the crate (kernel
//! values, transfer-function values, interpolation data, amplified colligation
//! blocks) uses the same "coefficient index outer, point index inner"
//! convention, so no reindexing is needed between modules.
//!
//! The main entry points are:
//!
//! * [`kernel`]: the generalized Szegő kernel `k_Q0`, de Branges–Rovnyak
//!   kernels, Choi matrices and PSD certificates;
//! * [`interpolation`]: Pick, LTOA and Stein-dominance certificates and the
//!   end-to-end [`interpolation::solve_pick`] pipeline;
//! * [`realization`]: colligations, transfer functions and the
//!   lurking-isometry synthesis;
//! * [`envelope`]: nc envelopes, intertwiner witnesses and the single-variable
//!   nc-Zariski closure;
//! * [`okaweil`]: polynomial truncations of realized functions.

pub mod envelope;
pub mod error;
pub mod interpolation;
pub mod json;
pub mod kernel;
pub mod linalg;
pub mod okaweil;
pub mod poly;
pub mod realization;
pub mod tuple;
pub mod word;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use poly::NcPoly;
pub use tuple::MatrixTuple;
pub use word::Word;
