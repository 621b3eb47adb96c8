//! Thermodynamic formalism on subshifts of finite type.

// NaN must fail the range checks, and index loops read better for the dense tables.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod graph;
pub mod ifs;
pub mod massdist;
pub mod potential;
pub mod sft;
pub mod thermo;
pub mod wordsets;

pub use error::{Error, Result};
pub use graph::EdgeGraph;
pub use ifs::{AffineIfs, AffineMap, CdfModel};
pub use massdist::{MassDistribution, MassOptions};
pub use potential::{Potential, WordSumBounds};
pub use sft::{BlockRecoding, InfixSet, Sft, Word};
pub use thermo::{GibbsChain, QAlpha, RatioSystem, SpectrumPoint};
