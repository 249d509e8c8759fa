//! Successively-regularized zero-forcing (SRZF) precoding for downlink
//! multi-user MIMO, five baseline precoders, analytical rate evaluation and
//! the Monte-Carlo experiments built on them.

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod power;
pub mod precoding;
pub mod rng;

pub use channel::{ChannelSet, CsiSet, Scenario};
pub use error::{Error, Result};
pub use numerics::ComplexMatrix;
pub use precoding::{PrecoderSet, RegularizationPlan, Scheme, StackedCsi};
