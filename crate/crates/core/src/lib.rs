//! Node embeddings learned jointly from graph structure and per-node text,
//! and fixed-size vectors for ordered node sequences.
//!
//! The pipeline: load a [`Graph`] with [`NodeDocs`], build a [`Vocab`], train a
//! [`SenseModel`] with [`train`], export unit node vectors into an
//! [`EmbeddingTable`], then [`encode`] node sequences into a single
//! [`SequenceVector`] and [`decode`] them back.

pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod seq;
pub mod synth;
pub mod theory;
pub mod train;
pub mod vocab;

pub use error::{Error, Result};
pub use graph::{Graph, LabelSet, NodeDocs};
pub use linalg::Matrix;
pub use model::{PairGradients, SenseModel, StepRates, Variant};
pub use sampler::{PairKind, SampleConfig, Target, TrainMode, TrainingPair, WalkConfig};
pub use seq::{cyclic_shift, decode, decode_position, encode, encode_ids, score, EmbeddingTable, SequenceVector};
pub use theory::{independent_dot_stats, random_unit_vector, shifted_dot_stats, ConditioningFrame, SampleStats};
pub use train::{train, TrainConfig, TrainReport};
pub use vocab::{EncodedDocs, NoiseTable, Vocab};
