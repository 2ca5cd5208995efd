//! Evaluation protocols: multi-label node classification, link prediction
//! and decoding-accuracy sweeps.

mod classify;
mod linkpred;
mod logistic;
mod split;
mod sweep;

use std::io::Write;

pub use classify::{train_ovr_classifier, ClassifyReport};
pub use linkpred::{link_prediction, remove_links, sample_non_links, Holdout, LinkReport};
pub use logistic::{BinaryLogistic, OneVsRest, Standardizer, L2_GRID};
pub use split::{Split, SplitSpec};
pub use sweep::{
    decoding_sweep, monotonicity_violations, random_table, write_sweep_csv, DecodeExperiment, SequenceMode, SweepCell,
    TableSource,
};

/// Writes `split,error` rows.
pub fn write_error_csv<W: Write>(mut w: W, rows: &[(&str, f64)]) -> std::io::Result<()> {
    writeln!(w, "split,error")?;
    for (split, err) in rows {
        writeln!(w, "{split},{err:.6}")?;
    }
    w.flush()
}
