//! Maximum-likelihood decoding with unknown channel taps.

mod exhaustive;
mod path;
mod search;
mod weights;

pub use exhaustive::{
    decode_exhaustive, metric_outer_product, metric_projection, metric_trace, ExhaustiveResult,
};
pub use path::{batch_metric, g_extend, g_increment, heuristic_h2, recursive_metric, PathState};
pub use search::{
    decode, decode_priority, decode_priority_fast, Decoded, Heuristic, SearchOptions, TraceRow,
    DEFAULT_STACK_CAP,
};
pub use weights::{compute_weights, DecoderWeights};
