//! Lazy random walks: step measure, convolution powers, loop samplers and
//! heat-kernel checks.

pub mod heat;
pub mod measure;
pub mod sampler;
pub mod table;

pub use heat::{hat_p, hsc_check, HscOptions, HscReport};
pub use measure::{step_measure, StepMeasure};
pub use sampler::{
    sample_lazy_word, sample_loop_bridge, sample_loop_rejection, substream, LoopSample,
    LoopSampler, SampleMethod, SamplerKind,
};
pub use table::{exact_tables, return_tables, ExactTable, ProbabilityTable, TableOptions};
