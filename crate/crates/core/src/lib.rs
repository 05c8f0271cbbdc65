//! Approach-sensitive retina model for detecting looming objects in video.
//!
//! Frames pass through photoreceptors, ON/OFF bipolar channels with a
//! leaky-integrator cascade, a Gabor motion-energy bank and a push-pull
//! approach pathway. Attention masks gate the fused response into a single
//! membrane value per frame, which drives spike counts and a collision
//! warning. Attended pixels are clustered into targets.
//!
//! ```
//! use looming::{default_params, Pipeline, PipelineOptions, Scenario};
//!
//! let frames = Scenario::looming_disk().generate().unwrap().frames;
//! let mut pipe = Pipeline::new(default_params(), PipelineOptions::default()).unwrap();
//! let reports = pipe
//!     .run(frames.iter().take(3).map(looming::normalize).collect::<Vec<_>>().iter())
//!     .unwrap();
//! assert_eq!(reports.len(), 2);
//! ```

pub mod approach;
pub mod detection;
pub mod direction;
pub mod error;
pub mod field;
pub mod io;
pub mod kernels;
pub mod params;
pub mod pipeline;
pub mod retina;
pub mod stimuli;
pub mod temporal;

pub use detection::TargetEstimate;
pub use error::{Error, Result};
pub use field::Field;
pub use params::{default_params, ChannelWeights, ModelParams, SpikeParams};
pub use pipeline::{normalize, FrameReport, Pipeline, PipelineOptions};
pub use stimuli::{Direction, Scenario, ScenarioKind};
