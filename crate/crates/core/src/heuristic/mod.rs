//! Problem-independent pieces shared by the search engines: the bit-vector
//! solution encoding, neighbor generation, the cross-validation fitness and
//! the change-count schedule.

mod fitness;
mod mask;
mod rng;
mod schedule;

pub use fitness::{fitness, FitnessEvaluator};
pub use mask::{flip, flip_positions, generate_neighbor, FeatureMask};
pub use rng::RngStream;
pub use schedule::{change_count, ChangeSchedule};
