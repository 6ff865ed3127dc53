//! Monte Carlo samplers for the four equivalent models, reproducible
//! parallel trial runners, and goodness-of-fit statistics.

pub mod fit;
pub mod geometric;
pub mod histogram;
pub mod parking;
pub mod patricia;

pub use fit::{goodness_of_fit, two_sample_test, FitReport, TRIAL_FLOOR};
pub use geometric::{geometric_distinct, urn_occupancy};
pub use histogram::{run_trials, trial_rng, SampleModel, TrialHistogram, TrialRng};
pub use parking::{park_direct, park_split, ParkingConfig, DEFAULT_ENUMERATION_THRESHOLD};
pub use patricia::{patricia_sample, patricia_trie, PatriciaSample, PatriciaTrie};
