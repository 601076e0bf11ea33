//! Exact, seed-deterministic laboratory for myopic exploration in finite
//! episodic MDPs.
//!
//! The crate models tabular episodic MDPs exactly (`mdp`), maps point
//! Q-estimates to exploration policies (`explore`), runs fitted Q-iteration
//! with those policies (`learner`), computes myopic exploration gaps and
//! radii together with every closed-form lower bound (`gap`), builds the
//! benchmark environments (`envs`), measures distributional and Bellman
//! Eluder dimensions by brute force (`eluder`), and drives reproducible
//! experiments with CSV/JSON artifacts (`harness`).

pub mod eluder;
pub mod envs;
pub mod error;
pub mod explore;
pub mod gap;
pub mod harness;
pub mod io;
pub mod learner;
pub mod mdp;
pub mod testing;
pub mod util;

pub use error::{Error, Result};
pub use explore::ExplorationMapping;
pub use mdp::{
    Episode, OccupancyTensor, QTable, RewardDist, RewardRangeMode, StochasticPolicy, TabularMdp,
};
