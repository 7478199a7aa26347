//! Solver, synthesizer and verifier for finite-action multiplayer Blackwell
//! games whose objectives are tail functions of the play.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: games, objectives, eventually periodic plays, mixed actions and
//!   strategy automata, with exact payoff evaluation on periodic plays.
//! - [`stage`]: one-shot minmax values and punishments (zero-sum LP for two
//!   players, certified brackets beyond).
//! - [`values`]: Blackwell minmax values per objective family, closed/open
//!   approximations, clopen truncations and the common-play search.
//! - [`equilibrium`]: grim-trigger automata, jointly controlled lotteries,
//!   payoff polytopes and folk-theorem targets.
//! - [`verify`]: exact Markov-chain evaluation of automata, best-response
//!   deviation search and seeded Monte Carlo.

pub mod equilibrium;
pub mod error;
pub mod exact;
pub mod lp;
pub mod model;
pub mod stage;
pub mod values;
pub mod verify;

pub use error::{Error, Result};
pub use exact::Rational;
