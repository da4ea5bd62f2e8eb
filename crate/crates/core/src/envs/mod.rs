//! Concrete environments.
//!
//! - [`LinearContraction`]: scalar geometric maps with per-arm fixed points;
//!   the workhorse for unit tests and calibration runs.
//! - [`SisEnvironment`]: networked SIS epidemic under per-action contact
//!   matrices and infection rates, driven by Euler discretization.
//! - [`GameEnvironment`]: resource-allocation game among gradient-playing
//!   players; the agent's action selects each player's allowed resources.
//! - [`UcbBreaker`] and [`LowerBoundPair`]: hand-built two-arm instances on
//!   which classic index policies fail, used by baseline-failure tests only.

mod game;
mod linear;
mod sis;
mod synthetic;

pub use game::{
    build_desk_game, build_desk_game_with_sigma, build_paper_game, build_paper_game_with,
    gradient_play_contraction, GameConfig, GameEnvironment, PaperGameOptions,
};
pub use linear::{LinearArm, LinearContraction, LinearContractionBuilder};
pub use sis::{
    build_paper_sis, build_paper_sis_with, build_scalar_sis, PaperSisOptions, SisConfig,
    SisEnvironment,
};
pub use synthetic::{LowerBoundPair, UcbBreaker};
