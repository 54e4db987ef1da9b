//! Elastic channel wall over the porous layer: fluid-structure interaction
//! with contact and release through seepage.
//!
//! The bulk solid is reduced to a generalized-string wall carrying the
//! vertical displacement `eta`; the fluid mesh follows the wall column by
//! column. Contact is nodal, with the multiplier `lambda >= 0` (contact
//! pressure) and the complementarity
//! `lambda = gamma_c [ (d_n - g) + lambda / gamma_c ]_+`.

mod channel;
mod contact;
mod wall;

pub use channel::{
    fsi_energy, layer_flux, min_gap, run_channel, step_coupled, ChannelFsi, ChannelSample, FsiEnergy, Regime,
    StepReport,
};
pub use contact::{
    active_set, assemble_contact_rows, contact_point, sigma_p, solve_wall_obstacle, ContactPoint, ContactState,
};
pub use wall::{add_wall_load, assemble_wall, WallModel};
