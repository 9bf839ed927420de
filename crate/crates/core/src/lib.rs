//! Semantic decoding of visual stimuli from fMRI trial patterns.
//!
//! Voxel runs are normalised and window-averaged into trials ([`dataio`]), a
//! ridge map projects trials into a CNN latent space ([`ridge`]), predicted
//! features are re-standardised to the training distribution ([`adapt`]),
//! classified by nearest-neighbour vote over a labelled feature database
//! ([`latent_index`]) and scored with Wu-Palmer similarity over a hypernym
//! taxonomy ([`taxonomy`]). [`pipeline`] ties the stages together.

pub mod adapt;
pub mod dataio;
pub mod error;
pub mod latent_index;
pub mod pipeline;
pub mod ridge;
pub mod taxonomy;

pub use error::{Error, Result};
