//! Color image and video denoising with green-guided nonlocal grouping and
//! t-SVD transforms over an RGGB tube representation.

pub mod cli;
pub mod codec;
pub mod config;
pub mod denoise;
pub mod error;
pub mod harness;
pub mod image;
pub mod metrics;
pub mod rggb;
pub mod search;
pub mod synth;
pub mod talg;

pub use config::DenoiseConfig;
pub use error::{Error, Result};
pub use image::{Image, VideoSequence};
