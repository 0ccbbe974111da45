pub mod chain_tree;
pub mod cli;
pub mod cuttings;
pub mod error;
pub mod face;
pub mod face_query;
pub mod geom;
pub mod hulls;
pub mod many_faces;
pub mod oracle;
pub mod region;
pub mod segment_oracle;

pub use error::{Error, Result};
