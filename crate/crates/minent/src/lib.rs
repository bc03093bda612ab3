pub mod error;
pub mod instrument;
pub mod json;
pub mod linalg;
pub mod masking;
pub mod pst;
pub mod dephasing;
pub mod entropy;
pub mod state;
pub mod transition;
