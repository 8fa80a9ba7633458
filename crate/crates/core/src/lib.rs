//! Multi-material topology and fiber-orientation optimization for 2D
//! plane-stress compliance problems, driven by anisotropic topological
//! derivatives and an extended level-set description of void, isotropic and
//! fiber-reinforced phases.

pub mod cli_io;
pub mod error;
pub mod fem2d;
pub mod optimizer;
pub mod oracle;
pub mod orientation;
pub mod tensor2d;
pub mod topoderiv;
pub mod xls;

pub use error::{Error, Result};
