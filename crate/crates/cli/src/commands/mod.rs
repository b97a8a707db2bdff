pub mod blowup;
pub mod characteristics;
pub mod eval;
pub mod limit;
pub mod mc;
pub mod regime;
pub mod sweep;
pub mod validate;
