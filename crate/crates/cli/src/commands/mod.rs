pub mod eval;
pub mod fmm;
pub mod transform;
pub mod verify_ops;
