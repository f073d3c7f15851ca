pub mod linalg;
pub mod mesh;
pub mod par;
pub mod schemes;
pub mod entropy;
pub mod solvers;
pub mod cli;
