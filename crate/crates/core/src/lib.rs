pub mod area;
pub mod bulletin;
pub mod categorical;
pub mod corpus;
pub mod eval;
pub mod generator;
pub mod grid;
pub mod overlay;
pub mod synthetic;
