pub mod corpus;
pub mod evaluate;
pub mod frames;
pub mod generate;
pub mod synth;
pub mod validate;
