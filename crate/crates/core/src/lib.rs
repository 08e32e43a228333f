pub mod cli;
pub mod corpus;
pub mod engine;
pub mod estimator;
pub mod exchange;
pub mod number;
pub mod reputation;
pub mod syntax;
pub mod testbed;
