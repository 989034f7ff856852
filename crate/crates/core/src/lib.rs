pub mod dsl;
pub mod engine;
pub mod moments;
pub mod poly;
pub mod corpus;
pub mod specfun;
pub mod estimate;
pub mod gof;
pub mod pipeline;
