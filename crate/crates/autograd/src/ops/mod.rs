pub mod binary;
pub mod composite;
pub mod conv;
pub mod matmul;
pub mod norm;
pub mod reduce;
pub mod shape_ops;
pub mod unary;
