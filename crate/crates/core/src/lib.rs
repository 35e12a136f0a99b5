// Negated comparisons are how the validators reject NaN along with
// out-of-range values; index loops mirror the tensor index notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod config;
pub mod iteration;
pub mod policy;
pub mod problem;
pub mod quadrature;
pub mod reference;
pub mod rng;
pub mod rollout;
pub mod selftest;
pub mod tensor_train;
