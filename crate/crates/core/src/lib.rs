//! Random versus distributed delays in linear delay differential equations.

// `!(a > b)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compare;
pub mod dde_solver;
pub mod delay_model;
pub mod distributed;
pub mod ensemble;
pub mod eval;
pub mod history;
pub mod poly;
pub mod polyexact;
pub mod quadrature;
pub mod rng;
