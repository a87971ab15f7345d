//! Scheduling model for a renewable-powered ammonia plant with molten-salt
//! thermal storage.

// Negated comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod params;
pub mod harness;
pub mod igdt;
pub mod milp;
pub mod sched;
pub mod thermal;
