//! Stochastic-order conditions and pathwise-ordered couplings for
//! one-dimensional processes with independent increments (PIIs).
//!
//! A process is described by its characteristic triplet: a drift `B`, a
//! Gaussian variance function `C` and a jump compensator
//! `nu(dt, dx) = K(t, dx) dA_t`, plus an optional schedule of jumps at fixed
//! times. On top of that model the crate provides
//!
//! * deterministic checkers for the monotone (`st`, `pst`), convex (`cx`) and
//!   increasing-convex (`icx`) orders ([`order`]),
//! * coupling samplers that realise ordered pairs path by path
//!   ([`ito`], [`cut`], [`convex`]),
//! * Monte-Carlo and exact oracles used to audit both ([`verify`]).
//!
//! The crate is `no_std` and only needs `alloc`. Randomness is derived from a
//! single `u64` seed through counter-based streams ([`rng`]), so every path
//! can be produced independently and in any order.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod characteristics;
pub mod convex;
pub mod cut;
pub mod direct;
pub mod error;
pub mod ito;
pub mod kernel;
pub mod numeric;
pub mod order;
pub mod paths;
pub mod rng;
pub mod verify;

pub use characteristics::{
    FixedJump, FixedJumpSchedule, PiecewiseLinear, PiiCharacteristics, TimeMeasure,
    TruncationFunction, TruncationKind,
};
pub use error::{Error, Result};
pub use kernel::{CgmyParams, JumpKernel, JumpLaw, LevyMeasure, TailTable};
pub use order::{CutPoint, CutSide, Grid, OrderKind, OrderReport, TruncationLadder, Verdict};
pub use paths::{CoupledPathSet, PairSampler};
pub use verify::{FamilyClass, MCResult, Plf, TestFunctionFamily};
