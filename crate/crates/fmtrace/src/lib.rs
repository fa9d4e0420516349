//! Numerical operator calculus on the flat 2-torus model.

pub mod cutoffs;
pub mod error;
pub mod fio;
pub mod fm_apply;
pub mod geometry;
pub mod grid;
pub mod localization;
pub mod mellin;
pub mod reduction;
pub mod registry;
pub mod report;
pub mod sphere;
pub mod symbol;
pub mod trace;
