//! Equivariant transformation monoids of finite G-sets.
//!
//! The crate builds finite groups and G-sets, enumerates the monoid
//! `End_G(X)` of equivariant self-maps, computes its Green's relations
//! (L, R, H, D, J) with eggbox layouts, and detects and constructs
//! elementary collapsings. [`verify`] checks the structural properties of
//! these objects as executable checks over seeded corpora of G-sets.

pub mod cli;
pub mod collapsing;
pub mod endo;
pub mod fixtures;
pub mod green;
pub mod group;
pub mod gset;
pub mod io;
pub mod verify;

pub use endo::{EquivMap, KernelPartition};
pub use group::{Group, GroupSpec, Subgroup, SubgroupClass};
pub use gset::GSet;
