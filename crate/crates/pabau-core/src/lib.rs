//! Core analysis library: JVM class-file parsing, intra-procedural dataflow
//! patterns, binary feature extraction, and per-label binary classifiers.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO, file formats and
//! the command-line surface live in the companion `pabau` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classfile;
pub mod descriptor;
pub mod eval;
pub mod feature;
pub mod flow;
pub mod label;
pub mod learn;
pub mod lexicon;
pub mod rng;

pub use classfile::{parse_class, ClassModel, Instruction, InstructionKind, MethodModel};
pub use descriptor::{parse_method_descriptor, MethodDescriptor, TypeRef};
pub use feature::{build_catalog, Catalog, FeatureInstance, FeatureType, FeatureVector};
pub use flow::{analyze_flows, FlowFacts, Origin};
pub use label::Label;
pub use lexicon::Lexicon;
