//! Ideals on ω: a symbolic set language, a catalog of definable ideals with
//! three-valued membership, almost disjoint refinements, a finite forcing
//! engine, mixing constructions and reduction maps.

pub mod adfam;
pub mod catalog;
pub mod coding;
pub mod error;
pub mod forcing;
pub mod function;
pub mod meager;
pub mod mixing;
pub mod natset;
pub mod parse;
pub mod partition;
pub mod periodic;
pub mod rado;
pub mod reduce;
pub mod verdict;
pub mod weight;

pub use coding::{Coding, CodedObject};
pub use error::{Error, Result};
pub use natset::{FnExpr, PredFile, SetExpr};
pub use partition::{BoundaryRule, Partition, PartitionKind};
pub use periodic::Periodic;
pub use rado::HomKind;
pub use weight::WeightFn;
pub use function::{FunctionWindow, MapExpr};
pub use verdict::{Answer, Verdict};
