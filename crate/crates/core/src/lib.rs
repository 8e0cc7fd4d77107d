//! Family-based CTL model checking of featured transition systems.
//!
//! A featured transition system (FTS) describes a whole product line of
//! transition systems at once: every transition carries a presence condition
//! over features. This crate checks CTL properties on such families either
//! one variant at a time or on a reduced abstract family built with
//! variability abstractions and read as a modal transition system.

pub mod bundled;
pub mod checker;
pub mod dsl;
pub mod exec;
pub mod featexpr;
pub mod galois;
pub mod gen;
pub mod models;
pub mod selftest;
pub mod synth;

pub use checker::{
    check_family_abstract, check_fts_brute_force, check_ts, CheckError, CheckOptions, Ctl,
    FamilyReport, Verdict, VerdictKind,
};
pub use dsl::{parse_model, parse_property, print_model, DslError, ModelDocument};
pub use exec::{with_thread_pool, Exec};
pub use featexpr::{parse_feat_expr, Config, ConfigSpace, FeatError, FeatExpr};
pub use galois::{AbstractSpace, Abstraction, GaloisError};
pub use models::{
    Diagnostic, FeaturedTransition, Fts, Mfts, ModelError, Mts, Path, Severity, Skeleton,
    Transition, Ts, Validate, STUTTER,
};
