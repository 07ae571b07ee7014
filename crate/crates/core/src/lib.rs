//! Locally repairable codes: finite fields, Reed-Solomon, the RS + XOR
//! construction with locality r, distance bounds, exhaustive verifiers, the
//! information flow graph behind the bound, and a file-backed storage
//! simulator.

pub mod bounds;
pub mod field;
pub mod flownet;
pub mod lrc;
pub mod rs;
pub mod storesim;
pub mod verifier;

pub use bounds::{distance_bound, effective_rate, scalar_bound, witness_search, BoundQuery};
pub use field::{Elem, Field, Matrix};
pub use flownet::{build_flownet, lemma2_capacity, min_cut_all_dcs, rlnc_verify, FlowNet};
pub use lrc::{build_layout, CodeParams, Lrc, NodeContent};
pub use rs::RsCode;
pub use verifier::{certify, exact_distance, exact_locality, GeneratorView};
