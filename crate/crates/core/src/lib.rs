//! λ-synchronizing subshifts: language oracles, canonical λ-graph systems,
//! K-groups and Bowen–Franks groups, and the symbol-expansion move.

pub mod alphabet;
pub mod catalog;
pub mod error;
pub mod flow;
pub mod graph;
pub mod intalg;
pub mod ktheory;
pub mod lgs;
pub(crate) mod machine;
pub mod md;
pub mod oracle;
pub mod spec;
pub mod sync;

pub use alphabet::{Alphabet, Sym, Word};
pub use error::{Error, Result};
pub use graph::{GraphEdge, GraphFile, LabeledGraph};
pub use spec::{Subshift, SubshiftSpec};
