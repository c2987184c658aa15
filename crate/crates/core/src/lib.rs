//! Maximum agreement forests of rooted and unrooted multifurcating trees.
//!
//! The crate provides an exact parameterized solver ([`fpt`]), ratio-3 and
//! ratio-4 approximations ([`approx`]), a brute-force reference solver for
//! small inputs ([`oracle`]), Reduction Rule 1 ([`reduction`]), Newick I/O
//! ([`newick`]) and a random instance generator ([`datagen`]).
//!
//! ```
//! use maf_core::{fpt, newick};
//!
//! let inst = newick::parse_instance("((a,b),c);\n((a,c),b);", true).unwrap();
//! let (order, af) = fpt::find_min_k(&inst, 1, inst.taxa() + 1).unwrap();
//! assert_eq!(order, 2);
//! assert!(af.verify(&inst).unwrap());
//! ```

pub mod approx;
pub mod datagen;
pub mod forest;
pub mod fpt;
pub mod instance;
pub mod label;
pub mod newick;
pub mod oracle;
pub mod reduction;

pub use forest::{is_subforest, EdgeId, EdgeSet, EdgeSplit, Forest, ForestBuilder, ForestError, SiblingSet, VertexId};
pub use instance::{AgreementForest, Instance, InstanceError};
pub use label::{LabelId, LabelSet, LabelTable, ROOT_NAME};
