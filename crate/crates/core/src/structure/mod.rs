//! Structure search: state merges, edge deletions and the batch loop.

mod candidates;
mod delete;
mod learn;
mod merge;

pub use candidates::{enumerate_candidates, Pruning, StructureChange};
pub use delete::delete_edge;
pub use learn::{learn, Learned, SearchConfig, SearchEvent};
pub use merge::{merge_states, Changed};
