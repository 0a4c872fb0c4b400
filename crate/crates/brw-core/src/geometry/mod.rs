//! Lazy generators for the graph families and their named subsets.

pub mod comb;
pub mod sets;
pub mod tree;
pub mod variants;

pub use comb::{add_loop, Comb, CombVertex, Looped, Singleton, Star};
pub use sets::{ColSet, CombSet, IndexSet, TargetSet, TreeSet};
pub use tree::{canonical_automorphism, RegularTree, TreeAutomorphism, TreeVertex};
pub use variants::{BVertex, HalfCombB, LineVertex, SplitComb, SplitVertex, VLine};
