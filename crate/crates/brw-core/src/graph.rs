//! Graph abstraction: sparse nonnegative rates over a lazily enumerable
//! vertex set, plus the breeding intensity lambda.

use std::fmt::{Debug, Display};
use std::hash::Hash;

pub trait Vertex: Clone + Eq + Hash + Ord + Debug + Display + Send + Sync + 'static {}
impl<T: Clone + Eq + Hash + Ord + Debug + Display + Send + Sync + 'static> Vertex for T {}

/// A continuous-time edge-breeding BRW model: unit-rate deaths, birth clocks
/// of rate `lambda * k_xy` on each ordered pair. Neighbors are computed from
/// vertex labels, so infinite graphs are fine; only finitely many neighbors
/// per vertex. Rates must be exactly representable f64 values (integers and
/// dyadics), which keeps the projection identity checks exact.
pub trait RateGraph: Send + Sync {
    type V: Vertex;

    fn root(&self) -> Self::V;

    fn lambda(&self) -> f64;

    /// Outgoing rates k_xy, in a deterministic order.
    fn rates(&self, v: &Self::V) -> Vec<(Self::V, f64)>;

    fn family(&self) -> String;

    /// Total rate k_x.
    fn total_rate(&self, v: &Self::V) -> f64 {
        self.rates(v).iter().map(|(_, k)| *k).sum()
    }

    /// Graph distance from the root when the labels encode it; lets the
    /// simulator enforce its radius cap without a search.
    fn root_distance(&self, _v: &Self::V) -> Option<u64> {
        None
    }
}
