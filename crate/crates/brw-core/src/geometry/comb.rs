//! The 2-dimensional comb: axis {(x,0) : x in Z} with a vertical tooth above
//! every axis vertex. Rates: 1 on horizontal edges and every downward edge,
//! alpha leaving the axis upward, alpha+1 upward within a tooth.
//!
//! The comb with alpha = m-2 is also the quotient of T_m by the automorphisms
//! fixing the spine pointwise (spine -> axis, branch depth -> tooth height),
//! which is what makes large-radius tree solves tractable.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::RateGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombVertex {
    pub x: i64,
    pub y: u32,
}

impl CombVertex {
    pub fn new(x: i64, y: u32) -> Self {
        CombVertex { x, y }
    }

    pub fn origin() -> Self {
        CombVertex { x: 0, y: 0 }
    }
}

impl fmt::Display for CombVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl FromStr for CombVertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("bad comb vertex label: {s}"));
        let inner = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (xs, ys) = inner.split_once(',').ok_or_else(bad)?;
        Ok(CombVertex {
            x: xs.parse().map_err(|_| bad())?,
            y: ys.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Comb {
    pub alpha: u32,
    lambda: f64,
    /// Self-loop rate at the origin (0 for the plain comb); carries the
    /// tree-with-loop quotient.
    pub loop_rate: f64,
}

impl Comb {
    pub fn new(alpha: u32, lambda: f64) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidParam(format!("alpha = {alpha} must be >= 1")));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam(format!("lambda = {lambda} must be > 0")));
        }
        Ok(Comb {
            alpha,
            lambda,
            loop_rate: 0.0,
        })
    }

    pub fn with_loop_at_origin(mut self, rate: f64) -> Result<Self> {
        if rate < 0.0 {
            return Err(Error::InvalidParam(format!("loop rate {rate} < 0")));
        }
        self.loop_rate += rate;
        Ok(self)
    }
}

impl RateGraph for Comb {
    type V = CombVertex;

    fn root(&self) -> CombVertex {
        CombVertex::origin()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rates(&self, v: &CombVertex) -> Vec<(CombVertex, f64)> {
        let a = self.alpha as f64;
        let mut out = Vec::with_capacity(4);
        if v.y == 0 {
            out.push((CombVertex::new(v.x - 1, 0), 1.0));
            out.push((CombVertex::new(v.x + 1, 0), 1.0));
            out.push((CombVertex::new(v.x, 1), a));
            if v.x == 0 && self.loop_rate > 0.0 {
                out.push((*v, self.loop_rate));
            }
        } else {
            out.push((CombVertex::new(v.x, v.y - 1), 1.0));
            out.push((CombVertex::new(v.x, v.y + 1), a + 1.0));
        }
        out
    }

    fn family(&self) -> String {
        if self.loop_rate > 0.0 {
            format!("comb({})+loop", self.alpha)
        } else {
            format!("comb({})", self.alpha)
        }
    }

    fn root_distance(&self, v: &CombVertex) -> Option<u64> {
        Some(v.x.unsigned_abs() + v.y as u64)
    }
}

/// Adds a self-loop of the given rate at one vertex of any graph.
#[derive(Debug, Clone)]
pub struct Looped<G: RateGraph> {
    pub inner: G,
    pub at: G::V,
    pub rate: f64,
}

pub fn add_loop<G: RateGraph>(inner: G, at: G::V, rate: f64) -> Result<Looped<G>> {
    if rate < 0.0 {
        return Err(Error::InvalidParam(format!("loop rate {rate} < 0")));
    }
    Ok(Looped { inner, at, rate })
}

impl<G: RateGraph> RateGraph for Looped<G> {
    type V = G::V;

    fn root(&self) -> G::V {
        self.inner.root()
    }

    fn lambda(&self) -> f64 {
        self.inner.lambda()
    }

    fn rates(&self, v: &G::V) -> Vec<(G::V, f64)> {
        let mut out = self.inner.rates(v);
        if self.rate > 0.0 && *v == self.at {
            out.push((v.clone(), self.rate));
        }
        out
    }

    fn family(&self) -> String {
        if self.rate > 0.0 {
            format!("{}+loop", self.inner.family())
        } else {
            self.inner.family()
        }
    }
}

/// BRW on a single vertex with a self-loop: the projection target of any
/// constant-row-sum graph.
#[derive(Debug, Clone)]
pub struct Singleton {
    pub rate: f64,
    lambda: f64,
}

impl Singleton {
    pub fn new(rate: f64, lambda: f64) -> Self {
        Singleton { rate, lambda }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Star;

impl fmt::Display for Star {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "*")
    }
}

impl RateGraph for Singleton {
    type V = Star;

    fn root(&self) -> Star {
        Star
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rates(&self, _v: &Star) -> Vec<(Star, f64)> {
        vec![(Star, self.rate)]
    }

    fn family(&self) -> String {
        format!("singleton({})", self.rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn alpha_zero_rejected() {
        assert!(Comb::new(0, 0.35).is_err());
    }

    #[test]
    fn axis_and_tooth_rates() {
        let c = Comb::new(1, 0.35).unwrap();
        // total rate at an axis vertex: 1 + 1 + alpha
        let tot: f64 = c.rates(&CombVertex::new(3, 0)).iter().map(|(_, k)| k).sum();
        assert_eq!(tot, 3.0);
        // total rate at (x, y >= 1): alpha + 2
        let tot: f64 = c.rates(&CombVertex::new(-2, 4)).iter().map(|(_, k)| k).sum();
        assert_eq!(tot, 3.0);
        // leaving the axis upward: alpha; within a tooth upward: alpha + 1
        let up = c
            .rates(&CombVertex::new(5, 0))
            .into_iter()
            .find(|(v, _)| v.y == 1)
            .unwrap()
            .1;
        assert_eq!(up, 1.0);
        let up = c
            .rates(&CombVertex::new(5, 2))
            .into_iter()
            .find(|(v, _)| v.y == 3)
            .unwrap()
            .1;
        assert_eq!(up, 2.0);
    }

    #[test]
    fn adjacency_symmetric_rates_may_differ() {
        let c = Comb::new(2, 0.3).unwrap();
        let mut rng = SplitMix64::new(8);
        for _ in 0..300 {
            let v = CombVertex::new(rng.next_usize(21) as i64 - 10, rng.next_usize(6) as u32);
            for (w, k) in c.rates(&v) {
                assert!(k > 0.0);
                assert!(c.rates(&w).iter().any(|(u, kk)| *u == v && *kk > 0.0));
            }
        }
    }

    #[test]
    fn loop_changes_only_origin() {
        let c = Comb::new(1, 0.35).unwrap().with_loop_at_origin(2.5).unwrap();
        let tot: f64 = c.rates(&CombVertex::origin()).iter().map(|(_, k)| k).sum();
        assert_eq!(tot, 3.0 + 2.5);
        let tot: f64 = c.rates(&CombVertex::new(1, 0)).iter().map(|(_, k)| k).sum();
        assert_eq!(tot, 3.0);
    }

    #[test]
    fn generic_loop_wrapper() {
        use crate::geometry::tree::{RegularTree, TreeVertex};
        let t = RegularTree::new(3, 0.35).unwrap();
        let g = add_loop(t, TreeVertex::root(), 0.0).unwrap();
        assert_eq!(g.rates(&TreeVertex::root()).len(), 3); // rate 0 leaves it unchanged
        let g = add_loop(g.inner, TreeVertex::root(), 4.0).unwrap();
        let tot: f64 = g.rates(&TreeVertex::root()).iter().map(|(_, k)| k).sum();
        assert_eq!(tot, 3.0 + 4.0);
    }

    #[test]
    fn comb_label_round_trip() {
        let mut rng = SplitMix64::new(12);
        for _ in 0..10_000 {
            let v = CombVertex::new(rng.next_usize(4001) as i64 - 2000, rng.next_usize(2000) as u32);
            let back: CombVertex = v.to_string().parse().unwrap();
            assert_eq!(back, v);
        }
    }
}
