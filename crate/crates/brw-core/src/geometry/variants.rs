//! Auxiliary graph families.
//!
//! - `VLine`: a single vertical tooth as a standalone graph (projection
//!   target of `HalfCombB`). Rates: up alpha from the base, up alpha+1
//!   above, down 1.
//! - `HalfCombB`: a one-ended comb with no tooth at its origin and origin
//!   edge rate alpha; projects onto `VLine` by graph distance from the
//!   origin. Used to compare a tooth against the rest of the comb.
//! - `SplitComb`: the comb with the tooth at column 0 split above height 1
//!   into two parallel shafts. This is the quotient of T_3 that keeps the
//!   two subtrees hanging under x_1 distinguishable, which the
//!   boundary-counterexample experiment needs.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::RateGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineVertex(pub u32);

impl fmt::Display for LineVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct VLine {
    pub alpha: u32,
    lambda: f64,
}

impl VLine {
    pub fn new(alpha: u32, lambda: f64) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidParam("alpha must be >= 1".into()));
        }
        Ok(VLine { alpha, lambda })
    }
}

impl RateGraph for VLine {
    type V = LineVertex;

    fn root(&self) -> LineVertex {
        LineVertex(0)
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rates(&self, v: &LineVertex) -> Vec<(LineVertex, f64)> {
        let a = self.alpha as f64;
        match v.0 {
            0 => vec![(LineVertex(1), a)],
            h => vec![(LineVertex(h - 1), 1.0), (LineVertex(h + 1), a + 1.0)],
        }
    }

    fn family(&self) -> String {
        format!("vline({})", self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BVertex {
    Origin,
    Axis(u32),          // x >= 1
    Tooth(u32, u32),    // (x >= 1, h >= 1)
}

impl fmt::Display for BVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BVertex::Origin => write!(f, "b0"),
            BVertex::Axis(x) => write!(f, "b({x},0)"),
            BVertex::Tooth(x, h) => write!(f, "b({x},{h})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HalfCombB {
    pub alpha: u32,
    lambda: f64,
}

impl HalfCombB {
    pub fn new(alpha: u32, lambda: f64) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidParam("alpha must be >= 1".into()));
        }
        Ok(HalfCombB { alpha, lambda })
    }

    /// Graph distance from the origin; the projection onto `VLine`.
    pub fn height(v: &BVertex) -> u32 {
        match v {
            BVertex::Origin => 0,
            BVertex::Axis(x) => *x,
            BVertex::Tooth(x, h) => x + h,
        }
    }
}

impl RateGraph for HalfCombB {
    type V = BVertex;

    fn root(&self) -> BVertex {
        BVertex::Origin
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rates(&self, v: &BVertex) -> Vec<(BVertex, f64)> {
        let a = self.alpha as f64;
        match v {
            BVertex::Origin => vec![(BVertex::Axis(1), a)],
            BVertex::Axis(1) => vec![
                (BVertex::Origin, 1.0),
                (BVertex::Axis(2), 1.0),
                (BVertex::Tooth(1, 1), a),
            ],
            BVertex::Axis(x) => vec![
                (BVertex::Axis(x - 1), 1.0),
                (BVertex::Axis(x + 1), 1.0),
                (BVertex::Tooth(*x, 1), a),
            ],
            BVertex::Tooth(x, 1) => vec![
                (BVertex::Axis(*x), 1.0),
                (BVertex::Tooth(*x, 2), a + 1.0),
            ],
            BVertex::Tooth(x, h) => vec![
                (BVertex::Tooth(*x, h - 1), 1.0),
                (BVertex::Tooth(*x, h + 1), a + 1.0),
            ],
        }
    }

    fn family(&self) -> String {
        format!("half-comb-b({})", self.alpha)
    }
}

/// Comb vertex with the column-0 tooth split into two shafts above height 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplitVertex {
    Axis(i64),
    /// Tooth above column x != 0, height >= 1; also the single column-0
    /// vertex at height 1 (the branch root fiber) is Tooth(0, 1).
    Tooth(i64, u32),
    /// The two shafts above (0,1): side 0 and side 1, height >= 2.
    Shaft(u8, u32),
}

impl fmt::Display for SplitVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitVertex::Axis(x) => write!(f, "s({x},0)"),
            SplitVertex::Tooth(x, h) => write!(f, "s({x},{h})"),
            SplitVertex::Shaft(side, h) => write!(f, "s(0,{h}|{})", if *side == 0 { "v" } else { "s" }),
        }
    }
}

/// Quotient of T_3 distinguishing the two depth-1 subtrees of x_1
/// (alpha = 1 throughout: shafts have one parent and carry up-rate 2 as the
/// merged pair of children of each T_3 branch vertex; the split point sends
/// rate 1 to each shaft).
#[derive(Debug, Clone)]
pub struct SplitComb {
    lambda: f64,
}

impl SplitComb {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam("lambda must be > 0".into()));
        }
        Ok(SplitComb { lambda })
    }

    pub fn alpha(&self) -> u32 {
        1
    }
}

impl RateGraph for SplitComb {
    type V = SplitVertex;

    fn root(&self) -> SplitVertex {
        SplitVertex::Axis(0)
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rates(&self, v: &SplitVertex) -> Vec<(SplitVertex, f64)> {
        match v {
            SplitVertex::Axis(x) => vec![
                (SplitVertex::Axis(x - 1), 1.0),
                (SplitVertex::Axis(x + 1), 1.0),
                (SplitVertex::Tooth(*x, 1), 1.0),
            ],
            SplitVertex::Tooth(0, 1) => vec![
                (SplitVertex::Axis(0), 1.0),
                (SplitVertex::Shaft(0, 2), 1.0),
                (SplitVertex::Shaft(1, 2), 1.0),
            ],
            SplitVertex::Tooth(x, 1) => vec![
                (SplitVertex::Axis(*x), 1.0),
                (SplitVertex::Tooth(*x, 2), 2.0),
            ],
            SplitVertex::Tooth(x, h) => vec![
                (SplitVertex::Tooth(*x, h - 1), 1.0),
                (SplitVertex::Tooth(*x, h + 1), 2.0),
            ],
            SplitVertex::Shaft(side, 2) => vec![
                (SplitVertex::Tooth(0, 1), 1.0),
                (SplitVertex::Shaft(*side, 3), 2.0),
            ],
            SplitVertex::Shaft(side, h) => vec![
                (SplitVertex::Shaft(*side, h - 1), 1.0),
                (SplitVertex::Shaft(*side, h + 1), 2.0),
            ],
        }
    }

    fn family(&self) -> String {
        "split-comb".into()
    }
}
