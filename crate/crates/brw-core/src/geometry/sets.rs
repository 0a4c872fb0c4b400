//! Target sets: membership predicates with human-readable names, plus the
//! structured set descriptions for the tree and comb families that the
//! solver's boundary-clamp machinery understands.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::comb::CombVertex;
use crate::geometry::tree::TreeVertex;
use crate::graph::Vertex;

/// A subset of the vertex set given by a membership predicate; enumeration
/// within a truncation is by filtering the truncation's vertex list, so the
/// predicate and enumerator agree by construction.
#[derive(Clone)]
pub struct TargetSet<V: Vertex> {
    pub name: String,
    pred: Arc<dyn Fn(&V) -> bool + Send + Sync>,
}

impl<V: Vertex> TargetSet<V> {
    pub fn new(name: impl Into<String>, pred: impl Fn(&V) -> bool + Send + Sync + 'static) -> Self {
        TargetSet {
            name: name.into(),
            pred: Arc::new(pred),
        }
    }

    pub fn contains(&self, v: &V) -> bool {
        (self.pred)(v)
    }

    pub fn members<'a>(&'a self, verts: &'a [V]) -> impl Iterator<Item = &'a V> + 'a {
        verts.iter().filter(|v| self.contains(v))
    }
}

impl<V: Vertex> std::fmt::Debug for TargetSet<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TargetSet({})", self.name)
    }
}

/// Index sets I over {1,...,64} as a bitmask (bit i-1 set means i in I),
/// optionally together with a full tail {i : i > tail_from}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSet {
    pub mask: u64,
    pub tail_from: Option<u32>,
}

impl IndexSet {
    pub fn from_indices(idx: &[u32]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in idx {
            if i == 0 || i > 64 {
                return Err(Error::InvalidParam(format!(
                    "index {i} outside 1..=64 for a bitmask index set"
                )));
            }
            mask |= 1u64 << (i - 1);
        }
        Ok(IndexSet { mask, tail_from: None })
    }

    pub fn with_tail(mut self, from: u32) -> Self {
        self.tail_from = Some(from);
        self
    }

    pub fn contains(&self, i: i64) -> bool {
        if i >= 1 && i <= 64 && (self.mask >> (i - 1)) & 1 == 1 {
            return true;
        }
        matches!(self.tail_from, Some(t) if i > t as i64)
    }

    pub fn indices(&self) -> Vec<u32> {
        (1..=64).filter(|i| (self.mask >> (i - 1)) & 1 == 1).collect()
    }

    /// The binary value sum_{i in I} 2^{-i} as an exact dyadic, scaled by
    /// 2^64 (the tail {i > t} contributes exactly 2^{-t}).
    pub fn dyadic_value_scaled(&self) -> u128 {
        let mut v = self.mask.reverse_bits() as u128; // bit i-1 -> 2^(64-i)
        if let Some(t) = self.tail_from {
            v += 1u128 << (64 - t);
        }
        v
    }

    pub fn label(&self) -> String {
        let idx: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        match self.tail_from {
            Some(t) => format!("{{{}}}+tail>{}", idx.join(","), t),
            None => format!("{{{}}}", idx.join(",")),
        }
    }
}

/// Named subsets of T_m.
#[derive(Debug, Clone)]
pub enum TreeSet {
    /// T_{y_0} = the whole tree.
    Full,
    Empty,
    /// {o}
    Root,
    Singleton(TreeVertex),
    /// T_{y_n}, n != 0.
    SubtreeY(i64),
    /// T_{x_i}.
    SubtreeX(i64),
    /// Generic T_v.
    Subtree(TreeVertex),
    /// The bi-infinite spine {y_n}.
    Spine,
    /// Union of T_{x_i} over an index set (pairwise disjoint).
    UnionX(IndexSet),
    /// base together with the root (comparator sets for the loop model).
    OrRoot(Box<TreeSet>),
    Explicit(Vec<TreeVertex>),
}

impl TreeSet {
    pub fn contains(&self, v: &TreeVertex) -> bool {
        match self {
            TreeSet::Full => true,
            TreeSet::Empty => false,
            TreeSet::Root => *v == TreeVertex::root(),
            TreeSet::Singleton(w) => v == w,
            TreeSet::SubtreeY(n) => match v {
                TreeVertex::Spine(j) => {
                    if *n > 0 {
                        j >= n
                    } else {
                        j <= n
                    }
                }
                TreeVertex::Branch { i, .. } => {
                    if *n > 0 {
                        *i >= n + 1
                    } else {
                        *i <= n + 1
                    }
                }
            },
            TreeSet::SubtreeX(i0) => {
                matches!(v, TreeVertex::Branch { i, sub: 0, .. } if i == i0)
            }
            TreeSet::Subtree(w) => match w {
                TreeVertex::Spine(0) => true,
                TreeVertex::Spine(n) => TreeSet::SubtreeY(*n).contains(v),
                TreeVertex::Branch { i, sub, word } => match v {
                    TreeVertex::Branch {
                        i: vi,
                        sub: vsub,
                        word: vword,
                    } => vi == i && vsub == sub && vword.len() >= word.len() && vword[..word.len()] == word[..],
                    _ => false,
                },
            },
            TreeSet::Spine => matches!(v, TreeVertex::Spine(_)),
            TreeSet::UnionX(set) => {
                matches!(v, TreeVertex::Branch { i, sub: 0, .. } if set.contains(*i))
            }
            TreeSet::OrRoot(base) => *v == TreeVertex::root() || base.contains(v),
            TreeSet::Explicit(list) => list.contains(v),
        }
    }

    pub fn name(&self) -> String {
        match self {
            TreeSet::Full => "full".into(),
            TreeSet::Empty => "empty".into(),
            TreeSet::Root => "root".into(),
            TreeSet::Singleton(v) => format!("{{{v}}}"),
            TreeSet::SubtreeY(n) => format!("T[y{n}]"),
            TreeSet::SubtreeX(i) => format!("T[x{i}]"),
            TreeSet::Subtree(v) => format!("T[{v}]"),
            TreeSet::Spine => "spine".into(),
            TreeSet::UnionX(s) => format!("union_Tx{}", s.label()),
            TreeSet::OrRoot(b) => format!("{}+root", b.name()),
            TreeSet::Explicit(vs) => format!(
                "explicit{{{}}}",
                vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }

    pub fn to_target(&self) -> TargetSet<TreeVertex> {
        let me = self.clone();
        TargetSet::new(self.name(), move |v| me.contains(v))
    }

    /// Image under the canonical quotient onto the comb; `None` when the set
    /// is not a union of quotient fibers (e.g. a single branch vertex).
    pub fn to_comb(&self) -> Option<CombSet> {
        Some(match self {
            TreeSet::Full => CombSet::Full,
            TreeSet::Empty => CombSet::Empty,
            TreeSet::Root => CombSet::Origin,
            TreeSet::Singleton(TreeVertex::Spine(n)) => CombSet::AxisPoint(*n),
            TreeSet::Singleton(_) => return None,
            TreeSet::SubtreeY(n) if *n > 0 => CombSet::AxisFrom(*n),
            TreeSet::SubtreeY(n) => CombSet::AxisTo(*n),
            TreeSet::SubtreeX(i) => CombSet::Teeth(ColSet::finite(vec![i - 1])),
            TreeSet::Subtree(TreeVertex::Spine(n)) => {
                return TreeSet::SubtreeY(*n).to_comb();
            }
            TreeSet::Subtree(TreeVertex::Branch { word, .. }) if word.is_empty() => {
                return None; // handled by SubtreeX when sub = 0; deeper subtrees are not fiber unions
            }
            TreeSet::Subtree(_) => return None,
            TreeSet::Spine => CombSet::Axis,
            TreeSet::UnionX(set) => CombSet::Teeth(ColSet::from_index_set(set)),
            TreeSet::OrRoot(b) => CombSet::OrOrigin(Box::new(b.to_comb()?)),
            TreeSet::Explicit(_) => return None,
        })
    }
}

/// A set of tooth columns: finitely many listed columns plus an optional
/// infinite tail {c : c >= tail_from}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColSet {
    pub cols: Vec<i64>,
    pub tail_from: Option<i64>,
}

impl ColSet {
    pub fn finite(mut cols: Vec<i64>) -> Self {
        cols.sort();
        cols.dedup();
        ColSet { cols, tail_from: None }
    }

    /// Tree indices i (T_{x_i}) map to comb columns i-1; the tree tail
    /// {i > t} becomes the column tail {c >= t}.
    pub fn from_index_set(s: &IndexSet) -> Self {
        let mut cols: Vec<i64> = s.indices().iter().map(|i| *i as i64 - 1).collect();
        let tail_from = s.tail_from.map(|t| t as i64);
        if let Some(t) = tail_from {
            cols.retain(|c| *c < t);
        }
        cols.sort();
        ColSet { cols, tail_from }
    }

    pub fn contains(&self, c: i64) -> bool {
        if matches!(self.tail_from, Some(t) if c >= t) {
            return true;
        }
        self.cols.binary_search(&c).is_ok()
    }

    /// Columns with listed or tail membership within [lo, hi].
    pub fn columns_within(&self, lo: i64, hi: i64) -> Vec<i64> {
        let mut out: Vec<i64> = self.cols.iter().copied().filter(|c| *c >= lo && *c <= hi).collect();
        if let Some(t) = self.tail_from {
            for c in t.max(lo)..=hi {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out.sort();
        out
    }

    pub fn label(&self) -> String {
        let cols: Vec<String> = self.cols.iter().map(|c| c.to_string()).collect();
        match self.tail_from {
            Some(t) => format!("{{{}}}+cols>={}", cols.join(","), t),
            None => format!("{{{}}}", cols.join(",")),
        }
    }
}

/// Named subsets of the comb (and of tree fiber-unions via the quotient).
#[derive(Debug, Clone)]
pub enum CombSet {
    Full,
    Empty,
    Origin,
    AxisPoint(i64),
    /// The whole axis {(x, 0)}.
    Axis,
    /// {(x, y) : x >= n} — the image of T_{y_n} for n >= 1.
    AxisFrom(i64),
    /// {(x, y) : x <= n} — the image of T_{y_n} for n <= -1.
    AxisTo(i64),
    /// Union over columns of the open tooth {(c, y) : y >= 1} (images of
    /// subtrees T_{x_{c+1}}).
    Teeth(ColSet),
    /// Union of full vertical lines V_c = {(c, y) : y >= 0}.
    VLines(ColSet),
    /// {(col, y) : y >= min_h} — e.g. the two grandchild subtrees of x_1
    /// merge to the column-0 tooth above height 2.
    ToothAbove { col: i64, min_h: u32 },
    OrOrigin(Box<CombSet>),
    Explicit(Vec<CombVertex>),
}

impl CombSet {
    pub fn contains(&self, v: &CombVertex) -> bool {
        match self {
            CombSet::Full => true,
            CombSet::Empty => false,
            CombSet::Origin => v.x == 0 && v.y == 0,
            CombSet::AxisPoint(x) => v.x == *x && v.y == 0,
            CombSet::Axis => v.y == 0,
            CombSet::AxisFrom(n) => v.x >= *n,
            CombSet::AxisTo(n) => v.x <= *n,
            CombSet::Teeth(cols) => v.y >= 1 && cols.contains(v.x),
            CombSet::VLines(cols) => cols.contains(v.x),
            CombSet::ToothAbove { col, min_h } => v.x == *col && v.y >= *min_h,
            CombSet::OrOrigin(b) => (v.x == 0 && v.y == 0) || b.contains(v),
            CombSet::Explicit(list) => list.contains(v),
        }
    }

    pub fn name(&self) -> String {
        match self {
            CombSet::Full => "full".into(),
            CombSet::Empty => "empty".into(),
            CombSet::Origin => "origin".into(),
            CombSet::AxisPoint(x) => format!("axis({x})"),
            CombSet::Axis => "axis".into(),
            CombSet::AxisFrom(n) => format!("half[x>={n}]"),
            CombSet::AxisTo(n) => format!("half[x<={n}]"),
            CombSet::Teeth(c) => format!("teeth{}", c.label()),
            CombSet::VLines(c) => format!("V{}", c.label()),
            CombSet::ToothAbove { col, min_h } => format!("tooth({col})[y>={min_h}]"),
            CombSet::OrOrigin(b) => format!("{}+origin", b.name()),
            CombSet::Explicit(vs) => format!(
                "explicit{{{}}}",
                vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }

    pub fn to_target(&self) -> TargetSet<CombVertex> {
        let me = self.clone();
        TargetSet::new(self.name(), move |v| me.contains(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtree_membership_basics() {
        // o not in T_{y_1}; y_2 in T_{y_1}
        assert!(!TreeSet::SubtreeY(1).contains(&TreeVertex::root()));
        assert!(TreeSet::SubtreeY(1).contains(&TreeVertex::Spine(2)));
        // x_2 attaches at y_1, so it belongs to T_{y_1}
        assert!(TreeSet::SubtreeY(1).contains(&TreeVertex::x(2)));
        assert!(!TreeSet::SubtreeY(1).contains(&TreeVertex::x(1)));
        // x_1 attaches at y_0 = o: member of T_{y_n} only for n <= ... checks
        assert!(TreeSet::SubtreeY(-1).contains(&TreeVertex::Spine(-3)));
        assert!(TreeSet::SubtreeY(-1).contains(&TreeVertex::x(0)));
        assert!(!TreeSet::SubtreeY(-1).contains(&TreeVertex::x(1)));
    }

    #[test]
    fn nested_subtrees_and_disjoint_branches() {
        // T_{y_{n+1}} subset of T_{y_n}; T_{x_i} pairwise disjoint
        use crate::geometry::tree::RegularTree;
        use crate::graph::RateGraph;
        let t = RegularTree::new(3, 0.35).unwrap();
        let mut frontier = vec![TreeVertex::root()];
        let mut all = vec![TreeVertex::root()];
        for _ in 0..8 {
            let mut next = Vec::new();
            for v in &frontier {
                for (w, _) in t.rates(v) {
                    if !all.contains(&w) {
                        all.push(w.clone());
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        for v in &all {
            for n in 1..4 {
                if TreeSet::SubtreeY(n + 1).contains(v) {
                    assert!(TreeSet::SubtreeY(n).contains(v));
                }
            }
            let mut hits = 0;
            for i in 1..6 {
                if TreeSet::SubtreeX(i).contains(v) {
                    hits += 1;
                }
            }
            assert!(hits <= 1, "{v} in several T_x");
        }
    }

    #[test]
    fn index_set_dyadics() {
        let a = IndexSet::from_indices(&[1]).unwrap();
        let b = IndexSet::from_indices(&[2, 3]).unwrap();
        // 1/2 != 1/4 + 1/8
        assert_ne!(a.dyadic_value_scaled(), b.dyadic_value_scaled());
        // {1} and tail {i > 1} have equal binary value 1/2
        let t = IndexSet { mask: 0, tail_from: Some(1) };
        assert_eq!(a.dyadic_value_scaled(), t.dyadic_value_scaled());
        assert!(IndexSet::from_indices(&[0]).is_err());
        assert!(IndexSet::from_indices(&[65]).is_err());
    }

    #[test]
    fn tree_to_comb_transport() {
        let cases = [
            (TreeSet::Full, "full"),
            (TreeSet::Root, "origin"),
            (TreeSet::SubtreeY(2), "half[x>=2]"),
            (TreeSet::SubtreeX(1), "teeth{0}"),
            (TreeSet::Spine, "axis"),
        ];
        for (ts, name) in cases {
            assert_eq!(ts.to_comb().unwrap().name(), name);
        }
        assert!(TreeSet::Singleton(TreeVertex::x(1)).to_comb().is_none());
        // fiber consistency: v in A iff g(v) in g(A), sampled
        use crate::projection::tree_to_comb;
        let sets = [
            TreeSet::SubtreeY(1),
            TreeSet::SubtreeY(-2),
            TreeSet::SubtreeX(3),
            TreeSet::UnionX(IndexSet::from_indices(&[1, 3]).unwrap()),
            TreeSet::Root,
        ];
        let mut rng = crate::rng::SplitMix64::new(21);
        for _ in 0..2000 {
            let v = crate::geometry::tree::testutil::random_vertex(&mut rng);
            for s in &sets {
                let c = s.to_comb().unwrap();
                assert_eq!(s.contains(&v), c.contains(&tree_to_comb(&v)), "{v} in {}", s.name());
            }
        }
    }

    #[test]
    fn v_lines_on_comb() {
        // V_i includes its axis base; teeth do not
        let v1 = CombSet::VLines(ColSet::finite(vec![1]));
        assert!(v1.contains(&CombVertex::new(1, 0)));
        assert!(v1.contains(&CombVertex::new(1, 5)));
        assert!(!v1.contains(&CombVertex::new(2, 0)));
        let t1 = CombSet::Teeth(ColSet::finite(vec![1]));
        assert!(!t1.contains(&CombVertex::new(1, 0)));
        assert!(t1.contains(&CombVertex::new(1, 1)));
    }

    #[test]
    fn col_tail_membership() {
        let c = ColSet {
            cols: vec![0],
            tail_from: Some(4),
        };
        assert!(c.contains(0));
        assert!(!c.contains(2));
        assert!(c.contains(4));
        assert!(c.contains(40));
        assert_eq!(c.columns_within(-2, 6), vec![0, 4, 5, 6]);
    }
}
