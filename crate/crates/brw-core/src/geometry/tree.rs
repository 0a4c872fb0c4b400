//! The regular tree T_m with spine/branch labels.
//!
//! Vertices: the spine {y_n : n in Z} through the root o = y_0, and branch
//! vertices addressed as (branch root x_i, word over {0,...,m-2}), where x_i
//! is the off-spine neighbor of y_{i-1}. For m > 3 a spine vertex carries
//! m-2 branch roots, distinguished by a `sub` index with x_i = sub 0. Labels
//! make subtree membership a prefix test.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::RateGraph;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeVertex {
    /// y_n
    Spine(i64),
    /// A vertex of the branch subtree hanging at y_{i-1}; empty word is the
    /// branch root itself (x_i for sub = 0).
    Branch { i: i64, sub: u8, word: Vec<u8> },
}

impl TreeVertex {
    pub fn root() -> Self {
        TreeVertex::Spine(0)
    }

    pub fn x(i: i64) -> Self {
        TreeVertex::Branch {
            i,
            sub: 0,
            word: Vec::new(),
        }
    }

    /// Graph distance to the root o.
    pub fn depth(&self) -> u64 {
        match self {
            TreeVertex::Spine(n) => n.unsigned_abs(),
            TreeVertex::Branch { i, word, .. } => {
                // x_i sits at distance |i-1| + 1 from o
                (i - 1).unsigned_abs() + 1 + word.len() as u64
            }
        }
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeVertex::Spine(n) => write!(f, "y{n}"),
            TreeVertex::Branch { i, sub, word } => {
                write!(f, "x{i}")?;
                if *sub > 0 {
                    write!(f, ".{sub}")?;
                }
                if !word.is_empty() {
                    write!(f, ":")?;
                    for d in word {
                        write!(f, "{d}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for TreeVertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("bad tree vertex label: {s}"));
        if let Some(rest) = s.strip_prefix('y') {
            return rest.parse::<i64>().map(TreeVertex::Spine).map_err(|_| bad());
        }
        let rest = s.strip_prefix('x').ok_or_else(bad)?;
        let (head, word) = match rest.split_once(':') {
            Some((h, w)) => (h, w),
            None => (rest, ""),
        };
        let (i_str, sub_str) = match head.split_once('.') {
            Some((i, sub)) => (i, sub),
            None => (head, "0"),
        };
        let i = i_str.parse::<i64>().map_err(|_| bad())?;
        let sub = sub_str.parse::<u8>().map_err(|_| bad())?;
        let word = word
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
            .collect::<Result<Vec<u8>>>()?;
        Ok(TreeVertex::Branch { i, sub, word })
    }
}

/// Edge-breeding BRW on T_m: every edge carries rate 1.
#[derive(Debug, Clone)]
pub struct RegularTree {
    pub m: u32,
    lambda: f64,
}

impl RegularTree {
    pub fn new(m: u32, lambda: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParam(format!("tree degree m = {m} < 3")));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam(format!("lambda = {lambda} must be > 0")));
        }
        Ok(RegularTree { m, lambda })
    }

    fn branch_children(&self) -> u8 {
        (self.m - 1) as u8
    }

    /// Number of branch roots per spine vertex.
    fn subs(&self) -> u8 {
        (self.m - 2) as u8
    }
}

impl RateGraph for RegularTree {
    type V = TreeVertex;

    fn root(&self) -> TreeVertex {
        TreeVertex::root()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rates(&self, v: &TreeVertex) -> Vec<(TreeVertex, f64)> {
        let mut out = Vec::with_capacity(self.m as usize);
        match v {
            TreeVertex::Spine(n) => {
                out.push((TreeVertex::Spine(n - 1), 1.0));
                out.push((TreeVertex::Spine(n + 1), 1.0));
                for sub in 0..self.subs() {
                    out.push((
                        TreeVertex::Branch {
                            i: n + 1,
                            sub,
                            word: Vec::new(),
                        },
                        1.0,
                    ));
                }
            }
            TreeVertex::Branch { i, sub, word } => {
                if word.is_empty() {
                    out.push((TreeVertex::Spine(i - 1), 1.0));
                } else {
                    let mut parent = word.clone();
                    parent.pop();
                    out.push((
                        TreeVertex::Branch {
                            i: *i,
                            sub: *sub,
                            word: parent,
                        },
                        1.0,
                    ));
                }
                for d in 0..self.branch_children() {
                    let mut child = word.clone();
                    child.push(d);
                    out.push((
                        TreeVertex::Branch {
                            i: *i,
                            sub: *sub,
                            word: child,
                        },
                        1.0,
                    ));
                }
            }
        }
        out
    }

    fn family(&self) -> String {
        format!("tree({})", self.m)
    }

    fn root_distance(&self, v: &TreeVertex) -> Option<u64> {
        Some(v.depth())
    }
}

/// An automorphism of T_m fixing o that maps `a` to `b`; exists iff
/// d(o,a) = d(o,b). Realized by matching the two root paths and pairing the
/// remaining neighbor slots canonically at every step.
#[derive(Debug, Clone)]
pub struct TreeAutomorphism {
    tree: RegularTree,
    path_a: Vec<TreeVertex>,
    path_b: Vec<TreeVertex>,
}

/// Root path o = v_0, ..., v_k = v (labels encode it directly).
fn root_path(v: &TreeVertex) -> Vec<TreeVertex> {
    let mut out = vec![TreeVertex::root()];
    match v {
        TreeVertex::Spine(n) => {
            let step = if *n >= 0 { 1 } else { -1 };
            let mut j = 0i64;
            while j != *n {
                j += step;
                out.push(TreeVertex::Spine(j));
            }
        }
        TreeVertex::Branch { i, sub, word } => {
            let spine_end = i - 1;
            let step = if spine_end >= 0 { 1 } else { -1 };
            let mut j = 0i64;
            while j != spine_end {
                j += step;
                out.push(TreeVertex::Spine(j));
            }
            out.push(TreeVertex::Branch {
                i: *i,
                sub: *sub,
                word: Vec::new(),
            });
            for l in 1..=word.len() {
                out.push(TreeVertex::Branch {
                    i: *i,
                    sub: *sub,
                    word: word[..l].to_vec(),
                });
            }
        }
    }
    out
}

pub fn canonical_automorphism(
    tree: &RegularTree,
    a: &TreeVertex,
    b: &TreeVertex,
) -> Result<TreeAutomorphism> {
    let da = a.depth();
    let db = b.depth();
    if da != db {
        return Err(Error::NoAutomorphism {
            a: a.to_string(),
            b: b.to_string(),
            da: da as u32,
            db: db as u32,
        });
    }
    Ok(TreeAutomorphism {
        tree: tree.clone(),
        path_a: root_path(a),
        path_b: root_path(b),
    })
}

impl TreeAutomorphism {
    /// Applies the automorphism to any vertex by re-walking its root path.
    pub fn apply(&self, v: &TreeVertex) -> TreeVertex {
        let path_v = root_path(v);
        let mut cur = TreeVertex::root(); // current preimage position
        let mut img = TreeVertex::root();
        let mut prev: Option<TreeVertex> = None;
        let mut prev_img: Option<TreeVertex> = None;
        for next in path_v.iter().skip(1) {
            // If (cur -> next) follows path_a, the image step follows path_b.
            let depth = root_path(&cur).len() - 1;
            let on_a = self.path_a.get(depth).map(|p| *p == cur).unwrap_or(false);
            let a_next = self.path_a.get(depth + 1);
            let img_next = if on_a && a_next == Some(next) {
                self.path_b[depth + 1].clone()
            } else {
                // pair the remaining neighbor slots by rank
                let mut slots: Vec<TreeVertex> = self
                    .tree
                    .rates(&cur)
                    .into_iter()
                    .map(|(w, _)| w)
                    .filter(|w| Some(w) != prev.as_ref())
                    .filter(|w| !(on_a && a_next == Some(w)))
                    .collect();
                let mut img_slots: Vec<TreeVertex> = self
                    .tree
                    .rates(&img)
                    .into_iter()
                    .map(|(w, _)| w)
                    .filter(|w| Some(w) != prev_img.as_ref())
                    .filter(|w| {
                        let on_b = self.path_b.get(depth).map(|p| *p == img).unwrap_or(false);
                        !(on_b && self.path_b.get(depth + 1) == Some(w))
                    })
                    .collect();
                slots.sort();
                img_slots.sort();
                let rank = slots.iter().position(|w| w == next).expect("adjacent step");
                img_slots[rank].clone()
            };
            prev = Some(cur.clone());
            prev_img = Some(img.clone());
            cur = next.clone();
            img = img_next;
        }
        img
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use testutil::random_vertex;

    #[test]
    fn m_below_3_rejected() {
        assert!(RegularTree::new(2, 0.35).is_err());
    }

    #[test]
    fn root_degree_and_neighbors() {
        let t = RegularTree::new(3, 0.35).unwrap();
        let nbrs = t.rates(&TreeVertex::root());
        assert_eq!(nbrs.len(), 3);
        let set: Vec<TreeVertex> = nbrs.into_iter().map(|(v, _)| v).collect();
        assert!(set.contains(&TreeVertex::Spine(1)));
        assert!(set.contains(&TreeVertex::Spine(-1)));
        assert!(set.contains(&TreeVertex::x(1)));
    }

    #[test]
    fn every_vertex_has_degree_m() {
        for m in [3u32, 4] {
            let t = RegularTree::new(m, 0.35).unwrap();
            for v in [
                TreeVertex::Spine(-2),
                TreeVertex::x(2),
                TreeVertex::Branch {
                    i: -1,
                    sub: 0,
                    word: vec![0, 1],
                },
            ] {
                assert_eq!(t.rates(&v).len(), m as usize, "{v} in T_{m}");
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric() {
        let t = RegularTree::new(3, 0.35).unwrap();
        let mut rng = SplitMix64::new(5);
        for _ in 0..200 {
            let v = random_vertex(&mut rng);
            for (w, k) in t.rates(&v) {
                assert!(k > 0.0);
                assert!(
                    t.rates(&w).iter().any(|(u, kk)| *u == v && *kk > 0.0),
                    "{v} ~ {w}"
                );
            }
        }
    }

    #[test]
    fn depth_matches_bfs_labels() {
        // d(o, y_n) = |n|, d(o, x_n) = n for n >= 1
        assert_eq!(TreeVertex::Spine(-4).depth(), 4);
        assert_eq!(TreeVertex::x(3).depth(), 3);
        assert_eq!(
            TreeVertex::Branch {
                i: 2,
                sub: 0,
                word: vec![1, 0]
            }
            .depth(),
            4
        );
    }

    #[test]
    fn label_round_trip() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..10_000 {
            let v = random_vertex(&mut rng);
            let s = v.to_string();
            let back: TreeVertex = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn automorphism_identity_and_basic_map() {
        let t = RegularTree::new(3, 0.35).unwrap();
        let id = canonical_automorphism(&t, &TreeVertex::x(1), &TreeVertex::x(1)).unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..100 {
            let v = random_vertex(&mut rng);
            assert_eq!(id.apply(&v), v);
        }
        // Psi(o) = o, Psi(x_1) = y_1 is valid: both at distance 1
        let psi = canonical_automorphism(&t, &TreeVertex::x(1), &TreeVertex::Spine(1)).unwrap();
        assert_eq!(psi.apply(&TreeVertex::root()), TreeVertex::root());
        assert_eq!(psi.apply(&TreeVertex::x(1)), TreeVertex::Spine(1));
    }

    #[test]
    fn automorphism_distance_mismatch_rejected() {
        let t = RegularTree::new(3, 0.35).unwrap();
        let r = canonical_automorphism(&t, &TreeVertex::Spine(1), &TreeVertex::Spine(2));
        assert!(matches!(r, Err(Error::NoAutomorphism { .. })));
    }

    #[test]
    fn automorphism_preserves_adjacency() {
        let t = RegularTree::new(3, 0.35).unwrap();
        let psi = canonical_automorphism(&t, &TreeVertex::x(2), &TreeVertex::Spine(2)).unwrap();
        let mut rng = SplitMix64::new(11);
        for _ in 0..200 {
            let v = random_vertex(&mut rng);
            let iv = psi.apply(&v);
            for (w, _) in t.rates(&v) {
                let iw = psi.apply(&w);
                assert!(
                    t.rates(&iv).iter().any(|(u, _)| *u == iw),
                    "{v}~{w} maps to {iv}!~{iw}"
                );
            }
        }
    }

    #[test]
    fn automorphism_pushes_subtrees_forward() {
        use crate::geometry::sets::TreeSet;
        let t = RegularTree::new(3, 0.35).unwrap();
        for n in [1i64, 2, 3] {
            let psi =
                canonical_automorphism(&t, &TreeVertex::x(n), &TreeVertex::Spine(n)).unwrap();
            let from = TreeSet::SubtreeX(n);
            let to = TreeSet::Subtree(TreeVertex::Spine(n));
            let mut rng = SplitMix64::new(n as u64);
            for _ in 0..400 {
                let v = random_vertex(&mut rng);
                assert_eq!(
                    from.contains(&v),
                    to.contains(&psi.apply(&v)),
                    "n={n}, v={v}"
                );
            }
        }
    }
}
