//! Finite truncations: a radius-R ball of a rate graph (or a whole finite
//! explicit-law model) compiled to index-based rows, plus probability
//! vectors over a truncation with a declared boundary policy.
//!
//! Every in-truncation vertex's neighbors are either in-truncation or
//! resolved by the boundary policy; the rim (out-of-truncation read targets)
//! is explicit so per-site clamp tables can be attached.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{RateGraph, Vertex};
use crate::law::ExplicitLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Read {
    In(usize),
    Rim(usize),
}

#[derive(Debug, Clone)]
enum Row {
    /// Closed-form generating function of the rate-derived law.
    Rate(Vec<(Read, f64)>),
    /// Explicit polynomial: atoms (probability, [(vertex, count)]).
    Explicit(Vec<(f64, Vec<(Read, u32)>)>),
}

/// How far one application of a row can be off from the correctly rounded
/// value, in ulps; sweeps nudge by a safety multiple of this.
const ULP_SLACK: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Plain f64 arithmetic (exact-identity checks, finite-horizon iterates).
    Nearest,
    /// Nudge each row result down: the computed chain is certifiably <= the
    /// exact chain (lower runs).
    Down,
    /// Nudge up and cap at 1 (upper runs).
    Up,
}

fn apply_rounding(x: f64, mode: Rounding, exact_one: bool) -> f64 {
    match mode {
        Rounding::Nearest => x,
        Rounding::Down => {
            // a rate row evaluates to exactly 1 iff every read is exactly 1,
            // in which case the true value is 1 and no nudge is needed
            if x >= 1.0 && exact_one {
                1.0
            } else if x <= 0.0 {
                0.0
            } else {
                f64::from_bits(x.to_bits().saturating_sub(ULP_SLACK)).max(0.0)
            }
        }
        Rounding::Up => {
            if x >= 1.0 {
                1.0
            } else {
                f64::from_bits(x.to_bits() + ULP_SLACK).min(1.0)
            }
        }
    }
}

#[derive(Debug)]
pub struct Truncation<V: Vertex> {
    pub verts: Vec<V>,
    pub index: HashMap<V, usize>,
    /// Out-of-truncation read targets, sorted, deduplicated.
    pub rim: Vec<V>,
    pub lambda: f64,
    pub radius: u32,
    pub family: String,
    rows: Vec<Row>,
}

impl<V: Vertex> Truncation<V> {
    /// Compiles the radius-R ball around the root. Vertices are in BFS
    /// order, sorted within each level, so iteration order is deterministic.
    pub fn ball<G: RateGraph<V = V>>(graph: &G, radius: u32) -> Result<Arc<Self>> {
        if radius < 1 {
            return Err(Error::InvalidParam("truncation radius must be >= 1".into()));
        }
        let root = graph.root();
        let mut verts = vec![root.clone()];
        let mut index: HashMap<V, usize> = HashMap::new();
        index.insert(root.clone(), 0);
        let mut level = vec![root];
        for _ in 0..radius {
            let mut seen: std::collections::HashSet<V> = std::collections::HashSet::new();
            let mut next: Vec<V> = Vec::new();
            for v in &level {
                for (w, _) in graph.rates(v) {
                    if !index.contains_key(&w) && seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            next.sort();
            for w in next.iter() {
                index.insert(w.clone(), verts.len());
                verts.push(w.clone());
            }
            level = next;
        }
        // second pass: rows and rim
        let mut rim: Vec<V> = Vec::new();
        for v in &verts {
            for (w, _) in graph.rates(v) {
                if !index.contains_key(&w) {
                    rim.push(w);
                }
            }
        }
        rim.sort();
        rim.dedup();
        let rim_index: HashMap<&V, usize> = rim.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let rows = verts
            .iter()
            .map(|v| {
                Row::Rate(
                    graph
                        .rates(v)
                        .into_iter()
                        .map(|(w, k)| {
                            let read = match index.get(&w) {
                                Some(&i) => Read::In(i),
                                None => Read::Rim(rim_index[&w]),
                            };
                            (read, k)
                        })
                        .collect(),
                )
            })
            .collect();
        Ok(Arc::new(Truncation {
            verts,
            index,
            rim,
            lambda: graph.lambda(),
            radius,
            family: graph.family(),
            rows,
        }))
    }

    /// A whole finite explicit-law model; laws must only reference model
    /// vertices.
    pub fn finite(verts: Vec<V>, laws: Vec<ExplicitLaw<V>>) -> Result<Arc<Self>> {
        assert_eq!(verts.len(), laws.len());
        let index: HashMap<V, usize> = verts.iter().cloned().zip(0..).collect();
        let rows = laws
            .iter()
            .map(|law| {
                let atoms = law
                    .atoms()
                    .iter()
                    .map(|(p, cfg)| {
                        let reads = cfg
                            .entries()
                            .iter()
                            .map(|(v, c)| {
                                index
                                    .get(v)
                                    .map(|&i| (Read::In(i), *c))
                                    .ok_or_else(|| Error::TruncationIncomplete {
                                        vertex: v.to_string(),
                                    })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok((*p, reads))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Row::Explicit(atoms))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Truncation {
            index,
            rim: Vec::new(),
            lambda: 0.0,
            radius: 0,
            family: "finite".into(),
            rows,
            verts,
        }))
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn position(&self, v: &V) -> Result<usize> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| Error::TruncationIncomplete { vertex: v.to_string() })
    }

    /// One coordinate of G(z) with reads resolved by `inside` / `rim`.
    fn eval_row(&self, i: usize, inside: &[f64], rim: &dyn Fn(usize) -> f64) -> f64 {
        let read = |r: Read| -> f64 {
            match r {
                Read::In(j) => inside[j],
                Read::Rim(s) => rim(s),
            }
        };
        match &self.rows[i] {
            Row::Rate(entries) => {
                let mut acc = 0.0;
                for (r, k) in entries {
                    acc += k * (1.0 - read(*r));
                }
                1.0 / (1.0 + self.lambda * acc)
            }
            Row::Explicit(atoms) => {
                let mut out = 0.0;
                for (p, reads) in atoms {
                    let mut term = *p;
                    for (r, c) in reads {
                        term *= read(*r).powi(*c as i32);
                    }
                    out += term;
                }
                out
            }
        }
    }

    /// One synchronous sweep: dst[i] = G(src)(i), with coordinates of
    /// `pinned` forced to 0. Returns the sup-norm step and whether dst == src
    /// bitwise.
    pub fn sweep(
        &self,
        src: &[f64],
        rim: &dyn Fn(usize) -> f64,
        pinned: Option<&[bool]>,
        mode: Rounding,
        dst: &mut [f64],
    ) -> (f64, bool) {
        let mut max_step = 0.0f64;
        let mut same = true;
        for i in 0..self.rows.len() {
            let v = if pinned.map(|p| p[i]).unwrap_or(false) {
                0.0
            } else {
                let is_rate = matches!(self.rows[i], Row::Rate(_));
                apply_rounding(self.eval_row(i, src, rim), mode, is_rate)
            };
            let step = (v - src[i]).abs();
            if step > max_step {
                max_step = step;
            }
            if v.to_bits() != src[i].to_bits() {
                same = false;
            }
            dst[i] = v;
        }
        (max_step, same)
    }

    /// In-ball edges of (X, E_mu): targets a row reads with positive weight.
    pub fn in_edges(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match &self.rows[i] {
            Row::Rate(entries) => {
                for (r, k) in entries {
                    if let (Read::In(j), true) = (*r, *k > 0.0) {
                        out.push(j);
                    }
                }
            }
            Row::Explicit(atoms) => {
                for (p, reads) in atoms {
                    if *p > 0.0 {
                        for (r, c) in reads {
                            if let (Read::In(j), true) = (*r, *c > 0) {
                                out.push(j);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Multi-source BFS distance to the target set within the truncation
    /// (edge support is symmetric for all shipped families). `None` means
    /// unreachable within the truncation, a lower bound of radius+1.
    pub fn distance_to_set(&self, target: &dyn Fn(&V) -> bool) -> Vec<Option<u32>> {
        let n = self.len();
        let mut dist: Vec<Option<u32>> = (0..n).map(|i| target(&self.verts[i]).then_some(0)).collect();
        let mut frontier: Vec<usize> = (0..n).filter(|&i| dist[i] == Some(0)).collect();
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &i in &frontier {
                for j in self.in_edges(i) {
                    if dist[j].is_none() {
                        dist[j] = Some(d);
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// Strong connectivity of (X, E_mu) for finite models.
    pub fn is_irreducible(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let fwd: Vec<Vec<usize>> = (0..n).map(|i| self.in_edges(i)).collect();
        let mut bwd: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, row) in fwd.iter().enumerate() {
            for &j in row {
                bwd[j].push(i);
            }
        }
        let reach = |adj: &Vec<Vec<usize>>| -> usize {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut stack = vec![0usize];
            let mut count = 1;
            while let Some(i) = stack.pop() {
                for &j in &adj[i] {
                    if !seen[j] {
                        seen[j] = true;
                        count += 1;
                        stack.push(j);
                    }
                }
            }
            count
        };
        reach(&fwd) == n && reach(&bwd) == n
    }
}

/// Boundary policy of a probability vector: how out-of-truncation reads
/// resolve.
#[derive(Debug, Clone)]
pub enum BoundaryPolicy {
    ClampOne,
    ClampZero,
    ClampConst(f64),
    /// Per-rim-slot clamp values (certified by the clamp oracles).
    ClampTable(Arc<Vec<f64>>),
}

impl BoundaryPolicy {
    pub fn value(&self, slot: usize) -> f64 {
        match self {
            BoundaryPolicy::ClampOne => 1.0,
            BoundaryPolicy::ClampZero => 0.0,
            BoundaryPolicy::ClampConst(c) => *c,
            BoundaryPolicy::ClampTable(t) => t[slot],
        }
    }
}

/// A map vertex -> [0,1] over a truncation with a boundary policy.
#[derive(Debug, Clone)]
pub struct ProbVector<V: Vertex> {
    pub trunc: Arc<Truncation<V>>,
    pub values: Vec<f64>,
    pub boundary: BoundaryPolicy,
}

impl<V: Vertex> ProbVector<V> {
    pub fn constant(trunc: &Arc<Truncation<V>>, value: f64, boundary: BoundaryPolicy) -> Self {
        assert!((0.0..=1.0).contains(&value));
        ProbVector {
            trunc: Arc::clone(trunc),
            values: vec![value; trunc.len()],
            boundary,
        }
    }

    pub fn get(&self, v: &V) -> Result<f64> {
        Ok(self.values[self.trunc.position(v)?])
    }

    pub fn rim_fn(&self) -> impl Fn(usize) -> f64 + '_ {
        move |s| self.boundary.value(s)
    }

    /// One application of the full map, same boundary policy.
    pub fn apply_map(&self, mode: Rounding) -> Self {
        let mut out = self.clone();
        let rim = self.rim_fn();
        self.trunc
            .sweep(&self.values, &rim, None, mode, &mut out.values);
        out
    }
}

/// Membership flags for the ordered-set classification of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    /// G(z) <= z + tol coordinatewise (super-solutions).
    pub in_u: bool,
    /// G(z) >= z - tol coordinatewise (sub-solutions).
    pub in_l: bool,
    /// Both: fixed points within tol.
    pub in_f: bool,
}

/// Classifies z against G coordinatewise at tolerance `tol`.
pub fn classify_point<V: Vertex>(z: &ProbVector<V>, tol: f64) -> PointClass {
    let gz = z.apply_map(Rounding::Nearest);
    let mut in_u = true;
    let mut in_l = true;
    for i in 0..z.values.len() {
        if gz.values[i] > z.values[i] + tol {
            in_u = false;
        }
        if gz.values[i] < z.values[i] - tol {
            in_l = false;
        }
    }
    PointClass {
        in_u,
        in_l,
        in_f: in_u && in_l,
    }
}

/// n synchronous applications of the full map.
pub fn iterate_map<V: Vertex>(z0: &ProbVector<V>, n: u32) -> ProbVector<V> {
    let mut z = z0.clone();
    for _ in 0..n {
        z = z.apply_map(Rounding::Nearest);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::comb::Comb;
    use crate::geometry::tree::{RegularTree, TreeVertex};
    use crate::law::{ExplicitLaw, OffspringConfig};
    use crate::rng::SplitMix64;

    #[test]
    fn tree_ball_size_closed_form() {
        // |B_R| = 3 * 2^R - 2 on T_3
        let t = RegularTree::new(3, 0.35).unwrap();
        for r in [1u32, 3, 6, 10] {
            let ball = Truncation::ball(&t, r).unwrap();
            assert_eq!(ball.len() as u64, 3 * (1u64 << r) - 2, "R={r}");
        }
    }

    #[test]
    fn comb_ball_size() {
        let c = Comb::new(1, 0.35).unwrap();
        for r in [1u32, 5, 12] {
            let ball = Truncation::ball(&c, r).unwrap();
            assert_eq!(ball.len() as u64, ((r + 1) as u64).pow(2));
        }
    }

    #[test]
    fn ball_is_stencil_complete() {
        let t = RegularTree::new(3, 0.4).unwrap();
        let ball = Truncation::ball(&t, 4).unwrap();
        // every vertex at depth < R has all neighbors in-ball
        for v in &ball.verts {
            if v.depth() < 4 {
                for (w, _) in t.rates(v) {
                    assert!(ball.index.contains_key(&w));
                }
            }
        }
        assert!(!ball.rim.is_empty());
    }

    #[test]
    fn distance_examples() {
        let t = RegularTree::new(3, 0.35).unwrap();
        let ball = Truncation::ball(&t, 6).unwrap();
        // x in A -> 0
        let d = ball.distance_to_set(&|v: &TreeVertex| *v == TreeVertex::root());
        assert_eq!(d[ball.position(&TreeVertex::root()).unwrap()], Some(0));
        // o to T_{y_1} is 1
        let d = ball.distance_to_set(&|v| crate::geometry::TreeSet::SubtreeY(1).contains(v));
        assert_eq!(d[0], Some(1));
        // o to T_{x_3} is 3
        let d = ball.distance_to_set(&|v| crate::geometry::TreeSet::SubtreeX(3).contains(v));
        assert_eq!(d[0], Some(3));
    }

    #[test]
    fn genfun_monotone_on_random_ordered_pairs() {
        let c = Comb::new(1, 0.35).unwrap();
        let ball = Truncation::ball(&c, 5).unwrap();
        let mut rng = SplitMix64::new(17);
        let n = ball.len();
        for _ in 0..1000 {
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for i in 0..n {
                let a = rng.next_f64();
                let b = rng.next_f64();
                lo[i] = a.min(b);
                hi[i] = a.max(b);
            }
            let mut glo = vec![0.0; n];
            let mut ghi = vec![0.0; n];
            ball.sweep(&lo, &|_| 0.5, None, Rounding::Nearest, &mut glo);
            ball.sweep(&hi, &|_| 0.5, None, Rounding::Nearest, &mut ghi);
            for i in 0..n {
                assert!(glo[i] <= ghi[i]);
            }
        }
    }

    #[test]
    fn classify_fixed_point_of_t3_quadratic() {
        // z = 1/(3 lambda) on T_3 with lambda = 0.4 is a fixed point:
        // root of (3 lambda z - 1)(z - 1).
        let t = RegularTree::new(3, 0.4).unwrap();
        let ball = Truncation::ball(&t, 5).unwrap();
        let z = ProbVector::constant(&ball, 1.0 / 1.2, BoundaryPolicy::ClampConst(1.0 / 1.2));
        let class = classify_point(&z, 1e-9);
        assert!(class.in_f && class.in_u && class.in_l);
        // z = 1 is in F_G
        let one = ProbVector::constant(&ball, 1.0, BoundaryPolicy::ClampOne);
        assert!(classify_point(&one, 1e-12).in_f);
        // z = 0 with a law that has positive empty-config mass: in L_G, not U_G
        let zero = ProbVector::constant(&ball, 0.0, BoundaryPolicy::ClampZero);
        let class = classify_point(&zero, 1e-12);
        assert!(class.in_l && !class.in_u);
    }

    #[test]
    fn iterate_single_vertex_laws() {
        // subcritical single-vertex law: z_n -> 1 from 0
        let law = ExplicitLaw::new(
            &0u32,
            vec![
                (0.5, OffspringConfig::empty()),
                (0.5, OffspringConfig::from_counts(vec![(0u32, 1)])),
            ],
        )
        .unwrap();
        let t = Truncation::finite(vec![0u32], vec![law]).unwrap();
        let z0 = ProbVector::constant(&t, 0.0, BoundaryPolicy::ClampZero);
        let z = iterate_map(&z0, 4000);
        assert!(z.values[0] > 1.0 - 1e-9);

        // {empty 0.25, two at self 0.75}: limit is the quadratic's smaller root
        let law = ExplicitLaw::new(
            &0u32,
            vec![
                (0.25, OffspringConfig::empty()),
                (0.75, OffspringConfig::from_counts(vec![(0u32, 2)])),
            ],
        )
        .unwrap();
        let t = Truncation::finite(vec![0u32], vec![law]).unwrap();
        let z0 = ProbVector::constant(&t, 0.0, BoundaryPolicy::ClampZero);
        let z = iterate_map(&z0, 5000);
        // oracle: solve 0.75 z^2 - z + 0.25 = 0 -> (1 - 0.5)/1.5 = 1/3
        let disc = (1.0f64 - 4.0 * 0.75 * 0.25).sqrt();
        let root = (1.0 - disc) / (2.0 * 0.75);
        assert!((z.values[0] - root).abs() < 1e-10);
        assert!((root - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn iterate_from_one_stays_one() {
        let c = Comb::new(1, 0.4).unwrap();
        let ball = Truncation::ball(&c, 4).unwrap();
        let one = ProbVector::constant(&ball, 1.0, BoundaryPolicy::ClampOne);
        let z = iterate_map(&one, 50);
        assert!(z.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn directed_rounding_brackets_nearest() {
        let c = Comb::new(1, 0.35).unwrap();
        let ball = Truncation::ball(&c, 6).unwrap();
        let n = ball.len();
        let mut rng = SplitMix64::new(9);
        let src: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let mut near = vec![0.0; n];
        let mut down = vec![0.0; n];
        let mut up = vec![0.0; n];
        ball.sweep(&src, &|_| 0.7, None, Rounding::Nearest, &mut near);
        ball.sweep(&src, &|_| 0.7, None, Rounding::Down, &mut down);
        ball.sweep(&src, &|_| 0.7, None, Rounding::Up, &mut up);
        for i in 0..n {
            assert!(down[i] <= near[i] && near[i] <= up[i]);
            assert!(up[i] <= 1.0 && down[i] >= 0.0);
        }
    }

    #[test]
    fn finite_model_irreducibility() {
        let law_a = ExplicitLaw::new(
            &0u32,
            vec![
                (0.5, OffspringConfig::empty()),
                (0.5, OffspringConfig::from_counts(vec![(1u32, 1)])),
            ],
        )
        .unwrap();
        let law_b = ExplicitLaw::new(
            &1u32,
            vec![
                (0.5, OffspringConfig::empty()),
                (0.5, OffspringConfig::from_counts(vec![(0u32, 1)])),
            ],
        )
        .unwrap();
        let t = Truncation::finite(vec![0u32, 1u32], vec![law_a, law_b]).unwrap();
        assert!(t.is_irreducible());

        let law_a = ExplicitLaw::new(
            &0u32,
            vec![
                (0.5, OffspringConfig::empty()),
                (0.5, OffspringConfig::from_counts(vec![(1u32, 1)])),
            ],
        )
        .unwrap();
        let law_b = ExplicitLaw::new(
            &1u32,
            vec![
                (0.5, OffspringConfig::empty()),
                (0.5, OffspringConfig::from_counts(vec![(1u32, 2)])),
            ],
        )
        .unwrap();
        let t = Truncation::finite(vec![0u32, 1u32], vec![law_a, law_b]).unwrap();
        assert!(!t.is_irreducible());
    }
}
