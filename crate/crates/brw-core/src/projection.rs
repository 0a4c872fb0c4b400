//! Projections of one BRW onto another: surjective vertex maps whose
//! fiber-summed rates reproduce the target rates exactly. Realizations push
//! forward, so extinction probabilities transport: the probability of
//! extinction in a fiber union equals the target probability at the image
//! vertex. The rate-sum identity is checked in exact rational arithmetic
//! (every f64 rate is an exact dyadic).

use std::sync::Arc;

use num::BigRational;
use num::FromPrimitive;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::comb::{CombVertex, Star};
use crate::geometry::sets::TargetSet;
use crate::geometry::tree::TreeVertex;
use crate::geometry::variants::{BVertex, HalfCombB, LineVertex, SplitVertex};
use crate::graph::{RateGraph, Vertex};
use crate::law::OffspringConfig;
use crate::solver::{extinction_bracket, Bracket, RimClamps, SolveSettings};
use crate::truncation::Truncation;

pub struct ProjectionMap<S: RateGraph, T: RateGraph> {
    pub name: String,
    pub source: S,
    pub target: T,
    map: Arc<dyn Fn(&S::V) -> T::V + Send + Sync>,
}

impl<S: RateGraph, T: RateGraph> ProjectionMap<S, T> {
    pub fn new(
        name: impl Into<String>,
        source: S,
        target: T,
        map: impl Fn(&S::V) -> T::V + Send + Sync + 'static,
    ) -> Self {
        ProjectionMap {
            name: name.into(),
            source,
            target,
            map: Arc::new(map),
        }
    }

    pub fn apply(&self, v: &S::V) -> T::V {
        (self.map)(v)
    }

    /// Pulls a target set back to the source: the fiber union g^{-1}(A).
    pub fn pull_back(&self, set: &TargetSet<T::V>) -> TargetSet<S::V> {
        let map = Arc::clone(&self.map);
        let inner = set.clone();
        TargetSet::new(format!("g^-1({})", inner.name), move |v| {
            inner.contains(&map(v))
        })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProjectionReport {
    pub map_name: String,
    pub radius: u32,
    pub sources_checked: usize,
    pub exact_pass: bool,
    pub surjective_on_ball: bool,
}

/// Verifies the rate-sum identity exactly for every source vertex in the
/// radius-R ball: the fiber sums of outgoing rates equal the target rates at
/// the image, as rationals. The first violation is reported with both sides.
///
/// The ball is walked level by level with parent exclusion, never
/// materialized: the shipped source families are trees apart from
/// self-loops, so no other revisits occur (a within-level collision would
/// still be caught by the dedup).
pub fn check_projection<S: RateGraph, T: RateGraph>(
    map: &ProjectionMap<S, T>,
    radius: u32,
) -> Result<ProjectionReport> {
    let rat = |x: f64| BigRational::from_f64(x).expect("finite rate");
    let check_one = |x: &S::V| -> Result<()> {
        let gx = map.apply(x);
        let mut fiber: BTreeMap<T::V, BigRational> = BTreeMap::new();
        for (z, k) in map.source.rates(x) {
            *fiber
                .entry(map.apply(&z))
                .or_insert_with(|| BigRational::from_integer(0.into())) += rat(k);
        }
        let mut target_row: BTreeMap<T::V, BigRational> = BTreeMap::new();
        for (y, k) in map.target.rates(&gx) {
            *target_row
                .entry(y)
                .or_insert_with(|| BigRational::from_integer(0.into())) += rat(k);
        }
        if fiber != target_row {
            // find a witness coordinate
            let mut keys: Vec<&T::V> = fiber.keys().chain(target_row.keys()).collect();
            keys.sort();
            keys.dedup();
            let zero = BigRational::from_integer(0.into());
            for y in keys {
                let lhs = fiber.get(y).unwrap_or(&zero);
                let rhs = target_row.get(y).unwrap_or(&zero);
                if lhs != rhs {
                    return Err(Error::ProjectionViolation {
                        x: x.to_string(),
                        y: y.to_string(),
                        lhs: lhs.to_string(),
                        rhs: rhs.to_string(),
                    });
                }
            }
        }
        Ok(())
    };

    let mut image: std::collections::HashSet<T::V> = std::collections::HashSet::new();
    let root = map.source.root();
    check_one(&root)?;
    image.insert(map.apply(&root));
    let mut checked = 1usize;
    let mut level: Vec<(S::V, Option<S::V>)> = vec![(root, None)];
    for _ in 0..radius {
        let mut next: Vec<(S::V, Option<S::V>)> = Vec::new();
        for (v, parent) in &level {
            for (w, _) in map.source.rates(v) {
                if Some(&w) != parent.as_ref() && w != *v {
                    next.push((w, Some(v.clone())));
                }
            }
        }
        next.sort();
        next.dedup_by(|a, b| a.0 == b.0);
        for (w, _) in &next {
            check_one(w)?;
            image.insert(map.apply(w));
        }
        checked += next.len();
        level = next;
    }
    // surjectivity onto the target ball
    let tgt_ball = Truncation::ball(&map.target, radius)?;
    let surjective = tgt_ball.verts.iter().all(|y| image.contains(y));
    Ok(ProjectionReport {
        map_name: map.name.clone(),
        radius,
        sources_checked: checked,
        exact_pass: true,
        surjective_on_ball: surjective,
    })
}

/// Pushes a particle configuration forward: fiber-summed counts.
pub fn project_config<SV: Vertex, TV: Vertex>(
    config: &OffspringConfig<SV>,
    map: impl Fn(&SV) -> TV,
) -> OffspringConfig<TV> {
    OffspringConfig::from_counts(
        config
            .entries()
            .iter()
            .map(|(v, c)| (map(v), *c))
            .collect(),
    )
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TransportReport {
    pub map_name: String,
    pub set_name: String,
    pub source_radius: u32,
    pub target_radius: u32,
    pub source_bracket: (f64, f64),
    pub target_bracket: (f64, f64),
    pub overlap: bool,
    pub conclusive: bool,
}

/// Computes a bracket of the source extinction probability in the fiber
/// union g^{-1}(A) and of the target probability in A, at the respective
/// roots, and reports whether they intersect. Clamp tables are supplied per
/// side (plain tables are always valid).
#[allow(clippy::too_many_arguments)]
pub fn check_q_transport<S: RateGraph, T: RateGraph>(
    map: &ProjectionMap<S, T>,
    target_set: &TargetSet<T::V>,
    source_radius: u32,
    target_radius: u32,
    source_clamps: impl FnOnce(&[S::V]) -> RimClamps,
    target_clamps: impl FnOnce(&[T::V]) -> RimClamps,
    settings: &SolveSettings,
) -> Result<(TransportReport, Bracket<S::V>, Bracket<T::V>)> {
    let src_ball = Truncation::ball(&map.source, source_radius)?;
    let tgt_ball = Truncation::ball(&map.target, target_radius)?;
    let pulled = map.pull_back(target_set);
    let sc = source_clamps(&src_ball.rim);
    let tc = target_clamps(&tgt_ball.rim);
    let (_, src_q) = extinction_bracket(&src_ball, &pulled, &sc, settings)?;
    let (_, tgt_q) = extinction_bracket(&tgt_ball, target_set, &tc, settings)?;
    let s = src_q.at_root();
    let t = tgt_q.at_root();
    let overlap = s.0 <= t.1 && t.0 <= s.1;
    let conclusive = src_q.converged && tgt_q.converged;
    Ok((
        TransportReport {
            map_name: map.name.clone(),
            set_name: target_set.name.clone(),
            source_radius,
            target_radius,
            source_bracket: s,
            target_bracket: t,
            overlap,
            conclusive,
        },
        src_q,
        tgt_q,
    ))
}

/// Canonical quotient of T_m onto the comb with alpha = m-2: the spine goes
/// to the axis, a branch vertex at depth d within its branch goes to tooth
/// height d+1 above the attachment column.
pub fn tree_to_comb(v: &TreeVertex) -> CombVertex {
    match v {
        TreeVertex::Spine(n) => CombVertex::new(*n, 0),
        TreeVertex::Branch { i, word, .. } => CombVertex::new(i - 1, 1 + word.len() as u32),
    }
}

/// The comb has constant row sums alpha+2: everything maps to the singleton.
pub fn comb_to_star(_v: &CombVertex) -> Star {
    Star
}

/// The one-ended comb B projects onto the vertical line by graph distance
/// from its origin.
pub fn b_to_line(v: &BVertex) -> LineVertex {
    LineVertex(HalfCombB::height(v))
}

/// Merging the two shafts recovers the plain comb.
pub fn split_to_comb(v: &SplitVertex) -> CombVertex {
    match v {
        SplitVertex::Axis(x) => CombVertex::new(*x, 0),
        SplitVertex::Tooth(x, h) => CombVertex::new(*x, *h),
        SplitVertex::Shaft(_, h) => CombVertex::new(0, *h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::comb::{Comb, Singleton};
    use crate::geometry::sets::CombSet;
    use crate::geometry::tree::RegularTree;
    use crate::geometry::variants::{SplitComb, VLine};

    #[test]
    fn tree_to_comb_passes_exactly() {
        let map = ProjectionMap::new(
            "tree3->comb1",
            RegularTree::new(3, 0.35).unwrap(),
            Comb::new(1, 0.35).unwrap(),
            tree_to_comb,
        );
        let rep = check_projection(&map, 8).unwrap();
        assert!(rep.exact_pass && rep.surjective_on_ball);
    }

    #[test]
    fn tree4_to_comb2_passes() {
        let map = ProjectionMap::new(
            "tree4->comb2",
            RegularTree::new(4, 0.25).unwrap(),
            Comb::new(2, 0.25).unwrap(),
            tree_to_comb,
        );
        assert!(check_projection(&map, 6).unwrap().exact_pass);
    }

    #[test]
    fn wrong_alpha_fails_with_witness() {
        let map = ProjectionMap::new(
            "tree3->comb2",
            RegularTree::new(3, 0.35).unwrap(),
            Comb::new(2, 0.35).unwrap(),
            tree_to_comb,
        );
        let err = check_projection(&map, 4);
        assert!(matches!(err, Err(Error::ProjectionViolation { .. })), "{err:?}");
    }

    #[test]
    fn comb_to_singleton_passes() {
        let map = ProjectionMap::new(
            "comb1->singleton3",
            Comb::new(1, 0.4).unwrap(),
            Singleton::new(3.0, 0.4),
            comb_to_star,
        );
        assert!(check_projection(&map, 10).unwrap().exact_pass);
    }

    #[test]
    fn b_graph_to_vline_passes() {
        let map = ProjectionMap::new(
            "B(1)->vline(1)",
            HalfCombB::new(1, 0.35).unwrap(),
            VLine::new(1, 0.35).unwrap(),
            b_to_line,
        );
        assert!(check_projection(&map, 12).unwrap().exact_pass);
    }

    #[test]
    fn split_comb_to_comb_passes() {
        let map = ProjectionMap::new(
            "split->comb1",
            SplitComb::new(0.35).unwrap(),
            Comb::new(1, 0.35).unwrap(),
            split_to_comb,
        );
        assert!(check_projection(&map, 10).unwrap().exact_pass);
    }

    #[test]
    fn project_config_fiber_sums() {
        let empty: OffspringConfig<TreeVertex> = OffspringConfig::empty();
        assert!(project_config(&empty, tree_to_comb).is_empty());
        // one particle at y_3 goes to axis position 3
        let cfg = OffspringConfig::from_counts(vec![(TreeVertex::Spine(3), 1)]);
        let out = project_config(&cfg, tree_to_comb);
        assert_eq!(out.entries(), &[(CombVertex::new(3, 0), 1)]);
        // two particles at depth 1 inside the branch at x_2 land at (1, 2)
        let v = TreeVertex::Branch {
            i: 2,
            sub: 0,
            word: vec![0],
        };
        let w = TreeVertex::Branch {
            i: 2,
            sub: 0,
            word: vec![1],
        };
        let cfg = OffspringConfig::from_counts(vec![(v, 1), (w, 1)]);
        let out = project_config(&cfg, tree_to_comb);
        assert_eq!(out.entries(), &[(CombVertex::new(1, 2), 2)]);
        assert_eq!(out.total(), 2);
    }

    #[test]
    fn transport_empty_set_both_one() {
        let map = ProjectionMap::new(
            "tree3->comb1",
            RegularTree::new(3, 0.4).unwrap(),
            Comb::new(1, 0.4).unwrap(),
            tree_to_comb,
        );
        let set = CombSet::Empty.to_target();
        let (rep, _, _) = check_q_transport(
            &map,
            &set,
            5,
            5,
            RimClamps::empty_set_for,
            RimClamps::empty_set_for,
            &SolveSettings::default(),
        )
        .unwrap();
        assert_eq!(rep.source_bracket, (1.0, 1.0));
        assert_eq!(rep.target_bracket, (1.0, 1.0));
        assert!(rep.overlap);
    }
}
