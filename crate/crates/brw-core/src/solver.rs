//! Certified two-sided brackets of extinction probabilities on truncations.
//!
//! Quantities, for a target set A:
//!  - the no-hit vector (radius-ball analog of the probability that A is
//!    never occupied), computed on the A-clamped map;
//!  - the extinction vector q(.,A), its limit under the full map;
//!  - the global vector (A = whole space), the minimal fixed point.
//!
//! Each bracket side is a monotone run whose every accepted endpoint is
//! rigorously on its side of the truth:
//!  - upper runs read rim clamps that dominate the true values and round up.
//!    The true restriction is a sub-solution of any up-clamped map, so the
//!    downward runs from the all-one vector stay above it at every sweep.
//!    The full-map upward run is accepted at bitwise stationarity: its
//!    iterates dominate the corresponding true iterates (the rim clamps
//!    dominate the limit, hence every member of the upward true chain), and
//!    a stationary point extends that induction to every horizon;
//!  - lower runs read rim clamps dominated by the true values and round
//!    down; the upward run is dominated by the restriction of the true
//!    vector at every sweep (the true restriction is a super-solution of the
//!    down-clamped map), and the downward no-hit run is accepted at
//!    stationarity, where down-rounding makes it a certified sub-solution of
//!    the clamped map, which its maximal fixed point — below the true no-hit
//!    vector — dominates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::TargetSet;
use crate::graph::Vertex;
use crate::truncation::{BoundaryPolicy, ProbVector, Rounding, Truncation};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: u32 = 200_000;
pub const FIXED_POINT_TOL: f64 = 1e-9;
pub const CLUSTER_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct SolveSettings {
    /// Sup-norm step threshold for the converged flag.
    pub tol: f64,
    pub max_sweeps: u32,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunStats {
    pub sweeps: u32,
    pub stationary: bool,
    pub final_step: f64,
}

impl RunStats {
    pub fn converged(&self, tol: f64) -> bool {
        self.stationary || self.final_step < tol
    }
}

/// Per-rim-slot clamp tables. Validity contracts:
/// `no_hit_lower[s]` <= the true no-hit value at rim vertex s,
/// `lower[s]` <= q(s, A) and `upper[s]` >= q(s, A).
#[derive(Debug, Clone)]
pub struct RimClamps {
    pub no_hit_lower: Arc<Vec<f64>>,
    pub lower: Arc<Vec<f64>>,
    pub upper: Arc<Vec<f64>>,
}

impl RimClamps {
    /// The uninformed policy: 0 below, 1 above. Always valid.
    pub fn plain(rim_len: usize) -> Self {
        RimClamps {
            no_hit_lower: Arc::new(vec![0.0; rim_len]),
            lower: Arc::new(vec![0.0; rim_len]),
            upper: Arc::new(vec![1.0; rim_len]),
        }
    }

    /// All-one clamps: exact for the empty target set.
    pub fn empty_set(rim_len: usize) -> Self {
        RimClamps {
            no_hit_lower: Arc::new(vec![1.0; rim_len]),
            lower: Arc::new(vec![1.0; rim_len]),
            upper: Arc::new(vec![1.0; rim_len]),
        }
    }

    pub fn plain_for<T>(rim: &[T]) -> Self {
        Self::plain(rim.len())
    }

    pub fn empty_set_for<T>(rim: &[T]) -> Self {
        Self::empty_set(rim.len())
    }
}

#[derive(Debug, Clone)]
pub struct Bracket<V: Vertex> {
    pub set_name: String,
    pub lower: ProbVector<V>,
    pub upper: ProbVector<V>,
    pub radius: u32,
    pub lower_stats: RunStats,
    pub upper_stats: RunStats,
    pub converged: bool,
}

impl<V: Vertex> Bracket<V> {
    pub fn width(&self) -> f64 {
        self.lower
            .values
            .iter()
            .zip(&self.upper.values)
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max)
    }

    pub fn at(&self, v: &V) -> Result<(f64, f64)> {
        Ok((self.lower.get(v)?, self.upper.get(v)?))
    }

    pub fn at_root(&self) -> (f64, f64) {
        (self.lower.values[0], self.upper.values[0])
    }

    pub fn iterations(&self) -> u32 {
        self.lower_stats.sweeps + self.upper_stats.sweeps
    }

    pub fn contains(&self, v: &V, value: f64) -> Result<bool> {
        let (lo, hi) = self.at(v)?;
        Ok(lo <= value && value <= hi)
    }

    /// Certified strict order: self < other at v when the brackets are
    /// disjoint with self below.
    pub fn certified_below(&self, other: &Bracket<V>, v: &V) -> Result<bool> {
        Ok(self.at(v)?.1 < other.at(v)?.0 && self.converged && other.converged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

struct Run {
    values: Vec<f64>,
    stats: RunStats,
}

/// Monotone sweep loop. The per-sweep direction is asserted exactly; a
/// violation is a certification bug, not a numerical hiccup.
fn run_monotone<V: Vertex>(
    trunc: &Truncation<V>,
    start: Vec<f64>,
    rim: &[f64],
    pinned: Option<&[bool]>,
    mode: Rounding,
    dir: Direction,
    settings: &SolveSettings,
) -> Result<Run> {
    let mut src = start;
    let mut dst = vec![0.0; src.len()];
    let rim_fn = |s: usize| rim[s];
    let mut sweeps = 0;
    let mut stats = RunStats {
        sweeps: 0,
        stationary: false,
        final_step: f64::INFINITY,
    };
    while sweeps < settings.max_sweeps {
        let (step, same) = trunc.sweep(&src, &rim_fn, pinned, mode, &mut dst);
        sweeps += 1;
        for i in 0..src.len() {
            let ok = match dir {
                Direction::Down => dst[i] <= src[i],
                Direction::Up => dst[i] >= src[i],
            };
            if !ok {
                return Err(Error::Certificate(format!(
                    "monotone {dir:?} run violated at {} (sweep {sweeps}): {} -> {}",
                    trunc.verts[i], src[i], dst[i]
                )));
            }
        }
        std::mem::swap(&mut src, &mut dst);
        stats.final_step = step;
        if same {
            stats.stationary = true;
            break;
        }
    }
    stats.sweeps = sweeps;
    Ok(Run { values: src, stats })
}

fn pinned_mask<V: Vertex>(trunc: &Truncation<V>, set: &TargetSet<V>) -> Vec<bool> {
    trunc.verts.iter().map(|v| set.contains(v)).collect()
}

/// Widen a finished bracket outward by a few ulps so that float rounding of
/// reference constants can never flip a containment verdict, and clamp to
/// [0,1].
fn round_outward(lower: &mut [f64], upper: &mut [f64]) {
    // exact 0 and 1 endpoints stay exact (they come from pinning or from a
    // certified chain that reached the boundary)
    for l in lower.iter_mut() {
        if *l > 0.0 && *l < 1.0 {
            *l = f64::from_bits(l.to_bits().saturating_sub(4)).max(0.0);
        }
    }
    for u in upper.iter_mut() {
        if *u > 0.0 && *u < 1.0 {
            *u = f64::from_bits(u.to_bits() + 4).min(1.0);
        }
    }
}

/// The n-th iterate of the A-clamped map started from the all-one vector
/// with ClampOne boundary, in plain arithmetic. For n <= R this is the exact
/// finite-horizon no-hit probability (the boundary is never reached from the
/// root), the quantity the Monte Carlo duality checks estimate.
pub fn no_hit_iterate<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    set: &TargetSet<V>,
    n: u32,
) -> ProbVector<V> {
    let pinned = pinned_mask(trunc, set);
    let mut src = vec![1.0; trunc.len()];
    let mut dst = vec![0.0; trunc.len()];
    for _ in 0..n {
        trunc.sweep(&src, &|_| 1.0, Some(&pinned), Rounding::Nearest, &mut dst);
        std::mem::swap(&mut src, &mut dst);
    }
    ProbVector {
        trunc: Arc::clone(trunc),
        values: src,
        boundary: BoundaryPolicy::ClampOne,
    }
}

/// Raw no-hit runs: (lower, upper), unrounded endpoints for chaining.
fn no_hit_runs<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    set: &TargetSet<V>,
    clamps: &RimClamps,
    settings: &SolveSettings,
) -> Result<(Run, Run)> {
    let pinned = pinned_mask(trunc, set);
    let ones = vec![1.0; trunc.len()];

    let upper = run_monotone(
        trunc,
        ones.clone(),
        &clamps.upper,
        Some(&pinned),
        Rounding::Up,
        Direction::Down,
        settings,
    )?;

    // Downward run is tight but certified only at stationarity (there the
    // down-rounded endpoint is a sub-solution of the clamped map, hence
    // below its maximal fixed point, which is dominated by the true no-hit
    // vector). Otherwise fall back to the upward run from zero, certified at
    // every sweep but converging to the smaller die-out-without-hitting
    // probability.
    let mut lower = run_monotone(
        trunc,
        ones,
        &clamps.no_hit_lower,
        Some(&pinned),
        Rounding::Down,
        Direction::Down,
        settings,
    )?;
    if !lower.stats.stationary {
        lower = run_monotone(
            trunc,
            vec![0.0; trunc.len()],
            &clamps.no_hit_lower,
            Some(&pinned),
            Rounding::Down,
            Direction::Up,
            settings,
        )?;
    }
    Ok((lower, upper))
}

/// Bracket of the no-hit vector (A-coordinates pinned to 0, downward from
/// the all-one vector on the A-clamped map).
pub fn no_hit_bracket<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    set: &TargetSet<V>,
    clamps: &RimClamps,
    settings: &SolveSettings,
) -> Result<Bracket<V>> {
    let (lower, upper) = no_hit_runs(trunc, set, clamps, settings)?;
    let q0_clamps = RimClamps {
        no_hit_lower: Arc::clone(&clamps.no_hit_lower),
        lower: Arc::clone(&clamps.no_hit_lower),
        upper: Arc::clone(&clamps.upper),
    };
    finish_bracket(trunc, set, lower, upper, &q0_clamps, settings)
}

/// Bracket of q(.,A): full-map runs started from the no-hit run endpoints.
pub fn extinction_bracket<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    set: &TargetSet<V>,
    clamps: &RimClamps,
    settings: &SolveSettings,
) -> Result<(Bracket<V>, Bracket<V>)> {
    let (q0_lower, q0_upper) = no_hit_runs(trunc, set, clamps, settings)?;

    // lower: upward from the no-hit lower side; certified at every sweep.
    let lower = run_monotone(
        trunc,
        q0_lower.values.clone(),
        &clamps.lower,
        None,
        Rounding::Down,
        Direction::Up,
        settings,
    )?;

    // upper candidate 1: downward from one; certified at every sweep, but
    // informative only where the rim clamps dip below one.
    let upper_down = run_monotone(
        trunc,
        vec![1.0; trunc.len()],
        &clamps.upper,
        None,
        Rounding::Up,
        Direction::Down,
        settings,
    )?;
    // upper candidate 2: upward from the no-hit upper side; certified at
    // bitwise stationarity.
    let upper_up = run_monotone(
        trunc,
        q0_upper.values.clone(),
        &clamps.upper,
        None,
        Rounding::Up,
        Direction::Up,
        settings,
    )?;

    let mut upper = upper_down;
    if upper_up.stats.stationary {
        for i in 0..upper.values.len() {
            if upper_up.values[i] < upper.values[i] {
                upper.values[i] = upper_up.values[i];
            }
        }
        upper.stats.sweeps += upper_up.stats.sweeps;
    }

    let q0_clamps = RimClamps {
        no_hit_lower: Arc::clone(&clamps.no_hit_lower),
        lower: Arc::clone(&clamps.no_hit_lower),
        upper: Arc::clone(&clamps.upper),
    };
    let q0 = finish_bracket(trunc, set, q0_lower, q0_upper, &q0_clamps, settings)?;
    let q = finish_bracket(trunc, set, lower, upper, clamps, settings)?;
    Ok((q0, q))
}

/// Bracket of the global extinction vector: A = the whole truncation.
pub fn global_extinction_bracket<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    clamps: &RimClamps,
    settings: &SolveSettings,
) -> Result<Bracket<V>> {
    let full = TargetSet::new("full", |_: &V| true);
    let (_, q) = extinction_bracket(trunc, &full, clamps, settings)?;
    Ok(q)
}

fn finish_bracket<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    set: &TargetSet<V>,
    lower: Run,
    upper: Run,
    clamps: &RimClamps,
    settings: &SolveSettings,
) -> Result<Bracket<V>> {
    let mut lo = lower.values;
    let mut hi = upper.values;
    round_outward(&mut lo, &mut hi);
    for i in 0..lo.len() {
        if lo[i] > hi[i] {
            return Err(Error::Certificate(format!(
                "bracket sides crossed at {}: {} > {}",
                trunc.verts[i], lo[i], hi[i]
            )));
        }
    }
    let converged =
        lower.stats.converged(settings.tol) && upper.stats.converged(settings.tol);
    Ok(Bracket {
        set_name: set.name.clone(),
        lower: ProbVector {
            trunc: Arc::clone(trunc),
            values: lo,
            boundary: BoundaryPolicy::ClampTable(Arc::clone(&clamps.lower)),
        },
        upper: ProbVector {
            trunc: Arc::clone(trunc),
            values: hi,
            boundary: BoundaryPolicy::ClampTable(Arc::clone(&clamps.upper)),
        },
        radius: trunc.radius,
        lower_stats: lower.stats,
        upper_stats: upper.stats,
        converged,
    })
}

/// BFS distance from x to the in-truncation part of A; `None` encodes
/// "unreachable within the truncation", a certified lower bound of R+1.
pub fn distance<V: Vertex>(
    trunc: &Truncation<V>,
    x: &V,
    set: &TargetSet<V>,
) -> Result<Option<u32>> {
    let i = trunc.position(x)?;
    Ok(trunc.distance_to_set(&|v| set.contains(v))[i])
}

/// Exact finite-horizon locality: after the no-hit vector reaches bitwise
/// stationarity, n applications of the full map leave every coordinate at
/// distance >= n from A bit-identical. Runs in plain arithmetic; requires
/// stationarity (reported as an error otherwise, never as a silent pass).
pub fn check_locality<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    set: &TargetSet<V>,
    n: u32,
    settings: &SolveSettings,
) -> Result<bool> {
    let pinned = pinned_mask(trunc, set);
    let base = run_monotone(
        trunc,
        vec![1.0; trunc.len()],
        &vec![1.0; trunc.rim.len()],
        Some(&pinned),
        Rounding::Nearest,
        Direction::Down,
        settings,
    )?;
    if !base.stats.stationary {
        return Err(Error::Certificate(
            "no-hit iteration did not reach float stationarity".into(),
        ));
    }
    let dist = trunc.distance_to_set(&|v| set.contains(v));
    let mut src = base.values.clone();
    let mut dst = vec![0.0; src.len()];
    for step in 1..=n {
        trunc.sweep(&src, &|_| 1.0, None, Rounding::Nearest, &mut dst);
        std::mem::swap(&mut src, &mut dst);
        for i in 0..src.len() {
            let far_enough = match dist[i] {
                Some(d) => d >= step,
                None => true,
            };
            if far_enough && src[i].to_bits() != base.values[i].to_bits() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A fixed point found by iteration, with the number of starts that reached
/// it and the cluster diameter.
#[derive(Debug, Clone)]
pub struct FoundFixedPoint {
    pub values: Vec<f64>,
    pub basin_count: usize,
    pub diameter: f64,
}

/// Iterates to convergence from random sub-solutions plus {0, 1} on a finite
/// irreducible model and clusters the limits.
pub fn enumerate_fixed_points_finite<V: Vertex>(
    trunc: &Arc<Truncation<V>>,
    starts: u32,
    seed: u64,
    settings: &SolveSettings,
) -> Result<Vec<FoundFixedPoint>> {
    if !trunc.rim.is_empty() {
        return Err(Error::InvalidParam(
            "fixed-point enumeration needs a finite model, not a truncation".into(),
        ));
    }
    if !trunc.is_irreducible() {
        return Err(Error::Reducible(
            "the two-point fixed-point law needs strong connectivity".into(),
        ));
    }
    let n = trunc.len();
    let mut rng = crate::rng::SplitMix64::new(seed);
    let mut start_points: Vec<Vec<f64>> = vec![vec![0.0; n], vec![1.0; n]];
    let mut tries = 0;
    while start_points.len() < (starts as usize + 2) && tries < starts * 200 {
        tries += 1;
        let z: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let mut gz = vec![0.0; n];
        trunc.sweep(&z, &|_| 1.0, None, Rounding::Nearest, &mut gz);
        if z.iter().zip(&gz).all(|(a, b)| b >= a) {
            start_points.push(z);
        }
    }
    let mut limits: Vec<Vec<f64>> = Vec::new();
    for z0 in start_points {
        let mut src = z0;
        let mut dst = vec![0.0; n];
        for _ in 0..settings.max_sweeps {
            let (step, same) = trunc.sweep(&src, &|_| 1.0, None, Rounding::Nearest, &mut dst);
            std::mem::swap(&mut src, &mut dst);
            if same || step < settings.tol {
                break;
            }
        }
        limits.push(src);
    }
    // centroid-linkage clustering at the fixed radius
    let mut clusters: Vec<(Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    for lim in limits {
        let mut placed = false;
        for (centroid, members) in clusters.iter_mut() {
            let d = centroid
                .iter()
                .zip(&lim)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if d <= CLUSTER_RADIUS {
                members.push(lim.clone());
                for i in 0..n {
                    centroid[i] =
                        members.iter().map(|m| m[i]).sum::<f64>() / members.len() as f64;
                }
                placed = true;
                break;
            }
        }
        if !placed {
            clusters.push((lim.clone(), vec![lim]));
        }
    }
    let mut out: Vec<FoundFixedPoint> = clusters
        .into_iter()
        .map(|(centroid, members)| {
            let diameter = members
                .iter()
                .flat_map(|a| {
                    members.iter().map(move |b| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (x - y).abs())
                            .fold(0.0, f64::max)
                    })
                })
                .fold(0.0, f64::max);
            FoundFixedPoint {
                values: centroid,
                basin_count: members.len(),
                diameter,
            }
        })
        .collect();
    out.sort_by(|a, b| a.values[0].partial_cmp(&b.values[0]).unwrap());
    Ok(out)
}
