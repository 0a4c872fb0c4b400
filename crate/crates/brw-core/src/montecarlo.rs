//! Generation-based simulator of the discrete-time counterpart.
//!
//! Trials are independent with per-trial RNG streams derived from
//! (seed, trial index), so parallel or re-ordered execution is bit-identical
//! to sequential. A trial that hits a cap is recorded as censored, never
//! discarded.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::geometry::TargetSet;
use crate::graph::{RateGraph, Vertex};
use crate::law::{derive_offspring_law, GeometricLaw, OffspringConfig};
use crate::rng::{SplitMix64, RNG_NAME};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u32,
    pub max_generations: u32,
    /// Per-generation population cap.
    pub particle_cap: u64,
    /// Cap on the distance from the start vertex.
    pub radius_cap: u32,
}

impl SimConfig {
    pub fn new(seed: u64, trials: u32, max_generations: u32) -> Self {
        assert!(trials > 0 && max_generations > 0);
        SimConfig {
            seed,
            trials,
            max_generations,
            particle_cap: 100_000,
            radius_cap: 10_000,
        }
    }

    pub fn rng_name(&self) -> &'static str {
        RNG_NAME
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Outcome {
    Extinct,
    SurvivedHorizon,
    Censored,
}

/// Per-generation occupation multisets of one trial.
#[derive(Debug, Clone)]
pub struct Trajectory<V: Vertex> {
    pub generations: Vec<Vec<(V, u64)>>,
    pub censored: bool,
}

impl<V: Vertex> Trajectory<V> {
    pub fn outcome(&self, horizon: u32) -> Outcome {
        if self.censored {
            Outcome::Censored
        } else if self.generations.last().map(|g| g.is_empty()).unwrap_or(true) {
            Outcome::Extinct
        } else if self.generations.len() as u32 > horizon {
            Outcome::SurvivedHorizon
        } else {
            Outcome::Extinct
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub outcome: Outcome,
    pub hit_target: bool,
    pub generations_run: u32,
}

/// Draws one offspring configuration from the discrete-counterpart law at a
/// vertex (geometric total, i.i.d. placements).
pub fn sample_offspring<V: Vertex>(law: &GeometricLaw<V>, rng: &mut SplitMix64) -> OffspringConfig<V> {
    law.sample(rng)
}

/// Runs one trial from `x0`. Particles are processed in sorted vertex order
/// with fresh draws per particle, so the trajectory is a deterministic
/// function of (seed, trial index). An optional target predicate lets the
/// caller stop early once the target is hit (the hit flag is still exact).
pub fn run_trial<G: RateGraph>(
    graph: &G,
    x0: &G::V,
    cfg: &SimConfig,
    trial: u32,
    target: Option<&TargetSet<G::V>>,
) -> (Trajectory<G::V>, bool) {
    let mut rng = SplitMix64::stream(cfg.seed, trial as u64);
    let mut current: BTreeMap<G::V, u64> = BTreeMap::new();
    current.insert(x0.clone(), 1);
    let mut hit = target.map(|t| t.contains(x0)).unwrap_or(false);
    let mut generations = vec![current.iter().map(|(v, c)| (v.clone(), *c)).collect::<Vec<_>>()];
    let mut censored = false;
    let mut law_cache: BTreeMap<G::V, GeometricLaw<G::V>> = BTreeMap::new();
    for _ in 0..cfg.max_generations {
        if current.is_empty() {
            break;
        }
        let mut next: BTreeMap<G::V, u64> = BTreeMap::new();
        let mut total: u64 = 0;
        'gen: for (v, count) in &current {
            let law = law_cache.entry(v.clone()).or_insert_with(|| {
                derive_offspring_law(&crate::law::RateLaw {
                    at: v.clone(),
                    rates: graph.rates(v),
                    lambda: graph.lambda(),
                })
            });
            for _ in 0..*count {
                let cfg_draw = law.sample(&mut rng);
                for (w, c) in cfg_draw.entries() {
                    if matches!(graph.root_distance(w), Some(d) if d > cfg.radius_cap as u64) {
                        censored = true;
                        break 'gen;
                    }
                    *next.entry(w.clone()).or_default() += *c as u64;
                    total += *c as u64;
                    if total > cfg.particle_cap {
                        censored = true;
                        break 'gen;
                    }
                }
            }
        }
        if censored {
            break;
        }
        if let Some(t) = target {
            if !hit && next.keys().any(|v| t.contains(v)) {
                hit = true;
            }
        }
        generations.push(next.iter().map(|(v, c)| (v.clone(), *c)).collect());
        current = next;
    }
    (
        Trajectory {
            generations,
            censored,
        },
        hit,
    )
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SurvivalEstimate {
    pub trials: u32,
    pub survived: u32,
    pub extinct: u32,
    pub censored: u32,
    /// Censored counted as survived / as dead: both-sided estimates.
    pub survival_rate_upper: f64,
    pub survival_rate_lower: f64,
    pub rng: &'static str,
}

/// Frequency of survival to the horizon, censoring reported both ways.
pub fn survival_frequency<G: RateGraph>(
    graph: &G,
    x0: &G::V,
    cfg: &SimConfig,
) -> SurvivalEstimate {
    let mut survived = 0;
    let mut extinct = 0;
    let mut censored = 0;
    for trial in 0..cfg.trials {
        let (traj, _) = run_trial(graph, x0, cfg, trial, None);
        match traj.outcome(cfg.max_generations) {
            Outcome::SurvivedHorizon => survived += 1,
            Outcome::Extinct => extinct += 1,
            Outcome::Censored => censored += 1,
        }
    }
    let n = cfg.trials as f64;
    SurvivalEstimate {
        trials: cfg.trials,
        survived,
        extinct,
        censored,
        survival_rate_upper: (survived + censored) as f64 / n,
        survival_rate_lower: survived as f64 / n,
        rng: RNG_NAME,
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct NoHitEstimate {
    pub trials: u32,
    pub no_hit: u32,
    pub hit: u32,
    pub censored_unresolved: u32,
    pub horizon: u32,
    /// Unresolved censored trials counted as no-hit / as hit.
    pub frequency_upper: f64,
    pub frequency_lower: f64,
    /// 3-sigma binomial half-width around the point estimate.
    pub three_sigma: f64,
    pub records: Vec<TrialRecord>,
}

/// Frequency of "no particle in the target through the horizon", the Monte
/// Carlo side of the finite-horizon duality with the clamped solver iterate.
pub fn estimate_no_hit<G: RateGraph>(
    graph: &G,
    x0: &G::V,
    target: &TargetSet<G::V>,
    horizon: u32,
    cfg: &SimConfig,
) -> NoHitEstimate {
    let mut cfg = *cfg;
    cfg.max_generations = horizon;
    let mut no_hit = 0;
    let mut hit = 0;
    let mut censored_unresolved = 0;
    let mut records = Vec::with_capacity(cfg.trials as usize);
    for trial in 0..cfg.trials {
        let (traj, was_hit) = run_trial(graph, x0, &cfg, trial, Some(target));
        let outcome = traj.outcome(horizon);
        if was_hit {
            hit += 1;
        } else if traj.censored {
            censored_unresolved += 1;
        } else {
            no_hit += 1;
        }
        records.push(TrialRecord {
            trial,
            outcome,
            hit_target: was_hit,
            generations_run: traj.generations.len() as u32 - 1,
        });
    }
    let n = cfg.trials as f64;
    let p = no_hit as f64 / n;
    NoHitEstimate {
        trials: cfg.trials,
        no_hit,
        hit,
        censored_unresolved,
        horizon,
        frequency_upper: (no_hit + censored_unresolved) as f64 / n,
        frequency_lower: p,
        three_sigma: 3.0 * (p.max(1e-12) * (1.0 - p).max(1e-12) / n).sqrt(),
        records,
    }
}

/// Plug-in total-variation distance between the empirical law of
/// fiber-projected offspring configurations and the exact target law.
pub fn fiber_law_tv<SV: Vertex, TV: Vertex>(
    source_law: &GeometricLaw<SV>,
    map: impl Fn(&SV) -> TV,
    target_law: &GeometricLaw<TV>,
    samples: u32,
    seed: u64,
) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut counts: BTreeMap<OffspringConfig<TV>, u64> = BTreeMap::new();
    for _ in 0..samples {
        let cfg = source_law.sample(&mut rng);
        let projected = crate::projection::project_config(&cfg, &map);
        *counts.entry(projected).or_default() += 1;
    }
    let n = samples as f64;
    let mut tv = 0.0;
    let mut exact_mass_observed = 0.0;
    for (cfg, c) in &counts {
        let exact = target_law.config_prob(cfg);
        exact_mass_observed += exact;
        tv += ((*c as f64 / n) - exact).abs();
    }
    tv += 1.0 - exact_mass_observed; // exact mass on unobserved configs
    Ok(tv / 2.0)
}
