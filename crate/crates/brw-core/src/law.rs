//! Offspring laws and the generating function.
//!
//! Two law kinds: explicit finite-support laws (finite models) and the
//! closed-form law of the discrete-time counterpart of a rate model, where a
//! unit-rate death competes with birth clocks of total rate `lambda * k_x`.
//! The total offspring count is geometric, P(N=n) = (1/(1+s)) (s/(1+s))^n
//! with s = lambda * k_x, positions i.i.d. proportional to k_xy, and the
//! generating function has the closed form
//! G(z|x) = 1 / (1 + lambda * sum_y k_xy (1 - z(y))).

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::rng::SplitMix64;

pub const LAW_NORMALIZATION_TOL: f64 = 1e-12;

/// A finite multiset of children positions; counts >= 1, total finite.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OffspringConfig<V: Vertex>(Vec<(V, u32)>);

impl<V: Vertex> OffspringConfig<V> {
    pub fn empty() -> Self {
        OffspringConfig(Vec::new())
    }

    pub fn from_counts(mut counts: Vec<(V, u32)>) -> Self {
        counts.retain(|(_, c)| *c > 0);
        counts.sort();
        let mut merged: Vec<(V, u32)> = Vec::with_capacity(counts.len());
        for (v, c) in counts {
            match merged.last_mut() {
                Some((w, m)) if *w == v => *m += c,
                _ => merged.push((v, c)),
            }
        }
        OffspringConfig(merged)
    }

    pub fn entries(&self) -> &[(V, u32)] {
        &self.0
    }

    /// Total number of children.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Explicit finite-support reproduction law.
#[derive(Debug, Clone)]
pub struct ExplicitLaw<V: Vertex> {
    atoms: Vec<(f64, OffspringConfig<V>)>,
}

impl<V: Vertex> ExplicitLaw<V> {
    /// Atoms are sorted by (total size, config) and must be distinct; the
    /// probabilities must sum to 1 within 1e-12.
    pub fn new(at: &V, mut atoms: Vec<(f64, OffspringConfig<V>)>) -> Result<Self> {
        atoms.sort_by(|a, b| {
            (a.1.total(), &a.1)
                .cmp(&(b.1.total(), &b.1))
        });
        for pair in atoms.windows(2) {
            if pair[0].1 == pair[1].1 {
                return Err(Error::InvalidParam(format!(
                    "duplicate offspring config in law at {at}"
                )));
            }
        }
        let sum: f64 = atoms.iter().map(|(p, _)| *p).sum();
        if !((sum - 1.0).abs() <= LAW_NORMALIZATION_TOL) || atoms.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::InvalidLaw {
                vertex: at.to_string(),
                sum,
            });
        }
        Ok(ExplicitLaw { atoms })
    }

    pub fn atoms(&self) -> &[(f64, OffspringConfig<V>)] {
        &self.atoms
    }

    /// Expected number of children sent to `y`.
    pub fn mean_to(&self, y: &V) -> f64 {
        self.atoms
            .iter()
            .map(|(p, f)| {
                p * f
                    .entries()
                    .iter()
                    .filter(|(v, _)| v == y)
                    .map(|(_, c)| *c as f64)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> OffspringConfig<V> {
        let u = rng.next_f64();
        let mut acc = 0.0;
        for (p, f) in &self.atoms {
            acc += p;
            if u < acc {
                return f.clone();
            }
        }
        self.atoms.last().map(|(_, f)| f.clone()).unwrap_or_else(OffspringConfig::empty)
    }
}

/// The rate-derived law at one vertex.
#[derive(Debug, Clone)]
pub struct RateLaw<V: Vertex> {
    pub at: V,
    pub rates: Vec<(V, f64)>,
    pub lambda: f64,
}

impl<V: Vertex> RateLaw<V> {
    pub fn total_rate(&self) -> f64 {
        self.rates.iter().map(|(_, k)| *k).sum()
    }

    /// s = lambda * k_x, the mean total offspring.
    pub fn mean_total(&self) -> f64 {
        self.lambda * self.total_rate()
    }
}

/// Either law kind, for call sites generic over the model.
#[derive(Debug, Clone)]
pub enum Law<V: Vertex> {
    Explicit(ExplicitLaw<V>),
    Rate(RateLaw<V>),
}

/// Evaluates the generating function coordinate G(z|x). The lookup must
/// resolve every vertex the law references.
pub fn eval_genfun<V: Vertex>(law: &Law<V>, z: impl Fn(&V) -> Option<f64>) -> Result<f64> {
    match law {
        Law::Explicit(l) => {
            let mut out = 0.0;
            for (p, f) in &l.atoms {
                let mut term = *p;
                for (v, c) in f.entries() {
                    let zv = z(v).ok_or_else(|| Error::TruncationIncomplete {
                        vertex: v.to_string(),
                    })?;
                    term *= zv.powi(*c as i32);
                }
                out += term;
            }
            Ok(out)
        }
        Law::Rate(l) => {
            let mut acc = 0.0;
            for (v, k) in &l.rates {
                let zv = z(v).ok_or_else(|| Error::TruncationIncomplete {
                    vertex: v.to_string(),
                })?;
                acc += k * (1.0 - zv);
            }
            Ok(1.0 / (1.0 + l.lambda * acc))
        }
    }
}

/// Sampling/enumeration handle for the discrete counterpart of a rate law.
#[derive(Debug, Clone)]
pub struct GeometricLaw<V: Vertex> {
    pub at: V,
    positions: Vec<(V, f64)>, // (y, k_xy / k_x)
    /// s / (1 + s) with s = lambda * k_x; zero offspring has probability 1 - ratio.
    ratio: f64,
}

/// Builds the discrete-counterpart law: geometric total, i.i.d. placements.
/// k_x = 0 yields the degenerate always-empty law (no error).
pub fn derive_offspring_law<V: Vertex>(r: &RateLaw<V>) -> GeometricLaw<V> {
    let k = r.total_rate();
    let s = r.lambda * k;
    let positions = if k > 0.0 {
        r.rates.iter().map(|(v, kxy)| (v.clone(), kxy / k)).collect()
    } else {
        Vec::new()
    };
    GeometricLaw {
        at: r.at.clone(),
        positions,
        ratio: s / (1.0 + s),
    }
}

impl<V: Vertex> GeometricLaw<V> {
    /// P(N = n).
    pub fn total_count_prob(&self, n: u32) -> f64 {
        (1.0 - self.ratio) * self.ratio.powi(n as i32)
    }

    /// P(N > n), the explicit tail mass of an enumeration cut at n.
    pub fn tail_mass(&self, n: u32) -> f64 {
        self.ratio.powi(n as i32 + 1)
    }

    /// P(position = y) for one child.
    pub fn position_prob(&self, y: &V) -> f64 {
        self.positions
            .iter()
            .find(|(v, _)| v == y)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }

    pub fn positions(&self) -> &[(V, f64)] {
        &self.positions
    }

    /// Enumerates all configs of total size <= max_total with their exact
    /// probabilities (geometric total x multinomial placement); the remaining
    /// mass is `tail_mass(max_total)`.
    pub fn enumerate_configs(&self, max_total: u32) -> Vec<(OffspringConfig<V>, f64)> {
        let d = self.positions.len();
        let mut out = vec![(OffspringConfig::empty(), self.total_count_prob(0))];
        if d == 0 {
            return out;
        }
        // compositions of n over d slots, probability multinomial(n; c) prod p^c
        let mut counts = vec![0u32; d];
        for n in 1..=max_total {
            let pn = self.total_count_prob(n);
            self.walk(0, n, pn, &mut counts, &mut out);
        }
        out
    }

    fn walk(
        &self,
        slot: usize,
        remaining: u32,
        pn: f64,
        counts: &mut Vec<u32>,
        out: &mut Vec<(OffspringConfig<V>, f64)>,
    ) {
        if slot + 1 == self.positions.len() {
            counts[slot] = remaining;
            let mut prob = pn * multinomial(counts);
            for (i, (_, p)) in self.positions.iter().enumerate() {
                prob *= p.powi(counts[i] as i32);
            }
            let cfg = OffspringConfig::from_counts(
                self.positions
                    .iter()
                    .zip(counts.iter())
                    .filter(|(_, c)| **c > 0)
                    .map(|((v, _), c)| (v.clone(), *c))
                    .collect(),
            );
            out.push((cfg, prob));
            counts[slot] = 0;
            return;
        }
        for c in 0..=remaining {
            counts[slot] = c;
            self.walk(slot + 1, remaining - c, pn, counts, out);
        }
        counts[slot] = 0;
    }

    /// Exact probability of one unordered configuration: geometric total
    /// times multinomial placement.
    pub fn config_prob(&self, cfg: &OffspringConfig<V>) -> f64 {
        let n = cfg.total();
        let mut p = self.total_count_prob(n);
        if n == 0 {
            return p;
        }
        let counts: Vec<u32> = cfg.entries().iter().map(|(_, c)| *c).collect();
        p *= multinomial(&counts);
        for (v, c) in cfg.entries() {
            let pv = self.position_prob(v);
            if pv == 0.0 {
                return 0.0;
            }
            p *= pv.powi(*c as i32);
        }
        p
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> OffspringConfig<V> {
        self.sample_with_first(rng).0
    }

    /// Sample keeping the first drawn placement (the ordered draws are
    /// i.i.d., which the one-generation law tests check).
    pub fn sample_with_first(&self, rng: &mut SplitMix64) -> (OffspringConfig<V>, Option<V>) {
        let n = if self.ratio <= 0.0 {
            0
        } else {
            // geometric: N = floor(ln U / ln ratio), U in (0,1]
            (rng.next_f64_open().ln() / self.ratio.ln()).floor() as u64
        };
        if n == 0 {
            return (OffspringConfig::empty(), None);
        }
        let mut counts: Vec<(V, u32)> = Vec::new();
        let mut first = None;
        for i in 0..n {
            let u = rng.next_f64();
            let mut acc = 0.0;
            let mut chosen = self.positions.len() - 1;
            for (j, (_, p)) in self.positions.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = j;
                    break;
                }
            }
            if i == 0 {
                first = Some(self.positions[chosen].0.clone());
            }
            counts.push((self.positions[chosen].0.clone(), 1));
        }
        (OffspringConfig::from_counts(counts), first)
    }
}

fn multinomial(counts: &[u32]) -> f64 {
    // n! / prod c_i! computed as a product of binomials
    let mut acc = 1.0f64;
    let mut seen: u32 = 0;
    for &c in counts {
        for j in 1..=c {
            acc *= (seen + j) as f64 / j as f64;
        }
        seen += c;
    }
    acc
}

/// First moment m_xy = lambda * k_xy of the rate-derived law; the row sum is
/// lambda * k_x.
pub fn derive_mean<V: Vertex>(r: &RateLaw<V>, y: &V) -> f64 {
    r.lambda
        * r.rates
            .iter()
            .filter(|(v, _)| v == y)
            .map(|(_, k)| *k)
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3_interior_law() -> RateLaw<u32> {
        RateLaw {
            at: 0,
            rates: vec![(1, 1.0), (2, 1.0), (3, 1.0)],
            lambda: 0.35,
        }
    }

    #[test]
    fn genfun_at_one_is_one() {
        let law = Law::Rate(t3_interior_law());
        assert_eq!(eval_genfun(&law, |_| Some(1.0)).unwrap(), 1.0);
        let ex = Law::Explicit(
            ExplicitLaw::new(
                &0u32,
                vec![
                    (0.5, OffspringConfig::empty()),
                    (0.5, OffspringConfig::from_counts(vec![(1, 2)])),
                ],
            )
            .unwrap(),
        );
        assert_eq!(eval_genfun(&ex, |_| Some(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn genfun_explicit_polynomial() {
        // {empty w.p. 0.5; two children at y w.p. 0.5}, z(y) = 0.5 -> 0.625
        let ex = Law::Explicit(
            ExplicitLaw::new(
                &0u32,
                vec![
                    (0.5, OffspringConfig::empty()),
                    (0.5, OffspringConfig::from_counts(vec![(1, 2)])),
                ],
            )
            .unwrap(),
        );
        let v = eval_genfun(&ex, |_| Some(0.5)).unwrap();
        assert!((v - 0.625).abs() < 1e-15);
    }

    #[test]
    fn genfun_rate_closed_form() {
        // three rate-1 edges, lambda = 0.35, z = 0 -> 1/2.05
        let law = Law::Rate(t3_interior_law());
        let v = eval_genfun(&law, |_| Some(0.0)).unwrap();
        assert!((v - 1.0 / 2.05).abs() < 1e-15);
    }

    #[test]
    fn genfun_unresolvable_vertex() {
        let law = Law::Rate(t3_interior_law());
        let err = eval_genfun(&law, |v| if *v == 1 { None } else { Some(0.5) });
        assert!(matches!(err, Err(Error::TruncationIncomplete { .. })));
    }

    #[test]
    fn law_not_normalized_rejected() {
        let r = ExplicitLaw::new(
            &0u32,
            vec![
                (0.5, OffspringConfig::empty()),
                (0.4, OffspringConfig::from_counts(vec![(1, 1)])),
            ],
        );
        assert!(matches!(r, Err(Error::InvalidLaw { .. })));
    }

    #[test]
    fn derived_law_zero_lambda() {
        let mut r = t3_interior_law();
        r.lambda = 0.0;
        let g = derive_offspring_law(&r);
        assert_eq!(g.total_count_prob(0), 1.0);
        assert_eq!(derive_mean(&r, &1), 0.0);
    }

    #[test]
    fn derived_law_t3_lambda_035() {
        let g = derive_offspring_law(&t3_interior_law());
        assert!((g.total_count_prob(0) - 1.0 / 2.05).abs() < 1e-12);
        assert!((g.total_count_prob(1) - 1.05 / (2.05 * 2.05)).abs() < 1e-12);
        assert!((derive_mean(&t3_interior_law(), &2) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn derived_law_comb_axis() {
        // comb axis vertex with alpha = 1: rates left 1, right 1, up 1; lambda = 0.3
        let r = RateLaw {
            at: 0u32,
            rates: vec![(1, 1.0), (2, 1.0), (3, 1.0)],
            lambda: 0.3,
        };
        let g = derive_offspring_law(&r);
        assert!((g.total_count_prob(0) - 1.0 / 1.9).abs() < 1e-12);
        for y in [1, 2, 3] {
            assert!((g.position_prob(&y) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_zero_rate_law() {
        let r = RateLaw {
            at: 0u32,
            rates: vec![],
            lambda: 0.5,
        };
        let g = derive_offspring_law(&r);
        assert_eq!(g.total_count_prob(0), 1.0);
        assert_eq!(g.tail_mass(0), 0.0);
    }

    #[test]
    fn closed_form_matches_enumeration_at_cutoffs() {
        let r = t3_interior_law();
        let g = derive_offspring_law(&r);
        let law = Law::Rate(r.clone());
        let z = |v: &u32| Some(match v {
            1 => 0.3,
            2 => 0.75,
            _ => 0.5,
        });
        let exact = eval_genfun(&law, z).unwrap();
        for cutoff in [10u32, 20, 40] {
            let approx: f64 = g
                .enumerate_configs(cutoff)
                .iter()
                .map(|(cfg, p)| {
                    let mut t = *p;
                    for (v, c) in cfg.entries() {
                        t *= z(v).unwrap().powi(*c as i32);
                    }
                    t
                })
                .sum();
            let tail = g.tail_mass(cutoff);
            assert!(
                (exact - approx).abs() <= tail + 1e-13,
                "cutoff {cutoff}: |{exact} - {approx}| > tail {tail}"
            );
            assert!(approx <= exact + 1e-13);
        }
    }

    #[test]
    fn enumeration_mass_accounts_for_tail() {
        let g = derive_offspring_law(&t3_interior_law());
        let mass: f64 = g.enumerate_configs(12).iter().map(|(_, p)| p).sum();
        assert!((mass + g.tail_mass(12) - 1.0).abs() < 1e-12);
    }

    /// Monte Carlo oracle for the closed form, straight from the
    /// continuous-time description: lifetime Exp(1), births on each edge a
    /// Poisson process of rate lambda * k_xy over the lifetime. Gates the
    /// geometric/i.i.d. construction used everywhere else.
    #[test]
    fn competing_exponentials_oracle() {
        let r = t3_interior_law();
        let s = r.mean_total();
        let trials = 1_000_000usize;
        let mut rng = SplitMix64::new(0xC0FFEE);
        let mut zero = 0usize;
        let mut one = 0usize;
        let mut total: u64 = 0;
        let mut per_edge = [0u64; 3];
        for _ in 0..trials {
            let t = -rng.next_f64_open().ln(); // Exp(1) lifetime
            let mut n = 0u64;
            for (i, (_, k)) in r.rates.iter().enumerate() {
                let mean = r.lambda * k * t;
                // Knuth Poisson sampler
                let limit = (-mean).exp();
                let mut prod = rng.next_f64();
                let mut c = 0u64;
                while prod > limit {
                    prod *= rng.next_f64();
                    c += 1;
                }
                n += c;
                per_edge[i] += c;
            }
            total += n;
            if n == 0 {
                zero += 1;
            } else if n == 1 {
                one += 1;
            }
        }
        let g = derive_offspring_law(&r);
        let n = trials as f64;
        let p0 = g.total_count_prob(0);
        let sigma0 = (p0 * (1.0 - p0) / n).sqrt();
        assert!(
            ((zero as f64 / n) - p0).abs() < 3.0 * sigma0 + 1e-9,
            "P(N=0): {} vs {}",
            zero as f64 / n,
            p0
        );
        let p1 = g.total_count_prob(1);
        let sigma1 = (p1 * (1.0 - p1) / n).sqrt();
        assert!(((one as f64 / n) - p1).abs() < 3.0 * sigma1 + 1e-9);
        // mean total = s; position split uniform across the three edges
        let mean = total as f64 / n;
        assert!((mean - s).abs() < 0.01, "mean {mean} vs {s}");
        for c in per_edge {
            let frac = c as f64 / total as f64;
            assert!((frac - 1.0 / 3.0).abs() < 0.005);
        }
    }

    #[test]
    fn geometric_sampler_matches_marginals() {
        let g = derive_offspring_law(&t3_interior_law());
        let mut rng = SplitMix64::new(7);
        let trials = 200_000;
        let mut zero = 0usize;
        for _ in 0..trials {
            if g.sample(&mut rng).is_empty() {
                zero += 1;
            }
        }
        let p0 = g.total_count_prob(0);
        assert!(((zero as f64 / trials as f64) - p0).abs() < 0.004);
    }
}
