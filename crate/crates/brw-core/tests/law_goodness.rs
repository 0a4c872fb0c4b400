//! Goodness-of-fit of the sampled one-generation law against the closed
//! form: chi-square on the joint (total count, first position) at
//! significance 0.001.

use brw_core::graph::RateGraph;
use brw_core::law::{derive_offspring_law, RateLaw};
use brw_core::rng::SplitMix64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_passes<V: brw_core::graph::Vertex>(law: &RateLaw<V>, seed: u64) -> (f64, f64) {
    let g = derive_offspring_law(law);
    let positions: Vec<V> = g.positions().iter().map(|(v, _)| v.clone()).collect();
    let d = positions.len();
    let n_cap = 5u32;
    // bins: N = 0; (n, first) for n = 1..=n_cap; (tail, first)
    let n_bins = 1 + (n_cap as usize + 1) * d;
    let mut observed = vec![0u64; n_bins];
    let samples = 100_000u32;
    let mut rng = SplitMix64::new(seed);
    for _ in 0..samples {
        let (cfg, first) = g.sample_with_first(&mut rng);
        let n = cfg.total();
        if n == 0 {
            observed[0] += 1;
            continue;
        }
        let fi = positions
            .iter()
            .position(|p| Some(p) == first.as_ref())
            .expect("first position known");
        let ni = (n.min(n_cap + 1) - 1) as usize;
        observed[1 + ni * d + fi] += 1;
    }
    let mut expected = vec![0.0f64; n_bins];
    expected[0] = g.total_count_prob(0);
    for n in 1..=n_cap {
        for (fi, p) in positions.iter().enumerate() {
            expected[1 + (n as usize - 1) * d + fi] = g.total_count_prob(n) * g.position_prob(p);
        }
    }
    for (fi, p) in positions.iter().enumerate() {
        expected[1 + n_cap as usize * d + fi] = g.tail_mass(n_cap) * g.position_prob(p);
    }
    let total: f64 = expected.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    let mut stat = 0.0;
    for i in 0..n_bins {
        let e = expected[i] * samples as f64;
        assert!(e > 5.0, "bin {i} too thin: {e}");
        let o = observed[i] as f64;
        stat += (o - e) * (o - e) / e;
    }
    let dist = ChiSquared::new((n_bins - 1) as f64).unwrap();
    let p_value = 1.0 - dist.cdf(stat);
    (stat, p_value)
}

#[test]
fn tree_law_chi_square() {
    let tree = brw_core::geometry::tree::RegularTree::new(3, 0.35).unwrap();
    let at = brw_core::geometry::tree::TreeVertex::root();
    let law = RateLaw {
        rates: tree.rates(&at),
        at,
        lambda: 0.35,
    };
    let (stat, p) = chi_square_passes(&law, 0xABCD);
    assert!(p >= 0.001, "chi2 = {stat}, p = {p}");
}

#[test]
fn comb_laws_chi_square() {
    let comb = brw_core::geometry::comb::Comb::new(1, 0.3).unwrap();
    for at in [
        brw_core::geometry::comb::CombVertex::new(0, 0),
        brw_core::geometry::comb::CombVertex::new(2, 3),
    ] {
        let law = RateLaw {
            rates: comb.rates(&at),
            at,
            lambda: 0.3,
        };
        let (stat, p) = chi_square_passes(&law, 0x1234 + at.y as u64);
        assert!(p >= 0.001, "at {at}: chi2 = {stat}, p = {p}");
    }
}
