//! Critical breeding parameters: closed forms for the shipped families and
//! an empirical two-sided bisection for the local threshold.

use std::sync::Arc;

use serde::Serialize;

use crate::clamps::CombOracle;
use crate::error::{Error, Result};
use crate::geometry::comb::Comb;
use crate::geometry::sets::CombSet;
use crate::solver::{extinction_bracket, SolveSettings};
use crate::truncation::Truncation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    EmpiricalBisection,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPair {
    pub family: String,
    pub lambda_w: f64,
    pub lambda_s: f64,
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub enum Family {
    Tree(u32),
    Comb(u32),
}

/// Closed forms: tree(m) has (1/m, 1/(2 sqrt(m-1))); the comb inherits the
/// weak threshold 1/(alpha+2) from its singleton projection and the local
/// one 1/(2 sqrt(alpha+1)) from the tree quotient (the origin fiber is a
/// single vertex, so local survival transports exactly).
pub fn closed_form(family: Family) -> Result<CriticalPair> {
    match family {
        Family::Tree(m) => {
            if m < 3 {
                return Err(Error::InvalidParam(format!("tree degree {m} < 3")));
            }
            Ok(CriticalPair {
                family: format!("tree({m})"),
                lambda_w: 1.0 / m as f64,
                lambda_s: 1.0 / (2.0 * ((m - 1) as f64).sqrt()),
                source: Source::ClosedForm,
                interval: None,
            })
        }
        Family::Comb(alpha) => {
            if alpha < 1 {
                return Err(Error::InvalidParam(format!("comb alpha {alpha} < 1")));
            }
            Ok(CriticalPair {
                family: format!("comb({alpha})"),
                lambda_w: 1.0 / (alpha as f64 + 2.0),
                lambda_s: 1.0 / (2.0 * ((alpha + 1) as f64).sqrt()),
                source: Source::ClosedForm,
                interval: None,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BisectionReport {
    pub family: String,
    pub radius: u32,
    pub interval: (f64, f64),
    pub evaluations: u32,
    /// Truncation biases the survival side upward in lambda; the interval is
    /// certified on both sides (survival of the killed ball implies
    /// lambda >= lambda_s; a certified lower bracket near 1 implies
    /// lambda <= lambda_s).
    pub caveat: String,
}

const NEAR_ONE: f64 = 1e-4;

fn killed_ball_survives(
    ball: &Arc<Truncation<crate::geometry::comb::CombVertex>>,
    oracle: &CombOracle,
    settings: &SolveSettings,
) -> Result<bool> {
    let set = CombSet::Origin;
    let clamps = oracle.clamps_for(&set, &ball.rim);
    let (_, q) = extinction_bracket(ball, &set.to_target(), &clamps, settings)?;
    Ok(q.at_root().1 < 1.0 - NEAR_ONE)
}

fn extinction_certified(
    ball: &Arc<Truncation<crate::geometry::comb::CombVertex>>,
    oracle: &CombOracle,
    settings: &SolveSettings,
) -> Result<bool> {
    let set = CombSet::Origin;
    let clamps = oracle.clamps_for(&set, &ball.rim);
    let (_, q) = extinction_bracket(ball, &set.to_target(), &clamps, settings)?;
    Ok(q.at_root().0 > 1.0 - NEAR_ONE)
}

/// Two-sided bisection for the comb's local threshold at a fixed radius.
/// The returned interval contains lambda_s whenever the predicates behave
/// monotonically at the given resolution; otherwise Inconclusive.
pub fn bisect_local_survival(
    alpha: u32,
    lambda_lo: f64,
    lambda_hi: f64,
    radius: u32,
    steps: u32,
) -> Result<BisectionReport> {
    if !(lambda_lo < lambda_hi) {
        return Err(Error::InvalidParam(format!(
            "bisection bounds out of order: {lambda_lo} >= {lambda_hi}"
        )));
    }
    let settings = SolveSettings {
        max_sweeps: 40_000,
        ..Default::default()
    };
    let mut evals = 0;
    let mut eval = |lambda: f64, survival_side: bool| -> Result<bool> {
        evals += 1;
        let comb = Comb::new(alpha, lambda)?;
        let ball = Truncation::ball(&comb, radius)?;
        let oracle = CombOracle::new(alpha, lambda, 0.0)?;
        if survival_side {
            killed_ball_survives(&ball, &oracle, &settings)
        } else {
            extinction_certified(&ball, &oracle, &settings)
        }
    };

    // survival side: smallest lambda whose killed ball survives locally
    if !eval(lambda_hi, true)? {
        return Err(Error::Inconclusive);
    }
    let mut s_lo = lambda_lo;
    let mut s_hi = lambda_hi;
    if eval(lambda_lo, true)? {
        s_hi = lambda_lo;
    } else {
        for _ in 0..steps {
            let mid = 0.5 * (s_lo + s_hi);
            if eval(mid, true)? {
                s_hi = mid;
            } else {
                s_lo = mid;
            }
        }
    }

    // extinction side: largest lambda with a certified near-one lower bracket
    if !eval(lambda_lo, false)? {
        return Err(Error::Inconclusive);
    }
    let mut e_lo = lambda_lo;
    let mut e_hi = s_hi.min(lambda_hi);
    for _ in 0..steps {
        let mid = 0.5 * (e_lo + e_hi);
        if eval(mid, false)? {
            e_lo = mid;
        } else {
            e_hi = mid;
        }
    }

    if e_lo > s_hi {
        return Err(Error::Inconclusive);
    }
    Ok(BisectionReport {
        family: format!("comb({alpha})"),
        radius,
        interval: (e_lo, s_hi),
        evaluations: evals,
        caveat: "truncation biases the survival side upward in lambda".into(),
    })
}
