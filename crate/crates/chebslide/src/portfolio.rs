//! Randomized test portfolio of worst-of equity autocallables.
//!
//! The generator reproduces a desk-scale book: 20% single-underlying trades,
//! 54% with three underlyings, 25% with five and 1% with ten, with quarterly
//! observation schedules between two and five years and barrier/coupon
//! economics drawn from fixed ranges. Everything is deterministic in the
//! seed so experiments can be replayed bit-for-bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::UnderlyingId;

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("portfolio size {0} too small; need at least 100 so the 1% bucket is non-empty")]
    TooFewTrades(usize),
    #[error("universe has {0} underlyings; ten-underlying trades need at least 10")]
    UniverseTooSmall(usize),
    #[error("trade {trade_id}: {reason}")]
    InvalidSpec { trade_id: String, reason: String },
}

/// A worst-of autocallable note.
///
/// On each observation date the worst performance `min_u S_u / fixing_u` is
/// compared against `autocall_barrier`; at or above it the note redeems at
/// par plus the accrued coupon. If it survives to maturity, a worst
/// performance below `ki_barrier` converts redemption into the worst-of
/// performance itself (the knocked-in put), otherwise par plus final coupon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocallableSpec {
    pub trade_id: String,
    /// Sorted, distinct; length 1, 3, 5 or 10.
    pub underlying_ids: Vec<UnderlyingId>,
    /// Initial fixings aligned with `underlying_ids`.
    pub initial_fixings: Vec<f64>,
    pub notional: f64,
    /// Quarterly observation dates in year fractions; last equals `maturity`.
    pub observation_dates: Vec<f64>,
    pub autocall_barrier: f64,
    pub ki_barrier: f64,
    /// Coupon per observation period, as a fraction of notional.
    pub coupon_rate: f64,
    pub maturity: f64,
}

impl AutocallableSpec {
    pub fn underlying_count(&self) -> usize {
        self.underlying_ids.len()
    }

    /// Checks the structural invariants; generated trades always pass.
    pub fn validate(&self) -> Result<(), PortfolioError> {
        let fail = |reason: String| PortfolioError::InvalidSpec {
            trade_id: self.trade_id.clone(),
            reason,
        };
        if ![1, 3, 5, 10].contains(&self.underlying_ids.len()) {
            return Err(fail(format!(
                "underlying count {} not in {{1,3,5,10}}",
                self.underlying_ids.len()
            )));
        }
        if self.initial_fixings.len() != self.underlying_ids.len() {
            return Err(fail("fixings not aligned with underlyings".into()));
        }
        if self.initial_fixings.iter().any(|f| !(*f > 0.0)) {
            return Err(fail("fixings must be positive".into()));
        }
        if !self.underlying_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(fail("underlyings must be sorted and distinct".into()));
        }
        if !(self.ki_barrier > 0.0 && self.ki_barrier < self.autocall_barrier) {
            return Err(fail(format!(
                "need 0 < ki ({}) < autocall ({})",
                self.ki_barrier, self.autocall_barrier
            )));
        }
        if self.observation_dates.is_empty()
            || !self.observation_dates.windows(2).all(|w| w[0] < w[1])
            || self.observation_dates[0] <= 0.0
        {
            return Err(fail("observation dates must be positive increasing".into()));
        }
        if *self.observation_dates.last().unwrap() != self.maturity {
            return Err(fail("last observation date must equal maturity".into()));
        }
        if !(self.notional > 0.0) {
            return Err(fail("notional must be positive".into()));
        }
        if !(self.coupon_rate >= 0.0) {
            return Err(fail("coupon must be non-negative".into()));
        }
        Ok(())
    }
}

/// Number of trades per underlying-count bucket for a portfolio of `count`.
/// The 20/54/25/1 mix: the 1% bucket is rounded but kept non-empty, the 3-
/// underlying bucket absorbs the remainder.
pub fn bucket_sizes(count: usize) -> [usize; 4] {
    let c = count as f64;
    let n1 = (0.20 * c).round() as usize;
    let n5 = (0.25 * c).round() as usize;
    let n10 = ((0.01 * c).round() as usize).max(1);
    let n3 = count - n1 - n5 - n10;
    [n1, n3, n5, n10]
}

/// Generate `count` autocallables over `universe`, deterministic in `seed`.
pub fn generate_portfolio(
    count: usize,
    universe: &[UnderlyingId],
    seed: u64,
) -> Result<Vec<AutocallableSpec>, PortfolioError> {
    if count < 100 {
        return Err(PortfolioError::TooFewTrades(count));
    }
    if universe.len() < 10 {
        return Err(PortfolioError::UniverseTooSmall(universe.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x706f7274);

    let [n1, n3, n5, n10] = bucket_sizes(count);
    let mut sizes = Vec::with_capacity(count);
    sizes.extend(std::iter::repeat(1usize).take(n1));
    sizes.extend(std::iter::repeat(3usize).take(n3));
    sizes.extend(std::iter::repeat(5usize).take(n5));
    sizes.extend(std::iter::repeat(10usize).take(n10));
    sizes.shuffle(&mut rng);

    let mut trades = Vec::with_capacity(count);
    for (i, &u) in sizes.iter().enumerate() {
        let mut ids: Vec<UnderlyingId> = universe
            .choose_multiple(&mut rng, u)
            .cloned()
            .collect();
        ids.sort();
        let initial_fixings = (0..u).map(|_| 100.0 * rng.gen_range(0.85..1.15)).collect();
        let quarters: usize = rng.gen_range(8..=20);
        let observation_dates: Vec<f64> = (1..=quarters).map(|q| q as f64 * 0.25).collect();
        let maturity = *observation_dates.last().unwrap();
        let spec = AutocallableSpec {
            trade_id: format!("AC-{i:04}"),
            underlying_ids: ids,
            initial_fixings,
            notional: 1.0e6 * rng.gen_range(0.5..1.5),
            observation_dates,
            autocall_barrier: rng.gen_range(0.95..1.05),
            ki_barrier: rng.gen_range(0.5..0.8),
            coupon_rate: rng.gen_range(0.01..0.03),
            maturity,
        };
        debug_assert!(spec.validate().is_ok());
        trades.push(spec);
    }
    Ok(trades)
}
