//! Monte Carlo pricing oracle for worst-of autocallables.
//!
//! Dynamics are multi-asset lognormal with the volatility read off the
//! implied surface at the running moneyness, the drift taken from the
//! funding curve's forward rates, and a constant pairwise correlation.
//!
//! Random numbers are *counter-based*: every normal draw is a pure hash of
//! `(trade, path, step, asset, seed)`, so the draws are identical across
//! scenario revaluations (common random numbers) and independent of
//! evaluation order. [`McPricer::prepare`] materializes the correlated
//! draws for one trade once; the same buffer then serves every snapshot
//! revaluation of that trade, which is what keeps a 1,750-scenario program
//! per trade affordable.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{CurveRole, MarketError, MarketSnapshot, RateCurve, VolSurface};
use crate::portfolio::AutocallableSpec;

#[derive(Debug, Error)]
pub enum PricerError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("trade {trade_id}: non-finite value in {stage}")]
    NonFinite { trade_id: String, stage: &'static str },
    #[error("trade {trade_id}: path buffer built for correlation {prepared}, snapshot has {snapshot}")]
    CorrelationMismatch {
        trade_id: String,
        prepared: f64,
        snapshot: f64,
    },
    #[error("trade {trade_id}: path buffer shape does not match trade ({reason})")]
    PathShapeMismatch { trade_id: String, reason: String },
    #[error("invalid Monte Carlo config: {0}")]
    BadConfig(String),
}

/// Monte Carlo settings. The seed is fixed per experiment so that every
/// revaluation of a trade sees the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: usize,
    pub substeps_per_period: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 8192,
            substeps_per_period: 1,
            seed: 0,
        }
    }
}

/// Thread-safe, resettable count of oracle invocations.
#[derive(Debug, Clone, Default)]
pub struct CallCounter(Arc<AtomicU64>);

impl CallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }

    fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// Point estimate plus its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub pv: f64,
    pub std_error: f64,
}

/// 64-bit finalizer with full avalanche (splitmix64's mixing function).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the trade id, so draws are keyed by identity, not by index.
fn fnv1a(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Standard normal draw for one `(trade, path, step, asset)` counter.
#[inline]
fn counter_normal(trade_key: u64, path: u64, step: u64, asset: u64) -> f64 {
    let base = mix64(mix64(mix64(trade_key ^ path) ^ step) ^ asset);
    let h1 = mix64(base ^ 0x243f_6a88_85a3_08d3);
    let h2 = mix64(base ^ 0x1319_8a2e_0370_7344);
    // u1 ∈ (0,1] keeps the log finite; u2 ∈ [0,1)
    let u1 = ((h1 >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
    let u2 = (h2 >> 11) as f64 * (1.0 / 9007199254740992.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Lower Cholesky factor of the constant-correlation matrix.
fn constant_rho_cholesky(n: usize, rho: f64) -> Result<Vec<Vec<f64>>, PricerError> {
    let lower = if n > 1 { -1.0 / (n as f64 - 1.0) } else { -1.0 };
    if !(rho > lower && rho < 1.0) {
        return Err(PricerError::BadConfig(format!(
            "correlation {rho} not in ({lower}, 1) for {n} assets"
        )));
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let a = if i == j { 1.0 } else { rho };
            let mut sum = a;
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(PricerError::BadConfig(format!(
                        "correlation matrix not positive definite at pivot {i}"
                    )));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Correlated normal draws for one trade, reusable across every snapshot
/// revaluation. Layout: `normals[(p·steps + s)·assets + a]`.
pub struct TradePaths {
    trade_id: String,
    paths: usize,
    substeps: usize,
    n_obs: usize,
    n_assets: usize,
    correlation: f64,
    normals: Vec<f64>,
}

impl TradePaths {
    fn steps(&self) -> usize {
        self.n_obs * self.substeps
    }
}

/// Four-lane `exp` for the path loop, written so LLVM can vectorize it:
/// round-to-even via the 1.5·2^52 magic constant (the rounded integer is
/// recovered from the float's bit pattern, avoiding float→int casts),
/// Cody–Waite argument reduction, a degree-10 polynomial (relative error
/// < 5e-13 for |y| ≤ 700), and branchless bitmask saturation to 0/∞
/// outside the IEEE range. Pure f64 arithmetic — deterministic everywhere.
#[inline]
fn exp4(y: [f64; 4]) -> [f64; 4] {
    const LOG2_E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238_16e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_70e-10;
    const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5·2^52
    const INV_FACT: [f64; 11] = [
        1.0,
        1.0,
        0.5,
        1.0 / 6.0,
        1.0 / 24.0,
        1.0 / 120.0,
        1.0 / 720.0,
        1.0 / 5040.0,
        1.0 / 40320.0,
        1.0 / 362_880.0,
        1.0 / 3_628_800.0,
    ];
    let mut out = [0.0f64; 4];
    for i in 0..4 {
        let t = y[i] * LOG2_E + ROUND_MAGIC;
        let k = t - ROUND_MAGIC;
        let r = (-k).mul_add(LN2_LO, (-k).mul_add(LN2_HI, y[i]));
        let mut p = INV_FACT[10];
        for c in INV_FACT[..10].iter().rev() {
            p = p.mul_add(r, *c);
        }
        // the magic-constant trick leaves k's integer value in the low
        // mantissa bits, so the biased exponent is pure integer arithmetic
        let ki = (t.to_bits().wrapping_sub(ROUND_MAGIC.to_bits()) as i64).clamp(-1022, 1023);
        let v = p * f64::from_bits(((ki + 1023) as u64) << 52);
        let sat_hi = 0u64.wrapping_sub((y[i] > 709.78) as u64);
        let sat_lo = 0u64.wrapping_sub((y[i] < -745.0) as u64);
        let bits = (v.to_bits() & !sat_hi & !sat_lo) | (sat_hi & f64::INFINITY.to_bits());
        out[i] = f64::from_bits(bits);
    }
    out
}

/// The Monte Carlo oracle. Pure per call; the embedded counter is the only
/// shared state and aggregates atomically.
#[derive(Debug, Clone)]
pub struct McPricer {
    pub config: McConfig,
    counter: CallCounter,
}

impl McPricer {
    pub fn new(config: McConfig) -> Self {
        Self {
            config,
            counter: CallCounter::new(),
        }
    }

    pub fn counter(&self) -> &CallCounter {
        &self.counter
    }

    /// Materialize the correlated draws for `spec` under `correlation`.
    /// Draw order is canonical (path, step, asset), so the buffer is
    /// independent of how it will later be consumed.
    pub fn prepare(
        &self,
        spec: &AutocallableSpec,
        correlation: f64,
    ) -> Result<TradePaths, PricerError> {
        if self.config.paths == 0 || self.config.substeps_per_period == 0 {
            return Err(PricerError::BadConfig(
                "paths and substeps_per_period must be positive".into(),
            ));
        }
        let n_assets = spec.underlying_ids.len();
        let n_obs = spec.observation_dates.len();
        let substeps = self.config.substeps_per_period;
        let steps = n_obs * substeps;
        let chol = constant_rho_cholesky(n_assets, correlation)?;
        let trade_key = fnv1a(&spec.trade_id) ^ mix64(self.config.seed);

        let mut normals = vec![0.0; self.config.paths * steps * n_assets];
        let mut raw = [0.0f64; 16];
        if n_assets == 0 || n_assets > 16 {
            return Err(PricerError::BadConfig(format!(
                "asset count {n_assets} outside supported range 1..=16"
            )));
        }
        let mut idx = 0;
        for p in 0..self.config.paths {
            for s in 0..steps {
                for (a, slot) in raw.iter_mut().enumerate().take(n_assets) {
                    *slot = counter_normal(trade_key, p as u64, s as u64, a as u64);
                }
                for a in 0..n_assets {
                    let mut xi = 0.0;
                    for (j, &z) in raw.iter().enumerate().take(a + 1) {
                        xi += chol[a][j] * z;
                    }
                    normals[idx] = xi;
                    idx += 1;
                }
            }
        }
        Ok(TradePaths {
            trade_id: spec.trade_id.clone(),
            paths: self.config.paths,
            substeps,
            n_obs,
            n_assets,
            correlation,
            normals,
        })
    }

    /// Price `spec` against `snapshot`, building the path buffer ad hoc.
    pub fn price(
        &self,
        spec: &AutocallableSpec,
        snapshot: &MarketSnapshot,
    ) -> Result<f64, PricerError> {
        self.price_detailed(spec, snapshot).map(|e| e.pv)
    }

    /// As [`price`](Self::price) but also returns the standard error.
    pub fn price_detailed(
        &self,
        spec: &AutocallableSpec,
        snapshot: &MarketSnapshot,
    ) -> Result<McEstimate, PricerError> {
        let paths = self.prepare(spec, snapshot.correlation)?;
        self.price_prepared_detailed(spec, snapshot, &paths)
    }

    /// Price against a prepared path buffer (the hot path of the engine).
    pub fn price_prepared(
        &self,
        spec: &AutocallableSpec,
        snapshot: &MarketSnapshot,
        paths: &TradePaths,
    ) -> Result<f64, PricerError> {
        self.price_prepared_detailed(spec, snapshot, paths)
            .map(|e| e.pv)
    }

    pub fn price_prepared_detailed(
        &self,
        spec: &AutocallableSpec,
        snapshot: &MarketSnapshot,
        paths: &TradePaths,
    ) -> Result<McEstimate, PricerError> {
        self.counter.increment();
        self.price_core(spec, snapshot, paths)
    }

    fn price_core(
        &self,
        spec: &AutocallableSpec,
        snapshot: &MarketSnapshot,
        tp: &TradePaths,
    ) -> Result<McEstimate, PricerError> {
        let n = spec.underlying_ids.len();
        if tp.trade_id != spec.trade_id
            || tp.n_assets != n
            || tp.n_obs != spec.observation_dates.len()
        {
            return Err(PricerError::PathShapeMismatch {
                trade_id: spec.trade_id.clone(),
                reason: format!(
                    "buffer for {} ({} assets, {} observations)",
                    tp.trade_id, tp.n_assets, tp.n_obs
                ),
            });
        }
        if tp.correlation.to_bits() != snapshot.correlation.to_bits() {
            return Err(PricerError::CorrelationMismatch {
                trade_id: spec.trade_id.clone(),
                prepared: tp.correlation,
                snapshot: snapshot.correlation,
            });
        }

        // resolve instruments once; the loops below never touch the maps
        let mut surfaces: Vec<&VolSurface> = Vec::with_capacity(n);
        let mut y0 = [0.0f64; 20];
        let mut m0 = [0.0f64; 20];
        for (a, id) in spec.underlying_ids.iter().enumerate() {
            let s0 = *snapshot
                .spots
                .get(id)
                .ok_or_else(|| MarketError::MissingInstrument {
                    kind: "spot",
                    id: id.to_string(),
                })?;
            let surf =
                snapshot
                    .surfaces
                    .get(id)
                    .ok_or_else(|| MarketError::MissingInstrument {
                        kind: "vol surface",
                        id: id.to_string(),
                    })?;
            let f = spec.initial_fixings[a];
            if !(s0 > 0.0 && f > 0.0) {
                return Err(PricerError::NonFinite {
                    trade_id: spec.trade_id.clone(),
                    stage: "spot/fixing",
                });
            }
            m0[a] = s0 / f;
            y0[a] = m0[a].ln();
            surfaces.push(surf);
        }
        let curve = |role: CurveRole| -> Result<&RateCurve, PricerError> {
            snapshot
                .curves
                .get(&role)
                .ok_or_else(|| {
                    MarketError::MissingInstrument {
                        kind: "curve",
                        id: role.name().to_string(),
                    }
                    .into()
                })
        };
        let discount = curve(CurveRole::Discount)?;
        let funding = curve(CurveRole::Funding)?;
        let spread = curve(CurveRole::Spread)?;

        // per-step precomputation: time grid, funding drift, vol rows at the
        // step-start expiry (one row of 9 values per asset per step)
        let n_obs = spec.observation_dates.len();
        let substeps = tp.substeps;
        let steps = tp.steps();
        let mut rf_dt = Vec::with_capacity(steps);
        let mut half_dt = Vec::with_capacity(steps);
        let mut sqrt_dt = Vec::with_capacity(steps);
        let row_offsets: Vec<usize> = {
            let mut acc = 0;
            let mut offs = Vec::with_capacity(n + 1);
            for surf in &surfaces {
                offs.push(acc);
                acc += surf.moneyness_pillars.len();
            }
            offs.push(acc);
            offs
        };
        let step_stride = row_offsets[n];
        let mut vol_rows = vec![0.0f64; steps * step_stride];
        {
            let mut scratch = Vec::new();
            let mut s = 0;
            for k in 0..n_obs {
                let t_start = if k == 0 {
                    0.0
                } else {
                    spec.observation_dates[k - 1]
                };
                let t_end = spec.observation_dates[k];
                let dt = (t_end - t_start) / substeps as f64;
                for j in 0..substeps {
                    let t = t_start + j as f64 * dt;
                    rf_dt.push(funding.forward_rate(t, t + dt) * dt);
                    half_dt.push(0.5 * dt);
                    sqrt_dt.push(dt.sqrt());
                    for (a, surf) in surfaces.iter().enumerate() {
                        surf.row_at_expiry(t, &mut scratch);
                        let off = s * step_stride + row_offsets[a];
                        vol_rows[off..off + scratch.len()].copy_from_slice(&scratch);
                    }
                    s += 1;
                }
            }
        }
        // moneyness pillars and inverse gaps per asset, laid out like one
        // step of vol_rows, so the inner loop is branch- and division-free
        let mut pill_flat = vec![0.0f64; step_stride];
        let mut inv_gap = vec![0.0f64; step_stride];
        for (a, surf) in surfaces.iter().enumerate() {
            let off = row_offsets[a];
            let p = &surf.moneyness_pillars;
            pill_flat[off..off + p.len()].copy_from_slice(p);
            for i in 0..p.len() - 1 {
                inv_gap[off + i] = 1.0 / (p[i + 1] - p[i]);
            }
        }

        // discounted redemption amounts per autocall date, and at maturity
        let pay_called: Vec<f64> = (0..n_obs)
            .map(|k| {
                let t = spec.observation_dates[k];
                let df_d = discount.discount_factor(t);
                let df_s = spread.discount_factor(t);
                spec.notional * (df_d + (k + 1) as f64 * spec.coupon_rate * df_d * df_s)
            })
            .collect();
        let df_d_mat = discount.discount_factor(spec.maturity);
        let df_s_mat = spread.discount_factor(spec.maturity);
        let par_pay = spec.notional
            * (df_d_mat + n_obs as f64 * spec.coupon_rate * df_d_mat * df_s_mat);
        let ki_scale = spec.notional * df_d_mat;

        // the path loop: log-moneyness stepping, one exp per asset-step,
        // stop as soon as a path autocalls; compensated summation keeps the
        // average exact to a few ulps even over 8k paths
        let mut sum = 0.0;
        let mut sum_c = 0.0;
        let mut sum_sq = 0.0;
        let mut sum_sq_c = 0.0;
        let path_stride = steps * n;
        for p in 0..tp.paths {
            let mut y = y0;
            let mut m = m0;
            let base = p * path_stride;
            let mut s = 0;
            let mut payoff = 0.0;
            'periods: for k in 0..n_obs {
                for _ in 0..substeps {
                    let rows = &vol_rows[s * step_stride..(s + 1) * step_stride];
                    let xi = &tp.normals[base + s * n..base + (s + 1) * n];
                    let (rf, h_dt, sq_dt) = (rf_dt[s], half_dt[s], sqrt_dt[s]);
                    for a in 0..n {
                        let off = row_offsets[a];
                        let len = row_offsets[a + 1] - off;
                        let pillars = &pill_flat[off..off + len];
                        let x = m[a];
                        // branchless cell index; clamped weight gives flat
                        // extrapolation outside the pillar range
                        let mut lo = 0usize;
                        for &pv in &pillars[1..len - 1] {
                            lo += (x >= pv) as usize;
                        }
                        let w = ((x - pillars[lo]) * inv_gap[off + lo]).clamp(0.0, 1.0);
                        let r0 = rows[off + lo];
                        let sigma = (rows[off + lo + 1] - r0).mul_add(w, r0);
                        let drift = (-sigma).mul_add(sigma * h_dt, rf);
                        y[a] += (sigma * sq_dt).mul_add(xi[a], drift);
                    }
                    // batch the exponentials four lanes at a time; the
                    // padding lanes beyond `n` hold zeros and are ignored
                    let mut a = 0;
                    while a < n {
                        let e = exp4([y[a], y[a + 1], y[a + 2], y[a + 3]]);
                        m[a..a + 4].copy_from_slice(&e);
                        a += 4;
                    }
                    s += 1;
                }
                let mut worst = m[0];
                for &ma in m.iter().take(n).skip(1) {
                    if ma < worst {
                        worst = ma;
                    }
                }
                if worst >= spec.autocall_barrier {
                    payoff = pay_called[k];
                    break 'periods;
                }
                if k == n_obs - 1 {
                    payoff = if worst < spec.ki_barrier {
                        ki_scale * worst
                    } else {
                        par_pay
                    };
                }
            }
            let y1 = payoff - sum_c;
            let t1 = sum + y1;
            sum_c = (t1 - sum) - y1;
            sum = t1;
            let sq = payoff * payoff;
            let y2 = sq - sum_sq_c;
            let t2 = sum_sq + y2;
            sum_sq_c = (t2 - sum_sq) - y2;
            sum_sq = t2;
        }

        let np = tp.paths as f64;
        let pv = sum / np;
        let var = ((sum_sq / np) - pv * pv).max(0.0);
        let std_error = (var / np).sqrt();
        if !pv.is_finite() || !std_error.is_finite() {
            return Err(PricerError::NonFinite {
                trade_id: spec.trade_id.clone(),
                stage: "present value",
            });
        }
        Ok(McEstimate { pv, std_error })
    }
}

/// Standard normal CDF via the odd power series `½ + φ(x)·Σ x^(2k+1)/(2k+1)!!`,
/// accurate to ~1e-14 on |x| ≤ 8 and saturating beyond.
pub fn norm_cdf(x: f64) -> f64 {
    if x < -8.0 {
        return 0.0;
    }
    if x > 8.0 {
        return 1.0;
    }
    let mut sum = x;
    let mut term = x;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= x * x / (2 * k + 1) as f64;
        let next = sum + term;
        if next == sum {
            break;
        }
        sum = next;
    }
    0.5 + sum * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Black–Scholes European put with continuous compounding. The `t = 0` and
/// `vol = 0` limits return intrinsic/forward-intrinsic values.
pub fn black_scholes_put(spot: f64, strike: f64, vol: f64, rate: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return (strike - spot).max(0.0);
    }
    let df = (-rate * t).exp();
    let sig_sqrt = vol * t.sqrt();
    if sig_sqrt <= 0.0 {
        return (strike * df - spot).max(0.0);
    }
    let d1 = ((spot / strike).ln() + (rate + 0.5 * vol * vol) * t) / sig_sqrt;
    let d2 = d1 - sig_sqrt;
    strike * df * norm_cdf(-d2) - spot * norm_cdf(-d1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{
        standard_universe, synthetic_snapshot, MarketSnapshot, RateCurve, UnderlyingId, VolSurface,
    };
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    /// Snapshot with flat vol and flat identical curves, for closed forms.
    fn flat_snapshot(ids: &[UnderlyingId], spot: f64, vol: f64, rate: f64) -> MarketSnapshot {
        let mut spots = BTreeMap::new();
        let mut surfaces = BTreeMap::new();
        for id in ids {
            spots.insert(id.clone(), spot);
            surfaces.insert(id.clone(), VolSurface::flat(vol));
        }
        let mut curves = BTreeMap::new();
        for role in CurveRole::ALL {
            curves.insert(role, RateCurve::flat(rate));
        }
        MarketSnapshot {
            spots,
            surfaces,
            curves,
            correlation: 0.5,
        }
    }

    fn single_asset_spec(autocall: f64, ki: f64, coupon: f64, quarters: usize) -> AutocallableSpec {
        let observation_dates: Vec<f64> = (1..=quarters).map(|q| q as f64 * 0.25).collect();
        AutocallableSpec {
            trade_id: "T-TEST".into(),
            underlying_ids: vec![UnderlyingId::new("EQ_00")],
            initial_fixings: vec![100.0],
            notional: 1.0e6,
            observation_dates: observation_dates.clone(),
            autocall_barrier: autocall,
            ki_barrier: ki,
            coupon_rate: coupon,
            maturity: *observation_dates.last().unwrap(),
        }
    }

    #[test]
    fn always_called_matches_closed_form_exactly() {
        // autocall barrier 0: every path redeems at the first observation,
        // so the MC average is the discounted redemption without noise
        let ids = standard_universe(1);
        let snap = synthetic_snapshot(&ids, 1);
        let spec = single_asset_spec(0.0, 0.5, 0.02, 8);
        let pricer = McPricer::new(McConfig {
            paths: 4096,
            ..Default::default()
        });
        let est = pricer.price_detailed(&spec, &snap).unwrap();
        let df_d = snap.curves[&CurveRole::Discount].discount_factor(0.25);
        let df_s = snap.curves[&CurveRole::Spread].discount_factor(0.25);
        let expected = 1.0e6 * (df_d + 0.02 * df_d * df_s);
        assert_relative_eq!(est.pv, expected, max_relative = 1e-13);
        assert!(est.std_error <= est.pv.abs() * 1e-8, "se {}", est.std_error);
    }

    #[test]
    fn never_called_never_ki_is_discounted_par() {
        // autocall at +inf, knock-in at 0, coupon 0: every path pays par
        let ids = standard_universe(1);
        let snap = synthetic_snapshot(&ids, 1);
        let spec = single_asset_spec(f64::INFINITY, 0.0, 0.0, 8);
        let pricer = McPricer::new(McConfig {
            paths: 2048,
            ..Default::default()
        });
        let est = pricer.price_detailed(&spec, &snap).unwrap();
        let expected = 1.0e6 * snap.curves[&CurveRole::Discount].discount_factor(2.0);
        assert_relative_eq!(est.pv, expected, max_relative = 1e-13);
        assert!(est.std_error <= est.pv.abs() * 1e-8, "se {}", est.std_error);
    }

    #[test]
    fn martingale_within_three_standard_errors() {
        // payoff = notional · S_T / fixing with funding = discount curve and
        // fixing = spot, so the discounted PV must be the notional
        let ids = standard_universe(1);
        let mut snap = synthetic_snapshot(&ids, 3);
        let funding = snap.curves[&CurveRole::Funding].clone();
        snap.curves.insert(CurveRole::Discount, funding);
        let spot = snap.spots[&ids[0]];
        let mut spec = single_asset_spec(f64::INFINITY, f64::INFINITY, 0.0, 12);
        spec.initial_fixings = vec![spot];
        let pricer = McPricer::new(McConfig::default());
        let est = pricer.price_detailed(&spec, &snap).unwrap();
        assert!(
            (est.pv - 1.0e6).abs() <= 3.0 * est.std_error,
            "pv {} vs notional 1e6, 3se = {}",
            est.pv,
            3.0 * est.std_error
        );
    }

    #[test]
    fn degenerate_put_matches_black_scholes() {
        // never autocalls, knock-in at 100%: payoff = notional·(1 − (1 − S_T/F)⁺),
        // i.e. discounted par minus a Black–Scholes put struck at the fixing
        let ids = standard_universe(1);
        let (spot, vol, rate) = (100.0, 0.25, 0.03);
        let snap = flat_snapshot(&ids, spot, vol, rate);
        let mut spec = single_asset_spec(f64::INFINITY, 1.0, 0.0, 12);
        spec.initial_fixings = vec![spot];
        let t = spec.maturity;
        let pricer = McPricer::new(McConfig {
            paths: 16384,
            ..Default::default()
        });
        let est = pricer.price_detailed(&spec, &snap).unwrap();
        let expected = 1.0e6 * (-rate * t).exp()
            - 1.0e6 / spot * black_scholes_put(spot, spot, vol, rate, t);
        assert!(
            (est.pv - expected).abs() <= 3.0 * est.std_error,
            "pv {} vs closed form {expected}, 3se = {}",
            est.pv,
            3.0 * est.std_error
        );
    }

    #[test]
    fn bitwise_determinism_and_prepared_equivalence() {
        let ids = standard_universe(3);
        let snap = synthetic_snapshot(&ids, 9);
        let portfolio = crate::portfolio::generate_portfolio(100, &standard_universe(10), 5)
            .unwrap();
        let spec = portfolio
            .iter()
            .find(|t| t.underlying_count() == 3)
            .unwrap();
        let snap = {
            // extend the snapshot to the full 10-name universe
            let _ = snap;
            synthetic_snapshot(&standard_universe(10), 9)
        };
        let pricer = McPricer::new(McConfig {
            paths: 2048,
            ..Default::default()
        });
        let a = pricer.price(spec, &snap).unwrap();
        let b = pricer.price(spec, &snap).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let tp = pricer.prepare(spec, snap.correlation).unwrap();
        let c = pricer.price_prepared(spec, &snap, &tp).unwrap();
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn coupon_monotonicity() {
        let snap = synthetic_snapshot(&standard_universe(1), 7);
        let pricer = McPricer::new(McConfig {
            paths: 2048,
            ..Default::default()
        });
        let mut last = f64::NEG_INFINITY;
        for coupon in [0.0, 0.01, 0.02, 0.03] {
            let spec = single_asset_spec(1.0, 0.7, coupon, 12);
            let pv = pricer.price(&spec, &snap).unwrap();
            assert!(pv >= last, "coupon {coupon}: pv {pv} < previous {last}");
            last = pv;
        }
    }

    #[test]
    fn standard_error_scales_with_paths() {
        let snap = synthetic_snapshot(&standard_universe(1), 13);
        let spec = single_asset_spec(1.0, 0.7, 0.02, 8);
        let se = |paths: usize| {
            let pricer = McPricer::new(McConfig {
                paths,
                ..Default::default()
            });
            pricer.price_detailed(&spec, &snap).unwrap().std_error
        };
        let (se2k, se8k, se32k) = (se(2048), se(8192), se(32768));
        assert!(se2k / se8k > 1.5 && se2k / se8k < 2.6, "{se2k} / {se8k}");
        assert!(se8k / se32k > 1.5 && se8k / se32k < 2.6, "{se8k} / {se32k}");
    }

    #[test]
    fn crn_finite_difference_slope_is_stable() {
        // with common random numbers a spot bump produces a smooth PV
        // response whose finite-difference slope settles under path
        // refinement instead of being dominated by resampling noise
        let ids = standard_universe(1);
        let snap = synthetic_snapshot(&ids, 21);
        let spec = single_asset_spec(1.0, 0.7, 0.02, 12);
        let slope = |paths: usize| {
            let pricer = McPricer::new(McConfig {
                paths,
                ..Default::default()
            });
            let mut up = snap.clone();
            let bump = 0.05_f64;
            *up.spots.get_mut(&ids[0]).unwrap() *= bump.exp();
            let base = pricer.price(&spec, &snap).unwrap();
            let bumped = pricer.price(&spec, &up).unwrap();
            (bumped - base) / bump
        };
        let s_fine = slope(8192);
        let s_finest = slope(32768);
        let scale = s_finest.abs().max(1.0);
        assert!(
            ((s_fine - s_finest) / scale).abs() < 0.10,
            "slopes {s_fine} vs {s_finest}"
        );
    }

    #[test]
    fn missing_instruments_are_rejected() {
        let snap = synthetic_snapshot(&standard_universe(1), 2);
        let mut spec = single_asset_spec(1.0, 0.7, 0.02, 8);
        spec.underlying_ids = vec![UnderlyingId::new("ZZ_99")];
        let pricer = McPricer::new(McConfig::default());
        assert!(matches!(
            pricer.price(&spec, &snap),
            Err(PricerError::Market(MarketError::MissingInstrument { .. }))
        ));
    }

    #[test]
    fn call_counter_counts_and_resets() {
        let snap = synthetic_snapshot(&standard_universe(1), 2);
        let spec = single_asset_spec(1.0, 0.7, 0.02, 8);
        let pricer = McPricer::new(McConfig {
            paths: 256,
            ..Default::default()
        });
        assert_eq!(pricer.counter().count(), 0);
        let tp = pricer.prepare(&spec, snap.correlation).unwrap();
        for _ in 0..250 {
            pricer.price_prepared(&spec, &snap, &tp).unwrap();
        }
        assert_eq!(pricer.counter().count(), 250);
        pricer.counter().reset();
        assert_eq!(pricer.counter().count(), 0);
    }

    #[test]
    fn cholesky_factor_reproduces_constant_rho_matrix() {
        for (n, rho) in [(2usize, 0.5), (5, 0.5), (10, 0.5), (3, -0.3), (10, 0.9)] {
            let l = constant_rho_cholesky(n, rho).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let mut dot = 0.0;
                    for k in 0..n {
                        dot += l[i][k] * l[j][k];
                    }
                    let want = if i == j { 1.0 } else { rho };
                    assert_relative_eq!(dot, want, epsilon = 1e-12);
                }
            }
        }
        assert!(constant_rho_cholesky(10, 1.0).is_err());
        assert!(constant_rho_cholesky(10, -0.2).is_err());
    }

    #[test]
    fn counter_normals_have_standard_moments() {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let n = 200_000;
        for i in 0..n {
            let z = counter_normal(0x1234, i as u64, 0, 0);
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn bs_put_intrinsic_and_zero_vol_limits() {
        assert_eq!(black_scholes_put(90.0, 100.0, 0.2, 0.05, 0.0), 10.0);
        assert_eq!(black_scholes_put(120.0, 100.0, 0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn bs_put_matches_quadrature_oracle() {
        // independent oracle: Simpson integration of the discounted payoff
        // against the lognormal terminal density
        let (s0, k, vol, r, t) = (100.0_f64, 100.0_f64, 0.2_f64, 0.05_f64, 1.0_f64);
        let n = 20_000usize;
        // integrate only where the payoff is non-zero (below the kink at
        // S_T = K) so Simpson keeps its full order
        let z_kink = ((k / s0).ln() - (r - 0.5 * vol * vol) * t) / (vol * t.sqrt());
        let (lo, hi) = (-12.0, z_kink);
        let h = (hi - lo) / n as f64;
        let integrand = |z: f64| {
            let st = s0 * ((r - 0.5 * vol * vol) * t + vol * t.sqrt() * z).exp();
            let payoff = (k - st).max(0.0);
            payoff * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let mut acc = integrand(lo) + integrand(hi);
        for i in 1..n {
            let z = lo + i as f64 * h;
            acc += integrand(z) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let expected = (-r * t).exp() * acc * h / 3.0;
        let got = black_scholes_put(s0, k, vol, r, t);
        assert_relative_eq!(got, expected, epsilon = 1e-9);
    }

    #[test]
    fn exp4_matches_std_exp() {
        // sweep the argument range the path loop can produce, plus extremes
        let mut worst = 0.0f64;
        let mut x = -700.0;
        while x <= 700.0 {
            let got = exp4([x, x + 0.1, x + 0.2, x + 0.3]);
            for (j, g) in got.iter().enumerate() {
                let want = (x + 0.1 * j as f64).exp();
                let rel = ((g - want) / want).abs();
                worst = worst.max(rel);
            }
            x += 0.37;
        }
        assert!(worst < 5e-13, "worst relative error {worst}");
        assert_eq!(exp4([0.0; 4]), [1.0; 4]);
        let sat = exp4([800.0, -800.0, 0.5, -0.5]);
        assert_eq!(sat[0], f64::INFINITY);
        assert_eq!(sat[1], 0.0);
    }

    #[test]
    fn norm_cdf_reference_values() {
        // reference values to 1e-12 (Φ(1.96), Φ(−1), Φ(0))
        assert_relative_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(norm_cdf(1.96), 0.975002104851780, epsilon = 1e-12);
        assert_relative_eq!(norm_cdf(-1.0), 0.158655253931457, epsilon = 1e-12);
        assert_relative_eq!(norm_cdf(5.0), 0.999999713348428, epsilon = 1e-12);
        for x in [-3.0f64, -0.5, 0.7, 2.5] {
            assert_relative_eq!(norm_cdf(x) + norm_cdf(-x), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    #[ignore = "timing diagnostic, run explicitly with --ignored"]
    fn throughput_diagnostic() {
        let universe = standard_universe(10);
        let snap = synthetic_snapshot(&universe, 42);
        let portfolio = crate::portfolio::generate_portfolio(400, &universe, 7).unwrap();
        let pricer = McPricer::new(McConfig::default());
        for count in [1usize, 3, 5, 10] {
            let spec = portfolio
                .iter()
                .find(|t| t.underlying_count() == count)
                .unwrap();
            let tp = pricer.prepare(spec, snap.correlation).unwrap();
            let reps = 50;
            let start = std::time::Instant::now();
            let mut acc = 0.0;
            for _ in 0..reps {
                acc += pricer.price_prepared(spec, &snap, &tp).unwrap();
            }
            let per_call = start.elapsed().as_secs_f64() / reps as f64;
            println!(
                "U={count} obs={} per-call {:.3} ms (acc {acc:.0})",
                spec.observation_dates.len(),
                per_call * 1e3
            );
        }
    }

    #[test]
    fn correlation_mismatch_rejected() {
        let snap = synthetic_snapshot(&standard_universe(1), 2);
        let spec = single_asset_spec(1.0, 0.7, 0.02, 8);
        let pricer = McPricer::new(McConfig {
            paths: 128,
            ..Default::default()
        });
        let tp = pricer.prepare(&spec, 0.25).unwrap();
        assert!(matches!(
            pricer.price_prepared(&spec, &snap, &tp),
            Err(PricerError::CorrelationMismatch { .. })
        ));
    }
}
