//! Risk-factor taxonomy, market snapshots and shock application.
//!
//! A [`MarketSnapshot`] holds the full pricing state for a universe of equity
//! underlyings: one spot and one implied-volatility surface per underlying,
//! plus three zero curves (discount, funding, spread). Snapshots flatten to
//! ordered risk-factor vectors via a [`Taxonomy`], which fixes the key order
//! once and for all: spots by underlying id, then surfaces row-major by
//! expiry then moneyness, then the three curves by tenor. A trade over `U`
//! underlyings therefore sees `U + 72·U + 96` risk factors.
//!
//! Shock conventions: spots are log-multiplicative (`S·exp(shock)`), vols and
//! rates are additive, with vols floored at `1e-4`. Surfaces and curves
//! interpolate linearly inside their pillar grid and extrapolate flat.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vol shocks never push an implied volatility below this level.
pub const VOL_FLOOR: f64 = 1e-4;

/// Grid points on the standard 8x9 volatility surface.
pub const VOL_GRID_SIZE: usize = 72;
/// Pillars on the standard zero curve.
pub const CURVE_GRID_SIZE: usize = 32;
/// Number of curves in a snapshot (discount, funding, spread).
pub const CURVE_COUNT: usize = 3;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("pillars must be strictly increasing and non-empty: {0}")]
    BadPillars(&'static str),
    #[error("{0}")]
    BadShape(String),
    #[error("vector length {got} does not match taxonomy length {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("snapshot is missing {kind} for {id}")]
    MissingInstrument { kind: &'static str, id: String },
    #[error("risk factor {0} not present in target taxonomy")]
    UnknownKey(String),
    #[error("{0}")]
    Invalid(String),
}

/// Identifier of an equity underlying.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UnderlyingId(pub String);

impl UnderlyingId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for UnderlyingId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Role of a zero curve inside a snapshot. Taxonomy order is the enum order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CurveRole {
    Discount,
    Funding,
    Spread,
}

impl CurveRole {
    pub const ALL: [CurveRole; 3] = [CurveRole::Discount, CurveRole::Funding, CurveRole::Spread];

    pub fn name(self) -> &'static str {
        match self {
            CurveRole::Discount => "discount",
            CurveRole::Funding => "funding",
            CurveRole::Spread => "spread",
        }
    }
}

/// Risk-factor type; the unit of liquidity-horizon assignment and PCA.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RfType {
    Spot,
    Vol,
    Rate,
}

impl RfType {
    pub const ALL: [RfType; 3] = [RfType::Spot, RfType::Vol, RfType::Rate];
}

/// One addressable risk factor: a grid point of a spot, surface or curve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RiskFactorKey {
    pub rf_type: RfType,
    /// Underlying id for spot/vol keys, curve role name for rate keys.
    pub instrument: String,
    /// 0 for spots, row-major surface index for vols, pillar index for rates.
    pub grid_index: usize,
}

impl std::fmt::Display for RiskFactorKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let t = match self.rf_type {
            RfType::Spot => "spot",
            RfType::Vol => "vol",
            RfType::Rate => "rate",
        };
        write!(f, "{}:{}:{}", t, self.instrument, self.grid_index)
    }
}

fn check_strictly_increasing(xs: &[f64], what: &'static str) -> Result<(), MarketError> {
    if xs.len() < 2 {
        return Err(MarketError::BadPillars(what));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().any(|x| !x.is_finite()) {
        return Err(MarketError::BadPillars(what));
    }
    Ok(())
}

/// Locate `x` in `pillars` and return (lower index, interpolation weight).
/// Flat extrapolation outside the range.
fn bracket(pillars: &[f64], x: f64) -> (usize, f64) {
    let n = pillars.len();
    if x <= pillars[0] {
        return (0, 0.0);
    }
    if x >= pillars[n - 1] {
        return (n - 2, 1.0);
    }
    // partition_point is a binary search over the sorted pillars
    let hi = pillars.partition_point(|p| *p <= x).min(n - 1);
    let lo = hi - 1;
    let w = (x - pillars[lo]) / (pillars[hi] - pillars[lo]);
    (lo, w)
}

/// Implied-volatility surface on an expiry x moneyness grid.
///
/// The standard grid is 8 expiries x 9 moneyness ratios = 72 points; the
/// snapshot validation used by the scenario engine enforces that shape, while
/// the type itself accepts any grid of at least 2x2 so interpolation can be
/// exercised in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolSurface {
    pub expiry_pillars: Vec<f64>,
    pub moneyness_pillars: Vec<f64>,
    /// Row-major: `values[i][j]` is the vol at expiry `i`, moneyness `j`.
    pub values: Vec<Vec<f64>>,
}

impl VolSurface {
    pub fn new(
        expiry_pillars: Vec<f64>,
        moneyness_pillars: Vec<f64>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, MarketError> {
        check_strictly_increasing(&expiry_pillars, "vol surface expiries")?;
        check_strictly_increasing(&moneyness_pillars, "vol surface moneyness")?;
        if values.len() != expiry_pillars.len()
            || values.iter().any(|row| row.len() != moneyness_pillars.len())
        {
            return Err(MarketError::BadShape(format!(
                "vol values must be {}x{}",
                expiry_pillars.len(),
                moneyness_pillars.len()
            )));
        }
        if values.iter().flatten().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(MarketError::BadShape("vols must be positive".into()));
        }
        Ok(Self {
            expiry_pillars,
            moneyness_pillars,
            values,
        })
    }

    /// Standard expiry grid, in year fractions.
    pub fn standard_expiries() -> Vec<f64> {
        vec![1.0 / 12.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0]
    }

    /// Standard moneyness grid, as spot/fixing ratios.
    pub fn standard_moneyness() -> Vec<f64> {
        vec![0.5, 0.7, 0.85, 0.95, 1.0, 1.05, 1.15, 1.3, 1.5]
    }

    /// Constant surface on the standard grid; handy for degenerate pricers.
    pub fn flat(vol: f64) -> Self {
        let e = Self::standard_expiries();
        let m = Self::standard_moneyness();
        let values = vec![vec![vol; m.len()]; e.len()];
        Self::new(e, m, values).expect("flat surface is well formed")
    }

    pub fn grid_len(&self) -> usize {
        self.expiry_pillars.len() * self.moneyness_pillars.len()
    }

    /// Bilinear read at `(t, m)` with flat extrapolation beyond the grid.
    pub fn lookup(&self, t: f64, m: f64) -> f64 {
        let (i, wi) = bracket(&self.expiry_pillars, t);
        let (j, wj) = bracket(&self.moneyness_pillars, m);
        let v00 = self.values[i][j];
        let v01 = self.values[i][j + 1];
        let v10 = self.values[i + 1][j];
        let v11 = self.values[i + 1][j + 1];
        (1.0 - wi) * ((1.0 - wj) * v00 + wj * v01) + wi * ((1.0 - wj) * v10 + wj * v11)
    }

    /// Interpolate the surface in expiry only, producing one vol per
    /// moneyness pillar. The pricer calls this once per time step.
    pub fn row_at_expiry(&self, t: f64, out: &mut Vec<f64>) {
        let (i, wi) = bracket(&self.expiry_pillars, t);
        out.clear();
        out.extend(
            self.values[i]
                .iter()
                .zip(&self.values[i + 1])
                .map(|(lo, hi)| (1.0 - wi) * lo + wi * hi),
        );
    }
}

/// Zero curve with continuously compounded rates.
///
/// Linear interpolation in the zero rate, flat extrapolation. The standard
/// grid has 32 log-spaced pillars from one week to 30 years; smaller curves
/// are accepted for standalone use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub tenor_pillars: Vec<f64>,
    pub zero_rates: Vec<f64>,
}

impl RateCurve {
    pub fn new(tenor_pillars: Vec<f64>, zero_rates: Vec<f64>) -> Result<Self, MarketError> {
        check_strictly_increasing(&tenor_pillars, "curve tenors")?;
        if tenor_pillars[0] < 1.0 / 52.0 - 1e-12
            || *tenor_pillars.last().unwrap() > 30.0 + 1e-12
        {
            return Err(MarketError::BadPillars("curve tenors outside [1/52, 30]"));
        }
        if zero_rates.len() != tenor_pillars.len() || zero_rates.iter().any(|r| !r.is_finite()) {
            return Err(MarketError::BadShape(
                "zero rates must match tenor pillars".into(),
            ));
        }
        Ok(Self {
            tenor_pillars,
            zero_rates,
        })
    }

    /// Standard 32-pillar grid, log-spaced from 1/52 to 30 years.
    pub fn standard_tenors() -> Vec<f64> {
        let lo = (1.0_f64 / 52.0).ln();
        let hi = 30.0_f64.ln();
        let mut t: Vec<f64> = (0..CURVE_GRID_SIZE)
            .map(|i| (lo + (hi - lo) * i as f64 / (CURVE_GRID_SIZE - 1) as f64).exp())
            .collect();
        // pin the endpoints so the range invariant holds exactly
        t[0] = 1.0 / 52.0;
        t[CURVE_GRID_SIZE - 1] = 30.0;
        t
    }

    /// Flat curve on the standard grid.
    pub fn flat(rate: f64) -> Self {
        let tenors = Self::standard_tenors();
        let rates = vec![rate; tenors.len()];
        Self::new(tenors, rates).expect("flat curve is well formed")
    }

    /// Zero rate at `t`, linear between pillars, flat outside.
    pub fn zero_rate(&self, t: f64) -> f64 {
        let (i, w) = bracket(&self.tenor_pillars, t);
        (1.0 - w) * self.zero_rates[i] + w * self.zero_rates[i + 1]
    }

    /// Discount factor `exp(-z(t)·t)`; `t = 0` maps to exactly 1.
    pub fn discount_factor(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        (-self.zero_rate(t) * t).exp()
    }

    /// Continuously compounded forward rate over `[t1, t2]`.
    pub fn forward_rate(&self, t1: f64, t2: f64) -> f64 {
        debug_assert!(t2 > t1);
        (self.zero_rate(t2) * t2 - self.zero_rate(t1) * t1) / (t2 - t1)
    }
}

/// Full market state: spots, surfaces, curves and the constant pairwise
/// equity correlation used by the Monte Carlo pricer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSnapshot {
    pub spots: BTreeMap<UnderlyingId, f64>,
    pub surfaces: BTreeMap<UnderlyingId, VolSurface>,
    pub curves: BTreeMap<CurveRole, RateCurve>,
    pub correlation: f64,
}

impl MarketSnapshot {
    /// Validates the invariants needed by the scenario engine: positive
    /// spots, one 8x9 surface per underlying, exactly three 32-pillar
    /// curves, and a feasible correlation.
    pub fn validate(&self) -> Result<(), MarketError> {
        if self.spots.is_empty() {
            return Err(MarketError::Invalid("snapshot has no underlyings".into()));
        }
        for (id, s) in &self.spots {
            if !(*s > 0.0) {
                return Err(MarketError::Invalid(format!("spot {id} must be positive")));
            }
            let surf = self
                .surfaces
                .get(id)
                .ok_or_else(|| MarketError::MissingInstrument {
                    kind: "vol surface",
                    id: id.to_string(),
                })?;
            if surf.grid_len() != VOL_GRID_SIZE {
                return Err(MarketError::BadShape(format!(
                    "surface {id} has {} points, engine requires {VOL_GRID_SIZE}",
                    surf.grid_len()
                )));
            }
        }
        if self.surfaces.len() != self.spots.len() {
            return Err(MarketError::Invalid(
                "surfaces must match underlyings one-to-one".into(),
            ));
        }
        for role in CurveRole::ALL {
            let curve = self
                .curves
                .get(&role)
                .ok_or_else(|| MarketError::MissingInstrument {
                    kind: "curve",
                    id: role.name().to_string(),
                })?;
            if curve.tenor_pillars.len() != CURVE_GRID_SIZE {
                return Err(MarketError::BadShape(format!(
                    "curve {} has {} pillars, engine requires {CURVE_GRID_SIZE}",
                    role.name(),
                    curve.tenor_pillars.len()
                )));
            }
        }
        let n = self.spots.len() as f64;
        let lower = if n > 1.0 { -1.0 / (n - 1.0) } else { -1.0 };
        if !(self.correlation > lower && self.correlation < 1.0) {
            return Err(MarketError::Invalid(format!(
                "correlation {} outside ({lower}, 1)",
                self.correlation
            )));
        }
        Ok(())
    }

    pub fn underlying_ids(&self) -> Vec<UnderlyingId> {
        self.spots.keys().cloned().collect()
    }
}

/// Fixed ordering of risk-factor keys for one trade (or the whole universe).
///
/// Keys are laid out as three contiguous blocks: spots, vols, rates. The
/// block ranges let per-type consumers (PCA, liquidity masks) slice vectors
/// without key lookups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    underlyings: Vec<UnderlyingId>,
    keys: Vec<RiskFactorKey>,
    vol_grid: usize,
    curve_grid: usize,
}

impl Taxonomy {
    /// Taxonomy over the given underlyings with the standard grid shapes.
    /// Ids are sorted and deduplicated.
    pub fn new(underlyings: &[UnderlyingId]) -> Self {
        Self::with_grids(underlyings, VOL_GRID_SIZE, CURVE_GRID_SIZE)
    }

    fn with_grids(underlyings: &[UnderlyingId], vol_grid: usize, curve_grid: usize) -> Self {
        let mut ids: Vec<UnderlyingId> = underlyings.to_vec();
        ids.sort();
        ids.dedup();
        let mut keys = Vec::with_capacity(ids.len() * (1 + vol_grid) + CURVE_COUNT * curve_grid);
        for id in &ids {
            keys.push(RiskFactorKey {
                rf_type: RfType::Spot,
                instrument: id.0.clone(),
                grid_index: 0,
            });
        }
        for id in &ids {
            for g in 0..vol_grid {
                keys.push(RiskFactorKey {
                    rf_type: RfType::Vol,
                    instrument: id.0.clone(),
                    grid_index: g,
                });
            }
        }
        for role in CurveRole::ALL {
            for g in 0..curve_grid {
                keys.push(RiskFactorKey {
                    rf_type: RfType::Rate,
                    instrument: role.name().to_string(),
                    grid_index: g,
                });
            }
        }
        Self {
            underlyings: ids,
            keys,
            vol_grid,
            curve_grid,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[RiskFactorKey] {
        &self.keys
    }

    pub fn underlyings(&self) -> &[UnderlyingId] {
        &self.underlyings
    }

    pub fn underlying_count(&self) -> usize {
        self.underlyings.len()
    }

    pub fn spot_range(&self) -> Range<usize> {
        0..self.underlyings.len()
    }

    pub fn vol_range(&self) -> Range<usize> {
        let u = self.underlyings.len();
        u..u + u * self.vol_grid
    }

    pub fn rate_range(&self) -> Range<usize> {
        let u = self.underlyings.len();
        u + u * self.vol_grid..self.keys.len()
    }

    pub fn range_of(&self, rf_type: RfType) -> Range<usize> {
        match rf_type {
            RfType::Spot => self.spot_range(),
            RfType::Vol => self.vol_range(),
            RfType::Rate => self.rate_range(),
        }
    }

    /// For each key of `self`, its column index in `universe`. Fails if any
    /// key is absent, i.e. `self` is not a sub-taxonomy.
    pub fn index_in(&self, universe: &Taxonomy) -> Result<Vec<usize>, MarketError> {
        let lookup: BTreeMap<&RiskFactorKey, usize> = universe
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        self.keys
            .iter()
            .map(|k| {
                lookup
                    .get(k)
                    .copied()
                    .ok_or_else(|| MarketError::UnknownKey(k.to_string()))
            })
            .collect()
    }
}

fn snapshot_parts<'a>(
    snapshot: &'a MarketSnapshot,
    taxonomy: &Taxonomy,
) -> Result<(Vec<f64>, Vec<&'a VolSurface>, Vec<&'a RateCurve>), MarketError> {
    let mut spots = Vec::with_capacity(taxonomy.underlyings.len());
    let mut surfaces = Vec::with_capacity(taxonomy.underlyings.len());
    for id in &taxonomy.underlyings {
        spots.push(*snapshot.spots.get(id).ok_or_else(|| {
            MarketError::MissingInstrument {
                kind: "spot",
                id: id.to_string(),
            }
        })?);
        let surf = snapshot
            .surfaces
            .get(id)
            .ok_or_else(|| MarketError::MissingInstrument {
                kind: "vol surface",
                id: id.to_string(),
            })?;
        if surf.grid_len() != taxonomy.vol_grid {
            return Err(MarketError::BadShape(format!(
                "surface {id} grid {} does not match taxonomy grid {}",
                surf.grid_len(),
                taxonomy.vol_grid
            )));
        }
        surfaces.push(surf);
    }
    let mut curves = Vec::with_capacity(CURVE_COUNT);
    for role in CurveRole::ALL {
        let curve = snapshot
            .curves
            .get(&role)
            .ok_or_else(|| MarketError::MissingInstrument {
                kind: "curve",
                id: role.name().to_string(),
            })?;
        if curve.tenor_pillars.len() != taxonomy.curve_grid {
            return Err(MarketError::BadShape(format!(
                "curve {} pillar count {} does not match taxonomy grid {}",
                role.name(),
                curve.tenor_pillars.len(),
                taxonomy.curve_grid
            )));
        }
        curves.push(curve);
    }
    Ok((spots, surfaces, curves))
}

/// Read the snapshot levels into a flat vector in taxonomy order.
pub fn flatten(snapshot: &MarketSnapshot, taxonomy: &Taxonomy) -> Result<Vec<f64>, MarketError> {
    let (spots, surfaces, curves) = snapshot_parts(snapshot, taxonomy)?;
    let mut out = Vec::with_capacity(taxonomy.len());
    out.extend_from_slice(&spots);
    for surf in surfaces {
        for row in &surf.values {
            out.extend_from_slice(row);
        }
    }
    for curve in curves {
        out.extend_from_slice(&curve.zero_rates);
    }
    Ok(out)
}

/// Write flat levels back into a copy of `base`. Inverse of [`flatten`].
pub fn unflatten(
    base: &MarketSnapshot,
    taxonomy: &Taxonomy,
    values: &[f64],
) -> Result<MarketSnapshot, MarketError> {
    if values.len() != taxonomy.len() {
        return Err(MarketError::LengthMismatch {
            got: values.len(),
            want: taxonomy.len(),
        });
    }
    snapshot_parts(base, taxonomy)?;
    let mut out = base.clone();
    let mut idx = 0;
    for id in &taxonomy.underlyings {
        *out.spots.get_mut(id).unwrap() = values[idx];
        idx += 1;
    }
    for id in &taxonomy.underlyings {
        let surf = out.surfaces.get_mut(id).unwrap();
        for row in surf.values.iter_mut() {
            for v in row.iter_mut() {
                *v = values[idx];
                idx += 1;
            }
        }
    }
    for role in CurveRole::ALL {
        let curve = out.curves.get_mut(&role).unwrap();
        for r in curve.zero_rates.iter_mut() {
            *r = values[idx];
            idx += 1;
        }
    }
    Ok(out)
}

/// Apply a shock vector to `base`, honouring the per-key mask (`None`
/// shocks everything). Spots move log-multiplicatively, vols additively
/// with the [`VOL_FLOOR`], rates additively.
pub fn apply_shocks(
    base: &MarketSnapshot,
    taxonomy: &Taxonomy,
    shocks: &[f64],
    mask: Option<&[bool]>,
) -> Result<MarketSnapshot, MarketError> {
    if shocks.len() != taxonomy.len() {
        return Err(MarketError::LengthMismatch {
            got: shocks.len(),
            want: taxonomy.len(),
        });
    }
    if let Some(m) = mask {
        if m.len() != taxonomy.len() {
            return Err(MarketError::LengthMismatch {
                got: m.len(),
                want: taxonomy.len(),
            });
        }
    }
    snapshot_parts(base, taxonomy)?;
    let on = |i: usize| mask.map_or(true, |m| m[i]);

    let mut out = base.clone();
    let mut idx = 0;
    for id in &taxonomy.underlyings {
        if on(idx) {
            *out.spots.get_mut(id).unwrap() *= shocks[idx].exp();
        }
        idx += 1;
    }
    for id in &taxonomy.underlyings {
        let surf = out.surfaces.get_mut(id).unwrap();
        for row in surf.values.iter_mut() {
            for v in row.iter_mut() {
                if on(idx) {
                    *v = (*v + shocks[idx]).max(VOL_FLOOR);
                }
                idx += 1;
            }
        }
    }
    for role in CurveRole::ALL {
        let curve = out.curves.get_mut(&role).unwrap();
        for r in curve.zero_rates.iter_mut() {
            if on(idx) {
                *r += shocks[idx];
            }
            idx += 1;
        }
    }
    Ok(out)
}

/// Deterministic synthetic market for a universe of underlyings: spots near
/// 100, upward-sloping skewed surfaces, and three gently sloped curves.
pub fn synthetic_snapshot(universe: &[UnderlyingId], seed: u64) -> MarketSnapshot {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x6d61726b);

    let mut ids: Vec<UnderlyingId> = universe.to_vec();
    ids.sort();
    ids.dedup();

    let expiries = VolSurface::standard_expiries();
    let moneyness = VolSurface::standard_moneyness();

    let mut spots = BTreeMap::new();
    let mut surfaces = BTreeMap::new();
    for id in &ids {
        let spot = 100.0 * (1.0 + rng.gen_range(-0.1..0.1));
        let base_vol: f64 = rng.gen_range(0.18..0.30);
        let skew: f64 = rng.gen_range(0.05..0.12);
        let smile: f64 = rng.gen_range(0.02..0.06);
        let term: f64 = rng.gen_range(-0.03..0.03);
        let values = expiries
            .iter()
            .map(|&t| {
                moneyness
                    .iter()
                    .map(|&m| {
                        let v = base_vol
                            + skew * (1.0 - m) * (-0.3 * t).exp()
                            + smile * (m - 1.0).powi(2)
                            + term * (1.0 - (-t / 2.0).exp());
                        v.max(0.05)
                    })
                    .collect()
            })
            .collect();
        spots.insert(id.clone(), spot);
        surfaces.insert(
            id.clone(),
            VolSurface::new(expiries.clone(), moneyness.clone(), values)
                .expect("synthetic surface is well formed"),
        );
    }

    let tenors = RateCurve::standard_tenors();
    let mut curves = BTreeMap::new();
    for (role, level, slope) in [
        (CurveRole::Discount, 0.020, 0.012),
        (CurveRole::Funding, 0.023, 0.012),
        (CurveRole::Spread, 0.008, 0.004),
    ] {
        let rates = tenors
            .iter()
            .map(|&t| level + slope * (1.0 - (-t / 8.0).exp()))
            .collect();
        curves.insert(role, RateCurve::new(tenors.clone(), rates).unwrap());
    }

    MarketSnapshot {
        spots,
        surfaces,
        curves,
        correlation: 0.5,
    }
}

/// Standard universe ids `EQ_00 .. EQ_{n-1}`.
pub fn standard_universe(n: usize) -> Vec<UnderlyingId> {
    (0..n)
        .map(|i| UnderlyingId::new(format!("EQ_{i:02}")))
        .collect()
}
