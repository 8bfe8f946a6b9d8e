//! Chebyshev slider proxy engine for expected-shortfall capital on
//! worst-of equity autocallables.

pub mod market;
pub mod portfolio;
pub mod pricer;

pub use market::{
    apply_shocks, flatten, standard_universe, synthetic_snapshot, unflatten, CurveRole,
    MarketError, MarketSnapshot, RateCurve, RfType, RiskFactorKey, Taxonomy, UnderlyingId,
    VolSurface,
};
pub use portfolio::{generate_portfolio, AutocallableSpec, PortfolioError};
pub use pricer::{
    black_scholes_put, norm_cdf, CallCounter, McConfig, McEstimate, McPricer, PricerError,
    TradePaths,
};
