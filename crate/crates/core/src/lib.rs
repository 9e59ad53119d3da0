//! Quantum-inspired portfolio dynamics: closed three-mode traders, traders
//! embedded in information reservoirs, and a pilot-wave mental field.

pub mod arrow;
pub mod closed_market;
pub mod cmath;
pub mod error;
pub mod fock;
pub mod pilotwave;
pub mod quad;
pub mod reservoir;
pub mod reservoir_generated;
pub mod reservoir_info;
pub mod series;

pub use closed_market::{build_t, occupations, portfolio_series, propagator, ClosedMarket, MarketInit, Propagator, TraderParams};
pub use error::{Error, Result};
pub use series::{dominant_frequency, peak_to_peak, uniform_grid, TimeSeries};
