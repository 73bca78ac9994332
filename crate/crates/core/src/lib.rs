//! Research engine for multi-indicator reinforcement-learning trading.
//!
//! The pipeline runs: [`market_data`] loads and cleans daily OHLCV bars,
//! [`indicators`] turns them into per-asset feature vectors, [`env`] wraps
//! them in a multi-asset trading MDP, [`a2c`] trains an advantage
//! actor-critic agent built on [`nn`], [`baselines`] provides rule-based
//! comparison strategies and [`metrics`] scores the resulting equity curves.
//! [`experiment`] ties the stages together behind a config file.

pub mod a2c;
pub mod baselines;
pub mod env;
pub mod experiment;
pub mod indicators;
pub mod market_data;
pub mod metrics;
pub mod nn;
pub mod rng;
