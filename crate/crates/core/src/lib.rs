//! Citation histories modelled as SIR epidemics.
//!
//! A hit paper "infects" susceptible papers, which cite it and may in turn
//! prompt further citations until they are removed. The crate integrates the
//! model ([`sir`]), computes the ultimate impact ([`impact`]), fits the model
//! to monthly cumulative counts ([`fitting`]), builds series from raw citing
//! pairs ([`ingest`]), generates synthetic cohorts ([`synth`]) and aggregates
//! fits into journal rankings ([`cohort`]).

pub mod cli;
pub mod cohort;
pub mod error;
pub mod fitting;
pub mod impact;
pub mod ingest;
mod optim;
pub mod sir;
pub mod synth;

pub use error::{Error, Result};
pub use fitting::{fit, FitConfig, FitRecord, FitResult};
pub use impact::{solve_ultimate_impact, solve_upsilon, ImpactEstimate};
pub use ingest::CitationSeries;
pub use sir::{integrate, EpidemicParams, EpidemicState, Trajectory};
