//! Physical and scenario data types, validation and scenario-file ingestion.

mod amplifier;
mod fibre;
mod grid;
mod pump;
mod scenario;

pub use amplifier::{AmplifierSpec, NoiseFigureBand, DEFAULT_TEMPERATURE};
pub use fibre::{
    attenuation_table_from_csv, default_attenuation_table, default_raman_gain_table,
    flat_attenuation_table, raman_gain_table_from_csv, zero_raman_gain_table, FibreSpec,
    ATTENUATION_COVERAGE,
};
pub use grid::{build_channel_grid, ChannelGrid};
pub use pump::{Direction, PumpLimits, PumpSpec};
pub use scenario::{load_scenario, parse_scenario, Fidelity, ScenarioConfig};
