//! Declarative experiments. An [`ExperimentSpec`] names a kind and its
//! parameters; [`run_experiment`] turns it into a [`ResultTable`] whose
//! criteria decide the exit status of the CLI.

pub mod ensembles;
pub mod numerics;
pub mod spec;
pub mod table;

pub use spec::{named_profile, ExperimentKind, ExperimentSpec};
pub use table::{emit, Provenance, ResultTable};

use crate::error::Result;

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    use ExperimentKind::*;
    match spec.kind {
        RepulsiveLimit => ensembles::run_repulsive_limit(spec),
        StickyLimit => ensembles::run_sticky_limit(spec),
        FourierDecay => ensembles::run_fourier_decay(spec),
        TerminationTime => ensembles::run_termination_time(spec),
        ContactDecay => ensembles::run_contact_decay(spec),
        Simulate => ensembles::run_simulate(spec),
        Coupling => ensembles::run_coupling(spec),
        StefanStudy => numerics::run_stefan_study(spec),
        HeatStudy => numerics::run_heat_study(spec),
        Equilibrium => numerics::run_equilibrium(spec),
        Oracle => numerics::run_oracle(spec),
        Agmon => numerics::run_agmon(spec),
    }
}

/// Provenance header for a spec's output files.
pub fn provenance(spec: &ExperimentSpec) -> Provenance {
    Provenance {
        config_hash: spec.config_hash(),
        seed_first: spec.seed,
        seed_last: spec.seed_last(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}
