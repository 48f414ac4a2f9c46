//! Experiments on the `ε → 0` limit: sweeps, fitted rates, moduli of
//! continuity in time, the pressure wave residual, the initial layer, the
//! weighted pressure norms and the limit pressure.

pub mod checks;
pub mod fit;
pub mod layer;
pub mod modulus;
pub mod pressure;
pub mod strichartz;
pub mod sweep;
pub mod wave;

pub use checks::{dyadic_alphas, mollifier_suite, projector_suite, Bound, MollifierSuite, PropertyRow, PropertyTable};
pub use fit::{fit_power_law, strictly_decreasing, strictly_increasing, PowerFit};
pub use layer::{acoustic_frequency, dominant_frequency, initial_layer_probe, LayerReport, LayerRow};
pub use modulus::{time_modulus, ModulusField, ModulusTable};
pub use pressure::{pressure_limit_against, pressure_limit_check, PressureLimit, WINDOW_FACTOR};
pub use strichartz::{strichartz_scaling_report, StrichartzReport, StrichartzRow, TORUS_CAVEAT};
pub use sweep::{
    epsilon_sweep, paper_q_exponent, q_component_decay, run_with_norms, InitialNorms, LayerTrace, MonotoneCheck,
    NormRequest, QDecay, SweepConfig, SweepField, SweepReport, SweepRow,
};
pub use wave::{pressure_wave_residual, WaveResidual};
