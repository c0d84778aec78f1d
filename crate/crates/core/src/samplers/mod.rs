//! Random sampling: the Poisson Boolean reference model, exact rejection and
//! birth–death samplers for the continuum random cluster model, a
//! Widom–Rowlinson sampler and the Fortuin–Kasteleyn colouring kernel.

mod exact;
mod fk;
mod mcmc;
mod poisson;
mod wr;

pub use exact::{sample_crcm_exact, ExactSampler};
pub use fk::{fk_color, SpanningRule};
pub use mcmc::{
    birth_acceptance, cell_size_hint, death_acceptance, default_burn_in, log_target_density, mcmc_step, run_chain, run_chain_with,
    ChainOptions, ChainRun, ChainState, MoveStats,
};
pub(crate) use poisson::poisson_count;
pub use poisson::{papangelou_weight, sample_poisson, sample_poisson_in, uniform_marked_point};
pub use wr::{sample_wr, ColoredConfiguration, ColoredPoint, WrChain, WrRun};
