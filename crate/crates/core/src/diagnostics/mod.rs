//! Exponent-class diagnostics: iterated logarithms, the weights `b_{k,α}`,
//! log-Hölder moduli and Nekvinda's conditions.

mod iterlog;
mod modulus;
mod nekvinda;

pub use iterlog::{b_weight, iterated_exp, iterated_log};
pub use modulus::{
    grows_monotonically, holder_at, infinity_modulus, log_holder_modulus, HolderSampler, InfinitySampler,
    ModulusEstimate, ModulusWitness, PInf, ScaleMax,
};
pub use nekvinda::{
    annulus_integrals, check_n1, check_n2, decays_geometrically, n3_check_radial, n3_integrand, n3_oracle,
    nekvinda_check, sphere_area, GapModel, N1Report, N2Report, N3Report, NekvindaConfig, NekvindaReport,
    ANNULUS_NODES, GAP_EPS, N2_STABILITY,
};
