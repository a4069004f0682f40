//! Truncated Fourier 3-form fields on flat tori T⁶ and T⁷, the volume functionals
//! on a fixed cohomology class, critical-point search and the second variation.

mod flow;
mod fourier;
mod hessian;
pub mod kernels;

pub use flow::{
    descend, functional_gradient, functional_gradient_field, functional_value, initial_potential, residual,
    thread_count, CohomologyClass, FlowConfig, FlowReport, FlowStatus, HessianSummary, Mode,
};
pub use fourier::{codifferential, exterior_derivative, FourierForm};
pub use hessian::{moduli_metric, pointwise_hessian, transverse_hessian, ModuliMetric, TransverseHessian};
