//! Linear dispersive building blocks: the oscillatory kernel `B`, the
//! forcing constant and vertex trace constants, Riemann–Liouville
//! fractional integrals, the free propagator and the boundary forcing
//! operator `L0`.

mod duhamel;
mod fractional;
mod kernel;
mod propagator;
pub(crate) mod quadrature;

pub use duhamel::{duhamel_forcing, DuhamelForcing};
pub use fractional::{riemann_liouville, SampledSignal};
pub use kernel::{
    airy5, airy5_full, forcing_constant, kernel_at_zero_closed_form, trace_coefficient_minus, trace_coefficient_plus,
    trace_minus_via_kernel, trace_plus_via_kernel, KernelEvaluation, KernelTable, KernelValue, KERNEL_FAIL, KERNEL_RANGE,
    KERNEL_TOL, TABLE_STEP,
};
pub use propagator::{free_propagator, grid_frequency};
