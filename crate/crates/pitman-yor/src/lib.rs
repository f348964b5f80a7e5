//! Simulation and numerical verification toolkit for the two-parameter
//! Poisson-Dirichlet distribution `PD(alpha, theta)` and the Pitman-Yor
//! random measure.
//!
//! The crate is organized around five public modules:
//!
//! * [`stable`] — one-sided stable law of index `alpha in (0,1)`: integral
//!   representations of its distribution function and density, log-domain
//!   tail probabilities, an exact two-uniform sampler, and the moments and
//!   density of the associated Mittag-Leffler law.
//! * [`sampler`] — stick-breaking and subordinator-ladder samplers for the
//!   ranked weights of `PD(alpha, theta)`, the Pitman-Yor random measure
//!   with uniform base distribution, ratio sequences, cell-mass draws over
//!   interval partitions, and the moment generating function of the inverse
//!   largest weight.
//! * [`rates`] — large-deviation rate functions on sequence space and on
//!   partition grids, their contraction identities, and the sup-over-grids
//!   evaluation for finite mixtures.
//! * [`partition`] — diversity statistics: power sums `phi_m`, the
//!   conditional sampling formula for integer partitions, closed-form
//!   moments, coalescence probabilities, and the Ewens fluctuation
//!   statistic.
//! * [`experiments`] — deterministic, replica-parallel verification suites
//!   that tie the samplers to the closed forms and produce machine-readable
//!   reports.
//!
//! Supporting infrastructure lives in [`quad`] (adaptive Gauss-Kronrod
//! quadrature with a log-domain path for extreme tails) and [`stats`]
//! (Kolmogorov-Smirnov tests, sample moments, least squares).

pub mod experiments;
pub mod partition;
pub mod quad;
pub mod rates;
pub mod sampler;
pub mod stable;
pub mod stats;
