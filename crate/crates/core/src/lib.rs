//! Length spectra, geodesic stretch and thermodynamic functionals for
//! conformal perturbations of the Bolza surface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod busemann;
pub mod dd;
pub mod disk;
pub mod distances;
pub mod error;
pub mod exact;
pub mod flow;
pub mod fuchsian;
pub mod geodesics;
pub mod metric;
pub mod quadrature;
pub mod report;
pub mod thermo;
pub mod verify;

pub use disk::{Su11, C64};
pub use error::{Error, Result};
pub use fuchsian::{ClassRecord, FuchsianGroup, Octagon, Word};
pub use metric::{ConformalFactor, ConformalMetric, PhiSpec};
pub use report::FunctionalReport;
