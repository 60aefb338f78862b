use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("`{name}` = {value} lies outside [{min}, {max}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error(
        "quadrature missed its tolerance: estimate {estimate:e}, error {error_estimate:e} \
         after {subdivisions} subdivisions"
    )]
    Quadrature {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    /// `k (1 - cos phi_max) / 2` exceeded one, so the spots cannot be disjoint.
    #[error("satellite spots overlap: k(1 - cos phi_max)/2 = {0} exceeds 1")]
    SpotOverlap(f64),

    #[error("device field needs {drawn} candidates, above the safety cap of {cap}")]
    DeviceCapExceeded { cap: u64, drawn: u64 },

    #[error("no grid point could be evaluated")]
    EmptySweep,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::DeviceCapExceeded { .. })
    }
}
