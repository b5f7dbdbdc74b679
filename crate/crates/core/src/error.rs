use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} out of range: {reason}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("test function is nonzero outside B_2R (at x = {0})")]
    SupportViolation(f64),
    #[error("shift |z| = {z} must be smaller than R = {radius}")]
    ShiftTooLarge { z: f64, radius: f64 },
    #[error("exterior data is not integrable against the weight or kernel tail")]
    TailNotIntegrable,
    #[error("quadrature did not reach tolerance: error estimate {error:e} on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64, error: f64 },
    #[error("stiffness matrix is not positive definite")]
    SingularSystem,
    #[error("principal value does not converge at x = {0}: function is not smooth there")]
    PVDivergence(f64),
    #[error("ball B_{r}({x0}) is not compactly contained in ({lo}, {hi})")]
    BallNotCompactlyContained { x0: f64, r: f64, lo: f64, hi: f64 },
    #[error("embedding exponents coincide (s = r = {0})")]
    DegenerateGap(f64),
    #[error("fit window holds {0} dyadic levels, at least 4 are required")]
    WindowTooNarrow(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(&'static str),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value,
            reason,
        })
    }
}
