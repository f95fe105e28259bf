use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },
    #[error("tangent vectors are anchored at different points")]
    AnchorMismatch,
    #[error("ambient vector is not tangent to S3xS3 (normal component {normal})")]
    NotTangent { normal: f64 },
    #[error("finite-difference step {step} outside [1e-7, 1e-2]")]
    StepOutOfRange { step: f64 },
    #[error("frame index {0} outside 1..=6")]
    FrameIndex(usize),
    #[error("argument ({y}, {z}) outside the domain of the boundary sheets")]
    Domain { y: f64, z: f64 },
    #[error("Hessian of a sheet is undefined on |Y| = 1 or |Z| = 1")]
    SheetEdge,
    #[error("mesh resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("|nu| = {norm} is below the rescaling window cutoff {epsilon}")]
    NuTooSmall { norm: f64, epsilon: f64 },
    #[error("point lies outside the image of the multi-moment map")]
    OutsideImage,
    #[error("x is not on the circle x.C = tau_2 (residual {residual})")]
    NotOnCircle { residual: f64 },
    #[error("degenerate Gram matrix (|tau_2| = 1); use the vertex path")]
    DegenerateGram,
    #[error("vertices of an edge must be distinct members of V")]
    BadEdge,
}
