//! A conformal rescaling with `e^φ = 1/‖ν‖` near a point where ν is nonzero.
//! Its multi-moment map is `ν/‖ν‖`, which takes values in the unit sphere of
//! Λ²𝔱* and so is nowhere a submersion on the window `‖ν‖ ≥ ε`.

use crate::differential::FdParams;
use crate::error::GeomError;
use crate::frame::ConfigPoint;
use crate::moment::{fd_jacobian, nu, Jacobian, MomentValue};
use crate::torus::TorusSpec;

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledMoment {
    pub spec: TorusSpec,
    epsilon: f64,
}

impl RescaledMoment {
    pub fn new(spec: TorusSpec, epsilon: f64) -> Result<Self, GeomError> {
        if !(epsilon > 0.0) {
            return Err(GeomError::NuTooSmall { norm: 0.0, epsilon });
        }
        Ok(Self { spec, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn in_window(&self, cfg: &ConfigPoint) -> bool {
        nu(&self.spec, cfg).norm() >= self.epsilon
    }

    /// `φ = −log‖ν‖`.
    pub fn conformal_factor(&self, cfg: &ConfigPoint) -> Result<f64, GeomError> {
        Ok(-self.windowed_nu(cfg)?.norm().ln())
    }

    fn windowed_nu(&self, cfg: &ConfigPoint) -> Result<MomentValue, GeomError> {
        let v = nu(&self.spec, cfg);
        let norm = v.norm();
        if norm < self.epsilon {
            return Err(GeomError::NuTooSmall {
                norm,
                epsilon: self.epsilon,
            });
        }
        Ok(v)
    }

    pub fn nu_hat(&self, cfg: &ConfigPoint) -> Result<MomentValue, GeomError> {
        let v = self.windowed_nu(cfg)?;
        Ok(v.scale(1.0 / v.norm()))
    }

    /// FD Jacobian of `ν̂`. Stencil points are not re-checked against the window,
    /// which only matters within one step of its edge.
    pub fn jacobian(&self, cfg: &ConfigPoint, fd: &FdParams) -> Result<Jacobian, GeomError> {
        self.windowed_nu(cfg)?;
        fd_jacobian(
            |x| {
                let v = nu(&self.spec, x);
                v.scale(1.0 / v.norm())
            },
            cfg,
            fd,
        )
    }

    pub fn rank(&self, cfg: &ConfigPoint, fd: &FdParams) -> Result<usize, GeomError> {
        Ok(self.jacobian(cfg, fd)?.rank())
    }
}

pub fn nu_hat(spec: &TorusSpec, cfg: &ConfigPoint) -> Result<MomentValue, GeomError> {
    RescaledMoment::new(*spec, DEFAULT_EPSILON)?.nu_hat(cfg)
}

pub fn nu_hat_rank(spec: &TorusSpec, cfg: &ConfigPoint, fd: &FdParams) -> Result<usize, GeomError> {
    RescaledMoment::new(*spec, DEFAULT_EPSILON)?.rank(cfg, fd)
}
