//! Point-evaluable analytic fields and piecewise-constant coefficients.

use crate::geometry::{Point, Region};
use std::sync::Arc;

use super::FemError;

type ValueFn = dyn Fn(Point, Region) -> f64 + Send + Sync;
type GradientFn = dyn Fn(Point, Region) -> (f64, f64) + Send + Sync;

/// A scalar field given by closures over points. Evaluation receives the
/// region of the surrounding triangle, so piecewise fields with jumps across
/// the interface are sampled on the correct branch even at interface points.
#[derive(Clone)]
pub struct AnalyticField {
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl AnalyticField {
    pub fn new(value: impl Fn(Point, Region) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticField {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        value: impl Fn(Point, Region) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point, Region) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        AnalyticField {
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }

    /// Constant field, identical on both regions.
    pub fn constant(c: f64) -> Self {
        AnalyticField::with_gradient(move |_, _| c, |_, _| (0.0, 0.0))
    }

    /// Field scaled by -1; used to put a problem posed with the extension
    /// running the other way into canonical orientation (negating both the
    /// coefficient and the source leaves the solution unchanged).
    pub fn negated(&self) -> Self {
        let value = self.value.clone();
        let gradient = self.gradient.clone();
        AnalyticField {
            value: Arc::new(move |p, r| -value(p, r)),
            gradient: gradient.map(|g| {
                Arc::new(move |p: Point, r: Region| {
                    let (gx, gy) = g(p, r);
                    (-gx, -gy)
                }) as Arc<GradientFn>
            }),
        }
    }

    pub fn eval(&self, p: Point, region: Region) -> f64 {
        (self.value)(p, region)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn grad(&self, p: Point, region: Region) -> (f64, f64) {
        match &self.gradient {
            Some(g) => g(p, region),
            None => panic!("analytic field has no gradient"),
        }
    }

    /// Central-difference check that the stored gradient matches the values
    /// (step 1e-5, relative tolerance 1e-4). The caller supplies interior
    /// points per region, far enough from region boundaries for the stencil.
    pub fn check_gradient_consistency(&self, samples: &[(Point, Region)]) -> Result<(), FemError> {
        let step = 1e-5;
        for &(p, region) in samples {
            let (gx, gy) = self.grad(p, region);
            let fx = (self.eval(Point::new(p.x + step, p.y), region)
                - self.eval(Point::new(p.x - step, p.y), region))
                / (2.0 * step);
            let fy = (self.eval(Point::new(p.x, p.y + step), region)
                - self.eval(Point::new(p.x, p.y - step), region))
                / (2.0 * step);
            let scale = (gx.abs() + gy.abs()).max(1.0);
            if (fx - gx).abs() > 1e-4 * scale || (fy - gy).abs() > 1e-4 * scale {
                return Err(FemError::InconsistentGradient {
                    x: p.x,
                    y: p.y,
                    analytic: (gx, gy),
                    finite_difference: (fx, fy),
                });
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticField")
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

/// A coefficient taking one constant value per region. Both values must be
/// nonzero; signs are checked separately by whoever assembles with it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiecewiseConstantCoefficient {
    on_region1: f64,
    on_region2: f64,
}

impl PiecewiseConstantCoefficient {
    pub fn new(on_region1: f64, on_region2: f64) -> Result<Self, FemError> {
        if on_region1 == 0.0 || on_region2 == 0.0 {
            return Err(FemError::ZeroCoefficient);
        }
        Ok(PiecewiseConstantCoefficient {
            on_region1,
            on_region2,
        })
    }

    pub fn uniform(value: f64) -> Result<Self, FemError> {
        Self::new(value, value)
    }

    pub fn value(&self, region: Region) -> f64 {
        match region {
            Region::One => self.on_region1,
            Region::Two => self.on_region2,
        }
    }
}
