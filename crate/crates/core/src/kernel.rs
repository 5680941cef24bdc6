//! Influence kernels: positive, bounded, Lipschitz weights between opinions.
//!
//! All builtin families are radial and non-increasing in the separation
//! `|x - y|`, which makes the ball-restricted minimum available in closed
//! form: the minimum over `|x|, |y| <= r` is attained at separation `2r`.

use crate::point::Point;
use crate::{cast, Error, Result, Scalar};

/// A positive, bounded, Lipschitz influence function on `R^d x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel<S: Scalar> {
    /// `k(x, y) = c`.
    Constant { level: S },
    /// `k(x, y) = c / (1 + |x - y|^2)^beta`, `beta > 0`.
    InversePower { scale: S, exponent: S },
    /// `k(x, y) = c * exp(-|x - y|^2 / sigma^2) + floor`, `floor > 0`.
    ///
    /// The explicit floor keeps strict positivity at large separations,
    /// which the consensus rate needs (`Lambda > 0`).
    TruncatedExponential { scale: S, width: S, floor: S },
}

impl<S: Scalar> Kernel<S> {
    pub fn constant(level: S) -> Result<Self> {
        if !level.is_finite() || level <= S::zero() {
            return Err(Error::InvalidArgument("constant kernel level must be positive".into()));
        }
        Ok(Kernel::Constant { level })
    }

    pub fn inverse_power(scale: S, exponent: S) -> Result<Self> {
        if !scale.is_finite() || scale <= S::zero() {
            return Err(Error::InvalidArgument("inverse-power scale must be positive".into()));
        }
        if !exponent.is_finite() || exponent <= S::zero() {
            return Err(Error::InvalidArgument("inverse-power exponent must be positive".into()));
        }
        Ok(Kernel::InversePower { scale, exponent })
    }

    pub fn truncated_exponential(scale: S, width: S, floor: S) -> Result<Self> {
        if !scale.is_finite() || scale <= S::zero() {
            return Err(Error::InvalidArgument("exponential kernel scale must be positive".into()));
        }
        if !width.is_finite() || width <= S::zero() {
            return Err(Error::InvalidArgument("exponential kernel width must be positive".into()));
        }
        if !floor.is_finite() || floor <= S::zero() {
            return Err(Error::InvalidArgument("exponential kernel floor must be positive".into()));
        }
        Ok(Kernel::TruncatedExponential { scale, width, floor })
    }

    /// Kernel value as a function of the separation `r = |x - y|`.
    pub fn profile(&self, r: S) -> S {
        match *self {
            Kernel::Constant { level } => level,
            Kernel::InversePower { scale, exponent } => {
                scale / (S::one() + r * r).powf(exponent)
            }
            Kernel::TruncatedExponential { scale, width, floor } => {
                scale * (-(r * r) / (width * width)).exp() + floor
            }
        }
    }

    pub fn eval(&self, x: &Point<S>, y: &Point<S>) -> S {
        self.profile(x.dist(y))
    }

    /// Sup norm of the kernel.
    pub fn sup_bound(&self) -> S {
        match *self {
            Kernel::Constant { level } => level,
            Kernel::InversePower { scale, .. } => scale,
            Kernel::TruncatedExponential { scale, floor, .. } => scale + floor,
        }
    }

    /// Joint Lipschitz constant with respect to `|x - x'| + |y - y'|`.
    ///
    /// For a radial kernel `k(x, y) = g(|x - y|)` this is `sup |g'|`.
    pub fn lipschitz_const(&self) -> S {
        match *self {
            Kernel::Constant { .. } => S::zero(),
            Kernel::InversePower { scale, exponent } => {
                // |g'(r)| = 2 c beta r / (1 + r^2)^(beta + 1), maximal at
                // r* = 1 / sqrt(2 beta + 1).
                let two = cast::<S>(2.0);
                let r = (two * exponent + S::one()).sqrt().recip();
                two * scale * exponent * r / (S::one() + r * r).powf(exponent + S::one())
            }
            Kernel::TruncatedExponential { scale, width, .. } => {
                // |g'(r)| maximal at r* = sigma / sqrt(2).
                cast::<S>(2.0f64.sqrt()) * scale / width * cast::<S>((-0.5f64).exp())
            }
        }
    }

    /// Minimum of the kernel over `|x|, |y| <= radius`.
    ///
    /// All builtin families are radially non-increasing, so the minimum is
    /// the closed-form value at the maximal separation `2 * radius`.
    pub fn min_on_ball(&self, radius: S) -> Result<S> {
        if !radius.is_finite() || radius < S::zero() {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be finite and non-negative, got {radius}"
            )));
        }
        Ok(self.profile(cast::<S>(2.0) * radius))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_on_ball_inverse_power() {
        let k: Kernel<f64> = Kernel::inverse_power(1.0, 1.0).unwrap();
        // closed form at separation 2: 1 / (1 + 4)
        assert!((k.min_on_ball(1.0).unwrap() - 0.2).abs() < 1e-15);
        // zero-radius ball collapses to x = y
        assert_eq!(k.min_on_ball(0.0).unwrap(), 1.0);
    }

    #[test]
    fn min_on_ball_constant() {
        let k = Kernel::constant(0.7).unwrap();
        assert_eq!(k.min_on_ball(3.5).unwrap(), 0.7);
    }

    #[test]
    fn min_on_ball_rejects_non_finite_radius() {
        let k = Kernel::constant(1.0).unwrap();
        assert!(k.min_on_ball(f64::NAN).is_err());
        assert!(k.min_on_ball(-1.0).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(Kernel::constant(0.0).is_err());
        assert!(Kernel::inverse_power(1.0, -1.0).is_err());
        assert!(Kernel::truncated_exponential(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn eval_matches_profile() {
        let k = Kernel::truncated_exponential(1.0, 2.0, 1e-6).unwrap();
        let x = Point::new(vec![0.0, 0.0]).unwrap();
        let y = Point::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(k.eval(&x, &y), k.profile(5.0));
    }
}
