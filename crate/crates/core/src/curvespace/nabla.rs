//! The category ∇ of curve parameters: objects are diagonal points `(x, x)`
//! of the unit square, morphisms are pairs `(x, y)` with `x ≤ y`, and
//! `(x, y)` followed by `(y, z)` is `(x, z)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NablaMorphism {
    x: f64,
    y: f64,
}

impl NablaMorphism {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) && x <= y {
            Ok(Self { x, y })
        } else {
            Err(Error::InvalidNabla(x, y))
        }
    }

    /// Identity at the object `x`.
    pub fn identity(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    /// Domain object.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// Codomain object.
    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn is_identity(&self) -> bool {
        self.x == self.y
    }
}

/// `f` then `g`; requires `f.y == g.x` exactly.
pub fn nabla_compose(f: NablaMorphism, g: NablaMorphism) -> Result<NablaMorphism> {
    if f.y != g.x {
        return Err(Error::NonComposable(f.x, f.y, g.x, g.y));
    }
    Ok(NablaMorphism { x: f.x, y: g.y })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: f64, y: f64) -> NablaMorphism {
        NablaMorphism::new(x, y).unwrap()
    }

    #[test]
    fn identity_composes_to_itself() {
        let id = NablaMorphism::identity(0.3).unwrap();
        assert_eq!(nabla_compose(id, id).unwrap(), id);
    }

    #[test]
    fn composition_rule() {
        assert_eq!(nabla_compose(m(0.2, 0.5), m(0.5, 0.9)).unwrap(), m(0.2, 0.9));
    }

    #[test]
    fn non_composable() {
        assert!(matches!(
            nabla_compose(m(0.2, 0.5), m(0.6, 0.9)),
            Err(Error::NonComposable(..))
        ));
    }

    #[test]
    fn outside_triangle_is_rejected() {
        assert!(NablaMorphism::new(0.6, 0.5).is_err());
        assert!(NablaMorphism::new(-0.1, 0.5).is_err());
        assert!(NablaMorphism::new(0.1, 1.5).is_err());
        assert!(NablaMorphism::new(0.0, 1.0).is_ok());
    }
}
