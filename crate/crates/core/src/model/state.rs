use std::ops::Index;

use crate::num::Real;

/// Real-valued system state of environment-defined dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<R>(Vec<R>);

impl<R: Real> StateVector<R> {
    pub fn new(values: Vec<R>) -> Self {
        Self(values)
    }

    /// One-dimensional state.
    pub fn scalar(value: R) -> Self {
        Self(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[R] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [R] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<R> {
        self.0
    }

    /// Value of a one-dimensional state.
    pub fn as_scalar(&self) -> R {
        debug_assert_eq!(self.0.len(), 1);
        self.0[0]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, R> {
        self.0.iter()
    }
}

impl<R: Real> Index<usize> for StateVector<R> {
    type Output = R;

    fn index(&self, i: usize) -> &R {
        &self.0[i]
    }
}

impl<R: Real> From<Vec<R>> for StateVector<R> {
    fn from(values: Vec<R>) -> Self {
        Self(values)
    }
}

/// Norm an environment declares its contraction in.
///
/// The epidemic model contracts in `L1`, the game in `L2`; for scalar
/// states the two coincide with the absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    /// `‖v‖` in this norm.
    pub fn magnitude<R: Real>(self, v: &[R]) -> R {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| *x * *x).sum::<R>().sqrt(),
        }
    }

    /// `‖a − b‖` in this norm.
    pub fn distance<R: Real>(self, a: &[R], b: &[R]) -> R {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).sum(),
            Norm::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (*x - *y) * (*x - *y))
                .sum::<R>()
                .sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_on_simple_vectors() {
        let a = [3.0f64, -4.0];
        let b = [0.0f64, 0.0];
        assert_eq!(Norm::L1.distance(&a, &b), 7.0);
        assert_eq!(Norm::L2.distance(&a, &b), 5.0);
        assert_eq!(Norm::L1.magnitude(&a), 7.0);
    }

    #[test]
    fn scalar_state_round_trip() {
        let z = StateVector::scalar(0.25f64);
        assert_eq!(z.dim(), 1);
        assert_eq!(z.as_scalar(), 0.25);
        assert_eq!(z[0], 0.25);
    }
}
