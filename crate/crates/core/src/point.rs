//! Opinion coordinates in `R^d`.

use std::ops::{Add, Sub};

use crate::{Error, Result, Scalar};

/// An opinion point in `R^d`. All components are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<S: Scalar> {
    coords: Vec<S>,
}

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("point has non-finite component".into()));
        }
        Ok(Self { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: vec![S::zero(); dim] }
    }

    /// 1-D convenience constructor.
    pub fn scalar(x: S) -> Self {
        Self { coords: vec![x] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn from_slice(coords: &[S]) -> Self {
        Self { coords: coords.to_vec() }
    }

    pub fn dot(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            acc += *a * *b;
        }
        acc
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            let d = *a - *b;
            acc += d * d;
        }
        acc.sqrt()
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self { coords: self.coords.iter().map(|c| *c * factor).collect() }
    }

    pub fn axpy(&mut self, factor: S, other: &Self) {
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += factor * *b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl<S: Scalar> Add for &Point<S> {
    type Output = Point<S>;
    fn add(self, rhs: &Point<S>) -> Point<S> {
        Point { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| *a + *b).collect() }
    }
}

impl<S: Scalar> Sub for &Point<S> {
    type Output = Point<S>;
    fn sub(self, rhs: &Point<S>) -> Point<S> {
        Point { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| *a - *b).collect() }
    }
}
