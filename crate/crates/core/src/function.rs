//! Functions sampled on the grid `V_K` and step functions on generation-`K`
//! cells.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{Dyadic, Scalar};

/// Values at the `2^K + 1` points `j 2^-K`; affine in between.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<S> {
    resolution: u32,
    values: Vec<S>,
}

impl<S: Scalar> SampledFunction<S> {
    pub fn new(resolution: u32, values: Vec<S>) -> Result<Self> {
        let expected = (1usize << resolution) + 1;
        if values.len() != expected {
            return Err(Error::Length { expected, got: values.len() });
        }
        Ok(SampledFunction { resolution, values })
    }

    pub fn zero(resolution: u32) -> Self {
        SampledFunction { resolution, values: alloc::vec![S::zero(); (1usize << resolution) + 1] }
    }

    pub fn from_fn(resolution: u32, mut f: impl FnMut(Dyadic) -> S) -> Self {
        let values = (0..=(1u64 << resolution)).map(|j| f(Dyadic::grid(j, resolution))).collect();
        SampledFunction { resolution, values }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.clone() - b.clone()).collect();
        SampledFunction { resolution: self.resolution, values }
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.clone() + b.clone()).collect();
        SampledFunction { resolution: self.resolution, values }
    }

    pub fn close_to(&self, other: &Self) -> bool {
        self.values.len() == other.values.len() && self.values.iter().zip(&other.values).all(|(a, b)| a.close_to(b))
    }
}

/// Values on the `2^K` cells `[i 2^-K, (i+1) 2^-K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<S> {
    resolution: u32,
    values: Vec<S>,
}

impl<S: Scalar> StepFunction<S> {
    pub fn new(resolution: u32, values: Vec<S>) -> Result<Self> {
        let expected = 1usize << resolution;
        if values.len() != expected {
            return Err(Error::Length { expected, got: values.len() });
        }
        Ok(StepFunction { resolution, values })
    }

    pub fn zero(resolution: u32) -> Self {
        StepFunction { resolution, values: alloc::vec![S::zero(); 1usize << resolution] }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().map(|v| v.abs_val()).fold(S::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.clone() - b.clone()).collect();
        StepFunction { resolution: self.resolution, values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero_val())
    }

    pub fn close_to(&self, other: &Self) -> bool {
        self.values.len() == other.values.len() && self.values.iter().zip(&other.values).all(|(a, b)| a.close_to(b))
    }
}
