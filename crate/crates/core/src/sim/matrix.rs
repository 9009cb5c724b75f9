use crate::error::{Error, Result};
use crate::scalar::Element;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense row-major matrix of simulated elements.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBuffer<T> {
    rows: u64,
    cols: u64,
    data: Vec<T>,
}

impl<T: Element> MatrixBuffer<T> {
    pub fn new(rows: u64, cols: u64, data: Vec<T>) -> Result<Self> {
        if data.len() as u64 != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} elements supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: u64, cols: u64) -> Self {
        Self { rows, cols, data: vec![T::zero(); (rows * cols) as usize] }
    }

    pub fn from_fn(rows: u64, cols: u64, mut f: impl FnMut(u64, u64) -> T) -> Self {
        let mut data = Vec::with_capacity((rows * cols) as usize);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major matrix drawn from ChaCha8 seeded with `seed`, using
    /// [`Element::sample`] for each element in order.
    pub fn random(rows: u64, cols: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(rows, cols, |_, _| T::sample(&mut rng))
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: u64, j: u64) -> T {
        self.data[(i * self.cols + j) as usize]
    }

    #[inline]
    pub fn set(&mut self, i: u64, j: u64, value: T) {
        self.data[(i * self.cols + j) as usize] = value;
    }

    /// Largest elementwise relative error against `reference`.
    pub fn max_relative_error(&self, reference: &Self) -> f64 {
        self.data.iter().zip(&reference.data).map(|(&g, &w)| crate::scalar::relative_error(g, w)).fold(0.0, f64::max)
    }
}
