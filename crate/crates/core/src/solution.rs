//! Incremental solution representation.
//!
//! Alongside `x` and `y` the solution keeps
//! `row_gain[i] = c_i + Σ_j q_ij y_j` and `col_gain[j] = d_j + Σ_i q_ij x_i`,
//! which make move evaluation `O(1)` per variable at the price of `O(n)`
//! (resp. `O(m)`) work whenever `x_i` (resp. `y_j`) changes.

use rand::Rng;

use crate::error::{BbqpError, Result};
use crate::instance::{objective_full, BbqpInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    x: Vec<bool>,
    y: Vec<bool>,
    row_gain: Vec<f64>,
    col_gain: Vec<f64>,
    objective: f64,
}

impl Solution {
    /// Builds a solution and its caches from scratch.
    pub fn new(instance: &BbqpInstance, x: Vec<bool>, y: Vec<bool>) -> Result<Self> {
        if x.len() != instance.m() {
            return Err(BbqpError::Dimension {
                what: "x",
                expected: instance.m(),
                actual: x.len(),
            });
        }
        if y.len() != instance.n() {
            return Err(BbqpError::Dimension {
                what: "y",
                expected: instance.n(),
                actual: y.len(),
            });
        }
        let row_gain: Vec<f64> = (0..instance.m())
            .map(|i| {
                instance.c()[i]
                    + instance
                        .row(i)
                        .iter()
                        .zip(&y)
                        .filter(|(_, &yj)| yj)
                        .map(|(q, _)| q)
                        .sum::<f64>()
            })
            .collect();
        let col_gain: Vec<f64> = (0..instance.n())
            .map(|j| {
                instance.d()[j]
                    + instance
                        .col(j)
                        .iter()
                        .zip(&x)
                        .filter(|(_, &xi)| xi)
                        .map(|(q, _)| q)
                        .sum::<f64>()
            })
            .collect();
        let objective = x
            .iter()
            .zip(instance.c())
            .filter(|(&xi, _)| xi)
            .map(|(_, c)| c)
            .sum::<f64>()
            + y.iter()
                .zip(&col_gain)
                .filter(|(&yj, _)| yj)
                .map(|(_, g)| g)
                .sum::<f64>();
        Ok(Solution {
            x,
            y,
            row_gain,
            col_gain,
            objective,
        })
    }

    pub fn zeros(instance: &BbqpInstance) -> Self {
        Solution::new(instance, vec![false; instance.m()], vec![false; instance.n()])
            .expect("dimensions match by construction")
    }

    /// Every `x_i`, `y_j` is an independent fair coin.
    pub fn random<R: Rng + ?Sized>(instance: &BbqpInstance, rng: &mut R) -> Self {
        let x = (0..instance.m()).map(|_| rng.random_bool(0.5)).collect();
        let y = (0..instance.n()).map(|_| rng.random_bool(0.5)).collect();
        Solution::new(instance, x, y).expect("dimensions match by construction")
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn row_gain(&self) -> &[f64] {
        &self.row_gain
    }

    pub fn col_gain(&self) -> &[f64] {
        &self.col_gain
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn into_parts(self) -> (Vec<bool>, Vec<bool>) {
        (self.x, self.y)
    }

    /// Toggles `x_i`, updating `col_gain` and the objective in `O(n)`.
    pub fn flip_x(&mut self, instance: &BbqpInstance, i: usize) -> Result<()> {
        if i >= self.x.len() {
            return Err(BbqpError::InvalidArgument(format!(
                "row index {i} out of range 0..{}",
                self.x.len()
            )));
        }
        self.flip_x_unchecked(instance, i);
        Ok(())
    }

    /// Toggles `y_j`, updating `row_gain` and the objective in `O(m)`.
    pub fn flip_y(&mut self, instance: &BbqpInstance, j: usize) -> Result<()> {
        if j >= self.y.len() {
            return Err(BbqpError::InvalidArgument(format!(
                "column index {j} out of range 0..{}",
                self.y.len()
            )));
        }
        self.flip_y_unchecked(instance, j);
        Ok(())
    }

    #[inline]
    pub(crate) fn flip_x_unchecked(&mut self, instance: &BbqpInstance, i: usize) {
        let row = instance.row(i);
        if self.x[i] {
            self.objective -= self.row_gain[i];
            for (g, q) in self.col_gain.iter_mut().zip(row) {
                *g -= q;
            }
        } else {
            self.objective += self.row_gain[i];
            for (g, q) in self.col_gain.iter_mut().zip(row) {
                *g += q;
            }
        }
        self.x[i] = !self.x[i];
    }

    #[inline]
    pub(crate) fn flip_y_unchecked(&mut self, instance: &BbqpInstance, j: usize) {
        let col = instance.col(j);
        if self.y[j] {
            self.objective -= self.col_gain[j];
            for (g, q) in self.row_gain.iter_mut().zip(col) {
                *g -= q;
            }
        } else {
            self.objective += self.col_gain[j];
            for (g, q) in self.row_gain.iter_mut().zip(col) {
                *g += q;
            }
        }
        self.y[j] = !self.y[j];
    }

    #[inline]
    pub(crate) fn set_x(&mut self, instance: &BbqpInstance, i: usize, value: bool) {
        if self.x[i] != value {
            self.flip_x_unchecked(instance, i);
        }
    }

    #[inline]
    pub(crate) fn set_y(&mut self, instance: &BbqpInstance, j: usize, value: bool) {
        if self.y[j] != value {
            self.flip_y_unchecked(instance, j);
        }
    }

    /// Largest relative deviation between the caches and a from-scratch
    /// rebuild. Test and diagnostics helper.
    pub fn cache_error(&self, instance: &BbqpInstance) -> f64 {
        let fresh = Solution::new(instance, self.x.clone(), self.y.clone())
            .expect("dimensions are invariant");
        let full = objective_full(instance, &self.x, &self.y).expect("dimensions are invariant");
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        let gains = self
            .row_gain
            .iter()
            .zip(&fresh.row_gain)
            .chain(self.col_gain.iter().zip(&fresh.col_gain))
            .map(|(&a, &b)| rel(a, b))
            .fold(0.0, f64::max);
        gains.max(rel(self.objective, full))
    }

    /// `"0101…"` rendering of `x` or `y`.
    pub fn bits(v: &[bool]) -> String {
        v.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}
