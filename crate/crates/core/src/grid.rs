//! Truncated velocity domain `[-L, L]^3` with a uniform cell-centred lattice.
//!
//! Fields live in flat `Vec<f64>` buffers with the x index running fastest:
//! `idx = a + n * (b + n * c)` for cell `(a, b, c)`.

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Smallest admissible number of cells per axis.
pub const MIN_CELLS_PER_AXIS: usize = 8;

/// Uniform cubic lattice of `n^3` cells covering `[-L, L]^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    n: usize,
    extent: f64,
    h: f64,
    centers: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(n_per_axis: usize, extent: f64) -> Result<Self> {
        if n_per_axis < MIN_CELLS_PER_AXIS {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis = {n_per_axis} is below the minimum of {MIN_CELLS_PER_AXIS}"
            )));
        }
        if n_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis = {n_per_axis} must be even so the grid is symmetric about the origin"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extent must be positive and finite, got {extent}"
            )));
        }
        let h = 2.0 * extent / n_per_axis as f64;
        // Mirror pairs are filled from the same magnitude so that -w is a
        // centre bit-for-bit whenever w is.
        let mut centers = vec![0.0; n_per_axis];
        let half = n_per_axis / 2;
        for k in 0..half {
            let w = (k as f64 + 0.5) * h;
            centers[half + k] = w;
            centers[half - 1 - k] = -w;
        }
        Ok(Self {
            n: n_per_axis,
            extent,
            h,
            centers,
        })
    }

    #[inline]
    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn extent(&self) -> f64 {
        self.extent
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn total_cells(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// One-dimensional cell-centre coordinates, shared by all three axes.
    #[inline]
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Coordinate of face `k` (0..=n) along any axis; face `k` separates
    /// cells `k - 1` and `k`.
    #[inline]
    pub fn face(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.h
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        a + self.n * (b + self.n * c)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let a = idx % self.n;
        let b = (idx / self.n) % self.n;
        let c = idx / (self.n * self.n);
        [a, b, c]
    }

    #[inline]
    pub fn cell_center(&self, a: usize, b: usize, c: usize) -> Vec3 {
        [self.centers[a], self.centers[b], self.centers[c]]
    }

    /// Stride between neighbouring cells along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n,
            _ => self.n * self.n,
        }
    }

    /// Samples `g` at every cell centre.
    pub fn sample(&self, g: impl Fn(Vec3) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_cells());
        for c in 0..self.n {
            for b in 0..self.n {
                for a in 0..self.n {
                    out.push(g(self.cell_center(a, b, c)));
                }
            }
        }
        out
    }

    fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.total_cells() {
            return Err(Error::InvalidField(format!(
                "field has {} entries, grid has {} cells",
                field.len(),
                self.total_cells()
            )));
        }
        Ok(())
    }

    /// Midpoint quadrature `sum(field) * h^3`, rejecting non-finite input.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        if let Some(pos) = field.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite value {} at cell {pos}",
                field[pos]
            )));
        }
        Ok(self.quadrature(field))
    }

    /// Midpoint quadrature without validation, for hot paths.
    #[inline]
    pub fn quadrature(&self, field: &[f64]) -> f64 {
        compensated_sum(field.iter().copied()) * self.cell_volume()
    }

    /// Quadrature of `field(v) * weight(v)`.
    pub fn quadrature_weighted(&self, field: &[f64], weight: impl Fn(Vec3) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        let mut idx = 0;
        for c in 0..self.n {
            for b in 0..self.n {
                for a in 0..self.n {
                    acc.add(field[idx] * weight(self.cell_center(a, b, c)));
                    idx += 1;
                }
            }
        }
        acc.value() * self.cell_volume()
    }

    /// Field evaluated at the mirrored velocity, `F(-v)`.
    pub fn reflect(&self, field: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; field.len()];
        for c in 0..n {
            for b in 0..n {
                for a in 0..n {
                    out[self.index(a, b, c)] = field[self.index(n - 1 - a, n - 1 - b, n - 1 - c)];
                }
            }
        }
        out
    }

    /// One-dimensional marginals of `field` along each axis, scaled so that
    /// `sum_k marginal[axis][k] * h` equals the quadrature of `field`.
    pub fn marginals(&self, field: &[f64]) -> [Vec<f64>; 3] {
        let n = self.n;
        let mut mx = vec![0.0; n];
        let mut my = vec![0.0; n];
        let mut mz = vec![0.0; n];
        let mut idx = 0;
        for c in 0..n {
            let mut plane = 0.0;
            for b in 0..n {
                let mut line = 0.0;
                for a in 0..n {
                    let f = field[idx];
                    mx[a] += f;
                    line += f;
                    idx += 1;
                }
                my[b] += line;
                plane += line;
            }
            mz[c] += plane;
        }
        let area = self.h * self.h;
        for m in [&mut mx, &mut my, &mut mz] {
            m.iter_mut().for_each(|x| *x *= area);
        }
        [mx, my, mz]
    }
}

/// Neumaier compensated accumulator; summation order is fixed by the caller.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spacing_and_first_center() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.cell_center(0, 0, 0), [-3.5, -3.5, -3.5]);
        let g = VelocityGrid::new(16, 8.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.total_cells(), 4096);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(VelocityGrid::new(9, 4.0).is_err());
        assert!(VelocityGrid::new(6, 4.0).is_err());
        assert!(VelocityGrid::new(8, 0.0).is_err());
        assert!(VelocityGrid::new(8, -1.0).is_err());
        assert!(VelocityGrid::new(8, f64::NAN).is_err());
    }

    #[test]
    fn centers_match_definition_and_are_symmetric() {
        let g = VelocityGrid::new(14, 3.3).unwrap();
        let h = g.spacing();
        for (a, &x) in g.centers().iter().enumerate() {
            let expected = -3.3 + (a as f64 + 0.5) * h;
            assert!((x - expected).abs() < 1e-14);
            assert_eq!(g.centers()[13 - a], -x);
        }
        assert!((h * 14.0 - 6.6).abs() < 1e-14);
    }

    #[test]
    fn constant_field_integrates_to_box_volume() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let f = vec![1.0; g.total_cells()];
        assert_eq!(g.integrate(&f).unwrap(), 512.0);
    }

    #[test]
    fn normalised_gaussian_integrates_to_one() {
        let g = VelocityGrid::new(32, 6.0).unwrap();
        let f = g.sample(|v| PI.powf(-1.5) * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
        assert!((g.integrate(&f).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = VelocityGrid::new(16, 5.0).unwrap();
        let f = g.sample(|v| v[0] * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
        assert!(g.integrate(&f).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = VelocityGrid::new(8, 1.0).unwrap();
        let mut f = vec![0.0; g.total_cells()];
        f[7] = f64::INFINITY;
        assert!(g.integrate(&f).is_err());
        assert!(g.integrate(&[1.0; 5]).is_err());
    }

    #[test]
    fn marginals_preserve_mass() {
        let g = VelocityGrid::new(8, 2.0).unwrap();
        let f = g.sample(|v| 1.0 + v[0] + 0.5 * v[1] * v[2]);
        let total = g.quadrature(&f);
        for m in g.marginals(&f) {
            let s: f64 = m.iter().sum::<f64>() * g.spacing();
            assert!((s - total).abs() < 1e-12 * total.abs().max(1.0));
        }
    }

    #[test]
    fn gaussian_quadrature_error_shrinks_under_refinement() {
        let exact = 1.0;
        let mut last = f64::INFINITY;
        for n in [8, 16, 32] {
            let g = VelocityGrid::new(n, 6.0).unwrap();
            let f = g.sample(|v| PI.powf(-1.5) * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
            let err = (g.integrate(&f).unwrap() - exact).abs();
            assert!(err < last || err < 1e-14);
            last = err;
        }
    }
}
