//! Fourth-order central finite-difference stencils on uniform grids and on
//! point-sampled functions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Central stencil weights (offset, weight) for `d^order/dx^order`, accurate
/// to `O(h⁴)`; the caller divides by `h^order`.
pub fn central_weights(order: usize) -> &'static [(i32, f64)] {
    const D0: [(i32, f64); 1] = [(0, 1.0)];
    const D1: [(i32, f64); 4] = [
        (-2, 1.0 / 12.0),
        (-1, -8.0 / 12.0),
        (1, 8.0 / 12.0),
        (2, -1.0 / 12.0),
    ];
    const D2: [(i32, f64); 5] = [
        (-2, -1.0 / 12.0),
        (-1, 16.0 / 12.0),
        (0, -30.0 / 12.0),
        (1, 16.0 / 12.0),
        (2, -1.0 / 12.0),
    ];
    const D3: [(i32, f64); 6] = [
        (-3, 1.0 / 8.0),
        (-2, -1.0),
        (-1, 13.0 / 8.0),
        (1, -13.0 / 8.0),
        (2, 1.0),
        (3, -1.0 / 8.0),
    ];
    const D4: [(i32, f64); 7] = [
        (-3, -1.0 / 6.0),
        (-2, 2.0),
        (-1, -13.0 / 2.0),
        (0, 28.0 / 3.0),
        (1, -13.0 / 2.0),
        (2, 2.0),
        (3, -1.0 / 6.0),
    ];
    match order {
        0 => &D0,
        1 => &D1,
        2 => &D2,
        3 => &D3,
        4 => &D4,
        _ => panic!("stencils are provided up to fourth derivatives"),
    }
}

/// Half-width of the stencil for a derivative order.
pub fn stencil_reach(order: usize) -> usize {
    central_weights(order)
        .iter()
        .map(|(o, _)| o.unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

/// `∂^alpha f(x)` by tensor-product stencils with step `h`.
pub fn partial_of<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], alpha: &[usize], h: f64) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    let mut point = x.to_vec();
    fn rec<F: Fn(&[f64]) -> f64>(
        axis: usize,
        n: usize,
        alpha: &[usize],
        h: f64,
        weight: f64,
        x: &[f64],
        point: &mut Vec<f64>,
        f: &F,
        total: &mut f64,
    ) {
        if axis == n {
            *total += weight * f(point);
            return;
        }
        let scale = h.powi(alpha[axis] as i32);
        for &(o, w) in central_weights(alpha[axis]) {
            point[axis] = x[axis] + o as f64 * h;
            rec(
                axis + 1,
                n,
                alpha,
                h,
                weight * w / scale,
                x,
                point,
                f,
                total,
            );
        }
        point[axis] = x[axis];
    }
    rec(0, n, alpha, h, 1.0, x, &mut point, f, &mut total);
    total
}

pub fn gradient_of<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> DVector<f64> {
    let n = x.len();
    DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let mut a = vec![0; n];
            a[i] = 1;
            partial_of(f, x, &a, h)
        }),
    )
}

pub fn hessian_of<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut a = vec![0; n];
            a[i] += 1;
            a[j] += 1;
            let v = partial_of(f, x, &a, h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Axis-aligned cube of `points^n` nodes centred at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub center: Vec<f64>,
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs ≥ 2 points per axis and positive half width, got {} / {}",
                self.points, self.half_width
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat node number (axis 0 most significant).
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let n = self.dim();
        let mut idx = vec![0; n];
        for axis in (0..n).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        let h = self.spacing();
        let mid = (self.points - 1) as f64 / 2.0;
        idx.iter()
            .zip(&self.center)
            .map(|(&i, &c)| c + (i as f64 - mid) * h)
            .collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|f| self.node(&self.unflatten(f)))
            .collect()
    }

    /// Nodes at least `margin` away from every face.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&f| {
                self.unflatten(f)
                    .iter()
                    .all(|&i| i >= margin && i + margin < self.points)
            })
            .collect()
    }
}

/// Scalar samples on a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn sample<F: Fn(&[f64]) -> f64>(spec: &GridSpec, f: F) -> Self {
        let values = spec.nodes().iter().map(|x| f(x)).collect();
        GridField {
            spec: spec.clone(),
            values,
        }
    }

    pub fn value(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// `∂^alpha` at a node; fails if the stencil would leave the grid.
    pub fn partial(&self, flat: usize, alpha: &[usize]) -> Result<f64> {
        let idx = self.spec.unflatten(flat);
        for (axis, (&i, &a)) in idx.iter().zip(alpha).enumerate() {
            let reach = stencil_reach(a);
            let available = i.min(self.spec.points - 1 - i);
            if available < reach {
                return Err(Error::StencilMargin {
                    axis,
                    needed: reach,
                    available,
                });
            }
        }
        let h = self.spec.spacing();
        let n = idx.len();
        let mut total = 0.0;
        let mut cur = idx.clone();
        fn rec(
            g: &GridField,
            axis: usize,
            n: usize,
            alpha: &[usize],
            h: f64,
            weight: f64,
            base: &[usize],
            cur: &mut Vec<usize>,
            total: &mut f64,
        ) {
            if axis == n {
                *total += weight * g.values[g.spec.flatten(cur)];
                return;
            }
            let scale = h.powi(alpha[axis] as i32);
            for &(o, w) in central_weights(alpha[axis]) {
                cur[axis] = (base[axis] as i64 + o as i64) as usize;
                rec(
                    g,
                    axis + 1,
                    n,
                    alpha,
                    h,
                    weight * w / scale,
                    base,
                    cur,
                    total,
                );
            }
            cur[axis] = base[axis];
        }
        rec(self, 0, n, alpha, h, 1.0, &idx, &mut cur, &mut total);
        Ok(total)
    }

    pub fn gradient(&self, flat: usize) -> Result<DVector<f64>> {
        let n = self.spec.dim();
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let mut a = vec![0; n];
            a[i] = 1;
            g[i] = self.partial(flat, &a)?;
        }
        Ok(g)
    }

    pub fn hessian(&self, flat: usize) -> Result<DMatrix<f64>> {
        let n = self.spec.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut a = vec![0; n];
                a[i] += 1;
                a[j] += 1;
                let v = self.partial(flat, &a)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_exact_on_low_degree() {
        let f = |x: &[f64]| x[0].powi(3) + 2.0 * x[0] * x[1] * x[1];
        let x = [0.4, -0.3];
        let h = 0.1;
        assert!((partial_of(&f, &x, &[3, 0], h) - 6.0).abs() < 1e-9);
        assert!((partial_of(&f, &x, &[1, 2], h) - 4.0).abs() < 1e-9);
        assert!((partial_of(&f, &x, &[1, 0], h) - (3.0 * 0.16 + 2.0 * 0.09)).abs() < 1e-12);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |x: &[f64]| x[0].sin();
        let err = |h: f64| (partial_of(&f, &[0.7], &[2], h) + 0.7f64.sin()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn grid_margin_is_enforced() {
        let spec = GridSpec {
            center: vec![0.0, 0.0],
            half_width: 1.0,
            points: 9,
        };
        let g = GridField::sample(&spec, |x| x[0] * x[1]);
        let corner = spec.flatten(&[1, 4]);
        assert!(matches!(
            g.partial(corner, &[1, 0]),
            Err(Error::StencilMargin { axis: 0, .. })
        ));
        let centre = spec.flatten(&[4, 4]);
        assert!((g.partial(centre, &[1, 1]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(spec.interior(2).len(), 25);
    }
}
