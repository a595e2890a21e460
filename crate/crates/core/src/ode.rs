//! Dormand-Prince 5(4) stepping and cubic Hermite node profiles.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Per-component error scale `abs[i] + rel * |y_i|`.
#[derive(Debug, Clone)]
pub struct Tolerance {
    pub abs: Vec<f64>,
    pub rel: f64,
}

/// Reusable work buffers for one system size.
pub struct Dopri5 {
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Dopri5 {
    pub fn new(n: usize) -> Self {
        Dopri5 {
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            y_new: vec![0.0; n],
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }

    /// Advances `y` from `z0` to `z1` (either direction). `dy` holds
    /// f(z0, y) on entry and f(z1, y) on exit. `h` is the step-size
    /// magnitude to try first and is updated for the next call. `project`
    /// may modify an accepted state (returning true when it did).
    #[allow(clippy::too_many_arguments)]
    pub fn advance<F, P>(
        &mut self,
        rhs: &mut F,
        z0: f64,
        z1: f64,
        y: &mut [f64],
        dy: &mut [f64],
        h: &mut f64,
        h_max: f64,
        tol: &Tolerance,
        project: &mut P,
    ) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        P: FnMut(&mut [f64]) -> bool,
    {
        let n = y.len();
        let dir = if z1 >= z0 { 1.0 } else { -1.0 };
        let span = (z1 - z0).abs();
        let h_min = 1e-12 * span.max(1.0);
        let mut z = z0;
        *h = h.min(h_max).min(span).max(h_min);
        self.k[0].copy_from_slice(dy);

        while (z1 - z) * dir > 0.0 {
            let remaining = (z1 - z).abs();
            let last = *h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { *h };
            let hs = dir * step;

            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let ys = &mut self.y_stage;
            for i in 0..n {
                ys[i] = y[i] + hs * A21 * k1[i];
            }
            rhs(z + C2 * hs, ys, k2);
            for i in 0..n {
                ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(z + C3 * hs, ys, k3);
            for i in 0..n {
                ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(z + C4 * hs, ys, k4);
            for i in 0..n {
                ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(z + C5 * hs, ys, k5);
            for i in 0..n {
                ys[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let z_new = if last { z1 } else { z + hs };
            rhs(z_new, ys, k6);
            let yn = &mut self.y_new;
            for i in 0..n {
                yn[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            rhs(z_new, yn, k7);

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = tol.abs[i] + tol.rel * y[i].abs().max(yn[i].abs());
                err_sq += (e / scale).powi(2);
            }
            let err = (err_sq / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                if step <= h_min {
                    return Err(Error::Numerical(format!(
                        "non-finite state at z = {z:.3} m; reduce max_step"
                    )));
                }
                *h = (step * 0.1).max(h_min);
                self.rejected_steps += 1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                y.copy_from_slice(yn);
                z = z_new;
                self.accepted_steps += 1;
                if project(y) {
                    rhs(z, y, k7);
                }
                k1.copy_from_slice(k7);
                // keep the proposed step when the last step was clipped short
                if !last {
                    *h = (step * factor).min(h_max);
                } else {
                    *h = (*h).max(step * factor).min(h_max);
                }
            } else {
                if step <= h_min {
                    return Err(Error::Numerical(format!(
                        "step size underflow at z = {z:.3} m; reduce max_step"
                    )));
                }
                *h = (step * factor.min(1.0)).max(h_min);
                self.rejected_steps += 1;
            }
        }
        dy.copy_from_slice(&self.k[0]);
        Ok(())
    }
}

/// Values and derivatives of a vector function at uniformly spaced nodes,
/// evaluated between nodes with cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    z0: f64,
    dz: f64,
    n_nodes: usize,
    n_comp: usize,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl NodeProfile {
    pub fn zeros(z0: f64, z_end: f64, n_nodes: usize, n_comp: usize) -> Self {
        assert!(n_nodes >= 2);
        NodeProfile {
            z0,
            dz: (z_end - z0) / (n_nodes - 1) as f64,
            n_nodes,
            n_comp,
            values: vec![0.0; n_nodes * n_comp],
            derivs: vec![0.0; n_nodes * n_comp],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_comp(&self) -> usize {
        self.n_comp
    }

    pub fn node_z(&self, k: usize) -> f64 {
        if k + 1 == self.n_nodes {
            self.z0 + self.dz * (self.n_nodes - 1) as f64
        } else {
            self.z0 + self.dz * k as f64
        }
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.values[node * self.n_comp..(node + 1) * self.n_comp]
    }

    pub fn deriv(&self, node: usize) -> &[f64] {
        &self.derivs[node * self.n_comp..(node + 1) * self.n_comp]
    }

    pub fn set(&mut self, node: usize, value: &[f64], deriv: &[f64]) {
        let r = node * self.n_comp..(node + 1) * self.n_comp;
        self.values[r.clone()].copy_from_slice(value);
        self.derivs[r].copy_from_slice(deriv);
    }

    /// Interpolates every component at `z` into `out`.
    pub fn eval(&self, z: f64, out: &mut [f64]) {
        let s = ((z - self.z0) / self.dz).clamp(0.0, (self.n_nodes - 1) as f64);
        let k = (s.floor() as usize).min(self.n_nodes - 2);
        let t = s - k as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = (t3 - 2.0 * t2 + t) * self.dz;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = (t3 - t2) * self.dz;
        let (a, b) = (k * self.n_comp, (k + 1) * self.n_comp);
        for (i, o) in out.iter_mut().enumerate().take(self.n_comp) {
            *o = h00 * self.values[a + i]
                + h10 * self.derivs[a + i]
                + h01 * self.values[b + i]
                + h11 * self.derivs[b + i];
        }
    }

    /// `self += weight * (other - self)` on values and derivatives.
    pub fn relax_towards(&mut self, other: &NodeProfile, weight: f64) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += weight * (b - *a);
        }
        for (a, b) in self.derivs.iter_mut().zip(&other.derivs) {
            *a += weight * (b - *a);
        }
    }

    /// Largest absolute difference between the node values of two profiles.
    pub fn max_abs_diff(&self, other: &NodeProfile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
