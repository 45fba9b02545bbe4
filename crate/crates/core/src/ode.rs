//! Classical fixed-step fourth-order Runge–Kutta integration.

use crate::error::{Error, Result};

/// Reusable RK4 stepper for `x' = f(t, x)` with `f(t, x, dxdt)`.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `x` in place from `t` to `t + h`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, x: &mut [f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        f(t, x, &mut self.k1);
        offset(&mut self.tmp, x, 0.5 * h, &self.k1);
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        offset(&mut self.tmp, x, 0.5 * h, &self.k2);
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        offset(&mut self.tmp, x, h, &self.k3);
        f(t + h, &self.tmp, &mut self.k4);
        let ks = self.k1.iter().zip(&self.k2).zip(&self.k3).zip(&self.k4);
        for (xi, (((a, b), c), d)) in x.iter_mut().zip(ks) {
            *xi += h / 6.0 * (a + 2.0 * (b + c) + d);
        }
    }
}

/// `out = x + s k`.
fn offset(out: &mut [f64], x: &[f64], s: f64, k: &[f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + s * ki;
    }
}

/// Integrates `steps` steps of size `h` from `(t0, x0)`, calling `observe`
/// with `(k, t_k, x_k)` for `k = 0..=steps`. Times are `t0 + k h`.
pub fn integrate<F, O>(mut f: F, t0: f64, x0: &[f64], h: f64, steps: usize, mut observe: O) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(usize, f64, &[f64]),
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let mut x = x0.to_vec();
    let mut rk = Rk4::new(x.len());
    observe(0, t0, &x);
    for k in 1..=steps {
        let t_prev = t0 + (k - 1) as f64 * h;
        rk.step(&mut f, t_prev, &mut x, h);
        let t = t0 + k as f64 * h;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { time: t });
        }
        observe(k, t, &x);
    }
    Ok(x)
}
