//! Classical fixed-step fourth-order Runge–Kutta.

/// Reusable RK4 stepper for `y' = f(t, y)` on `ℝⁿ`.
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

    /// Advances `y` in place by one step of size `dt` from time `t`.
    pub fn step<F>(&mut self, f: &F, t: f64, y: &mut [f64], dt: f64)
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let half = 0.5 * dt;
        f(t, y, &mut self.k1);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = y + half * k;
        }
        f(t + half, &self.tmp, &mut self.k2);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = y + half * k;
        }
        f(t + half, &self.tmp, &mut self.k3);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = y + dt * k;
        }
        f(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Number of uniform steps of size `dt` that cover `[0, t_end]`.
pub(crate) fn step_count(t_end: f64, dt: f64) -> usize {
    // tolerate t_end/dt landing a few ulps below an integer
    (t_end / dt + 1e-9).floor() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let err = |dt: f64| {
            let mut rk = Rk4::new(1);
            let mut y = [1.0];
            let n = step_count(1.0, dt);
            for k in 0..n {
                rk.step(&f, k as f64 * dt, &mut y, dt);
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs_is_exact_for_cubics() {
        // y' = 3t² integrates exactly under RK4
        let f = |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 3.0 * t * t;
        let mut rk = Rk4::new(1);
        let mut y = [0.0];
        for k in 0..10 {
            rk.step(&f, k as f64 * 0.2, &mut y, 0.2);
        }
        assert!((y[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(step_count(0.3, 0.1), 3);
        assert_eq!(step_count(100.0, 0.01), 10_000);
        assert_eq!(step_count(0.25, 0.1), 2);
    }
}
