//! Log-barrier interior-point solver for the restricted maximin
//!
//! ```text
//! maximize t  subject to  t <= c_j · g          (active paths j)
//!                         0 < g_i < 1
//!                         Σ_{i∈B} μ_i g_i^p < r_B   (ball constraints)
//! ```
//!
//! The feasible set is convex in `g` (each `g_i^p` is convex for `p >= 1`)
//! and the objective is linear, so the barrier path converges to the global
//! optimum. On return `t + m/s` is an upper bound on the optimum, where `m`
//! counts the constraints and `s` is the final barrier weight.

/// A ball constraint over free variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BallConstraint {
    pub members: Vec<usize>,
    pub weights: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct InnerProblem {
    pub n: usize,
    pub p: f64,
    /// Dense coefficient rows over the `n` free variables.
    pub paths: Vec<Vec<f64>>,
    pub balls: Vec<BallConstraint>,
    /// Strictly feasible common starting value.
    pub start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    pub gap: f64,
    pub growth: f64,
    pub max_newton: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            gap: 1e-7,
            growth: 8.0,
            max_newton: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub g: Vec<f64>,
    pub value: f64,
    pub upper: f64,
}

const WARM_SHRINK: f64 = 0.99;

impl InnerProblem {
    fn constraints(&self) -> usize {
        self.paths.len() + 2 * self.n + self.balls.len()
    }

    /// Barrier value, or `None` outside the strict interior.
    fn barrier(&self, z: &[f64], s: f64) -> Option<f64> {
        let (g, t) = (&z[..self.n], z[self.n]);
        let mut phi = -s * t;
        for row in &self.paths {
            let a = dot(row, g) - t;
            if !(a > 0.0) {
                return None;
            }
            phi -= a.ln();
        }
        for &gi in g {
            if !(gi > 0.0 && gi < 1.0) {
                return None;
            }
            phi -= gi.ln() + (1.0 - gi).ln();
        }
        for b in &self.balls {
            let sb = b.rhs - ball_sum(b, g, self.p);
            if !(sb > 0.0) {
                return None;
            }
            phi -= sb.ln();
        }
        Some(phi)
    }

    fn gradient_hessian(&self, z: &[f64], s: f64, grad: &mut [f64], hess: &mut [f64]) {
        let dim = self.n + 1;
        let (g, t) = (&z[..self.n], z[self.n]);
        grad.iter_mut().for_each(|v| *v = 0.0);
        hess.iter_mut().for_each(|v| *v = 0.0);
        grad[self.n] = -s;
        let mut v = vec![0.0; dim];
        for row in &self.paths {
            let a = dot(row, g) - t;
            v[..self.n].copy_from_slice(row);
            v[self.n] = -1.0;
            for i in 0..dim {
                if v[i] == 0.0 {
                    continue;
                }
                grad[i] -= v[i] / a;
                let vi = v[i] / (a * a);
                for j in 0..dim {
                    hess[i * dim + j] += vi * v[j];
                }
            }
        }
        for (i, &gi) in g.iter().enumerate() {
            grad[i] += -1.0 / gi + 1.0 / (1.0 - gi);
            hess[i * dim + i] += 1.0 / (gi * gi) + 1.0 / ((1.0 - gi) * (1.0 - gi));
        }
        let p = self.p;
        for b in &self.balls {
            let sb = b.rhs - ball_sum(b, g, p);
            let w: Vec<f64> = b
                .members
                .iter()
                .zip(&b.weights)
                .map(|(&i, &mu)| p * mu * g[i].powf(p - 1.0))
                .collect();
            for (k, &i) in b.members.iter().enumerate() {
                grad[i] += w[k] / sb;
                for (l, &j) in b.members.iter().enumerate() {
                    hess[i * dim + j] += w[k] * w[l] / (sb * sb);
                }
                if p > 1.0 {
                    hess[i * dim + i] += p * (p - 1.0) * b.weights[k] * g[i].powf(p - 2.0) / sb;
                }
            }
        }
    }

    pub fn solve(&self, opts: &InnerOptions) -> InnerSolution {
        self.solve_from(None, opts)
    }

    /// Like [`InnerProblem::solve`], optionally starting from a previous
    /// solution, shrunk until it is strictly inside every ball.
    pub fn solve_from(&self, warm: Option<&[f64]>, opts: &InnerOptions) -> InnerSolution {
        let n = self.n;
        let dim = n + 1;
        let m = self.constraints() as f64;
        let scale = self.paths.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max).max(1e-12);
        let mut z = vec![self.start; dim];
        let mut s = m / scale;
        if let Some(g) = warm {
            let mut shrink: f64 = 1.0;
            for b in &self.balls {
                let sum = ball_sum(b, g, self.p);
                if sum > 0.0 {
                    shrink = shrink.min(WARM_SHRINK * (b.rhs / sum).powf(1.0 / self.p));
                }
            }
            let shrink = shrink.min(1.0);
            if g.iter().all(|&v| v > 0.0 && v < 1.0) && shrink > 0.0 {
                for (zi, &gi) in z.iter_mut().zip(g) {
                    *zi = shrink * gi;
                }
            }
        }
        let lowest = self.paths.iter().map(|r| dot(r, &z[..n])).fold(f64::INFINITY, f64::min);
        z[n] = lowest - (1e-3 * scale).max(1e-3 * lowest.abs());
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        let mut step = vec![0.0; dim];
        let mut trial = vec![0.0; dim];
        loop {
            for _ in 0..opts.max_newton {
                self.gradient_hessian(&z, s, &mut grad, &mut hess);
                for (d, g) in step.iter_mut().zip(&grad) {
                    *d = -g;
                }
                if !cholesky_solve(&mut hess, &mut step, dim) {
                    break;
                }
                let decrement = -dot(&grad, &step);
                if decrement <= 1e-10 {
                    break;
                }
                let f0 = self.barrier(&z, s).expect("iterate stays interior");
                let mut alpha = 1.0;
                let mut moved = false;
                for _ in 0..60 {
                    for i in 0..dim {
                        trial[i] = z[i] + alpha * step[i];
                    }
                    if let Some(f1) = self.barrier(&trial, s) {
                        if f1 <= f0 - 0.25 * alpha * decrement {
                            z.copy_from_slice(&trial);
                            moved = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            let value = self.paths.iter().map(|r| dot(r, &z[..n])).fold(f64::INFINITY, f64::min);
            if m / s <= opts.gap * scale || self.dual_bound(&z) - value <= opts.gap * scale {
                break;
            }
            s *= opts.growth;
        }
        let g = z[..n].to_vec();
        let value = self.paths.iter().map(|r| dot(r, &g)).fold(f64::INFINITY, f64::min);
        InnerSolution {
            upper: self.dual_bound(&z).max(value),
            value,
            g,
        }
    }

    /// Weak-duality bound from the barrier's implicit multipliers at an
    /// interior point `z`.
    ///
    /// For `λ >= 0` with `Σλ = 1` and `η >= 0`, every feasible `(g, t)`
    /// satisfies `t <= w·g + Σ_B η_B (r_B - Σ_{i∈B} μ_i g_i^p)` with
    /// `w = Σ λ_j c_j`, and the right side separates over `i` into
    /// one-dimensional maxima over `[0, 1]`. No centering is assumed.
    fn dual_bound(&self, z: &[f64]) -> f64 {
        let (g, t) = (&z[..self.n], z[self.n]);
        let inv: Vec<f64> = self.paths.iter().map(|r| 1.0 / (dot(r, g) - t)).collect();
        let total: f64 = inv.iter().sum();
        let mut w = vec![0.0; self.n];
        for (row, &l) in self.paths.iter().zip(&inv) {
            for (wi, &c) in w.iter_mut().zip(row) {
                *wi += l / total * c;
            }
        }
        let mut e = vec![0.0; self.n];
        let mut bound = 0.0;
        for b in &self.balls {
            let eta = 1.0 / ((b.rhs - ball_sum(b, g, self.p)) * total);
            bound += eta * b.rhs;
            for (&i, &mu) in b.members.iter().zip(&b.weights) {
                e[i] += eta * mu;
            }
        }
        let p = self.p;
        for (&wi, &ei) in w.iter().zip(&e) {
            let gi = if ei == 0.0 {
                1.0
            } else if p == 1.0 {
                if wi > ei { 1.0 } else { 0.0 }
            } else {
                (wi / (ei * p)).powf(1.0 / (p - 1.0)).min(1.0)
            };
            bound += wi * gi - ei * gi.powf(p);
        }
        bound
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn ball_sum(b: &BallConstraint, g: &[f64], p: f64) -> f64 {
    b.members
        .iter()
        .zip(&b.weights)
        .map(|(&i, &mu)| mu * if p == 1.0 { g[i] } else { g[i].powf(p) })
        .sum()
}

/// Solves `A x = b` in place for symmetric positive definite `A`
/// (row-major, `dim × dim`); `b` is overwritten by `x`. A tiny diagonal
/// shift is added when the factorization meets a non-positive pivot.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], dim: usize) -> bool {
    let max_diag = (0..dim).map(|i| a[i * dim + i].abs()).fold(0.0, f64::max);
    let original = a.to_vec();
    let mut shift = 0.0;
    'attempt: for _ in 0..8 {
        a.copy_from_slice(&original);
        for i in 0..dim {
            a[i * dim + i] += shift;
        }
        for j in 0..dim {
            let mut d = a[j * dim + j];
            for k in 0..j {
                d -= a[j * dim + k] * a[j * dim + k];
            }
            if !(d > 0.0) {
                shift = if shift == 0.0 { 1e-14 * max_diag.max(1.0) } else { shift * 100.0 };
                continue 'attempt;
            }
            let d = d.sqrt();
            a[j * dim + j] = d;
            for i in j + 1..dim {
                let mut v = a[i * dim + j];
                for k in 0..j {
                    v -= a[i * dim + k] * a[j * dim + k];
                }
                a[i * dim + j] = v / d;
            }
        }
        for i in 0..dim {
            let mut v = b[i];
            for k in 0..i {
                v -= a[i * dim + k] * b[k];
            }
            b[i] = v / a[i * dim + i];
        }
        for i in (0..dim).rev() {
            let mut v = b[i];
            for k in i + 1..dim {
                v -= a[k * dim + i] * b[k];
            }
            b[i] = v / a[i * dim + i];
        }
        return true;
    }
    false
}
