//! Quasi-Newton minimization with finite-difference derivatives.
//!
//! The objective may return `None` where it is undefined (for example a
//! zero-probability observation); line searches treat such points as
//! infinitely bad and backtrack.

/// Options for [`minimize_bfgs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged once the gradient infinity norm drops below this.
    pub gtol: f64,
    /// Largest step length (infinity norm) taken in one iteration.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gtol: 1e-5,
            max_step: 10.0,
        }
    }
}

/// Outcome of a minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Minimum {
    pub fn gradient_norm(&self) -> f64 {
        inf_norm(&self.gradient)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central-difference gradient with step `1e-5 * max(1, |x_k|)`.
///
/// Coordinates where a shifted point is undefined fall back to a one-sided
/// difference, or zero if both sides fail.
pub fn central_gradient<F>(f: &F, x: &[f64], fx: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut point = x.to_vec();
    (0..x.len())
        .map(|k| {
            let h = 1e-5 * x[k].abs().max(1.0);
            point[k] = x[k] + h;
            let up = f(&point);
            point[k] = x[k] - h;
            let dn = f(&point);
            point[k] = x[k];
            match (up, dn) {
                (Some(u), Some(d)) => (u - d) / (2.0 * h),
                (Some(u), None) => (u - fx) / h,
                (None, Some(d)) => (fx - d) / h,
                (None, None) => 0.0,
            }
        })
        .collect()
}

/// Central-difference Hessian with step `max(1e-4, 1e-4 |x_k|)`.
///
/// Returns `None` if the objective is undefined at any stencil point.
pub fn central_hessian<F>(f: &F, x: &[f64]) -> Option<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| (1e-4 * v.abs()).max(1e-4)).collect();
    let f0 = f(x)?;
    let mut point = x.to_vec();
    let mut eval = |shifts: &[(usize, f64)]| {
        for &(k, s) in shifts {
            point[k] += s;
        }
        let v = f(&point);
        point.copy_from_slice(x);
        v
    };
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        let up = eval(&[(i, h[i])])?;
        let dn = eval(&[(i, -h[i])])?;
        hess[i][i] = (up - 2.0 * f0 + dn) / (h[i] * h[i]);
        for j in 0..i {
            let pp = eval(&[(i, h[i]), (j, h[j])])?;
            let pm = eval(&[(i, h[i]), (j, -h[j])])?;
            let mp = eval(&[(i, -h[i]), (j, h[j])])?;
            let mm = eval(&[(i, -h[i]), (j, -h[j])])?;
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Some(hess)
}

/// Minimizes `f` from `x0` by BFGS with an Armijo backtracking line search.
///
/// Returns `None` only if `f(x0)` is undefined.
pub fn minimize_bfgs<F>(f: &F, x0: &[f64], opts: &BfgsOptions) -> Option<Minimum>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    let mut g = central_gradient(f, &x, fx);
    let identity = |n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    };
    let mut hinv = identity(n);
    let mut iterations = 0;
    let mut converged = inf_norm(&g) <= opts.gtol;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let mut dir: Vec<f64> = hinv.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            hinv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let scale = inf_norm(&dir);
        if scale > opts.max_step {
            let r = opts.max_step / scale;
            dir.iter_mut().for_each(|d| *d *= r);
            slope *= r;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            if let Some(ft) = f(&trial) {
                if ft <= fx + 1e-4 * step * slope {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            step *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            // No progress along the quasi-Newton direction. Retry once along
            // steepest descent before declaring a stall.
            if hinv != identity(n) {
                hinv = identity(n);
                continue;
            }
            converged = inf_norm(&g) <= 100.0 * opts.gtol;
            break;
        };
        let g_new = central_gradient(f, &x_new, f_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            let hy: Vec<f64> = hinv.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        converged = inf_norm(&g) <= opts.gtol;
        if !converged && improvement.abs() <= 1e-14 * fx.abs().max(1.0) && inf_norm(&s) < 1e-10 {
            converged = inf_norm(&g) <= 100.0 * opts.gtol;
            break;
        }
    }

    Some(Minimum {
        x,
        value: fx,
        gradient: g,
        iterations,
        converged,
    })
}
