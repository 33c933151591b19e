//! Derivative-free and quasi-Newton local minimizers.
//!
//! Small, deterministic implementations sized for the low-dimensional smooth
//! objectives in this crate (≤ ~24 parameters): an adaptive Nelder-Mead
//! simplex for global-ish exploration under multi-start, and BFGS with
//! central-difference gradients for polishing to machine precision.

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Maximum number of objective evaluations.
    pub max_evals: usize,
    /// Converged when the simplex f-spread falls below this.
    pub f_tol: f64,
    /// Converged when the simplex diameter falls below this.
    pub x_tol: f64,
    /// Step used to build the initial simplex around the start point.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 20_000,
            f_tol: 1e-12,
            x_tol: 1e-10,
            initial_step: 0.5,
        }
    }
}

/// Outcome of a local minimization.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead downhill simplex with the adaptive coefficients of Gao & Han,
/// which behave better than the classic ones as the dimension grows.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1, "need at least one parameter");
    let dim = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / dim;
    let gamma = 0.75 - 1.0 / (2.0 * dim);
    let delta = 1.0 - 1.0 / dim;

    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    // Initial simplex: x0 plus a step along each coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let mut iterations = 0usize;
    let converged = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (f_worst - f_best).abs() <= opts.f_tol && diameter <= opts.x_tol {
            break true;
        }
        if evals >= opts.max_evals {
            break false;
        }
        iterations += 1;

        // Centroid of all but the worst point.
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim;
            }
        }
        let worst = simplex[n].clone();
        let second_worst = simplex[n - 1].1;

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = blend(alpha);
        let f_reflected = eval(&reflected, &mut evals);
        if f_reflected < f_best {
            let expanded = blend(alpha * beta);
            let f_expanded = eval(&expanded, &mut evals);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < second_worst {
            simplex[n] = (reflected, f_reflected);
            continue;
        }
        // Contraction, outside or inside of the worst point.
        let (contracted, f_contracted) = if f_reflected < worst.1 {
            let v = blend(alpha * gamma);
            let fv = eval(&v, &mut evals);
            (v, fv)
        } else {
            let v = blend(-gamma);
            let fv = eval(&v, &mut evals);
            (v, fv)
        };
        if f_contracted < worst.1.min(f_reflected) {
            simplex[n] = (contracted, f_contracted);
            continue;
        }
        // Shrink toward the best point.
        let best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            let v: Vec<f64> = item
                .0
                .iter()
                .zip(&best)
                .map(|(x, b)| b + delta * (x - b))
                .collect();
            let fv = eval(&v, &mut evals);
            *item = (v, fv);
        }
    };

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    OptimResult {
        x: simplex[0].0.clone(),
        f: simplex[0].1,
        evaluations: evals,
        iterations,
        converged,
    }
}

/// Options for [`bfgs`].
#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Converged when the max-norm of the gradient falls below this.
    pub grad_tol: f64,
    /// Converged when the parameter step falls below this.
    pub step_tol: f64,
    /// Central-difference step for the numeric gradient.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            grad_tol: 1e-12,
            step_tol: 1e-14,
            fd_step: 1e-6,
        }
    }
}

/// Result of a BFGS run; `grad_norm` and `step_norm` report the final
/// iterate so callers can apply their own convergence thresholds.
#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS with a central-difference gradient and Armijo backtracking.
///
/// The finite-difference noise floor limits the reachable gradient norm to
/// roughly `1e-16 |f| / fd_step`; supply an analytic gradient through
/// [`bfgs_with_grad`] when convergence beyond that matters.
pub fn bfgs<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let fd_step = opts.fd_step;
    let grad = {
        let f = &f;
        move |x: &[f64]| -> Vec<f64> {
            let mut g = vec![0.0; n];
            let mut probe = x.to_vec();
            for i in 0..n {
                let h = fd_step * (1.0 + x[i].abs());
                probe[i] = x[i] + h;
                let fp = f(&probe);
                probe[i] = x[i] - h;
                let fm = f(&probe);
                probe[i] = x[i];
                g[i] = (fp - fm) / (2.0 * h);
            }
            g
        }
    };
    bfgs_with_grad(&f, grad, x0, opts)
}

/// BFGS with a caller-supplied gradient.
pub fn bfgs_with_grad<F, G>(f: F, grad: G, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let max_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);
    // Inverse Hessian approximation, kept as a dense row-major matrix.
    let mut h_inv = identity(n);
    let mut step_norm = f64::INFINITY;
    let mut iterations = 0usize;
    let mut converged = max_norm(&g) <= opts.grad_tol;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let direction: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h_inv[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let slope: f64 = direction.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            // Not a descent direction; reset the Hessian estimate.
            h_inv = identity(n);
            continue;
        }
        // Armijo backtracking.
        let mut t = 1.0;
        let mut x_new;
        let mut f_new;
        loop {
            x_new = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi + t * di)
                .collect::<Vec<f64>>();
            f_new = f(&x_new);
            if f_new <= fx + 1e-4 * t * slope {
                break;
            }
            if t < 1e-16 {
                // Line search exhausted: no measurable descent remains.
                return BfgsResult {
                    grad_norm: max_norm(&g),
                    step_norm,
                    x,
                    f: fx,
                    iterations,
                    converged: max_norm(&g) <= opts.grad_tol,
                };
            }
            t *= 0.5;
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        step_norm = max_norm(&s);
        let g_new = grad(&x_new);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 * max_norm(&s) * max_norm(&y).max(1e-300) {
            // Standard BFGS inverse update.
            let rho = 1.0 / sy;
            let mut hy = vec![0.0; n];
            for i in 0..n {
                hy[i] = (0..n).map(|j| h_inv[i * n + j] * y[j]).sum();
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h_inv[i * n + j] += rho * rho * (sy + yhy) * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if max_norm(&g) <= opts.grad_tol || step_norm <= opts.step_tol {
            converged = true;
        }
    }

    BfgsResult {
        grad_norm: max_norm(&g),
        step_norm,
        x,
        f: fx,
        iterations,
        converged,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}
