//! Budgeted local optimizers: adaptive Nelder–Mead and Levenberg–Marquardt.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Convergence threshold on the spread of simplex values.
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 2000,
            initial_step: 0.5,
            ftol: 1e-12,
        }
    }
}

/// Minimizes `f` from `x0` with the dimension-adaptive Nelder–Mead
/// coefficients of Gao and Han. When the simplex collapses the search is
/// restarted around the incumbent; it stops when a restart no longer improves
/// the value or the evaluation budget is spent.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: NelderMeadOptions) -> OptimResult {
    let n = x0.len();
    let mut evals = 0usize;
    let max_evals = opts.max_evals.max(1);
    // Returns None once the budget is spent so callers can stop immediately.
    let mut eval = |x: &[f64], evals: &mut usize| -> Option<f64> {
        if *evals >= max_evals {
            return None;
        }
        *evals += 1;
        let v = f(x);
        Some(if v.is_nan() { f64::INFINITY } else { v })
    };
    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0, &mut evals).expect("budget allows one evaluation");
    if n == 0 || opts.max_evals <= 1 {
        return OptimResult {
            x: best_x,
            value: best_v,
            evals,
        };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut step = opts.initial_step;
    'restart: loop {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_v));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += step;
            let Some(v) = eval(&x, &mut evals) else {
                break 'restart;
            };
            simplex.push((x, v));
        }
        let start_v = best_v;

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1 < best_v {
                best_v = simplex[0].1;
                best_x = simplex[0].0.clone();
            }
            let spread = simplex[n].1 - simplex[0].1;
            if spread.abs() <= opts.ftol * (1.0 + simplex[0].1.abs()) {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(alpha);
            let Some(vr) = eval(&xr, &mut evals) else {
                break 'restart;
            };
            if vr < simplex[0].1 {
                let xe = along(alpha * beta);
                simplex[n] = match eval(&xe, &mut evals) {
                    Some(ve) if ve < vr => (xe, ve),
                    _ => (xr, vr),
                };
                continue;
            }
            if vr < simplex[n - 1].1 {
                simplex[n] = (xr, vr);
                continue;
            }
            let xc = if vr < worst.1 { along(alpha * gamma) } else { along(-gamma) };
            let Some(vc) = eval(&xc, &mut evals) else {
                break 'restart;
            };
            if vc < worst.1.min(vr) {
                simplex[n] = (xc, vc);
                continue;
            }
            let x0 = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = x0
                    .iter()
                    .zip(&entry.0)
                    .map(|(b, xi)| b + sigma * (xi - b))
                    .collect();
                let Some(v) = eval(&x, &mut evals) else {
                    break 'restart;
                };
                *entry = (x, v);
            }
        }
        if start_v - best_v <= opts.ftol * (1.0 + best_v.abs()) {
            // A full restart made no progress; the incumbent is a local optimum.
            if step <= opts.initial_step * 1e-3 {
                break;
            }
            step *= 0.1;
        } else {
            step = opts.initial_step;
        }
    }
    OptimResult {
        x: best_x,
        value: best_v,
        evals,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LevenbergMarquardtOptions {
    pub max_evals: usize,
    /// Stop once the residual norm drops below this value.
    pub target: f64,
    pub fd_step: f64,
}

impl Default for LevenbergMarquardtOptions {
    fn default() -> Self {
        LevenbergMarquardtOptions {
            max_evals: 10_000,
            target: 1e-13,
            fd_step: 1e-7,
        }
    }
}

/// Minimizes ‖r(x)‖₂ with a damped Gauss–Newton iteration and a forward
/// difference Jacobian. `value` in the result is the residual norm.
pub fn levenberg_marquardt<F: FnMut(&[f64]) -> Vec<f64>>(
    mut residual: F,
    x0: &[f64],
    opts: LevenbergMarquardtOptions,
) -> OptimResult {
    let n = x0.len();
    let mut evals = 1usize;
    let mut x = DVector::from_column_slice(x0);
    let mut r = DVector::from_vec(residual(x.as_slice()));
    let m = r.len();
    let mut cost = r.norm_squared();
    let mut mu: Option<f64> = None;

    while evals + n < opts.max_evals && cost.sqrt() > opts.target {
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = opts.fd_step * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            let rp = DVector::from_vec(residual(xp.as_slice()));
            evals += 1;
            jac.set_column(j, &((rp - &r) / h));
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let damping = mu.get_or_insert_with(|| 1e-3 * jtj.diagonal().max().max(1e-12));

        let mut accepted = false;
        while evals < opts.max_evals {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += *damping;
            }
            let Some(chol) = a.cholesky() else {
                *damping *= 4.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let xn = &x + &delta;
            let rn = DVector::from_vec(residual(xn.as_slice()));
            evals += 1;
            let cn = rn.norm_squared();
            if cn < cost {
                let small_step = delta.norm() <= 1e-15 * (1.0 + x.norm());
                x = xn;
                r = rn;
                cost = cn;
                *damping = (*damping / 3.0).max(1e-15);
                accepted = !small_step;
                break;
            }
            *damping *= 2.0;
            if *damping > 1e16 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    OptimResult {
        x: x.as_slice().to_vec(),
        value: cost.sqrt(),
        evals,
    }
}
