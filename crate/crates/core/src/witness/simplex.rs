//! Derivative-free simplex descent (Nelder–Mead) with dimension-adaptive
//! coefficients and restart-on-stall.
//!
//! For `n` parameters the coefficients are
//!
//! | step        | coefficient         |
//! |-------------|---------------------|
//! | reflection  | 1                   |
//! | expansion   | 1 + 2/n             |
//! | contraction | 3/4 − 1/(2n)        |
//! | shrink      | 1 − 1/n             |
//!
//! which reduce to the classic (1, 2, 1/2, 1/2) at `n = 2` and keep the
//! simplex from collapsing prematurely in higher dimensions.
//!
//! A run is a sequence of cycles. Each cycle builds a fresh axis-aligned
//! simplex of edge `initial_step` around the best point so far and iterates
//! until the spread `f_worst − f_best` drops below `tol`. The run stops when a
//! cycle improves the best value by less than `tol`, or when `max_iters`
//! iterations have been spent in total.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub initial_step: f64,
    /// Record the best value every this many iterations (0 disables tracing).
    pub trace_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-12,
            initial_step: 0.5,
            trace_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best-so-far value at every `trace_every` iterations, then the final value.
    pub trace: Vec<f64>,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn adaptive(n: usize) -> Self {
        let n = n as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 0.5 / n,
            shrink: 1.0 - 1.0 / n,
        }
    }
}

/// Minimizes `f` starting from `x0`. Non-finite values are treated as `+∞`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut best_x = x0.to_vec();
    let mut best = eval(&best_x);
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    if n == 0 {
        return SimplexOutcome {
            x: best_x,
            value: best,
            iterations,
            evaluations,
            converged: true,
            trace: vec![best],
        };
    }

    let c = Coefficients::adaptive(n);

    while iterations < opts.max_iters {
        let cycle_start = best;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += opts.initial_step;
            let fx = eval(&x);
            simplex.push((x, fx));
        }

        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1 < best {
                best = simplex[0].1;
                best_x.clone_from(&simplex[0].0);
            }
            if simplex[n].1 - simplex[0].1 < opts.tol || iterations >= opts.max_iters {
                break;
            }
            iterations += 1;
            if opts.trace_every > 0 && iterations.is_multiple_of(opts.trace_every) {
                trace.push(best);
            }

            centroid.iter_mut().for_each(|v| *v = 0.0);
            for (x, _) in &simplex[..n] {
                for (cv, xv) in centroid.iter_mut().zip(x) {
                    *cv += xv;
                }
            }
            centroid.iter_mut().for_each(|v| *v /= n as f64);

            let worst = simplex[n].1;
            let second_worst = simplex[n - 1].1;
            let lowest = simplex[0].1;

            let along = |t: f64, from: &[f64], out: &mut Vec<f64>| {
                for ((o, cv), fv) in out.iter_mut().zip(&centroid).zip(from) {
                    *o = cv + t * (fv - cv);
                }
            };

            // reflected point: centroid + reflect·(centroid − worst)
            along(-c.reflect, &simplex[n].0, &mut trial);
            let reflected = trial.clone();
            let f_reflected = eval(&reflected);

            if f_reflected < lowest {
                along(c.expand, &reflected, &mut trial);
                let f_expanded = eval(&trial);
                simplex[n] = if f_expanded < f_reflected {
                    (trial.clone(), f_expanded)
                } else {
                    (reflected, f_reflected)
                };
                continue;
            }
            if f_reflected < second_worst {
                simplex[n] = (reflected, f_reflected);
                continue;
            }
            if f_reflected < worst {
                along(c.contract, &reflected, &mut trial);
                let f_contracted = eval(&trial);
                if f_contracted <= f_reflected {
                    simplex[n] = (trial.clone(), f_contracted);
                    continue;
                }
            } else {
                along(c.contract, &simplex[n].0.clone(), &mut trial);
                let f_contracted = eval(&trial);
                if f_contracted < worst {
                    simplex[n] = (trial.clone(), f_contracted);
                    continue;
                }
            }

            let (head, tail) = simplex.split_at_mut(1);
            let anchor = &head[0].0;
            for (x, fx) in tail.iter_mut() {
                for (xv, av) in x.iter_mut().zip(anchor) {
                    *xv = av + c.shrink * (*xv - av);
                }
                *fx = eval(x);
            }
        }

        if cycle_start - best < opts.tol {
            converged = true;
            break;
        }
    }

    trace.push(best);
    SimplexOutcome {
        x: best_x,
        value: best,
        iterations,
        evaluations,
        converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let out = minimize(f, &[5.0, 5.0], &SimplexOptions::default());
        assert!(out.converged);
        assert!(out.value < 1e-12);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn solves_rosenbrock_in_four_dimensions() {
        let opts = SimplexOptions {
            max_iters: 50_000,
            tol: 1e-14,
            ..Default::default()
        };
        let out = minimize(rosenbrock, &[-1.2, 1.0, -1.2, 1.0], &opts);
        assert!(out.value < 1e-8, "{}", out.value);
    }

    #[test]
    fn trace_is_non_increasing_and_ends_at_best() {
        let opts = SimplexOptions {
            trace_every: 5,
            ..Default::default()
        };
        let out = minimize(rosenbrock, &[0.0, 0.0, 0.0], &opts);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*out.trace.last().unwrap(), out.value);
    }

    #[test]
    fn respects_iteration_cap() {
        let opts = SimplexOptions {
            max_iters: 7,
            ..Default::default()
        };
        let out = minimize(rosenbrock, &[-1.2, 1.0], &opts);
        assert_eq!(out.iterations, 7);
        assert!(!out.converged);
    }

    #[test]
    fn non_finite_values_are_avoided() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 0.5).powi(2)
            }
        };
        let out = minimize(f, &[0.1], &SimplexOptions::default());
        assert!(out.value < 1e-12);
    }
}
