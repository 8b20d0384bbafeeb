//! Unconstrained Nelder–Mead simplex minimizer.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxEvaluations,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of vertex values falls below this.
    pub f_tol: f64,
    /// ...and every vertex lies within this distance of the best one.
    pub x_tol: f64,
    /// Number of times the simplex is rebuilt around the best point after
    /// converging; each restart must improve the value to continue.
    pub restarts: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 10_000,
            f_tol: 1e-16,
            x_tol: 1e-10,
            restarts: 4,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub stop: StopReason,
}

struct Budget<F> {
    f: F,
    used: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Budget<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.max {
            return None;
        }
        self.used += 1;
        let v = (self.f)(x);
        Some(if v.is_nan() { f64::INFINITY } else { v })
    }
}

/// Minimize `f` starting from `x0`, with an initial simplex of `x0` plus
/// `steps[i]` along each axis `i`. The start point counts as the first
/// evaluation and is never discarded unless something strictly better is
/// found, so the result is never worse than `f(x0)`.
pub fn minimize<F>(f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Outcome
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), steps.len(), "one step per dimension");
    let mut budget = Budget {
        f,
        used: 0,
        max: opts.max_evals,
    };
    let Some(f0) = budget.eval(x0) else {
        return Outcome {
            point: x0.to_vec(),
            value: f64::NAN,
            evaluations: 0,
            stop: StopReason::MaxEvaluations,
        };
    };
    let mut best = (x0.to_vec(), f0);
    let mut round_steps = steps.to_vec();

    for round in 0..=opts.restarts {
        let (stop, point, value) = run_simplex(&mut budget, &best.0, best.1, &round_steps, opts);
        let improved = value < best.1;
        if value <= best.1 {
            best = (point, value);
        }
        if stop == StopReason::MaxEvaluations {
            return Outcome {
                point: best.0,
                value: best.1,
                evaluations: budget.used,
                stop,
            };
        }
        if round > 0 && !improved {
            break;
        }
        // rebuild a smaller simplex around the incumbent
        round_steps.iter_mut().for_each(|s| *s *= 0.5);
    }
    Outcome {
        point: best.0,
        value: best.1,
        evaluations: budget.used,
        stop: StopReason::Converged,
    }
}

fn run_simplex<F>(
    budget: &mut Budget<F>,
    x0: &[f64],
    f0: f64,
    steps: &[f64],
    opts: &NelderMeadOptions,
) -> (StopReason, Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        match budget.eval(&x) {
            Some(v) => simplex.push((x, v)),
            None => return (StopReason::MaxEvaluations, x0.to_vec(), f0),
        }
    }

    macro_rules! eval_or_stop {
        ($x:expr) => {
            match budget.eval(&$x) {
                Some(v) => v,
                None => {
                    sort(&mut simplex);
                    let (x, v) = simplex.swap_remove(0);
                    return (StopReason::MaxEvaluations, x, v);
                }
            }
        };
    }

    loop {
        sort(&mut simplex);
        if converged(&simplex, opts) {
            let (x, v) = simplex.swap_remove(0);
            return (StopReason::Converged, x, v);
        }
        let worst = n;
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..worst].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(opts.reflection);
        let fr = eval_or_stop!(xr);
        if fr < simplex[0].1 {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval_or_stop!(xe);
            simplex[worst] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[worst - 1].1 {
            simplex[worst] = (xr, fr);
            continue;
        }
        // contraction: outside if the reflection beat the worst, else inside
        let (xc, fc) = if fr < simplex[worst].1 {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval_or_stop!(xc);
            (xc, fc)
        } else {
            let xc = along(-opts.contraction);
            let fc = eval_or_stop!(xc);
            (xc, fc)
        };
        if fc < simplex[worst].1.min(fr) {
            simplex[worst] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for k in 1..=n {
            let xs: Vec<f64> = best
                .iter()
                .zip(&simplex[k].0)
                .map(|(b, x)| b + opts.shrink * (x - b))
                .collect();
            let fs = eval_or_stop!(xs);
            simplex[k] = (xs, fs);
        }
    }
}

/// Stable sort by value: on ties the earlier vertex stays ahead.
fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn converged(simplex: &[(Vec<f64>, f64)], opts: &NelderMeadOptions) -> bool {
    let f_best = simplex[0].1;
    let f_worst = simplex[simplex.len() - 1].1;
    let f_spread = f_worst - f_best;
    let x_spread = simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    f_spread.is_finite() && f_spread <= opts.f_tol && x_spread <= opts.x_tol || x_spread <= opts.x_tol * 1e-3
}
