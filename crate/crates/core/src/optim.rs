//! Nelder-Mead simplex minimisation.
//!
//! Used for every maximum-likelihood fit in the crate. Coefficients follow the
//! dimension-adaptive variant (Gao & Han, 2012), which reduces to the classic
//! (1, 2, 0.5, 0.5) choice in two dimensions. After the simplex collapses the
//! search is restarted from the incumbent until a restart stops improving it.

/// Settings for [`NelderMead::minimize`].
#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Convergence threshold on the spread of objective values in the simplex.
    pub tol: f64,
    /// Hard cap on objective evaluations, restarts included.
    pub max_evals: usize,
    /// Edge length of the initial simplex along every axis.
    pub initial_step: f64,
    /// Maximum number of restarts after the first convergence.
    pub max_restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_evals: 2000,
            initial_step: 0.25,
            max_restarts: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimises `f` starting from `x0`. Non-finite objective values are
    /// treated as `+inf`, so the simplex retreats from invalid regions.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut best_x = x0.to_vec();
        let mut best_v = eval(&best_x, &mut evals);
        if x0.is_empty() {
            return Minimum {
                x: best_x,
                value: best_v,
                evals,
                converged: true,
            };
        }

        let mut converged = false;
        for attempt in 0..=self.max_restarts {
            let step = if attempt == 0 {
                self.initial_step
            } else {
                self.initial_step * 0.5
            };
            let (x, v, ok) = self.run_simplex(&mut eval, &best_x, best_v, step, &mut evals);
            let improvement = best_v - v;
            if v <= best_v {
                best_x = x;
                best_v = v;
            }
            converged = ok;
            if !ok || evals >= self.max_evals {
                break;
            }
            if attempt > 0 && improvement.abs() <= self.tol {
                break;
            }
        }

        Minimum {
            x: best_x,
            value: best_v,
            evals,
            converged,
        }
    }

    fn run_simplex<E>(
        &self,
        eval: &mut E,
        x0: &[f64],
        f0: f64,
        step: f64,
        evals: &mut usize,
    ) -> (Vec<f64>, f64, bool)
    where
        E: FnMut(&[f64], &mut usize) -> f64,
    {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = if n > 2 {
            (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
        } else {
            (1.0, 2.0, 0.5, 0.5)
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), f0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = eval(&x, evals);
            simplex.push((x, v));
        }

        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            if worst.is_finite() && (worst - best).abs() <= self.tol {
                return (simplex[0].0.clone(), best, true);
            }
            if *evals >= self.max_evals {
                return (simplex[0].0.clone(), best, false);
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let point = |coef: f64, worst: &[f64], out: &mut [f64]| {
                for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                    *o = c + coef * (c - w);
                }
            };

            point(alpha, &simplex[n].0, &mut trial);
            let fr = eval(&trial, evals);
            let second_worst = simplex[n - 1].1;

            if fr < best {
                let reflected = trial.clone();
                point(alpha * gamma, &simplex[n].0, &mut trial);
                let fe = eval(&trial, evals);
                simplex[n] = if fe < fr {
                    (trial.clone(), fe)
                } else {
                    (reflected, fr)
                };
                continue;
            }
            if fr < second_worst {
                simplex[n] = (trial.clone(), fr);
                continue;
            }
            // contraction: outside if the reflection beat the worst point
            let (coef, target) = if fr < worst {
                (alpha * rho, fr)
            } else {
                (-rho, worst)
            };
            point(coef, &simplex[n].0, &mut trial);
            let fc = eval(&trial, evals);
            if fc < target {
                simplex[n] = (trial.clone(), fc);
                continue;
            }
            // shrink towards the best vertex
            let anchor = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, ai) in x.iter_mut().zip(&anchor) {
                    *xi = ai + sigma * (*xi - ai);
                }
                *v = eval(x, evals);
            }
        }
    }
}
