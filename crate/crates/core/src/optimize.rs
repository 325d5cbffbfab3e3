//! Nelder-Mead simplex minimisation.

use crate::error::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Whether the simplex diameter fell below the tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once every vertex lies within this distance of the best one.
    pub tol: f64,
    pub max_iter: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 5_000,
            initial_step: 0.25,
        }
    }
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], count: &mut usize) -> Result<f64> {
    *count += 1;
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("objective is not finite at {x:?}")))
    }
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, start: &[f64]) -> Result<Minimum>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = start.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty starting point".into()));
        }
        let mut evals = 0;
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(start.to_vec());
        for i in 0..n {
            let mut v = start.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values = simplex
            .iter()
            .map(|x| eval(&mut f, x, &mut evals))
            .collect::<Result<Vec<_>>>()?;

        let mut iterations = 0;
        let mut converged = false;
        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let diameter = simplex[1..]
                .iter()
                .map(|v| dist(v, &simplex[0]))
                .fold(0.0, f64::max);
            if diameter < self.tol {
                converged = true;
                break;
            }
            if iterations >= self.max_iter {
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = toward(REFLECT);
            let f_r = eval(&mut f, &reflected, &mut evals)?;
            if f_r < values[0] {
                let expanded = toward(EXPAND);
                let f_e = eval(&mut f, &expanded, &mut evals)?;
                if f_e < f_r {
                    simplex[n] = expanded;
                    values[n] = f_e;
                } else {
                    simplex[n] = reflected;
                    values[n] = f_r;
                }
                continue;
            }
            if f_r < values[n - 1] {
                simplex[n] = reflected;
                values[n] = f_r;
                continue;
            }
            let (contracted, f_c, accept) = if f_r < values[n] {
                let outside = toward(CONTRACT * REFLECT);
                let f_o = eval(&mut f, &outside, &mut evals)?;
                (outside, f_o, f_o <= f_r)
            } else {
                let inside = toward(-CONTRACT);
                let f_i = eval(&mut f, &inside, &mut evals)?;
                (inside, f_i, f_i < values[n])
            };
            if accept {
                simplex[n] = contracted;
                values[n] = f_c;
                continue;
            }
            // Shrink toward the best vertex.
            let best = simplex[0].clone();
            for i in 1..=n {
                simplex[i] = simplex[i]
                    .iter()
                    .zip(&best)
                    .map(|(x, b)| b + SHRINK * (x - b))
                    .collect();
                values[i] = eval(&mut f, &simplex[i], &mut evals)?;
            }
        }
        Ok(Minimum {
            point: simplex.swap_remove(0),
            value: values[0],
            iterations,
            evaluations: evals,
            converged,
        })
    }

    /// Repeats the descent from the current best point, with a fresh
    /// simplex, until a restart no longer improves the value.
    pub fn minimize_restarted<F>(&self, mut f: F, start: &[f64], max_restarts: usize) -> Result<Minimum>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut best = self.minimize(&mut f, start)?;
        for _ in 0..max_restarts {
            let next = self.minimize(&mut f, &best.point)?;
            let improved = next.value < best.value;
            let evaluations = best.evaluations + next.evaluations;
            let iterations = best.iterations + next.iterations;
            if improved {
                best = next;
            }
            best.evaluations = evaluations;
            best.iterations = iterations;
            if !improved {
                break;
            }
        }
        Ok(best)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Nelder-Mead with default step size.
pub fn nelder_mead<F>(objective: F, start: &[f64], tol: f64, max_iter: usize) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    NelderMead {
        tol,
        max_iter,
        ..NelderMead::default()
    }
    .minimize(objective, start)
}
