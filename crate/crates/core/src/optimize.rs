//! Small derivative-free minimisers.

/// Outcome of a local minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Spread of function values over the final simplex.
    pub spread: f64,
}

/// Nelder–Mead simplex search with standard coefficients.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Convergence once `max f − min f` over the simplex falls below this.
    pub f_tol: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Restarts from the best vertex after convergence, to escape a
    /// prematurely collapsed simplex.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            f_tol: 1e-13,
            max_iterations: 20_000,
            initial_step: 0.25,
            restarts: 1,
        }
    }
}

impl NelderMead {
    pub fn minimize<const N: usize>(&self, f: impl Fn(&[f64; N]) -> f64, start: [f64; N]) -> Minimum<N> {
        let mut best = self.run(&f, start, self.initial_step);
        let mut iterations = best.iterations;
        for _ in 0..self.restarts {
            if !best.converged {
                break;
            }
            let next = self.run(&f, best.x, self.initial_step * 0.1);
            iterations += next.iterations;
            if next.value <= best.value {
                best = next;
            } else {
                best.converged = next.converged;
            }
        }
        best.iterations = iterations;
        best
    }

    fn run<const N: usize>(&self, f: &impl Fn(&[f64; N]) -> f64, start: [f64; N], step: f64) -> Minimum<N> {
        // NaN would poison the ordering
        let f = |p: &[f64; N]| {
            let v = f(p);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push((start, f(&start)));
        for k in 0..N {
            let mut p = start;
            p[k] += step;
            simplex.push((p, f(&p)));
        }
        let mut iterations = 0;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[N].1 - simplex[0].1;
            if spread <= self.f_tol || iterations >= self.max_iterations {
                return Minimum {
                    x: simplex[0].0,
                    value: simplex[0].1,
                    iterations,
                    converged: spread <= self.f_tol,
                    spread,
                };
            }
            iterations += 1;

            let mut centroid = [0.0; N];
            for (p, _) in &simplex[..N] {
                for k in 0..N {
                    centroid[k] += p[k] / N as f64;
                }
            }
            let along = |t: f64| {
                let mut p = [0.0; N];
                for k in 0..N {
                    p[k] = centroid[k] + t * (simplex[N].0[k] - centroid[k]);
                }
                p
            };

            let xr = along(-1.0);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = f(&xe);
                simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[N - 1].1 {
                simplex[N] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[N].1 {
                let x = along(-0.5);
                (x, f(&x))
            } else {
                let x = along(0.5);
                (x, f(&x))
            };
            if fc < simplex[N].1.min(fr) {
                simplex[N] = (xc, fc);
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[0].0;
            for (p, v) in simplex.iter_mut().skip(1) {
                for k in 0..N {
                    p[k] = best[k] + 0.5 * (p[k] - best[k]);
                }
                *v = f(p);
            }
        }
    }
}

/// Golden-section search for a minimum of a unimodal function on `[a, b]`.
/// Returns `(x, f(x))`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
