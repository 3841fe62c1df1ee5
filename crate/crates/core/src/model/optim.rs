//! Minimizers for the small, smooth hyperparameter problems: a Nelder-Mead
//! phase followed by a BFGS polish on central finite-difference gradients.

#[derive(Debug, Clone)]
pub(crate) struct Settings {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub step_tol: f64,
    pub grad_tol: f64,
    pub fd_step: f64,
    pub simplex_step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

pub(crate) fn minimize(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], s: &Settings) -> Outcome {
    let (x, fx, nm_iters) = nelder_mead(f, x0, s);
    let mut out = bfgs(f, &x, fx, s);
    out.iterations += nm_iters;
    out
}

fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], s: &Settings) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += s.simplex_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;

    while iterations < s.max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[n]);
        if (worst - best).abs() <= 1e-7 * best.abs().max(1e-12) {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    (simplex[best].clone(), values[best], iterations)
}

pub(crate) fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel_step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bfgs(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], f0: f64, s: &Settings) -> Outcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut g = fd_gradient(f, &x, s.fd_step);
    let mut h: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < s.max_iter {
        iterations += 1;
        let mut dir: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        if dot(&dir, &g) >= 0.0 {
            // lost descent; restart from steepest descent
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut()
                    .enumerate()
                    .for_each(|(j, v)| *v = if i == j { 1.0 } else { 0.0 });
            }
            dir = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&dir, &g);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            converged = inf_norm(&g) < s.grad_tol;
            break;
        };

        let step: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let rel_change = (fx - f_new).abs() / fx.abs().max(1e-300);
        let g_new = fd_gradient(f, &x_new, s.fd_step);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();

        x = x_new;
        fx = f_new;
        g = g_new;

        if rel_change < s.rel_tol && inf_norm(&step) < s.step_tol {
            converged = inf_norm(&g) < s.grad_tol;
            break;
        }

        let sy = dot(&step, &y);
        if sy > 1e-14 * dot(&step, &step).sqrt() * dot(&y, &y).sqrt() {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += (1.0 + rho * yhy) * rho * step[i] * step[j]
                        - rho * (hy[i] * step[j] + step[i] * hy[j]);
                }
            }
        }
    }

    Outcome {
        grad_norm: inf_norm(&g),
        x,
        f: fx,
        iterations,
        converged,
    }
}
