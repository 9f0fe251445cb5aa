//! Autoregression quantiles: check-loss regression of a response on its own
//! lags plus an intercept.
//!
//! The level-alpha fit minimizes `sum_t rho_alpha(x_t - b . y*_t)` over the
//! (p+1)-vector `b`, where `y*_t` is the lag row augmented by a leading 1.
//! This is a linear program; instead of a simplex code we run smoothed
//! iteratively reweighted least squares to get close, then polish with exact
//! line searches (the objective along any ray is piecewise linear, so its
//! one-dimensional minimum is a weighted quantile of breakpoints) and verify
//! the subgradient sign census at the end.

use crate::ar::LaggedDesign;
use crate::error::{Error, Result};
use crate::linalg;

/// Asymmetric absolute loss: `alpha * u` for positive `u`, `(1-alpha) * (-u)`
/// for negative `u`, zero at zero. Caller keeps `alpha` in (0,1).
pub fn check_loss(alpha: f64, u: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    if u > 0.0 {
        alpha * u
    } else {
        (alpha - 1.0) * u
    }
}

/// A fitted autoregression quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct ARQuantile {
    pub alpha: f64,
    /// Intercept first, then one slope per lag.
    pub coeffs: Vec<f64>,
    /// Check-loss value at the fit.
    pub objective: f64,
    /// Residuals strictly below the zero band.
    pub neg_count: usize,
    /// Residuals inside the zero band (interpolated observations).
    pub zero_count: usize,
}

impl ARQuantile {
    pub fn intercept(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coeffs[1..]
    }
}

/// Tuning for [`fit_ar_quantile`].
#[derive(Debug, Clone)]
pub struct QuantileOptions {
    /// Relative objective tolerance for the polish loop.
    pub f_tol: f64,
    /// Smoothed reweighted least-squares iterations before polishing.
    pub max_irls: usize,
    /// Polish sweep budget.
    pub max_sweeps: usize,
}

impl Default for QuantileOptions {
    fn default() -> Self {
        QuantileOptions {
            f_tol: 1e-11,
            max_irls: 40,
            max_sweeps: 60,
        }
    }
}

struct Workspace<'a> {
    design: &'a LaggedDesign,
    alpha: f64,
    residuals: Vec<f64>,
    // Line-search scratch: (breakpoint, weight, upper flag) triples.
    breaks: Vec<(f64, f64, bool)>,
}

impl Workspace<'_> {
    fn refresh_residuals(&mut self, b: &[f64]) {
        let n = self.design.n_eff();
        self.residuals.clear();
        for t in 0..n {
            self.residuals.push(self.design.residual_full(t, b));
        }
    }

    fn objective(&self) -> f64 {
        self.residuals
            .iter()
            .map(|&r| check_loss(self.alpha, r))
            .sum()
    }

    /// Exact minimizer of `s -> sum_t rho_alpha(r_t - s * a_t)` where
    /// `a_t = dir . y*_t`.
    ///
    /// Each term with `a_t != 0` is `|a_t| * rho_beta(s_t - s)` for the
    /// breakpoint `s_t = r_t / a_t`, with `beta = alpha` when `a_t > 0` and
    /// `1 - alpha` otherwise. The right derivative in `s` past a breakpoint
    /// gains that term's full weight, so the minimum sits at the first
    /// breakpoint where cumulative weight reaches `sum_t w_t beta_t`.
    fn exact_step(&mut self, dir: &[f64]) -> f64 {
        let design = self.design;
        let n = design.n_eff();
        self.breaks.clear();
        let mut a_scale = 0.0f64;
        let mut row = Vec::with_capacity(dir.len());
        let mut coefs = Vec::with_capacity(n);
        for t in 0..n {
            row.clear();
            design.write_row(t, &mut row);
            let a: f64 = row.iter().zip(dir).map(|(y, d)| y * d).sum();
            a_scale = a_scale.max(a.abs());
            coefs.push(a);
        }
        if a_scale == 0.0 {
            return 0.0;
        }
        let cutoff = 1e-14 * a_scale;
        let mut threshold = 0.0;
        for t in 0..n {
            let a = coefs[t];
            if a.abs() <= cutoff {
                continue;
            }
            let w = a.abs();
            let beta = if a > 0.0 { self.alpha } else { 1.0 - self.alpha };
            threshold += w * beta;
            self.breaks.push((self.residuals[t] / a, w, false));
        }
        if self.breaks.is_empty() {
            return 0.0;
        }
        self.breaks
            .sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
        let mut cum = 0.0;
        for &(s, w, _) in self.breaks.iter() {
            cum += w;
            if cum >= threshold {
                return s;
            }
        }
        // Total weight always reaches the threshold (beta_t < 1 for all t).
        self.breaks.last().unwrap().0
    }

    /// Takes the exact step along `dir` if it improves the objective.
    /// Returns the improvement.
    fn improve_along(&mut self, b: &mut [f64], f_cur: &mut f64, dir: &[f64]) -> f64 {
        let s = self.exact_step(dir);
        if s == 0.0 {
            return 0.0;
        }
        let trial: Vec<f64> = b.iter().zip(dir).map(|(bi, di)| bi + s * di).collect();
        self.refresh_residuals(&trial);
        let f_new = self.objective();
        if f_new < *f_cur {
            let gain = *f_cur - f_new;
            b.copy_from_slice(&trial);
            *f_cur = f_new;
            gain
        } else {
            self.refresh_residuals(b);
            0.0
        }
    }
}

fn sign_census(residuals: &[f64]) -> (usize, usize, f64) {
    let scale = residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    let ztol = 1e-9 * (1.0 + scale);
    let mut neg = 0;
    let mut zero = 0;
    for &r in residuals {
        if r < -ztol {
            neg += 1;
        } else if r <= ztol {
            zero += 1;
        }
    }
    (neg, zero, ztol)
}

fn certificate_holds(neg: usize, zero: usize, n: usize, dim: usize, alpha: f64) -> bool {
    let mass = n as f64 * alpha;
    (neg as f64) <= mass + 1e-9 && mass <= (neg + zero + dim) as f64 + 1e-9
}

/// Fits the level-`alpha` autoregression quantile on an intercept-augmented
/// design.
pub fn fit_ar_quantile(
    design: &LaggedDesign,
    alpha: f64,
    opts: &QuantileOptions,
) -> Result<ARQuantile> {
    if !design.with_intercept() {
        return Err(Error::invalid(
            "autoregression quantiles need a design built with an intercept",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "quantile level must lie in (0,1), got {alpha}"
        )));
    }
    let n = design.n_eff();
    let dim = design.dim();
    if n <= dim {
        return Err(Error::SeriesTooShort {
            required: dim + 1,
            actual: n,
        });
    }
    // Tolerate float dust: 10 * (1 - 0.9) lands a hair under 1.
    let tail_mass = n as f64 * alpha.min(1.0 - alpha);
    if tail_mass < 1.0 - 1e-9 {
        return Err(Error::TailTooThin { mass: tail_mass });
    }

    // Unweighted least squares start.
    let mut b = linalg::weighted_least_squares(
        n,
        dim,
        |t, buf| design.write_row(t, buf),
        design.responses(),
        |_| 1.0,
    )
    .ok_or_else(|| Error::RankDeficient("collinear design columns".into()))?;

    let mut ws = Workspace {
        design,
        alpha,
        residuals: Vec::with_capacity(n),
        breaks: Vec::with_capacity(n),
    };
    ws.refresh_residuals(&b);

    // Smoothed IRLS: weight 1/max(|r|, delta) turns the check loss into a
    // quadratic near the current residuals; shrinking delta sharpens it.
    let scale0 = ws.residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64 + 1e-12;
    let mut delta = 0.1 * scale0;
    for _ in 0..opts.max_irls {
        let next = {
            let r = &ws.residuals;
            linalg::weighted_least_squares(
                n,
                dim,
                |t, buf| design.write_row(t, buf),
                design.responses(),
                |t| {
                    let rt = r[t];
                    let c = if rt > 0.0 {
                        alpha
                    } else if rt < 0.0 {
                        1.0 - alpha
                    } else {
                        0.5
                    };
                    c / rt.abs().max(delta)
                },
            )
        };
        let Some(next) = next else { break };
        let moved = b
            .iter()
            .zip(&next)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        b = next;
        ws.refresh_residuals(&b);
        delta = (delta * 0.2).max(1e-8);
        if moved <= 1e-12 * (1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            break;
        }
    }

    // Polish: exact line searches along coordinates, coordinate pairs, and
    // (when a sweep stalls) edges of the active set, which are the only
    // directions that can escape a non-optimal kink of the piecewise-linear
    // objective.
    let mut f_cur = ws.objective();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        dirs.push(e);
    }
    for i in 0..dim {
        for j in i + 1..dim {
            let mut d1 = vec![0.0; dim];
            d1[i] = 1.0;
            d1[j] = 1.0;
            dirs.push(d1);
            let mut d2 = vec![0.0; dim];
            d2[i] = 1.0;
            d2[j] = -1.0;
            dirs.push(d2);
        }
    }

    for _ in 0..opts.max_sweeps {
        let f_tol_abs = opts.f_tol * (1.0 + f_cur.abs());
        let mut gain = 0.0;
        for k in 0..dirs.len() {
            gain += ws.improve_along(&mut b, &mut f_cur, &dirs[k]);
        }
        if gain > f_tol_abs {
            continue;
        }

        // Stalled: probe active-set edges.
        let mut edge_gain = 0.0;
        if dim >= 2 {
            let (_, _, ztol) = sign_census(&ws.residuals);
            let mut active: Vec<usize> = (0..n)
                .filter(|&t| ws.residuals[t].abs() <= ztol)
                .collect();
            active.truncate(12);
            let mut combos: Vec<Vec<usize>> = Vec::new();
            pick_combinations(&active, dim - 1, 100, &mut combos);
            for combo in combos {
                let mut rows = Vec::with_capacity(combo.len());
                for &t in &combo {
                    let mut row = Vec::with_capacity(dim);
                    design.write_row(t, &mut row);
                    rows.push(row);
                }
                if let Some(d) = linalg::null_vector(rows, dim) {
                    edge_gain += ws.improve_along(&mut b, &mut f_cur, &d);
                }
            }
        }
        if edge_gain <= f_tol_abs {
            break;
        }
    }

    let (neg, zero, _) = sign_census(&ws.residuals);
    if !certificate_holds(neg, zero, n, dim, alpha) {
        return Err(Error::NonConvergence {
            restarts: 0,
            objective: f_cur,
            best: b,
        });
    }

    Ok(ARQuantile {
        alpha,
        coeffs: b,
        objective: f_cur,
        neg_count: neg,
        zero_count: zero,
    })
}

/// Pushes up to `cap` of the k-element combinations of `items` into `out`.
fn pick_combinations(items: &[usize], k: usize, cap: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        cap: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= cap {
            return;
        }
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, cap, out);
            cur.pop();
        }
    }
    if k == 0 || k > items.len() {
        return;
    }
    let mut cur = Vec::with_capacity(k);
    rec(items, k, 0, &mut cur, cap, out);
}
