//! Rank-score dispersion of autoregression residuals and its minimizer.
//!
//! The dispersion `D(b) = sum_t r_t(b) * (J(R_t / (n+1)) - Jbar)` scores each
//! residual by a centered function of its rank. With the two-valued step
//! score `J_lambda(u) = lambda - 1{u < lambda}` the dispersion is nonnegative,
//! convex and piecewise linear in `b`, invariant to shifting all residuals by
//! a constant, and zero on tied residuals. Minimizing it over the slope
//! vector gives a location-free, outlier-resistant AR estimate.

use crate::ar::{residuals, LaggedDesign};
use crate::error::{Error, Result};
use crate::linalg;
use crate::util::guarded_count;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two-valued step score at level `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScore {
    lambda: f64,
}

impl StepScore {
    /// Requires `0 < lambda < 1`.
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid(format!(
                "score level must lie in (0,1), got {lambda}"
            )));
        }
        Ok(StepScore { lambda })
    }

    /// The conventional choice: sign-type score at the median.
    pub fn median() -> Self {
        StepScore { lambda: 0.5 }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Score value for `u` in the open unit interval: `lambda - 1` below
    /// `lambda`, else `lambda`. The jump point itself takes the upper value.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid(format!(
                "score argument must lie in (0,1), got {u}"
            )));
        }
        Ok(self.step(u))
    }

    fn step(&self, u: f64) -> f64 {
        if u < self.lambda {
            self.lambda - 1.0
        } else {
            self.lambda
        }
    }

    /// Number of grid points `i/(n+1)`, `i = 1..n`, that fall below the jump.
    ///
    /// Binary search over `i` with the same floating-point comparison used by
    /// [`StepScore::eval`], so counting and pointwise evaluation can never
    /// disagree.
    pub(crate) fn lower_count(&self, n: usize) -> usize {
        let denom = (n + 1) as f64;
        let mut lo = 0usize; // i = lo is below the jump (vacuous at 0)
        let mut hi = n + 1; // i = hi is not (at n+1 the ratio is 1.0)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if (mid as f64) / denom < self.lambda {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Mean of the score over the rank grid: `lambda - m/n` where `m` counts
    /// grid points below the jump (the `lambda - 1` branch contributes `-m/n`
    /// beyond the constant `lambda`).
    pub fn centering(&self, n: usize) -> f64 {
        debug_assert!(n > 0);
        self.lambda - self.lower_count(n) as f64 / n as f64
    }
}

/// Free-function form of [`StepScore::eval`].
pub fn score_eval(score: &StepScore, u: f64) -> Result<f64> {
    score.eval(u)
}

/// Ranks of `values`, 1-based, ties broken by original position.
pub fn ranks(values: &[f64]) -> Result<Vec<usize>> {
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("rank input".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut out = vec![0usize; values.len()];
    for (pos, &idx) in order.iter().enumerate() {
        out[idx] = pos + 1;
    }
    Ok(out)
}

fn require_slope_design(design: &LaggedDesign) -> Result<()> {
    if design.with_intercept() {
        return Err(Error::invalid(
            "dispersion is location-free; build the design without an intercept",
        ));
    }
    Ok(())
}

/// Jaeckel-type dispersion of the residuals `x_t - b . lags_t`.
///
/// Reference evaluation straight from the defining sum over ranks. The
/// solver uses an algebraically reduced form; the two are property-tested
/// against each other.
pub fn jaeckel_dispersion(design: &LaggedDesign, b: &[f64], score: &StepScore) -> Result<f64> {
    require_slope_design(design)?;
    let r = residuals(design, b, None)?;
    let n = r.len();
    let rk = ranks(&r)?;
    let center = score.centering(n);
    let denom = (n + 1) as f64;
    let mut d = 0.0;
    for t in 0..n {
        d += r[t] * (score.step(rk[t] as f64 / denom) - center);
    }
    Ok(d)
}

/// Result of a dispersion minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct RFit {
    /// Slope estimates, one per lag.
    pub slopes: Vec<f64>,
    pub dispersion_at_min: f64,
    /// Score level the fit was run at.
    pub lambda: f64,
    pub trace: SolverTrace,
}

/// Diagnostics from the dispersion solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTrace {
    /// Coordinate sweeps across all starts.
    pub iterations: usize,
    /// Perturbed restarts actually run.
    pub restarts: usize,
    /// Best improvement found by probing one tolerance step along each
    /// coordinate from the reported minimizer; near zero at a true minimum.
    pub gap: f64,
    /// Objective evaluations, the real cost driver.
    pub evaluations: usize,
}

/// Tuning for [`fit_r_estimator`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative objective tolerance; absolute tolerance is `f_tol * (1+|D|)`.
    pub f_tol: f64,
    /// Coefficient tolerance relative to the scale of the starting point.
    pub x_tol: f64,
    /// Perturbed restarts after the first descent converges.
    pub max_restarts: usize,
    /// Sweep budget per descent run.
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            f_tol: 1e-8,
            x_tol: 1e-6,
            max_restarts: 3,
            max_sweeps: 80,
        }
    }
}

/// Dispersion in the reduced form used inside the solver.
///
/// With the step score, ranks enter only through membership in the set of the
/// `m` smallest residuals (`m` = grid points below the jump), so
/// `D(b) = (m/n) * sum r_t - sum_of_m_smallest(r)`. One selection pass per
/// evaluation instead of a sort.
struct FastDispersion<'a> {
    design: &'a LaggedDesign,
    m: usize,
    frac: f64, // m / n_eff
}

impl FastDispersion<'_> {
    fn eval(&self, b: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let design = self.design;
        let n = design.n_eff();
        scratch.clear();
        let mut total = 0.0;
        for t in 0..n {
            let row = design.lag_row(t);
            let mut r = design.responses()[t];
            for j in 0..b.len() {
                r -= b[j] * row[j];
            }
            total += r;
            scratch.push(r);
        }
        scratch.select_nth_unstable_by(self.m - 1, f64::total_cmp);
        let lower: f64 = scratch[..self.m].iter().sum();
        self.frac * total - lower
    }
}

struct Solver<'a> {
    obj: FastDispersion<'a>,
    scratch: Vec<f64>,
    evaluations: usize,
    sweeps: usize,
    f_tol: f64,
    x_tol_abs: f64,
    max_sweeps: usize,
}

impl Solver<'_> {
    fn eval(&mut self, b: &[f64]) -> f64 {
        self.evaluations += 1;
        self.obj.eval(b, &mut self.scratch)
    }

    fn f_tol_abs(&self, f: f64) -> f64 {
        self.f_tol * (1.0 + f.abs())
    }

    /// Minimizes the convex `t -> D(base + t dir)` by bracketing and golden
    /// section. Returns the best step and value found.
    fn line_search(&mut self, base: &[f64], dir: &[f64], f0: f64, h: f64) -> (f64, f64) {
        let dim = base.len();
        let mut point = vec![0.0; dim];
        macro_rules! at {
            ($t:expr) => {{
                let t: f64 = $t;
                for i in 0..dim {
                    point[i] = base[i] + t * dir[i];
                }
                self.eval(&point)
            }};
        }

        let f_plus = at!(h);
        let f_minus = at!(-h);
        // Bracket a minimum of the convex section.
        let (mut a, mut b) = if f0 <= f_plus && f0 <= f_minus {
            (-h, h)
        } else {
            let sgn = if f_plus < f_minus { 1.0 } else { -1.0 };
            let mut t_prev = 0.0;
            let mut t_cur = sgn * h;
            let mut f_cur = f_plus.min(f_minus);
            let mut step = 2.0 * h;
            let mut expansions = 0;
            loop {
                let t_next = t_cur + sgn * step;
                let f_next = at!(t_next);
                if f_next >= f_cur || expansions >= 70 {
                    // Minimum lies in [t_prev, t_next] (orientation aside).
                    break if sgn > 0.0 {
                        (t_prev, t_next)
                    } else {
                        (t_next, t_prev)
                    };
                }
                t_prev = t_cur;
                t_cur = t_next;
                f_cur = f_next;
                step *= 2.0;
                expansions += 1;
            }
        };

        // Golden section down to half the coefficient tolerance.
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let tol = (self.x_tol_abs * 0.5).max(1e-14 * (1.0 + a.abs().max(b.abs())));
        let mut c = b - (b - a) * INV_PHI;
        let mut d = a + (b - a) * INV_PHI;
        let mut fc = at!(c);
        let mut fd = at!(d);
        while b - a > tol {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * INV_PHI;
                fc = at!(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * INV_PHI;
                fd = at!(d);
            }
        }
        let (t_best, f_best) = if fc <= fd { (c, fc) } else { (d, fd) };
        if f_best < f0 {
            (t_best, f_best)
        } else {
            (0.0, f0)
        }
    }

    /// Coordinate descent with diagonal, momentum and random rescue
    /// directions. The objective is piecewise linear, so axis-only descent
    /// can wedge in a corner; the extra directions break out of those.
    fn descend(&mut self, start: Vec<f64>, dir_rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
        let dim = start.len();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            dirs.push(e);
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                let mut d1 = vec![0.0; dim];
                d1[i] = inv_sqrt2;
                d1[j] = inv_sqrt2;
                dirs.push(d1);
                let mut d2 = vec![0.0; dim];
                d2[i] = inv_sqrt2;
                d2[j] = -inv_sqrt2;
                dirs.push(d2);
            }
        }

        let mut b = start;
        let mut fb = self.eval(&b);
        let mut h = (0.25f64).max(8.0 * self.x_tol_abs);

        for _ in 0..self.max_sweeps {
            self.sweeps += 1;
            let sweep_start = b.clone();
            let f_start = fb;

            for dir in &dirs {
                let (t, f) = self.line_search(&b, dir, fb, h);
                if f < fb {
                    for i in 0..dim {
                        b[i] += t * dir[i];
                    }
                    fb = f;
                }
            }

            // Momentum: the net sweep movement often points down a valley.
            let mut mom: Vec<f64> = (0..dim).map(|i| b[i] - sweep_start[i]).collect();
            let norm = mom.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > self.x_tol_abs {
                for v in &mut mom {
                    *v /= norm;
                }
                let (t, f) = self.line_search(&b, &mom, fb, h);
                if f < fb {
                    for i in 0..dim {
                        b[i] += t * mom[i];
                    }
                    fb = f;
                }
            }

            if f_start - fb <= self.f_tol_abs(fb) {
                // Stalled. Random directions probe corners the fixed set misses.
                let mut rescued = false;
                if dim >= 2 {
                    for _ in 0..2 * dim {
                        let mut d: Vec<f64> =
                            (0..dim).map(|_| dir_rng.gen::<f64>() * 2.0 - 1.0).collect();
                        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm < 1e-12 {
                            continue;
                        }
                        for v in &mut d {
                            *v /= norm;
                        }
                        let (t, f) = self.line_search(&b, &d, fb, h);
                        if f < fb - self.f_tol_abs(fb) {
                            for i in 0..dim {
                                b[i] += t * d[i];
                            }
                            fb = f;
                            rescued = true;
                            break;
                        }
                    }
                }
                if !rescued {
                    if h <= self.x_tol_abs {
                        break;
                    }
                    h = (h / 8.0).max(self.x_tol_abs);
                }
            }
        }
        (b, fb)
    }
}

/// Unweighted least-squares slopes (intercept fitted, then dropped) as the
/// solver's starting point. Fitting the intercept keeps the start sensible
/// for series that are far from zero mean.
pub(crate) fn least_squares_start(design: &LaggedDesign) -> Result<Vec<f64>> {
    let dim = design.p() + 1;
    let beta = linalg::weighted_least_squares(
        design.n_eff(),
        dim,
        |t, buf| {
            buf.push(1.0);
            buf.extend_from_slice(design.lag_row(t));
        },
        design.responses(),
        |_| 1.0,
    )
    .ok_or_else(|| Error::RankDeficient("collinear lag columns".into()))?;
    Ok(beta[1..].to_vec())
}

/// Minimizes the rank dispersion over slope vectors.
///
/// Derivative-free descent from the least-squares start: per-sweep line
/// searches along coordinates, lag-pair diagonals and the momentum direction,
/// random rescue directions when a sweep stalls, then perturbed restarts.
/// Every step is deterministic for a given input.
pub fn fit_r_estimator(
    design: &LaggedDesign,
    score: &StepScore,
    opts: &SolverOptions,
) -> Result<RFit> {
    require_slope_design(design)?;
    let p = design.p();
    let n = design.n_eff();
    if n <= p {
        return Err(Error::SeriesTooShort {
            required: p + 1,
            actual: n,
        });
    }
    if !(opts.f_tol > 0.0 && opts.x_tol > 0.0) {
        return Err(Error::invalid("solver tolerances must be positive"));
    }

    // Constant lag columns leave the dispersion flat along that slope.
    for j in 0..p {
        let col: Vec<f64> = (0..n).map(|t| design.lag_row(t)[j]).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
            return Err(Error::RankDeficient(format!("lag column {j} is constant")));
        }
    }

    let m = score.lower_count(n);
    if m == 0 || m == n {
        return Err(Error::invalid(format!(
            "score level {} puts no rank grid point on one side of the jump for n_eff = {n}; \
             the dispersion would be identically zero",
            score.lambda()
        )));
    }

    let start = least_squares_start(design)?;
    let scale = start.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

    let mut solver = Solver {
        obj: FastDispersion {
            design,
            m,
            frac: m as f64 / n as f64,
        },
        scratch: Vec::with_capacity(n),
        evaluations: 0,
        sweeps: 0,
        f_tol: opts.f_tol,
        x_tol_abs: opts.x_tol * scale,
        max_sweeps: opts.max_sweeps,
    };

    // Fixed stream: identical inputs yield identical fits.
    let mut dir_rng = ChaCha8Rng::seed_from_u64(0x524e_4b44_4952);

    let start_dispersion = solver.eval(&start);
    let (mut best, mut f_best) = solver.descend(start.clone(), &mut dir_rng);
    let mut restarts = 0;

    for r in 0..opts.max_restarts {
        // Restart from a 20% perturbation, alternating sign per round.
        let sgn = if r % 2 == 0 { 1.0 } else { -1.0 };
        let perturbed: Vec<f64> = best
            .iter()
            .map(|&v| v + sgn * (0.2 * v.abs()).max(0.05 * scale))
            .collect();
        restarts += 1;
        let (cand, f_cand) = solver.descend(perturbed, &mut dir_rng);
        if f_cand < f_best {
            best = cand;
            f_best = f_cand;
        } else if r > 0 {
            // Two quiet restarts in a row: settled.
            break;
        }
    }

    // Contract check: one tolerance step along each coordinate must not beat
    // the reported minimum by more than the objective tolerance.
    let mut gap = 0.0f64;
    let mut probe = best.clone();
    for _ in 0..4 {
        gap = 0.0;
        let mut improved_at: Option<Vec<f64>> = None;
        for i in 0..best.len() {
            for sgn in [1.0, -1.0] {
                probe.copy_from_slice(&best);
                probe[i] += sgn * solver.x_tol_abs;
                let f = solver.eval(&probe);
                if f_best - f > gap {
                    gap = f_best - f;
                    improved_at = Some(probe.clone());
                }
            }
        }
        if gap <= solver.f_tol_abs(f_best) {
            break;
        }
        let (cand, f_cand) = solver.descend(improved_at.unwrap(), &mut dir_rng);
        if f_cand < f_best {
            best = cand;
            f_best = f_cand;
        }
    }
    if gap > 10.0 * solver.f_tol_abs(f_best) {
        return Err(Error::NonConvergence {
            restarts,
            objective: f_best,
            best,
        });
    }

    debug_assert!(f_best <= start_dispersion + solver.f_tol_abs(start_dispersion));
    Ok(RFit {
        slopes: best,
        dispersion_at_min: f_best,
        lambda: score.lambda(),
        trace: SolverTrace {
            iterations: solver.sweeps,
            restarts,
            gap,
            evaluations: solver.evaluations,
        },
    })
}

/// Order-statistic location estimate on the fit's residuals: the k-th
/// smallest with `k = max(1, floor(n_eff * alpha))`.
pub fn residual_location_quantile(design: &LaggedDesign, fit: &RFit, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "quantile level must lie in (0,1), got {alpha}"
        )));
    }
    let mut r = residuals(design, &fit.slopes, None)?;
    let n = r.len();
    let k = guarded_count(n, alpha).clamp(1, n);
    let (_, kth, _) = r.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar::{build_lagged_design, simulate_ar, ARModel, Series};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn design_from(values: Vec<f64>, p: usize) -> LaggedDesign {
        build_lagged_design(&Series::new(values).unwrap(), p, false).unwrap()
    }

    /// Deterministic noise in [-0.5, 0.5) without pulling in a generator.
    fn lcg_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn ranks_plain_and_tied() {
        assert_eq!(ranks(&[3.0, 1.0, 2.0]).unwrap(), vec![3, 1, 2]);
        // Ties keep input order.
        assert_eq!(ranks(&[1.0, 1.0, 0.5]).unwrap(), vec![2, 3, 1]);
        assert!(ranks(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn step_score_values() {
        let j = StepScore::median();
        assert_close(j.eval(0.3).unwrap(), -0.5, 0.0);
        // The jump point takes the upper branch.
        assert_close(j.eval(0.5).unwrap(), 0.5, 0.0);
        assert_close(j.eval(0.7).unwrap(), 0.5, 0.0);
        assert!(j.eval(0.0).is_err());
        assert!(j.eval(1.0).is_err());

        let j = StepScore::new(0.25).unwrap();
        assert_close(j.eval(0.2).unwrap(), -0.75, 0.0);
        assert_close(j.eval(0.9).unwrap(), 0.25, 0.0);
        assert!(StepScore::new(0.0).is_err());
        assert!(StepScore::new(1.0).is_err());
    }

    #[test]
    fn centering_matches_direct_mean() {
        for &lambda in &[0.1, 0.25, 0.5, 1.0 / 3.0, 0.75, 0.9] {
            let j = StepScore::new(lambda).unwrap();
            for n in 1..60usize {
                let denom = (n + 1) as f64;
                let mean = (1..=n)
                    .map(|i| j.eval(i as f64 / denom).unwrap())
                    .sum::<f64>()
                    / n as f64;
                assert_close(j.centering(n), mean, 1e-12);
                assert!(j.centering(n).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn dispersion_small_example() {
        // Residuals at b = 0 are (2, -1): ranks (2, 1), scores (0.5, -0.5),
        // centering 0, so D = 2*0.5 + (-1)*(-0.5) = 1.5.
        let d = design_from(vec![0.0, 2.0, -1.0], 1);
        let score = StepScore::median();
        assert_close(jaeckel_dispersion(&d, &[0.0], &score).unwrap(), 1.5, 1e-12);
    }

    #[test]
    fn dispersion_zero_on_tied_residuals() {
        // b = 1 on a constant-increment series leaves all residuals equal.
        let d = design_from(vec![1.0, 2.0, 3.0, 4.0], 1);
        let score = StepScore::median();
        // residuals at b=1: (1, 1, 1)
        let v = jaeckel_dispersion(&d, &[1.0], &score).unwrap();
        assert_close(v, 0.0, 1e-12);
    }

    #[test]
    fn dispersion_rejects_intercept_design() {
        let s = Series::new(vec![1.0, 2.0, 3.0]).unwrap();
        let d = build_lagged_design(&s, 1, true).unwrap();
        assert!(jaeckel_dispersion(&d, &[0.5], &StepScore::median()).is_err());
    }

    #[test]
    fn fast_form_matches_reference() {
        let score = StepScore::median();
        for seed in 0..20u64 {
            let n = 20 + (seed as usize % 30);
            let values = lcg_noise(n, seed + 1);
            let d = design_from(values, 1);
            let m = score.lower_count(d.n_eff());
            let fast = FastDispersion {
                design: &d,
                m,
                frac: m as f64 / d.n_eff() as f64,
            };
            let mut scratch = Vec::new();
            for k in 0..5 {
                let b = [-1.5 + 0.7 * k as f64];
                let reference = jaeckel_dispersion(&d, &b, &score).unwrap();
                let reduced = fast.eval(&b, &mut scratch);
                assert_close(reduced, reference, 1e-9 * (1.0 + reference.abs()));
            }
        }
    }

    #[test]
    fn fit_recovers_clean_ar1() {
        let model = ARModel::new(vec![0.6]).unwrap();
        let z: Vec<f64> = lcg_noise(600, 7);
        let s = simulate_ar(&model, &z, 400, 200).unwrap();
        let d = build_lagged_design(&s, 1, false).unwrap();
        let fit = fit_r_estimator(&d, &StepScore::median(), &SolverOptions::default()).unwrap();
        assert_close(fit.slopes[0], 0.6, 0.08);
        assert!(fit.dispersion_at_min >= -1e-10);
        assert!(fit.trace.evaluations > 0);
    }

    #[test]
    fn fit_beats_grid_scan() {
        // Coarse-grid oracle: the fitted dispersion must not sit above any
        // grid value.
        for seed in [3u64, 11, 29] {
            let z = lcg_noise(60, seed);
            let model = ARModel::new(vec![0.4]).unwrap();
            let s = simulate_ar(&model, &z, 40, 20).unwrap();
            let d = build_lagged_design(&s, 1, false).unwrap();
            let score = StepScore::median();
            let fit = fit_r_estimator(&d, &score, &SolverOptions::default()).unwrap();
            let grid_min = (-300..=300)
                .map(|k| jaeckel_dispersion(&d, &[k as f64 * 0.01], &score).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(
                fit.dispersion_at_min <= grid_min + 1e-7 * (1.0 + grid_min.abs()),
                "fit {} vs grid {}",
                fit.dispersion_at_min,
                grid_min
            );
        }
    }

    #[test]
    fn fit_not_above_least_squares_start() {
        let z = lcg_noise(130, 5);
        let model = ARModel::new(vec![0.5, -0.2]).unwrap();
        let s = simulate_ar(&model, &z, 100, 30).unwrap();
        let d = build_lagged_design(&s, 2, false).unwrap();
        let score = StepScore::median();
        let fit = fit_r_estimator(&d, &score, &SolverOptions::default()).unwrap();
        let ls = least_squares_start(&d).unwrap();
        let d_ls = jaeckel_dispersion(&d, &ls, &score).unwrap();
        assert!(fit.dispersion_at_min <= d_ls + 1e-8 * (1.0 + d_ls.abs()));
        assert!(fit.trace.gap <= 1e-6 * (1.0 + fit.dispersion_at_min));
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        let d = design_from(vec![2.0, 2.0, 2.0, 2.0], 1);
        assert!(matches!(
            fit_r_estimator(&d, &StepScore::median(), &SolverOptions::default()),
            Err(Error::RankDeficient(_))
        ));

        let s = Series::new(vec![1.0, 2.0, 3.0]).unwrap();
        let with_c = build_lagged_design(&s, 1, true).unwrap();
        assert!(fit_r_estimator(&with_c, &StepScore::median(), &SolverOptions::default()).is_err());

        // Extreme score level: every rank grid point sits on one side.
        let d = design_from(lcg_noise(6, 1), 1);
        let extreme = StepScore::new(1e-6).unwrap();
        assert!(matches!(
            fit_r_estimator(&d, &extreme, &SolverOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn location_quantile_small_example() {
        // Residuals at b = 0: (1, 2, 3); k = max(1, floor(3 * 0.5)) = 1.
        let d = design_from(vec![0.0, 1.0, 2.0, 3.0], 1);
        let fit = RFit {
            slopes: vec![0.0],
            dispersion_at_min: 0.0,
            lambda: 0.5,
            trace: SolverTrace {
                iterations: 0,
                restarts: 0,
                gap: 0.0,
                evaluations: 0,
            },
        };
        assert_close(residual_location_quantile(&d, &fit, 0.5).unwrap(), 1.0, 0.0);
        assert_close(residual_location_quantile(&d, &fit, 0.95).unwrap(), 2.0, 0.0);
        assert!(residual_location_quantile(&d, &fit, 0.0).is_err());
        assert!(residual_location_quantile(&d, &fit, 1.0).is_err());
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        fn small_design() -> impl Strategy<Value = (LaggedDesign, StepScore)> {
            (
                proptest::collection::vec(-50.0f64..50.0, 6..40),
                0.1f64..0.9,
            )
                .prop_map(|(values, lambda)| {
                    let d = build_lagged_design(&Series::new(values).unwrap(), 1, false).unwrap();
                    (d, StepScore::new(lambda).unwrap())
                })
        }

        proptest! {
            #[test]
            fn dispersion_nonnegative((d, score) in small_design(), b in -3.0f64..3.0) {
                let v = jaeckel_dispersion(&d, &[b], &score).unwrap();
                prop_assert!(v >= -1e-10, "D = {v}");
            }

            #[test]
            fn dispersion_convex((d, score) in small_design(),
                                  b1 in -3.0f64..3.0, b2 in -3.0f64..3.0, theta in 0.0f64..1.0) {
                let f1 = jaeckel_dispersion(&d, &[b1], &score).unwrap();
                let f2 = jaeckel_dispersion(&d, &[b2], &score).unwrap();
                let mid = theta * b1 + (1.0 - theta) * b2;
                let fm = jaeckel_dispersion(&d, &[mid], &score).unwrap();
                let bound = theta * f1 + (1.0 - theta) * f2;
                prop_assert!(fm <= bound + 1e-9 * (1.0 + bound.abs()));
            }

            #[test]
            fn dispersion_ignores_series_shift(values in proptest::collection::vec(-20.0f64..20.0, 6..30),
                                               b in -2.0f64..2.0,
                                               shift in prop_oneof![Just(-10.0), Just(3.7), Just(100.0)]) {
                // Shifting the whole series moves every residual by the same
                // constant c(1 - b), which ranks ignore, so the dispersion is
                // unchanged at every slope.
                let score = StepScore::median();
                let d0 = build_lagged_design(&Series::new(values.clone()).unwrap(), 1, false).unwrap();
                let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
                let d1 = build_lagged_design(&Series::new(shifted).unwrap(), 1, false).unwrap();
                let f0 = jaeckel_dispersion(&d0, &[b], &score).unwrap();
                let f1 = jaeckel_dispersion(&d1, &[b], &score).unwrap();
                prop_assert!((f0 - f1).abs() <= 1e-8 * (1.0 + f0.abs() + shift.abs()));
            }

            #[test]
            fn ranks_are_a_permutation(values in proptest::collection::vec(-1e6f64..1e6, 1..60)) {
                let r = ranks(&values).unwrap();
                let mut seen = vec![false; values.len()];
                for &k in &r {
                    prop_assert!(k >= 1 && k <= values.len());
                    prop_assert!(!seen[k - 1]);
                    seen[k - 1] = true;
                }
            }

            #[test]
            fn location_quantile_monotone_in_alpha(values in proptest::collection::vec(-30.0f64..30.0, 8..40)) {
                let d = build_lagged_design(&Series::new(values).unwrap(), 1, false).unwrap();
                let fit = RFit {
                    slopes: vec![0.2],
                    dispersion_at_min: 0.0,
                    lambda: 0.5,
                    trace: SolverTrace { iterations: 0, restarts: 0, gap: 0.0, evaluations: 0 },
                };
                let mut prev = f64::NEG_INFINITY;
                for alpha in [0.05, 0.25, 0.5, 0.75, 0.9, 0.99] {
                    let q = residual_location_quantile(&d, &fit, alpha).unwrap();
                    prop_assert!(q >= prev);
                    prev = q;
                }
            }
        }
    }
}
