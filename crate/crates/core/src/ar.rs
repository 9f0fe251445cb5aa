//! Autoregressive models, lagged designs and simulation.
//!
//! Everything downstream (rank fits, quantile fits, risk reports) consumes a
//! [`LaggedDesign`]: response `X_t` paired with the lag window
//! `(X_{t-1}, ..., X_{t-p})` for `t = p+1, ..., n`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// An observed univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    label: Option<String>,
}

impl Series {
    /// Requires a non-empty series of finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SeriesTooShort {
                required: 1,
                actual: 0,
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("series values".into()));
        }
        Ok(Series {
            values,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// AR(p) model `X_t = c + phi_1 X_{t-1} + ... + phi_p X_{t-p} + Z_t`,
/// with the intercept `c` absent by default.
#[derive(Debug, Clone, PartialEq)]
pub struct ARModel {
    phi: Vec<f64>,
    intercept: Option<f64>,
}

impl ARModel {
    /// Requires order >= 1 and finite coefficients. Stationarity is not
    /// enforced here; operations that need it check explicitly.
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::invalid("AR order must be at least 1"));
        }
        if !phi.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("AR coefficients".into()));
        }
        Ok(ARModel {
            phi,
            intercept: None,
        })
    }

    pub fn with_intercept(mut self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite("AR intercept".into()));
        }
        self.intercept = Some(c);
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn intercept(&self) -> Option<f64> {
        self.intercept
    }
}

/// Result of a stationarity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityCheck {
    pub stationary: bool,
    /// Spectral radius of the companion matrix, i.e. the largest root modulus
    /// of `z^p - phi_1 z^(p-1) - ... - phi_p`.
    pub max_modulus: f64,
}

const STATIONARITY_TOL: f64 = 1e-9;

/// Checks whether all characteristic roots lie strictly inside the unit
/// circle (with a `1e-9` margin). Closed forms for p <= 2, root iteration
/// above that.
pub fn check_stationary(model: &ARModel) -> StationarityCheck {
    let phi = &model.phi;
    let max_modulus = match phi.len() {
        1 => phi[0].abs(),
        2 => {
            // Roots of z^2 - phi1 z - phi2.
            let disc = phi[0] * phi[0] + 4.0 * phi[1];
            if disc >= 0.0 {
                let s = disc.sqrt();
                ((phi[0] + s) / 2.0).abs().max(((phi[0] - s) / 2.0).abs())
            } else {
                // Complex pair with squared modulus -phi2.
                (-phi[1]).sqrt()
            }
        }
        _ => max_root_modulus(phi),
    };
    StationarityCheck {
        stationary: max_modulus < 1.0 - STATIONARITY_TOL,
        max_modulus,
    }
}

/// Largest root modulus of the monic polynomial
/// `z^p - phi_1 z^(p-1) - ... - phi_p` by Durand-Kerner iteration.
fn max_root_modulus(phi: &[f64]) -> f64 {
    let p = phi.len();
    // coeffs[k] multiplies z^k; leading coefficient is 1.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); p + 1];
    coeffs[p] = Complex64::new(1.0, 0.0);
    for (j, &c) in phi.iter().enumerate() {
        coeffs[p - 1 - j] = Complex64::new(-c, 0.0);
    }
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..p).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..p {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..p {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates: nudge apart and retry next sweep.
                roots[i] += Complex64::new(1e-6, 1e-6);
                max_step = f64::INFINITY;
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 {
            break;
        }
    }
    roots.iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Lagged regression view of a series.
///
/// Row `t` (0-based over `t = p..n-1` of the source) pairs response
/// `X_{t}` with lags `(X_{t-1}, ..., X_{t-p})`. With `with_intercept` the
/// conceptual row is augmented by a leading 1; the lag storage is unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedDesign {
    responses: Vec<f64>,
    lags: Vec<f64>, // row-major, n_eff x p
    p: usize,
    with_intercept: bool,
}

/// Builds the design with `n_eff = series.len() - p` rows.
pub fn build_lagged_design(series: &Series, p: usize, with_intercept: bool) -> Result<LaggedDesign> {
    let x = series.values();
    if x.len() <= p {
        return Err(Error::SeriesTooShort {
            required: p + 1,
            actual: x.len(),
        });
    }
    let n_eff = x.len() - p;
    let mut lags = Vec::with_capacity(n_eff * p);
    let mut responses = Vec::with_capacity(n_eff);
    for t in p..x.len() {
        responses.push(x[t]);
        for j in 1..=p {
            lags.push(x[t - j]);
        }
    }
    Ok(LaggedDesign {
        responses,
        lags,
        p,
        with_intercept,
    })
}

impl LaggedDesign {
    /// Pools rows from designs of identical shape, preserving order. Lets a
    /// series with gaps contribute one design per contiguous segment without
    /// any row spanning a gap.
    pub fn concat(parts: &[LaggedDesign]) -> Result<LaggedDesign> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("nothing to pool"))?;
        let mut pooled = LaggedDesign {
            responses: Vec::new(),
            lags: Vec::new(),
            p: first.p,
            with_intercept: first.with_intercept,
        };
        for part in parts {
            if part.p != pooled.p || part.with_intercept != pooled.with_intercept {
                return Err(Error::dim("pooled designs must share shape"));
            }
            pooled.responses.extend_from_slice(&part.responses);
            pooled.lags.extend_from_slice(&part.lags);
        }
        Ok(pooled)
    }

    pub fn n_eff(&self) -> usize {
        self.responses.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn with_intercept(&self) -> bool {
        self.with_intercept
    }

    /// Number of free coefficients: p plus one for the intercept if present.
    pub fn dim(&self) -> usize {
        self.p + usize::from(self.with_intercept)
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    /// Lag window for row `t`, most recent lag first.
    pub fn lag_row(&self, t: usize) -> &[f64] {
        &self.lags[t * self.p..(t + 1) * self.p]
    }

    /// Copies the full coefficient row (leading 1 first when the design
    /// carries an intercept) into `buf`.
    pub(crate) fn write_row(&self, t: usize, buf: &mut Vec<f64>) {
        if self.with_intercept {
            buf.push(1.0);
        }
        buf.extend_from_slice(self.lag_row(t));
    }

    /// `x_t - b . row_t` for the full coefficient vector `b` (intercept first
    /// when present).
    pub(crate) fn residual_full(&self, t: usize, b: &[f64]) -> f64 {
        debug_assert_eq!(b.len(), self.dim());
        let (c, slopes) = if self.with_intercept {
            (b[0], &b[1..])
        } else {
            (0.0, b)
        };
        let row = self.lag_row(t);
        let mut acc = self.responses[t] - c;
        for j in 0..self.p {
            acc -= slopes[j] * row[j];
        }
        acc
    }
}

/// Residuals `x_t - intercept - slopes . lags_t` for every design row.
pub fn residuals(design: &LaggedDesign, slopes: &[f64], intercept: Option<f64>) -> Result<Vec<f64>> {
    if slopes.len() != design.p() {
        return Err(Error::dim(format!(
            "expected {} slopes, got {}",
            design.p(),
            slopes.len()
        )));
    }
    if !slopes.iter().all(|v| v.is_finite()) || !intercept.map_or(true, f64::is_finite) {
        return Err(Error::NonFinite("coefficients".into()));
    }
    let c = intercept.unwrap_or(0.0);
    let out = (0..design.n_eff())
        .map(|t| {
            let row = design.lag_row(t);
            let mut acc = design.responses[t] - c;
            for j in 0..design.p() {
                acc -= slopes[j] * row[j];
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Second-moment matrix `n_eff^{-1} sum_t y_t y_t^T` of the design rows
/// (augmented by the leading 1 when the design has an intercept).
pub fn design_covariance(design: &LaggedDesign) -> Vec<Vec<f64>> {
    let d = design.dim();
    let mut m = vec![vec![0.0; d]; d];
    let mut row = Vec::with_capacity(d);
    for t in 0..design.n_eff() {
        row.clear();
        design.write_row(t, &mut row);
        for i in 0..d {
            for j in i..d {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    let inv = 1.0 / design.n_eff() as f64;
    for i in 0..d {
        for j in i..d {
            m[i][j] *= inv;
            m[j][i] = m[i][j];
        }
    }
    m
}

/// Runs `burn_in + n` steps of the AR recursion from a zero initial state and
/// keeps the last `n` values. `innovations` must supply every step.
pub fn simulate_ar(
    model: &ARModel,
    innovations: &[f64],
    n: usize,
    burn_in: usize,
) -> Result<Series> {
    if n == 0 {
        return Err(Error::invalid("simulation length must be at least 1"));
    }
    let total = n + burn_in;
    if innovations.len() != total {
        return Err(Error::dim(format!(
            "need {} innovations (n + burn_in), got {}",
            total,
            innovations.len()
        )));
    }
    if !innovations.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("innovations".into()));
    }
    let check = check_stationary(model);
    if !check.stationary {
        return Err(Error::NotStationary {
            radius: check.max_modulus,
        });
    }

    let c = model.intercept.unwrap_or(0.0);
    let mut path = Vec::with_capacity(total);
    for (t, &z) in innovations.iter().enumerate() {
        let mut x = c + z;
        for (j, &phi_j) in model.phi.iter().enumerate() {
            // Lag index t-1-j; zero before the start.
            if t > j {
                x += phi_j * path[t - 1 - j];
            }
        }
        path.push(x);
    }
    Ok(Series {
        values: path.split_off(burn_in),
        label: None,
    })
}
