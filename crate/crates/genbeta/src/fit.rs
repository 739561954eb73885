//! Parameter estimation and goodness of fit: maximum likelihood and CDF
//! least squares by gradient descent in log-parameter space, Kolmogorov–
//! Smirnov statistics with asymptotic thresholds, and parametric-bootstrap
//! confidence bands for complementary-CDF curves.

use crate::dist::{
    B2Params, BParams, DistSpec, Family, GGaParams, GIGaParams, Gb1Params, Gb2Params, GbParams,
};
use crate::error::{Error, Result};
use crate::parallel;
use serde_json::json;
use std::io::Write;
use std::path::Path;

/// Two-sided Kolmogorov–Smirnov statistic of a sample against a closed-form
/// CDF: sup over the sorted sample of |F_empirical − F|, evaluated at both
/// step edges. Invariant under sample reordering.
pub fn ks_statistic(samples: &[f64], spec: &DistSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("ks_statistic requires a nonempty sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cdf = spec.cdf_many(&xs)?;
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (i, &f) in cdf.iter().enumerate() {
        if f.is_nan() {
            return Err(Error::numeric(
                format!("cdf evaluation failed at x={}", xs[i]),
                None,
            ));
        }
        d = d.max(f - i as f64 / n);
        d = d.max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Asymptotic KS acceptance threshold c(α)/√n with c(0.05) = 1.358 and
/// c(0.01) = 1.628; valid for n ≥ 35.
pub fn ks_threshold(n: usize, alpha_level: f64) -> Result<f64> {
    if n < 35 {
        return Err(Error::domain(format!(
            "ks_threshold requires n >= 35 (asymptotic regime), got {n}"
        )));
    }
    let c = if (alpha_level - 0.05).abs() < 1e-12 {
        1.358
    } else if (alpha_level - 0.01).abs() < 1e-12 {
        1.628
    } else {
        return Err(Error::domain(format!(
            "ks_threshold supports alpha levels 0.05 and 0.01, got {alpha_level}"
        )));
    };
    Ok(c / (n as f64).sqrt())
}

/// Outcome of a fit: the estimated member, its KS statistic against the
/// sample, the matching threshold, and optimizer diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: DistSpec,
    pub ks: f64,
    pub ks_threshold: f64,
    pub neg_log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    /// JSON shape: {family, params{...}, ks, ks_threshold, nll, converged,
    /// iterations}.
    pub fn to_json(&self) -> serde_json::Value {
        let mut params = serde_json::Map::new();
        for (name, value) in self.spec.params() {
            params.insert(name.to_string(), json!(value));
        }
        json!({
            "family": self.spec.family().name(),
            "params": params,
            "ks": self.ks,
            "ks_threshold": self.ks_threshold,
            "nll": self.neg_log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
        })
    }
}

/// Which objective the descent minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Negative sample log-likelihood.
    Mle,
    /// Σ (F_empirical(x_i) − F(x_i))² over the sorted sample with midpoint
    /// plotting positions (i − ½)/n.
    CdfLsq,
}

// Free parameters live on the real line: logs of the positive shapes/scales,
// and for bounded families a slack w with β₁ = max·(1 + softplus(w)) so the
// likelihood stays finite for every sample.
#[derive(Clone, Copy)]
struct ParamSpace {
    family: Family,
    max_x: f64,
}

fn softplus(w: f64) -> f64 {
    if w > 30.0 {
        w
    } else {
        w.exp().ln_1p()
    }
}

fn inv_softplus(s: f64) -> f64 {
    if s > 30.0 {
        s
    } else {
        s.exp_m1().ln()
    }
}

impl ParamSpace {
    fn names(&self) -> &'static [&'static str] {
        match self.family {
            Family::Gb | Family::MGb | Family::TildeMGb => {
                &["beta1_slack", "ln_alpha", "ln_beta2", "ln_p", "ln_q"]
            }
            Family::B | Family::MB => &["beta1_slack", "ln_beta2", "ln_p", "ln_q"],
            Family::Gb1 => &["beta1_slack", "ln_alpha", "ln_p", "ln_q"],
            Family::Gb2 | Family::MGb2 => &["ln_alpha", "ln_beta2", "ln_p", "ln_q"],
            Family::B2 | Family::MB2 => &["ln_beta2", "ln_p", "ln_q"],
            Family::GGa => &["ln_alpha", "ln_beta", "ln_p"],
            Family::GIGa => &["ln_alpha", "ln_beta", "ln_q"],
        }
    }

    fn dim(&self) -> usize {
        self.names().len()
    }

    fn pack(&self, spec: &DistSpec) -> Result<Vec<f64>> {
        if spec.family() != self.family {
            return Err(Error::domain(format!(
                "init spec family {} does not match requested family {}",
                spec.family(),
                self.family
            )));
        }
        let slack = |beta1: f64| -> Result<f64> {
            let s = beta1 / self.max_x - 1.0;
            if s <= 0.0 {
                return Err(Error::domain(format!(
                    "init beta1={beta1} does not exceed the sample maximum {}",
                    self.max_x
                )));
            }
            Ok(inv_softplus(s))
        };
        Ok(match spec {
            DistSpec::Gb(g) | DistSpec::MGb(g) | DistSpec::TildeMGb(g) => vec![
                slack(g.beta1)?,
                g.alpha.ln(),
                g.beta2.ln(),
                g.p.ln(),
                g.q.ln(),
            ],
            DistSpec::B(b) | DistSpec::MB(b) => {
                vec![slack(b.beta1)?, b.beta2.ln(), b.p.ln(), b.q.ln()]
            }
            DistSpec::Gb1(g) => vec![slack(g.beta1)?, g.alpha.ln(), g.p.ln(), g.q.ln()],
            DistSpec::Gb2(g) | DistSpec::MGb2(g) => {
                vec![g.alpha.ln(), g.beta2.ln(), g.p.ln(), g.q.ln()]
            }
            DistSpec::B2(b) | DistSpec::MB2(b) => vec![b.beta2.ln(), b.p.ln(), b.q.ln()],
            DistSpec::GGa(g) => vec![g.alpha.ln(), g.beta.ln(), g.p.ln()],
            DistSpec::GIGa(g) => vec![g.alpha.ln(), g.beta.ln(), g.q.ln()],
        })
    }

    fn unpack(&self, v: &[f64]) -> DistSpec {
        let beta1 = |w: f64| self.max_x * (1.0 + softplus(w));
        match self.family {
            Family::Gb | Family::MGb | Family::TildeMGb => {
                let params = GbParams {
                    beta1: beta1(v[0]),
                    alpha: v[1].exp(),
                    beta2: v[2].exp(),
                    p: v[3].exp(),
                    q: v[4].exp(),
                };
                match self.family {
                    Family::Gb => DistSpec::Gb(params),
                    Family::MGb => DistSpec::MGb(params),
                    _ => DistSpec::TildeMGb(params),
                }
            }
            Family::B | Family::MB => {
                let params = BParams {
                    beta1: beta1(v[0]),
                    beta2: v[1].exp(),
                    p: v[2].exp(),
                    q: v[3].exp(),
                };
                if self.family == Family::B {
                    DistSpec::B(params)
                } else {
                    DistSpec::MB(params)
                }
            }
            Family::Gb1 => DistSpec::Gb1(Gb1Params {
                beta1: beta1(v[0]),
                alpha: v[1].exp(),
                p: v[2].exp(),
                q: v[3].exp(),
            }),
            Family::Gb2 | Family::MGb2 => {
                let params = Gb2Params {
                    alpha: v[0].exp(),
                    beta2: v[1].exp(),
                    p: v[2].exp(),
                    q: v[3].exp(),
                };
                if self.family == Family::Gb2 {
                    DistSpec::Gb2(params)
                } else {
                    DistSpec::MGb2(params)
                }
            }
            Family::B2 | Family::MB2 => {
                let params = B2Params {
                    beta2: v[0].exp(),
                    p: v[1].exp(),
                    q: v[2].exp(),
                };
                if self.family == Family::B2 {
                    DistSpec::B2(params)
                } else {
                    DistSpec::MB2(params)
                }
            }
            Family::GGa => DistSpec::GGa(GGaParams {
                alpha: v[0].exp(),
                beta: v[1].exp(),
                p: v[2].exp(),
            }),
            Family::GIGa => DistSpec::GIGa(GIGaParams {
                alpha: v[0].exp(),
                beta: v[1].exp(),
                q: v[2].exp(),
            }),
        }
    }

    /// Default starting point: α = 2, p = q = 1, β₂ at the sample median,
    /// β₁ at 1.5× the sample maximum.
    fn default_init(&self, median: f64) -> Vec<f64> {
        let w0 = inv_softplus(0.5); // β₁ = 1.5·max
        match self.family {
            Family::Gb | Family::MGb | Family::TildeMGb => {
                vec![w0, 2.0_f64.ln(), median.ln(), 0.0, 0.0]
            }
            Family::B | Family::MB => vec![w0, median.ln(), 0.0, 0.0],
            Family::Gb1 => vec![w0, 2.0_f64.ln(), 0.0, 0.0],
            Family::Gb2 | Family::MGb2 => vec![2.0_f64.ln(), median.ln(), 0.0, 0.0],
            Family::B2 | Family::MB2 => vec![median.ln(), 0.0, 0.0],
            Family::GGa | Family::GIGa => vec![2.0_f64.ln(), median.ln(), 0.0],
        }
    }
}

fn prepare_samples(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::domain("fit requires a nonempty sample"));
    }
    if samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::domain(
            "fit requires strictly positive, finite samples",
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.first() == sorted.last() {
        return Err(Error::domain(
            "degenerate sample: all observations are identical",
        ));
    }
    Ok(sorted)
}

const GRAD_STEP: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-6;
const REL_F_TOL: f64 = 1e-10;
const MAX_ITER: usize = 2000;

/// Gradient descent with central-difference gradients and a backtracking
/// (Armijo) line search, run until the gradient norm or the relative
/// objective change reaches its floor.
///
/// The central differences computed for the gradient also yield each
/// coordinate's curvature at no extra cost; the descent direction is scaled
/// by it (with a floor), which tames the wildly different stiffness of the
/// shape and scale coordinates.
fn descend(
    objective: &dyn Fn(&[f64]) -> f64,
    mut v: Vec<f64>,
    max_iter: usize,
) -> (Vec<f64>, f64, bool, usize) {
    let mut f = objective(&v);
    let dim = v.len();
    let mut iterations = 0;
    let mut converged = false;
    let mut stall_streak = 0;
    // Conjugate history: previous gradient, preconditioned gradient, and
    // search direction.
    let mut prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    while iterations < max_iter {
        iterations += 1;
        // Central differences in the free (log) coordinates; the same
        // evaluations give each coordinate's curvature for preconditioning.
        let mut grad = vec![0.0; dim];
        let mut curv = vec![0.0; dim];
        let mut gnorm2 = 0.0;
        for i in 0..dim {
            let mut vp = v.clone();
            vp[i] += GRAD_STEP;
            let mut vm = v.clone();
            vm[i] -= GRAD_STEP;
            let (fp, fm) = (objective(&vp), objective(&vm));
            let g = (fp - fm) / (2.0 * GRAD_STEP);
            // A non-finite slope points into a forbidden region; let the
            // finite coordinates move.
            grad[i] = if g.is_finite() { g } else { 0.0 };
            let h = (fp + fm - 2.0 * f) / (GRAD_STEP * GRAD_STEP);
            curv[i] = if h.is_finite() { h } else { 0.0 };
            gnorm2 += grad[i] * grad[i];
        }
        let gnorm = gnorm2.sqrt();
        if gnorm < GRAD_TOL {
            converged = true;
            break;
        }
        let cmax = curv.iter().cloned().fold(0.0_f64, f64::max);
        let floor = (cmax * 1e-4).max(1e-10);
        let pg: Vec<f64> = grad
            .iter()
            .zip(&curv)
            .map(|(g, h)| g / h.max(floor))
            .collect();
        // Polak–Ribière conjugation (restarted whenever it stops being a
        // descent direction) walks the correlated shape/scale valleys that
        // defeat plain steepest descent.
        let mut dir = pg.clone();
        if let Some((g_old, pg_old, dir_old)) = &prev {
            let denom: f64 = g_old.iter().zip(pg_old).map(|(g, p)| g * p).sum();
            if denom > 0.0 {
                let num: f64 = grad
                    .iter()
                    .zip(&pg)
                    .zip(pg_old)
                    .map(|((g, p), po)| g * (p - po))
                    .sum();
                let beta = (num / denom).max(0.0);
                for (d, d_old) in dir.iter_mut().zip(dir_old) {
                    *d += beta * d_old;
                }
            }
        }
        let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope > 0.0) {
            dir = pg.clone();
            slope = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
            if !(slope > 0.0) {
                converged = gnorm < 1e-3;
                break;
            }
        }
        // Backtracking line search from the natural unit step.
        let f_start = f;
        let mut t = 1.0_f64;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = v.iter().zip(&dir).map(|(x, d)| x - t * d).collect();
            let fc = objective(&cand);
            if fc.is_finite() && fc <= f - 1e-4 * t * slope {
                v = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No descent at line-search resolution: treat a small gradient
            // as convergence, otherwise report failure.
            converged = gnorm < 1e-3;
            break;
        }
        prev = Some((grad, pg, dir));
        let rel_change = (f_start - f).abs() / f_start.abs().max(1e-300);
        if rel_change < REL_F_TOL {
            stall_streak += 1;
            // A single stagnant conjugate iteration is not convergence; ask
            // for three in a row.
            if stall_streak >= 3 {
                converged = true;
                break;
            }
        } else {
            stall_streak = 0;
        }
    }
    (v, f, converged, iterations)
}

/// Runs `descend` with fresh conjugate history from each stall point until
/// restarts stop paying, within one shared iteration budget, then polishes
/// each coordinate to its one-dimensional stationary point.
fn descend_with_restarts(
    objective: &dyn Fn(&[f64]) -> f64,
    v0: Vec<f64>,
) -> (Vec<f64>, f64, bool, usize) {
    let (mut v, mut f, mut converged, mut iterations) = descend(objective, v0, MAX_ITER);
    for _ in 0..4 {
        if iterations >= MAX_ITER {
            break;
        }
        let (v2, f2, conv2, it2) = descend(objective, v.clone(), MAX_ITER - iterations);
        iterations += it2;
        let gain = (f - f2) / f.abs().max(1e-300);
        if f2 < f {
            v = v2;
            f = f2;
            converged = conv2;
        }
        if gain < 1e-9 {
            break;
        }
    }
    polish(objective, &mut v, &mut f);
    (v, f, converged, iterations)
}

/// Coordinate-wise Newton sweeps. The update uses only objective
/// differences and their ratio, so it is invariant under affine rescalings
/// of the objective and pins the stopping point to the surface itself.
fn polish(objective: &dyn Fn(&[f64]) -> f64, v: &mut Vec<f64>, f: &mut f64) {
    let dim = v.len();
    for _ in 0..24 {
        let mut largest = 0.0_f64;
        for i in 0..dim {
            let mut vp = v.clone();
            vp[i] += GRAD_STEP;
            let mut vm = v.clone();
            vm[i] -= GRAD_STEP;
            let (fp, fm) = (objective(&vp), objective(&vm));
            if !fp.is_finite() || !fm.is_finite() {
                continue;
            }
            let den = fp + fm - 2.0 * *f;
            if !(den > 0.0) {
                continue;
            }
            let mut delta = -GRAD_STEP * (fp - fm) / (2.0 * den);
            delta = delta.clamp(-0.5, 0.5);
            for _ in 0..3 {
                let mut cand = v.clone();
                cand[i] += delta;
                let fc = objective(&cand);
                if fc.is_finite() && fc <= *f {
                    largest = largest.max(delta.abs());
                    *v = cand;
                    *f = fc;
                    break;
                }
                delta *= 0.5;
            }
        }
        if largest < 1e-10 {
            break;
        }
    }
}

fn fit_with_method(
    samples: &[f64],
    family: Family,
    init: Option<DistSpec>,
    method: FitMethod,
) -> Result<FitResult> {
    let sorted = prepare_samples(samples)?;
    let n = sorted.len();
    let max_x = *sorted.last().unwrap();
    let median = sorted[n / 2];
    let space = ParamSpace { family, max_x };
    if n < space.dim() + 1 {
        return Err(Error::domain(format!(
            "fit of {family} needs at least {} observations, got {n}",
            space.dim() + 1
        )));
    }
    let v0 = match init {
        Some(spec) => {
            spec.validate()?;
            space.pack(&spec)?
        }
        None => space.default_init(median),
    };

    let inv_n = 1.0 / n as f64;
    let objective: Box<dyn Fn(&[f64]) -> f64> = match method {
        FitMethod::Mle => Box::new(|v: &[f64]| {
            let spec = space.unpack(v);
            if spec.validate().is_err() {
                return f64::INFINITY;
            }
            match spec.sum_ln_pdf(&sorted) {
                Ok(s) if s.is_finite() => -s * inv_n,
                _ => f64::INFINITY,
            }
        }),
        FitMethod::CdfLsq => {
            // Collapse ties: each unique value carries its multiplicity and
            // the mean of its midpoint plotting positions. Weights normalize
            // out, so duplicating the whole sample reproduces the identical
            // objective (and therefore identical fitted parameters).
            let mut unique: Vec<f64> = Vec::with_capacity(n);
            let mut weights: Vec<f64> = Vec::with_capacity(n);
            let mut midpoints: Vec<f64> = Vec::with_capacity(n);
            let mut i = 0usize;
            while i < n {
                let mut j = i;
                while j < n && sorted[j] == sorted[i] {
                    j += 1;
                }
                unique.push(sorted[i]);
                weights.push((j - i) as f64 / n as f64);
                midpoints.push((i as f64 + j as f64) / 2.0 * inv_n);
                i = j;
            }
            Box::new(move |v: &[f64]| {
                let spec = space.unpack(v);
                if spec.validate().is_err() {
                    return f64::INFINITY;
                }
                match spec.cdf_many(&unique) {
                    Ok(cdf) => {
                        let mut s = 0.0;
                        for ((f, w), e) in cdf.iter().zip(&weights).zip(&midpoints) {
                            let r = e - f;
                            s += w * r * r;
                        }
                        if s.is_finite() {
                            s
                        } else {
                            f64::INFINITY
                        }
                    }
                    Err(_) => f64::INFINITY,
                }
            })
        }
    };

    let f0 = objective(&v0);
    if !f0.is_finite() {
        return Err(Error::domain(
            "objective is not finite at the starting point".to_string(),
        ));
    }
    let (v, _f, converged, iterations) = descend_with_restarts(objective.as_ref(), v0);
    let spec = space.unpack(&v);
    let nll = -spec.sum_ln_pdf(&sorted)?;
    let ks = ks_statistic(&sorted, &spec)?;
    let threshold = ks_threshold(n, 0.05).unwrap_or(f64::NAN);
    Ok(FitResult {
        spec,
        ks,
        ks_threshold: threshold,
        neg_log_likelihood: nll,
        converged,
        iterations,
    })
}

/// Maximum-likelihood fit of the requested family by gradient descent over
/// log parameters (the bounded upper scale is reparameterized so it always
/// exceeds the sample maximum). Non-convergence is reported through the
/// `converged` flag, not an error.
pub fn fit_mle(samples: &[f64], family: Family, init: Option<DistSpec>) -> Result<FitResult> {
    fit_with_method(samples, family, init, FitMethod::Mle)
}

/// CDF least-squares fit: minimizes Σ (F_empirical − F)² on the sorted
/// sample with the same parameterization and descent as `fit_mle`.
pub fn fit_cdf_lsq(samples: &[f64], family: Family, init: Option<DistSpec>) -> Result<FitResult> {
    fit_with_method(samples, family, init, FitMethod::CdfLsq)
}

/// Pointwise confidence band for the complementary CDF.
#[derive(Debug, Clone)]
pub struct CiBand {
    pub grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    pub replicas_used: usize,
    pub replicas_dropped: usize,
}

impl CiBand {
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.grid.len() {
            if !(0.0 <= self.lower[i] && self.lower[i] <= self.upper[i] && self.upper[i] <= 1.0) {
                return Err(Error::domain(format!(
                    "band ordering violated at grid point {}",
                    self.grid[i]
                )));
            }
        }
        Ok(())
    }

    /// Tab-separated columns: x, lower, upper.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        for i in 0..self.grid.len() {
            writeln!(f, "{}\t{}\t{}", self.grid[i], self.lower[i], self.upper[i])?;
        }
        Ok(())
    }
}

/// Parametric bootstrap: draws `replicas` synthetic samples of size `n` from
/// `spec`, refits each with `method`, evaluates the fitted ccdf on `grid`,
/// and returns the pointwise (1−level)/2 and 1−(1−level)/2 envelopes.
/// Non-converged replicas are dropped; more than 20% drops is an error.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_ci(
    spec: &DistSpec,
    n: usize,
    replicas: usize,
    level: f64,
    grid: &[f64],
    method: FitMethod,
    seed: u64,
) -> Result<CiBand> {
    spec.validate()?;
    if replicas < 100 {
        return Err(Error::domain(format!(
            "bootstrap_ci requires at least 100 replicas, got {replicas}"
        )));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::domain("bootstrap_ci requires a nonempty grid"));
    }
    let family = spec.family();
    let curves = parallel::for_each_job(replicas, |r| -> Option<Vec<f64>> {
        let replica_seed = seed
            .wrapping_mul(0x9E3779B97F4A7C15)
            .wrapping_add(r as u64 + 1);
        let xs = spec.sample(n, replica_seed).ok()?;
        let fit = fit_with_method(&xs, family, Some(spec.clone()), method).ok()?;
        if !fit.converged {
            return None;
        }
        let mut ccdf = Vec::with_capacity(grid.len());
        for &x in grid {
            ccdf.push(fit.spec.ccdf(x).ok()?);
        }
        Some(ccdf)
    });
    let kept: Vec<Vec<f64>> = curves.into_iter().flatten().collect();
    let dropped = replicas - kept.len();
    if dropped * 5 > replicas {
        return Err(Error::numeric(
            format!("more than 20% of bootstrap replicas failed ({dropped}/{replicas})"),
            None,
        ));
    }
    let lo_q = (1.0 - level) / 2.0;
    let hi_q = 1.0 - lo_q;
    let m = kept.len();
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let mut col: Vec<f64> = kept.iter().map(|c| c[i]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pick = |q: f64| {
            let idx = ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
            col[idx]
        };
        lower.push(pick(lo_q));
        upper.push(pick(hi_q));
    }
    let band = CiBand {
        grid: grid.to_vec(),
        lower,
        upper,
        level,
        replicas_used: m,
        replicas_dropped: dropped,
    };
    band.validate()?;
    Ok(band)
}
