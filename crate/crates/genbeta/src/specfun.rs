//! Special-function kernels used by every closed form in the crate.
//!
//! Contents:
//! - `ln_gamma` / `ln_beta` (Lanczos),
//! - `reg_inc_beta` — the regularized incomplete beta function I(y; p, q)
//!   via Lentz's continued fraction with the usual symmetry split,
//! - `inv_reg_inc_beta` — its inverse (bracketed bisection/Newton hybrid),
//! - `reg_lower_gamma` — regularized lower incomplete gamma P(a, x),
//! - `gauss_2f1` — Gauss hypergeometric ₂F₁(a, b; c; z) for z ≤ 0, evaluated
//!   by series after the Pfaff transformation z → z/(z−1),
//! - `appell_f1` — Appell F₁(a; b₁, b₂; c; x, y) through its one-dimensional
//!   Euler integral,
//! - `tanh_sinh01` — double-exponential quadrature on (0, 1) for nonnegative
//!   integrands with endpoint singularities.
//!
//! All functions are pure; there is no shared mutable state.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Tolerance/iteration budget for series and quadrature evaluations.
#[derive(Debug, Clone, Copy)]
pub struct SeriesControl {
    /// Relative tolerance for convergence.
    pub rel_tol: f64,
    /// Cap on series terms (or quadrature refinement work).
    pub max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::domain(format!(
                "SeriesControl rel_tol must be > 0, got {rel_tol}"
            )));
        }
        if max_terms < 1 {
            return Err(Error::domain("SeriesControl max_terms must be >= 1"));
        }
        Ok(SeriesControl { rel_tol, max_terms })
    }
}

impl Default for SeriesControl {
    /// Tight defaults: the closed forms built on these kernels are later
    /// differentiated numerically, which demands headroom.
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-12,
            max_terms: 100_000,
        }
    }
}

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0. Returns NaN outside the
/// positive half-line.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + 7.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
    }
}

/// ln B(p, q) = ln Γ(p) + ln Γ(q) − ln Γ(p+q), for p, q > 0.
pub fn ln_beta(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::domain(format!(
            "ln_beta requires p > 0 and q > 0, got p={p}, q={q}"
        )));
    }
    Ok(ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q))
}

const LENTZ_TINY: f64 = 1e-300;
const LENTZ_EPS: f64 = 1e-15;
const LENTZ_MAX_IT: usize = 500;

/// Continued fraction for the incomplete beta function (Lentz's algorithm).
fn beta_cf(y: f64, p: f64, q: f64) -> Result<f64> {
    let qab = p + q;
    let qap = p + 1.0;
    let qam = p - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * y / qap;
    if d.abs() < LENTZ_TINY {
        d = LENTZ_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=LENTZ_MAX_IT {
        let mf = m as f64;
        let m2 = 2.0 * mf;

        // Even step.
        let aa = mf * (q - mf) * y / ((qam + m2) * (p + m2));
        d = 1.0 + aa * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // Odd step.
        let aa = -(p + mf) * (qab + mf) * y / ((p + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < LENTZ_EPS {
            return Ok(h);
        }
    }
    Err(Error::numeric(
        format!("incomplete beta continued fraction stalled at y={y}, p={p}, q={q}"),
        Some(h),
    ))
}

/// Regularized incomplete beta function I(y; p, q) for y in [0, 1], p, q > 0.
///
/// Monotone nondecreasing in y, with I(0) = 0 and I(1) = 1.
pub fn reg_inc_beta(y: f64, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::domain(format!(
            "reg_inc_beta requires p > 0 and q > 0, got p={p}, q={q}"
        )));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(format!(
            "reg_inc_beta requires y in [0, 1], got {y}"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    let lnb = ln_beta(p, q)?;
    let front = (p * y.ln() + q * (-y).ln_1p() - lnb).exp();
    // Symmetry split keeps the continued fraction in its fast region.
    if y < (p + 1.0) / (p + q + 2.0) {
        Ok(front * beta_cf(y, p, q)? / p)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - y, q, p)? / q)
    }
}

/// Inverse of `reg_inc_beta` in its first argument: returns y with
/// |I(y; p, q) − u| ≤ 1e−12.
pub fn inv_reg_inc_beta(u: f64, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::domain(format!(
            "inv_reg_inc_beta requires p > 0 and q > 0, got p={p}, q={q}"
        )));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(format!(
            "inv_reg_inc_beta requires u in [0, 1], got {u}"
        )));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(1.0);
    }

    let lnb = ln_beta(p, q)?;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut y = p / (p + q); // mean as the starting point
    for _ in 0..200 {
        let f = reg_inc_beta(y, p, q)? - u;
        if f.abs() <= 1e-12 {
            return Ok(y);
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        // Newton step with bisection fallback.
        let ln_pdf = (p - 1.0) * y.ln() + (q - 1.0) * (-y).ln_1p() - lnb;
        let mut next = f64::NAN;
        if ln_pdf.is_finite() {
            let step = f * (-ln_pdf).exp();
            let cand = y - step;
            if cand > lo && cand < hi {
                next = cand;
            }
        }
        y = if next.is_finite() {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    // Bracket shrinks geometrically; reaching this means the residual target
    // itself is unattainable at this (p, q).
    Err(Error::numeric(
        format!("inv_reg_inc_beta did not reach residual 1e-12 at u={u}, p={p}, q={q}"),
        Some(y),
    ))
}

/// Regularized lower incomplete gamma P(a, x) for a > 0, x ≥ 0.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "reg_lower_gamma requires a > 0, got {a}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "reg_lower_gamma requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let lng = ln_gamma(a);
    if x < a + 1.0 {
        // Series representation.
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..LENTZ_MAX_IT {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * LENTZ_EPS {
                return Ok(sum * (-x + a * x.ln() - lng).exp());
            }
        }
        Err(Error::numeric(
            format!("incomplete gamma series stalled at a={a}, x={x}"),
            Some(sum * (-x + a * x.ln() - lng).exp()),
        ))
    } else {
        Ok(1.0 - reg_upper_gamma(a, x)?)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x), computed
/// directly (continued fraction) for x ≥ a + 1 so the far tail keeps full
/// relative precision.
pub fn reg_upper_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "reg_upper_gamma requires a > 0, got {a}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "reg_upper_gamma requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        return Ok(1.0 - reg_lower_gamma(a, x)?);
    }
    let lng = ln_gamma(a);
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / LENTZ_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=LENTZ_MAX_IT {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = b + an / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < LENTZ_EPS {
            return Ok(h * (-x + a * x.ln() - lng).exp());
        }
    }
    Err(Error::numeric(
        format!("incomplete gamma continued fraction stalled at a={a}, x={x}"),
        None,
    ))
}

/// Gauss hypergeometric ₂F₁(a, b; c; z) for z ≤ 0, with default control.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1_ctrl(a, b, c, z, &SeriesControl::default())
}

/// ₂F₁(a, b; c; z) for z ≤ 0.
///
/// The Pfaff transformation z → z/(z−1) maps the argument into [0, 1), where
/// the series converges; the transformation is applied on whichever of a, b
/// is smaller so the transformed terms decay fastest.
pub fn gauss_2f1_ctrl(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if c <= 0.0 && c == c.floor() {
        return Err(Error::domain(format!(
            "gauss_2f1: c must not be a non-positive integer, got {c}"
        )));
    }
    if !(z <= 0.0) {
        return Err(Error::domain(format!(
            "gauss_2f1: argument must satisfy z <= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let w = z / (z - 1.0); // in (0, 1)
    let (s, t, expo) = if a <= b {
        (a, c - b, a)
    } else {
        (c - a, b, b)
    };
    // (1 − z)^(−expo); 1 − z ≥ 1, no cancellation.
    let prefactor = (-expo * (-z).ln_1p()).exp();

    // The truncated tail is asymptotically geometric with ratio w, so the
    // stopping rule charges each term a factor 1/(1−w).
    let tail_factor = 1.0 - w;
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut small_streak = 0;
    for n in 0..ctrl.max_terms {
        let nf = n as f64;
        term *= (s + nf) * (t + nf) / ((c + nf) * (nf + 1.0)) * w;
        sum += term;
        if term.abs() <= ctrl.rel_tol * tail_factor * sum.abs() {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(prefactor * sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::numeric(
        format!("gauss_2f1 series did not converge for a={a}, b={b}, c={c}, z={z}"),
        Some(prefactor * sum),
    ))
}

/// Appell F₁(a; b₁, b₂; c; x, y) with default control.
pub fn appell_f1(a: f64, b1: f64, b2: f64, c: f64, x: f64, y: f64) -> Result<f64> {
    appell_f1_ctrl(a, b1, b2, c, x, y, &SeriesControl::default())
}

/// Appell F₁(a; b₁, b₂; c; x, y) for a > 0, c − a > 0, x in [0, 1), y ≤ 0,
/// through the Euler integral
///
/// ```text
///            1    1
/// F₁ = ─────────  ∫ t^(a−1) (1−t)^(c−a−1) (1−xt)^(−b₁) (1−yt)^(−b₂) dt
///      B(a, c−a)  0
/// ```
///
/// evaluated by tanh-sinh quadrature.
pub fn appell_f1_ctrl(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    if !(a > 0.0) || !(c - a > 0.0) {
        return Err(Error::domain(format!(
            "appell_f1 requires a > 0 and c - a > 0, got a={a}, c={c}"
        )));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::domain(format!(
            "appell_f1 requires x in [0, 1), got {x}"
        )));
    }
    if !(y <= 0.0) {
        return Err(Error::domain(format!(
            "appell_f1 requires y <= 0, got {y}"
        )));
    }
    if x == 0.0 && y == 0.0 {
        return Ok(1.0);
    }
    let lnb = ln_beta(a, c - a)?;
    let am1 = a - 1.0;
    let cam1 = c - a - 1.0;
    let one_minus_x = 1.0 - x;
    let integral = tanh_sinh01(
        |t, omt| {
            // 1 − x·t rebuilt from (1−t) and (1−x) to stay accurate as both
            // x and t approach 1.
            let one_minus_xt = omt + t * one_minus_x;
            let one_minus_yt = 1.0 - y * t;
            am1 * t.ln() + cam1 * omt.ln() - b1 * one_minus_xt.ln() - b2 * one_minus_yt.ln()
        },
        ctrl,
    )?;
    Ok(integral * (-lnb).exp())
}

/// Tanh-sinh (double-exponential) quadrature of a nonnegative integrand over
/// (0, 1).
///
/// The callback receives (t, 1−t), both computed to full relative precision
/// near the endpoints, and must return the *natural log* of the integrand;
/// endpoint singularities integrable against t^ε dt are handled by the
/// substitution. Converges to `ctrl.rel_tol` or fails with the partial value.
pub fn tanh_sinh01(ln_f: impl Fn(f64, f64) -> f64, ctrl: &SeriesControl) -> Result<f64> {
    const U_MAX: f64 = 6.8;
    const MAX_LEVEL: usize = 11;

    // Contribution at abscissa u: exp(ln_f + ln w), with
    //   t = 1/(1+e^(−π sinh u)),  1−t = 1/(1+e^(π sinh u)),
    //   w = π cosh(u) · t · (1−t).
    let point = |u: f64| -> f64 {
        let s = PI * u.sinh();
        if s.abs() > 700.0 {
            return 0.0;
        }
        let t = 1.0 / (1.0 + (-s).exp());
        let omt = 1.0 / (1.0 + s.exp());
        let ln_w = (PI * u.cosh()).ln() + t.ln() + omt.ln();
        let v = ln_f(t, omt) + ln_w;
        if v > -745.0 {
            v.exp()
        } else {
            0.0
        }
    };

    let mut h = 1.0_f64;
    let mut sum = point(0.0);
    {
        let mut k = 1.0;
        while k * h <= U_MAX {
            sum += point(k * h) + point(-k * h);
            k += 1.0;
        }
    }
    let mut prev = sum * h;

    for _level in 1..=MAX_LEVEL {
        h *= 0.5;
        // New points are the odd multiples of the refined step.
        let mut k = 1.0;
        while k * h <= U_MAX {
            sum += point(k * h) + point(-k * h);
            k += 2.0;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= ctrl.rel_tol * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numeric(
        "tanh-sinh quadrature did not converge".to_string(),
        Some(prev),
    ))
}
