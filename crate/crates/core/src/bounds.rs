//! Explicit bound formulas and parameter plans for run lengths.
//!
//! Every constant that enters a plan is emitted; nothing is folded into
//! unspecified `c(alpha)`. Plans for `alpha = 1/2` involve numbers like
//! `exp(64 / theta^2)`, so sizes are carried as natural logarithms and the
//! plain values are only filled in when they fit in an `f64`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;

use crate::error::{domain, Error, Result};
use crate::geometry::zeta;
use crate::lattice::CouplingTable;

pub const BERRY_ESSEEN_CONSTANT: f64 = 7.5;
pub const DEFAULT_B: f64 = 0.5;
pub const DEFAULT_D: f64 = 2.0;

/// Which family of formulas applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `alpha = 0`.
    Zero,
    /// `0 < alpha < 1/2`.
    Interior,
    /// `alpha = 1/2`.
    Half,
}

impl Regime {
    pub fn of(alpha: f64) -> Result<Regime> {
        if alpha == 0.0 {
            Ok(Regime::Zero)
        } else if alpha > 0.0 && alpha < 0.5 {
            Ok(Regime::Interior)
        } else if alpha == 0.5 {
            Ok(Regime::Half)
        } else {
            domain(format!("plans need alpha in [0, 1/2], got {alpha}"))
        }
    }
}

fn regime_error(constraint: &str, detail: String) -> Error {
    Error::Regime {
        constraint: constraint.into(),
        detail,
    }
}

/// `e^x`, or `None` when it does not fit.
fn finite_exp(x: f64) -> Option<f64> {
    let v = x.exp();
    v.is_finite().then_some(v)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln Phi(-x) + x^2/2` for `x >= 0`, stable far into the tail.
pub fn ln_scaled_lower_tail(x: f64) -> f64 {
    if x < 30.0 {
        return normal_cdf(-x).ln() + 0.5 * x * x;
    }
    // Mills-ratio expansion; relative error below 1e-9 for x >= 30.
    let inv2 = 1.0 / (x * x);
    let series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2;
    series.ln() - (x * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

/// `ln Phi(-x)` for `x >= 0`, stable far into the tail.
pub fn ln_normal_lower_tail(x: f64) -> f64 {
    if x < 30.0 {
        return normal_cdf(-x).ln();
    }
    ln_scaled_lower_tail(x) - 0.5 * x * x
}

// ---------------------------------------------------------------------------
// Block energy

/// `E_alpha(|Delta|)`: `2(j1-1) + 2|Delta|^alpha/(alpha(1-alpha))`, or
/// `2(j1-1) + 2 log|Delta| + 4` when `alpha = 0`.
pub fn e_alpha(alpha: f64, j1: f64, delta_size: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return domain(format!("alpha must lie in [0, 1), got {alpha}"));
    }
    if !(delta_size >= 1.0) {
        return domain(format!("block size must be at least 1, got {delta_size}"));
    }
    Ok(e_alpha_ln(alpha, j1, delta_size.ln()))
}

/// `E_alpha` of a block of size `exp(ln_delta)`.
fn e_alpha_ln(alpha: f64, j1: f64, ln_delta: f64) -> f64 {
    let base = 2.0 * (j1 - 1.0);
    if alpha == 0.0 {
        base + 2.0 * ln_delta + 4.0
    } else {
        base + 2.0 * (alpha * ln_delta).exp() / (alpha * (1.0 - alpha))
    }
}

/// `sum_{i in Delta} sum_{j notin Delta} J(|i-j|) = 2 sum_{d=1}^{size} K(d)`.
pub fn exterior_coupling_sum(table: &CouplingTable, size: usize) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for d in (1..=size).rev() {
        let y = table.tail(d) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    2.0 * sum
}

// ---------------------------------------------------------------------------
// Concentration

/// Le Cam's small-ball bound `2 sqrt(pi) / sqrt(n m)` with `m` the censored
/// second moment `E[1 ^ (h/tau)^2]`.
pub fn lecam_bound(n: u64, tau: f64, censored_moment: f64) -> Result<f64> {
    if n == 0 || !(tau > 0.0) {
        return domain("Le Cam bound needs n >= 1 and tau > 0");
    }
    if !(censored_moment > 0.0 && censored_moment <= 1.0) {
        return domain(format!("censored moment must lie in (0, 1], got {censored_moment}"));
    }
    Ok(2.0 * std::f64::consts::PI.sqrt() / (n as f64 * censored_moment).sqrt())
}

/// `E[1 ^ (h/tau)^2]` for symmetric Bernoulli fields.
pub fn censored_moment_bernoulli(tau: f64) -> f64 {
    (1.0 / (tau * tau)).min(1.0)
}

/// `E[1 ^ (h/tau)^2]` for standard Gaussian fields.
pub fn censored_moment_gaussian(tau: f64) -> f64 {
    let phi = (-0.5 * tau * tau).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let inside = (2.0 * normal_cdf(tau) - 1.0) - 2.0 * tau * phi;
    inside / (tau * tau) + 2.0 * normal_cdf(-tau)
}

/// `E[1 ^ (h/tau)^2]` for fields uniform on `[-1, 1]`.
pub fn censored_moment_uniform(tau: f64) -> f64 {
    if tau < 1.0 {
        tau / 3.0 + 1.0 - tau
    } else {
        1.0 / (3.0 * tau * tau)
    }
}

/// Small-ball bound for Gaussian fields: `tau / sqrt(2 pi n)`.
pub fn gaussian_refinement(n: u64, tau: f64) -> f64 {
    tau / (2.0 * std::f64::consts::PI * n as f64).sqrt()
}

/// `sup_x P[N(0, n) in [x, x + tau]]`, attained by the centred interval.
pub fn gaussian_interval_sup(n: u64, tau: f64) -> f64 {
    2.0 * normal_cdf(tau / (2.0 * (n as f64).sqrt())) - 1.0
}

/// Berry-Esseen lower bound on `P[theta sum h <= -8 sqrt(Delta)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseen {
    /// `Phi(-8/theta) - 7.5/sqrt(Delta)`.
    pub lower: f64,
    pub gaussian_tail: f64,
    /// `(1/sqrt(2 pi)) (1/(1 + 8/theta)) exp(-32/theta^2)`, a minorant of
    /// the Gaussian tail.
    pub minorant: f64,
}

pub fn berry_esseen_lower(theta: f64, delta_size: f64) -> Result<BerryEsseen> {
    if !(theta > 0.0) || !(delta_size >= 1.0) {
        return domain("Berry-Esseen bound needs theta > 0 and Delta >= 1");
    }
    let y = 8.0 / theta;
    let tail = normal_cdf(-y);
    Ok(BerryEsseen {
        lower: tail - BERRY_ESSEEN_CONSTANT / delta_size.sqrt(),
        gaussian_tail: tail,
        minorant: (-0.5 * y * y).exp() / ((2.0 * std::f64::consts::PI).sqrt() * (1.0 + y)),
    })
}

/// `ln P[Bin(n, 1/2) = k]`.
pub fn binomial_ln_pmf(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2
}

/// `sup_x P[sum_{i<=n} h_i in [x, x + tau]]` for symmetric Bernoulli `h`.
///
/// The sum takes values `2k - n`, so a closed window of length `tau`
/// holds at most `floor(tau/2) + 1` of them.
pub fn bernoulli_interval_sup(n: u64, tau: f64) -> f64 {
    let width = (tau / 2.0).floor() as u64;
    let pmf: Vec<f64> = (0..=n).map(|k| binomial_ln_pmf(n, k).exp()).collect();
    let mut best: f64 = 0.0;
    for k in 0..=n {
        let hi = (k + width).min(n);
        let s: f64 = pmf[k as usize..=hi as usize].iter().sum();
        best = best.max(s);
    }
    best
}

/// `P[sum_{i<=n} h_i <= s]` for symmetric Bernoulli `h`.
pub fn bernoulli_sum_cdf(n: u64, s: f64) -> f64 {
    let kmax = ((s + n as f64) / 2.0).floor();
    if kmax < 0.0 {
        return 0.0;
    }
    let kmax = (kmax as u64).min(n);
    let mut acc = crate::exact::LogSumExp::default();
    for k in 0..=kmax {
        acc.add(binomial_ln_pmf(n, k));
    }
    acc.value().exp().min(1.0)
}

// ---------------------------------------------------------------------------
// Upper-bound plan

/// Parameters of the block covering argument bounding the longest run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundPlan {
    pub regime: Regime,
    pub alpha: f64,
    pub theta: f64,
    pub j1: f64,
    pub beta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub g1: f64,
    /// Block size `|Delta|` (rounded up).
    pub delta: Option<f64>,
    pub ln_delta: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub ln_m: f64,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub ln_n: f64,
    #[serde(rename = "L_max")]
    pub l_max: Option<f64>,
    pub ln_l_max: f64,
    #[serde(rename = "diamV")]
    pub diam_v: Option<f64>,
    pub ln_diam_v: f64,
    /// `E_alpha(|Delta|)`.
    pub e_alpha: f64,
    /// `8 E sqrt(pi) / (theta sqrt|Delta|)`, which must not exceed `B`
    /// (`0 <= alpha < 1/2`).
    pub p1_proxy: Option<f64>,
    /// `tau = 2E/theta`, which must be at least 1 (`0 <= alpha < 1/2`).
    pub tau: Option<f64>,
    /// `ln Phi(-8/theta) - ln(7.5/sqrt|Delta|)`, which must be positive
    /// (`alpha = 1/2`).
    pub berry_esseen_log_margin: Option<f64>,
    /// Whether `M <= 2N`, i.e. `L_max <= diam V`.
    pub covering_ok: bool,
    pub bounds: UpperBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBounds {
    /// `ln[(2N+1) exp(-2 beta E_alpha)]`.
    pub ln_gibbs: f64,
    pub gibbs: f64,
    /// Stated guarantee: `1 - 2 exp(-g1)`, or `1 - exp(-exp(g1)/2)` at `alpha = 1/2`.
    pub probability: f64,
    /// `1 - (2N+1) ((1+B)/2)^(M-1)` (`0 <= alpha < 1/2`).
    pub probability_direct: Option<f64>,
}

/// Below this size integers are exact in an `f64`; above it rounding up
/// changes nothing representable.
const EXACT_INTEGERS: f64 = 4_503_599_627_370_496.0;

/// `ceil(x)` as `(value if finite, log)`; `x` is used directly while it
/// is an exact integer range float, `ln_x` beyond.
fn ceil_direct(x: f64, ln_x: f64) -> (Option<f64>, f64) {
    if x.is_finite() && x < EXACT_INTEGERS {
        let c = x.ceil();
        (Some(c), c.ln())
    } else {
        (finite_exp(ln_x), ln_x)
    }
}

fn ceil_ln(ln_x: f64) -> (Option<f64>, f64) {
    ceil_direct(ln_x.exp(), ln_x)
}

/// Smallest `N` with `2N + 1 >= x`, `x = exp(ln_x)`, as `(value, log)`.
fn half_width_ln(ln_x: f64) -> (Option<f64>, f64) {
    match finite_exp(ln_x) {
        Some(x) if x < EXACT_INTEGERS => {
            let n = ((x.ceil() - 1.0) / 2.0).ceil().max(0.0);
            (Some(n), n.ln())
        }
        v => (v.map(|x| x / 2.0), ln_x - std::f64::consts::LN_2),
    }
}

/// Default `g(theta) = log(1/theta) loglog(1/theta)`.
pub fn default_g(theta: f64) -> f64 {
    let l = (1.0 / theta).ln();
    l * l.ln()
}

/// `alpha = 0` variant `log(log(1/theta) / theta)`.
pub fn default_g_hat(theta: f64) -> f64 {
    ((1.0 / theta).ln() / theta).ln()
}

/// `ln|Delta| - y^2` before rounding in the `alpha = 1/2` plan.
fn half_delta_offset(y: f64) -> f64 {
    (512.0 * std::f64::consts::PI).ln() + 2.0 * (1.0 + y).ln()
}

pub fn plan_upper(alpha: f64, theta: f64, j1: f64, beta: f64, b: f64, g1_fn: &dyn Fn(f64) -> f64) -> Result<UpperBoundPlan> {
    let regime = Regime::of(alpha)?;
    if !(theta > 0.0) || !(b > 0.0 && b < 1.0) || !(j1 > 1.0) || !(beta >= 0.0) {
        return domain("plan_upper needs theta > 0, 0 < B < 1, j1 > 1, beta >= 0");
    }
    let g1 = g1_fn(theta);
    if !(g1 >= 1.0) {
        return Err(regime_error("g1 >= 1", format!("g1({theta}) = {g1}")));
    }
    let pi = std::f64::consts::PI;
    let y = 8.0 / theta;

    // Direct values where they fit, logs otherwise.
    let (delta_raw, ln_delta_raw, m_raw, ln_m_raw, ln_2n1_raw) = match regime {
        Regime::Interior => {
            let p = 2.0 / (1.0 - 2.0 * alpha);
            let base = 32.0 / (b * theta * alpha * (1.0 - alpha));
            let m = 2.0 * g1 / (2.0 / (1.0 + b)).ln();
            (base.powf(p), p * base.ln(), m, m.ln(), g1 + ((1.0 + b) / 2.0).ln())
        }
        Regime::Zero => {
            let root = 64.0 * pi.sqrt() * (1.0 / theta).ln() / (b * theta);
            let m = 2.0 * g1 / (2.0 / (1.0 + b)).ln();
            (root * root, 2.0 * root.ln(), m, m.ln(), g1 + ((1.0 + b) / 2.0).ln())
        }
        Regime::Half => {
            let ln_delta = half_delta_offset(y) + y * y;
            let ln_m = (2.0 * (2.0 * pi).sqrt()).ln() + (1.0 + y).ln() + 0.5 * y * y + g1;
            (ln_delta.exp(), ln_delta, ln_m.exp(), ln_m, 0.5 * g1.exp())
        }
    };
    let (delta, ln_delta) = ceil_direct(delta_raw, ln_delta_raw);
    let (m, ln_m) = ceil_direct(m_raw, ln_m_raw);
    let (n, ln_n) = half_width_ln(ln_2n1_raw);
    let ln_2n1 = match n {
        Some(n) => (2.0 * n + 1.0).ln(),
        None => ln_n + std::f64::consts::LN_2,
    };

    let e = e_alpha_ln(alpha, j1, ln_delta);
    let (p1_proxy, tau, berry) = match regime {
        Regime::Half => {
            // ln Phi(-y) + ln|Delta|/2 - ln 7.5 with the y^2/2 terms cancelled by hand.
            let rounding = ln_delta - ln_delta_raw;
            let margin = ln_scaled_lower_tail(y) + 0.5 * (half_delta_offset(y) + rounding) - BERRY_ESSEEN_CONSTANT.ln();
            if !(margin > 0.0) {
                return Err(regime_error(
                    "Berry-Esseen lower bound > 0",
                    format!("log-margin {margin:.6} at theta = {theta}"),
                ));
            }
            (None, None, Some(margin))
        }
        _ => {
            let proxy = 8.0 * e * pi.sqrt() / (theta * (0.5 * ln_delta).exp());
            let tau = 2.0 * e / theta;
            if !(proxy <= b) {
                return Err(regime_error(
                    "8 E sqrt(pi) / (theta sqrt|Delta|) <= B",
                    format!("proxy {proxy:.6} > B = {b} at theta = {theta}"),
                ));
            }
            if !(tau >= 1.0) {
                return Err(regime_error("tau = 2E/theta >= 1", format!("tau = {tau}")));
            }
            (Some(proxy), Some(tau), None)
        }
    };

    let ln_l_max = ln_m + ln_delta;
    let ln_diam_v = std::f64::consts::LN_2 + ln_n + ln_delta;
    let ln_gibbs = ln_2n1 - 2.0 * beta * e;
    let (probability, probability_direct) = match regime {
        Regime::Half => (-(-0.5 * g1.exp()).exp_m1(), None),
        _ => {
            let m = m.unwrap_or(f64::INFINITY);
            let direct = 1.0 - (ln_2n1 + (m - 1.0) * ((1.0 + b) / 2.0).ln()).exp();
            (1.0 - 2.0 * (-g1).exp(), Some(direct))
        }
    };
    Ok(UpperBoundPlan {
        regime,
        alpha,
        theta,
        j1,
        beta,
        b,
        g1,
        delta,
        ln_delta,
        m,
        ln_m,
        n,
        ln_n,
        l_max: finite_exp(ln_l_max),
        ln_l_max,
        diam_v: finite_exp(ln_diam_v),
        ln_diam_v,
        e_alpha: e,
        p1_proxy,
        tau,
        berry_esseen_log_margin: berry,
        covering_ok: match (m, n) {
            (Some(m), Some(n)) => m <= 2.0 * n,
            _ => ln_m <= ln_n + std::f64::consts::LN_2,
        },
        bounds: UpperBounds {
            ln_gibbs,
            gibbs: ln_gibbs.exp(),
            probability,
            probability_direct,
        },
    })
}

// ---------------------------------------------------------------------------
// Lower-bound plan

/// `min(beta zeta / 4, zeta^2 / (2^10 theta^2))`.
pub fn b_bar(beta: f64, theta: f64, alpha: f64) -> Result<f64> {
    let z = zeta(alpha)?;
    if !(theta > 0.0) || !(beta >= 0.0) {
        return domain("b_bar needs theta > 0 and beta >= 0");
    }
    Ok((beta * z / 4.0).min(z * z / (1024.0 * theta * theta)))
}

/// Inverse temperature that saturates `beta >= zeta / (2^8 theta^2)`.
pub fn beta_saturating(alpha: f64, theta: f64) -> Result<f64> {
    Ok(zeta(alpha)? / (256.0 * theta * theta))
}

/// Parameters of the contour argument bounding the shortest run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPlan {
    pub regime: Regime,
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub g2: f64,
    pub b_bar: f64,
    /// `L_min` rounded up.
    #[serde(rename = "L_min")]
    pub l_min: Option<f64>,
    /// `L_min` before rounding.
    pub l_min_raw: Option<f64>,
    pub ln_l_min_raw: f64,
    pub ln_l_min: f64,
    #[serde(rename = "V_min")]
    pub v_min: Option<f64>,
    pub ln_v_min: f64,
    /// Left side minus right side of the planning constraint at the
    /// unrounded `L_min`, relative to the right side.
    pub constraint_margin: f64,
    pub bounds: LowerBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    pub measure: f64,
    pub probability: f64,
}

/// Left side of the planning constraint at `L = exp(ln_l)`.
fn lower_constraint_lhs(regime: Regime, alpha: f64, b_bar: f64, ln_l: f64) -> f64 {
    match regime {
        Regime::Interior => b_bar / (((1.0 - 2.0 * alpha) * ln_l).exp() * (4.0 + ln_l)),
        Regime::Zero => b_bar * (4.0 + ln_l) / ln_l.exp(),
        Regime::Half => b_bar / (2.0 * (4.0 + ln_l)),
    }
}

pub const CONSTRAINT_SLACK: f64 = 1e-12;

pub fn plan_lower(alpha: f64, theta: f64, beta: f64, d: f64, g2_fn: &dyn Fn(f64) -> f64) -> Result<LowerBoundPlan> {
    let regime = Regime::of(alpha)?;
    if !(d > 1.0) {
        return domain(format!("D must exceed 1, got {d}"));
    }
    let bb = b_bar(beta, theta, alpha)?;
    let g2 = g2_fn(bb);
    if !(g2 >= 1.0) {
        return Err(regime_error("g2(b_bar) >= 1", format!("g2({bb}) = {g2}")));
    }
    let dg = d * g2;

    let (ln_l, ln_v, rhs) = match regime {
        Regime::Interior => {
            let p = 1.0 / (1.0 - 2.0 * alpha);
            let inner = 4.0 + p * bb.ln();
            if !(inner > 0.0) {
                return Err(regime_error(
                    "4 + log(b_bar^(1/(1-2 alpha))) > 0",
                    format!("b_bar = {bb}"),
                ));
            }
            let ln_l = p * (bb / dg).ln() - p * inner.ln();
            (ln_l, g2 + p * bb.ln(), dg)
        }
        Regime::Zero => {
            let x = bb / dg;
            let ln_l = x.ln() + (4.0 + x.ln()).ln();
            (ln_l, g2 + ln_l, dg)
        }
        Regime::Half => {
            let ln_l = bb / (2.0 * d) - 4.0;
            let ln_v = -(20f64.ln()) + 0.5 * bb * (1.0 - 1.0 / d) - 2.0 * g2;
            (ln_l, ln_v, d)
        }
    };
    if !(ln_l >= 0.0) {
        return Err(regime_error(
            "L_min >= 1",
            format!("unrounded L_min = {:.6e} (b_bar = {bb}, D g2 = {dg})", ln_l.exp()),
        ));
    }
    let lhs = lower_constraint_lhs(regime, alpha, bb, ln_l);
    let margin = (lhs - rhs) / rhs;
    if !(margin >= -CONSTRAINT_SLACK) {
        return Err(regime_error(
            "planning constraint at L_min",
            format!("lhs {lhs:.6e} < rhs {rhs:.6e}"),
        ));
    }

    let p2 = 2.0 / (1.0 - 2.0 * alpha);
    let decay = -(4.0 * d - 1.0) * g2;
    let (measure, probability) = match regime {
        Regime::Interior => {
            let m = 5.0 * (p2 * bb.ln() + decay).exp();
            (m, 1.0 - m)
        }
        Regime::Zero => {
            let measure = 5.0 * (bb / (8.0 * dg)).powi(2) * (4.0 + (bb / dg).ln()).powi(2) * decay.exp();
            let prob = 1.0 - 5.0 * (bb / g2).powi(2) * (4.0 + (bb / (8.0 * g2)).ln()).powi(2) * decay.exp();
            (measure, prob)
        }
        Regime::Half => ((-g2).exp(), 1.0 - (-g2).exp()),
    };
    let l_raw = finite_exp(ln_l);
    let (l_min, ln_l_min) = ceil_ln(ln_l);
    Ok(LowerBoundPlan {
        regime,
        alpha,
        theta,
        beta,
        d,
        g2,
        b_bar: bb,
        l_min,
        l_min_raw: l_raw,
        ln_l_min_raw: ln_l,
        ln_l_min,
        v_min: finite_exp(ln_v),
        ln_v_min: ln_v,
        constraint_margin: margin,
        bounds: LowerBounds { measure, probability },
    })
}

// ---------------------------------------------------------------------------
// Summary of both plans

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    pub j1: f64,
    pub zeta: f64,
    /// `g(theta)`, or `g_hat(theta)` when `alpha = 0`.
    pub g: f64,
    pub upper: UpperBoundPlan,
    pub lower: LowerBoundPlan,
    pub ln_l_min: f64,
    pub ln_l_max: f64,
    pub bracket_ok: bool,
    /// `d ln L_max / d ln(1/theta)` by a centred difference in `ln theta`.
    pub slope: Option<f64>,
    /// `2 / (1 - 2 alpha)` for `alpha < 1/2`.
    pub slope_target: Option<f64>,
    /// `alpha = 1/2`: `theta^2 ln L_min` and `theta^2 ln L_max`.
    pub c_lower: Option<f64>,
    pub c_upper: Option<f64>,
}

/// `g(theta)` used by the summary for the given `alpha`.
pub fn summary_g(alpha: f64, theta: f64) -> f64 {
    if alpha == 0.0 {
        default_g_hat(theta)
    } else {
        default_g(theta)
    }
}

/// Both plans with `B = 1/2`, `D = 2`, `g1 = g(theta)` and `g2` the
/// constant `g(theta)`.
pub fn theorem_summary(alpha: f64, theta: f64, beta: f64, j1: f64) -> Result<TheoremSummary> {
    let z = zeta(alpha)?;
    let needed = z / (256.0 * theta * theta);
    if !(beta >= needed * (1.0 - 1e-12)) {
        return Err(regime_error(
            "beta >= zeta / (2^8 theta^2)",
            format!("beta = {beta} < {needed}"),
        ));
    }
    let g = summary_g(alpha, theta);
    let upper_at = |t: f64| plan_upper(alpha, t, j1, beta, DEFAULT_B, &|s| summary_g(alpha, s));
    let upper = upper_at(theta)?;
    let lower = plan_lower(alpha, theta, beta, DEFAULT_D, &|_| g)?;

    let (slope, slope_target, c_lower, c_upper) = if alpha < 0.5 {
        let h: f64 = 0.01;
        let s = match (upper_at(theta * (-h).exp()), upper_at(theta * h.exp())) {
            (Ok(a), Ok(b)) => Some((a.ln_l_max - b.ln_l_max) / (2.0 * h)),
            _ => None,
        };
        (s, Some(2.0 / (1.0 - 2.0 * alpha)), None, None)
    } else {
        let t2 = theta * theta;
        (None, None, Some(t2 * lower.ln_l_min), Some(t2 * upper.ln_l_max))
    };
    Ok(TheoremSummary {
        alpha,
        theta,
        beta,
        j1,
        zeta: z,
        g,
        ln_l_min: lower.ln_l_min,
        ln_l_max: upper.ln_l_max,
        bracket_ok: lower.ln_l_min <= upper.ln_l_max,
        upper,
        lower,
        slope,
        slope_target,
        c_lower,
        c_upper,
    })
}
