use serde::{Deserialize, Serialize};

use super::function::validate_sign_function;
use super::generator::ReducedGenerator;
use crate::error::{Error, Result};
use crate::expm::{expmv, KrylovOptions, LinearOperator};
use crate::model::StabilizerModel;

/// `per_decade` geometrically spaced times from `t_min` to `t_max` inclusive.
pub fn geometric_grid(t_min: f64, t_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0) || !(t_max >= t_min) || !t_max.is_finite() || per_decade == 0 {
        return Err(Error::domain(format!(
            "time grid needs 0 < t_min <= t_max and per_decade > 0, got {t_min}, {t_max}, {per_decade}"
        )));
    }
    let decades = (t_max / t_min).log10();
    let steps = (decades * per_decade as f64).round() as usize;
    if steps == 0 {
        return Ok(vec![t_min]);
    }
    Ok((0..=steps)
        .map(|k| t_min * 10f64.powf(decades * k as f64 / steps as f64))
        .collect())
}

/// `Σ_η π(η) F(η) (e^{tA}F)(η)` at each time, for any rate operator `A`.
pub fn autocorrelation_with<A>(
    op: &A,
    pi: &[f64],
    f: &[f64],
    times: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<f64>>
where
    A: LinearOperator<f64> + Sync + ?Sized,
{
    if f.len() != op.dim() || pi.len() != op.dim() {
        return Err(Error::InvalidFunction(format!(
            "function has {} values, space has {}",
            f.len(),
            op.dim()
        )));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out = vec![0.0; times.len()];
    let mut current = f.to_vec();
    let mut t_now = 0.0;
    for i in order {
        let t = times[i];
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("time must be finite and non-negative, got {t}")));
        }
        current = expmv(op, t - t_now, &current, opts)?.0;
        t_now = t;
        out[i] = pi.iter().zip(f).zip(&current).map(|((p, a), b)| p * a * b).sum();
    }
    Ok(out)
}

/// `⟨Q̃(t), Q̃⟩_β` for `Q̃ = Q F`, which reduces to the Gibbs average of
/// `F · e^{tL̃_Q}(F)` over syndromes.
pub fn autocorrelation(
    g: &ReducedGenerator,
    m: &StabilizerModel,
    f: &[f64],
    times: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<f64>> {
    validate_sign_function(f)?;
    let pi = g.space().gibbs_weights(m, g.beta())?;
    autocorrelation_with(g, &pi, f, times, opts)
}

/// `‖e^{(t/2) L̃_Q}(F)‖²_π`, equal to the autocorrelation at `t` when `L̃_Q`
/// is self-adjoint in `L²(π)`.
pub fn half_time_norm(
    g: &ReducedGenerator,
    m: &StabilizerModel,
    f: &[f64],
    t: f64,
    opts: &KrylovOptions,
) -> Result<f64> {
    validate_sign_function(f)?;
    let pi = g.space().gibbs_weights(m, g.beta())?;
    let half = expmv(g, t / 2.0, f, opts)?.0;
    Ok(pi.iter().zip(&half).map(|(p, v)| p * v * v).sum())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitQuality {
    Good,
    /// Fewer than three points inside the fit window.
    FewPoints,
    /// Log residuals too large for a single exponential.
    NonExponential,
    /// The curve never left the window from above (no measurable decay), or
    /// never entered it.
    NoDecay,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LifetimeFit {
    /// `τ = −1/slope` of `log C(t)`; infinite without decay, NaN if unfittable.
    pub tau: f64,
    pub slope: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub n_points: usize,
    /// RMS residual of `log C` over the window.
    pub residual: f64,
    pub quality: FitQuality,
}

/// Values of `C` used for the fit.
pub const FIT_WINDOW: [f64; 2] = [0.1, 0.8];
const RESIDUAL_LIMIT: f64 = 0.05;

/// Least-squares fit of `log C(t) = a − t/τ` over the points with
/// `C ∈ [0.1, 0.8]`.
pub fn fit_lifetime(times: &[f64], values: &[f64]) -> LifetimeFit {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| (FIT_WINDOW[0]..=FIT_WINDOW[1]).contains(&v))
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    let decayed = values.iter().any(|&v| v < FIT_WINDOW[1]);
    fit_points(&pts, decayed)
}

/// Same fit restricted to the points with `t` in a given time window, e.g. a
/// window chosen on a pooled curve and reused for its sub-samples.
pub fn fit_lifetime_on(times: &[f64], values: &[f64], window: [f64; 2]) -> LifetimeFit {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| (window[0]..=window[1]).contains(&t) && v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    fit_points(&pts, true)
}

fn fit_points(pts: &[(f64, f64)], decayed: bool) -> LifetimeFit {
    if pts.len() < 2 {
        return LifetimeFit {
            tau: if decayed { f64::NAN } else { f64::INFINITY },
            slope: f64::NAN,
            intercept: f64::NAN,
            window: [f64::NAN, f64::NAN],
            n_points: pts.len(),
            residual: f64::NAN,
            quality: if decayed { FitQuality::FewPoints } else { FitQuality::NoDecay },
        };
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let quality = if !(slope < 0.0) {
        FitQuality::NoDecay
    } else if pts.len() < 3 {
        FitQuality::FewPoints
    } else if residual > RESIDUAL_LIMIT {
        FitQuality::NonExponential
    } else {
        FitQuality::Good
    };
    LifetimeFit {
        tau: if slope < 0.0 { -1.0 / slope } else { f64::INFINITY },
        slope,
        intercept,
        window: [pts[0].0, pts[pts.len() - 1].0],
        n_points: pts.len(),
        residual,
        quality,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeOptions {
    pub per_decade: usize,
    /// First time point; default `10⁻³` over the largest exit rate.
    pub t_start: Option<f64>,
    pub t_max: f64,
    /// Stop once the curve drops below this value.
    pub stop_below: f64,
}

impl Default for LifetimeOptions {
    fn default() -> Self {
        LifetimeOptions {
            per_decade: 20,
            t_start: None,
            t_max: 1e9,
            stop_below: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LifetimeResult {
    pub fit: LifetimeFit,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Autocorrelation on an open-ended geometric grid followed by
/// [`fit_lifetime`].
pub fn lifetime(
    g: &ReducedGenerator,
    m: &StabilizerModel,
    f: &[f64],
    opts: &LifetimeOptions,
    krylov: &KrylovOptions,
) -> Result<LifetimeResult> {
    validate_sign_function(f)?;
    if opts.per_decade == 0 || !(opts.t_max > 0.0) {
        return Err(Error::domain("lifetime grid needs per_decade > 0 and t_max > 0"));
    }
    let pi = g.space().gibbs_weights(m, g.beta())?;
    let t0 = match opts.t_start {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::domain(format!("t_start must be positive, got {t}"))),
        None => 2e-3 / g.norm_bound().max(f64::MIN_POSITIVE),
    };
    let ratio = 10f64.powf(1.0 / opts.per_decade as f64);
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut current = f.to_vec();
    let mut t_now = 0.0;
    let mut t = t0;
    while t <= opts.t_max {
        current = expmv(g, t - t_now, &current, krylov)?.0;
        t_now = t;
        let c: f64 = pi.iter().zip(f).zip(&current).map(|((p, a), b)| p * a * b).sum();
        times.push(t);
        values.push(c);
        if c < opts.stop_below {
            break;
        }
        t *= ratio;
    }
    Ok(LifetimeResult {
        fit: fit_lifetime(&times, &values),
        times,
        values,
    })
}
