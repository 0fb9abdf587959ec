//! Growth-law fits, crossover detection and late-time spectral analysis of
//! entanglement traces.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::entanglement::EntanglementTrace;
use crate::error::{Error, Result};
use crate::evolution::evolve;
use crate::model::SystemConfig;

/// Minimum samples for a power-law fit.
pub const MIN_FIT_POINTS: usize = 5;
/// Minimum samples in the early (power-law) segment of a crossover fit.
pub const MIN_EARLY_POINTS: usize = 3;
/// Minimum samples in the late (logarithmic) segment of a crossover fit.
pub const MIN_LATE_POINTS: usize = 5;
/// Minimum trace length for crossover detection.
pub const MIN_CROSSOVER_SAMPLES: usize = 50;
/// Minimum late-time samples for a periodogram.
pub const MIN_SPECTRUM_SAMPLES: usize = 256;
/// Candidate breakpoints evaluated between two neighbouring samples.
const BREAKPOINT_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Sum of squared residuals.
    pub sse: f64,
}

/// Ordinary least squares `y = a + b x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Usage(format!(
            "line fit needs at least two paired samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Usage("line fit needs distinct abscissae".to_string()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(LineFit {
        intercept,
        slope,
        sse,
    })
}

/// Least-squares exponent of `y ∝ t^μ` from `ln y` against `ln t`.
pub fn fit_power_law_series(t: &[f64], y: &[f64]) -> Result<LineFit> {
    if t.len() < MIN_FIT_POINTS {
        return Err(Error::Usage(format!(
            "power-law window has {} points, need at least {MIN_FIT_POINTS}",
            t.len()
        )));
    }
    if t.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Usage(
            "power-law fit needs strictly positive times and values".to_string(),
        ));
    }
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lt, &ly)
}

/// Inclusive kick window `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Window { start, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// Samples of `(t, y)` with `t` inside `window`.
pub fn select(t: &[f64], y: &[f64], window: Window) -> (Vec<f64>, Vec<f64>) {
    t.iter()
        .zip(y)
        .filter(|(&a, _)| window.contains(a))
        .map(|(&a, &b)| (a, b))
        .unzip()
}

/// Growth exponent of `S_vN` over `window`.
pub fn fit_power_law(trace: &EntanglementTrace, window: Window) -> Result<f64> {
    let (t, s) = select(&trace.times(), &trace.s_vn(), window);
    Ok(fit_power_law_series(&t, &s)?.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverFit {
    /// Breakpoint between the two growth laws, in kicks.
    pub t_star: f64,
    /// Early exponent of `S ≈ c t^μ`.
    pub mu: f64,
    /// `ln c` of the early power law.
    pub log_prefactor: f64,
    /// `(a, b)` of the late model `a + b ln t`.
    pub log_coeffs: (f64, f64),
    /// Model value at the breakpoint.
    pub s_star: f64,
    /// Total squared residual of the two-segment model.
    pub residual: f64,
    /// Fitted time window.
    pub window: Window,
}

impl CrossoverFit {
    pub fn model(&self, t: f64) -> f64 {
        if t < self.t_star {
            (self.log_prefactor + self.mu * t.ln()).exp()
        } else {
            self.log_coeffs.0 + self.log_coeffs.1 * t.ln()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Crossover {
    Found(CrossoverFit),
    /// The residual has no interior minimum: one growth law describes the
    /// whole window at least as well as any split.
    NoCrossover { residual: f64 },
}

impl Crossover {
    pub fn fit(&self) -> Option<&CrossoverFit> {
        match self {
            Crossover::Found(fit) => Some(fit),
            Crossover::NoCrossover { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverOptions {
    /// First kick included in the fit.
    pub t_min: f64,
}

impl Default for CrossoverOptions {
    fn default() -> Self {
        CrossoverOptions { t_min: 1.0 }
    }
}

/// Suffix sums for the one-parameter late fit.
struct Suffix {
    n: Vec<f64>,
    lt: Vec<f64>,
    lt2: Vec<f64>,
    s: Vec<f64>,
    s2: Vec<f64>,
    lts: Vec<f64>,
}

impl Suffix {
    fn new(lt: &[f64], s: &[f64]) -> Self {
        let m = lt.len();
        let mut out = Suffix {
            n: vec![0.0; m + 1],
            lt: vec![0.0; m + 1],
            lt2: vec![0.0; m + 1],
            s: vec![0.0; m + 1],
            s2: vec![0.0; m + 1],
            lts: vec![0.0; m + 1],
        };
        for i in (0..m).rev() {
            out.n[i] = out.n[i + 1] + 1.0;
            out.lt[i] = out.lt[i + 1] + lt[i];
            out.lt2[i] = out.lt2[i + 1] + lt[i] * lt[i];
            out.s[i] = out.s[i + 1] + s[i];
            out.s2[i] = out.s2[i + 1] + s[i] * s[i];
            out.lts[i] = out.lts[i + 1] + lt[i] * s[i];
        }
        out
    }

    /// Best `b` and residual of `S = s0 + b (ln t − l0)` over samples `k..`.
    fn anchored_fit(&self, k: usize, l0: f64, s0: f64) -> (f64, f64) {
        let n = self.n[k];
        let suu = self.lt2[k] - 2.0 * l0 * self.lt[k] + n * l0 * l0;
        let suy = self.lts[k] - l0 * self.s[k] - s0 * self.lt[k] + n * l0 * s0;
        let syy = self.s2[k] - 2.0 * s0 * self.s[k] + n * s0 * s0;
        if suu <= 0.0 {
            return (0.0, syy.max(0.0));
        }
        let b = suy / suu;
        (b, (syy - b * suy).max(0.0))
    }
}

/// Continuous two-segment fit: `S = c t^μ` up to `t*`, then
/// `S = c t*^μ + b ln(t/t*)`.
///
/// The power law is fitted in log-log space on the samples before the
/// breakpoint; the logarithmic segment is anchored to the power law's value
/// at `t*`. Residuals of both segments are measured on `S` itself. The
/// breakpoint is scanned on a sub-kick grid between neighbouring samples and
/// the one with the smallest total residual wins.
pub fn detect_crossover_series(t: &[f64], s: &[f64], opts: CrossoverOptions) -> Result<Crossover> {
    let (t, s): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(s)
        .filter(|(&a, _)| a >= opts.t_min)
        .map(|(&a, &b)| (a, b))
        .unzip();
    if t.len() < MIN_CROSSOVER_SAMPLES {
        return Err(Error::Usage(format!(
            "crossover detection needs at least {MIN_CROSSOVER_SAMPLES} samples, got {}",
            t.len()
        )));
    }
    if s.iter().any(|&v| !(v > 0.0)) || t.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Usage(
            "crossover detection needs positive times and values".to_string(),
        ));
    }
    let m = t.len();
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ls: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let suffix = Suffix::new(&lt, &s);

    // Single power law over everything, the no-split reference.
    let whole = fit_line(&lt, &ls)?;
    let whole_sse: f64 = (0..m)
        .map(|i| (s[i] - (whole.intercept + whole.slope * lt[i]).exp()).powi(2))
        .sum();

    let last_split = m - MIN_LATE_POINTS;
    let mut best: Option<(f64, usize, f64, LineFit, f64)> = None;
    for k in MIN_EARLY_POINTS..=last_split {
        let early = fit_line(&lt[..k], &ls[..k])?;
        let early_sse: f64 = (0..k)
            .map(|i| (s[i] - (early.intercept + early.slope * lt[i]).exp()).powi(2))
            .sum();
        let (lo, hi) = (t[k - 1], t[k]);
        for sub in 0..=BREAKPOINT_SUBSTEPS {
            let tau = lo + (hi - lo) * sub as f64 / BREAKPOINT_SUBSTEPS as f64;
            let l0 = tau.ln();
            let s0 = (early.intercept + early.slope * l0).exp();
            let (b, late_sse) = suffix.anchored_fit(k, l0, s0);
            let total = early_sse + late_sse;
            if best.as_ref().map_or(true, |(r, ..)| total < *r) {
                best = Some((total, k, tau, early, b));
            }
        }
    }
    let (residual, k, tau, early, b) = best.expect("at least one split is scanned");
    if k == last_split || whole_sse <= residual {
        return Ok(Crossover::NoCrossover {
            residual: whole_sse.min(residual),
        });
    }
    let s_star = (early.intercept + early.slope * tau.ln()).exp();
    Ok(Crossover::Found(CrossoverFit {
        t_star: tau,
        mu: early.slope,
        log_prefactor: early.intercept,
        log_coeffs: (s_star - b * tau.ln(), b),
        s_star,
        residual,
        window: Window::new(t[0], t[m - 1]),
    }))
}

pub fn detect_crossover(trace: &EntanglementTrace) -> Result<Crossover> {
    detect_crossover_series(&trace.times(), &trace.s_vn(), CrossoverOptions::default())
}

/// Slope of `ln t*` against `ln K`.
pub fn scaling_exponent(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 4 {
        return Err(Error::Usage(format!(
            "scaling exponent needs at least 4 (K, t*) pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(k, t)| !(k > 0.0) || !(t > 0.0)) {
        return Err(Error::Usage("scaling pairs must be positive".to_string()));
    }
    let lk: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let lt: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    Ok(fit_line(&lk, &lt)?.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DominantFrequency {
    Peak {
        /// Cycles per kick.
        nu: f64,
        /// Periodogram value at the peak bin.
        power: f64,
        /// Number of samples in the analysed window.
        samples: usize,
    },
    NoPeak,
}

impl DominantFrequency {
    /// Peak frequency, with `NoPeak` read as zero.
    pub fn nu_or_zero(&self) -> f64 {
        match self {
            DominantFrequency::Peak { nu, .. } => *nu,
            DominantFrequency::NoPeak => 0.0,
        }
    }
}

/// Residual of `y` after removing the least-squares `a + b ln t` trend.
pub fn log_detrend(t: &[f64], y: &[f64]) -> Result<(LineFit, Vec<f64>)> {
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&lt, y)?;
    let resid = lt
        .iter()
        .zip(y)
        .map(|(l, v)| v - fit.intercept - fit.slope * l)
        .collect();
    Ok((fit, resid))
}

/// Root-mean-square of the log-detrended signal after `t_min`.
pub fn oscillation_amplitude(t: &[f64], y: &[f64], t_min: f64) -> Result<f64> {
    let (t, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(&a, _)| a > t_min)
        .map(|(&a, &b)| (a, b))
        .unzip();
    let (_, resid) = log_detrend(&t, &y)?;
    Ok((resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64).sqrt())
}

/// Dominant frequency of the samples with `t > t_min`.
///
/// The `a + b ln t` trend is subtracted, a Hann taper applied, and the
/// periodogram evaluated at `k/M` cycles per kick for `k = 1..M/2`. The
/// peak bin is refined by a parabola through the log-power of its
/// neighbours.
pub fn dominant_frequency_series(t: &[f64], y: &[f64], t_min: f64) -> Result<DominantFrequency> {
    let (t, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(&a, _)| a > t_min)
        .map(|(&a, &b)| (a, b))
        .unzip();
    let m = t.len();
    if m < MIN_SPECTRUM_SAMPLES {
        return Err(Error::Usage(format!(
            "periodogram needs at least {MIN_SPECTRUM_SAMPLES} samples after t = {t_min}, got {m}"
        )));
    }
    let (_, resid) = log_detrend(&t, &y)?;
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if resid.iter().all(|r| r.abs() <= 1e-13 * scale) {
        return Ok(DominantFrequency::NoPeak);
    }

    let mut buf: Vec<Complex64> = resid
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let w = 0.5 - 0.5 * (2.0 * PI * j as f64 / (m - 1) as f64).cos();
            Complex64::new(r * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2;
    let power: Vec<f64> = buf[..=half].iter().map(|c| c.norm_sqr()).collect();

    let (peak, &peak_power) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("periodogram has non-DC bins");
    if !(peak_power > 0.0) {
        return Ok(DominantFrequency::NoPeak);
    }
    let mut bin = peak as f64;
    if peak > 1 && peak < half && power[peak - 1] > 0.0 && power[peak + 1] > 0.0 {
        let (a, b, c) = (power[peak - 1].ln(), peak_power.ln(), power[peak + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            bin += 0.5 * (a - c) / denom;
        }
    }
    Ok(DominantFrequency::Peak {
        nu: bin / m as f64,
        power: peak_power,
        samples: m,
    })
}

pub fn dominant_frequency(trace: &EntanglementTrace, t_min: f64) -> Result<DominantFrequency> {
    dominant_frequency_series(&trace.times(), &trace.s_vn(), t_min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonancePoint {
    pub detuning: f64,
    pub nu: f64,
    pub peak: DominantFrequency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceCurve {
    /// Sorted by detuning.
    pub samples: Vec<ResonancePoint>,
    /// `ν` at zero detuning.
    pub peak_nu: f64,
    /// Crossover of the resonant run; spectra use `t > t_min`.
    pub t_min: f64,
    /// First positive detuning where `ν` drops below `peak_nu / 2`.
    pub half_width_eps: Option<f64>,
    /// `ℏ_s / Δℏ_s` with `Δℏ_s = |ℏ_s − ℏ_s(half_width_eps)|`.
    pub q_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ResonanceScanOptions {
    /// Start of the late-time window; taken from the crossover of the
    /// resonant run when unset.
    pub t_min: Option<f64>,
    /// Worker threads; `0` uses the global pool.
    pub workers: usize,
}

pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// One evolution per detuning; `ν(ε)` from the late-time periodogram.
pub fn build_resonance_curve(
    config: &SystemConfig,
    eps_list: &[f64],
    opts: ResonanceScanOptions,
) -> Result<ResonanceCurve> {
    if eps_list.is_empty() {
        return Err(Error::Usage("detuning list is empty".to_string()));
    }
    if eps_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Usage("detuning list must be strictly increasing".to_string()));
    }
    if !eps_list.contains(&0.0) {
        return Err(Error::Usage(
            "detuning list must contain 0 as the resonant reference".to_string(),
        ));
    }

    let traces: Vec<Result<EntanglementTrace>> = with_workers(opts.workers, || {
        eps_list
            .par_iter()
            .map(|&eps| {
                let mut run = config.clone();
                run.resonance.detuning = eps;
                evolve(&run, &mut []).map_err(|e| Error::AtDetuning {
                    detuning: eps,
                    source: Box::new(e),
                })
            })
            .collect()
    })?;
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;

    let zero = eps_list.iter().position(|&e| e == 0.0).expect("checked above");
    let t_min = match opts.t_min {
        Some(t) => t,
        None => match detect_crossover(&traces[zero])? {
            Crossover::Found(fit) => fit.t_star,
            Crossover::NoCrossover { .. } => {
                return Err(Error::Usage(
                    "resonant run shows no crossover; pass an explicit t_min".to_string(),
                ))
            }
        },
    };

    let mut samples = Vec::with_capacity(eps_list.len());
    for (&eps, trace) in eps_list.iter().zip(&traces) {
        let peak = dominant_frequency(trace, t_min).map_err(|e| Error::AtDetuning {
            detuning: eps,
            source: Box::new(e),
        })?;
        samples.push(ResonancePoint {
            detuning: eps,
            nu: peak.nu_or_zero(),
            peak,
        });
    }
    let peak_nu = samples[zero].nu;
    let half_width_eps = samples
        .iter()
        .filter(|p| p.detuning > 0.0)
        .find(|p| p.nu < peak_nu / 2.0)
        .map(|p| p.detuning);
    let q_factor = half_width_eps.map(|w| {
        let res = config.resonance;
        let h0 = res.nominal_planck();
        let hw = 4.0 * PI * res.r as f64 / (res.s as f64 * (res.period + w));
        h0 / (h0 - hw).abs()
    });
    Ok(ResonanceCurve {
        samples,
        peak_nu,
        t_min,
        half_width_eps,
        q_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        (1..=n).map(|v| v as f64).collect()
    }

    #[test]
    fn exact_power_laws() {
        let t = grid(40);
        let quad: Vec<f64> = t.iter().map(|v| v * v).collect();
        assert!((fit_power_law_series(&t, &quad).unwrap().slope - 2.0).abs() < 1e-10);
        let lin: Vec<f64> = t.iter().map(|v| 3.5 * v).collect();
        assert!((fit_power_law_series(&t, &lin).unwrap().slope - 1.0).abs() < 1e-10);
    }

    #[test]
    fn short_window_is_rejected() {
        let t = grid(4);
        assert!(matches!(fit_power_law_series(&t, &t), Err(Error::Usage(_))));
    }

    fn splice(t_star: f64, n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (1..=n).map(|v| v as f64 * scale).collect();
        let s = t
            .iter()
            .map(|&v| {
                if v < t_star {
                    v.powf(1.6)
                } else {
                    t_star.powf(1.6) + 40.0 * (v / t_star).ln()
                }
            })
            .collect();
        (t, s)
    }

    #[test]
    fn constructed_breakpoint() {
        let (t, s) = splice(100.0, 600, 1.0);
        let fit = detect_crossover_series(&t, &s, CrossoverOptions::default()).unwrap();
        let fit = fit.fit().expect("crossover");
        assert!((fit.t_star - 100.0).abs() <= 10.0, "{}", fit.t_star);
        assert!((fit.mu - 1.6).abs() < 1e-6);
        assert!((fit.log_coeffs.1 - 40.0).abs() < 1e-6);
    }

    #[test]
    fn crossover_scales_with_time() {
        for &c in &[0.5, 2.0, 3.0] {
            let (t, s) = splice(100.0 * c, 600, c);
            let opts = CrossoverOptions { t_min: c };
            let fit = detect_crossover_series(&t, &s, opts).unwrap();
            let t_star = fit.fit().unwrap().t_star;
            assert!((t_star / c - 100.0).abs() < 1.0, "c = {c}: {t_star}");
        }
    }

    #[test]
    fn pure_power_law_has_no_crossover() {
        let t = grid(300);
        let s: Vec<f64> = t.iter().map(|v| 0.01 * v.powf(1.6)).collect();
        let out = detect_crossover_series(&t, &s, CrossoverOptions::default()).unwrap();
        assert!(matches!(out, Crossover::NoCrossover { .. }), "{out:?}");
    }

    #[test]
    fn crossover_needs_fifty_samples() {
        let t = grid(30);
        assert!(matches!(
            detect_crossover_series(&t, &t, CrossoverOptions::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn scaling_exponents() {
        let ks = [0.0125, 0.025, 0.05, 0.1, 0.2];
        let inv: Vec<(f64, f64)> = ks.iter().map(|&k| (k, 0.6 / k)).collect();
        assert!((scaling_exponent(&inv).unwrap() + 1.0).abs() < 1e-12);
        let inv2: Vec<(f64, f64)> = ks.iter().map(|&k| (k, 0.6 / (k * k))).collect();
        assert!((scaling_exponent(&inv2).unwrap() + 2.0).abs() < 1e-12);
        assert!(matches!(scaling_exponent(&inv[..1]), Err(Error::Usage(_))));
    }

    #[test]
    fn decaying_tone_on_log_trend() {
        let t: Vec<f64> = (1..=1200).map(f64::from).collect();
        let s: Vec<f64> = t
            .iter()
            .map(|&v| 0.2 + 0.7 * v.ln() + (2.0 * PI * 0.033 * v).sin() / v.powf(0.3))
            .collect();
        let nu = dominant_frequency_series(&t, &s, 100.0).unwrap().nu_or_zero();
        assert!((nu - 0.033).abs() < 0.002, "{nu}");
    }

    #[test]
    fn flat_signal_has_no_peak() {
        let t: Vec<f64> = (1..=400).map(f64::from).collect();
        let s: Vec<f64> = t.iter().map(|v| 1.0 + 0.5 * v.ln()).collect();
        assert_eq!(dominant_frequency_series(&t, &s, 10.0).unwrap(), DominantFrequency::NoPeak);
    }

    #[test]
    fn spectrum_needs_samples() {
        let t: Vec<f64> = (1..=300).map(f64::from).collect();
        assert!(matches!(
            dominant_frequency_series(&t, &t, 100.0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn resonance_list_checks() {
        let config = SystemConfig::reference_two_rotor();
        let opts = ResonanceScanOptions::default();
        assert!(matches!(build_resonance_curve(&config, &[], opts), Err(Error::Usage(_))));
        assert!(matches!(
            build_resonance_curve(&config, &[1e-5, 2e-5], opts),
            Err(Error::Usage(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn power_law_exponent_recovered(mu in 0.5f64..3.0, c in 0.01f64..10.0) {
            let t = grid(60);
            let y: Vec<f64> = t.iter().map(|v| c * v.powf(mu)).collect();
            prop_assert!((fit_power_law_series(&t, &y).unwrap().slope - mu).abs() < 1e-10);
        }

        #[test]
        fn sinusoid_frequency_recovered(f in 0.01f64..0.49, phase in 0.0f64..6.28, m in 256usize..1024) {
            let t: Vec<f64> = (1..=m + 1).map(|v| v as f64).collect();
            let y: Vec<f64> = t.iter().map(|v| (2.0 * PI * f * v + phase).sin()).collect();
            let nu = dominant_frequency_series(&t, &y, 1.0).unwrap().nu_or_zero();
            let bin = 1.0 / m as f64;
            prop_assert!((nu - f).abs() <= 1.1 * bin, "f = {}, nu = {}, bin = {}", f, nu, bin);
        }
    }
}
