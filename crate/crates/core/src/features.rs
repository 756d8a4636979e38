//! Spectral features: extrema, widths, the polariton/DIT/polariton triple,
//! pump-rate fitting and cross-method comparison.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iof::{iof_spectrum, Port};
use crate::operators::SystemParams;
use crate::spectra::{ipm_transmission, Channel, FrequencyGrid, Normalization, Spectrum};

/// Minimum prominence, relative to the spectrum range, for a reported feature.
pub const DEFAULT_PROMINENCE_FLOOR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Peak,
    Dip,
}

impl FeatureKind {
    pub fn opposite(self) -> Self {
        match self {
            FeatureKind::Peak => FeatureKind::Dip,
            FeatureKind::Dip => FeatureKind::Peak,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Peak => "peak",
            FeatureKind::Dip => "dip",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    /// Offset of the extremum, refined below the grid step.
    pub position: f64,
    /// Sampled value at the extremum.
    pub value: f64,
    /// Width at half height (peaks) or half depth (dips); `None` when the
    /// level is not crossed inside the grid.
    pub fwhm: Option<f64>,
    pub prominence: f64,
    /// Grid index of the extremum sample.
    #[serde(skip)]
    pub index: usize,
}

/// Raw extremum before filtering: (kind, first and last index of the plateau).
struct Extremum {
    kind: FeatureKind,
    start: usize,
    end: usize,
}

fn raw_extrema(y: &[f64]) -> Vec<Extremum> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        let (before, after) = (y[i - 1], y[j + 1]);
        if y[i] > before && y[i] > after {
            out.push(Extremum { kind: FeatureKind::Peak, start: i, end: j });
        } else if y[i] < before && y[i] < after {
            out.push(Extremum { kind: FeatureKind::Dip, start: i, end: j });
        }
        i = j + 1;
    }
    out
}

/// Topographic prominence of the peak at `i` of `y` (sign-flipped for dips).
fn prominence(y: &[f64], i: usize, sign: f64) -> f64 {
    let h = sign * y[i];
    let mut left_min = h;
    for k in (0..i).rev() {
        let v = sign * y[k];
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &yk in &y[i + 1..] {
        let v = sign * yk;
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Vertex of the parabola through three samples, clamped to their span.
fn parabolic_vertex(w: &[f64], y: &[f64], i: usize) -> f64 {
    let (x0, x1, x2) = (w[i - 1], w[i], w[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature == 0.0 || !curvature.is_finite() {
        return x1;
    }
    // y = y1 + d01 (x − x1) + c (x − x0)(x − x1)
    let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    vertex.clamp(x0, x2)
}

/// Offset where `y` first crosses `level` walking from `i` in direction `step`.
fn crossing(w: &[f64], y: &[f64], i: usize, level: f64, step: isize) -> Option<f64> {
    let side = y[i] - level;
    let mut j = i as isize;
    loop {
        let k = j + step;
        if k < 0 || k as usize >= y.len() {
            return None;
        }
        let (ju, ku) = (j as usize, k as usize);
        if (y[ku] - level) * side <= 0.0 {
            let t = (level - y[ju]) / (y[ku] - y[ju]);
            return Some(w[ju] + t * (w[ku] - w[ju]));
        }
        j = k;
    }
}

fn width_at(w: &[f64], y: &[f64], i: usize, level: f64) -> Option<f64> {
    let left = crossing(w, y, i, level, -1)?;
    let right = crossing(w, y, i, level, 1)?;
    Some(right - left)
}

pub fn extract_features(s: &Spectrum) -> Vec<SpectralFeature> {
    extract_features_with_floor(s, DEFAULT_PROMINENCE_FLOOR)
}

/// Strict interior extrema with prominence at least `floor` times the
/// spectrum range, in grid order.
pub fn extract_features_with_floor(s: &Spectrum, floor: f64) -> Vec<SpectralFeature> {
    let w = s.grid.offsets();
    let y = &s.values;
    if y.len() < 5 {
        return Vec::new();
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Vec::new();
    }
    let threshold = floor * range;

    let mut features: Vec<SpectralFeature> = raw_extrema(y)
        .into_iter()
        .filter_map(|e| {
            let i = (e.start + e.end) / 2;
            let sign = if e.kind == FeatureKind::Peak { 1.0 } else { -1.0 };
            let p = prominence(y, i, sign);
            if p < threshold {
                return None;
            }
            let position = if e.start == e.end {
                parabolic_vertex(w, y, i)
            } else {
                0.5 * (w[e.start] + w[e.end])
            };
            Some(SpectralFeature {
                kind: e.kind,
                position,
                value: y[i],
                fwhm: None,
                prominence: p,
                index: i,
            })
        })
        .collect();

    for k in 0..features.len() {
        let f = features[k];
        let level = match f.kind {
            FeatureKind::Peak => 0.5 * f.value,
            FeatureKind::Dip => {
                let left = features[..k]
                    .iter()
                    .rev()
                    .find(|o| o.kind == FeatureKind::Peak)
                    .map(|o| o.value)
                    .unwrap_or_else(|| y[..f.index].iter().copied().fold(f64::NEG_INFINITY, f64::max));
                let right = features[k + 1..]
                    .iter()
                    .find(|o| o.kind == FeatureKind::Peak)
                    .map(|o| o.value)
                    .unwrap_or_else(|| y[f.index + 1..].iter().copied().fold(f64::NEG_INFINITY, f64::max));
                0.5 * (f.value + left.min(right))
            }
        };
        features[k].fwhm = width_at(w, y, f.index, level);
    }
    features
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DitMetrics {
    pub dit: SpectralFeature,
    pub left_polariton: SpectralFeature,
    pub right_polariton: SpectralFeature,
    pub splitting: f64,
}

fn flanks(features: &[SpectralFeature], kind: FeatureKind, center: f64) -> Option<(SpectralFeature, SpectralFeature)> {
    let strongest = |pred: &dyn Fn(&SpectralFeature) -> bool| {
        features
            .iter()
            .filter(|f| f.kind == kind && pred(f))
            .copied()
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    };
    let left = strongest(&|f| f.position < center)?;
    let right = strongest(&|f| f.position > center)?;
    Some((left, right))
}

/// Locates the two polariton features and the DIT feature between them.
///
/// The polaritons are the most prominent features of one kind on either side
/// of the prominence-weighted center; the kind whose weaker flank is more
/// prominent wins. The DIT is the most prominent opposite-kind feature
/// between them.
pub fn dit_metrics(s: &Spectrum) -> Result<DitMetrics> {
    if s.params.g == 0.0 {
        return Err(Error::NoDitStructure("no dot coupling".into()));
    }
    let features = extract_features(s);
    if features.len() < 3 {
        return Err(Error::NoDitStructure(format!("{} features", features.len())));
    }
    let total: f64 = features.iter().map(|f| f.prominence).sum();
    let center = features.iter().map(|f| f.prominence * f.position).sum::<f64>() / total;

    let candidates = [FeatureKind::Peak, FeatureKind::Dip]
        .into_iter()
        .filter_map(|kind| flanks(&features, kind, center).map(|(l, r)| (kind, l, r)))
        .max_by(|a, b| a.1.prominence.min(a.2.prominence).total_cmp(&b.1.prominence.min(b.2.prominence)));
    let Some((kind, left, right)) = candidates else {
        return Err(Error::NoDitStructure("no feature pair straddles the center".into()));
    };
    let dit = features
        .iter()
        .filter(|f| f.kind == kind.opposite() && f.position > left.position && f.position < right.position)
        .copied()
        .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
        .ok_or_else(|| Error::NoDitStructure(format!("no {} between the polaritons", kind.opposite())))?;
    Ok(DitMetrics {
        dit,
        left_polariton: left,
        right_polariton: right,
        splitting: right.position - left.position,
    })
}

/// g² > (κ − γ)²/16.
pub fn strong_coupling_check(params: &SystemParams) -> bool {
    let d = params.kappa_me() - params.gamma;
    params.g * params.g > d * d / 16.0
}

/// Approximate polariton linewidths `(2Γ + 2(g/δ)²γ, 2γ + 2(g/δ)²Γ)` for a
/// detuned system.
pub fn predicted_linewidths(params: &SystemParams) -> Result<(f64, f64)> {
    if params.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let r = (params.g / params.delta).powi(2);
    let big = params.gamma_total();
    Ok((2.0 * big + 2.0 * r * params.gamma, 2.0 * params.gamma + 2.0 * r * big))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitCandidate {
    pub pump: f64,
    /// Squared relative errors of DIT value and FWHM; infinite when the
    /// candidate spectrum has no usable DIT.
    pub objective: f64,
    pub dit_value: Option<f64>,
    pub dit_fwhm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpFit {
    pub best: f64,
    pub reference_value: f64,
    pub reference_fwhm: f64,
    pub table: Vec<FitCandidate>,
}

fn dit_value_and_width(s: &Spectrum) -> Result<(f64, f64)> {
    let m = dit_metrics(s)?;
    let fwhm = m
        .dit
        .fwhm
        .ok_or_else(|| Error::NoDitStructure("DIT width not bracketed on the grid".into()))?;
    Ok((m.dit.value, fwhm))
}

/// Fits the pump by matching the DIT value and width of `model(P)` against
/// `reference`, with equal weights on the two squared relative errors.
pub fn fit_pump_rate_with<F>(reference: &Spectrum, candidates: &[f64], model: F) -> Result<PumpFit>
where
    F: Fn(f64) -> Result<Spectrum> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::InvalidParams {
            field: "candidates",
            reason: "empty candidate list".into(),
        });
    }
    let (ref_value, ref_fwhm) = dit_value_and_width(reference)?;
    let table = candidates
        .par_iter()
        .map(|&pump| {
            let spectrum = model(pump)?;
            match dit_value_and_width(&spectrum) {
                Ok((v, f)) => Ok(FitCandidate {
                    pump,
                    objective: ((v - ref_value) / ref_value).powi(2) + ((f - ref_fwhm) / ref_fwhm).powi(2),
                    dit_value: Some(v),
                    dit_fwhm: Some(f),
                }),
                Err(Error::NoDitStructure(_)) => Ok(FitCandidate {
                    pump,
                    objective: f64::INFINITY,
                    dit_value: None,
                    dit_fwhm: None,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let best = table
        .iter()
        .filter(|c| c.objective.is_finite())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .ok_or_else(|| Error::NoDitStructure("no candidate produced a DIT feature".into()))?
        .pump;
    Ok(PumpFit {
        best,
        reference_value: ref_value,
        reference_fwhm: ref_fwhm,
        table,
    })
}

/// Chooses the pump rate whose IPM spectrum best reproduces the IOF DIT.
pub fn fit_pump_rate(
    params: &SystemParams,
    grid: &FrequencyGrid,
    candidates: &[f64],
    port: Port,
    normalization: Normalization,
) -> Result<PumpFit> {
    params.validate()?;
    for &p in candidates {
        if !(p > 0.0) {
            return Err(Error::InvalidParams {
                field: "candidates",
                reason: format!("pump {p} must be positive"),
            });
        }
        params.with_pump(p).check_pump()?;
    }
    if !strong_coupling_check(params) {
        return Err(Error::InvalidParams {
            field: "g",
            reason: "pump fitting needs strong coupling".into(),
        });
    }
    let reference = iof_spectrum(params, grid, port)?.normalized(normalization)?;
    fit_pump_rate_with(&reference, candidates, |p| ipm_transmission(&params.with_pump(p), grid, normalization))
}

/// Which sample stands for the DIT value of a spectrum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DitValue {
    /// Value at the identified DIT extremum.
    #[default]
    Extremum,
    /// Value at a fixed offset, interpolated.
    Offset(f64),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub port: Option<Port>,
    pub normalization: Normalization,
    pub dit_value_mode: DitValue,
    pub dit_iof: Option<f64>,
    pub dit_ipm: Option<f64>,
    pub dit_kind_iof: Option<FeatureKind>,
    pub dit_kind_ipm: Option<FeatureKind>,
    pub fwhm_iof: Option<f64>,
    pub fwhm_ipm: Option<f64>,
    pub splitting_iof: Option<f64>,
    pub splitting_ipm: Option<f64>,
    pub dit_peak_ratio: Option<f64>,
    pub fwhm_discrepancy_pct: Option<f64>,
    pub best_pump: Option<f64>,
    pub iof_error: Option<String>,
    pub ipm_error: Option<String>,
}

/// Distance between the two most prominent features of the dominant kind,
/// used when no DIT triple is found.
fn fallback_splitting(s: &Spectrum) -> Option<f64> {
    let features = extract_features(s);
    [FeatureKind::Peak, FeatureKind::Dip]
        .into_iter()
        .filter_map(|kind| {
            let mut same: Vec<_> = features.iter().filter(|f| f.kind == kind).collect();
            if same.len() < 2 {
                return None;
            }
            same.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
            Some((same[1].prominence, (same[0].position - same[1].position).abs()))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, d)| d)
}

struct Side {
    value: Option<f64>,
    kind: Option<FeatureKind>,
    fwhm: Option<f64>,
    splitting: Option<f64>,
    error: Option<String>,
}

fn analyse(s: &Spectrum, mode: DitValue) -> Side {
    match dit_metrics(s) {
        Ok(m) => Side {
            value: Some(match mode {
                DitValue::Extremum => m.dit.value,
                DitValue::Offset(w) => s.value_at(w),
            }),
            kind: Some(m.dit.kind),
            fwhm: m.dit.fwhm,
            splitting: Some(m.splitting),
            error: None,
        },
        Err(e) => Side {
            value: None,
            kind: None,
            fwhm: None,
            splitting: fallback_splitting(s),
            error: Some(e.name().to_string()),
        },
    }
}

pub fn compare_methods(iof: &Spectrum, ipm: &Spectrum) -> Result<ComparisonReport> {
    compare_methods_with(iof, ipm, DitValue::Extremum)
}

/// Same as [`compare_methods`] with the DIT value read at a fixed offset.
pub fn compare_methods_at_offset(iof: &Spectrum, ipm: &Spectrum, offset: f64) -> Result<ComparisonReport> {
    compare_methods_with(iof, ipm, DitValue::Offset(offset))
}

pub fn compare_methods_with(iof: &Spectrum, ipm: &Spectrum, mode: DitValue) -> Result<ComparisonReport> {
    if iof.grid.offsets() != ipm.grid.offsets() {
        return Err(Error::GridMismatch);
    }
    if iof.normalization != ipm.normalization {
        return Err(Error::NormalizationMismatch(
            iof.normalization.to_string(),
            ipm.normalization.to_string(),
        ));
    }
    let a = analyse(iof, mode);
    let b = analyse(ipm, mode);
    let ratio = match (a.value, b.value) {
        (Some(x), Some(y)) if x != 0.0 => Some(y / x),
        _ => None,
    };
    let discrepancy = match (a.fwhm, b.fwhm) {
        (Some(x), Some(y)) => Some(100.0 * (y - x).abs() / x),
        _ => None,
    };
    let port = match iof.channel {
        Channel::ThroughPort => Some(Port::Through),
        Channel::DropPort => Some(Port::Drop),
        _ => None,
    };
    Ok(ComparisonReport {
        port,
        normalization: iof.normalization,
        dit_value_mode: mode,
        dit_iof: a.value,
        dit_ipm: b.value,
        dit_kind_iof: a.kind,
        dit_kind_ipm: b.kind,
        fwhm_iof: a.fwhm,
        fwhm_ipm: b.fwhm,
        splitting_iof: a.splitting,
        splitting_ipm: b.splitting,
        dit_peak_ratio: ratio,
        fwhm_discrepancy_pct: discrepancy,
        best_pump: None,
        iof_error: a.error,
        ipm_error: b.error,
    })
}
