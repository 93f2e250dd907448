//! Score normalization and the weighted aesthetic/alignment fitness.
//!
//! Raw aesthetic scores live on `[1, 10]` and CLIP similarities on `[-1, 1]`.
//! Both are mapped affinely onto `[0, 1]` (clamping out-of-range inputs) and
//! combined as `a·aesthetic + b·clip` with `a + b = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AESTHETIC_RANGE: (f64, f64) = (1.0, 10.0);
pub const CLIP_RANGE: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawScores {
    pub aesthetic: f64,
    pub clip: f64,
}

impl RawScores {
    pub fn new(aesthetic: f64, clip: f64) -> Self {
        RawScores { aesthetic, clip }
    }

    /// Copy with each score clamped into its declared range.
    pub fn clamped(&self) -> Self {
        RawScores {
            aesthetic: self.aesthetic.clamp(AESTHETIC_RANGE.0, AESTHETIC_RANGE.1),
            clip: self.clip.clamp(CLIP_RANGE.0, CLIP_RANGE.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct FitnessWeights {
    a: f64,
    b: f64,
}

impl FitnessWeights {
    pub const WEIGHT_TOLERANCE: f64 = 1e-12;

    pub fn new(aesthetic: f64, clip: f64) -> Result<Self> {
        if !(aesthetic >= 0.0 && clip >= 0.0) {
            return Err(Error::Config(format!(
                "fitness weights must be non-negative, got ({aesthetic}, {clip})"
            )));
        }
        if (aesthetic + clip - 1.0).abs() > Self::WEIGHT_TOLERANCE {
            return Err(Error::Config(format!(
                "fitness weights must sum to 1, got ({aesthetic}, {clip})"
            )));
        }
        Ok(FitnessWeights { a: aesthetic, b: clip })
    }

    pub fn aesthetic(&self) -> f64 {
        self.a
    }

    pub fn clip(&self) -> f64 {
        self.b
    }
}

impl Default for FitnessWeights {
    /// `(0.4, 0.6)`: alignment weighted above aesthetics.
    fn default() -> Self {
        FitnessWeights { a: 0.4, b: 0.6 }
    }
}

impl TryFrom<(f64, f64)> for FitnessWeights {
    type Error = Error;

    fn try_from((a, b): (f64, f64)) -> Result<Self> {
        FitnessWeights::new(a, b)
    }
}

impl From<FitnessWeights> for (f64, f64) {
    fn from(w: FitnessWeights) -> Self {
        (w.a, w.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessScore {
    pub raw: RawScores,
    pub norm_aesthetic: f64,
    pub norm_clip: f64,
    /// Weighted sum of the two normalized components.
    pub combined: f64,
}

fn reject_nan(s: f64) -> Result<f64> {
    if s.is_nan() {
        Err(Error::NanScore)
    } else {
        Ok(s)
    }
}

pub fn norm_aesthetic(s: f64) -> Result<f64> {
    let (lo, hi) = AESTHETIC_RANGE;
    Ok(((reject_nan(s)? - lo) / (hi - lo)).clamp(0.0, 1.0))
}

pub fn norm_clip(s: f64) -> Result<f64> {
    let (lo, hi) = CLIP_RANGE;
    Ok(((reject_nan(s)? - lo) / (hi - lo)).clamp(0.0, 1.0))
}

pub fn combine(raw: RawScores, w: FitnessWeights) -> Result<FitnessScore> {
    let norm_aesthetic = norm_aesthetic(raw.aesthetic)?;
    let norm_clip = norm_clip(raw.clip)?;
    let combined = (w.a * norm_aesthetic + w.b * norm_clip).clamp(0.0, 1.0);
    Ok(FitnessScore {
        raw,
        norm_aesthetic,
        norm_clip,
        combined,
    })
}

/// `⟨u,v⟩ / (‖u‖·‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(reject_nan(dot / (nu * nv))?.clamp(-1.0, 1.0))
}

/// Percentage change of `new` relative to `base`.
pub fn delta_percent(new: f64, base: f64) -> Result<f64> {
    if base == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok(100.0 * (new - base) / base + 0.0)
}
