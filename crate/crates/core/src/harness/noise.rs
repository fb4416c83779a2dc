//! Additive iid noise standing in for lossy coding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VsdeError};
use crate::media_io::LumaFrame;

use super::scene::StereoFrames;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum NoiseLaw {
    #[default]
    None,
    /// Continuous uniform on `[-delta, delta]`, rounded to the nearest level.
    Uniform { delta: f64 },
    /// Two-sided geometric law with variance `2 scale²`.
    DiscreteLaplace { scale: f64 },
}

impl NoiseLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseLaw::Uniform { delta: s } | NoiseLaw::DiscreteLaplace { scale: s }
                if !(s >= 0.0 && s.is_finite()) =>
            {
                Err(VsdeError::invalid(format!(
                    "noise scale {s} must be finite and nonnegative"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Ratio `p` of the two-sided geometric law `P(k) ∝ p^|k|` whose variance
    /// `2p / (1-p)²` equals `2 scale²`.
    pub fn laplace_ratio(scale: f64) -> f64 {
        if scale <= 0.0 {
            return 0.0;
        }
        let s2 = scale * scale;
        ((2.0 * s2 + 1.0) - (4.0 * s2 + 1.0).sqrt()) / (2.0 * s2)
    }
}

/// Coding-noise description for one case: a law for textures, one for
/// depth maps, and the seed every draw derives from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub texture_noise: NoiseLaw,
    #[serde(default)]
    pub depth_noise: NoiseLaw,
    pub seed: u64,
}

/// Adds iid noise of `law` to every sample and clamps to `[0, 255]`. Each
/// `(seed, stream)` pair gives an independent, reproducible draw.
pub fn simulate_compression(frame: &LumaFrame, law: &NoiseLaw, seed: u64, stream: u64) -> Result<LumaFrame> {
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = frame.clone();
    match *law {
        NoiseLaw::None => {}
        NoiseLaw::Uniform { delta } => {
            if delta > 0.0 {
                for v in out.samples_mut() {
                    let n = rng.random_range(-delta..=delta);
                    *v = (*v as f64 + (n + 0.5).floor()).clamp(0.0, 255.0) as u8;
                }
            }
        }
        NoiseLaw::DiscreteLaplace { scale } => {
            let p = NoiseLaw::laplace_ratio(scale);
            if p > 0.0 {
                let geo = Geometric::new(1.0 - p).map_err(|e| VsdeError::invalid(e.to_string()))?;
                for v in out.samples_mut() {
                    let a = geo.sample(&mut rng).min(1 << 20) as i64;
                    let b = geo.sample(&mut rng).min(1 << 20) as i64;
                    *v = (*v as i64 + a - b).clamp(0, 255) as u8;
                }
            }
        }
    }
    Ok(out)
}

/// Coded versions of all four reference frames, each from its own stream.
pub fn compress_views(frames: &StereoFrames, noise: &NoiseSpec) -> Result<StereoFrames> {
    Ok(StereoFrames {
        tl: simulate_compression(&frames.tl, &noise.texture_noise, noise.seed, 0)?,
        dl: simulate_compression(&frames.dl, &noise.depth_noise, noise.seed, 1)?,
        tr: simulate_compression(&frames.tr, &noise.texture_noise, noise.seed, 2)?,
        dr: simulate_compression(&frames.dr, &noise.depth_noise, noise.seed, 3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dibr::mse;
    use approx::assert_relative_eq;

    fn mid_grey() -> LumaFrame {
        LumaFrame::filled(400, 400, 128).unwrap()
    }

    fn variance(a: &LumaFrame, b: &LumaFrame) -> f64 {
        let n = a.len() as f64;
        let d: Vec<f64> = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(&x, &y)| y as f64 - x as f64)
            .collect();
        let m = d.iter().sum::<f64>() / n;
        d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn none_is_identity() {
        let f = mid_grey();
        assert_eq!(simulate_compression(&f, &NoiseLaw::None, 1, 0).unwrap(), f);
    }

    #[test]
    fn uniform_matches_rounded_law() {
        // Rounding U(-Δ, Δ) to integers: P(0) = 1/(2Δ), P(±j) = 1/(2Δ) for
        // 0 < j < Δ and P(±Δ) = 1/(4Δ).
        let delta = 2.0f64;
        let exact: f64 = {
            let d = delta as i64;
            let inner: f64 = (1..d).map(|j| 2.0 * (j * j) as f64 / (2.0 * delta)).sum();
            inner + 2.0 * delta * delta / (4.0 * delta)
        };
        let f = mid_grey();
        let g = simulate_compression(&f, &NoiseLaw::Uniform { delta }, 7, 0).unwrap();
        assert_relative_eq!(mse(&f, &g).unwrap(), exact, max_relative = 0.05);
    }

    #[test]
    fn laplace_variance_is_twice_scale_squared() {
        let f = mid_grey();
        for scale in [0.5, 1.0, 2.5] {
            let g = simulate_compression(&f, &NoiseLaw::DiscreteLaplace { scale }, 8, 1).unwrap();
            assert_relative_eq!(variance(&f, &g), 2.0 * scale * scale, max_relative = 0.05);
        }
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let f = mid_grey();
        let law = NoiseLaw::DiscreteLaplace { scale: 1.0 };
        let a = simulate_compression(&f, &law, 5, 0).unwrap();
        assert_eq!(a, simulate_compression(&f, &law, 5, 0).unwrap());
        assert_ne!(a, simulate_compression(&f, &law, 5, 1).unwrap());
    }

    #[test]
    fn negative_scale_is_rejected() {
        assert!(simulate_compression(&mid_grey(), &NoiseLaw::Uniform { delta: -1.0 }, 0, 0).is_err());
    }

    #[test]
    fn noise_spec_json_shape() {
        let spec: NoiseSpec = serde_json::from_str(
            r#"{"texture_noise":{"law":"uniform","delta":2},"depth_noise":{"law":"discrete-laplace","scale":1.5},"seed":3}"#,
        )
        .unwrap();
        assert_eq!(spec.depth_noise, NoiseLaw::DiscreteLaplace { scale: 1.5 });
        let default: NoiseSpec = serde_json::from_str(r#"{"seed":1}"#).unwrap();
        assert_eq!(default.texture_noise, NoiseLaw::None);
    }
}
