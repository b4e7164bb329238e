//! Trial functions and weight sweeps. Every trial is defined on the continuum
//! and sampled at the requested resolution, so the same index describes the
//! same function at `J` and `J + 1`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, WeightKind};
use crate::error::Result;
use crate::grid::{Domain, GridFunction};
use crate::operators::{maximal_truncated, Hilbert};
use crate::weights::{power_weight, Weight};

/// Number of coarse pieces of the random step trials and random weights.
pub const COARSE_PIECES: usize = 16;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial seed derived from the run seed and the trial index only.
pub fn sub_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialShape {
    /// `χ_[a, b)` in absolute coordinates.
    Indicator { a: f64, b: f64, dyadic: bool },
    /// `values` on equal pieces of `[lo, lo + len)`, zero elsewhere.
    Steps { lo: f64, len: f64, values: Vec<f64> },
    /// `exp(1 - 1/(1 - ((x - c)/r)²))` on `|x - c| < r`.
    Bump { center: f64, radius: f64 },
}

impl TrialShape {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Indicator { dyadic: true, .. } => "dyadic-indicator",
            Self::Indicator { dyadic: false, .. } => "indicator",
            Self::Steps { .. } => "random-steps",
            Self::Bump { .. } => "bump",
        }
    }

    pub fn sample(&self, domain: Domain) -> GridFunction {
        match self {
            Self::Indicator { a, b, .. } => GridFunction::indicator(domain, *a, *b),
            Self::Steps { lo, len, values } => {
                let n = values.len() as f64;
                GridFunction::from_sampler(domain, |x| {
                    let u = (x - lo) / len;
                    if (0.0..1.0).contains(&u) {
                        values[((u * n) as usize).min(values.len() - 1)]
                    } else {
                        0.0
                    }
                })
                .expect("finite steps")
            }
            Self::Bump { center, radius } => GridFunction::from_sampler(domain, |x| {
                let u = (x - center) / radius;
                if u.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            })
            .expect("finite bump"),
        }
    }
}

/// Support of every trial: the middle half of the domain, so that `T**f` is
/// also observed away from the support of `f`.
pub fn support_window(domain: &Domain) -> (f64, f64) {
    (domain.lo() + domain.len() / 4.0, domain.len() / 2.0)
}

/// Trial `index` of the corpus on `domain` (only `lo` and `len` matter).
///
/// All trials live in [`support_window`]. Index 0 is the indicator of the left
/// half of the window. Other indices cycle through a dyadic indicator, an
/// indicator with random endpoints, a random `±1` step function on
/// [`COARSE_PIECES`] pieces and a bump of random centre and width.
pub fn trial_shape(domain: &Domain, seed: u64, index: usize) -> TrialShape {
    let (lo, len) = support_window(domain);
    if index == 0 {
        return TrialShape::Indicator {
            a: lo,
            b: lo + len / 2.0,
            dyadic: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, index));
    match index % 4 {
        0 => {
            let level = rng.random_range(1..=4u32);
            let pieces = 1usize << level;
            let k = rng.random_range(0..pieces);
            let width = len / pieces as f64;
            TrialShape::Indicator {
                a: lo + k as f64 * width,
                b: lo + (k + 1) as f64 * width,
                dyadic: true,
            }
        }
        1 => {
            let x: f64 = rng.random_range(0.0..1.0);
            let y: f64 = rng.random_range(0.0..1.0);
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            let b = b.max(a + 1.0 / 64.0).min(1.0);
            TrialShape::Indicator {
                a: lo + a * len,
                b: lo + b * len,
                dyadic: false,
            }
        }
        2 => TrialShape::Steps {
            lo,
            len,
            values: (0..COARSE_PIECES)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect(),
        },
        _ => {
            let r: f64 = rng.random_range(1.0 / 16.0..0.25);
            let c: f64 = rng.random_range(r..1.0 - r);
            TrialShape::Bump {
                center: lo + c * len,
                radius: r * len,
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    pub shape: TrialShape,
    pub f: GridFunction,
    pub digest: String,
}

pub fn trial(domain: Domain, seed: u64, index: usize) -> Trial {
    let shape = trial_shape(&domain, seed, index);
    let f = shape.sample(domain);
    let digest = function_digest(&f);
    Trial {
        index,
        shape,
        f,
        digest,
    }
}

/// First 16 hex digits of the SHA-256 of the domain and cell values.
pub fn function_digest(f: &GridFunction) -> String {
    let d = f.domain();
    let mut h = Sha256::new();
    h.update(d.lo().to_bits().to_le_bytes());
    h.update(d.len().to_bits().to_le_bytes());
    h.update(d.level().to_le_bytes());
    for v in f.values() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

const CACHE_LIMIT: usize = 1024;

/// `T**f` for the Hilbert kernel, memoised by the digest of `f`. Results are
/// bit-identical to a fresh evaluation.
pub fn hilbert_maximal(f: &GridFunction) -> Arc<GridFunction> {
    static CACHE: OnceLock<Mutex<HashMap<[u8; 32], Arc<GridFunction>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key: [u8; 32] = {
        let d = f.domain();
        let mut h = Sha256::new();
        h.update(d.lo().to_bits().to_le_bytes());
        h.update(d.len().to_bits().to_le_bytes());
        h.update(d.level().to_le_bytes());
        for v in f.values() {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize().into()
    };
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let value = Arc::new(maximal_truncated(f, &Hilbert));
    let mut guard = cache.lock().expect("cache lock");
    if guard.len() >= CACHE_LIMIT {
        guard.clear();
    }
    guard.insert(key, value.clone());
    value
}

fn whole_domain_steps(domain: Domain, values: &[f64]) -> GridFunction {
    let n = domain.cells();
    let vals = (0..n).map(|i| values[i * values.len() / n]).collect();
    GridFunction::new(domain, vals).expect("finite steps")
}

/// A weight together with the parameter it was generated from.
#[derive(Debug, Clone)]
pub struct SweepWeight {
    pub label: String,
    /// Power exponent, or the index within the sweep for other kinds.
    pub parameter: f64,
    pub weight: Weight,
}

/// Power exponents `{0, 0.3, 0.6, 0.9}` scaled into the admissible range
/// `a < p - 1` of `A_p` when `p < 2`.
pub fn default_power_sweep(p: f64) -> Vec<f64> {
    let scale = (p - 1.0).min(1.0);
    [0.0, 0.3, 0.6, 0.9].iter().map(|a| a * scale).collect()
}

/// The weights described by the config, sampled on `domain`. `p` selects the
/// default power sweep when `weight.a` is absent.
pub fn weight_sweep(cfg: &ExperimentConfig, domain: Domain, p: f64) -> Result<Vec<SweepWeight>> {
    let w = &cfg.weight;
    Ok(match w.kind {
        WeightKind::Unit => vec![SweepWeight {
            label: "unit".into(),
            parameter: 0.0,
            weight: Weight::unit(domain),
        }],
        WeightKind::Power => {
            let exps =
                w.a.as_ref()
                    .map(|a| a.to_vec())
                    .unwrap_or_else(|| default_power_sweep(p));
            exps.into_iter()
                .map(|a| {
                    Ok(SweepWeight {
                        label: format!("a={a}"),
                        parameter: a,
                        weight: power_weight(a, domain)?,
                    })
                })
                .collect::<Result<_>>()?
        }
        WeightKind::Step => {
            let v = w.values.clone().unwrap_or_default();
            vec![SweepWeight {
                label: "step".into(),
                parameter: 0.0,
                weight: Weight::new(whole_domain_steps(domain, &v))?,
            }]
        }
        WeightKind::Random => (0..w.count)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed ^ 0x5745_4947_4854, k));
                let log_b = w.bound.ln();
                let vals: Vec<f64> = (0..COARSE_PIECES)
                    .map(|_| {
                        let u: f64 = rng.random_range(-1.0..=1.0);
                        (u * log_b).exp()
                    })
                    .collect();
                Ok(SweepWeight {
                    label: format!("random-{k}"),
                    parameter: k as f64,
                    weight: Weight::new(whole_domain_steps(domain, &vals))?,
                })
            })
            .collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trials_are_deterministic_and_resolution_free() {
        let d10 = Domain::new(0.0, 2.0, 10).unwrap();
        let d11 = d10.with_level(11).unwrap();
        for i in 0..12 {
            assert_eq!(trial_shape(&d10, 5, i), trial_shape(&d11, 5, i));
            assert_eq!(trial(d10, 5, i).digest, trial(d10, 5, i).digest);
        }
        assert_ne!(trial_shape(&d10, 5, 3), trial_shape(&d10, 6, 3));
    }

    #[test]
    fn trials_live_in_middle_half() {
        let d = Domain::new(0.0, 4.0, 8).unwrap();
        assert_eq!(trial(d, 0, 0).f.values(), GridFunction::indicator(d, 1.0, 2.0).values());
        for i in 0..16 {
            let f = trial(d, 9, i).f;
            for (k, v) in f.values().iter().enumerate() {
                let x = d.midpoint(k);
                if !(1.0..3.0).contains(&x) {
                    assert_eq!(*v, 0.0, "trial {i} at {x}");
                }
            }
            assert!(f.max_abs() > 0.0);
        }
    }

    #[test]
    fn corpus_cycles_through_shapes() {
        let d = Domain::new(0.0, 1.0, 6).unwrap();
        let labels: Vec<_> = (1..5).map(|i| trial_shape(&d, 1, i).label()).collect();
        assert_eq!(labels, ["indicator", "random-steps", "bump", "dyadic-indicator"]);
    }

    #[test]
    fn cached_maximal_matches_direct() {
        let d = Domain::new(0.0, 1.0, 7).unwrap();
        let f = trial(d, 2, 3).f;
        let a = hilbert_maximal(&f);
        let b = hilbert_maximal(&f);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.values(), maximal_truncated(&f, &Hilbert).values());
    }

    #[test]
    fn default_sweep_stays_admissible() {
        assert_eq!(default_power_sweep(2.0), vec![0.0, 0.3, 0.6, 0.9]);
        assert!(default_power_sweep(1.5).iter().all(|a| *a < 0.5));
    }
}
