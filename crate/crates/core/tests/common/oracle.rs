//! Brute-force Monte Carlo oracle for design diagnostics.
//!
//! Written independently of the library: its own generator (SplitMix64), its
//! own Box-Muller normals, its own mixture sampler and a hard-coded critical
//! value. Nothing here calls into `effect_design`.

#![allow(dead_code)]

/// Two-sided critical value for alpha = 0.05.
pub const Z_975: f64 = 1.959_963_984_540_054;

pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

#[derive(Clone, Debug)]
pub enum OracleComponent {
    Point(f64),
    Uniform(f64, f64),
    Normal(f64, f64),
    Discrete(Vec<(f64, f64)>),
}

impl OracleComponent {
    fn draw(&self, rng: &mut SplitMix64) -> f64 {
        match self {
            OracleComponent::Point(v) => *v,
            OracleComponent::Uniform(lo, hi) => lo + (hi - lo) * rng.uniform(),
            OracleComponent::Normal(c, s) => c + s * rng.normal(),
            OracleComponent::Discrete(pairs) => pick(pairs, rng.uniform()),
        }
    }
}

fn pick(pairs: &[(f64, f64)], u: f64) -> f64 {
    let mut acc = 0.0;
    for (value, mass) in pairs {
        acc += mass;
        if u < acc {
            return *value;
        }
    }
    pairs.last().unwrap().0
}

/// Weighted mixture as `(weight, component)`.
pub type OracleMixture = Vec<(f64, OracleComponent)>;

pub fn draw_mixture(mix: &OracleMixture, rng: &mut SplitMix64) -> f64 {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (w, comp) in mix {
        acc += w;
        if u < acc {
            return comp.draw(rng);
        }
    }
    mix.last().unwrap().1.draw(rng)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleStats {
    pub draws: u64,
    pub significant: u64,
    pub power: f64,
    pub power_se: f64,
    pub type_s: f64,
    pub type_s_se: f64,
    /// Mean |estimate| among significant draws divided by the reference magnitude.
    pub exaggeration: f64,
    pub exaggeration_se: f64,
}

/// Fixed true effect, two-sided test at the given critical value.
///
/// Wrong sign is judged against the sign of `effect`, with zero treated as
/// positive.
pub fn fixed(effect: f64, se: f64, z_crit: f64, draws: u64, seed: u64) -> OracleStats {
    let mut rng = SplitMix64::new(seed);
    let threshold = z_crit * se;
    let mut sig = 0u64;
    let mut wrong = 0u64;
    let mut sum_abs = 0.0;
    let mut sum_abs_sq = 0.0;
    for _ in 0..draws {
        let est = effect + se * rng.normal();
        if est.abs() > threshold {
            sig += 1;
            let positive_truth = effect >= 0.0;
            if (est > 0.0) != positive_truth {
                wrong += 1;
            }
            sum_abs += est.abs();
            sum_abs_sq += est * est;
        }
    }
    summarize(draws, sig, wrong, sum_abs, sum_abs_sq, effect.abs())
}

/// Effect drawn from a mixture; a draw counts as a sign error only when its
/// own effect is nonzero and the significant estimate has the other sign.
pub fn mixture(mix: &OracleMixture, se: f64, z_crit: f64, draws: u64, seed: u64) -> OracleStats {
    let mut rng = SplitMix64::new(seed);
    let threshold = z_crit * se;
    let mean: f64 = mix.iter().map(|(w, c)| w * component_mean(c)).sum();
    let mut sig = 0u64;
    let mut wrong = 0u64;
    let mut sum_abs = 0.0;
    let mut sum_abs_sq = 0.0;
    for _ in 0..draws {
        let effect = draw_mixture(mix, &mut rng);
        let est = effect + se * rng.normal();
        if est.abs() > threshold {
            sig += 1;
            if effect != 0.0 && (est > 0.0) != (effect > 0.0) {
                wrong += 1;
            }
            sum_abs += est.abs();
            sum_abs_sq += est * est;
        }
    }
    summarize(draws, sig, wrong, sum_abs, sum_abs_sq, mean.abs())
}

pub fn component_mean(c: &OracleComponent) -> f64 {
    match c {
        OracleComponent::Point(v) => *v,
        OracleComponent::Uniform(lo, hi) => 0.5 * (lo + hi),
        OracleComponent::Normal(c, _) => *c,
        OracleComponent::Discrete(pairs) => pairs.iter().map(|(v, m)| v * m).sum(),
    }
}

fn summarize(
    draws: u64,
    sig: u64,
    wrong: u64,
    sum_abs: f64,
    sum_abs_sq: f64,
    reference: f64,
) -> OracleStats {
    let n = draws as f64;
    let power = sig as f64 / n;
    let power_se = (power * (1.0 - power) / n).sqrt();
    let (type_s, type_s_se, exaggeration, exaggeration_se) = if sig == 0 {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let k = sig as f64;
        let ts = wrong as f64 / k;
        let mean_abs = sum_abs / k;
        let var_abs = (sum_abs_sq / k - mean_abs * mean_abs).max(0.0);
        (
            ts,
            (ts * (1.0 - ts) / k).sqrt(),
            mean_abs / reference,
            (var_abs / k).sqrt() / reference,
        )
    };
    OracleStats {
        draws,
        significant: sig,
        power,
        power_se,
        type_s,
        type_s_se,
        exaggeration,
        exaggeration_se,
    }
}
