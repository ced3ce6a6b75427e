//! Chunked, seeded simulation of estimate ~ normal(effect, se).
//!
//! Draws are split into fixed-size chunks; chunk `i` uses ChaCha8 stream `i`
//! under the caller's seed. Chunks run in parallel and their tallies are
//! combined in chunk order, so results depend only on `(seed, draws)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub(crate) const CHUNK: u64 = 1 << 16;

/// When does a significant estimate count as a sign error?
#[derive(Debug, Clone, Copy)]
pub(crate) enum SignRule {
    /// Against the sign of the draw's effect, zero counting as positive.
    ZeroIsPositive,
    /// Only for draws whose effect is nonzero.
    NonzeroOnly,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimConfig {
    pub se: f64,
    pub threshold: f64,
    /// `None` for two-sided, `Some(+1.0 | -1.0)` for a one-sided test in that direction.
    pub direction: Option<f64>,
    pub sign_rule: SignRule,
    pub collect_abs: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Tally {
    pub draws: u64,
    pub significant: u64,
    pub wrong_sign: u64,
    pub sum_abs: f64,
    pub sum_abs_sq: f64,
    pub abs_values: Vec<f64>,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.draws += other.draws;
        self.significant += other.significant;
        self.wrong_sign += other.wrong_sign;
        self.sum_abs += other.sum_abs;
        self.sum_abs_sq += other.sum_abs_sq;
        self.abs_values.extend(other.abs_values);
    }
}

pub(crate) fn simulate<F>(draw_effect: F, cfg: SimConfig, draws: u64, seed: u64) -> Tally
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK.min(draws - i * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            run_chunk(&draw_effect, &cfg, len, &mut rng)
        })
        .collect();
    let mut total = Tally::default();
    for part in parts {
        total.absorb(part);
    }
    total
}

fn run_chunk<F>(draw_effect: &F, cfg: &SimConfig, len: u64, rng: &mut ChaCha8Rng) -> Tally
where
    F: Fn(&mut ChaCha8Rng) -> f64,
{
    let mut t = Tally {
        draws: len,
        ..Tally::default()
    };
    for _ in 0..len {
        let effect = draw_effect(rng);
        let noise: f64 = StandardNormal.sample(rng);
        let est = effect + cfg.se * noise;
        let significant = match cfg.direction {
            None => est.abs() > cfg.threshold,
            Some(d) => d * est > cfg.threshold,
        };
        if !significant {
            continue;
        }
        t.significant += 1;
        let wrong = match cfg.sign_rule {
            SignRule::ZeroIsPositive => (est > 0.0) != (effect >= 0.0),
            SignRule::NonzeroOnly => effect != 0.0 && (est > 0.0) != (effect > 0.0),
        };
        if wrong {
            t.wrong_sign += 1;
        }
        let a = est.abs();
        t.sum_abs += a;
        t.sum_abs_sq += a * a;
        if cfg.collect_abs {
            t.abs_values.push(a);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimConfig {
        SimConfig {
            se: 1.0,
            threshold: 1.96,
            direction: None,
            sign_rule: SignRule::ZeroIsPositive,
            collect_abs: false,
        }
    }

    #[test]
    fn chunking_covers_every_draw() {
        for draws in [1, CHUNK - 1, CHUNK, CHUNK + 1, 3 * CHUNK + 17] {
            let t = simulate(|_| 0.5, cfg(), draws, 1);
            assert_eq!(t.draws, draws);
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(|_| 0.3, cfg(), 5 * CHUNK + 123, 99))
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.significant, b.significant);
        assert_eq!(a.wrong_sign, b.wrong_sign);
        assert_eq!(a.sum_abs.to_bits(), b.sum_abs.to_bits());
        assert_eq!(a.sum_abs_sq.to_bits(), b.sum_abs_sq.to_bits());
    }

    #[test]
    fn seeds_matter() {
        let a = simulate(|_| 0.3, cfg(), 100_000, 1);
        let b = simulate(|_| 0.3, cfg(), 100_000, 2);
        assert_ne!(a.sum_abs.to_bits(), b.sum_abs.to_bits());
    }
}
