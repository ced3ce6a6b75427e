//! Randomized elicitation sessions for round-trip and service tests.

#![allow(dead_code)]

use effect_design::elicitation::{
    Allocation, BallsAllocation, ElicitationSession, ExtremeJudgment, Extremes, MidpointSplit,
    Payload, Stage, StudyContext,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 10] = [
    "adults", "clinic \"A\"", "reminder", "usual care", "weeks", "Zürich", "tab\tseparated",
    "line\nbreak", "½ dose", "points",
];

fn text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..4);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn context(rng: &mut ChaCha8Rng) -> StudyContext {
    StudyContext {
        population: text(rng),
        sample_size_estimate: rng.random_range(1..100_000),
        treatment: text(rng),
        control: text(rng),
        outcome_measure: text(rng),
        analysis_plan: text(rng),
        effect_units: text(rng),
    }
}

fn judgment(rng: &mut ChaCha8Rng, effect: f64) -> ExtremeJudgment {
    ExtremeJudgment {
        effect,
        description: text(rng),
        uncertainty: if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 },
        tail_share: rng.random_bool(0.5).then(|| rng.random::<f64>()),
    }
}

pub fn extremes(rng: &mut ChaCha8Rng) -> Extremes {
    let lo = rng.random_range(-2.0..1.0);
    let hi = lo + rng.random_range(1e-3..3.0);
    Extremes {
        largest: judgment(rng, hi),
        smallest: judgment(rng, lo),
    }
}

pub fn allocation(rng: &mut ChaCha8Rng, ex: &Extremes) -> Allocation {
    let (lo, hi) = (ex.smallest.effect, ex.largest.effect);
    if rng.random_bool(0.3) {
        let lower = rng.random::<f64>();
        return Allocation::Midpoint(MidpointSplit::new(lower, 1.0 - lower));
    }
    let k = rng.random_range(2..7);
    let total = rng.random_range(1..40u32);
    let mut balls = vec![0u32; k];
    for _ in 0..total {
        balls[rng.random_range(0..k)] += 1;
    }
    Allocation::Balls(BallsAllocation::equal_bins(lo, hi, k, total).with_balls(balls))
}

/// Next valid payload for `session`, or `None` once it is complete.
pub fn payload(rng: &mut ChaCha8Rng, session: &ElicitationSession) -> Option<Payload> {
    Some(match session.stage() {
        Stage::Context => Payload::Context(context(rng)),
        Stage::AtePre => Payload::AtePre {
            ate_pre: if rng.random_bool(0.1) { 0.0 } else { rng.random_range(-1.0..2.0) },
        },
        Stage::Extremes => Payload::Extremes(extremes(rng)),
        Stage::Allocation => Payload::Allocation {
            allocation: allocation(rng, session.extremes().unwrap()),
        },
        Stage::NullShare => Payload::NullShare {
            p_null: if rng.random_bool(0.1) { 1.0 } else { rng.random::<f64>() },
        },
        Stage::Derived => Payload::Reflection { text: text(rng) },
        Stage::Compared => return None,
    })
}

/// A session advanced a random number of steps (0 through complete).
pub fn random_session(seed: u64) -> ElicitationSession {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = rng.random_range(0..=6);
    let mut s = ElicitationSession::new(format!("s-{seed}"));
    for i in 0..steps {
        let p = payload(&mut rng, &s).unwrap();
        s = s
            .advance_at(p, 1_700_000_000_000 + i as u64)
            .expect("generated payloads are valid");
    }
    s
}

pub fn complete_session(seed: u64) -> ElicitationSession {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ElicitationSession::new(format!("c-{seed}"));
    let mut t = 0;
    while let Some(p) = payload(&mut rng, &s) {
        t += 1;
        s = s.advance_at(p, t).expect("generated payloads are valid");
    }
    s
}

/// Session walked to `Derived` with extremes (0, x), an even midpoint split
/// and the given null share.
pub fn midpoint_session(x: f64, p_null: f64) -> ElicitationSession {
    let mut rng = ChaCha8Rng::seed_from_u64(x.to_bits());
    ElicitationSession::new("midpoint")
        .advance_at(Payload::Context(context(&mut rng)), 1)
        .and_then(|s| s.advance_at(Payload::AtePre { ate_pre: x / 2.0 }, 2))
        .and_then(|s| s.advance_at(Payload::Extremes(Extremes::new(0.0, x)), 3))
        .and_then(|s| {
            s.advance_at(
                Payload::Allocation {
                    allocation: Allocation::Midpoint(MidpointSplit::new(0.5, 0.5)),
                },
                4,
            )
        })
        .and_then(|s| s.advance_at(Payload::NullShare { p_null }, 5))
        .expect("midpoint session is valid")
}
