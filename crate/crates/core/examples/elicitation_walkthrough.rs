//! The elicitation protocol driven in code, one payload per stage.

use effect_design::elicitation::{
    comparison_report, Allocation, BallsAllocation, ElicitationSession, Extremes, Payload,
    StudyContext,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let context = StudyContext {
        population: "adults on a clinic waiting list".into(),
        sample_size_estimate: 400,
        treatment: "text-message reminders".into(),
        control: "no reminders".into(),
        outcome_measure: "attended the appointment".into(),
        analysis_plan: "difference in proportions".into(),
        effect_units: "proportion attending".into(),
    };
    let extremes = Extremes::new(0.0, 0.3);
    // six bins over the extremes, most balls near the small end
    let balls = BallsAllocation::equal_bins(0.0, 0.3, 6, 20).with_balls(vec![7, 5, 4, 2, 1, 1]);

    let mut session = ElicitationSession::new("walkthrough");
    for payload in [
        Payload::Context(context),
        Payload::AtePre { ate_pre: 0.1 },
        Payload::Extremes(extremes),
        Payload::Allocation { allocation: Allocation::Balls(balls) },
        Payload::NullShare { p_null: 0.6 },
    ] {
        let from = session.stage();
        session = session.advance(payload)?;
        println!("{from} -> {}", session.stage());
    }

    let report = comparison_report(&session)?;
    println!("ATE_pre {}, ATE_post {:.4}", report.ate_pre, report.ate_post);
    println!("{}", report.summary);
    println!("distribution: {}", report.distribution);
    for p in &report.prompts {
        println!("  - {p}");
    }

    let session = session.advance(Payload::Reflection {
        text: "most of the reachable units sit near zero".into(),
    })?;
    let restored = ElicitationSession::from_json(&session.to_json())?;
    assert_eq!(restored, session);
    println!("saved and restored at stage {}, revision {}", restored.stage(), restored.revision());
    Ok(())
}
