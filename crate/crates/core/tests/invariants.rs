mod common;

use cavity_zeno::protocols::run_protocol;
use cavity_zeno::{Conditioning, OutcomeLabel, ProtocolKind, SystemParams};
use common::{invariant_failures, random_params, rng};
use rand::Rng;

#[test]
fn propagators_and_channels_keep_states_valid() {
    let failures = invariant_failures(100, 77);
    assert!(
        failures.is_empty(),
        "{} violations, first: {}",
        failures.len(),
        failures[0]
    );
}

#[test]
fn protocol_records_stay_valid() {
    let mut r = rng(3);
    let labels = [OutcomeLabel::ClickG, OutcomeLabel::ClickE, OutcomeLabel::NoClick];
    for _ in 0..100 {
        let kind = ProtocolKind::ALL[r.random_range(0..5)];
        let p = random_params(&mut r)
            .with_n(r.random_range(1..=12))
            .with_p_g(r.random_range(0.0..=1.0))
            .with_p_e(r.random_range(0.0..=1.0));
        let seq: Vec<_> = (0..kind.event_count(p.n))
            .map(|_| labels[r.random_range(0..3)])
            .collect();
        for cond in [
            Conditioning::Unconditioned,
            kind.default_conditioning(),
            Conditioning::Sequence(seq),
        ] {
            let run = run_protocol(&p, kind, &cond).unwrap();
            assert!((0.0..=1.0).contains(&run.probability));
            assert!(run.final_state.diagnostics().is_valid());
            for step in &run.steps {
                assert!(step.pre_state.diagnostics().is_valid());
                assert!((0.0..=1.0).contains(&step.branch_probability));
            }
        }
    }
}

#[test]
fn outcome_probabilities_of_a_record_sum_to_one() {
    let p = SystemParams::new(1e3, 50.0, 1e5).with_n(3).with_p_g(0.7).with_p_e(0.4);
    let labels = [OutcomeLabel::ClickG, OutcomeLabel::ClickE, OutcomeLabel::NoClick];
    for kind in ProtocolKind::ALL {
        let events = kind.event_count(p.n);
        let mut total = 0.0;
        let mut index = vec![0usize; events];
        loop {
            let seq = index.iter().map(|&i| labels[i]).collect();
            total += run_protocol(&p, kind, &Conditioning::Sequence(seq))
                .unwrap()
                .probability;
            let mut pos = 0;
            while pos < events && index[pos] == 2 {
                index[pos] = 0;
                pos += 1;
            }
            if pos == events {
                break;
            }
            index[pos] += 1;
        }
        assert!((total - 1.0).abs() <= 1e-12, "{kind}: records sum to {total}");
    }
}
