//! Reward providers: the fixed ±1 baseline and the adversarial
//! discriminator bank that rescales D(s, a) into rewards in (-1, 1).

mod bank;
mod discriminator;
mod reward;

pub use bank::{update_discriminators, BankDims, DiscriminatorBank, SampleBuffers, TaskBuffer};
pub use discriminator::{discriminator_loss, gail_reward, gail_rewards, Discriminator, Sample};
pub use reward::FixedRewardProvider;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EventSchema;
    use crate::numerics::{
        adam_step, finite_difference_check, zero_grads, Tape, Tensor, ADAM_BETA1, ADAM_BETA2,
        ADAM_EPS,
    };
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn zeroed(disc: &Discriminator) {
        for p in disc.params() {
            let (r, c) = p.shape();
            p.set_value(Tensor::zeros(r, c)).unwrap();
        }
    }

    #[test]
    fn zero_weight_discriminator_outputs_half() {
        let disc = Discriminator::new("d", 6, 4, 17, &mut rng(0));
        zeroed(&disc);
        let values = disc.d_values(&vec![0.3; 6]).unwrap();
        assert_eq!(values.len(), 17);
        assert!(values.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn outputs_stay_strictly_inside_unit_interval() {
        let disc = Discriminator::new("d", 5, 8, 7, &mut rng(1));
        let mut r = rng(2);
        for _ in 0..50 {
            let state: Vec<f64> = (0..5).map(|_| rand::Rng::gen_range(&mut r, -3.0..3.0)).collect();
            for v in disc.d_values(&state).unwrap() {
                assert!(v > 0.0 && v < 1.0);
            }
        }
    }

    #[test]
    fn reward_rescaling() {
        let disc = Discriminator::new("d", 4, 4, 3, &mut rng(3));
        zeroed(&disc);
        // D = 0.5 everywhere -> reward exactly 0 for every action
        for a in 0..3 {
            assert_eq!(gail_reward(&disc, &[0.1, 0.2, -0.5, 1.0], a).unwrap(), 0.0);
        }
        // biasing an output to sigmoid(ln 3) = 0.75 gives reward 0.5
        let params = disc.params();
        let bias = &params[3]; // second layer bias
        let mut b = bias.value();
        b.set(0, 1, 3.0f64.ln());
        bias.set_value(b).unwrap();
        let r = gail_reward(&disc, &[0.1, 0.2, -0.5, 1.0], 1).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn loss_arithmetic_at_fixed_d_values() {
        let disc = Discriminator::new("d", 2, 3, 2, &mut rng(4));
        zeroed(&disc);
        let expert = vec![Sample { state: vec![0.0, 0.0], action: 0 }];
        let agent = vec![Sample { state: vec![0.0, 0.0], action: 1 }];

        // D = 0.5 on both sides: loss = 2 ln 2
        let mut tape = Tape::new();
        let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, 0.0, None).unwrap();
        let value = tape.value(loss).scalar_value().unwrap();
        assert!((value - 2.0 * 2.0f64.ln()).abs() < 1e-12);

        // biases give D(expert action) = 0.8, D(agent action) = 0.3:
        // loss = -[ln 0.8 + ln 0.7] ~ 0.5798
        let params = disc.params();
        let bias = &params[3];
        let mut b = bias.value();
        b.set(0, 0, 4.0f64.ln());
        b.set(0, 1, (0.3f64 / 0.7).ln());
        bias.set_value(b).unwrap();
        let mut tape = Tape::new();
        let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, 0.0, None).unwrap();
        let value = tape.value(loss).scalar_value().unwrap();
        assert!((value - 0.5798).abs() < 1e-4, "{value}");

        // a confident discriminator drives the loss toward 0
        let mut b = bias.value();
        b.set(0, 0, 20.0);
        b.set(0, 1, -20.0);
        bias.set_value(b).unwrap();
        let mut tape = Tape::new();
        let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, 0.0, None).unwrap();
        assert!(tape.value(loss).scalar_value().unwrap() < 1e-3);
    }

    #[test]
    fn empty_expert_batch_rejected() {
        let disc = Discriminator::new("d", 2, 3, 2, &mut rng(5));
        let agent = vec![Sample { state: vec![0.0, 0.0], action: 1 }];
        let mut tape = Tape::new();
        assert!(discriminator_loss(&mut tape, &disc, &[], &agent, 0.0, None).is_err());
    }

    #[test]
    fn entropy_term_shifts_loss_by_weighted_mean_entropy() {
        let disc = Discriminator::new("d", 2, 3, 4, &mut rng(6));
        let expert = vec![Sample { state: vec![0.5, -0.5], action: 2 }];
        let agent = vec![Sample { state: vec![0.5, -0.5], action: 0 }];
        let uniform = vec![vec![0.25; 4]];
        let value = |w: f64, dists: Option<&[Vec<f64>]>| {
            let mut tape = Tape::new();
            let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, w, dists).unwrap();
            tape.value(loss).scalar_value().unwrap()
        };
        let base = value(0.0, Some(&uniform));
        let shifted = value(0.01, Some(&uniform));
        assert!((shifted - (base - 0.01 * 4.0f64.ln())).abs() < 1e-12);
        // masked zero-probability entries contribute nothing
        let masked = vec![vec![0.5, 0.5, 0.0, 0.0]];
        let shifted = value(0.01, Some(&masked));
        assert!((shifted - (base - 0.01 * 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn bank_indexes_argument_discriminators_by_event_type() {
        let schema = EventSchema::default_ace();
        let dims = BankDims {
            seq_state_width: 8,
            n_bio_labels: 17,
            trigger_state_width: 16,
            argument_state_width: 20,
            hidden: 4,
        };
        let bank = DiscriminatorBank::new(&schema, &dims, &mut rng(7));
        assert_eq!(bank.argument.len(), 33);

        let first = bank.select_argument(&schema, &schema.event_types[0]).unwrap();
        assert!(std::ptr::eq(first, &bank.argument[0]));

        // one distinct parameter set per event type
        let mut names: Vec<String> = bank.argument.iter().map(|d| d.params()[0].name()).collect();
        names.dedup();
        assert_eq!(names.len(), 33);

        assert!(bank.select_argument(&schema, "None").is_err());
        assert!(bank.select_argument(&schema, "NotAType").is_err());
    }

    #[test]
    fn update_is_noop_on_empty_buffers_and_never_touches_other_params() {
        let schema = EventSchema::default_ace();
        let dims = BankDims {
            seq_state_width: 4,
            n_bio_labels: 3,
            trigger_state_width: 8,
            argument_state_width: 10,
            hidden: 4,
        };
        let bank = DiscriminatorBank::new(&schema, &dims, &mut rng(8));
        let buffers = SampleBuffers::new(schema.event_types.len());
        let losses = update_discriminators(&bank, &buffers, 0.001, 0.01).unwrap();
        assert!(losses.is_empty());

        // an outside parameter (stand-in for the policy) is untouched by a
        // real update
        let outside = crate::numerics::Parameter::new("policy/w", Tensor::full(2, 2, 0.7));
        let mut buffers = SampleBuffers::new(schema.event_types.len());
        buffers.seq.record(vec![0.1, 0.2, 0.3, 0.4], 0, 1, None);
        buffers.seq.record(vec![-0.1, 0.0, 0.3, 0.9], 2, 2, None);
        let before_bank: Vec<Tensor> = bank.params().iter().map(|p| p.value()).collect();
        let losses = update_discriminators(&bank, &buffers, 0.001, 0.01).unwrap();
        assert_eq!(losses.len(), 1);
        assert_eq!(losses[0].0, "sequence");
        assert_eq!(outside.value(), Tensor::full(2, 2, 0.7));
        assert!(outside.grad().data().iter().all(|&g| g == 0.0));
        // and the sequence discriminator did move
        let after_bank: Vec<Tensor> = bank.params().iter().map(|p| p.value()).collect();
        assert!(before_bank.iter().zip(&after_bank).any(|(a, b)| a != b));
    }

    #[test]
    fn one_step_on_a_separable_batch_reduces_loss() {
        let disc = Discriminator::new("d", 3, 6, 2, &mut rng(9));
        let expert: Vec<Sample> =
            (0..8).map(|i| Sample { state: vec![1.0, 0.5 + 0.01 * i as f64, -1.0], action: 0 }).collect();
        let agent: Vec<Sample> =
            (0..8).map(|i| Sample { state: vec![-1.0, -0.5 - 0.01 * i as f64, 1.0], action: 0 }).collect();
        let loss_value = || {
            let mut tape = Tape::new();
            let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, 0.0, None).unwrap();
            tape.value(loss).scalar_value().unwrap()
        };
        let before = loss_value();
        let params = disc.params();
        zero_grads(&params);
        let mut tape = Tape::new();
        let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, 0.0, None).unwrap();
        tape.backward(loss).unwrap();
        adam_step(&params, 0.001, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
        zero_grads(&params);
        assert!(loss_value() < before);
    }

    #[test]
    fn reward_margin_grows_with_repeated_wrong_actions() {
        // the same wrong action at the same state, update after update: the
        // reward gap (correct - wrong) must widen between k=5 and k=50
        let disc = Discriminator::new("d", 4, 6, 3, &mut rng(10));
        let state = vec![0.4, -0.2, 0.8, 0.1];
        let expert = vec![Sample { state: state.clone(), action: 0 }];
        let agent = vec![Sample { state: state.clone(), action: 1 }];
        let params = disc.params();
        let gap = |disc: &Discriminator| {
            let correct = gail_reward(disc, &state, 0).unwrap();
            let wrong = gail_reward(disc, &state, 1).unwrap();
            correct - wrong
        };
        let mut gap_at_5 = None;
        for k in 1..=50 {
            let mut tape = Tape::new();
            let loss = discriminator_loss(&mut tape, &disc, &expert, &agent, 0.0, None).unwrap();
            zero_grads(&params);
            tape.backward(loss).unwrap();
            adam_step(&params, 0.001, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
            zero_grads(&params);
            if k == 5 {
                gap_at_5 = Some(gap(&disc));
            }
        }
        let gap_at_50 = gap(&disc);
        assert!(
            gap_at_50 > gap_at_5.unwrap(),
            "margin did not grow: {} -> {}",
            gap_at_5.unwrap(),
            gap_at_50
        );
    }

    #[test]
    fn discriminator_loss_gradcheck() {
        let disc = Discriminator::new("d", 3, 4, 2, &mut rng(11));
        let expert = vec![
            Sample { state: vec![0.2, -0.4, 0.6], action: 0 },
            Sample { state: vec![0.8, 0.1, -0.3], action: 1 },
        ];
        let agent = vec![Sample { state: vec![-0.6, 0.5, 0.2], action: 0 }];
        for param in disc.params() {
            let (disc, expert, agent) = (&disc, expert.clone(), agent.clone());
            let err = finite_difference_check(
                move |tape| discriminator_loss(tape, disc, &expert, &agent, 0.01, None),
                &param,
                1e-5,
            )
            .unwrap();
            assert!(err < 1e-4, "{}: relative error {err}", param.name());
        }
    }
}
