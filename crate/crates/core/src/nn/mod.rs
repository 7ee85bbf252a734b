//! Neural building blocks: embedding tables with the OOV-dropout scheme,
//! LSTM cells, and feed-forward stacks. All of them record onto the
//! numerics tape.

mod embedding;
mod feedforward;
mod lstm;

pub use embedding::{embed_tokens, DropoutPolicy, EmbeddingTable, Mode, PretrainedEmbeddings};
pub use feedforward::{FeedForward, OutputActivation};
pub use lstm::{bilstm_forward, lstm_forward, LstmCell, RecordedCell};

use rand::Rng;

use crate::numerics::Tensor;

/// Uniform init in (-limit, limit).
pub fn init_uniform_range(rows: usize, cols: usize, limit: f64, rng: &mut impl Rng) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect();
    Tensor::from_vec(rows, cols, data).expect("size matches")
}

/// Uniform init in (-0.08, 0.08).
pub fn init_uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    init_uniform_range(rows, cols, 0.08, rng)
}

/// Fan-balanced uniform init for weight matrices. At desk-scale corpus
/// sizes a flat small range leaves every layer's output nearly constant
/// and training stalls for many epochs; scaling by fan keeps early
/// activations informative.
pub fn init_xavier(fan_in: usize, fan_out: usize, rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    init_uniform_range(rows, cols, limit, rng)
}

/// Embedding rows start in (-0.5, 0.5) so token identities are separable
/// from the first epoch.
pub const EMBEDDING_INIT_LIMIT: f64 = 0.5;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_vocab, test_sentence, Corpus, EventSchema, Split};
    use crate::numerics::{finite_difference_check, Parameter, Tape, Tensor};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn tiny_world(
        n_tokens: usize,
        dims: (usize, usize, usize),
        seed: u64,
    ) -> (Corpus, crate::data::Vocab, EmbeddingTable, EmbeddingTable, PretrainedEmbeddings) {
        let mut s = test_sentence(n_tokens);
        for (i, tok) in s.tokens.iter_mut().enumerate() {
            tok.surface = format!("tok{}", i % 50);
            tok.pos = if i % 2 == 0 { "NN".to_string() } else { "VB".to_string() };
        }
        let corpus = Corpus { sentences: vec![s], schema: EventSchema::default_ace(), split: Split::Train };
        let vocab = build_vocab(&corpus);
        let mut r = rng(seed);
        let surface = EmbeddingTable::new("surface", vocab.surface_size(), dims.0, &mut r);
        let pos = EmbeddingTable::new("pos", vocab.pos_size(), dims.1, &mut r);
        let mut pretrained = PretrainedEmbeddings::new(dims.2);
        for i in 0..50 {
            pretrained.insert(format!("tok{i}"), (0..dims.2).map(|d| 0.1 + d as f64 + i as f64).collect());
        }
        (corpus, vocab, surface, pos, pretrained)
    }

    #[test]
    fn embed_concatenates_to_500_columns_at_paper_dims() {
        let (corpus, vocab, surface, pos, pretrained) = tiny_world(3, (200, 100, 200), 0);
        let mut tape = Tape::new();
        let out = embed_tokens(
            &corpus.sentences[0],
            &vocab,
            &surface,
            &pos,
            &pretrained,
            DropoutPolicy { rate: 0.0 },
            Mode::Eval,
            &mut rng(1),
            &mut tape,
        )
        .unwrap();
        assert_eq!(tape.value(out).shape(), (3, 500));
    }

    #[test]
    fn embed_without_dropout_is_deterministic() {
        let (corpus, vocab, surface, pos, pretrained) = tiny_world(5, (4, 3, 2), 0);
        let run = |seed| {
            let mut tape = Tape::new();
            let out = embed_tokens(
                &corpus.sentences[0],
                &vocab,
                &surface,
                &pos,
                &pretrained,
                DropoutPolicy { rate: 0.0 },
                Mode::Train,
                &mut rng(seed),
                &mut tape,
            )
            .unwrap();
            tape.value(out).clone()
        };
        assert_eq!(run(1), run(2));
    }

    #[test]
    fn embed_rejects_empty_sentence() {
        let (_, vocab, surface, pos, pretrained) = tiny_world(2, (4, 3, 2), 0);
        let empty = test_sentence(0);
        let mut tape = Tape::new();
        let result = embed_tokens(
            &empty,
            &vocab,
            &surface,
            &pos,
            &pretrained,
            DropoutPolicy { rate: 0.0 },
            Mode::Eval,
            &mut rng(1),
            &mut tape,
        );
        assert!(result.is_err());
    }

    #[test]
    fn dropout_masks_at_the_configured_rate() {
        let dims = (6, 3, 4);
        let (corpus, vocab, surface, pos, pretrained) = tiny_world(10_000, dims, 0);
        let mut tape = Tape::new();
        let out = embed_tokens(
            &corpus.sentences[0],
            &vocab,
            &surface,
            &pos,
            &pretrained,
            DropoutPolicy { rate: 0.05 },
            Mode::Train,
            &mut rng(9),
            &mut tape,
        )
        .unwrap();
        let out = tape.value(out);
        let oov_row = surface.row(crate::data::OOV_ID).value();
        let mut oov_count = 0usize;
        let mut zeroed_pretrained = 0usize;
        for t in 0..10_000 {
            let row = out.row(t);
            if row[..dims.0] == *oov_row.data() {
                oov_count += 1;
            }
            if row[dims.0 + dims.1..].iter().all(|&v| v == 0.0) {
                zeroed_pretrained += 1;
            }
        }
        let oov_rate = oov_count as f64 / 10_000.0;
        let zero_rate = zeroed_pretrained as f64 / 10_000.0;
        assert!((oov_rate - 0.05).abs() <= 0.01, "oov rate {oov_rate}");
        assert!((zero_rate - 0.05).abs() <= 0.01, "pretrained zero rate {zero_rate}");
    }

    #[test]
    fn pos_slice_is_never_masked() {
        let dims = (4, 3, 2);
        let (corpus, vocab, surface, pos, pretrained) = tiny_world(200, dims, 0);
        let mut tape = Tape::new();
        let out = embed_tokens(
            &corpus.sentences[0],
            &vocab,
            &surface,
            &pos,
            &pretrained,
            DropoutPolicy { rate: 0.95 },
            Mode::Train,
            &mut rng(4),
            &mut tape,
        )
        .unwrap();
        let out = tape.value(out);
        for (t, token) in corpus.sentences[0].tokens.iter().enumerate() {
            let expected = pos.row(vocab.pos_id(&token.pos).unwrap()).value();
            assert_eq!(&out.row(t)[dims.0..dims.0 + dims.1], expected.data());
        }
    }

    #[test]
    fn lstm_zero_weights_and_inputs_give_zero_hidden() {
        let mut r = rng(0);
        let cell = LstmCell::new("cell", 3, 4, &mut r);
        for p in cell.params() {
            let (rows, cols) = p.shape();
            p.set_value(Tensor::zeros(rows, cols)).unwrap();
        }
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(2, 3));
        let h0 = tape.constant(Tensor::zeros(1, 4));
        let c0 = tape.constant(Tensor::zeros(1, 4));
        let hs = lstm_forward(&cell, &mut tape, x, h0, c0).unwrap();
        for h in hs {
            assert!(tape.value(h).data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn lstm_single_step_shape() {
        let mut r = rng(1);
        let cell = LstmCell::new("cell", 3, 5, &mut r);
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::full(1, 3, 0.2));
        let h0 = tape.constant(Tensor::zeros(1, 5));
        let c0 = tape.constant(Tensor::zeros(1, 5));
        let hs = lstm_forward(&cell, &mut tape, x, h0, c0).unwrap();
        assert_eq!(hs.len(), 1);
        assert_eq!(tape.value(hs[0]).shape(), (1, 5));
    }

    #[test]
    fn lstm_is_causal() {
        let mut r = rng(2);
        let cell = LstmCell::new("cell", 3, 4, &mut r);
        let base = init_uniform(4, 3, &mut r);
        let mut perturbed = base.clone();
        perturbed.set(2, 1, perturbed.get(2, 1) + 1.0); // change input at step 3

        let run = |input: &Tensor| {
            let mut tape = Tape::new();
            let x = tape.constant(input.clone());
            let h0 = tape.constant(Tensor::zeros(1, 4));
            let c0 = tape.constant(Tensor::zeros(1, 4));
            let hs = lstm_forward(&cell, &mut tape, x, h0, c0).unwrap();
            hs.iter().map(|&h| tape.value(h).clone()).collect::<Vec<_>>()
        };
        let a = run(&base);
        let b = run(&perturbed);
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
        assert_ne!(a[2], b[2]);
    }

    #[test]
    fn bilstm_doubles_hidden_width_at_paper_size() {
        let mut r = rng(3);
        let fwd = LstmCell::new("fwd", 8, 256, &mut r);
        let bwd = LstmCell::new("bwd", 8, 256, &mut r);
        let mut tape = Tape::new();
        let x = tape.constant(init_uniform(4, 8, &mut r));
        let out = bilstm_forward(&fwd, &bwd, &mut tape, x).unwrap();
        assert_eq!(tape.value(out).shape(), (4, 512));
    }

    #[test]
    fn bilstm_palindrome_symmetry_with_tied_cells() {
        let mut r = rng(4);
        let cell = LstmCell::new("tied", 3, 4, &mut r);
        let a = vec![0.3, -0.2, 0.9];
        let b = vec![-0.5, 0.1, 0.4];
        let mut data = a.clone();
        data.extend(&b);
        data.extend(&a);
        let input = Tensor::from_vec(3, 3, data).unwrap();
        let mut tape = Tape::new();
        let x = tape.constant(input);
        let out = bilstm_forward(&cell, &cell, &mut tape, x).unwrap();
        let out = tape.value(out);
        // reversing the rows while swapping the direction halves is a no-op
        // on a palindrome with tied weights
        let h = 4;
        for t in 0..3 {
            let row = out.row(t);
            let mirror = out.row(2 - t);
            assert_eq!(&row[..h], &mirror[h..]);
            assert_eq!(&row[h..], &mirror[..h]);
        }
    }

    #[test]
    fn bilstm_single_token_sees_same_input_from_both_sides() {
        let mut r = rng(5);
        let cell = LstmCell::new("tied", 3, 4, &mut r);
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::from_vec(1, 3, vec![0.2, -0.7, 0.5]).unwrap());
        let out = bilstm_forward(&cell, &cell, &mut tape, x).unwrap();
        let row = tape.value(out).row(0).to_vec();
        assert_eq!(&row[..4], &row[4..]);
    }

    #[test]
    fn bilstm_has_full_receptive_field() {
        let mut r = rng(6);
        let fwd = LstmCell::new("fwd", 2, 3, &mut r);
        let bwd = LstmCell::new("bwd", 2, 3, &mut r);
        let base = init_uniform(3, 2, &mut r);
        let run = |input: &Tensor| {
            let mut tape = Tape::new();
            let x = tape.constant(input.clone());
            let out = bilstm_forward(&fwd, &bwd, &mut tape, x).unwrap();
            tape.value(out).clone()
        };
        let reference = run(&base);
        for j in 0..3 {
            let mut perturbed = base.clone();
            perturbed.set(j, 0, perturbed.get(j, 0) + 0.5);
            let changed = run(&perturbed);
            for t in 0..3 {
                assert_ne!(reference.row(t), changed.row(t), "row {t} blind to input {j}");
            }
        }
    }

    #[test]
    fn ff_identity_layer_passes_input_through() {
        let mut r = rng(7);
        let ff = FeedForward::new("ff", &[3, 3], OutputActivation::None, &mut r);
        let params = ff.params();
        let mut eye = Tensor::zeros(3, 3);
        for i in 0..3 {
            eye.set(i, i, 1.0);
        }
        params[0].set_value(eye).unwrap();
        params[1].set_value(Tensor::zeros(1, 3)).unwrap();
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::from_vec(2, 3, vec![1.0, 2.0, 3.0, -1.0, 0.5, 0.0]).unwrap());
        let y = ff.forward(&mut tape, x).unwrap();
        assert_eq!(tape.value(y), tape.value(x));
    }

    #[test]
    fn ff_zero_weights_softmax_is_uniform() {
        let mut r = rng(8);
        let ff = FeedForward::new("ff", &[4, 5], OutputActivation::Softmax, &mut r);
        for p in ff.params() {
            let (rows, cols) = p.shape();
            p.set_value(Tensor::zeros(rows, cols)).unwrap();
        }
        let mut tape = Tape::new();
        let x = tape.constant(init_uniform(2, 4, &mut r));
        let y = ff.forward(&mut tape, x).unwrap();
        for row in 0..2 {
            for &v in tape.value(y).row(row) {
                assert!((v - 0.2).abs() < 1e-12);
            }
            let sum: f64 = tape.value(y).row(row).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lstm_cell_single_step_gradcheck() {
        let mut r = rng(10);
        let cell = LstmCell::new("cell", 3, 4, &mut r);
        let x_val = init_uniform(1, 3, &mut r);
        for param in cell.params() {
            let cell_ref = &cell;
            let x_val = x_val.clone();
            let err = finite_difference_check(
                move |tape| {
                    let x = tape.constant(x_val.clone());
                    let h0 = tape.constant(Tensor::zeros(1, 4));
                    let c0 = tape.constant(Tensor::zeros(1, 4));
                    let (h, c) = cell_ref.step(tape, x, h0, c0)?;
                    let hh = tape.mul(h, h)?;
                    let cc = tape.mul(c, c)?;
                    let hs = tape.sum(hh);
                    let cs = tape.sum(cc);
                    tape.add(hs, cs)
                },
                &param,
                1e-5,
            )
            .unwrap();
            assert!(err < 1e-4, "{}: relative error {err}", param.name());
        }
    }

    #[test]
    fn bilstm_gradcheck() {
        let mut r = rng(11);
        let fwd = LstmCell::new("fwd", 2, 3, &mut r);
        let bwd = LstmCell::new("bwd", 2, 3, &mut r);
        let input = init_uniform(3, 2, &mut r);
        let weights = init_uniform(3, 6, &mut r);
        for param in fwd.params().into_iter().chain(bwd.params()) {
            let (fwd, bwd, input, weights) = (&fwd, &bwd, input.clone(), weights.clone());
            let err = finite_difference_check(
                move |tape| {
                    let x = tape.constant(input.clone());
                    let out = bilstm_forward(fwd, bwd, tape, x)?;
                    let w = tape.constant(weights.clone());
                    let weighted = tape.mul(out, w)?;
                    Ok(tape.sum(weighted))
                },
                &param,
                1e-5,
            )
            .unwrap();
            assert!(err < 1e-4, "{}: relative error {err}", param.name());
        }
    }

    #[test]
    fn embedding_rows_gradcheck() {
        let (corpus, vocab, surface, pos, pretrained) = tiny_world(4, (3, 2, 2), 12);
        let mix = init_uniform(7, 2, &mut rng(13));
        let sentence = &corpus.sentences[0];
        let checked: Vec<Parameter> = vec![
            surface.row(vocab.surface_id("tok0")).clone(),
            surface.row(vocab.surface_id("tok1")).clone(),
            pos.row(vocab.pos_id("NN").unwrap()).clone(),
        ];
        for param in checked {
            let (vocab, surface, pos, pretrained, mix) =
                (&vocab, &surface, &pos, &pretrained, mix.clone());
            let err = finite_difference_check(
                move |tape| {
                    let mut r = rng(0);
                    let out = embed_tokens(
                        sentence,
                        vocab,
                        surface,
                        pos,
                        pretrained,
                        DropoutPolicy { rate: 0.0 },
                        Mode::Eval,
                        &mut r,
                        tape,
                    )?;
                    let w = tape.constant(mix.clone());
                    let proj = tape.matmul(out, w)?;
                    let t = tape.tanh(proj);
                    Ok(tape.sum(t))
                },
                &param,
                1e-5,
            )
            .unwrap();
            assert!(err < 1e-4, "{}: relative error {err}", param.name());
        }
    }
}
