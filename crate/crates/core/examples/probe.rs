// micro-bench: where do the milliseconds go at full dims?
use gail_ee::data::*;
use gail_ee::extractor::*;
use gail_ee::nn::Mode;
use gail_ee::numerics::*;
use gail_ee::trainer::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let config = TrainConfig { epochs: 0, seed: 11, ..TrainConfig::default() };
    let schema = EventSchema::default_ace();
    let (train, _, _) = generate_synthetic_corpus(&default_grammar(), &schema, 5, 24, 1, 1).unwrap();
    let model = build_model(&config, &train).unwrap();
    let sentence = &train.sentences[0];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!("sentence len {}", sentence.len());

    // encode forward
    let t = Instant::now();
    for _ in 0..50 {
        let mut tape = Tape::new();
        let _ = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Eval, &mut rng).unwrap();
    }
    println!("encode fwd: {:.2} ms", t.elapsed().as_secs_f64() * 1000.0 / 50.0);

    // encode + rollout
    let t = Instant::now();
    for _ in 0..50 {
        let mut tape = Tape::new();
        let env = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Eval, &mut rng).unwrap();
        let _ = label_sequence(&model.seq_head, &mut tape, env, &mut ActionChoice::Greedy).unwrap();
    }
    println!("encode+rollout fwd: {:.2} ms", t.elapsed().as_secs_f64() * 1000.0 / 50.0);

    // + q loss + backward
    let t = Instant::now();
    for _ in 0..50 {
        let mut tape = Tape::new();
        let env = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Eval, &mut rng).unwrap();
        let r = label_sequence(&model.seq_head, &mut tape, env, &mut ActionChoice::Greedy).unwrap();
        let targets = vec![0.5; sentence.len()];
        let loss = q_update_loss(&mut tape, r.q_node, &r.actions, &targets).unwrap();
        tape.backward(loss).unwrap();
    }
    println!("encode+rollout+bwd: {:.2} ms", t.elapsed().as_secs_f64() * 1000.0 / 50.0);

    // adam on seq group
    let group = model.seq_group();
    let n: usize = group.iter().map(|p| { let (r, c) = p.shape(); r * c }).sum();
    let t = Instant::now();
    for _ in 0..50 {
        adam_step(&group, 0.001, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
    }
    println!("adam seq group ({} params): {:.2} ms", n, t.elapsed().as_secs_f64() * 1000.0 / 50.0);
    let t = Instant::now();
    for _ in 0..50 {
        zero_grads(&group);
    }
    println!("zero_grads: {:.2} ms", t.elapsed().as_secs_f64() * 1000.0 / 50.0);

    // raw matmul checks
    let a = Tensor::full(8, 500, 0.1);
    let b = Tensor::full(500, 1024, 0.1);
    let t = Instant::now();
    for _ in 0..200 {
        let mut tape = Tape::new();
        let a = tape.constant(a.clone());
        let b = tape.constant(b.clone());
        let _ = tape.matmul(a, b).unwrap();
    }
    println!("matmul 8x500x1024: {:.3} ms ({:.1} GFLOP/s)", t.elapsed().as_secs_f64() * 1000.0 / 200.0,
        2.0 * 8.0 * 500.0 * 1024.0 * 200.0 / t.elapsed().as_secs_f64() / 1e9);
    let a = Tensor::full(1, 562, 0.1);
    let b = Tensor::full(562, 1024, 0.1);
    let t = Instant::now();
    for _ in 0..200 {
        let mut tape = Tape::new();
        let a = tape.constant(a.clone());
        let b = tape.constant(b.clone());
        let _ = tape.matmul(a, b).unwrap();
    }
    println!("matmul 1x562x1024: {:.3} ms ({:.1} GFLOP/s)", t.elapsed().as_secs_f64() * 1000.0 / 200.0,
        2.0 * 562.0 * 1024.0 * 200.0 / t.elapsed().as_secs_f64() / 1e9);
}
