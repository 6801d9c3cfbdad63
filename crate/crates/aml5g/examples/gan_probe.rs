use aml5g::neural::{train_gan, GanPair, TrainConfig, Mode};
use aml5g::StreamFactory;
use ndarray::{Array2, Axis};
use rand_distr::{Distribution, Normal};

fn main() {
    let mut target = vec![0.0f64; 400];
    for (i, v) in target.iter_mut().enumerate() {
        *v = if i % 2 == 0 { 0.8 } else { -0.3 };
    }
    let p: f64 = target.chunks(2).map(|c| c[0]*c[0]+c[1]*c[1]).sum::<f64>() / 200.0;
    for v in target.iter_mut() {
        *v /= p.sqrt();
    }
    let real = Array2::from_shape_fn((256, 400), |(_, j)| target[j]);
    // continuous long run, inspect at checkpoints by retrain-to-k (cheap enough)
    for lr in [1e-3f64, 2e-3] {
    for steps in [1000usize, 2000] {
        let mut rng = StreamFactory::new(56).stream("gan");
        let pair = GanPair::new(&mut rng).unwrap();
        let cfg = TrainConfig { n_steps: steps, batch_size: 64, learning_rate: lr, seed: 57, ..TrainConfig::default() };
        let (trained, hist) = train_gan(pair, &real, &cfg).unwrap();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut zr = StreamFactory::new(58).stream("z");
        let z = Array2::from_shape_fn((64, 400), |_| normal.sample(&mut zr));
        let (mut rows, _) = trained.generator.forward(&z, Mode::Eval, &mut rng).unwrap();
        for mut row in rows.rows_mut() {
            let p: f64 = row.iter().map(|v| v * v).sum::<f64>() / 200.0;
            if p > 0.0 {
                let sc = 1.0 / p.sqrt();
                row.mapv_inplace(|v| v * sc);
            }
        }
        let mean = rows.mean_axis(Axis(0)).unwrap();
        let dist: f64 = mean.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        // per-row spread
        let spread: f64 = rows.rows().into_iter().map(|r| {
            r.iter().zip(&mean).map(|(a,b)| (a-b)*(a-b)).sum::<f64>().sqrt()
        }).sum::<f64>() / 64.0;
        let dacc: f64 = hist.d_accuracy[steps-100..].iter().sum::<f64>() / 100.0;
        println!("lr {:7} steps {:5}: dist {:7.3} spread {:6.3} d_acc(end) {:.3}", lr, steps, dist, spread, dacc);
    }
    }
}
