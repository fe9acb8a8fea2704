// Trains a logistic baseline and a small LSTM on one split of a synthetic
// panel, then round-trips the LSTM through a checkpoint file.

use stockaug::augment::Sample;
use stockaug::classifier::{accuracy, read_checkpoint, train, write_checkpoint, Architecture, Checkpoint, TrainConfig};
use stockaug::pipeline::{make_splits, prepare_split, synth_panel, train_val_split, SplitPlan, SynthParams, Universe};
use stockaug::{Result, RngStream};

pub fn run_example() -> Result<(f64, f64)> {
    let panel = synth_panel(
        &SynthParams {
            n_stocks: 20,
            n_days: 400,
            ..SynthParams::default()
        },
        &RngStream::new(3),
    )?;
    let plan = SplitPlan {
        split_length: 400,
        stride: 100,
        train_length: 300,
        test_length: 100,
        window_length: 30,
    };
    let split = &make_splits(panel.n_days(), &plan)?[0];
    let p = prepare_split(&panel, split, &plan, Universe::Full)?;
    let samples: Vec<Sample> = p.train_windows().iter().map(|w| w.to_sample()).collect();
    let test: Vec<Sample> = p.test_windows().iter().map(|w| w.to_sample()).collect();
    let (tr, va) = train_val_split(&samples, 0.8, &RngStream::new(4))?;
    let stream = RngStream::new(5);

    let cfg = TrainConfig {
        learning_rate: 0.01,
        max_epochs: 20,
        patience: 3,
        ..TrainConfig::default()
    };
    let (logit, _) = train(Architecture::logistic(30), &tr, &va, &cfg, &stream)?;
    let logit_acc = accuracy(&logit, &test)?;
    println!("logistic: test accuracy {:.1}%", 100.0 * logit_acc);

    let cfg = TrainConfig {
        learning_rate: 0.005,
        max_epochs: 3,
        ..TrainConfig::default()
    };
    let (lstm, log) = train(Architecture::lstm(30, 8), &tr, &va, &cfg, &stream)?;
    for e in &log {
        println!("lstm epoch {}: train {:.4} val {:.4}", e.epoch, e.train_loss, e.val_loss);
    }
    let lstm_acc = accuracy(&lstm, &test)?;
    println!("lstm: test accuracy {:.1}%", 100.0 * lstm_acc);

    let dir = std::env::temp_dir().join(format!("stockaug-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| stockaug::Error::io(&dir, e))?;
    let path = dir.join("model.json");
    write_checkpoint(&Checkpoint::new(lstm.clone(), cfg), &path)?;
    let back = read_checkpoint(&path)?;
    assert_eq!(back.params.weights, lstm.weights);
    println!("checkpoint {} restored bit-exactly", path.display());
    let _ = std::fs::remove_dir_all(&dir);
    Ok((logit_acc, lstm_acc))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
