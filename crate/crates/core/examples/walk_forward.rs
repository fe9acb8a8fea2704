// Walk-forward preparation on a synthetic panel: splits, standardization,
// labels and window counts.

use stockaug::pipeline::{make_splits, prepare_split, synth_panel, SplitPlan, SynthParams, Universe};
use stockaug::{Result, RngStream};

pub fn run_example() -> Result<usize> {
    let params = SynthParams {
        n_stocks: 20,
        ..SynthParams::default()
    };
    let panel = synth_panel(&params, &RngStream::new(1))?;
    let plan = SplitPlan::desk();
    let splits = make_splits(panel.n_days(), &plan)?;
    println!("{} stocks x {} days -> {} splits", panel.n_stocks(), panel.n_days(), splits.len());
    let mut total = 0;
    for split in &splits {
        let p = prepare_split(&panel, split, &plan, Universe::TopK(10))?;
        let ups = p.windows.train.iter().filter(|w| w.label == 1).count();
        println!(
            "split {}: train days {:?}, test days {:?}, mu {:+.5}, sigma {:.5}, {} train windows ({:.1}% up), {} test windows",
            split.index,
            split.train,
            split.test,
            p.standardizer.mu_train,
            p.standardizer.sigma_train,
            p.windows.train.len(),
            100.0 * ups as f64 / p.windows.train.len() as f64,
            p.windows.test.len()
        );
        total += p.windows.train.len();
    }
    Ok(total)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
