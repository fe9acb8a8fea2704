// Applies every augmentation method to one synthetic window and prints
// a short summary of each result.

use stockaug::augment::{apply, AugmentParams, AugmentSpec, Method};
use stockaug::{Result, RngStream, Series};

pub fn run_example() -> Result<Vec<(String, Series)>> {
    let x = Series::new((0..240).map(|t| (t as f64 / 12.0).sin() + 0.002 * t as f64).collect())?;
    let peer = Series::new((0..240).map(|t| (t as f64 / 10.0).sin()).collect())?;
    let params = AugmentParams::default();
    let names = [
        "none", "magnify", "reverse", "jitter", "pool", "quantize", "convolve", "time_warp", "spawner",
        "magnify+time_warp",
    ];
    let root = RngStream::new(2024);
    let mut out = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let spec = AugmentSpec {
            method: Method::from_name(name, &params)?,
            rng: root.derive(i as u64),
        };
        let y = apply(&spec, &x, &|_| Ok(peer.clone()))?;
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{name:>18}  len {:3}  first {:+.3}  last {:+.3}  mean {:+.3}  range [{lo:+.3}, {hi:+.3}]",
            y.len(),
            y.first(),
            y.last(),
            mean
        );
        out.push((name.to_string(), y));
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
