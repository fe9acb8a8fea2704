// Aligns two short series with banded DTW, forces the path through an
// anchor, and blends them SPAWNER-style.

use stockaug::augment::{dtw_align, spawner, spawner_average, NoiseScale};
use stockaug::{Result, RngStream, Series};

pub fn run_example() -> Result<f64> {
    let a = [0.0, 1.0, 2.0, 1.0, 0.0, 0.0, 1.0];
    let b = [0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0];
    let free = dtw_align(&a, &b, None, 1.0)?;
    println!("free path cost {}: {:?}", free.cost, free.steps);
    let anchored = dtw_align(&a, &b, Some((3, 3)), 1.0)?;
    println!("through (3, 3) cost {}: {:?}", anchored.cost, anchored.steps);

    let x1 = Series::new(a.to_vec())?;
    let x2 = Series::new(b.to_vec())?;
    println!("average along path: {:?}", spawner_average(&x1, &x2, 3, 1.0)?.as_slice());
    let y = spawner(&x1, &x2, 0.05, NoiseScale::Absolute, 1.0, &RngStream::new(5))?;
    println!("spawned sample:     {:?}", y.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    Ok(anchored.cost - free.cost)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
