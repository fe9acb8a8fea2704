// Loads the built-in presets, overrides a few keys from TOML text and
// prints the resulting configuration.

use stockaug::config::{parse_config, preset, to_toml};
use stockaug::Result;

pub fn run_example() -> Result<String> {
    let desk = preset("desk")?;
    println!("desk preset: {} specs, window {}", desk.spec_names().len(), desk.splits.window_length);
    let custom = parse_config(
        r#"
        seed = 42
        specs = ["spawner", "magnify+time_warp"]
        universe = { top_k = 50 }
        [backtest]
        mode = "long_only"
        "#,
    )?;
    let text = to_toml(&custom)?;
    println!("{text}");
    match parse_config("[augment]\njitterr = 0.02\n") {
        Err(e) => println!("rejected as expected:\n{e}"),
        Ok(_) => unreachable!("misspelled keys are rejected"),
    }
    Ok(text)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
