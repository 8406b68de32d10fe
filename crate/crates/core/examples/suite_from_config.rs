//! Build a small suite from TOML, run it and write the CSV tables.
//!
//! `cargo run --release --example suite_from_config -- [out_dir]`

use std::path::PathBuf;

use lra_cmaes::config::Config;

const CONFIG: &str = r#"
base_seed = 7
trials = 4
max_evals = 5e4
ecdf_targets = 30

[problems]
names = ["sphere", "ellipsoid", "griewank"]
dims = [5]

[[optimizers]]
kind = "lra"

[[optimizers]]
kind = "plain"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("lra-suite-example"), PathBuf::from);
    let spec = Config::from_toml(CONFIG)?.suite_spec()?;
    let output = spec.run(0);
    output.write_to(&out)?;
    for g in &output.groups {
        println!(
            "{:<32} success {}/{}  SP1 {:>9}  ECDF final {:.2}",
            g.label,
            g.successes,
            g.trials,
            g.sp1.map_or("-".into(), |v| format!("{v:.0}")),
            g.ecdf.final_fraction()
        );
    }
    println!("tables written to {}", out.display());
    Ok(())
}
