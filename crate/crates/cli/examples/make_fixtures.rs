//! Regenerates the CLI test fixtures:
//!
//! * `small_x.csv`, `small_y.csv`: a seeded Gaussian pair with p = 3, n = (6, 6);
//! * `small_golden.json`: the explicit-route report for that pair;
//! * optionally (`--panel DIR`) a synthetic 235 × 522 and 153 × 522 pair for
//!   smoke tests of the split protocol. The panel is synthetic data only.
//!
//! Run with `cargo run -p hdcov-cli --example make_fixtures -- [--panel DIR]`.

use std::fs::File;
use std::path::{Path, PathBuf};

use hdcov::oracle::brute_force_report;
use hdcov::rng::stream;
use hdcov::sim::{gen_innovation, Innovation};
use hdcov::SampleBlock;
use hdcov_cli::io::write_sample;

const FIXTURE_SEED: u64 = 20_240_611;

fn block(n: usize, p: usize, index: u64) -> SampleBlock {
    SampleBlock::new(n, p, gen_innovation(Innovation::Normal, n * p, &mut stream(FIXTURE_SEED, index))).unwrap()
}

fn write(path: &Path, block: &SampleBlock, header: Option<&[String]>) {
    write_sample(File::create(path).unwrap(), block, header).unwrap();
    println!("wrote {}", path.display());
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let header: Vec<String> = (1..=3).map(|k| format!("v{k}")).collect();
    let x = block(6, 3, 0);
    let y = block(6, 3, 1).scaled(1.5);
    write(&dir.join("small_x.csv"), &x, Some(&header));
    write(&dir.join("small_y.csv"), &y, Some(&header));
    let golden = brute_force_report(&x, &y, true).unwrap();
    std::fs::write(dir.join("small_golden.json"), serde_json::to_string_pretty(&golden).unwrap() + "\n").unwrap();
    println!("wrote small_golden.json");

    let args: Vec<String> = std::env::args().collect();
    if let Some(i) = args.iter().position(|a| a == "--panel") {
        let out = PathBuf::from(args.get(i + 1).expect("--panel needs a directory"));
        write(&out.join("panel_a.csv"), &synthetic_panel(235, 522, 10), None);
        write(&out.join("panel_b.csv"), &synthetic_panel(153, 522, 11), None);
    }
}

/// Rows are units and columns are days: an AR(1) path per unit with a shared
/// common factor, so the columns are strongly correlated.
pub fn synthetic_panel(n: usize, p: usize, index: u64) -> SampleBlock {
    let mut rng = stream(FIXTURE_SEED, index);
    let common = gen_innovation(Innovation::Normal, p, &mut rng);
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let shocks = gen_innovation(Innovation::T5, p, &mut rng);
        let mut level = 0.0;
        for k in 0..p {
            level = 0.9 * level + shocks[k] + 0.5 * common[k];
            data.push(level);
        }
    }
    SampleBlock::new(n, p, data).unwrap()
}
