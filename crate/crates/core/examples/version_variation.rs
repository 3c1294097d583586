//! How much performance a single version leaves on the table.
//!
//! Generates a scenario with a planted winner per feature region and
//! compares the best single version against the per-dataset oracle.

use std::collections::BTreeMap;

use mvselect::repselect::evaluate_set;
use mvselect::synthgen::{generate, SynthConfig};

fn main() -> mvselect::Result<()> {
    let mut cfg = SynthConfig::new(6, 400, 2, 5, 11);
    cfg.noise_sigma = 0.03;
    let (scenario, truth) = generate(&cfg)?;
    let m = scenario.speedups();

    let mut wins: BTreeMap<_, usize> = BTreeMap::new();
    for d in 0..m.n_datasets() {
        let best = (0..m.n_versions())
            .max_by(|&a, &b| m.speedup(d, a).total_cmp(&m.speedup(d, b)))
            .unwrap();
        *wins.entry(m.version_ids()[best]).or_default() += 1;
    }
    println!("datasets won per version:");
    for (v, n) in &wins {
        println!("  v{v}: {n}");
    }

    let full = evaluate_set(&m, &m.candidate_ids())?;
    println!("oracle geomean speedup: {:.4}", full.oracle_geomean);
    for v in m.candidate_ids() {
        let one = evaluate_set(&m, &[v])?;
        println!(
            "  only v{v}: geomean {:.4}, worst slowdown vs oracle {:.1}%",
            one.geomean_speedup,
            100.0 * one.max_loss
        );
    }
    println!("planted winners by region: {:?}", truth.winners);
    Ok(())
}
