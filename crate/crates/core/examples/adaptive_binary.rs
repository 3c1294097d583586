//! Simulating the adaptive binary on held-out datasets: a dispatcher, a
//! performance-model selector, the oracle and fixed versions, with code
//! growth.

use std::collections::BTreeMap;

use mvselect::dispatch::{code_growth, compile_tree, simulate, Selector};
use mvselect::learners::{
    make_dc_labels, make_regression_samples, train_regression_tree, train_tree_classifier,
    PpmModel, RegTreeConfig, Regressor, TreeConfig,
};
use mvselect::repselect::{greedy_select, Constraints};
use mvselect::synthgen::{generate, SynthConfig};

fn main() -> mvselect::Result<()> {
    let mut cfg = SynthConfig::new(8, 400, 2, 6, 17);
    cfg.noise_sigma = 0.05;
    let (train, _) = generate(&cfg)?;
    cfg.sample_seed = Some(18);
    cfg.first_dataset_id = 10_000;
    let (test, _) = generate(&cfg)?;

    let m = train.speedups();
    let reps = greedy_select(&m, 50_000, &Constraints::new(4))?.selected;
    println!("representatives: {reps:?}");

    let tree = train_tree_classifier(&make_dc_labels(&train, &m, &reps)?, &TreeConfig::default())?;
    let spec = compile_tree(&tree)?;

    let mut models = BTreeMap::new();
    for &v in &reps {
        let samples = make_regression_samples(&train, &m, v)?;
        models.insert(
            v,
            Regressor::RegressionTree(train_regression_tree(&samples, &RegTreeConfig::default())?),
        );
    }
    let ppm = PpmModel::new(m.baseline_id(), &reps, models, train.code_sizes())?;

    let train_ids: Vec<_> = m.dataset_ids().to_vec();
    for sel in [
        Selector::Dispatcher(&spec),
        Selector::Ppm(&ppm),
        Selector::Oracle,
        Selector::Fixed(reps[0]),
    ] {
        let r = simulate(&test, sel, &reps, Some(&train_ids))?;
        println!(
            "{:<10} geomean {:.4}  of set oracle {:.4}  of full oracle {:.4}  mispicks {:.3}  comparisons {:.1}",
            r.selector,
            r.geomean_realized,
            r.fraction_of_representative_oracle,
            r.fraction_of_full_oracle,
            r.mispick_rate,
            r.mean_comparisons
        );
    }

    let growth = code_growth(&reps, m.baseline_id(), &train.code_sizes(), 50_000, &spec)?;
    println!(
        "selector {} bytes ({:.3}%), extra versions {} bytes ({:.1}%)",
        growth.selector_bytes,
        100.0 * growth.selector_growth,
        growth.versions_bytes,
        100.0 * growth.multiversioning_growth
    );
    Ok(())
}
