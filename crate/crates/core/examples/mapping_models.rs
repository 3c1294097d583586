//! Training the dataset-to-version mapping: direct classifiers and
//! per-version performance predictors, scored by 10-fold cross validation.

use mvselect::learners::{
    cross_validate, make_dc_labels, make_regression_samples, train_rule_list,
    train_tree_classifier, CvData, LearnerSpec, RegTreeConfig, RuleConfig, TreeConfig,
};
use mvselect::repselect::{greedy_select, Constraints};
use mvselect::synthgen::{generate, SynthConfig};

fn main() -> mvselect::Result<()> {
    let mut cfg = SynthConfig::new(6, 300, 2, 5, 8);
    cfg.noise_sigma = 0.02;
    let (scenario, _) = generate(&cfg)?;
    let m = scenario.speedups();
    let reps = greedy_select(&m, 20_000, &Constraints::new(5))?.selected;

    let labeled = make_dc_labels(&scenario, &m, &reps)?;
    let tree = train_tree_classifier(&labeled, &TreeConfig::default())?;
    println!("tree: {} leaves, depth {}", tree.leaf_count(), tree.depth());
    let pruned = train_tree_classifier(
        &labeled,
        &TreeConfig {
            prune: true,
            ..TreeConfig::default()
        },
    )?;
    println!("pruned tree: {} leaves", pruned.leaf_count());
    let rules = train_rule_list(&labeled, &RuleConfig::default())?;
    println!("rule list ({} rules):", rules.rules.len());
    for r in rules.rules.iter().take(4) {
        let conds: Vec<String> = r.conditions.iter().map(|c| c.to_string()).collect();
        println!("  if {} then v{}", conds.join(" and "), r.label);
    }

    for learner in [
        LearnerSpec::Tree(TreeConfig::default()),
        LearnerSpec::Rules(RuleConfig::default()),
    ] {
        let cv = cross_validate(&learner, CvData::Classification(&labeled), 10, 1)?;
        println!(
            "{} 10-fold error rate: {:.4}",
            learner.name(),
            cv.aggregate.unwrap()
        );
    }
    for &v in &reps {
        let samples = make_regression_samples(&scenario, &m, v)?;
        for learner in [
            LearnerSpec::Regtree(RegTreeConfig::default()),
            LearnerSpec::Linreg,
        ] {
            let cv = cross_validate(&learner, CvData::Regression(&samples), 10, 1)?;
            match cv.aggregate {
                Some(e) => println!("v{v} {} RRSE {e:.1}%", learner.name()),
                None => println!("v{v} {} RRSE undefined", learner.name()),
            }
        }
    }
    Ok(())
}
