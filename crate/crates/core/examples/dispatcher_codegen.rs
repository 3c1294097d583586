//! Compiling a trained classifier into a dispatcher, writing it out in
//! the text format and rendering it as C-like source.

use mvselect::dispatch::{
    compile_dispatcher, render_template, DcModel, DispatcherSpec, RenderedProgram,
    REFERENCE_TEMPLATE,
};
use mvselect::learners::{
    make_dc_labels, train_rule_list, train_tree_classifier, RuleConfig, TreeConfig,
};
use mvselect::synthgen::{generate, SynthConfig};

fn main() -> mvselect::Result<()> {
    let (scenario, _) = generate(&SynthConfig::new(4, 120, 2, 3, 5))?;
    let m = scenario.speedups();
    let labeled = make_dc_labels(&scenario, &m, &m.candidate_ids())?;

    let tree = train_tree_classifier(&labeled, &TreeConfig::default())?;
    let spec = compile_dispatcher(DcModel::Tree(&tree))?;
    print!("{}", spec.serialize());
    println!(
        "{} bytes, {} leaves, depth {}",
        spec.byte_size(),
        spec.leaf_count(),
        spec.depth()
    );

    let back = DispatcherSpec::deserialize(spec.serialize())?;
    assert_eq!(back, spec);

    let source = render_template(&spec, REFERENCE_TEMPLATE)?;
    println!("{source}");
    let program = RenderedProgram::parse(&source)?;
    for d in scenario.datasets().iter().take(5) {
        assert_eq!(program.eval(&d.features)?, spec.eval(&d.features)?);
    }

    let rules = train_rule_list(&labeled, &RuleConfig::default())?;
    let lowered = compile_dispatcher(DcModel::Rules(&rules))?;
    println!(
        "rule list with {} rules lowers to {} nodes",
        rules.rules.len(),
        lowered.nodes().len()
    );

    let custom = "{{BRANCH c t e}}\n({{c}} ? {{t}} : {{e}})\n{{FEAT i}}\nx{{i}}\n{{VER v}}\n{{v}}\n{{CMP_LE}}\n<=\n";
    println!("{}", render_template(&spec, custom)?);
    Ok(())
}
