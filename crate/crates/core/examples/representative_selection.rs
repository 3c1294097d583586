//! Greedy representative selection against the exhaustive optimum, under
//! a count limit, a code-size budget and a loss tolerance.

use mvselect::repselect::{exhaustive_select, greedy_select, Constraints, Mode};
use mvselect::synthgen::{generate, SynthConfig};

fn main() -> mvselect::Result<()> {
    let mut cfg = SynthConfig::new(12, 300, 2, 8, 3);
    cfg.noise_sigma = 0.05;
    let (scenario, _) = generate(&cfg)?;
    let m = scenario.speedups();
    let binary = 20_000;

    for k in 1..=5 {
        let set = greedy_select(&m, binary, &Constraints::new(k))?;
        let (best, f_best) = exhaustive_select(&m, k)?;
        println!(
            "K={k}: greedy {:?} f={:.3}  exhaustive {:?} f={:.3}  ratio {:.4}",
            set.selected,
            set.objective_value,
            best,
            f_best,
            set.objective_value / f_best
        );
    }

    let mut c = Constraints::new(11);
    c.size_budget = 0.5;
    let set = greedy_select(&m, binary, &c)?;
    println!(
        "budget 50%: {} versions, {} bytes ({:.1}% of binary), stop: {}",
        set.count(),
        set.size_bytes,
        100.0 * set.size_fraction,
        set.stop_reason
    );
    for step in &set.trace {
        println!(
            "  +v{} gain {:.4} -> {:.4}",
            step.picked, step.gain, step.objective
        );
    }

    let mut c = Constraints::new(11);
    c.mode = Mode::SizePriority;
    c.loss_tolerance = 0.1;
    let set = greedy_select(&m, binary, &c)?;
    println!(
        "within 10% everywhere: {:?}, worst loss {:.1}%",
        set.selected,
        100.0 * set.max_dataset_loss
    );
    Ok(())
}
