//! Loading a scenario from CSV tables and reading the validation report
//! for a broken one.

use mvselect::model::{load_scenario, read_raw_scenario, validate_scenario};

const VERSIONS: &str =
    "id,name,code_size,is_baseline\n0,O3,1000,1\n1,tiled,120,0\n2,unrolled,80,0\n";
const DATASETS: &str = "id,n,density\n10,64,0.5\n11,4096,0.1\n12,65536,0.01\n";
const RUNTIMES: &str = "dataset_id,version_id,runtime_seconds\n\
10,0,0.010\n10,1,0.012\n10,2,0.006\n\
11,0,0.80\n11,1,0.40\n11,2,0.70\n\
12,0,52.0\n12,1,20.0\n12,2,49.0\n";

fn main() -> mvselect::Result<()> {
    let scenario = load_scenario(
        VERSIONS.as_bytes(),
        DATASETS.as_bytes(),
        RUNTIMES.as_bytes(),
    )?;
    let m = scenario.speedups();
    println!(
        "{} versions, {} datasets, {} features",
        m.n_versions(),
        m.n_datasets(),
        scenario.arity()
    );
    for (d, id) in m.dataset_ids().iter().enumerate() {
        let row: Vec<String> = (0..m.n_versions())
            .map(|v| format!("{:.2}", m.speedup(d, v)))
            .collect();
        println!("  dataset {id}: {}", row.join(" "));
    }

    let broken = RUNTIMES
        .replace("11,2,0.70\n", "")
        .replace("12,1,20.0", "12,1,-1");
    let raw = read_raw_scenario(VERSIONS.as_bytes(), DATASETS.as_bytes(), broken.as_bytes())?;
    for v in validate_scenario(&raw) {
        println!("violation: {v}");
    }
    Ok(())
}
