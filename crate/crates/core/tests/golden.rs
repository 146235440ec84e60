//! A stored phase diagram must be reproduced cell by cell.
//!
//! Regenerate with `nhse sweep --config tests/data/dimer_k1_diagram.json
//! --out tests/data/dimer_k1_golden.json` after an intended numerical change.

use std::path::PathBuf;

use nhse::io::read_json;
use nhse::sweep::{run_sweep, PhaseDiagram, SweepConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(1.0),
        (None, None) => true,
        _ => false,
    }
}

#[test]
fn dimer_diagram_matches_golden() {
    let cfg: SweepConfig<f64> = read_json(&data("dimer_k1_diagram.json")).unwrap();
    let golden = PhaseDiagram::<f64>::read_json(&data("dimer_k1_golden.json")).unwrap();
    assert_eq!(golden.config(), cfg, "golden file was produced from a different config");
    let fresh = run_sweep(&cfg).unwrap();
    assert_eq!(fresh.cell_count(), 41 * 31);
    let mut worst = 0.0f64;
    for ((x, y, a), (_, _, b)) in fresh.iter().zip(golden.iter()) {
        assert_eq!(a.class, b.class, "class at ({x}, {y})");
        assert_eq!(a.degenerate, b.degenerate, "degeneracy at ({x}, {y})");
        assert_eq!(a.winding, b.winding, "winding at ({x}, {y})");
        assert_eq!(a.error.is_some(), b.error.is_some(), "error at ({x}, {y}): {:?}", a.error);
        assert!(close(a.dmipr, b.dmipr), "dMIPR at ({x}, {y}): {:?} vs {:?}", a.dmipr, b.dmipr);
        assert!(close(a.r, b.r), "|beta| at ({x}, {y}): {:?} vs {:?}", a.r, b.r);
        if let (Some(p), Some(q)) = (a.dmipr, b.dmipr) {
            worst = worst.max((p - q).abs());
        }
    }
    assert_eq!(fresh.overlays, golden.overlays);
    println!("max dMIPR drift {worst:.2e}");
}

#[test]
fn sweep_is_thread_count_independent() {
    let mut cfg: SweepConfig<f64> = read_json(&data("dimer_k1_diagram.json")).unwrap();
    cfg.axis1.n = 9;
    cfg.axis2.n = 7;
    let reference = run_sweep(&cfg).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let again = pool.install(|| run_sweep(&cfg).unwrap());
        assert_eq!(again, reference, "{threads} threads");
    }
}
