use isoatlas_core::catalog::catalog;
use isoatlas_core::verify::{compat_sweep, cross_sweep};

#[test]
fn quick_compat_all_entries() {
    let mut failures = Vec::new();
    for entry in catalog().full_entries() {
        for time in &entry.times {
            match compat_sweep(entry, time, 2, 3, 11) {
                Ok(rep) => {
                    if !rep.pass {
                        failures.push(format!("{} d/d{}: {:?}", entry.name, time, rep.failure));
                    }
                }
                Err(e) => failures.push(format!("{} d/d{}: error {}", entry.name, time, e)),
            }
        }
        if entry.times.len() == 2 {
            match cross_sweep(entry, 2, 3, 11) {
                Ok(rep) => {
                    if !rep.pass {
                        failures.push(format!("{} cross: {:?}", entry.name, rep.failure));
                    }
                }
                Err(e) => failures.push(format!("{} cross: error {}", entry.name, e)),
            }
        }
    }
    assert!(failures.is_empty(), "compat failures:\n{}", failures.join("\n"));
}
