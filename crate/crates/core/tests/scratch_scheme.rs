use isoatlas_core::catalog::catalog;
use isoatlas_core::verify::check_riemann_scheme;

#[test]
fn schemes_all_entries_lambda2() {
    let mut failures = Vec::new();
    for entry in catalog().full_entries() {
        match check_riemann_scheme(entry, 3, 2) {
            Ok(rep) => {
                for p in &rep.points {
                    if !p.pass() {
                        failures.push(format!(
                            "{} x={} declared {} computed {:?} rank={} ram={} type={} exp={} res={} err={:?}",
                            entry.name, p.loc, p.declared_type, p.computed_type,
                            p.rank_ok, p.ram_ok, p.type_ok, p.exp_ok, p.res_ok, p.error
                        ));
                    }
                }
            }
            Err(e) => failures.push(format!("{}: {}", entry.name, e)),
        }
    }
    assert!(failures.is_empty(), "scheme failures:\n{}", failures.join("\n"));
}
