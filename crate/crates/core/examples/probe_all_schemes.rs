fn main() {
    use isoatlas_core::catalog::catalog;
    use isoatlas_core::verify::check_riemann_scheme;
    let mut all_ok = true;
    for lambda in [2i64, 3] {
        for entry in catalog().full_entries() {
            let t0 = std::time::Instant::now();
            match check_riemann_scheme(entry, 3, lambda) {
                Ok(rep) => {
                    for p in &rep.points {
                        if !p.pass() {
                            all_ok = false;
                            println!(
                                "FAIL lam={} {} x={}: declared {} computed {:?} rank={} ram={} type={} exp={} res={} err={:?}",
                                lambda, entry.name, p.loc, p.declared_type, p.computed_type,
                                p.rank_ok, p.ram_ok, p.type_ok, p.exp_ok, p.res_ok, p.error
                            );
                        }
                    }
                    println!("ok lam={} {} ({:?})", lambda, entry.name, t0.elapsed());
                }
                Err(e) => {
                    all_ok = false;
                    println!("ERROR lam={} {}: {}", lambda, entry.name, e);
                }
            }
        }
    }
    println!("ALL {}", if all_ok { "PASS" } else { "FAIL" });
}
