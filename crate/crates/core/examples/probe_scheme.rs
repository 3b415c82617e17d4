fn main() {
    use isoatlas_core::catalog::catalog;
    use isoatlas_core::verify::check_riemann_scheme;
    let args: Vec<String> = std::env::args().collect();
    let name = &args[1];
    let entry = catalog().get(name).unwrap();
    let t0 = std::time::Instant::now();
    match check_riemann_scheme(entry, 3, 2) {
        Ok(rep) => {
            for p in &rep.points {
                println!(
                    "x={} declared {} computed {:?} rank={} ram={} type={} exp={} res={} shift={:?} err={:?}",
                    p.loc, p.declared_type, p.computed_type, p.rank_ok, p.ram_ok, p.type_ok,
                    p.exp_ok, p.res_ok, p.shift.as_ref().map(|q| format!("{}", q)), p.error
                );
            }
        }
        Err(e) => println!("error: {}", e),
    }
    println!("elapsed {:?}", t0.elapsed());
}
