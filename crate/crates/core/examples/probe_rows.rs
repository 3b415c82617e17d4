fn main() {
    use isoatlas_core::catalog::{catalog, sample_point, PointLoc, SampleMode, SpecializeValues};
    use isoatlas_core::verify::run_reduction;
    let args: Vec<String> = std::env::args().collect();
    let entry = catalog().get(&args[1]).unwrap();
    let spec = SpecializeValues::with_lambda(2);
    let sample = sample_point(entry, 3, SampleMode::HtlSpecialized, &spec).unwrap();
    let mut full = sample.clone();
    entry.extend_with_defs(&mut full).unwrap();
    let loc = match args[2].as_str() {
        "inf" => PointLoc::Infinity,
        other => PointLoc::Finite(isoatlas_core::Q::from_integer(other.parse::<i64>().unwrap().into())),
    };
    let form = run_reduction(entry, &loc, &full).unwrap();
    println!("canonical rows:");
    for (e, r) in form.canonical_rows() {
        println!("  {:?} | {}", e.iter().map(|x| format!("{}", x)).collect::<Vec<_>>(), r);
    }
    println!("cycles: {:?}", form.cycle_partition());
    let pt = entry.scheme.iter().find(|p| p.loc == loc).unwrap();
    println!("declared rows:");
    for row in &pt.rows {
        let es: Vec<String> = row.exps.iter().map(|e| format!("{}", e.evaluate(&full).unwrap())).collect();
        println!("  {:?} | {}", es, row.res.evaluate(&full).unwrap());
    }
}
