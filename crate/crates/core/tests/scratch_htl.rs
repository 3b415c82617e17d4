use isoatlas_core::catalog::{catalog, sample_point, PointLoc, SampleMode, SpecializeValues};
use isoatlas_core::htl::{reduce_at_point, spectral_type_of};
use isoatlas_core::{K, Q};

#[test]
fn worked_example_at_infinity() {
    let entry = catalog().get("(1)_4,(2)_2").unwrap();
    let spec = SpecializeValues::with_lambda(2);
    let sample = sample_point(entry, 5, SampleMode::HtlSpecialized, &spec).unwrap();
    let mut full = sample.clone();
    entry.extend_with_defs(&mut full).unwrap();
    let rm = entry.x_eq.as_ref().unwrap().evaluate(&full).unwrap();
    let form = reduce_at_point(&rm, &PointLoc::Infinity).unwrap();
    println!("levels: {:?}", form.levels());
    println!("rank: {}", form.poincare_rank());
    println!("ram: {}", form.ramification());
    for (i, sh) in form.shears.iter().enumerate() {
        println!("shear {}: dim {} pole {} s0 {}", i, sh.block_dim, sh.pole, sh.s0);
    }
    for (exps, res) in form.exponent_table() {
        println!("row: {:?} | {}", exps.iter().map(|e| format!("{}", e)).collect::<Vec<_>>(), res);
    }
    let st = spectral_type_of(&form);
    println!("type: {}", st.render());
    assert_eq!(form.poincare_rank(), Q::new(1.into(), 4.into()));
    assert_eq!(form.shears[0].s0, Q::new(1.into(), 4.into()), "first shear");
    // leading diagonal multiset {8, 8i, -8, -8i}
    let mut tops: Vec<K> = form.exponent_table().into_iter().map(|(e, _)| e[0].clone()).collect();
    let mut expect = vec![
        K::from_int(8),
        K::from_int(8) * K::i(),
        K::from_int(-8),
        K::from_int(-8) * K::i(),
    ];
    let key = |x: &K| format!("{}", x);
    tops.sort_by_key(key);
    expect.sort_by_key(key);
    assert_eq!(tops, expect);
    // raw residue -9/8 I
    for r in form.raw_residues() {
        assert_eq!(r, K::ratio(-9, 8));
    }
    assert_eq!(st.render(), "(1)_4");
}

#[test]
fn worked_example_at_zero() {
    let entry = catalog().get("(1)_4,(2)_2").unwrap();
    let spec = SpecializeValues::with_lambda(2);
    let sample = sample_point(entry, 5, SampleMode::HtlSpecialized, &spec).unwrap();
    let mut full = sample.clone();
    entry.extend_with_defs(&mut full).unwrap();
    let rm = entry.x_eq.as_ref().unwrap().evaluate(&full).unwrap();
    let form = reduce_at_point(&rm, &PointLoc::Finite(Q::from_integer(0.into()))).unwrap();
    println!("levels: {:?}", form.levels());
    println!("rank: {}", form.poincare_rank());
    for (exps, res) in form.exponent_table() {
        println!("row: {:?} | {}", exps.iter().map(|e| format!("{}", e)).collect::<Vec<_>>(), res);
    }
    let st = spectral_type_of(&form);
    println!("type: {}", st.render());
    assert_eq!(form.poincare_rank(), Q::new(1.into(), 2.into()));
    assert_eq!(st.render(), "(2)_2");
}
