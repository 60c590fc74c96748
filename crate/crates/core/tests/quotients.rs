use hecke::golden::{GoldenInt, Modulus};
use hecke::quotient::{build_quotient, kernel_subgroup, normal_closure, DEFAULT_CAP};

fn rat(n: u64) -> Modulus {
    Modulus::rational(n).unwrap()
}

#[test]
fn level_eight_quotient_and_closures() {
    let q8 = build_quotient(&rat(8), true, DEFAULT_CAP).unwrap();
    assert_eq!(q8.order(), 10240);
    let a = q8.ambient();
    let t2 = a.from_word(&"T^2".parse().unwrap());
    let t4 = a.from_word(&"T^4".parse().unwrap());
    let n2 = normal_closure(&q8, &[t2]).unwrap();
    assert_eq!(n2.order(), 1024);
    assert!(n2.same_as(&kernel_subgroup(&q8, &rat(2)).unwrap()));
    let n4 = normal_closure(&q8, &[t4]).unwrap();
    let k4 = kernel_subgroup(&q8, &rat(4)).unwrap();
    assert_eq!(n4.order(), 32);
    assert_eq!(k4.order(), 64);
    assert!(n4.is_subset_of(&k4));
}

#[test]
fn index_ladder_at_2pi() {
    let q12 = build_quotient(&rat(12), true, DEFAULT_CAP).unwrap();
    let big = kernel_subgroup(&q12, &rat(6)).unwrap();
    assert_eq!(big.order(), 32);

    let pi = GoldenInt::new(2, 1);
    let four_pi = Modulus::ideal(&pi * &GoldenInt::from(4)).unwrap();
    let two_pi = Modulus::ideal(&pi * &GoldenInt::from(2)).unwrap();
    let q = build_quotient(&four_pi, true, DEFAULT_CAP).unwrap();
    assert_eq!(kernel_subgroup(&q, &two_pi).unwrap().order(), 32);
}

#[test]
fn level_sixteen_closure_contains_level_eight_kernel() {
    let q16 = build_quotient(&rat(16), true, DEFAULT_CAP).unwrap();
    assert_eq!(q16.order(), 655360);
    let t4 = q16.ambient().from_word(&"T^4".parse().unwrap());
    let n = normal_closure(&q16, &[t4]).unwrap();
    let k8 = kernel_subgroup(&q16, &rat(8)).unwrap();
    assert!(k8.is_subset_of(&n));
    assert_eq!(q16.order() % n.order(), 0);
}
