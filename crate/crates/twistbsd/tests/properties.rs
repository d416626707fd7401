use proptest::prelude::*;
use rug::{Integer, Rational};
use twistbsd::analytic::{root_number, twist_root_number};
use twistbsd::arith::{an_coefficients, count_points_naive, is_prime_u64, trace_good};
use twistbsd::curve::CurveQ;
use twistbsd::curvedb::{parse_table, serialize};
use twistbsd::forms::{class_group_forms, class_number, QuadForm};
use twistbsd::height::canonical_height;
use twistbsd::localdata::conductor;
use twistbsd::par::Exec;
use twistbsd::point::RationalPoint;

fn curve(a: [i64; 5]) -> Option<CurveQ> {
    CurveQ::from_i64(a).ok()
}

fn coeffs() -> impl Strategy<Value = [i64; 5]> {
    (0i64..2, -1i64..2, 0i64..2, -30i64..30, -30i64..30).prop_map(|(a1, a2, a3, a4, a6)| [a1, a2, a3, a4, a6])
}

/// y² = x(x² + ax + b), nonsingular.
fn two_torsion_curve() -> impl Strategy<Value = CurveQ> {
    (-20i64..20, -20i64..20)
        .prop_filter("nonsingular", |(a, b)| *b != 0 && a * a - 4 * b != 0)
        .prop_map(|(a, b)| CurveQ::from_i64([0, a, 0, b, 0]).unwrap())
}

fn squarefree() -> impl Strategy<Value = i64> {
    (-60i64..60).prop_filter("squarefree, not 0 or 1", |d| {
        *d != 0 && *d != 1 && (2..8).all(|k: i64| d % (k * k) != 0)
    })
}

fn small_primes(bound: u64) -> Vec<u64> {
    (3..bound).filter(|&q| is_prime_u64(q)).collect()
}

fn good_at(e: &CurveQ, q: u64) -> bool {
    !e.discriminant().is_divisible_u(q as u32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weierstrass_identities(a in coeffs()) {
        if let Some(e) = curve(a) {
            let [a1, a2, a3, a4, a6] = a.map(|x| x as i128);
            let b2 = a1 * a1 + 4 * a2;
            let b4 = a1 * a3 + 2 * a4;
            let b6 = a3 * a3 + 4 * a6;
            let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
            let c4 = b2 * b2 - 24 * b4;
            let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
            prop_assert_eq!(e.b8(), &Integer::from(b8));
            prop_assert_eq!(e.c4(), &Integer::from(c4));
            prop_assert_eq!(e.discriminant(), &Integer::from(disc));
            prop_assert_eq!(4 * b8, b2 * b6 - b4 * b4);
            prop_assert!(e.invariants().identities_hold());
        }
    }

    #[test]
    fn twisting_twice_returns_the_minimal_model(a in coeffs(), d in squarefree()) {
        if let Some(e) = curve(a) {
            let d = Integer::from(d);
            let t = e.quadratic_twist(&d).unwrap();
            prop_assert_eq!(t.j_invariant(), e.j_invariant());
            let tt = t.quadratic_twist(&d).unwrap().minimal_model();
            let em = e.minimal_model();
            prop_assert_eq!(tt.coeffs(), em.coeffs());
        }
    }

    #[test]
    fn dual_isogeny_returns_to_j(e in two_torsion_curve()) {
        let pair = e.two_isogeny_pair().unwrap();
        let back = pair.dual().unwrap();
        prop_assert_eq!(back.eprime.j_invariant(), e.j_invariant());
    }

    #[test]
    fn isogenous_curves_have_equal_point_counts(e in two_torsion_curve()) {
        let pair = e.two_isogeny_pair().unwrap();
        for q in small_primes(60) {
            if good_at(&e, q) && good_at(&pair.eprime, q) {
                prop_assert_eq!(count_points_naive(&e, q), count_points_naive(&pair.eprime, q), "q = {}", q);
            }
        }
    }

    #[test]
    fn hasse_bound(a in coeffs()) {
        if let Some(e) = curve(a) {
            for q in small_primes(400) {
                if good_at(&e, q) {
                    let t = trace_good(&e, q);
                    prop_assert!((t * t) as u64 <= 4 * q, "a_{} = {}", q, t);
                }
            }
        }
    }

    #[test]
    fn an_is_multiplicative(a in coeffs()) {
        if let Some(e) = curve(a) {
            let an = an_coefficients(&e.minimal_model(), 400, Exec::Sequential);
            for m in 2..20usize {
                for n in 2..20usize {
                    if gcd(m, n) == 1 {
                        prop_assert_eq!(an[m * n], an[m] * an[n], "m = {}, n = {}", m, n);
                    }
                }
            }
        }
    }

    #[test]
    fn class_group_is_closed(d in 3i64..400) {
        let disc = Integer::from(-d);
        if let Ok(forms) = class_group_forms(&disc) {
            prop_assert_eq!(forms.len(), class_number(&disc).unwrap());
            prop_assert!(forms.contains(&QuadForm::identity(&disc).reduce()));
            for f in &forms {
                prop_assert!(forms.contains(&f.inverse().reduce()));
                for g in &forms {
                    let h = f.compose(g).reduce();
                    prop_assert_eq!(h.disc(), disc.clone());
                    prop_assert!(forms.contains(&h), "{:?} * {:?} = {:?}", f, g, h);
                }
            }
        }
    }

    #[test]
    fn table_round_trip(rows in proptest::collection::vec(coeffs(), 1..6)) {
        let text: String = rows
            .iter()
            .enumerate()
            .filter(|(_, a)| curve(**a).is_some())
            .map(|(i, a)| format!(" c{} , {}\r\n# note\n", i, a.map(|x| x.to_string()).join(" ,")))
            .collect();
        let recs = parse_table(&text).unwrap();
        let again = parse_table(&serialize(&recs)).unwrap();
        prop_assert_eq!(
            recs.iter().map(|r| (&r.label, &r.coefficients)).collect::<Vec<_>>(),
            again.iter().map(|r| (&r.label, &r.coefficients)).collect::<Vec<_>>()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn height_is_quadratic(x0 in -6i64..6, y0 in 1i64..8, a in -8i64..8) {
        // the curve y² = x³ + ax + b through (x0, y0)
        let b = y0 * y0 - x0 * x0 * x0 - a * x0;
        if let Some(e) = curve([0, 0, 0, a, b]) {
            let p = RationalPoint::from_ints(x0, y0);
            let (m, iso) = e.minimal_model_with_iso();
            let p = iso.map_point(&p);
            let two_p = m.double(&p);
            let h1 = canonical_height(&m, &p, 30).unwrap().to_f64();
            let h2 = canonical_height(&m, &two_p, 30).unwrap().to_f64();
            prop_assert!((h2 - 4.0 * h1).abs() <= 1e-15 * h2.abs().max(1.0), "{} vs 4·{}", h2, h1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn twist_root_number_rule(d in squarefree()) {
        let e = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap();
        let n = conductor(&e);
        let di = Integer::from(d);
        prop_assume!(d % 2 != 0 && n.clone().gcd(&di) == 1);
        let w = root_number(&e).unwrap();
        let t = e.quadratic_twist(&di).unwrap();
        prop_assert_eq!(root_number(&t).unwrap(), twist_root_number(w, &di, &n));
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn twist_example_matches_known_point() {
    // 69a1 twisted by −11 carries (15, 51) on its minimal model
    let t = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap().quadratic_twist(&Integer::from(-11)).unwrap().minimal_model();
    assert_eq!(t.coeffs(), CurveQ::from_i64([1, 0, 0, -63, 936]).unwrap().coeffs());
    assert!(t.is_on_curve(&RationalPoint::new(Rational::from(15), Rational::from(51))));
}
