//! Twisted Heegner point for a one-prime family: the genus character has to be right for this to land on E(Q).

use twistbsd::families::build_twist_family;
use twistbsd::heegner::gz_check;
use twistbsd::par::Exec;
use twistbsd::CurveQ;

#[test]
fn gross_zagier_69a1_p191_q7() {
    let e = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap();
    let fam = build_twist_family(&e, 191, &[7]).unwrap();
    assert_eq!(fam.r, 1);
    let res = gz_check(&fam, 40, Exec::auto()).unwrap();
    assert_eq!(res.chi_sum, 0);
    assert!(res.reconstructed_half);
    let pt = res.rational_point.clone().unwrap();
    assert!(res.twist.is_on_curve(&pt));
    let r = res.gz_residual.unwrap();
    assert!(r < 1e-20, "residual {}", r);
    let div = res.divisibility.unwrap();
    assert_eq!(div.predicted_ord2, 0);
    assert_eq!(div.ratio_ord2, Some(0));
}
