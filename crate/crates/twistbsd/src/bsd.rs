//! Both sides of the 2-part of the BSD formula, for base curves and family members.

use std::fmt;

use rug::{Float, Integer, Rational};

use crate::analytic;
use crate::complex::bits_for_digits;
use crate::curve::CurveQ;
use crate::descent;
use crate::error::{Error, Result};
use crate::families::{self, ord2_rational, TwistFamily};
use crate::heegner;
use crate::height::canonical_height;
use crate::localdata;
use crate::par::Exec;
use crate::point::RationalPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    ConditionalPass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::ConditionalPass => "conditional-pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Algebraic side: Ш, Tamagawa numbers and torsion, 2-adically.
#[derive(Debug, Clone)]
pub struct AlgebraicSide {
    pub tamagawa: Vec<(Integer, u32)>,
    pub torsion_order: u32,
    pub sel2_dim: Option<u32>,
    pub sha2_dim: Option<i64>,
    /// ord₂|Ш|, or None when it could not be pinned down.
    pub sha_ord2: Option<i32>,
    pub rhs_ord2: Option<i32>,
    /// The rank used for Ш[2] is a theorem here (Selmer bound meets a known point count).
    pub rank_proved: bool,
    pub assumptions: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct BsdReport {
    pub curve: CurveQ,
    pub analytic_rank: u32,
    /// L(E,1)/Ω, or L'(E,1)/(Ω·R) at rank one.
    pub l_ratio: Option<Rational>,
    pub regulator: Option<Float>,
    pub generator: Option<RationalPoint>,
    pub lhs_ord2: Option<i32>,
    pub algebraic: AlgebraicSide,
    pub rhs_ord2: Option<i32>,
    /// Hypothesis gate of a rank-0 base curve; not applicable at rank one.
    pub gate_passes: Option<bool>,
    pub assume_odd_manin: bool,
    pub assumptions: Vec<String>,
    pub verdict: Verdict,
    pub digits: u32,
}

fn ord2_u32(n: u32) -> i32 {
    n.trailing_zeros() as i32
}

/// ord₂(|Ш|·Π c_ℓ/|E(Q)_tors|²) with Ш[2] from 2-isogeny descent.
pub fn algebraic_side(e: &CurveQ, rank: u32, points: &[RationalPoint], exec: Exec) -> Result<AlgebraicSide> {
    let m = e.minimal_model();
    let tamagawa: Vec<(Integer, u32)> = localdata::local_data(&m).into_iter().map(|ld| (ld.prime, ld.tamagawa)).collect();
    let torsion_order = m.torsion_order();
    let mut assumptions = Vec::new();
    let (sel2_dim, sha2_dim, rank_proved) = match m.two_isogeny_pair() {
        Ok(pair) => {
            let rep = descent::two_selmer_with_points(&pair, Some(rank), points, exec)?;
            let independent = points.iter().filter(|p| !m.is_torsion(p)).count() as u32;
            // Sel₂ pins the rank when it leaves no room above the known points
            let proved = match rep.sel2_dim {
                Some(s) => {
                    let dim_e2 = if pair.e.rational_two_torsion().len() == 3 { 2 } else { 1 };
                    rank == 0 && s == dim_e2 || rank == 1 && independent >= 1 && s == dim_e2 + 1
                }
                None => false,
            };
            (rep.sel2_dim, rep.sha2_dim, proved)
        }
        Err(_) => (None, None, false),
    };
    let sha_ord2 = match sha2_dim {
        Some(0) => Some(0),
        Some(k) if k > 0 => {
            assumptions.push("Ш[2^∞] = Ш[2]".to_string());
            Some(k as i32)
        }
        _ => {
            assumptions.push("Ш[2] not determined by descent; taken trivial".to_string());
            Some(0)
        }
    };
    if !rank_proved {
        assumptions.push(format!("Mordell–Weil rank {} taken from the analytic side", rank));
    }
    let c_ord2: i32 = tamagawa.iter().map(|(_, c)| ord2_u32(*c)).sum();
    let rhs_ord2 = sha_ord2.map(|s| s + c_ord2 - 2 * ord2_u32(torsion_order));
    Ok(AlgebraicSide { tamagawa, torsion_order, sel2_dim, sha2_dim, sha_ord2, rhs_ord2, rank_proved, assumptions })
}

fn verdict(lhs: Option<i32>, rhs: Option<i32>, conditional: bool) -> Verdict {
    match (lhs, rhs) {
        (Some(l), Some(r)) if l == r => {
            if conditional {
                Verdict::ConditionalPass
            } else {
                Verdict::Pass
            }
        }
        _ => Verdict::Fail,
    }
}

fn manin_assumption(assume_odd_manin: bool, out: &mut Vec<String>) {
    if assume_odd_manin {
        out.push("odd Manin constant (standing assumption)".to_string());
    } else {
        out.push("Manin constant parity not assumed; cusp condition unverified".to_string());
    }
}

fn gate_assumptions(e: &CurveQ, digits: u32, assume_odd_manin: bool, out: &mut Vec<String>) -> bool {
    let gate = families::hypothesis_gate(e, digits, assume_odd_manin);
    if !gate.passes() {
        out.push("hypothesis gate fails".to_string());
    }
    manin_assumption(assume_odd_manin, out);
    gate.passes()
}

/// Rank-0 report: ord₂(L(E,1)/Ω) against ord₂(|Ш|·Π c_ℓ/|tors|²).
pub fn bsd_rank0_report(e: &CurveQ, digits: u32, assume_odd_manin: bool, exec: Exec) -> Result<BsdReport> {
    let m = e.minimal_model();
    let l = analytic::l_value(&m, digits, exec)?;
    let ratio = l.ratio.clone().filter(|r| *r != 0);
    if ratio.is_none() {
        return Err(Error::HypothesesNotMet("L(E,1) is not a recognisable nonzero multiple of Ω".into()));
    }
    let lhs = ratio.as_ref().and_then(ord2_rational);
    let alg = algebraic_side(&m, 0, &[], exec)?;
    let mut assumptions = alg.assumptions.clone();
    let gate = gate_assumptions(&m, digits, assume_odd_manin, &mut assumptions);
    let conditional = !alg.rank_proved || !gate || !assume_odd_manin || alg.sha2_dim.is_none_or(|k| k != 0);
    let rhs = alg.rhs_ord2;
    Ok(BsdReport {
        curve: m,
        analytic_rank: 0,
        l_ratio: ratio,
        regulator: None,
        generator: None,
        lhs_ord2: lhs,
        verdict: verdict(lhs, rhs, conditional),
        rhs_ord2: rhs,
        algebraic: alg,
        gate_passes: Some(gate),
        assume_odd_manin,
        assumptions,
        digits,
    })
}

/// Rank-1 report: ord₂(L'(E,1)/(Ω·ĥ(G))) with G the 2-saturation of the supplied point.
///
/// Odd indices do not move 2-adic valuations, so saturation at 2 is enough for R(E).
pub fn bsd_rank1_report(
    e: &CurveQ,
    generator: &RationalPoint,
    digits: u32,
    assume_odd_manin: bool,
    exec: Exec,
) -> Result<BsdReport> {
    let m = e.minimal_model();
    let lp = match analytic::l_derivative(&m, digits, exec) {
        Err(Error::WrongSign) => return Err(Error::NotRankOne),
        other => other?,
    };
    if !m.is_on_curve(generator) {
        return Err(Error::NotOnCurve);
    }
    if m.is_torsion(generator) {
        return Err(Error::GeneratorSearchFailed("supplied point is torsion".into()));
    }
    let mut assumptions = Vec::new();
    let g = match heegner::two_saturate(&m, generator, digits.max(60)) {
        Ok((g, _)) => g,
        Err(_) => {
            assumptions.push("2-saturation of the generator failed".to_string());
            generator.clone()
        }
    };
    let prec = bits_for_digits(digits) + 32;
    let reg = canonical_height(&m, &g, digits)?;
    let q = Float::with_val(prec, Float::with_val(prec, &lp.value / &lp.omega) / &reg);
    let ratio = analytic::recognize_rational(&q, &analytic::l_alg_denominator_bound(&m)).ok().filter(|r| *r != 0);
    let lhs = ratio.as_ref().and_then(ord2_rational);
    let alg = algebraic_side(&m, 1, std::slice::from_ref(&g), exec)?;
    assumptions.extend(alg.assumptions.iter().cloned());
    manin_assumption(assume_odd_manin, &mut assumptions);
    let conditional = assumptions.iter().any(|a| a.contains("saturation"))
        || !alg.rank_proved
        || !assume_odd_manin
        || alg.sha2_dim.is_none_or(|k| k != 0);
    let rhs = alg.rhs_ord2;
    Ok(BsdReport {
        curve: m,
        analytic_rank: 1,
        l_ratio: ratio,
        regulator: Some(reg),
        generator: Some(g),
        lhs_ord2: lhs,
        verdict: verdict(lhs, rhs, conditional),
        rhs_ord2: rhs,
        algebraic: alg,
        gate_passes: None,
        assume_odd_manin,
        assumptions,
        digits,
    })
}

/// One predicted 2-adic valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationCheck {
    pub name: String,
    pub predicted: i32,
    pub computed: Option<i32>,
    /// Computed under an assumption listed in the report.
    pub conditional: bool,
}

impl ValuationCheck {
    pub fn holds(&self) -> bool {
        self.computed == Some(self.predicted)
    }
}

#[derive(Debug, Clone)]
pub struct FamilyValuationReport {
    pub p: u64,
    pub m: Integer,
    pub r: usize,
    pub checks: Vec<ValuationCheck>,
    pub assumptions: Vec<String>,
    pub verdict: Verdict,
}

/// Valuation predictions for a family under the strengthened hypotheses:
/// ord₂ of L^alg(E^(M)) and of Ш·Π c/|tors|² for E^(M) is r − 1, and for E^(−pM) it is r.
///
/// A generator of E^(−pM)(Q) (on its minimal model) adds the rank-one L-side check.
pub fn verify_family_valuations(
    family: &TwistFamily,
    generator: Option<&RationalPoint>,
    digits: u32,
    exec: Exec,
) -> Result<FamilyValuationReport> {
    let failed = family.failed_clauses();
    if !failed.is_empty() {
        return Err(Error::HypothesesNotMet(failed.join("; ")));
    }
    family_valuations(family, generator, digits, exec)
}

/// The valuations behind [`verify_family_valuations`], computed without checking the hypotheses.
pub fn family_valuations(
    family: &TwistFamily,
    generator: Option<&RationalPoint>,
    digits: u32,
    exec: Exec,
) -> Result<FamilyValuationReport> {
    let r = family.r as i32;
    let mut checks = Vec::new();
    let mut assumptions = Vec::new();

    let l = analytic::l_value(&family.em, digits, exec)?;
    checks.push(ValuationCheck {
        name: "ord2 L(E^(M),1)/Ω".into(),
        predicted: r - 1,
        computed: l.ratio.as_ref().and_then(ord2_rational),
        conditional: false,
    });
    let alg_m = algebraic_side(&family.em, 0, &[], exec)?;
    checks.push(ValuationCheck {
        name: "ord2 |Ш|·Πc/|tors|² of E^(M)".into(),
        predicted: r - 1,
        computed: alg_m.rhs_ord2,
        conditional: !alg_m.assumptions.is_empty(),
    });
    assumptions.extend(alg_m.assumptions.iter().map(|a| format!("E^(M): {}", a)));

    let pts: Vec<RationalPoint> = generator.cloned().into_iter().collect();
    let alg_pm = algebraic_side(&family.epm, 1, &pts, exec)?;
    checks.push(ValuationCheck {
        name: "ord2 |Ш|·Πc/|tors|² of E^(-pM)".into(),
        predicted: r,
        computed: alg_pm.rhs_ord2,
        conditional: !alg_pm.assumptions.is_empty(),
    });
    assumptions.extend(alg_pm.assumptions.iter().map(|a| format!("E^(-pM): {}", a)));

    if let Some(g) = generator {
        let rep = bsd_rank1_report(&family.epm, g, digits, true, exec)?;
        checks.push(ValuationCheck {
            name: "ord2 L'(E^(-pM),1)/(Ω·R)".into(),
            predicted: r,
            computed: rep.lhs_ord2,
            conditional: false,
        });
    }
    let all = checks.iter().all(|c| c.holds());
    let cond = checks.iter().any(|c| c.conditional);
    let verdict = match (all, cond) {
        (false, _) => Verdict::Fail,
        (true, true) => Verdict::ConditionalPass,
        (true, false) => Verdict::Pass,
    };
    Ok(FamilyValuationReport { p: family.p, m: family.m.clone(), r: family.r, checks, assumptions, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::build_twist_family;

    fn c69() -> CurveQ {
        CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap()
    }

    #[test]
    fn rank0_69a1() {
        let rep = bsd_rank0_report(&c69(), 30, true, Exec::auto()).unwrap();
        assert_eq!(rep.l_ratio, Some(Rational::from((1, 2))));
        assert_eq!(rep.lhs_ord2, Some(-1));
        assert_eq!(rep.rhs_ord2, Some(-1));
        assert_eq!(rep.algebraic.torsion_order, 2);
        assert!(rep.algebraic.rank_proved);
        assert_eq!(rep.verdict, Verdict::Pass);
        let off = bsd_rank0_report(&c69(), 30, false, Exec::auto()).unwrap();
        assert_eq!(off.verdict, Verdict::ConditionalPass);
    }

    #[test]
    fn rank1_twist_by_minus_11() {
        let e = c69().quadratic_twist(&Integer::from(-11)).unwrap();
        // 2z_M from the Heegner computation, up to sign and torsion
        let g = RationalPoint::from_ints(15, 51);
        let g = if e.is_on_curve(&g) { g } else { panic!("unexpected model {:?}", e) };
        let rep = bsd_rank1_report(&e, &g, 30, true, Exec::auto()).unwrap();
        assert_eq!(rep.lhs_ord2, Some(0));
        assert_eq!(rep.rhs_ord2, Some(0));
        assert_eq!(rep.verdict, Verdict::Pass, "{:?} {:?}", rep.assumptions, rep.algebraic);
        assert!(matches!(bsd_rank1_report(&c69(), &g, 30, true, Exec::auto()), Err(Error::NotRankOne)));
    }

    #[test]
    fn clause_failures_are_listed() {
        // 11 ≡ 3 mod 8
        let fam = build_twist_family(&c69(), 11, &[]).unwrap();
        match verify_family_valuations(&fam, None, 30, Exec::auto()) {
            Err(Error::HypothesesNotMet(s)) => assert!(s.contains("mod 8")),
            other => panic!("{:?}", other.map(|r| r.verdict)),
        }
    }

    #[test]
    fn family_valuations_r2() {
        let ctx = crate::families::CurveContext::new(&c69()).unwrap();
        let fam = crate::families::strengthened_families(&ctx, 1000, 12, 2, 1).remove(0);
        let rep = verify_family_valuations(&fam, None, 30, Exec::auto()).unwrap();
        assert_eq!(rep.checks.len(), 3);
        for c in &rep.checks {
            assert!(c.holds(), "{:?} {:?}", c, rep.assumptions);
        }
    }

    #[test]
    fn one_prime_family_misses_the_splitting_clause() {
        let fam = build_twist_family(&c69(), 191, &[7]).unwrap();
        match verify_family_valuations(&fam, None, 30, Exec::auto()) {
            Err(Error::HypothesesNotMet(s)) => assert!(s.contains("3 does not split")),
            other => panic!("{:?}", other.map(|r| r.verdict)),
        }
    }
}
