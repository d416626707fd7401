//! Selection machinery: the hypothesis gate, admissible and Heegner primes,
//! twist families and admissible-prime density.

use std::fmt;

use rug::{Integer, Rational};

use crate::analytic;
use crate::arith::{self, kronecker, kronecker_i64, primes_up_to, q_star};
use crate::curve::{CurveQ, TwoIsogenyPair};
use crate::error::{Error, Result};
use crate::localdata;
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisReport {
    pub condition_tor: bool,
    /// Proxy for f([0]) ∉ 2E(Q): ord₂(L^alg) = −1 and E(Q)[2^∞] = Z/2.
    pub cusp_nontrivial: bool,
    /// Squarefree d with Q(E[2]) = Q(√d) and Q(E'[2]) = Q(√d').
    pub two_torsion_fields: Option<(Integer, Integer)>,
    pub l_alg: Option<Rational>,
    pub two_primary_torsion: u32,
    pub assume_odd_manin: bool,
}

impl HypothesisReport {
    pub fn passes(&self) -> bool {
        self.condition_tor && self.cusp_nontrivial
    }
}

/// Condition (Tor) and the cusp condition via the algebraic L-value.
pub fn hypothesis_gate(e: &CurveQ, digits: u32, assume_odd_manin: bool) -> HypothesisReport {
    let e = e.minimal_model();
    let pair = e.two_isogeny_pair().ok();
    let condition_tor = pair.as_ref().is_some_and(|p| p.condition_tor);
    let two_torsion_fields = pair.as_ref().map(|p| (p.field_e(), p.field_eprime()));
    let tor = e.torsion_order();
    let two_primary = 1u32 << tor.trailing_zeros();
    let l_alg = analytic::l_value(&e, digits, Exec::auto()).ok().and_then(|l| l.ratio);
    let ord2 = l_alg.as_ref().and_then(ord2_rational);
    let cusp_nontrivial = two_primary == 2 && ord2 == Some(-1);
    HypothesisReport {
        condition_tor,
        cusp_nontrivial,
        two_torsion_fields,
        l_alg,
        two_primary_torsion: two_primary,
        assume_odd_manin,
    }
}

/// 2-adic valuation of a nonzero rational.
pub fn ord2_rational(r: &Rational) -> Option<i32> {
    if *r == 0 {
        return None;
    }
    let two = Integer::from(2);
    Some(arith::valuation(r.numer(), &two) as i32 - arith::valuation(r.denom(), &two) as i32)
}

/// Precomputed data for scanning primes against one curve.
#[derive(Debug, Clone)]
pub struct CurveContext {
    pub curve: CurveQ,
    pub pair: TwoIsogenyPair,
    pub conductor: Integer,
    pub bad_primes: Vec<Integer>,
    pub d_e: Integer,
    pub d_eprime: Integer,
}

impl CurveContext {
    pub fn new(e: &CurveQ) -> Result<CurveContext> {
        let curve = e.minimal_model();
        let pair = curve.two_isogeny_pair()?;
        let conductor = localdata::conductor(&curve);
        let bad_primes = arith::prime_divisors(&conductor);
        let d_e = pair.field_e();
        let d_eprime = pair.field_eprime();
        Ok(CurveContext { curve, pair, conductor, bad_primes, d_e, d_eprime })
    }

    fn divides_2n(&self, q: u64) -> bool {
        q == 2 || self.conductor.is_divisible_u(q as u32)
    }

    /// Inert in both 2-torsion fields; requires (q, 2N) = 1.
    pub fn admissible_by_fields(&self, q: u64) -> bool {
        let qi = Integer::from(q);
        kronecker(&self.d_e, &qi) == -1 && kronecker(&self.d_eprime, &qi) == -1
    }

    /// a_q ≡ 1 − (−1/q) mod 4.
    pub fn admissible_by_trace(&self, q: u64) -> (bool, i64) {
        let a_q = arith::trace_good(&self.curve, q);
        let target = 1 - kronecker_i64(-1, q as i64) as i64;
        ((a_q - target).rem_euclid(4) == 0, a_q)
    }

    pub fn is_admissible(&self, q: u64) -> Result<bool> {
        if !arith::is_prime_u64(q) {
            return Err(Error::CompositeModulus(q.to_string()));
        }
        if self.divides_2n(q) {
            return Err(Error::DividesLevel(q.to_string()));
        }
        let by_fields = self.admissible_by_fields(q);
        let (by_trace, a_q) = self.admissible_by_trace(q);
        if by_fields != by_trace {
            return Err(Error::PredictionMismatch(format!(
                "q = {}: field criterion {} but a_q = {} gives {}",
                q, by_fields, a_q, by_trace
            )));
        }
        Ok(by_fields)
    }

    /// The first `count` admissible primes below `bound`.
    pub fn admissible_primes(&self, count: usize, bound: u64) -> Vec<u64> {
        primes_up_to(bound)
            .into_iter()
            .filter(|&q| !self.divides_2n(q) && self.admissible_by_fields(q))
            .take(count)
            .collect()
    }

    pub fn is_heegner_prime(&self, p: u64) -> bool {
        if p <= 3 || p % 4 != 3 || !arith::is_prime_u64(p) || self.conductor.is_divisible_u(p as u32) {
            return false;
        }
        let mp = Integer::from(-(p as i64));
        self.bad_primes.iter().all(|l| kronecker(&mp, l) == 1)
    }

    /// Reason a candidate fails the Heegner conditions, if any.
    pub fn heegner_failure(&self, p: u64) -> Option<String> {
        if !arith::is_prime_u64(p) {
            return Some("not prime".into());
        }
        if p <= 3 {
            return Some("p must exceed 3".into());
        }
        if p % 4 != 3 {
            return Some(format!("{} ≢ 3 mod 4", p));
        }
        if self.conductor.is_divisible_u(p as u32) {
            return Some(format!("{} divides N", p));
        }
        let mp = Integer::from(-(p as i64));
        for l in &self.bad_primes {
            if kronecker(&mp, l) != 1 {
                return Some(format!("{} does not split in Q(√−{})", l, p));
            }
        }
        None
    }

    pub fn heegner_primes(&self, bound: u64) -> Vec<u64> {
        primes_up_to(bound).into_iter().filter(|&p| self.is_heegner_prime(p)).collect()
    }
}

/// Field criterion for admissibility, cross-checked against the trace criterion.
pub fn is_admissible(pair: &TwoIsogenyPair, q: u64) -> Result<bool> {
    CurveContext::new(&pair.e)?.is_admissible(q)
}

pub fn find_heegner_primes(e: &CurveQ, bound: u64) -> Result<Vec<u64>> {
    Ok(CurveContext::new(e)?.heegner_primes(bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    First,
    Second,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::First => "first",
            Kind::Second => "second",
        })
    }
}

/// First kind: q ≡ 1 mod 4 inert in Q(√−p), or q ≡ 3 mod 4 split in Q(√−p).
pub fn classify_kind(q: u64, p: u64) -> Kind {
    let s = kronecker_i64(-(p as i64), q as i64);
    let first = (q % 4 == 1 && s == -1) || (q % 4 == 3 && s == 1);
    if first {
        Kind::First
    } else {
        Kind::Second
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyPrime {
    pub q: u64,
    pub q_star: i64,
    pub kind: Kind,
}

#[derive(Debug, Clone)]
pub struct TwistFamily {
    pub e: CurveQ,
    pub p: u64,
    pub qs: Vec<FamilyPrime>,
    pub m: Integer,
    pub em: CurveQ,
    pub epm: CurveQ,
    pub r: usize,
    pub conductor: Integer,
    /// p ≡ −1 mod 8.
    pub p_is_minus_one_mod_8: bool,
    /// (ℓ, ℓ splits in Q(√M)) for every ℓ | 2N; vacuous when M = 1.
    pub split_in_qm: Vec<(Integer, bool)>,
}

impl TwistFamily {
    /// −pM.
    pub fn minus_pm(&self) -> Integer {
        -Integer::from(self.p) * &self.m
    }

    /// The strengthened hypotheses: p ≡ −1 mod 8 and every ℓ | 2N splits in Q(√M).
    pub fn strengthened(&self) -> bool {
        self.p_is_minus_one_mod_8 && self.split_in_qm.iter().all(|(_, s)| *s)
    }

    /// Clauses of the strengthened hypotheses that fail.
    pub fn failed_clauses(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.p_is_minus_one_mod_8 {
            out.push(format!("p = {} ≢ −1 mod 8", self.p));
        }
        for (l, s) in &self.split_in_qm {
            if !s {
                out.push(format!("{} does not split in Q(√{})", l, self.m));
            }
        }
        out
    }
}

/// Does the prime ℓ split in Q(√m)? For m = 1 every prime counts as split.
pub fn splits_in(l: &Integer, m: &Integer) -> bool {
    if *m == 1 {
        return true;
    }
    if *l == 2 {
        m.mod_u(8) == 1
    } else {
        kronecker(m, l) == 1
    }
}

pub fn build_twist_family(e: &CurveQ, p: u64, qs: &[u64]) -> Result<TwistFamily> {
    let ctx = CurveContext::new(e)?;
    build_twist_family_in(&ctx, p, qs)
}

pub fn build_twist_family_in(ctx: &CurveContext, p: u64, qs: &[u64]) -> Result<TwistFamily> {
    if let Some(why) = ctx.heegner_failure(p) {
        return Err(Error::InvalidHeegnerPrime(p.to_string(), why));
    }
    let mut seen: Vec<u64> = Vec::new();
    let mut fps = Vec::new();
    let mut m = Integer::from(1);
    for &q in qs {
        if seen.contains(&q) {
            return Err(Error::DuplicatePrime(q.to_string()));
        }
        seen.push(q);
        if q == p {
            return Err(Error::NotAdmissible(format!("{} (equals p)", q)));
        }
        match ctx.is_admissible(q) {
            Ok(true) => {}
            Ok(false) => return Err(Error::NotAdmissible(q.to_string())),
            Err(Error::DividesLevel(_)) => return Err(Error::NotAdmissible(format!("{} (divides 2N)", q))),
            Err(e) => return Err(e),
        }
        let qs_ = q_star(q);
        m *= qs_;
        fps.push(FamilyPrime { q, q_star: qs_, kind: classify_kind(q, p) });
    }
    let em = ctx.curve.quadratic_twist(&m)?;
    let mpm = -Integer::from(p) * &m;
    let epm = ctx.curve.quadratic_twist(&mpm)?;
    let mut primes_2n = vec![Integer::from(2)];
    for l in &ctx.bad_primes {
        if *l != 2 {
            primes_2n.push(l.clone());
        }
    }
    let split_in_qm = primes_2n.into_iter().map(|l| {
        let s = splits_in(&l, &m);
        (l, s)
    }).collect();
    Ok(TwistFamily {
        e: ctx.curve.clone(),
        p,
        r: fps.len(),
        qs: fps,
        m,
        em,
        epm,
        conductor: ctx.conductor.clone(),
        p_is_minus_one_mod_8: p % 8 == 7,
        split_in_qm,
    })
}

/// Up to `count` families with exactly r primes that meet the strengthened hypotheses,
/// drawn from Heegner primes p ≤ `p_bound` with p ≡ 7 mod 8 and the first `q_count` admissible primes.
///
/// Order is deterministic: by p, then lexicographically in the q's.
pub fn strengthened_families(ctx: &CurveContext, p_bound: u64, q_count: usize, r: usize, count: usize) -> Vec<TwistFamily> {
    fn subsets(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            subsets(n, r, i + 1, cur, out);
            cur.pop();
        }
    }
    let qs = ctx.admissible_primes(q_count, 1 << 20);
    let mut idx = Vec::new();
    subsets(qs.len(), r, 0, &mut Vec::new(), &mut idx);
    let mut out = Vec::new();
    for p in ctx.heegner_primes(p_bound).into_iter().filter(|p| p % 8 == 7) {
        for sub in &idx {
            let chosen: Vec<u64> = sub.iter().map(|&i| qs[i]).filter(|&q| q != p).collect();
            if chosen.len() != r {
                continue;
            }
            let m = chosen.iter().fold(Integer::from(1), |acc, &q| acc * q_star(q));
            let ok = splits_in(&Integer::from(2), &m) && ctx.bad_primes.iter().all(|l| splits_in(l, &m));
            if !ok {
                continue;
            }
            if let Ok(f) = build_twist_family_in(ctx, p, &chosen) {
                out.push(f);
                if out.len() == count {
                    return out;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityReport {
    pub x: u64,
    pub admissible: u64,
    pub total: u64,
    pub ratio: Rational,
    /// #{M : |M| ≤ X, M a product of distinct q* over admissible q}, including M = 1.
    pub s0: u64,
}

impl DensityReport {
    pub fn ratio_f64(&self) -> f64 {
        self.ratio.to_f64()
    }
}

pub fn admissible_density(e: &CurveQ, x: u64, exec: Exec) -> Result<DensityReport> {
    let ctx = CurveContext::new(e)?;
    Ok(admissible_density_in(&ctx, x, exec))
}

pub fn admissible_density_in(ctx: &CurveContext, x: u64, exec: Exec) -> DensityReport {
    let primes: Vec<u64> = primes_up_to(x).into_iter().filter(|&q| !ctx.divides_2n(q)).collect();
    let chunks = par::chunks(primes.len(), 4096);
    let flags: Vec<Vec<u64>> = par::map(exec, &chunks, |r| {
        primes[r.clone()].iter().copied().filter(|&q| ctx.admissible_by_fields(q)).collect()
    });
    let adm: Vec<u64> = flags.into_iter().flatten().collect();
    let total = primes.len() as u64;
    let admissible = adm.len() as u64;
    let ratio = if total == 0 { Rational::new() } else { Rational::from((admissible, total)) };
    DensityReport { x, admissible, total, ratio, s0: count_products(&adm, x) }
}

/// Number of squarefree products of distinct primes from `primes` that are ≤ x (empty product included).
fn count_products(primes: &[u64], x: u64) -> u64 {
    fn go(primes: &[u64], start: usize, prod: u64, x: u64) -> u64 {
        let mut n = 1;
        for i in start..primes.len() {
            let next = prod.saturating_mul(primes[i]);
            if next > x {
                break;
            }
            n += go(primes, i + 1, next, x);
        }
        n
    }
    go(primes, 0, 1, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(a: [i64; 5]) -> CurveContext {
        CurveContext::new(&CurveQ::from_i64(a).unwrap()).unwrap()
    }

    #[test]
    fn admissibility() {
        let c14 = ctx([1, 0, 1, 4, -6]);
        assert!(c14.is_admissible(3).unwrap());
        let c69 = ctx([1, 0, 1, -1, -1]);
        assert!(!c69.is_admissible(11).unwrap());
        assert!(matches!(c69.is_admissible(23), Err(Error::DividesLevel(_))));
        let c20 = ctx([0, 1, 0, 4, 4]);
        assert!(c20.is_admissible(7).unwrap());
    }

    #[test]
    fn kinds() {
        assert_eq!(classify_kind(5, 11), Kind::Second);
        // 13 ≡ 1 mod 4, (−11/13) = −1
        assert_eq!(kronecker_i64(-11, 13), -1);
        assert_eq!(classify_kind(13, 11), Kind::First);
        // 7 ≡ 3 mod 4 and (−11/7) = (3/7) = −1 → second
        assert_eq!(classify_kind(7, 11), Kind::Second);
    }

    #[test]
    fn heegner_primes_69a1() {
        assert_eq!(ctx([1, 0, 1, -1, -1]).heegner_primes(300)[..6], [11, 83, 107, 191, 227, 251]);
    }

    #[test]
    fn strengthened_family_search() {
        let c = ctx([1, 0, 1, -1, -1]);
        // admissible q are inert in Q(√3), so (M/3) = (−1)^r and odd r never qualifies
        assert!(strengthened_families(&c, 1000, 12, 1, 6).is_empty());
        for r in [0, 2] {
            let fams = strengthened_families(&c, 1000, 12, r, 6);
            assert_eq!(fams.len(), 6, "r = {}", r);
            for f in &fams {
                assert!(f.strengthened(), "{:?}", f.failed_clauses());
                assert_eq!(f.r, r);
                assert_eq!(f.m.mod_u(4), 1);
            }
        }
    }

    #[test]
    fn family_construction() {
        let e = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap();
        let f = build_twist_family(&e, 191, &[7]).unwrap();
        assert_eq!(f.m, -7);
        assert!(f.p_is_minus_one_mod_8);
        assert!(!f.strengthened());
        let f0 = build_twist_family(&e, 11, &[]).unwrap();
        assert_eq!(f0.m, 1);
        assert_eq!(f0.em, e);
        assert_eq!(f0.epm, e.quadratic_twist(&Integer::from(-11)).unwrap());
        let e14 = CurveQ::from_i64([1, 0, 1, 4, -6]).unwrap();
        let f = build_twist_family(&e14, 31, &[3, 5]).unwrap();
        assert_eq!(f.m, -15);
        assert_eq!(f.minus_pm(), 465);
        assert!(matches!(build_twist_family(&e, 13, &[]), Err(Error::InvalidHeegnerPrime(..))));
        assert!(matches!(build_twist_family(&e, 11, &[5, 5]), Err(Error::DuplicatePrime(_))));
        assert!(matches!(build_twist_family(&e, 11, &[13]), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn density_small() {
        let c = ctx([1, 0, 1, 4, -6]);
        let d = admissible_density_in(&c, 2, Exec::Sequential);
        assert_eq!(d.admissible, 0);
        assert_eq!(count_products(&[3, 5, 7], 20), 5);
    }
}
