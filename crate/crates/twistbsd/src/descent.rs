//! Descent via a rational 2-isogeny.
//!
//! For E: y² = x³ + ax² + bx and d ∈ Q*/Q*², the torsor
//! C_d: d·w² = d² − 2ad·z² + (a² − 4b)·z⁴ represents a class of Sel_φ(E) when it is
//! solvable over every completion of Q. Multiplying by d gives Y² = g(z) with
//! g = d(a² − 4b)z⁴ − 2ad²z² + d³, which is what the local tests below work on.

use std::fmt;

use rug::{Integer, Rational};

use crate::arith::{self, kronecker};
use crate::curve::TwoIsogenyPair;
use crate::point::RationalPoint;
use crate::error::Result;
use crate::par::{self, Exec};

/// A completion of Q.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Infinity,
    Prime(Integer),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{}", p),
        }
    }
}

/// Binary quartic d·b'·x⁴ − 2a·d²·x²z² + d³·z⁴ for the torsor of class d over (a, b').
#[derive(Debug, Clone)]
pub struct Quartic {
    /// Coefficients of g(x, 1) in ascending degree.
    pub c: [Integer; 5],
}

impl Quartic {
    pub fn torsor(a: &Integer, bprime: &Integer, d: &Integer) -> Quartic {
        let d2 = Integer::from(d.square_ref());
        let d3 = Integer::from(&d2 * d);
        Quartic {
            c: [
                d3,
                Integer::new(),
                (-2 * Integer::from(a * &d2)),
                Integer::new(),
                Integer::from(d * bprime),
            ],
        }
    }

    fn reversed(&self) -> Vec<Integer> {
        self.c.iter().rev().cloned().collect()
    }
}

fn eval(c: &[Integer], t: &Integer) -> Integer {
    let mut v = Integer::new();
    for ci in c.iter().rev() {
        v *= t;
        v += ci;
    }
    v
}

fn deriv_eval(c: &[Integer], t: &Integer) -> Integer {
    let mut v = Integer::new();
    for (i, ci) in c.iter().enumerate().skip(1).rev() {
        v *= t;
        v += Integer::from(ci * i as u32);
    }
    v
}

/// Coefficients of h(t0 + s·scale) as a polynomial in s.
fn taylor_shift(c: &[Integer], t0: &Integer, scale: &Integer) -> Vec<Integer> {
    let mut out: Vec<Integer> = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let add = Integer::from(&out[j + 1] * t0);
            out[j] += add;
        }
    }
    let mut sk = Integer::from(1);
    for o in out.iter_mut() {
        *o *= &sk;
        sk *= scale;
    }
    out
}

fn val(n: &Integer, p: &Integer) -> u32 {
    arith::valuation(n, p)
}

/// Is the nonzero integer u a square in Q_p?
pub fn is_square_qp(u: &Integer, p: &Integer) -> bool {
    if *u == 0 {
        return true;
    }
    let mut w = u.clone();
    let v = w.remove_factor_mut(p);
    if v % 2 == 1 {
        return false;
    }
    if *p == 2 {
        w.mod_u(8) == 1
    } else {
        kronecker(&w, p) == 1
    }
}

const DEPTH_CAP: u32 = 400;

/// ∃ t ∈ Z_p with h(t) a square in Q_p (zero allowed).
fn zp_solvable(c: &[Integer], p: &Integer, depth: u32) -> bool {
    let mut c: Vec<Integer> = c.to_vec();
    if c.iter().all(|x| *x == 0) {
        return true;
    }
    let p2 = Integer::from(p.square_ref());
    while c.iter().all(|x| x.is_divisible(&p2)) {
        for x in c.iter_mut() {
            *x /= &p2;
        }
    }
    let residues: u64 = p.to_u64().expect("prime fits in u64");
    for r in 0..residues {
        let t0 = Integer::from(r);
        let u = eval(&c, &t0);
        if u == 0 || is_square_qp(&u, p) {
            return true;
        }
        let du = deriv_eval(&c, &t0);
        if du != 0 && val(&u, p) > 2 * val(&du, p) {
            return true;
        }
        let shifted = taylor_shift(&c, &t0, p);
        let v0 = val(&shifted[0], p);
        let rest = shifted[1..].iter().filter(|x| **x != 0).map(|x| val(x, p)).min().unwrap_or(u32::MAX);
        let decided = if *p == 2 { rest >= v0 + 3 } else { rest > v0 };
        if decided {
            continue;
        }
        if depth >= DEPTH_CAP {
            // undecided classes are treated as solvable so the Selmer group is never undercounted
            return true;
        }
        if zp_solvable(&shifted, p, depth + 1) {
            return true;
        }
    }
    false
}

/// Y² = g(x, z) has a nontrivial solution over Q_p.
pub fn locally_solvable_at(q: &Quartic, p: &Integer) -> bool {
    if zp_solvable(&q.c, p, 0) {
        return true;
    }
    // points with z ∈ pZ_p after swapping x and z
    let rev = q.reversed();
    let scaled = taylor_shift(&rev, &Integer::new(), p);
    zp_solvable(&scaled, p, 0)
}

/// Y² = A X² + B X + C with X = x² ≥ 0 (together with X = ∞) has a real solution.
pub fn real_solvable(q: &Quartic) -> bool {
    let c = &q.c[0];
    let b = &q.c[2];
    let a = &q.c[4];
    if *a > 0 || *c >= 0 {
        return true;
    }
    // a < 0, c < 0: the maximum over X ≥ 0 sits at X* = −b/(2a), needs X* > 0 and b² ≥ 4ac
    let x_star_pos = *b > 0;
    let disc = Integer::from(b.square_ref()) - (4 * Integer::from(a * c));
    x_star_pos && disc >= 0
}

pub fn solvable_at(q: &Quartic, place: &Place) -> bool {
    match place {
        Place::Infinity => real_solvable(q),
        Place::Prime(p) => locally_solvable_at(q, p),
    }
}

/// The places where solvability can fail: ∞, 2 and the primes dividing b·(a² − 4b).
pub fn relevant_places(a: &Integer, b: &Integer) -> Vec<Place> {
    let bprime = Integer::from(a.square_ref()) - Integer::from(4 * b);
    let prod = 2 * Integer::from(b * &bprime);
    let mut out = vec![Place::Infinity];
    out.extend(arith::prime_divisors(&prod).into_iter().map(Place::Prime));
    out
}

/// Signed squarefree divisors supported on {−1} ∪ primes(2·b').
fn candidates(bprime: &Integer) -> Vec<Integer> {
    let mut primes = vec![Integer::from(-1)];
    primes.extend(arith::prime_divisors(&Integer::from(2 * bprime)));
    let mut out = vec![Integer::from(1)];
    for p in primes {
        let extra: Vec<Integer> = out.iter().map(|d| Integer::from(d * &p)).collect();
        out.extend(extra);
    }
    out
}

/// A class d lies in the Selmer group attached to (a, b).
pub fn in_selmer(a: &Integer, b: &Integer, d: &Integer, places: &[Place]) -> bool {
    let bprime = Integer::from(a.square_ref()) - Integer::from(4 * b);
    let q = Quartic::torsor(a, &bprime, d);
    places.iter().all(|v| solvable_at(&q, v))
}

/// Elements of the φ-Selmer group for E: y² = x³ + ax² + bx, as squarefree integers.
pub fn selmer_elements(a: &Integer, b: &Integer, exec: Exec) -> Vec<Integer> {
    let bprime = Integer::from(a.square_ref()) - Integer::from(4 * b);
    let places = relevant_places(a, b);
    let cands = candidates(&bprime);
    let keep = par::map(exec, &cands, |d| in_selmer(a, b, d, &places));
    let mut out: Vec<Integer> = cands.into_iter().zip(keep).filter(|(_, k)| *k).map(|(d, _)| d).collect();
    out.sort_by(|x, y| x.clone().abs().cmp(&y.clone().abs()).then(x.cmp(y)));
    out
}

/// Product of two classes in Q*/Q*², as a squarefree integer.
pub fn class_mul(x: &Integer, y: &Integer) -> Integer {
    arith::squarefree_part(&Integer::from(x * y))
}

/// An F₂-basis of the subgroup generated by `elems`.
pub fn f2_basis(elems: &[Integer]) -> Vec<Integer> {
    let mut span: Vec<Integer> = vec![Integer::from(1)];
    let mut basis = Vec::new();
    for e in elems {
        let e = arith::squarefree_part(e);
        if span.contains(&e) {
            continue;
        }
        let extra: Vec<Integer> = span.iter().map(|s| class_mul(s, &e)).collect();
        span.extend(extra);
        basis.push(e);
    }
    basis
}

fn dim_of(count: usize) -> u32 {
    count.trailing_zeros()
}

/// (dimension, basis) of Sel_φ(E) for the pair.
pub fn phi_selmer(pair: &TwoIsogenyPair, exec: Exec) -> (u32, Vec<Integer>) {
    let el = selmer_elements(&pair.a, &pair.b, exec);
    (dim_of(el.len()), f2_basis(&el))
}

/// (dimension, basis) of Sel_φ'(E') for the dual isogeny.
pub fn phi_dual_selmer(pair: &TwoIsogenyPair, exec: Exec) -> (u32, Vec<Integer>) {
    let a2 = Integer::from(-2 * &pair.a);
    let b2 = pair.a2_minus_4b();
    let el = selmer_elements(&a2, &b2, exec);
    (dim_of(el.len()), f2_basis(&el))
}

/// Number of classes in Q_v*/Q_v*² whose torsor is solvable at v: the size of the local Kummer image.
pub fn local_image_size(a: &Integer, b: &Integer, place: &Place) -> usize {
    let bprime = Integer::from(a.square_ref()) - Integer::from(4 * b);
    let reps: Vec<Integer> = match place {
        Place::Infinity => vec![Integer::from(1), Integer::from(-1)],
        Place::Prime(p) if *p == 2 => [1, -1, 5, -5, 2, -2, 10, -10].into_iter().map(Integer::from).collect(),
        Place::Prime(p) => {
            let mut u = Integer::from(2);
            while kronecker(&u, p) != -1 {
                u += 1;
            }
            vec![Integer::from(1), u.clone(), p.clone(), Integer::from(&u * p)]
        }
    };
    reps.iter().filter(|d| solvable_at(&Quartic::torsor(a, &bprime, d), place)).count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasselsCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub equal: bool,
    /// (place, |κ_{v,φ}|)
    pub local_images: Vec<(Place, usize)>,
}

/// |Sel_φ(E)|/|Sel_φ'(E')| against Π_v |κ_{v,φ}(E)|/2.
pub fn cassels_check(pair: &TwoIsogenyPair, exec: Exec) -> CasselsCheck {
    let (s, _) = phi_selmer(pair, exec);
    let (s2, _) = phi_dual_selmer(pair, exec);
    cassels_from_dims(pair, s, s2)
}

fn cassels_from_dims(pair: &TwoIsogenyPair, s: u32, s2: u32) -> CasselsCheck {
    let lhs = Rational::from((Integer::from(1) << s, Integer::from(1) << s2));
    let places = relevant_places(&pair.a, &pair.b);
    let mut rhs = Rational::from(1);
    let mut local_images = Vec::new();
    for v in places {
        let k = local_image_size(&pair.a, &pair.b, &v);
        rhs *= Rational::from((k as u32, 2u32));
        local_images.push((v, k));
    }
    CasselsCheck { equal: lhs == rhs, lhs, rhs, local_images }
}

/// Search the torsor for the class d for a rational point with max(|u|, |v|) ≤ bound, z = u/v.
pub fn torsor_point(a: &Integer, bprime: &Integer, d: &Integer, bound: i64) -> Option<(i64, i64)> {
    // d·W² = d²v⁴ − 2ad·u²v² + b'u⁴ with W = w·v²
    let d2 = Integer::from(d.square_ref());
    for v in 0..=bound {
        for u in 0..=bound {
            if (u == 0 && v == 0) || Integer::from(u).gcd(&Integer::from(v)) != 1 {
                continue;
            }
            let (ui, vi) = (Integer::from(u), Integer::from(v));
            let u2 = Integer::from(ui.square_ref());
            let v2 = Integer::from(vi.square_ref());
            let rhs = (&d2 * Integer::from(v2.square_ref()))
                - (Integer::from(2 * a) * d) * Integer::from(&u2 * &v2)
                + (bprime * Integer::from(u2.square_ref()));
            if !rhs.is_divisible(d) {
                continue;
            }
            let w2 = rhs / d;
            if w2 >= 0 && w2.is_perfect_square() {
                return Some((u, v));
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct SelmerReport {
    pub sel_phi_dim: u32,
    pub sel_phi_dual_dim: u32,
    /// Exact when the exact sequence pins it down.
    pub sel2_dim: Option<u32>,
    pub sel2_bounds: (u32, u32),
    pub generators_phi: Vec<Integer>,
    pub generators_phi_dual: Vec<Integer>,
    pub sha2_dim: Option<i64>,
    pub rank_used: Option<u32>,
    pub rank_conditional: bool,
    pub cassels: CasselsCheck,
    /// |κ_{v,φ'}(E')| for completeness.
    pub local_images_dual: Vec<(Place, usize)>,
}

/// Sel₂(E) from the exact sequence 0 → E'[φ']/φ(E[2]) → Sel_φ(E) → Sel₂(E) → Sel_φ'(E').
///
/// `rank` is the Mordell–Weil rank used for the Ш[2] deduction (from the analytic side).
pub fn two_selmer(pair: &TwoIsogenyPair, rank: Option<u32>, exec: Exec) -> Result<SelmerReport> {
    two_selmer_with_points(pair, rank, &[], exec)
}

/// Class of x(P) in Q*/Q*², read on y² = x³ + ax² + bx; this is the image of P in Sel_φ'(E').
pub fn dual_class_of_point(pair: &TwoIsogenyPair, pt: &RationalPoint) -> Option<Integer> {
    let (min, iso) = pair.e_ab.minimal_model_with_iso();
    if min.coeffs() != pair.e.coeffs() {
        return None;
    }
    match iso.inverse().map_point(pt) {
        RationalPoint::Infinity => Some(Integer::from(1)),
        RationalPoint::Affine { x, .. } => {
            if x == 0 {
                Some(arith::squarefree_part(&pair.b))
            } else {
                Some(arith::squarefree_part(&Integer::from(x.numer() * x.denom())))
            }
        }
    }
}

/// As [`two_selmer`], with known points of E(Q) (on the minimal model) used to realise Sel_φ'(E') classes.
pub fn two_selmer_with_points(pair: &TwoIsogenyPair, rank: Option<u32>, points: &[RationalPoint], exec: Exec) -> Result<SelmerReport> {
    let (s, gens) = phi_selmer(pair, exec);
    let dual = pair.dual()?;
    let (s2, gens2) = phi_selmer(&dual, exec);
    // dim of E'(Q)[φ']/φ(E(Q)[2]): 1 unless E has full rational 2-torsion
    let e_full = pair.e.rational_two_torsion().len() == 3;
    let t = if e_full { 0 } else { 1 };
    // classes of Sel_φ'(E') realised by global points of E lie in the image of Sel₂(E)
    let elems2 = selmer_elements(&dual.a, &dual.b, exec);
    let bpp = dual.a2_minus_4b();
    let realised: Vec<Integer> = elems2
        .iter()
        .filter(|d| torsor_point(&dual.a, &bpp, d, 60).is_some())
        .cloned()
        .chain(points.iter().filter_map(|p| dual_class_of_point(pair, p)))
        .collect();
    let g = f2_basis(&realised).len() as u32;
    let lo = s - t + g;
    let hi = s - t + s2;
    let sel2 = (lo == hi).then_some(lo);
    let dim_e2 = if e_full { 2 } else { 1 };
    let sha2 = match (sel2, rank) {
        (Some(v), Some(r)) => Some(v as i64 - r as i64 - dim_e2),
        _ => None,
    };
    let cassels = cassels_from_dims(pair, s, s2);
    let local_images_dual = relevant_places(&dual.a, &dual.b)
        .into_iter()
        .map(|v| {
            let k = local_image_size(&dual.a, &dual.b, &v);
            (v, k)
        })
        .collect();
    Ok(SelmerReport {
        sel_phi_dim: s,
        sel_phi_dual_dim: s2,
        sel2_dim: sel2,
        sel2_bounds: (lo, hi),
        generators_phi: gens,
        generators_phi_dual: gens2,
        sha2_dim: sha2,
        rank_used: rank,
        rank_conditional: rank.is_some(),
        cassels,
        local_images_dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveQ;

    fn pair(a: [i64; 5]) -> TwoIsogenyPair {
        CurveQ::from_i64(a).unwrap().two_isogeny_pair().unwrap()
    }

    #[test]
    fn square_tests() {
        let two = Integer::from(2);
        assert!(is_square_qp(&Integer::from(17), &two));
        assert!(!is_square_qp(&Integer::from(5), &two));
        assert!(is_square_qp(&Integer::from(4 * 9), &two));
        assert!(!is_square_qp(&Integer::from(2), &two));
        let seven = Integer::from(7);
        assert!(is_square_qp(&Integer::from(2), &seven));
        assert!(!is_square_qp(&Integer::from(3), &seven));
        assert!(!is_square_qp(&Integer::from(7), &seven));
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let c: Vec<Integer> = [3, -1, 4, 1, -5].into_iter().map(Integer::from).collect();
        let t0 = Integer::from(2);
        let sc = Integer::from(3);
        let sh = taylor_shift(&c, &t0, &sc);
        for s in -3i64..4 {
            let si = Integer::from(s);
            let x = Integer::from(&t0 + Integer::from(&si * &sc));
            assert_eq!(eval(&sh, &si), eval(&c, &x));
        }
    }

    #[test]
    fn trivial_and_torsion_classes() {
        let p = pair([1, 0, 1, -1, -1]);
        let el = selmer_elements(&p.a, &p.b, Exec::Sequential);
        assert!(el.contains(&Integer::from(1)));
        assert!(el.contains(&arith::squarefree_part(&p.a2_minus_4b())));
    }

    #[test]
    fn selmer_69a1() {
        let p = pair([1, 0, 1, -1, -1]);
        let rep = two_selmer(&p, Some(0), Exec::Sequential).unwrap();
        assert_eq!(rep.sel_phi_dim, 1);
        assert_eq!(rep.sel_phi_dual_dim, 1);
        assert_eq!(rep.sel2_dim, Some(1));
        assert_eq!(rep.sha2_dim, Some(0));
        assert!(rep.cassels.equal);
        let inf = local_image_size(&p.a, &p.b, &Place::Infinity);
        assert_eq!(inf, 2);
        let d = p.dual().unwrap();
        assert_eq!(local_image_size(&d.a, &d.b, &Place::Infinity), 1);
    }

    #[test]
    fn rank_one_curve_has_larger_selmer() {
        // 69a1 twisted by −191: Sel_φ = (Z/2)², Sel_φ' = Z/2
        let e = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap().quadratic_twist(&Integer::from(-191)).unwrap();
        let p = e.two_isogeny_pair().unwrap();
        let rep = two_selmer(&p, Some(1), Exec::Sequential).unwrap();
        assert_eq!((rep.sel_phi_dim, rep.sel_phi_dual_dim), (2, 1));
        assert_eq!(rep.sel2_dim, Some(2));
        assert_eq!(rep.sha2_dim, Some(0));
        assert!(rep.cassels.equal);
        assert_eq!(rep.cassels.lhs, 2);
    }
}
