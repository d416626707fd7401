//! Integer primitives, Kronecker symbols, factorisation and Frobenius traces.

use rug::integer::IsPrime;
use rug::{Assign, Integer};

use crate::curve::CurveQ;
use crate::error::{Error, Result};
use crate::localdata::{self, Reduction};
use crate::par::{self, Exec};

/// Kronecker symbol (a/n).
pub fn kronecker(a: &Integer, n: &Integer) -> i32 {
    a.kronecker(n)
}

pub fn kronecker_i64(a: i64, n: i64) -> i32 {
    Integer::from(a).kronecker(&Integer::from(n))
}

pub fn is_prime(n: &Integer) -> bool {
    *n > 1 && n.is_probably_prime(40) != IsPrime::No
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(&Integer::from(n))
}

/// The signed prime q* = (−1)^((q−1)/2)·q, always ≡ 1 mod 4.
pub fn q_star(q: u64) -> i64 {
    if q % 4 == 1 {
        q as i64
    } else {
        -(q as i64)
    }
}

/// Sieve of Eratosthenes, primes ≤ n.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Exponent of the prime `p` in `n` (n ≠ 0).
pub fn valuation(n: &Integer, p: &Integer) -> u32 {
    if *n == 0 {
        return u32::MAX;
    }
    let mut m = n.clone();
    m.remove_factor_mut(p)
}

pub fn valuation_u(n: &Integer, p: u64) -> u32 {
    valuation(n, &Integer::from(p))
}

const TRIAL_LIMIT: u32 = 1 << 16;

/// Prime factorisation of |n| in increasing order. `n` must be nonzero.
pub fn factor(n: &Integer) -> Vec<(Integer, u32)> {
    factor_with_hints(n, &[])
}

/// Factor |n|, dividing out the `hints` first (they need not divide n).
pub fn factor_with_hints(n: &Integer, hints: &[Integer]) -> Vec<(Integer, u32)> {
    assert!(*n != 0, "factor of zero");
    let mut m = Integer::from(n.abs_ref());
    let mut out: Vec<(Integer, u32)> = Vec::new();
    for h in hints {
        if *h > 1 && m.is_divisible(h) {
            if is_prime(h) {
                let e = m.remove_factor_mut(h);
                out.push((h.clone(), e));
            } else {
                for (p, _) in factor(h) {
                    let e = m.remove_factor_mut(&p);
                    if e > 0 {
                        out.push((p, e));
                    }
                }
            }
        }
    }
    let mut d = 2u32;
    while d < TRIAL_LIMIT && m > 1 {
        if Integer::from(d) * d > m {
            break;
        }
        if m.is_divisible_u(d) {
            let e = m.remove_factor_mut(&Integer::from(d));
            out.push((Integer::from(d), e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        let mut stack = vec![m];
        while let Some(x) = stack.pop() {
            if x == 1 {
                continue;
            }
            if is_prime(&x) {
                let mut e = 1;
                if let Some(pos) = out.iter().position(|(p, _)| *p == x) {
                    e += out[pos].1;
                    out.remove(pos);
                }
                out.push((x, e));
                continue;
            }
            if let Some(r) = perfect_power_root(&x) {
                stack.push(r.clone());
                let mut y = x.clone();
                y /= &r;
                stack.push(y);
                continue;
            }
            let f = pollard_brent(&x);
            let mut g = x.clone();
            g /= &f;
            stack.push(f);
            stack.push(g);
        }
    }
    // merge duplicates from hints and the splitting loop
    out.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Integer, u32)> = Vec::new();
    for (p, e) in out {
        match merged.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => merged.push((p, e)),
        }
    }
    merged
}

fn perfect_power_root(x: &Integer) -> Option<Integer> {
    if !x.is_perfect_power() {
        return None;
    }
    for k in (2..=x.significant_bits()).rev() {
        let (r, rem) = x.clone().root_rem(Integer::new(), k);
        if rem == 0 && r > 1 {
            return Some(r);
        }
    }
    None
}

/// A nontrivial factor of the odd composite `n`.
fn pollard_brent(n: &Integer) -> Integer {
    if n.is_even() {
        return Integer::from(2);
    }
    let mut c = Integer::from(1);
    loop {
        let f = |v: &Integer| -> Integer {
            let mut w = Integer::from(v * v);
            w += &c;
            w %= n;
            w
        };
        let mut y = Integer::from(2);
        let mut r: u64 = 1;
        let mut q = Integer::from(1);
        let mut g = Integer::from(1);
        let mut x = Integer::new();
        let mut ys = Integer::new();
        let m = 128u64;
        while g == 1 {
            x.assign(&y);
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys.assign(&y);
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = Integer::from(&x - &y).abs();
                    q *= diff;
                    q %= n;
                }
                g = q.clone().gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = Integer::from(&x - &ys).abs().gcd(n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
        c += 1;
    }
}

/// Squarefree part of n (sign kept): n = s·m² with s squarefree.
pub fn squarefree_part(n: &Integer) -> Integer {
    assert!(*n != 0);
    let mut s = Integer::from(n.signum_ref());
    for (p, e) in factor(n) {
        if e % 2 == 1 {
            s *= p;
        }
    }
    s
}

pub fn is_squarefree(n: &Integer) -> bool {
    *n != 0 && factor(n).iter().all(|(_, e)| *e == 1)
}

/// Distinct prime divisors of |n|.
pub fn prime_divisors(n: &Integer) -> Vec<Integer> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Integer square root test.
pub fn is_square(n: &Integer) -> bool {
    *n >= 0 && n.is_perfect_square()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrobeniusTrace {
    pub q: u64,
    pub a_q: i64,
    pub good: bool,
}

impl FrobeniusTrace {
    /// |E(F_q)| for good q.
    pub fn point_count(&self) -> u64 {
        (self.q as i64 + 1 - self.a_q) as u64
    }
}

/// The five coefficients reduced into [0, q).
fn reduce_coeffs(e: &CurveQ, q: u64) -> [u64; 5] {
    let mut out = [0u64; 5];
    for (o, a) in out.iter_mut().zip(e.coeffs().iter()) {
        *o = a.mod_u(q as u32) as u64;
    }
    out
}

/// Count affine solutions plus the point at infinity, directly on the long model.
pub fn count_points_naive(e: &CurveQ, q: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = reduce_coeffs(e, q);
    let mut n = 1;
    for x in 0..q {
        let rhs = (x * x % q * x + a2 * x % q * x + a4 * x + a6) % q;
        for y in 0..q {
            let lhs = (y * y + a1 * x % q * y + a3 * y) % q;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// a_q at an odd prime of good reduction as −Σ χ(4x³ + b2x² + 2b4x + b6).
fn trace_odd(e: &CurveQ, q: u64) -> i64 {
    let qi = q as u32;
    let b2 = e.b2().mod_u(qi) as u64;
    let b4 = e.b4().mod_u(qi) as u64;
    let b6 = e.b6().mod_u(qi) as u64;
    let mut chi = vec![-1i8; q as usize];
    chi[0] = 0;
    for x in 1..=(q / 2) {
        chi[(x * x % q) as usize] = 1;
    }
    // f(x) = 4x³ + b2x² + 2b4x + b6 stepped by forward differences, all residues kept in [0, q)
    let add = |a: u64, b: u64| if a + b >= q { a + b - q } else { a + b };
    let f = |x: u64| ((4 * x % q * x % q * x) % q + b2 * x % q * x % q + 2 * b4 % q * x + b6) % q;
    let (f0, f1, f2) = (f(0), f(1 % q), f(2 % q));
    let sub = |a: u64, b: u64| if a >= b { a - b } else { a + q - b };
    let mut v = f0;
    let mut d1 = sub(f1, f0);
    let mut d2 = sub(sub(f2, 2 * f1 % q), q - f0);
    let d3 = 24 % q;
    let mut s: i64 = 0;
    for _ in 0..q {
        s += chi[v as usize] as i64;
        v = add(v, d1);
        d1 = add(d1, d2);
        d2 = add(d2, d3);
    }
    -s
}

/// a_q for a prime q of good reduction on the given model; q = 2 uses direct enumeration.
pub fn trace_good(e: &CurveQ, q: u64) -> i64 {
    if q == 2 {
        3 - count_points_naive(e, 2) as i64
    } else {
        trace_odd(e, q)
    }
}

/// Trace of Frobenius at `q`; bad primes return the split/nonsplit/additive code.
pub fn trace_of_frobenius(e: &CurveQ, q: u64) -> Result<FrobeniusTrace> {
    if !is_prime_u64(q) {
        return Err(Error::CompositeModulus(q.to_string()));
    }
    let m = e.minimal_model();
    if m.discriminant().is_divisible_u(q as u32) {
        return Err(Error::BadReduction(q.to_string()));
    }
    Ok(FrobeniusTrace { q, a_q: trace_good(&m, q), good: true })
}

/// a_q at any prime, bad primes encoded as +1 split, −1 nonsplit, 0 additive.
pub fn ap_any(e: &CurveQ, q: u64) -> FrobeniusTrace {
    let m = e.minimal_model();
    if m.discriminant().is_divisible_u(q as u32) {
        let ld = localdata::tate_algorithm(&m, &Integer::from(q));
        FrobeniusTrace { q, a_q: ld.reduction.ap_code(), good: false }
    } else {
        FrobeniusTrace { q, a_q: trace_good(&m, q), good: true }
    }
}

/// a_p for all primes p ≤ bound, in increasing order of p.
pub fn trace_table(e: &CurveQ, bound: u64, exec: Exec) -> Vec<FrobeniusTrace> {
    let m = e.minimal_model();
    let bad: Vec<(u64, i64)> = localdata::local_data(&m)
        .into_iter()
        .filter_map(|ld| ld.prime.to_u64().map(|p| (p, ld.reduction.ap_code())))
        .collect();
    let primes = primes_up_to(bound);
    par::map(exec, &primes, |&p| {
        if let Some(&(_, code)) = bad.iter().find(|(q, _)| *q == p) {
            FrobeniusTrace { q: p, a_q: code, good: false }
        } else {
            FrobeniusTrace { q: p, a_q: trace_good(&m, p), good: true }
        }
    })
}

/// Extend prime traces multiplicatively to a_1..a_nmax (index 0 unused and zero).
pub fn an_from_traces(traces: &[FrobeniusTrace], nmax: usize) -> Vec<i64> {
    let mut a = vec![0i64; nmax + 1];
    if nmax == 0 {
        return a;
    }
    // smallest-prime-factor sieve
    let mut spf = vec![0u32; nmax + 1];
    for i in 2..=nmax {
        if spf[i] == 0 {
            let mut j = i;
            while j <= nmax {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut tr = vec![(0i64, true); nmax + 1];
    for t in traces {
        if (t.q as usize) <= nmax {
            tr[t.q as usize] = (t.a_q, t.good);
        }
    }
    a[1] = 1;
    for n in 2..=nmax {
        let p = spf[n] as usize;
        let mut m = n / p;
        let mut pk = p;
        while m.is_multiple_of(p) {
            m /= p;
            pk *= p;
        }
        if m > 1 {
            a[n] = a[m] * a[pk];
            continue;
        }
        // n = p^k
        let (ap, good) = tr[p];
        if pk == p {
            a[n] = ap;
        } else if good {
            a[n] = ap * a[pk / p] - (p as i64) * a[pk / p / p];
        } else {
            a[n] = ap * a[pk / p];
        }
    }
    a
}

/// Dirichlet coefficients a_1..a_nmax of L(E, s).
pub fn an_coefficients(e: &CurveQ, nmax: usize, exec: Exec) -> Vec<i64> {
    let traces = trace_table(e, nmax as u64, exec);
    an_from_traces(&traces, nmax)
}

/// Traces of the quadratic twist E^(D), reusing the traces of E at primes not dividing D·N.
///
/// `twist` must be the minimal model of E^(D); its bad primes are read from Tate's algorithm.
pub fn twist_traces(base: &[FrobeniusTrace], d: &Integer, twist: &CurveQ) -> Vec<FrobeniusTrace> {
    let bad: Vec<(u64, i64)> = localdata::local_data(twist)
        .into_iter()
        .filter_map(|ld| ld.prime.to_u64().map(|p| (p, ld.reduction.ap_code())))
        .collect();
    base.iter()
        .map(|t| {
            if let Some(&(_, code)) = bad.iter().find(|(q, _)| *q == t.q) {
                FrobeniusTrace { q: t.q, a_q: code, good: false }
            } else if t.good && !d.is_divisible_u(t.q as u32) {
                let chi = kronecker(d, &Integer::from(t.q)) as i64;
                FrobeniusTrace { q: t.q, a_q: chi * t.a_q, good: true }
            } else {
                // good for the twist but not for E (or q | D with good twist): count directly
                FrobeniusTrace { q: t.q, a_q: trace_good(twist, t.q), good: true }
            }
        })
        .collect()
}

/// Reduction type code helper so callers can match without the localdata import.
pub fn reduction_code(r: Reduction) -> i64 {
    r.ap_code()
}

#[cfg(test)]
mod tests {
    use crate::ext::PowRef;
    use super::*;

    fn c(a: [i64; 5]) -> CurveQ {
        CurveQ::from_i64(a).unwrap()
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker_i64(-1, 3), -1);
        assert_eq!(kronecker_i64(73, 7), -1);
        assert_eq!(kronecker_i64(-23, 5), -1);
        assert_eq!(kronecker_i64(-7, 2), 1);
        assert_eq!(kronecker_i64(-5, 2), -1);
        assert_eq!(kronecker_i64(-15, 2), 1);
    }

    #[test]
    fn q_star_is_one_mod_four() {
        for q in primes_up_to(500).into_iter().skip(1) {
            assert_eq!(q_star(q).rem_euclid(4), 1);
        }
    }

    #[test]
    fn factor_and_squarefree() {
        let f = factor(&Integer::from(-207));
        assert_eq!(f, vec![(Integer::from(3), 2), (Integer::from(23), 1)]);
        assert_eq!(squarefree_part(&Integer::from(-207)), -23);
        assert_eq!(squarefree_part(&Integer::from(72)), 2);
        let big = Integer::from(1_000_003u64) * Integer::from(998_244_353u64) * 12;
        let f = factor(&big);
        assert_eq!(f.len(), 4);
        let back = f.iter().fold(Integer::from(1), |acc, (p, e)| acc * Integer::from(p.pow_ref(*e)));
        assert_eq!(back, big);
        let hinted = factor_with_hints(&Integer::from(7 * 7 * 7 * 13), &[Integer::from(7), Integer::from(5)]);
        assert_eq!(hinted, vec![(Integer::from(7), 3), (Integer::from(13), 1)]);
        let pp = Integer::from(1_000_003u64).pow_ref(3);
        assert_eq!(factor(&pp), vec![(Integer::from(1_000_003u64), 3)]);
    }

    #[test]
    fn sieve() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(primes_up_to(1).is_empty());
    }

    #[test]
    fn traces_69a1() {
        let e = c([1, 0, 1, -1, -1]);
        assert_eq!(ap_any(&e, 2).a_q, 1);
        assert_eq!(ap_any(&e, 3).a_q, 1);
        assert_eq!(ap_any(&e, 23).a_q, -1);
        let a5 = trace_of_frobenius(&e, 5).unwrap().a_q;
        assert_eq!(a5 % 4, 0);
        assert_eq!(a5, 5 + 1 - count_points_naive(&e, 5) as i64);
        assert!(matches!(trace_of_frobenius(&e, 23), Err(Error::BadReduction(_))));
        assert!(matches!(trace_of_frobenius(&e, 9), Err(Error::CompositeModulus(_))));
        let an = an_coefficients(&e, 10, Exec::Sequential);
        assert_eq!(an[1], 1);
        assert_eq!(an[6], 1);
    }

    #[test]
    fn cm_curve_supersingular() {
        let e = c([0, 0, 0, 1, 0]);
        for q in [3u64, 7, 11, 19, 23] {
            assert_eq!(trace_of_frobenius(&e, q).unwrap().a_q, 0);
        }
    }

    #[test]
    fn twist_traces_match_direct() {
        let e = c([1, 0, 1, -1, -1]);
        let d = Integer::from(-7);
        let t = e.quadratic_twist(&d).unwrap();
        let base = trace_table(&e, 200, Exec::Sequential);
        let tw = twist_traces(&base, &d, &t);
        let direct = trace_table(&t, 200, Exec::Sequential);
        assert_eq!(tw, direct);
    }

    #[test]
    fn traces_match_brute_force_count() {
        // small pseudo-random curves, checked against enumeration of all (x, y)
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 21) as i64 - 10
        };
        let mut done = 0;
        while done < 20 {
            let a = [next().rem_euclid(2), next(), next().rem_euclid(2), next(), next()];
            let Ok(e) = CurveQ::from_i64(a) else { continue };
            for q in primes_up_to(100).into_iter().skip(1) {
                if e.discriminant().is_divisible_u(q as u32) {
                    continue;
                }
                assert_eq!(trace_good(&e, q), q as i64 + 1 - count_points_naive(&e, q) as i64, "{:?} q={}", a, q);
            }
            done += 1;
        }
    }

    #[test]
    fn an_multiplicative() {
        let e = c([1, 0, 1, -1, -1]);
        let an = an_coefficients(&e, 2000, Exec::Sequential);
        let mut checked = 0;
        for m in 1..45usize {
            for n in 1..45usize {
                if Integer::from(m).gcd(&Integer::from(n)) == 1 {
                    assert_eq!(an[m * n], an[m] * an[n]);
                    checked += 1;
                }
            }
        }
        assert!(checked > 200);
    }
}
