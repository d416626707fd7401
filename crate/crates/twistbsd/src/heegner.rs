//! Heegner points on X₀(N) for K = Q(√−p), numerically, for conductors 1 and q.
//!
//! CM points come from forms [N·a, b, c] of discriminant −p·c² with b ≡ β mod 2N for a
//! fixed square root β of −p·c² mod 4N; one form per class of the order. The modular
//! parametrisation Φ(τ) = Σ aₙ/n·qⁿ is summed in C/Λ_E, assuming E is the optimal curve
//! of its isogeny class with Manin constant 1.

use rug::{Float, Integer, Rational};

use crate::analytic::{self, recognize_rational_tol};
use crate::arith::{self, kronecker};
use crate::complex::{bits_for_digits, pi, Complex};
use crate::curve::{CurveQ, TwistMap};
use crate::error::{Error, Result};
use crate::families::{ord2_rational, TwistFamily};
use crate::forms::{class_number, QuadForm};
use crate::height::{canonical_height, elliptic_log, Lattice};
use crate::localdata;
use crate::par::{self, Exec};
use crate::point::RationalPoint;

const MAX_TERMS: usize = 2_000_000;

/// A CM point τ = (−B + √disc)/(2A) with N | A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmPoint {
    pub form: QuadForm,
    /// Reduced representative of the form class.
    pub class: QuadForm,
    /// Genus character value on the class (1 at conductor 1).
    pub chi: i32,
}

impl CmPoint {
    /// Im τ as a float.
    pub fn im_tau(&self, prec: u32) -> Float {
        let (_, im2) = self.form.root_parts();
        Float::with_val(prec, &im2).sqrt()
    }

    pub fn tau(&self, prec: u32) -> Complex {
        let (re, _) = self.form.root_parts();
        Complex::new(Float::with_val(prec, &re), self.im_tau(prec))
    }
}

/// Smallest β ∈ [0, 2N) with β² ≡ disc mod 4N.
fn sqrt_disc_mod_4n(disc: &Integer, n: &Integer) -> Option<Integer> {
    let four_n = Integer::from(4 * n);
    let two_n = Integer::from(2 * n);
    let mut b = Integer::new();
    while b < two_n {
        let v = Integer::from(b.square_ref()) - disc;
        if v.is_divisible(&four_n) {
            return Some(b);
        }
        b += 1;
    }
    None
}

/// Reason the Heegner hypothesis fails for (N, −p), if it does.
pub fn heegner_hypothesis_failure(n: &Integer, p: u64) -> Option<String> {
    let mp = Integer::from(-(p as i64));
    for l in arith::prime_divisors(n) {
        let split = if l == 2 { mp.mod_u(8) == 1 } else { kronecker(&mp, &l) == 1 };
        if !split {
            return Some(format!("{} does not split in Q(√−{})", l, p));
        }
    }
    None
}

/// One CM point per class of discriminant −p·c², Galois orbit of the Heegner point of conductor c.
///
/// At c > 1 the genus character attached to c* is evaluated on each class.
pub fn heegner_cm_points(e: &CurveQ, p: u64, c: u64) -> Result<Vec<CmPoint>> {
    let em = e.minimal_model();
    let n = localdata::conductor(&em);
    heegner_cm_points_for_level(&n, p, c)
}

pub fn heegner_cm_points_for_level(n: &Integer, p: u64, c: u64) -> Result<Vec<CmPoint>> {
    if let Some(why) = heegner_hypothesis_failure(n, p) {
        return Err(Error::HeegnerHypothesisFails(why));
    }
    let ci = Integer::from(c);
    if Integer::from(ci.gcd_ref(&Integer::from(n * p))) != 1 {
        return Err(Error::HeegnerHypothesisFails(format!("conductor {} is not coprime to pN", c)));
    }
    let disc = Integer::from(-(p as i64)) * Integer::from(ci.square_ref());
    let beta = sqrt_disc_mod_4n(&disc, n).ok_or_else(|| Error::NoSquareRootOfDisc(disc.to_string()))?;
    let h = class_number(&disc)?;
    let two_n = Integer::from(2 * n);
    let mut out: Vec<CmPoint> = Vec::new();
    let mut a = 1u64;
    // every class is reached with N·a ≤ N·|disc|; the cap only guards against bugs
    let cap = (h as u64 + 4) * (p * c * c + 4);
    while out.len() < h {
        if a > cap {
            return Err(Error::HeegnerHypothesisFails(format!("only {} of {} classes found", out.len(), h)));
        }
        let big_a = Integer::from(n * a);
        let four_a = Integer::from(4 * &big_a);
        // b ≡ β mod 2N with −A < b ≤ A
        let mut b = Integer::from(&beta - &big_a);
        let r = rug::ops::RemRounding::rem_euc(Integer::from(&b - &beta), &two_n);
        b -= r;
        if b <= Integer::from(-&big_a) {
            b += &two_n;
        }
        while b <= big_a {
            let num = Integer::from(b.square_ref()) - &disc;
            if num.is_divisible(&four_a) {
                let f = QuadForm { a: big_a.clone(), b: b.clone(), c: num / &four_a };
                if f.is_primitive() {
                    let class = f.reduce();
                    if !out.iter().any(|p| p.class == class) {
                        let chi = if c == 1 { 1 } else { genus_character(&f, &ci) };
                        out.push(CmPoint { form: f, class, chi });
                    }
                }
            }
            b += &two_n;
        }
        a += 1;
    }
    out.sort_by(|x, y| x.class.cmp(&y.class));
    Ok(out)
}

/// (m/q) for a value m of the form coprime to q.
pub fn genus_character(f: &QuadForm, q: &Integer) -> i32 {
    let m = f.value_coprime_to(q).expect("primitive form represents a value prime to q");
    kronecker(&m, q)
}

/// Φ(τ) = Σ_{n ≤ terms} aₙ/n·e^{2πinτ}.
pub fn modular_parametrization(an: &[i64], tau: &Complex, terms: usize, prec: u32) -> Complex {
    let two_pi_i = Complex::new(Float::new(prec), Float::with_val(prec, 2 * pi(prec)));
    let q = (&two_pi_i * tau).exp();
    let mut qn = Complex::one(prec);
    let mut s = Complex::zero(prec);
    for (n, &a) in an.iter().enumerate().take(terms + 1).skip(1) {
        qn = &qn * &q;
        if a != 0 {
            let k = Float::with_val(prec, Float::with_val(prec, a) / n as u32);
            s = &s + &qn.scale(&k);
        }
    }
    s
}

/// Terms needed so that the tail of Φ at Im τ stays below 10^−digits.
pub fn truncation_terms(digits: u32, im_tau_min: f64) -> usize {
    (digits as f64 * std::f64::consts::LN_10 / (2.0 * std::f64::consts::PI * im_tau_min)).ceil() as usize + 64
}

/// Outcome of the divisibility check against a 2-saturated generator.
#[derive(Debug, Clone)]
pub struct DivisibilityReport {
    pub generator: RationalPoint,
    pub generator_height: Float,
    /// Number of successful halvings from 2z_M to the generator.
    pub halvings: u32,
    /// ord₂(ĥ(z_M)/ĥ(G)), from the recognised ratio.
    pub ratio_ord2: Option<i32>,
    pub predicted_ord2: i32,
    /// 2z_M ∓ G is torsion (checked at r = 0).
    pub twice_z_is_pm_generator: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct HeegnerResult {
    pub p: u64,
    pub c: u64,
    /// 1 or q*.
    pub m: i64,
    pub cm_points: Vec<CmPoint>,
    pub terms: usize,
    pub digits: u32,
    /// Σ χ(σ)·Φ(τ_σ) in C/Λ_E.
    pub sum: Complex,
    /// Σ χ(σ), zero for a nontrivial character.
    pub chi_sum: i64,
    /// 2z_M as a complex number: sum ± its conjugate, whichever lies on the real locus of E^(−pM).
    pub twice_z: Complex,
    /// x and t with η = √(−pM)·t on E, for the point 2z_M.
    pub numeric_x: Float,
    pub numeric_t: Float,
    pub at_infinity: bool,
    /// Numeric halves z_M + T (T ∈ E[2]) that lie on the real locus of the twist.
    pub halves: Vec<NumericPoint>,
    /// The reconstructed point is z_M + T rather than 2z_M.
    pub reconstructed_half: bool,
    /// |Im x| relative to |x|; measures how far the symmetrised sum is from the real locus.
    pub reality_residual: f64,
    /// For M = 1: z₀ + z̄₀ is a point of exact order 2.
    pub genus_torsion_order_two: Option<bool>,
    /// Minimal model of E.
    pub base: CurveQ,
    pub twist: CurveQ,
    pub twist_map: TwistMap,
    pub rational_point: Option<RationalPoint>,
    /// ĥ(z_M) = ĥ(2z_M)/4.
    pub height: Option<Float>,
    pub gz_residual: Option<f64>,
    pub divisibility: Option<DivisibilityReport>,
}

/// A point of C/Λ_E read off on the twist: x on E and t with η = √|D|·t.
#[derive(Debug, Clone)]
pub struct NumericPoint {
    pub x: Float,
    pub t: Float,
    pub at_infinity: bool,
    pub reality_residual: f64,
}

fn numeric_point(em: &CurveQ, lat: &Lattice, z: &Complex, d: &Integer) -> NumericPoint {
    let prec = lat.prec;
    let (wx, wy) = lat.wp(z);
    let b2 = Float::with_val(prec, em.b2());
    let x = Complex::new(Float::with_val(prec, &wx.re - Float::with_val(prec, &b2 / 12u32)), wx.im.clone());
    let big = Float::with_val(prec, Float::i_exp(1, (prec / 3) as i32));
    let at_infinity = !x.is_finite() || x.abs() > big;
    let reality_residual = if at_infinity {
        0.0
    } else {
        let s = x.abs().to_f64().max(1.0);
        (x.im.to_f64().abs() / s).max(if *d < 0 { wy.re.to_f64().abs() } else { wy.im.to_f64().abs() } / s.powf(1.5))
    };
    let sqrt_abs_d = Float::with_val(prec, Integer::from(d.abs_ref())).sqrt();
    let eta = if *d < 0 { wy.im.clone() } else { wy.re.clone() };
    let t = Float::with_val(prec, &eta / &sqrt_abs_d);
    NumericPoint { x: x.re, t, at_infinity, reality_residual }
}

impl HeegnerResult {
    /// −pM.
    pub fn twist_disc(&self) -> Integer {
        Integer::from(-(self.p as i64)) * self.m
    }
}

/// Lattice coordinates (m, n) with v = m·ω1 + n·ω2.
fn lattice_coords(lat: &Lattice, v: &Complex) -> (Float, Float) {
    let prec = lat.prec;
    let w1 = &lat.periods.w1;
    let w2 = &lat.periods.w2;
    // w1 is real
    let n = Float::with_val(prec, &v.im / &w2.im);
    let m = Float::with_val(prec, Float::with_val(prec, &v.re - Float::with_val(prec, &n * &w2.re)) / &w1.re);
    (m, n)
}

fn near_integer(x: &Float, tol: f64) -> bool {
    let r = Float::with_val(x.prec(), x.round_ref());
    Float::with_val(x.prec(), x - &r).abs().to_f64() < tol
}

/// Numeric Heegner point z_M for M ∈ {1, q*}, mapped to E^(−pM).
pub fn heegner_point_numeric(e: &CurveQ, p: u64, m: i64, digits: u32, exec: Exec) -> Result<HeegnerResult> {
    let em = e.minimal_model();
    let c = if m == 1 {
        1
    } else {
        let q = m.unsigned_abs();
        if !arith::is_prime_u64(q) || arith::q_star(q) != m {
            return Err(Error::InvalidHeegnerPrime(m.to_string(), "M must be 1 or q*".into()));
        }
        q
    };
    let cm = heegner_cm_points(&em, p, c)?;
    let prec = bits_for_digits(digits) + 32;
    let im_min = cm.iter().map(|x| x.im_tau(64).to_f64()).fold(f64::INFINITY, f64::min);
    let terms = truncation_terms(digits, im_min);
    if terms > MAX_TERMS {
        return Err(Error::PrecisionUnreachable(format!("{} series terms", terms)));
    }
    let an = arith::an_coefficients(&em, terms, exec);
    if an.len() <= terms {
        return Err(Error::TruncationTooSmall(format!("{} coefficients", an.len())));
    }
    let values = par::map(exec, &cm, |pt| modular_parametrization(&an, &pt.tau(prec), terms, prec));
    let mut sum = Complex::zero(prec);
    let mut chi_sum = 0i64;
    for (pt, v) in cm.iter().zip(values.iter()) {
        chi_sum += pt.chi as i64;
        sum = if pt.chi == 1 { &sum + v } else { &sum - v };
    }
    let d = Integer::from(-(p as i64)) * m;
    let conj = sum.conj();
    let twice_z = if d < 0 { &sum - &conj } else { &sum + &conj };
    let lat = Lattice::of_model(&em, prec);
    let genus_torsion_order_two = if m == 1 {
        let v = &sum + &conj;
        let (a, b) = lattice_coords(&lat, &v);
        let a2 = Float::with_val(prec, 2 * &a);
        let b2 = Float::with_val(prec, 2 * &b);
        let tol = 10f64.powi(-(digits as i32) / 3);
        Some(near_integer(&a2, tol) && near_integer(&b2, tol) && !(near_integer(&a, tol) && near_integer(&b, tol)))
    } else {
        None
    };
    let (twist, twist_map) = em.quadratic_twist_with_map(&d)?;
    let full = numeric_point(&em, &lat, &twice_z, &d);
    let half = Float::with_val(prec, 0.5f64);
    let zh = twice_z.scale(&half);
    let w1h = lat.periods.w1.scale(&half);
    let w2h = lat.periods.w2.scale(&half);
    let real_tol = 10f64.powi(-(digits as i32) / 3);
    let halves = [Complex::zero(prec), w1h.clone(), w2h.clone(), &w1h + &w2h]
        .iter()
        .map(|w| numeric_point(&em, &lat, &(&zh + w), &d))
        .filter(|np| !np.at_infinity && np.reality_residual < real_tol)
        .collect();
    Ok(HeegnerResult {
        p,
        c,
        m,
        cm_points: cm,
        terms,
        digits,
        sum,
        chi_sum,
        twice_z,
        numeric_x: full.x,
        numeric_t: full.t,
        at_infinity: full.at_infinity,
        halves,
        reconstructed_half: false,
        reality_residual: full.reality_residual,
        genus_torsion_order_two,
        base: em.clone(),
        twist,
        twist_map,
        rational_point: None,
        height: None,
        gz_residual: None,
        divisibility: None,
    })
}

/// Exact point on E^(−pM) from numeric x and t: x by continued fractions, then t from the curve.
fn recognize_point(res: &HeegnerResult, x: &Float, t_num: &Float) -> Result<RationalPoint> {
    let prec = x.prec();
    let good_digits = res.digits.saturating_sub(10) as i32;
    if good_digits < 10 {
        return Err(Error::RecognitionFailed(format!("{} digits is too few", res.digits)));
    }
    let tol = Float::with_val(prec, Float::parse(format!("1e-{}", good_digits)).unwrap());
    let bound = Integer::from(Integer::u_pow_u(10, (good_digits / 2) as u32));
    let x = recognize_rational_tol(x, &bound, &tol).map_err(|_| Error::RecognitionFailed("no convergent for x".into()))?;
    // t² = (4x³ + b2x² + 2b4x + b6)/D on the base curve
    let b = &res.base;
    let fx = {
        let x2 = Rational::from(x.square_ref());
        let x3 = Rational::from(&x2 * &x);
        (4 * x3)
            + Rational::from(&x2 * b.b2())
            + (2 * Rational::from(&x * b.b4()))
            + Rational::from(b.b6())
    };
    let t2: Rational = fx / Rational::from(&res.twist_map.d);
    if t2 < 0 || !t2.numer().is_perfect_square() || !t2.denom().is_perfect_square() {
        return Err(Error::RecognitionFailed(format!("x = {} gives no rational t", x)));
    }
    let mut t = Rational::from((Integer::from(t2.numer().sqrt_ref()), Integer::from(t2.denom().sqrt_ref())));
    if t_num.is_sign_negative() {
        t = -t;
    }
    let pt = res.twist_map.map_xt(&x, &t);
    if !res.twist.is_on_curve(&pt) {
        return Err(Error::RecognitionFailed("reconstructed point is off the curve".into()));
    }
    Ok(pt)
}

/// Rational point 2z_M on E^(−pM).
pub fn reconstruct_rational_point(res: &HeegnerResult, e_twist: &CurveQ) -> Result<RationalPoint> {
    if e_twist.coeffs() != res.twist.coeffs() {
        return Err(Error::RecognitionFailed("curve is not the minimal twist by −pM".into()));
    }
    if res.at_infinity {
        return Ok(RationalPoint::Infinity);
    }
    recognize_point(res, &res.numeric_x, &res.numeric_t)
}

/// A rational point z_M + T with T ∈ E[2], when one exists; it needs about a quarter of the precision of 2z_M.
pub fn reconstruct_half(res: &HeegnerResult) -> Result<RationalPoint> {
    let mut last = Error::RecognitionFailed("no real half".into());
    for h in &res.halves {
        match recognize_point(res, &h.x, &h.t) {
            Ok(pt) => return Ok(pt),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Exact y-coordinates over x on the long model.
fn points_over_x(e: &CurveQ, x: &Rational) -> Vec<RationalPoint> {
    let (a1, a2, a3, a4, a6) = (e.a1(), e.a2(), e.a3(), e.a4(), e.a6());
    let x2 = Rational::from(x.square_ref());
    let lin = Rational::from(x * a1) + a3;
    let f = Rational::from(&x2 * x) + Rational::from(&x2 * a2) + Rational::from(x * a4) + a6;
    let disc: Rational = Rational::from(lin.square_ref()) + (4 * f);
    if disc < 0 || !disc.numer().is_perfect_square() || !disc.denom().is_perfect_square() {
        return Vec::new();
    }
    let r = Rational::from((Integer::from(disc.numer().sqrt_ref()), Integer::from(disc.denom().sqrt_ref())));
    let mut out = Vec::new();
    for s in [1, -1] {
        let y = (Rational::from(-&lin) + Rational::from(&r * s)) / 2u32;
        let pt = RationalPoint::new(x.clone(), y);
        if !out.contains(&pt) {
            out.push(pt);
        }
    }
    out
}

/// A rational R with 2R = q, searched among the four real halves of the elliptic logarithm.
pub fn halve(e: &CurveQ, q: &RationalPoint, digits: u32) -> Option<RationalPoint> {
    let RationalPoint::Affine { x, y } = q else { return None };
    let prec = bits_for_digits(digits) + 32;
    let lat = Lattice::of_model(e, prec);
    let z = elliptic_log(e, &lat, &Float::with_val(prec, x), &Float::with_val(prec, y));
    let half = Float::with_val(prec, 0.5f64);
    let zh = z.scale(&half);
    let w1h = lat.periods.w1.scale(&half);
    let w2h = lat.periods.w2.scale(&half);
    let shifts = [Complex::zero(prec), w1h.clone(), w2h.clone(), &w1h + &w2h];
    let b2 = Float::with_val(prec, e.b2());
    let good = digits.saturating_sub(15).max(8);
    let tol = Float::with_val(prec, Float::parse(format!("1e-{}", good)).unwrap());
    let bound = Integer::from(Integer::u_pow_u(10, good / 2));
    for s in shifts.iter() {
        let zz = &zh + s;
        let (wp, _) = lat.wp(&zz);
        if !wp.is_finite() || Float::with_val(prec, wp.im.abs_ref()) > Float::with_val(prec, Float::with_val(prec, wp.re.abs_ref()) + 1u32) * &tol {
            continue;
        }
        let xf = Float::with_val(prec, &wp.re - Float::with_val(prec, &b2 / 12u32));
        let Ok(xr) = recognize_rational_tol(&xf, &bound, &tol) else { continue };
        for r in points_over_x(e, &xr) {
            if e.double(&r) == *q {
                return Some(r);
            }
        }
    }
    None
}

/// Repeatedly halve p (up to torsion) in E(Q); returns the 2-saturated point and the number of halvings.
pub fn two_saturate(e: &CurveQ, p: &RationalPoint, digits: u32) -> Result<(RationalPoint, u32)> {
    if e.is_torsion(p) {
        return Err(Error::GeneratorSearchFailed("point is torsion".into()));
    }
    let tors = e.torsion_points();
    let mut cur = p.clone();
    let mut k = 0;
    'outer: loop {
        if k > 16 {
            return Err(Error::GeneratorSearchFailed("too many halvings".into()));
        }
        for t in &tors {
            let target = e.add(&cur, t);
            if let Some(r) = halve(e, &target, digits) {
                cur = r;
                k += 1;
                continue 'outer;
            }
        }
        return Ok((cur, k));
    }
}

/// Search E(Q) for non-torsion points with x = a/d², |a| ≤ a_max, d ≤ d_max; smallest naive height first.
pub fn small_points(e: &CurveQ, a_max: i64, d_max: i64) -> Vec<RationalPoint> {
    let mut out = Vec::new();
    for d in 1..=d_max {
        let d2 = Integer::from(d * d);
        for a in -a_max..=a_max {
            if Integer::from(a).gcd(&Integer::from(d)) != 1 {
                continue;
            }
            let x = Rational::from((Integer::from(a), d2.clone()));
            for pt in points_over_x(e, &x) {
                if !e.is_torsion(&pt) {
                    out.push(pt);
                }
            }
        }
    }
    out.sort_by(|a, b| a.naive_log_height().partial_cmp(&b.naive_log_height()).unwrap());
    out
}

fn is_torsion_difference(e: &CurveQ, a: &RationalPoint, b: &RationalPoint) -> bool {
    e.is_torsion(&e.sub(a, b)) || e.is_torsion(&e.add(a, b))
}

/// Largest working precision the recognition step escalates to.
pub const MAX_RECOGNITION_DIGITS: u32 = 600;

/// Digits needed to recognise x of a point of canonical height h, with guard digits.
fn digits_for_height(h: f64, factor: f64) -> u32 {
    (factor * h.max(0.0) / std::f64::consts::LN_10).ceil() as u32 + 40
}

/// Gross–Zagier comparison and the 2-divisibility check for a family with r ≤ 1.
///
/// L(E^(M),1)·L'(E^(−pM),1)/(Ω^(M)·Ω^(−pM)) is compared with 2ĥ(z_M). The L-side also fixes
/// the precision used to recognise the Heegner point.
pub fn gz_check(family: &TwistFamily, digits: u32, exec: Exec) -> Result<HeegnerResult> {
    if family.r > 1 {
        return Err(Error::HypothesesNotMet(format!("numeric Heegner points need r ≤ 1, got r = {}", family.r)));
    }
    let m = if family.r == 0 { 1 } else { family.qs[0].q_star };
    let lm = analytic::l_value(&family.em, digits, exec)?;
    let lpm = analytic::l_derivative(&family.epm, digits, exec)?;
    let prec = bits_for_digits(digits) + 32;
    let lhs = Float::with_val(prec, Float::with_val(prec, &lm.value / &lm.omega) * Float::with_val(prec, &lpm.value / &lpm.omega));
    let predicted = lhs.to_f64() / 2.0;

    // z_M itself is rational up to E[2] when r = 1; otherwise only 2z_M is
    let d_half = digits.max(digits_for_height(predicted, 2.0));
    let d_full = digits.max(digits_for_height(4.0 * predicted, 2.0));
    let mut res = heegner_point_numeric(&family.e, family.p, m, d_half.min(MAX_RECOGNITION_DIGITS), exec)?;
    let (pt, half) = match reconstruct_half(&res) {
        Ok(pt) => (pt, true),
        Err(_) => {
            if d_full > MAX_RECOGNITION_DIGITS {
                return Err(Error::PrecisionUnreachable(format!("recognising 2z_M needs {} digits", d_full)));
            }
            if d_full > res.digits {
                res = heegner_point_numeric(&family.e, family.p, m, d_full, exec)?;
            }
            let twist = res.twist.clone();
            (reconstruct_rational_point(&res, &twist)?, false)
        }
    };
    let twist = res.twist.clone();
    res.rational_point = Some(pt.clone());
    res.reconstructed_half = half;
    let h = canonical_height(&twist, &pt, digits)?;
    let hz = if half { h } else { Float::with_val(prec, &h / 4u32) };
    res.height = Some(hz.clone());
    let rhs = Float::with_val(prec, 2 * &hz);
    if !rhs.is_zero() {
        res.gz_residual = Some(Float::with_val(prec, Float::with_val(prec, &lhs - &rhs) / &rhs).abs().to_f64());
    }
    if !twist.is_torsion(&pt) {
        let (g, k) = two_saturate(&twist, &pt, res.digits)?;
        let k = if half { k + 1 } else { k };
        let hg = canonical_height(&twist, &g, digits)?;
        let ratio = Float::with_val(prec, &hz / &hg);
        let bound = Integer::from(1u32) << 40;
        let ratio_ord2 = analytic::recognize_rational(&ratio, &bound).ok().and_then(|r| ord2_rational(&r));
        let twice = if family.r == 0 {
            let p2 = if half { twist.double(&pt) } else { pt.clone() };
            Some(is_torsion_difference(&twist, &p2, &g))
        } else {
            None
        };
        res.divisibility = Some(DivisibilityReport {
            generator: g,
            generator_height: hg,
            halvings: k,
            ratio_ord2,
            predicted_ord2: 2 * (family.r as i32 - 1),
            twice_z_is_pm_generator: twice,
        });
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c69() -> CurveQ {
        CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap()
    }

    #[test]
    fn cm_points_69a1_p11() {
        let pts = heegner_cm_points(&c69(), 11, 1).unwrap();
        assert_eq!(pts.len(), 1);
        let f = &pts[0].form;
        assert!(f.a.is_divisible(&Integer::from(69)));
        assert_eq!(f.disc(), -11);
    }

    #[test]
    fn cm_points_one_per_class() {
        let pts = heegner_cm_points(&c69(), 191, 7).unwrap();
        assert_eq!(pts.len(), class_number(&Integer::from(-191 * 49)).unwrap());
        for p in &pts {
            assert!(p.form.a.is_divisible(&Integer::from(69)));
            assert_eq!(p.form.disc(), -191 * 49);
        }
        // a nontrivial character sums to zero
        assert_eq!(pts.iter().map(|p| p.chi as i64).sum::<i64>(), 0);
    }

    #[test]
    fn hypothesis_failure_is_reported() {
        // 13 ≡ 1 mod 4 and 3 is inert in Q(√−13)
        assert!(matches!(heegner_cm_points(&c69(), 13, 1), Err(Error::HeegnerHypothesisFails(_))));
    }

    #[test]
    fn equivalent_cm_points_agree_mod_lattice() {
        let e = c69();
        let prec = 160;
        let an = arith::an_coefficients(&e, 4000, Exec::Sequential);
        // a second Heegner form of discriminant −11 with the same root mod 138 lies in the same Γ₀(69)-orbit
        let f1 = heegner_cm_points(&e, 11, 1).unwrap()[0].form.clone();
        let beta = f1.b.mod_u(138) as i64;
        let mut f2 = None;
        'search: for k in 2..6i64 {
            let a = 69 * k;
            for b in (-a + 1)..=a {
                if (b - beta).rem_euclid(138) == 0 && (b * b + 11) % (4 * a) == 0 {
                    f2 = Some(QuadForm::new(a, b, (b * b + 11) / (4 * a)));
                    break 'search;
                }
            }
        }
        let f2 = f2.unwrap();
        assert_eq!(f2.disc(), -11);
        let t1 = CmPoint { class: f1.reduce(), form: f1, chi: 1 };
        let t2 = CmPoint { class: f2.reduce(), form: f2, chi: 1 };
        let v1 = modular_parametrization(&an, &t1.tau(prec), 3900, prec);
        let v2 = modular_parametrization(&an, &t2.tau(prec), 3900, prec);
        let lat = Lattice::of_model(&e, prec);
        let (a, b) = lattice_coords(&lat, &(&v1 - &v2));
        assert!(near_integer(&a, 1e-20) && near_integer(&b, 1e-20), "{} {}", a, b);
    }

    #[test]
    fn heegner_point_69a1_p11() {
        let res = heegner_point_numeric(&c69(), 11, 1, 40, Exec::auto()).unwrap();
        assert!(!res.at_infinity);
        assert!(res.reality_residual < 1e-25);
        assert_eq!(res.genus_torsion_order_two, Some(true));
        let pt = reconstruct_rational_point(&res, &res.twist.clone()).unwrap();
        assert!(res.twist.is_on_curve(&pt));
        let h = canonical_height(&res.twist, &pt, 30).unwrap();
        assert!((h.to_f64() - 2.524651022815313855).abs() < 1e-12, "{}", h);
    }

    #[test]
    fn low_precision_fails_recognition() {
        let res = heegner_point_numeric(&c69(), 11, 1, 12, Exec::Sequential).unwrap();
        assert!(matches!(reconstruct_rational_point(&res, &res.twist.clone()), Err(Error::RecognitionFailed(_))));
    }

    #[test]
    fn halving_recovers_point() {
        let e = CurveQ::from_i64([1, 0, 0, -63, 936]).unwrap();
        let g = RationalPoint::from_ints(15, 51);
        let q = e.double(&g);
        let r = halve(&e, &q, 40).unwrap();
        assert_eq!(e.double(&r), q);
        let (s, k) = two_saturate(&e, &q, 40).unwrap();
        assert_eq!(k, 1);
        assert!(is_torsion_difference(&e, &s, &g));
    }
}

#[cfg(test)]
mod gz_tests {
    use super::*;
    use crate::families::build_twist_family;

    #[test]
    fn gross_zagier_69a1_p11_rank0() {
        let e = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap();
        let fam = build_twist_family(&e, 11, &[]).unwrap();
        let res = gz_check(&fam, 60, Exec::auto()).unwrap();
        let r = res.gz_residual.unwrap();
        assert!(r < 1e-8, "residual {}", r);
        let div = res.divisibility.unwrap();
        assert_eq!(div.ratio_ord2, Some(-2));
        assert_eq!(div.predicted_ord2, -2);
        assert_eq!(div.twice_z_is_pm_generator, Some(true));
    }
}

