//! Weierstrass ℘ via q-expansions, the real elliptic logarithm and the canonical height.
//!
//! Heights are reported in the normalisation where ĥ(P) ~ log max(|num x|, |den x|),
//! i.e. twice the value of the Silverman local-height decomposition used internally.

use rug::{Float, Integer, Rational};

use crate::analytic::{periods_of_model, Periods};
use crate::arith;
use crate::complex::{bits_for_digits, pi, Complex};
use crate::curve::CurveQ;
use crate::error::{Error, Result};
use crate::point::RationalPoint;

/// A lattice with ω1 real, together with the q-expansion data.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub periods: Periods,
    pub tau: Complex,
    pub q: Complex,
    /// 2πi/ω1
    pub k: Complex,
    pub terms: usize,
    pub prec: u32,
}

impl Lattice {
    pub fn new(periods: Periods) -> Lattice {
        let prec = periods.prec;
        let tau = periods.tau();
        let two_pi_i = Complex::new(Float::new(prec), Float::with_val(prec, 2 * pi(prec)));
        let q = (&two_pi_i * &tau).exp();
        let k = two_pi_i.div(&periods.w1);
        // |q|^n < 2^-prec once n·2π·Im τ > prec·ln 2
        let im = tau.im.to_f64().max(1e-6);
        let terms = ((prec as f64 * std::f64::consts::LN_2) / (2.0 * std::f64::consts::PI * im)).ceil() as usize + 8;
        Lattice { periods, tau, q, k, terms, prec }
    }

    pub fn of_model(e: &CurveQ, prec: u32) -> Lattice {
        Lattice::new(periods_of_model(e, prec))
    }

    /// w = z/ω1 with Im w moved into [lo, lo + Im τ).
    fn reduce(&self, z: &Complex, centred: bool) -> Complex {
        let mut w = z.div(&self.periods.w1);
        let ratio = Float::with_val(self.prec, &w.im / &self.tau.im);
        let shift = if centred {
            Float::with_val(self.prec, &ratio + 0.5f64).floor()
        } else {
            ratio.floor()
        };
        if !shift.is_zero() {
            w = &w - &self.tau.scale(&shift);
        }
        // Re w only matters mod 1
        let rf = Float::with_val(self.prec, w.re.floor_ref());
        w.re -= rf;
        w
    }

    fn u_of(&self, w: &Complex) -> Complex {
        let prec = self.prec;
        let two_pi_i = Complex::new(Float::new(prec), Float::with_val(prec, 2 * pi(prec)));
        (&two_pi_i * w).exp()
    }

    /// (℘(z), ℘'(z)) for the lattice.
    pub fn wp(&self, z: &Complex) -> (Complex, Complex) {
        let prec = self.prec;
        let w = self.reduce(z, true);
        let u = self.u_of(&w);
        let ui = u.recip();
        let one = Complex::one(prec);
        let two = Complex::real(Float::with_val(prec, 2));
        let f = |x: &Complex| {
            let d = &one - x;
            x.div(&(&d * &d))
        };
        let g = |x: &Complex| {
            let d = &one - x;
            (x * &(&one + x)).div(&d.powi(3))
        };
        let mut s = &Complex::real(Float::with_val(prec, 1) / 12u32) + &f(&u);
        let mut sd = g(&u);
        let mut qn = one.clone();
        for _ in 1..self.terms {
            qn = &qn * &self.q;
            let a = &qn * &u;
            let b = &qn * &ui;
            s = &(&(&s + &f(&a)) + &f(&b)) - &(&two * &f(&qn));
            sd = &(&sd + &g(&a)) - &g(&b);
        }
        let k2 = &self.k * &self.k;
        let k3 = &k2 * &self.k;
        (&k2 * &s, &k3 * &sd)
    }

    /// Archimedean local height (Silverman normalisation, without the discriminant term).
    pub fn lambda_inf(&self, z: &Complex) -> Float {
        let prec = self.prec;
        let w = self.reduce(z, false);
        let u = self.u_of(&w);
        let ui = u.recip();
        let one = Complex::one(prec);
        let t = Float::with_val(prec, &w.im / &self.tau.im);
        let b2 = Float::with_val(prec, t.square_ref()) - &t + Float::with_val(prec, 1) / 6u32;
        let log_q = Float::with_val(prec, self.q.abs().ln());
        let mut s = Float::with_val(prec, -(b2 * log_q)) / 2u32;
        s -= (&one - &u).abs().ln();
        let mut qn = one.clone();
        for _ in 1..self.terms {
            qn = &qn * &self.q;
            let a = &one - &(&qn * &u);
            let b = &one - &(&qn * &ui);
            s -= (&a * &b).abs().ln();
        }
        s
    }
}

fn to_float(x: &Rational, prec: u32) -> Float {
    Float::with_val(prec, x)
}

/// Elliptic logarithm z ∈ C/Λ of a real point (x, y) on the model of `lat`.
///
/// The identity component is parametrised by z ∈ (0, ω1/2] and the egg (Δ > 0)
/// by ω2/2 + t with t ∈ (0, ω1/2); on both ℘ is monotone in the real parameter,
/// so a bracketed Newton iteration converges.
pub fn elliptic_log(e: &CurveQ, lat: &Lattice, x: &Float, y: &Float) -> Complex {
    let prec = lat.prec;
    let b2 = Float::with_val(prec, e.b2());
    let big_x = Float::with_val(prec, x + Float::with_val(prec, &b2 / 12u32));
    let eta = Float::with_val(prec, 2 * y)
        + Float::with_val(prec, x * Float::with_val(prec, e.a1()))
        + Float::with_val(prec, e.a3());
    let e1 = &lat.periods.roots[0];
    let half_w1 = Float::with_val(prec, &lat.periods.w1.re / 2u32);
    let on_identity = x >= e1 || lat.periods.connected;
    let base = if on_identity {
        Complex::zero(prec)
    } else {
        lat.periods.w2.scale(&Float::with_val(prec, 0.5f64))
    };
    // ℘(base + t) − X as t runs over (0, ω1/2]: decreasing on the identity component, increasing on the egg
    let eval = |t: &Float| -> (Float, Float) {
        let z = &base + &Complex::real(t.clone());
        let (p, dp) = lat.wp(&z);
        (Float::with_val(prec, &p.re - &big_x), dp.re)
    };
    let increasing = !on_identity;
    let mut lo = Float::with_val(prec, &half_w1 * Float::with_val(prec, 1e-30f64));
    let mut hi = half_w1.clone();
    let mut t = Float::with_val(prec, Float::with_val(prec, &lo + &hi) / 2u32);
    let tol_exp = -(prec as i32) + 8;
    for _ in 0..(4 * prec) {
        let (f, df) = eval(&t);
        // keep the bracket: f(lo) and f(hi) have opposite signs
        let below = if increasing { f.is_sign_negative() } else { f.is_sign_positive() };
        if below {
            lo = t.clone();
        } else {
            hi = t.clone();
        }
        let width = Float::with_val(prec, &hi - &lo);
        if width.is_zero() || width.get_exp().unwrap_or(i32::MIN) < tol_exp + half_w1.get_exp().unwrap_or(0) {
            break;
        }
        let newton = if df.is_zero() { None } else { Some(Float::with_val(prec, &t - Float::with_val(prec, &f / &df))) };
        t = match newton {
            Some(n) if n > lo && n < hi => {
                let step = Float::with_val(prec, &n - &t);
                let done = step.is_zero() || step.get_exp().unwrap_or(i32::MIN) < tol_exp + half_w1.get_exp().unwrap_or(0);
                if done {
                    t = n;
                    break;
                }
                n
            }
            _ => Float::with_val(prec, Float::with_val(prec, &lo + &hi) / 2u32),
        };
    }
    let z = &base + &Complex::real(t.clone());
    // choose the sign matching ℘'(z) = η
    let (_, dp) = lat.wp(&z);
    let agree = dp.re.is_sign_negative() == eta.is_sign_negative();
    if agree {
        z
    } else if on_identity {
        Complex::real(Float::with_val(prec, -&t))
    } else {
        &base - &Complex::real(t)
    }
}

/// Non-archimedean correction at p for a point not on the identity component,
/// in units of log p (Silverman normalisation). Zero when P reduces into E⁰.
pub fn bad_component_correction(e: &CurveQ, p: &Integer, x: &Rational, y: &Rational) -> Rational {
    let (a1, a2, a3, a4) = (
        Rational::from(e.a1()),
        Rational::from(e.a2()),
        Rational::from(e.a3()),
        Rational::from(e.a4()),
    );
    let v = |r: &Rational| -> i64 {
        if *r == 0 {
            i64::MAX / 4
        } else {
            arith::valuation(r.numer(), p) as i64 - arith::valuation(r.denom(), p) as i64
        }
    };
    let x2 = Rational::from(x.square_ref());
    let fx = Rational::from(3 * &x2) + (2 * Rational::from(&a2 * x)) + &a4 - Rational::from(&a1 * y);
    let psi2 = Rational::from(2 * y) + Rational::from(&a1 * x) + &a3;
    if v(&fx) <= 0 || v(&psi2) <= 0 {
        return Rational::new();
    }
    let vd = arith::valuation(e.discriminant(), p) as i64;
    let c4_unit = *e.c4() != 0 && arith::valuation(e.c4(), p) == 0;
    if c4_unit {
        let n = vd;
        let m = v(&psi2).min(n / 2);
        return Rational::from((-m * (n - m), 2 * n));
    }
    let (b2, b4, b6, b8) = (
        Rational::from(e.b2()),
        Rational::from(e.b4()),
        Rational::from(e.b6()),
        Rational::from(e.b8()),
    );
    let x3 = Rational::from(&x2 * x);
    let x4 = Rational::from(&x2 * &x2);
    let psi3 = (3 * x4)
        + Rational::from(&b2 * &x3)
        + (3 * Rational::from(&b4 * &x2))
        + (3 * Rational::from(&b6 * x))
        + b8;
    let bv = v(&psi2);
    let cv = v(&psi3);
    if cv >= 3 * bv {
        Rational::from((-bv, 3))
    } else {
        Rational::from((-cv, 8))
    }
}

/// Canonical height ĥ(P) to `digits` decimal digits (torsion points give exactly 0).
pub fn canonical_height(e: &CurveQ, p: &RationalPoint, digits: u32) -> Result<Float> {
    let prec = bits_for_digits(digits) + 32;
    if !e.is_on_curve(p) {
        return Err(Error::NotOnCurve);
    }
    if p.is_infinity() || e.is_torsion(p) {
        return Ok(Float::new(prec));
    }
    let (em, iso) = e.minimal_model_with_iso();
    let pm = iso.map_point(p);
    let (x, y) = (pm.x().unwrap().clone(), pm.y().unwrap().clone());
    let lat = Lattice::of_model(&em, prec);
    let z = elliptic_log(&em, &lat, &to_float(&x, prec), &to_float(&y, prec));
    let mut h = lat.lambda_inf(&z);
    // Σ_p (1/12)·v(Δ)·log p collapses to log|Δ|/12
    let disc_abs = Float::with_val(prec, Integer::from(em.discriminant().abs_ref()));
    h += Float::with_val(prec, disc_abs.ln()) / 12u32;
    // ½·max(0, −v_p(x))·log p summed over p is log of the square root of the denominator
    let d = Float::with_val(prec, x.denom());
    h += Float::with_val(prec, d.ln()) / 2u32;
    for q in em.disc_primes() {
        let c = bad_component_correction(&em, &q, &x, &y);
        if c != 0 {
            let lq = Float::with_val(prec, Float::with_val(prec, &q).ln());
            h += Float::with_val(prec, &lq * to_float(&c, prec));
        }
    }
    Ok(Float::with_val(prec, 2 * h))
}

/// Pairing ⟨P, Q⟩ = (ĥ(P+Q) − ĥ(P) − ĥ(Q))/2.
pub fn height_pairing(e: &CurveQ, p: &RationalPoint, q: &RationalPoint, digits: u32) -> Result<Float> {
    let s = e.add(p, q);
    let hs = canonical_height(e, &s, digits)?;
    let hp = canonical_height(e, p, digits)?;
    let hq = canonical_height(e, q, digits)?;
    let prec = hs.prec();
    Ok(Float::with_val(prec, Float::with_val(prec, hs - hp) - hq) / 2u32)
}

/// Regulator det⟨P_i, P_j⟩ (1 for the empty list).
pub fn regulator(e: &CurveQ, pts: &[RationalPoint], digits: u32) -> Result<Float> {
    let prec = bits_for_digits(digits) + 32;
    let n = pts.len();
    let mut m: Vec<Vec<Float>> = vec![vec![Float::new(prec); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                canonical_height(e, &pts[i], digits)?
            } else {
                height_pairing(e, &pts[i], &pts[j], digits)?
            };
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    // Gaussian elimination
    let mut det = Float::with_val(prec, 1);
    for c in 0..n {
        let piv = (c..n).max_by(|a, b| m[*a][c].clone().abs().partial_cmp(&m[*b][c].clone().abs()).unwrap());
        let piv = piv.unwrap();
        if m[piv][c].is_zero() {
            return Ok(Float::new(prec));
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in (c + 1)..n {
            let f = Float::with_val(prec, &m[r][c] / &m[c][c]);
            for k in c..n {
                let sub = Float::with_val(prec, &f * &m[c][k]);
                m[r][k] -= sub;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: [i64; 5]) -> CurveQ {
        CurveQ::from_i64(a).unwrap()
    }

    #[test]
    fn wp_inverts_elliptic_log() {
        let e = c([0, 0, 1, -1, 0]);
        let lat = Lattice::of_model(&e, 200);
        for (x, y) in [(0i64, 0i64), (1, 0), (2, -3), (6, 14)] {
            let z = elliptic_log(&e, &lat, &Float::with_val(200, x), &Float::with_val(200, y));
            let (p, dp) = lat.wp(&z);
            let xb = p.re.to_f64() - e.b2().to_f64() / 12.0;
            let eta = 2.0 * y as f64 + 1.0;
            assert!((xb - x as f64).abs() < 1e-25, "x {} vs {}", xb, x);
            assert!((dp.re.to_f64() - eta).abs() < 1e-20);
        }
    }

    #[test]
    fn height_37a1() {
        let e = c([0, 0, 1, -1, 0]);
        let h = canonical_height(&e, &RationalPoint::from_ints(0, 0), 30).unwrap();
        assert!((h.to_f64() - 0.05111140823996884).abs() < 1e-15, "{}", h);
    }

    #[test]
    fn height_off_identity_component_at_three() {
        let e = c([1, 0, 0, -63, 936]);
        let h = canonical_height(&e, &RationalPoint::from_ints(15, 51), 30).unwrap();
        let expect = Float::with_val(h.prec(), Float::parse("2.524651022815313855").unwrap());
        assert!(Float::with_val(h.prec(), &h - &expect).abs() < 1e-17, "{}", h);
    }

    #[test]
    fn quadratic_in_multiples() {
        let e = c([1, 0, 0, -63, 936]);
        let p = RationalPoint::from_ints(15, 51);
        let h1 = canonical_height(&e, &p, 30).unwrap().to_f64();
        for m in [2i64, 3] {
            let hm = canonical_height(&e, &e.mul(&p, m), 30).unwrap().to_f64();
            assert!((hm - (m * m) as f64 * h1).abs() < 1e-12 * hm, "m={} {} {}", m, hm, h1);
        }
    }

    #[test]
    fn torsion_has_zero_height() {
        let e = c([1, 0, 1, 4, -6]);
        for t in e.torsion_points() {
            assert!(canonical_height(&e, &t, 20).unwrap().is_zero());
        }
    }

    #[test]
    fn regulator_of_one_point_is_its_height() {
        let e = c([0, 0, 1, -1, 0]);
        let p = RationalPoint::from_ints(0, 0);
        let r = regulator(&e, &[p.clone()], 20).unwrap();
        let h = canonical_height(&e, &p, 20).unwrap();
        assert!((r.to_f64() - h.to_f64()).abs() < 1e-18);
    }
}
