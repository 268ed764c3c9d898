//! Fixed-point arithmetic on big integers, used as an extended-precision
//! oracle for the special functions. Values carry `PREC` fractional bits
//! (about 190 decimal digits).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Mul, Neg, Sub};

pub const PREC: u64 = 640;

const EULER_GAMMA: &str = "57721566490153286060651209008240243104215933593992359880576723488486772677766467093694706329174674951463144725";

#[derive(Clone, Debug)]
pub struct Fx(pub BigInt);

impl Fx {
    pub fn zero() -> Self {
        Fx(BigInt::zero())
    }

    pub fn int(n: i64) -> Self {
        Fx(BigInt::from(n) << PREC)
    }

    /// Exact conversion of a double.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mant) * sign;
        let shift = PREC as i64 + e;
        Fx(if shift >= 0 { m << shift as u64 } else { m >> (-shift) as u64 })
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits() as i64;
        let drop = (bits - 62).max(0);
        let top = (&self.0 >> drop as u64).to_f64().unwrap();
        top * 2f64.powi((drop - PREC as i64) as i32)
    }

    pub fn div_int(&self, n: i64) -> Self {
        Fx(&self.0 / n)
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Fx(&self.0 * n)
    }

    pub fn div(&self, o: &Fx) -> Self {
        Fx((&self.0 << PREC) / &o.0)
    }

    pub fn sqrt(&self) -> Self {
        Fx((&self.0 << PREC).sqrt())
    }

    pub fn is_negligible(&self) -> bool {
        self.0.abs().bits() < 8
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    fn half(&self) -> Self {
        Fx(&self.0 >> 1)
    }

    pub fn pi() -> Self {
        // 16 atan(1/5) - 4 atan(1/239)
        atan_inv(5).mul_int(16) - atan_inv(239).mul_int(4)
    }

    pub fn euler_gamma() -> Self {
        let digits: BigInt = EULER_GAMMA.parse().unwrap();
        let scale = BigInt::from(10).pow(EULER_GAMMA.len() as u32);
        Fx((digits << PREC) / scale)
    }

    fn ln2() -> Self {
        atanh(&Fx::one().div_int(3)).mul_int(2)
    }

    pub fn one() -> Self {
        Fx(BigInt::one() << PREC)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Self {
        assert!(self.0.is_positive());
        let mut e = 0i64;
        let mut m = self.clone();
        let hi = Fx::one().mul_int(3).div_int(2);
        let lo = Fx::one().mul_int(3).div_int(4);
        while m.0 > hi.0 {
            m = m.half();
            e += 1;
        }
        while m.0 < lo.0 {
            m = Fx(&m.0 << 1);
            e -= 1;
        }
        let t = (m.clone() - Fx::one()).div(&(m + Fx::one()));
        atanh(&t).mul_int(2) + Fx::ln2().mul_int(e)
    }

    pub fn exp(&self) -> Self {
        let mut k = 0u32;
        let mut r = self.clone();
        let bound = Fx::one().div_int(16);
        while r.0.abs() > bound.0 {
            r = r.half();
            k += 1;
        }
        let mut term = Fx::one();
        let mut sum = Fx::one();
        for n in 1.. {
            term = (&term * &r).div_int(n);
            if term.is_negligible() {
                break;
            }
            sum = sum + term.clone();
        }
        for _ in 0..k {
            sum = &sum * &sum;
        }
        sum
    }

    /// `(sin x, cos x)` after reduction modulo `2 pi`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let two_pi = Fx::pi().mul_int(2);
        let q = (&self.0 << PREC) / &two_pi.0;
        let q = (q + (BigInt::one() << (PREC - 1))) >> PREC;
        let r = self.clone() - Fx(&two_pi.0 * q);
        let mut term = r.clone();
        let mut sin = r.clone();
        let mut cos = Fx::one();
        let mut cterm = Fx::one();
        let r2 = &r * &r;
        for n in 1i64.. {
            cterm = -(&cterm * &r2).div_int((2 * n - 1) * (2 * n));
            term = -(&term * &r2).div_int((2 * n) * (2 * n + 1));
            if term.is_negligible() && cterm.is_negligible() {
                break;
            }
            sin = sin + term.clone();
            cos = cos + cterm.clone();
        }
        (sin, cos)
    }

    /// `atan(y / x)` placed in the correct quadrant.
    pub fn atan2(y: &Fx, x: &Fx) -> Self {
        let pi = Fx::pi();
        if x.0.is_zero() {
            let h = pi.half();
            return if y.is_negative() { -h } else { h };
        }
        let t = y.div(x);
        let a = if t.0.abs() <= Fx::one().0 {
            atan_small(&t)
        } else {
            let h = pi.half();
            let inv = atan_small(&Fx::one().div(&t));
            if t.is_negative() {
                -h - inv
            } else {
                h - inv
            }
        };
        if !x.is_negative() {
            a
        } else if y.is_negative() {
            a - pi
        } else {
            a + pi
        }
    }
}

/// `atan(1/k)` by its Taylor series.
fn atan_inv(k: i64) -> Fx {
    let mut power = Fx::one().div_int(k);
    let mut sum = power.clone();
    let k2 = k * k;
    for n in 1i64.. {
        power = power.div_int(k2);
        let t = power.div_int(2 * n + 1);
        if t.is_negligible() {
            break;
        }
        sum = if n % 2 == 1 { sum - t } else { sum + t };
    }
    sum
}

fn atanh(t: &Fx) -> Fx {
    let t2 = t * t;
    let mut power = t.clone();
    let mut sum = t.clone();
    for n in 1i64.. {
        power = &power * &t2;
        let term = power.div_int(2 * n + 1);
        if term.is_negligible() {
            break;
        }
        sum = sum + term;
    }
    sum
}

/// `atan` for `|t| <= 1` via two half-angle reductions and the series.
fn atan_small(t: &Fx) -> Fx {
    let mut t = t.clone();
    for _ in 0..2 {
        let s = (Fx::one() + &t * &t).sqrt();
        t = t.div(&(Fx::one() + s));
    }
    let t2 = &t * &t;
    let mut power = t.clone();
    let mut sum = t.clone();
    for n in 1i64.. {
        power = -(&power * &t2);
        let term = power.div_int(2 * n + 1);
        if term.is_negligible() {
            break;
        }
        sum = sum + term;
    }
    sum.mul_int(4)
}

impl Add for Fx {
    type Output = Fx;
    fn add(self, o: Fx) -> Fx {
        Fx(self.0 + o.0)
    }
}

impl Sub for Fx {
    type Output = Fx;
    fn sub(self, o: Fx) -> Fx {
        Fx(self.0 - o.0)
    }
}

impl Neg for Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(-self.0)
    }
}

impl Mul for &Fx {
    type Output = Fx;
    fn mul(self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> PREC)
    }
}

#[derive(Clone, Debug)]
pub struct Cx {
    pub re: Fx,
    pub im: Fx,
}

impl Cx {
    pub fn new(re: Fx, im: Fx) -> Self {
        Cx { re, im }
    }

    pub fn zero() -> Self {
        Cx::new(Fx::zero(), Fx::zero())
    }

    pub fn real(re: Fx) -> Self {
        Cx::new(re, Fx::zero())
    }

    pub fn i() -> Self {
        Cx::new(Fx::zero(), Fx::one())
    }

    pub fn from_c64(z: Complex64) -> Self {
        Cx::new(Fx::from_f64(z.re), Fx::from_f64(z.im))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn div_int(&self, n: i64) -> Self {
        Cx::new(self.re.div_int(n), self.im.div_int(n))
    }

    pub fn scale(&self, f: &Fx) -> Self {
        Cx::new(&self.re * f, &self.im * f)
    }

    pub fn norm_sqr(&self) -> Fx {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let d = self.norm_sqr();
        Cx::new(self.re.div(&d), (-self.im.clone()).div(&d))
    }

    pub fn is_negligible(&self) -> bool {
        self.re.is_negligible() && self.im.is_negligible()
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let modulus = self.norm_sqr().sqrt();
        Cx::new(modulus.ln(), Fx::atan2(&self.im, &self.re))
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Cx::new(&m * &c, &m * &s)
    }

    pub fn sin(&self) -> Self {
        // sin(x + iy) = sin x cosh y + i cos x sinh y
        let (s, c) = self.re.sin_cos();
        let ey = self.im.exp();
        let emy = Fx::one().div(&ey);
        let ch = (ey.clone() + emy.clone()).half();
        let sh = (ey - emy).half();
        Cx::new(&s * &ch, &c * &sh)
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, o: Cx) -> Cx {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cx {
    type Output = Cx;
    fn sub(self, o: Cx) -> Cx {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx::new(-self.re, -self.im)
    }
}

impl Mul for &Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        Cx::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

/// `J_n(z)` and `J'_n(z)` from the ascending series and its term-wise
/// derivative.
pub fn bessel_j(n: u32, z: Complex64) -> (Complex64, Complex64) {
    let (v, d) = bessel_j_cx(n, &Cx::from_c64(z));
    (v.to_c64(), d.to_c64())
}

fn bessel_j_cx(n: u32, z: &Cx) -> (Cx, Cx) {
    let h = z.div_int(2);
    let mut term = Cx::real(Fx::one());
    for k in 1..=n {
        term = (&term * &h).div_int(k as i64);
    }
    let q = -(&h * &h);
    let zinv = z.inv();
    let mut sum = term.clone();
    let mut dsum = term.scale(&Fx::int(n as i64));
    for k in 1i64.. {
        term = (&term * &q).div_int(k * (k + n as i64));
        if term.is_negligible() && k > 4 {
            break;
        }
        sum = sum + term.clone();
        dsum = dsum + term.scale(&Fx::int(n as i64 + 2 * k));
    }
    let d = if z.is_negligible() {
        if n == 1 {
            Cx::real(Fx::one().div_int(2))
        } else {
            Cx::zero()
        }
    } else {
        &dsum * &zinv
    };
    (sum, d)
}

/// `Y_n(z)` from the ascending series with logarithm and digamma terms.
pub fn bessel_y(n: u32, z: Complex64) -> Complex64 {
    bessel_y_cx(n, &Cx::from_c64(z)).to_c64()
}

fn bessel_y_cx(n: u32, z: &Cx) -> Cx {
    let pi = Fx::pi();
    let gamma = Fx::euler_gamma();
    let h = z.div_int(2);
    let h2 = &h * &h;
    let hinv = h.inv();
    // finite part: -(h^-n / pi) sum_{k<n} (n-k-1)!/k! h^{2k}
    let mut finite = Cx::zero();
    let mut hpow = Cx::real(Fx::one());
    for k in 0..n as i64 {
        let mut c = Fx::one();
        for m in 1..=(n as i64 - k - 1) {
            c = c.mul_int(m);
        }
        for m in 1..=k {
            c = c.div_int(m);
        }
        finite = finite + hpow.scale(&c);
        hpow = &hpow * &h2;
    }
    let mut hn_inv = Cx::real(Fx::one());
    for _ in 0..n {
        hn_inv = &hn_inv * &hinv;
    }
    let finite = -(&finite * &hn_inv).scale(&Fx::one().div(&pi));
    let (jn, _) = bessel_j_cx(n, z);
    let log_term = (&h.ln() * &jn).scale(&Fx::int(2).div(&pi));
    // series part with psi(k+1) + psi(n+k+1)
    let mut term = Cx::real(Fx::one());
    for k in 1..=n {
        term = (&term * &h).div_int(k as i64);
    }
    let mut psi_a = -gamma.clone();
    let mut psi_b = -gamma;
    for m in 1..=n as i64 {
        psi_b = psi_b + Fx::one().div_int(m);
    }
    let q = -h2;
    let mut sum = term.scale(&(psi_a.clone() + psi_b.clone()));
    for k in 1i64.. {
        term = (&term * &q).div_int(k * (k + n as i64));
        psi_a = psi_a + Fx::one().div_int(k);
        psi_b = psi_b + Fx::one().div_int(k + n as i64);
        if term.is_negligible() && k > 4 {
            break;
        }
        sum = sum + term.scale(&(psi_a.clone() + psi_b.clone()));
    }
    finite + log_term - sum.scale(&Fx::one().div(&pi))
}

/// `H^(1)_n = J_n + i Y_n` and its derivative from
/// `H'_n = (H_{n-1} - H_{n+1}) / 2`.
pub fn hankel1(n: u32, z: Complex64) -> (Complex64, Complex64) {
    let zc = Cx::from_c64(z);
    let h = |m: u32| {
        let (j, _) = bessel_j_cx(m, &zc);
        j + &Cx::i() * &bessel_y_cx(m, &zc)
    };
    let hn = h(n);
    let d = if n == 0 {
        -h(1)
    } else {
        (h(n - 1) - h(n + 1)).div_int(2)
    };
    (hn.to_c64(), d.to_c64())
}

/// `j_n(z)` from `z^n sum (-z^2/2)^k / (k! (2n+2k+1)!!)` and its term-wise
/// derivative.
pub fn sph_j(n: u32, z: Complex64) -> (Complex64, Complex64) {
    let zc = Cx::from_c64(z);
    let mut term = Cx::real(Fx::one());
    for k in 1..=n as i64 {
        term = (&term * &zc).div_int(2 * k + 1);
    }
    let q = -(&zc * &zc).div_int(2);
    let mut sum = term.clone();
    let mut dsum = term.scale(&Fx::int(n as i64));
    for k in 1i64.. {
        term = (&term * &q).div_int(k * (2 * n as i64 + 2 * k + 1));
        if term.is_negligible() && k > 4 {
            break;
        }
        sum = sum + term.clone();
        dsum = dsum + term.scale(&Fx::int(n as i64 + 2 * k));
    }
    let d = &dsum * &zc.inv();
    (sum.to_c64(), d.to_c64())
}

/// `h^(1)_n(z)` from its terminating expansion
/// `(-i)^{n+1} e^{iz}/z sum_k i^k (n+k)! / (k! (n-k)! (2z)^k)`.
pub fn sph_h1(n: u32, z: Complex64) -> (Complex64, Complex64) {
    let zc = Cx::from_c64(z);
    let h = |m: u32| sph_h1_cx(m, &zc);
    let d = if n == 0 {
        -h(1)
    } else {
        h(n - 1) - (&zc.inv() * &h(n)).scale(&Fx::int(n as i64 + 1))
    };
    (h(n).to_c64(), d.to_c64())
}

fn sph_h1_cx(n: u32, z: &Cx) -> Cx {
    let i = Cx::i();
    let inv2z = z.inv().div_int(2);
    let mut sum = Cx::zero();
    let mut ipow = Cx::real(Fx::one());
    let mut zpow = Cx::real(Fx::one());
    for k in 0..=n as i64 {
        let mut c = Fx::one();
        for m in (n as i64 - k + 1)..=(n as i64 + k) {
            c = c.mul_int(m);
        }
        for m in 1..=k {
            c = c.div_int(m);
        }
        sum = sum + (&ipow * &zpow).scale(&c);
        ipow = &ipow * &i;
        zpow = &zpow * &inv2z;
    }
    let mut pre = Cx::real(Fx::one());
    let mi = -Cx::i();
    for _ in 0..=n {
        pre = &pre * &mi;
    }
    let e = (&i * z).exp();
    &(&pre * &e) * &(&sum * &z.inv())
}
