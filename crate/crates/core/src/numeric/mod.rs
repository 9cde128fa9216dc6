//! Arbitrary-precision complex arithmetic and the structured linear
//! algebra shared by every other module.
//!
//! All values carry an explicit working precision in bits (default 256).
//! Nothing here ever round-trips through machine floats; tolerances are
//! always expressed as `2^(-precision + slack)` with the slack documented
//! at each check site.

pub mod dense;
pub mod gp;
pub mod intmat;

use rug::{Assign, Complex, Float};

pub use dense::DenseMatrix;
pub use gp::GPMatrix;
pub use intmat::IMat;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Default tolerance slack in bits; checks compare against `2^(-prec+slack)`.
pub const DEFAULT_SLACK: u32 = 20;

/// Working-precision context threaded through all numeric constructors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prec(pub u32);

impl Default for Prec {
    fn default() -> Self {
        Prec(DEFAULT_PRECISION)
    }
}

impl Prec {
    pub fn new(bits: u32) -> Self {
        assert!(bits >= 64, "precision must be at least 64 bits");
        Prec(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `2^(-precision + slack)` as a `Float`.
    pub fn tol(self, slack: u32) -> Float {
        Float::with_val(self.0, Float::i_exp(1, slack as i32 - self.0 as i32))
    }

    pub fn zero(self) -> Complex {
        Complex::new(self.0)
    }

    pub fn one(self) -> Complex {
        Complex::with_val(self.0, (1, 0))
    }

    pub fn cplx_i64(self, re: i64, im: i64) -> Complex {
        Complex::with_val(self.0, (re, im))
    }

    pub fn cplx_f64(self, re: f64, im: f64) -> Complex {
        Complex::with_val(self.0, (re, im))
    }

    pub fn pi(self) -> Float {
        Float::with_val(self.0, rug::float::Constant::Pi)
    }

    /// `pi*i` at working precision.
    pub fn pi_i(self) -> Complex {
        Complex::with_val(self.0, (Float::new(self.0), self.pi()))
    }
}

/// Modulus of a complex number as a `Float`.
pub fn abs_c(z: &Complex) -> Float {
    let prec = z.prec().0;
    let a = Complex::with_val(prec, z.abs_ref());
    a.real().clone()
}

/// Cheap modulus proxy `|re| + |im|`; within a factor sqrt(2) of the
/// true modulus, adequate for pivoting and residual thresholds.
pub fn abs1_c(z: &Complex) -> Float {
    let prec = z.prec().0;
    let mut a = z.real().clone().abs();
    a += Float::with_val(prec, z.imag().abs_ref());
    a
}

/// A complex scalar together with a chosen logarithm branch.
///
/// The logarithm is the primary datum: multiplication adds logs, and the
/// n-th root used throughout (scalar-map extensions, theta branches) is
/// `exp(log/n)`, which keeps all root choices deterministic.
#[derive(Clone, Debug)]
pub struct LogVal {
    pub log: Complex,
}

impl LogVal {
    pub fn from_log(log: Complex) -> Self {
        LogVal { log }
    }

    /// Principal branch of `log(z)`.
    pub fn from_value_principal(z: &Complex) -> Self {
        LogVal {
            log: z.clone().ln(),
        }
    }

    pub fn one(prec: Prec) -> Self {
        LogVal { log: prec.zero() }
    }

    pub fn value(&self) -> Complex {
        self.log.clone().exp()
    }

    pub fn mul(&self, other: &LogVal) -> LogVal {
        LogVal {
            log: Complex::from(self.log.clone() + &other.log),
        }
    }

    pub fn pow_i64(&self, k: i64) -> LogVal {
        LogVal {
            log: Complex::from(self.log.clone() * k),
        }
    }

    /// Root via the stored branch: `exp(log / n)`.
    pub fn nth_root(&self, n: u32) -> LogVal {
        LogVal {
            log: Complex::from(self.log.clone() / n),
        }
    }

    pub fn inv(&self) -> LogVal {
        LogVal {
            log: -self.log.clone(),
        }
    }
}

/// A root of unity `q = exp(2 pi i k / n)` of odd order `n >= 3`.
///
/// Powers are taken from a precomputed table so that `q^m` is a single
/// table lookup with exact exponent arithmetic mod `n`.
#[derive(Clone, Debug)]
pub struct RootOfUnity {
    pub n: u32,
    pub k: u32,
    prec: Prec,
    /// `exp(2 pi i j / n)` for `j = 0..n-1`.
    unit_powers: Vec<Complex>,
}

impl RootOfUnity {
    pub fn new(n: u32, k: u32, prec: Prec) -> Self {
        assert!(n >= 3 && n % 2 == 1, "order must be odd and >= 3");
        let two_pi = Float::with_val(prec.0, rug::float::Constant::Pi) * 2u32;
        let mut unit_powers = Vec::with_capacity(n as usize);
        for j in 0..n {
            let ang = two_pi.clone() * j / n;
            let z = Complex::with_val(prec.0, (Float::new(prec.0), ang)).exp();
            unit_powers.push(z);
        }
        RootOfUnity {
            n,
            k,
            prec,
            unit_powers,
        }
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    /// The value `q` itself.
    pub fn value(&self) -> Complex {
        self.pow(1)
    }

    /// `q^m` for any integer `m`.
    pub fn pow(&self, m: i64) -> Complex {
        let n = self.n as i64;
        let idx = (((self.k as i64 * m) % n) + n) % n;
        self.unit_powers[idx as usize].clone()
    }

    /// `exp(2 pi i j / n)` independent of the exponent `k`.
    pub fn unit_power(&self, j: i64) -> Complex {
        let n = self.n as i64;
        let idx = ((j % n) + n) % n;
        self.unit_powers[idx as usize].clone()
    }

    /// All n-th roots of a value with log branch: `exp((log + 2 pi i j)/n)`,
    /// ordered so that entry `j` is `q^{2j} * exp(log/n)`.
    ///
    /// Since `n` is odd, `q^2` is primitive and this enumerates every root.
    pub fn roots_from_branch(&self, v: &LogVal) -> Vec<Complex> {
        let y = v.nth_root(self.n).value();
        (0..self.n as i64)
            .map(|j| Complex::from(self.pow(2 * j) * &y))
            .collect()
    }
}

/// Kahan-free accumulating product of complex values at working precision.
pub fn product(prec: Prec, vals: impl IntoIterator<Item = Complex>) -> Complex {
    let mut acc = prec.one();
    let mut tmp = prec.zero();
    for v in vals {
        tmp.assign(&acc * &v);
        std::mem::swap(&mut acc, &mut tmp);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_unity_closes() {
        let prec = Prec::new(128);
        let q = RootOfUnity::new(9, 2, prec);
        let v = q.value();
        let mut p = prec.one();
        for _ in 0..9 {
            p = Complex::from(p.clone() * &v);
        }
        let one = prec.one();
        let diff = abs_c(&Complex::from(p.clone() - &one));
        assert!(diff < prec.tol(16));
        // |q| = 1
        let m = abs_c(&v);
        assert!((m - 1u32).abs() < prec.tol(16));
    }

    #[test]
    fn logval_roots() {
        let prec = Prec::default();
        let z = prec.cplx_f64(-1.25, 0.5);
        let lv = LogVal::from_value_principal(&z);
        let r = lv.nth_root(3);
        let mut cube = r.value();
        cube = Complex::from(cube.clone() * &r.value()) * r.value();
        let diff = abs_c(&Complex::from(cube.clone() - &z));
        assert!(diff < prec.tol(16));
    }
}
