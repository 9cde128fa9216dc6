//! Hyperbolic volume via the Bloch-Wigner dilogarithm, in double
//! precision; used only as a positivity audit and for display.

use num_complex::Complex64;

/// Li_2 after reduction: inversion for |z| > 1, reflection near 1, a
/// plain power series for small |z|, and the Bernoulli series in
/// w = -log(1-z) otherwise (fast everywhere on the unit circle).
fn dilog(z: Complex64) -> Complex64 {
    let pi = std::f64::consts::PI;
    if z.norm() > 1.0 {
        // Li2(z) = -Li2(1/z) - pi^2/6 - ln(-z)^2 / 2
        let l = (-z).ln();
        return -dilog(1.0 / z) - Complex64::new(pi * pi / 6.0, 0.0) - l * l * 0.5;
    }
    if z.norm() <= 0.5 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 1..120 {
            pow *= z;
            acc += pow / (k as f64 * k as f64);
        }
        return acc;
    }
    if (1.0 - z).norm() <= 0.5 {
        // Li2(z) = pi^2/6 - ln(z) ln(1-z) - Li2(1-z)
        return Complex64::new(pi * pi / 6.0, 0.0) - z.ln() * (1.0 - z).ln() - dilog(1.0 - z);
    }
    // Debye series: Li2(z) = sum_{n>=0} B_n w^{n+1} / (n+1)!
    const B: [f64; 17] = [
        1.0,
        -0.5,
        1.0 / 6.0,
        0.0,
        -1.0 / 30.0,
        0.0,
        1.0 / 42.0,
        0.0,
        -1.0 / 30.0,
        0.0,
        5.0 / 66.0,
        0.0,
        -691.0 / 2730.0,
        0.0,
        7.0 / 6.0,
        0.0,
        -3617.0 / 510.0,
    ];
    let w = -(1.0 - z).ln();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0); // w^{n+1}/(n+1)! built up
    for (n, &b) in B.iter().enumerate() {
        term *= w / (n as f64 + 1.0);
        if b != 0.0 {
            acc += b * term;
        }
    }
    // tail: continue Bernoulli by recurrence for accuracy
    let mut bern = [0.0f64; 40];
    bern[..17].copy_from_slice(&B);
    for m in (18..40).step_by(2) {
        // B_m from the zeta recurrence: B_m = -sum_{k=0}^{m-1} C(m+1,k) B_k / (m+1)
        let mut s = 0.0;
        let mut c = 1.0f64; // C(m+1, 0)
        for (k, &bk) in bern.iter().enumerate().take(m) {
            s += c * bk;
            c = c * ((m + 1 - k) as f64) / ((k + 1) as f64);
        }
        bern[m] = -s / (m as f64 + 1.0);
    }
    for (n, &b) in bern.iter().enumerate().take(40).skip(17) {
        term *= w / (n as f64 + 1.0);
        if b != 0.0 {
            acc += b * term;
        }
    }
    acc
}

/// Bloch-Wigner function D(z) = Im Li_2(z) + arg(1 - z) log|z|.
pub fn bloch_wigner(z: Complex64) -> f64 {
    if z.im == 0.0 {
        return 0.0;
    }
    dilog(z).im + (1.0 - z).arg() * z.norm().ln()
}

/// Total volume of a shape assignment.
pub fn total_volume(shapes: &[Complex64]) -> f64 {
    shapes.iter().map(|&z| bloch_wigner(z)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_tetrahedron_volume() {
        // D(exp(i pi/3)) = 1.0149416064096536... (the regular ideal
        // tetrahedron), so the figure-eight volume is twice that
        let z = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let v = bloch_wigner(z);
        assert!((v - 1.0149416064096536).abs() < 1e-12, "got {v}");
        let fig8 = total_volume(&[z, z]);
        assert!((fig8 - 2.029883212819307).abs() < 1e-11);
    }

    #[test]
    fn five_term_ish_symmetries() {
        // D(z) = -D(1/z) = -D(conj z)
        let z = Complex64::new(0.3, 0.7);
        assert!((bloch_wigner(z) + bloch_wigner(1.0 / z)).abs() < 1e-12);
        assert!((bloch_wigner(z) + bloch_wigner(z.conj())).abs() < 1e-12);
    }
}
