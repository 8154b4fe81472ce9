//! Digamma and log-gamma for real arguments.

use crate::scalar::Real;

/// `ψ(x)`: recurrence up to `x ≥ 10`, then the asymptotic series. Reflection for `x < 0`.
pub fn digamma<T: Real>(x: T) -> T {
    let pi = T::lit(std::f64::consts::PI);
    if x <= T::zero() {
        if x == x.floor() {
            return T::nan();
        }
        return digamma(T::one() - x) - pi / (pi * x).tan();
    }
    let mut x = x;
    let mut acc = T::zero();
    let ten = T::lit(10.0);
    while x < ten {
        acc -= x.recip();
        x += T::one();
    }
    let inv2 = (x * x).recip();
    // Bernoulli terms B_{2k} / (2k), k = 1..7, Horner in 1/x².
    let series = inv2
        * (T::lit(1.0 / 12.0)
            - inv2
                * (T::lit(1.0 / 120.0)
                    - inv2
                        * (T::lit(1.0 / 252.0)
                            - inv2
                                * (T::lit(1.0 / 240.0)
                                    - inv2
                                        * (T::lit(1.0 / 132.0)
                                            - inv2 * (T::lit(691.0 / 32760.0) - inv2 * T::lit(1.0 / 12.0)))))));
    acc + x.ln() - T::lit(0.5) / x - series
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7); reflection below 1/2.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    let t = x + T::lit(LANCZOS_G) + half;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += T::lit(c) / (x + T::lit(i as f64));
    }
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + a.ln()
}
