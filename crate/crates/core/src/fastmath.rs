//! Inlinable elementary functions for the network hot loop.
//!
//! `f64::tanh` is a libm call and cannot be inlined or vectorized by the
//! compiler; with tens of thousands of activations per optimizer step it
//! dominates the profile. The variants here are branch-light polynomial /
//! rational evaluations accurate to a few ulp, which is far below every
//! tolerance used by the solvers, the losses and the gradient checks. The
//! backward pass uses the same forward values (`tanh' = 1 - tanh^2`), so
//! parameter gradients are exact for the function actually computed.

const LOG2_E: f64 = std::f64::consts::LOG2_E;
// ln(2) split into a high and a low part for exact argument reduction.
const LN2_HI: f64 = 6.931_457_519_531_25e-1;
const LN2_LO: f64 = 1.428_606_820_309_417_2e-6;

const EXP_P: [f64; 3] = [
    1.261_771_930_748_105_9e-4,
    3.029_944_077_074_419_6e-2,
    9.999_999_999_999_999_9e-1,
];
const EXP_Q: [f64; 4] = [
    3.001_985_051_386_644_6e-6,
    2.524_483_403_496_841e-3,
    2.272_655_482_081_550_3e-1,
    2.000_000_000_000_000_0e0,
];

/// `e^x` with relative error of a few ulp for |x| <= 700.
#[inline]
pub fn exp(x: f64) -> f64 {
    if x > 709.0 {
        return f64::INFINITY;
    }
    if x < -708.0 {
        return 0.0;
    }
    // x = n*ln2 + r, |r| <= ln2/2; e^x = 2^n * e^r.
    let n = (LOG2_E * x).round();
    let r = (x - n * LN2_HI) - n * LN2_LO;
    let rr = r * r;
    let p = r * ((EXP_P[0] * rr + EXP_P[1]) * rr + EXP_P[2]);
    let q = ((EXP_Q[0] * rr + EXP_Q[1]) * rr + EXP_Q[2]) * rr + EXP_Q[3];
    let er = 1.0 + 2.0 * p / (q - p);
    // |n| <= 1022 here, so the scale factor is a normal number.
    er * f64::from_bits(((1023 + n as i64) as u64) << 52)
}

/// `tanh(x)` with relative error below 1e-14.
#[inline]
pub fn tanh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.01 {
        // Series through x^7; the x^9 term is < 2e-18 relative at the cutoff.
        let x2 = x * x;
        return x * (1.0 + x2 * (-1.0 / 3.0 + x2 * (2.0 / 15.0 - x2 * (17.0 / 315.0))));
    }
    if a > 20.0 {
        // 1 - tanh(20) < 1e-17: saturates to 1 in f64.
        return 1.0_f64.copysign(x);
    }
    let e = exp(-2.0 * a);
    ((1.0 - e) / (1.0 + e)).copysign(x)
}
