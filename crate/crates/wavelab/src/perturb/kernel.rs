//! The quadratic remainder kernel of the difference equation:
//!
//!   F[u, w] = -p(p-1) ∫_0^1 |u + σw|^{p-3}(u + σw)(1 - σ) dσ,
//!
//! so that |u+w|^{p-1}(u+w) - |u|^{p-1}u = p|u|^{p-1}w - w² F[u, w].
//!
//! The integrand has a |·|^{p-2}-type kink where u + σw crosses zero;
//! splitting the integral at the crossing leaves piecewise-analytic
//! integrands (polynomials for integer p), which 8-node Gauss-Legendre
//! integrates essentially exactly.

use crate::error::{Error, Result};

// 8-point Gauss-Legendre nodes/weights on [-1, 1]
const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.5255324099163290, 0.3137066458778873),
    (-0.1834346424956498, 0.3626837833783620),
    (0.1834346424956498, 0.3626837833783620),
    (0.5255324099163290, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

fn gl8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL8.iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Evaluate F[u, w] for a single pair of field values. Requires p > 3.
pub fn f_kernel(u_val: f64, w_val: f64, p: f64) -> Result<f64> {
    if !(p > 3.0) {
        return Err(Error::Params(format!(
            "F[u, w] requires p > 3, got p = {p}"
        )));
    }
    let integrand = |sigma: f64| {
        let s = u_val + sigma * w_val;
        s.abs().powf(p - 3.0) * s * (1.0 - sigma)
    };
    let integral = if w_val != 0.0 {
        let crossing = -u_val / w_val;
        if crossing > 0.0 && crossing < 1.0 {
            gl8(integrand, 0.0, crossing) + gl8(integrand, crossing, 1.0)
        } else {
            gl8(integrand, 0.0, 1.0)
        }
    } else {
        gl8(integrand, 0.0, 1.0)
    };
    Ok(-p * (p - 1.0) * integral)
}

/// Left-hand side of the expansion: |u+w|^{p-1}(u+w) - |u|^{p-1}u.
pub fn nonlinear_difference(u_val: f64, w_val: f64, p: f64) -> f64 {
    let s = u_val + w_val;
    s.abs().powf(p - 1.0) * s - u_val.abs().powf(p - 1.0) * u_val
}

/// Relative error of the identity
/// p|u|^{p-1}w - w²F[u,w] = |u+w|^{p-1}(u+w) - |u|^{p-1}u
/// on one pair, used by the randomized identity suite.
pub fn expansion_identity_error(u_val: f64, w_val: f64, p: f64) -> Result<f64> {
    let target = nonlinear_difference(u_val, w_val, p);
    let linear = p * u_val.abs().powf(p - 1.0) * w_val;
    let quad = w_val * w_val * f_kernel(u_val, w_val, p)?;
    let got = linear - quad;
    let scale = target.abs().max(linear.abs()).max(quad.abs()).max(1e-300);
    Ok((got - target).abs() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn kernel_constant_in_sigma_when_w_zero() {
        // w = 0: F = -p(p-1)|u|^{p-3}u ∫(1-σ)dσ = -p(p-1)|u|^{p-3}u/2
        for &u in &[0.3f64, -1.7, 2.0] {
            let p = 7.0;
            let expect = -p * (p - 1.0) * u.abs().powf(p - 3.0) * u / 2.0;
            assert_relative_eq!(f_kernel(u, 0.0, p).unwrap(), expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn kernel_zero_pair() {
        assert_eq!(f_kernel(0.0, 0.0, 7.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_rejects_low_power() {
        assert!(f_kernel(1.0, 1.0, 3.0).is_err());
        assert!(f_kernel(1.0, 1.0, 2.5).is_err());
    }

    #[test]
    fn expansion_identity_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &p in &[7.0, 8.0] {
            for _ in 0..2000 {
                let u: f64 = rng.gen_range(-2.0..2.0);
                let w: f64 = rng.gen_range(-2.0..2.0);
                let err = expansion_identity_error(u, w, p).unwrap();
                assert!(
                    err <= 1e-8,
                    "identity error {err:e} at (u, w, p) = ({u}, {w}, {p})"
                );
            }
        }
    }

    #[test]
    fn expansion_identity_with_crossing() {
        // force the zero of u + σw inside (0, 1)
        let err = expansion_identity_error(1.0, -1.6, 7.0).unwrap();
        assert!(err <= 1e-12, "split quadrature should be near-exact: {err:e}");
    }
}
