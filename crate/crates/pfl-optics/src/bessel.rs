//! Integer-order Bessel J values for micromotion sideband weights.
//!
//! Computed by Miller's downward recurrence with sum-rule normalization
//! (stable for modulation indices up to ~100, unlike upward recurrence).
//! The kernel-level J0/J1 used by the diffraction engine come from `libm`.

/// J_0(x) .. J_{n_max}(x) in one pass. Requires x >= 0.
pub fn bessel_jn_sequence(x: f64, n_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    let mut out = vec![0.0_f64; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // start order: above both the largest requested order and the turning
    // point ~x, with margin for the seed error to decay to below machine
    // epsilon (the +40 + 4 sqrt(x) margin keeps x = 80 accurate to ~1e-15)
    let start = n_max.max(x.ceil() as usize) + 40 + 4 * (x.sqrt().ceil() as usize);
    let mut j_next = 0.0_f64; // J_{m+1}
    let mut j_cur = 1.0e-30_f64; // J_m, arbitrary seed
    let mut norm = 0.0_f64; // J_0 + 2 sum_{k>=1} J_{2k}
    let mut m = start;
    loop {
        if m <= n_max {
            out[m] = j_cur;
        }
        if m % 2 == 0 {
            norm += if m == 0 { j_cur } else { 2.0 * j_cur };
        }
        if m == 0 {
            break;
        }
        let j_prev = (2.0 * m as f64 / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        m -= 1;
        if j_cur.abs() > 1.0e250 {
            let scale = 1.0e-250;
            j_cur *= scale;
            j_next *= scale;
            norm *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Sideband weights J_n(beta)^2 for n = 0..N, truncated at the smallest N
/// with J_0^2 + 2 sum_{n=1..N} J_n^2 >= 1 - tol (the n<0 weights mirror n>0).
pub fn sideband_weights(beta: f64, tol: f64) -> Vec<f64> {
    assert!(beta >= 0.0 && tol > 0.0);
    if beta == 0.0 {
        return vec![1.0];
    }
    // generous upper bound on the support of J_n(beta)
    let n_cap = (beta + 14.0 * beta.cbrt() + 24.0).ceil() as usize;
    let j = bessel_jn_sequence(beta, n_cap);
    let mut acc = j[0] * j[0];
    let mut n_cut = 0;
    if acc < 1.0 - tol {
        for (n, jn) in j.iter().enumerate().skip(1) {
            acc += 2.0 * jn * jn;
            if acc >= 1.0 - tol {
                n_cut = n;
                break;
            }
            n_cut = n;
        }
    }
    j[..=n_cut].iter().map(|v| v * v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn matches_libm_reference() {
        for &x in &[0.3, 2.0, 7.6, 25.0, 80.0] {
            let seq = bessel_jn_sequence(x, 12);
            for (n, v) in seq.iter().enumerate() {
                let reference = libm::jn(n as i32, x);
                assert_abs_diff_eq!(*v, reference, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn zero_argument() {
        let seq = bessel_jn_sequence(0.0, 4);
        assert_eq!(seq, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sideband_weights(0.0, 1e-9), vec![1.0]);
    }

    #[test]
    fn weights_satisfy_sum_rule() {
        for &beta in &[0.5, 7.6, 31.0, 100.0] {
            let w = sideband_weights(beta, 1e-9);
            let total: f64 = w[0] + 2.0 * w[1..].iter().sum::<f64>();
            assert!(total >= 1.0 - 1e-9, "beta={beta}: sum {total}");
            assert!(total <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn truncation_is_tight() {
        // dropping the last retained order must fall below the target
        let w = sideband_weights(7.6, 1e-9);
        let without_last: f64 = w[0] + 2.0 * w[1..w.len() - 1].iter().sum::<f64>();
        assert!(without_last < 1.0 - 1e-9);
    }

    #[test]
    fn large_order_underflow_is_clean() {
        let seq = bessel_jn_sequence(1.0, 60);
        assert!(seq[59].abs() < 1e-80);
        assert_relative_eq!(seq[0], libm::j0(1.0), max_relative = 1e-13);
    }
}
