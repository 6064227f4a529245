//! Closed forms for the three-node path `0 - 1 - 2` with `T = 2`.
//!
//! With `q_i = 1 - p_i`, the normalizer is
//! `Z = 1 + q1 p2 + q1 p0 + p1 + q1 p0 p2 = q1 (1 + p0)(1 + p2) + 2 p1` and
//!
//! ```text
//! S_0 = 2 p0 q1 (1 + p2) / Z
//! S_1 = 2 q0 p1 q2 / Z
//! S_2 = 2 q1 p2 (1 + p0) / Z
//! ```

use crate::config::NetworkConfig;

pub fn is_path3(cfg: &NetworkConfig) -> bool {
    cfg.n() == 3 && cfg.packet_slots() == 2 && cfg.graph().edges() == [(0, 1), (1, 2)]
}

fn parts(p: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3], f64, [f64; 3]) {
    let [p0, p1, p2] = p;
    let (q0, q1, q2) = (1.0 - p0, 1.0 - p1, 1.0 - p2);
    let num = [p0 * q1 * (1.0 + p2), q0 * p1 * q2, q1 * p2 * (1.0 + p0)];
    // d num[k] / d p_i
    let dnum = [
        [q1 * (1.0 + p2), -p0 * (1.0 + p2), p0 * q1],
        [-p1 * q2, q0 * q2, -q0 * p1],
        [q1 * p2, -p2 * (1.0 + p0), q1 * (1.0 + p0)],
    ];
    let z = q1 * (1.0 + p0) * (1.0 + p2) + 2.0 * p1;
    let dz = [
        q1 * (1.0 + p2),
        2.0 - (1.0 + p0) * (1.0 + p2),
        q1 * (1.0 + p0),
    ];
    (num, dnum, z, dz)
}

pub fn throughput(p: [f64; 3]) -> [f64; 3] {
    let (num, _, z, _) = parts(p);
    num.map(|x| 2.0 * x / z)
}

/// `jac[k][i] = dS_k / dp_i`.
pub fn jacobian(p: [f64; 3]) -> [[f64; 3]; 3] {
    let (num, dnum, z, dz) = parts(p);
    let mut jac = [[0.0; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            jac[k][i] = 2.0 * (dnum[k][i] * z - num[k] * dz[i]) / (z * z);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn half_probabilities() {
        // Z = 1 + 0.25 + 0.25 + 0.5 + 0.125
        let s = throughput([0.5; 3]);
        assert_abs_diff_eq!(s[0], 2.0 * 0.375 / 2.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 2.0 * 0.125 / 2.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s[2], 2.0 * 0.375 / 2.125, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_matches_difference_quotient() {
        let p = [0.3, 0.55, 0.8];
        let jac = jacobian(p);
        let h = 1e-6;
        for i in 0..3 {
            let (mut a, mut b) = (p, p);
            a[i] += h;
            b[i] -= h;
            let (sa, sb) = (throughput(a), throughput(b));
            for k in 0..3 {
                assert_abs_diff_eq!(jac[k][i], (sa[k] - sb[k]) / (2.0 * h), epsilon = 1e-8);
            }
        }
    }
}
