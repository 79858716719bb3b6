//! Arbitrary-precision oracle for the screening statistic (test support,
//! behind the `oracle` feature).
//!
//! Evaluates the defining sums directly in 160-bit floats and shares no code
//! with the production path. The kernel's normalizing constant cancels in
//! every density ratio, so only exp and ln are needed.

use dashu_float::FBig;

const PRECISION: usize = 160;

fn big(x: f64) -> FBig {
    FBig::try_from(x)
        .expect("finite input")
        .with_precision(PRECISION)
        .value()
}

fn big_abs(x: FBig) -> FBig {
    let zero: FBig = FBig::ZERO;
    if x < zero { -x } else { x }
}

/// Unnormalized Hall kernel factor exp(-(ln(1 + |z|))^2 / 2).
fn kernel_factor(z: FBig) -> FBig {
    let one = big(1.0);
    let t = (one + big_abs(z)).ln();
    let half = big(0.5);
    (-(half * t.clone() * t)).exp()
}

/// Direct evaluation of the statistic: the average over samples of the log
/// ratio of the within-class leave-one-out density to the pooled leave-one-out
/// density, each normalized by (terms summed) * bandwidth.
pub fn alb_oracle(values: &[f64], labels: &[u8], bandwidth: f64) -> f64 {
    let total = values.len();
    assert_eq!(total, labels.len());
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = total - n1;
    assert!(n0 >= 2 && n1 >= 2, "need two samples per class");
    let b = big(bandwidth);

    let mut log_sum = big(0.0);
    for i in 0..total {
        let mut class_sum = big(0.0);
        let mut pool_sum = big(0.0);
        for r in 0..total {
            if r == i {
                continue;
            }
            let z = (big(values[i]) - big(values[r])) / b.clone();
            let k = kernel_factor(z);
            pool_sum += k.clone();
            if labels[r] == labels[i] {
                class_sum += k;
            }
        }
        let own_count = if labels[i] == 0 { n0 } else { n1 };
        let within = class_sum / (big((own_count - 1) as f64) * b.clone());
        let pooled = pool_sum / (big((total - 1) as f64) * b.clone());
        log_sum += (within / pooled).ln();
    }
    (log_sum / big(total as f64)).to_f64().value()
}

/// Variant normalizing all three estimates by the same 1/(n0*b) factor.
/// Every ratio is then at most 1, forcing the statistic nonpositive; kept to
/// document why the count-based normalization is the working convention.
pub fn alb_oracle_uniform_norm(values: &[f64], labels: &[u8], bandwidth: f64) -> f64 {
    let total = values.len();
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = total - n1;
    let b = big(bandwidth);
    let norm = big(n0 as f64) * b.clone();

    let mut log_sum = big(0.0);
    for i in 0..total {
        let mut class_sum = big(0.0);
        let mut pool_sum = big(0.0);
        for r in 0..total {
            if r == i {
                continue;
            }
            let z = (big(values[i]) - big(values[r])) / b.clone();
            let k = kernel_factor(z);
            pool_sum += k.clone();
            if labels[r] == labels[i] {
                class_sum += k;
            }
        }
        let within = class_sum / norm.clone();
        let pooled = pool_sum / norm.clone();
        log_sum += (within / pooled).ln();
    }
    (log_sum / big(total as f64)).to_f64().value()
}
