use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::svm::Label;

/// Cohen's kappa between two binary prediction lists.
///
/// Chance agreement is `sum_k P(k|a) P(k|b)` over both labels. When it equals 1
/// (both lists constant) kappa is taken as 1 for identical lists and 0 otherwise.
pub fn kappa<T: Scalar>(a: &[Label], b: &[Label]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = a.len();
    let mut agree = 0usize;
    let mut pos_a = 0usize;
    let mut pos_b = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        agree += usize::from(x == y);
        pos_a += usize::from(x == Label::Positive);
        pos_b += usize::from(y == Label::Positive);
    }
    let nf = T::of_usize(n);
    let observed = T::of_usize(agree) / nf;
    let pa = T::of_usize(pos_a) / nf;
    let pb = T::of_usize(pos_b) / nf;
    let one = T::one();
    let expected = pa * pb + (one - pa) * (one - pb);
    if expected >= one {
        return Ok(if agree == n { one } else { T::zero() });
    }
    Ok((observed - expected) / (one - expected))
}

/// Bootstrap standard error of kappa, resampling stop-set positions with
/// replacement. Diagnostic only; it plays no part in any stopping decision.
pub fn kappa_bootstrap_se<T: Scalar, R: Rng>(
    a: &[Label],
    b: &[Label],
    resamples: usize,
    rng: &mut R,
) -> Result<T> {
    // Validates lengths before resampling.
    kappa::<T>(a, b)?;
    if resamples < 2 {
        return Err(Error::InvalidParameter("need at least 2 bootstrap resamples".into()));
    }
    let n = a.len();
    let mut ra = vec![Label::Negative; n];
    let mut rb = vec![Label::Negative; n];
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for j in 0..n {
            let i = rng.gen_range(0..n);
            ra[j] = a[i];
            rb[j] = b[i];
        }
        values.push(kappa::<T>(&ra, &rb)?);
    }
    let m = T::of_usize(resamples);
    let mean = values.iter().copied().sum::<T>() / m;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (m - T::one());
    Ok(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn hand_cases() {
        assert_eq!(kappa::<f64>(&[P, P, N, N], &[P, N, P, N]).unwrap(), 0.0);
        assert_eq!(kappa::<f64>(&[P, P, P, N], &[P, P, N, N]).unwrap(), 0.5);
        assert_eq!(kappa::<f64>(&[P, N, N, P, N], &[P, N, N, P, N]).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_constant_lists() {
        assert_eq!(kappa::<f64>(&[P, P, P], &[P, P, P]).unwrap(), 1.0);
        // Opposite constants: A_o = 0 and A_e = 0.
        assert_eq!(kappa::<f64>(&[P, P], &[N, N]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(kappa::<f64>(&[P], &[P, N]), Err(Error::LengthMismatch(1, 2))));
        assert!(matches!(kappa::<f64>(&[], &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn bootstrap_se_shrinks_with_size() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let small_a: Vec<_> = (0..40).map(|i| if i % 3 == 0 { P } else { N }).collect();
        let small_b: Vec<_> = (0..40).map(|i| if i % 3 == 0 || i % 7 == 0 { P } else { N }).collect();
        let big_a: Vec<_> = small_a.iter().cycle().take(4000).copied().collect();
        let big_b: Vec<_> = small_b.iter().cycle().take(4000).copied().collect();
        let se_small: f64 = kappa_bootstrap_se(&small_a, &small_b, 1000, &mut rng).unwrap();
        let se_big: f64 = kappa_bootstrap_se(&big_a, &big_b, 1000, &mut rng).unwrap();
        assert!(se_big < se_small);
        assert!(se_big > 0.0);
    }

    fn labels(n: usize) -> impl Strategy<Value = (Vec<Label>, Vec<Label>)> {
        let l = prop_oneof![Just(P), Just(N)];
        (
            proptest::collection::vec(l.clone(), n),
            proptest::collection::vec(l, n),
        )
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded((a, b) in (1usize..60).prop_flat_map(labels)) {
            let ab = kappa::<f64>(&a, &b).unwrap();
            let ba = kappa::<f64>(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
