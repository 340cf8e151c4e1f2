//! The polar transform `x = u G_n` with `G_n` the n-th Kronecker power of
//! `[[1, 0], [1, 1]]`, in natural index order.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Returns `log2(len)` if `len` is a power of two.
pub fn log2_len(len: usize) -> Result<u32> {
    if len.is_power_of_two() {
        Ok(len.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo(len))
    }
}

/// In-place butterfly. `G_n` is an involution over GF(2), so this is also
/// its own inverse.
pub fn transform_in_place(bits: &mut [u8]) -> Result<()> {
    let len = bits.len();
    log2_len(len)?;
    let mut half = 1;
    while half < len {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Computes `u G_n` over GF(2) in `O(N log N)`.
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    let mut x = u.to_vec();
    transform_in_place(&mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    /// Row-by-row product with an explicitly built Kronecker power.
    fn dense_transform(u: &[u8]) -> Vec<u8> {
        let n = u.len();
        let mut g = vec![vec![1u8]];
        while g.len() < n {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    next[r][c] = g[r][c];
                    next[r + m][c] = g[r][c];
                    next[r + m][c + m] = g[r][c];
                }
            }
            g = next;
        }
        (0..n)
            .map(|c| (0..n).fold(0u8, |acc, r| acc ^ (u[r] & g[r][c])))
            .collect()
    }

    #[test]
    fn kernel_and_zero_vector() {
        assert_eq!(polar_transform(&[1, 1]).unwrap(), vec![0, 1]);
        assert_eq!(polar_transform(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(polar_transform(&[0; 64]).unwrap(), vec![0; 64]);
        assert_eq!(polar_transform(&[1]).unwrap(), vec![1]);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(polar_transform(&[0; 6]), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(polar_transform(&[]), Err(Error::NotPowerOfTwo(0)));
    }

    #[test]
    fn matches_dense_kronecker_product() {
        let u: Vec<u8> = (0..32).map(|i| ((i * 7 + 3) % 5 == 0) as u8).collect();
        assert_eq!(polar_transform(&u).unwrap(), dense_transform(&u));
    }

    #[test]
    fn large_transform_smoke() {
        let mut u: Vec<u8> = (0..1usize << 20).map(|i| (i.count_ones() & 1) as u8).collect();
        let orig = u.clone();
        transform_in_place(&mut u).unwrap();
        transform_in_place(&mut u).unwrap();
        assert_eq!(u, orig);
    }

    fn bits_pow2() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        (1u32..=10).prop_flat_map(|n| {
            let len = 1usize << n;
            (
                proptest::collection::vec(0u8..=1, len),
                proptest::collection::vec(0u8..=1, len),
            )
        })
    }

    proptest! {
        #[test]
        fn involution((u, _) in bits_pow2()) {
            let x = polar_transform(&u).unwrap();
            prop_assert_eq!(polar_transform(&x).unwrap(), u);
        }

        #[test]
        fn linearity((a, b) in bits_pow2()) {
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let lhs = polar_transform(&sum).unwrap();
            let rhs: Vec<u8> = polar_transform(&a).unwrap().iter()
                .zip(polar_transform(&b).unwrap())
                .map(|(x, y)| x ^ y)
                .collect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
