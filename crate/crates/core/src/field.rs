//! Prime-field arithmetic used by the Reed-Solomon codec.
//!
//! Elements are plain `u32` values in `[0, q)`. The field itself is a small
//! `Copy` handle carrying the modulus, so arithmetic is always explicit about
//! which field it happens in.

use std::fmt;

/// A prime field GF(q).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u32,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PrimeField {
    /// Creates GF(q). Returns `None` if `q` is not prime.
    pub fn new(q: u32) -> Option<Self> {
        if is_prime(q) {
            Some(PrimeField { q })
        } else {
            None
        }
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn contains(&self, a: u32) -> bool {
        a < self.q
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u32 {
        (a % self.q as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s >= self.q as u64 {
            (s - self.q as u64) as u32
        } else {
            s as u32
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.q as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat. `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            Some(self.pow(a, self.q as u64 - 2))
        }
    }

    /// Evaluates `coeffs[0] + coeffs[1] x + ...` at `x` (Horner).
    pub fn eval_poly(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Number of whole bits a single element can carry: `floor(log2 q)`.
    pub fn payload_bits(&self) -> u32 {
        31 - self.q.leading_zeros()
    }

    /// Bits needed to write any element: `ceil(log2 q)`.
    pub fn element_bits(&self) -> u32 {
        ceil_log2(self.q as u64)
    }
}

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_multiple_of(2) {
        return q == 2;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= q as u64 {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= lower`.
pub fn next_prime(lower: u32) -> u32 {
    let mut q = lower.max(2);
    while !is_prime(q) {
        q += 1;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(next_prime(257), 257);
        assert_eq!(next_prime(258), 263);
        assert!(PrimeField::new(256).is_none());
        assert!(PrimeField::new(7).is_some());
    }

    #[test]
    fn inverse_roundtrip_gf7() {
        let f = PrimeField::new(7).unwrap();
        for a in 1..7 {
            let ai = f.inv(a).unwrap();
            assert_eq!(f.mul(a, ai), 1);
        }
        assert_eq!(f.inv(0), None);
    }

    #[test]
    fn bit_widths() {
        let f = PrimeField::new(257).unwrap();
        assert_eq!(f.payload_bits(), 8);
        assert_eq!(f.element_bits(), 9);
        let g = PrimeField::new(7).unwrap();
        assert_eq!(g.payload_bits(), 2);
        assert_eq!(g.element_bits(), 3);
    }

    #[test]
    fn horner_matches_naive() {
        let f = PrimeField::new(7).unwrap();
        // 3 + 5x at x=4: 3 + 20 = 23 = 2 mod 7
        assert_eq!(f.eval_poly(&[3, 5], 4), 2);
    }
}
