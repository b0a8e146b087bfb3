//! Packed GF(2) bit-vectors used as Pauli/tableau rows.
//!
//! The operations that dominate stabilizer simulation are row XOR and the
//! parity of a bitwise AND (symplectic inner products); both run one machine
//! word at a time here. Bits above `len` in the top word are kept zero so
//! word-level reductions need no masking.

/// Fixed-length bit-vector over `u64` words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

const WORD_BITS: usize = 64;

impl BitVec {
    /// All-zero vector of `len` bits.
    pub fn new(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// `self ^= other`. Lengths must match.
    pub fn xor_with(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor_with");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// True if any bit is set.
    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of `popcount(self & other)`.
    ///
    /// Lengths may differ; the shorter vector is treated as zero-extended,
    /// which is exactly the "identity padding" needed when comparing a frame
    /// on all qubits against a reference generator on the data qubits only.
    pub fn and_parity(&self, other: &BitVec) -> bool {
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        acc.count_ones() % 2 == 1
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    /// Grow to `len` bits, zero-filling; no-op if already at least that long.
    pub fn padded(&self, len: usize) -> BitVec {
        assert!(len >= self.len, "padded cannot shrink");
        let mut out = BitVec::new(len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_flip() {
        let mut v = BitVec::new(130);
        assert_eq!(v.len(), 130);
        assert!(!v.any());
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert!(v.get(0) && v.get(64) && v.get(129));
        assert!(!v.get(1) && !v.get(63) && !v.get(128));
        assert_eq!(v.count_ones(), 3);
        v.flip(64);
        assert!(!v.get(64));
        assert_eq!(v.count_ones(), 2);
        v.set(0, false);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![129]);
    }

    #[test]
    fn xor_and_parity() {
        let mut a = BitVec::new(70);
        let mut b = BitVec::new(70);
        for i in [0, 3, 65] {
            a.set(i, true);
        }
        for i in [3, 65, 69] {
            b.set(i, true);
        }
        // overlap {3, 65} has even parity
        assert!(!a.and_parity(&b));
        b.set(0, true);
        assert!(a.and_parity(&b));
        a.xor_with(&b);
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![69]);
    }

    #[test]
    fn and_parity_mixed_lengths() {
        let mut short = BitVec::new(3);
        short.set(2, true);
        let mut long = BitVec::new(100);
        long.set(2, true);
        long.set(99, true);
        // bit 99 has no counterpart in `short` and must not contribute
        assert!(short.and_parity(&long));
        assert!(long.and_parity(&short));
    }

    #[test]
    fn padding_preserves_bits() {
        let mut v = BitVec::new(5);
        v.set(4, true);
        let p = v.padded(80);
        assert_eq!(p.len(), 80);
        assert_eq!(p.ones().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn get_out_of_range_panics() {
        BitVec::new(8).get(8);
    }
}
