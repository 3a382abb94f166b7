//! Fixed-length bitsets with the fused mask/count operations the rule
//! matcher and fitness evaluation run on.

/// A fixed-length bitset backed by 64-bit words. Unused high bits of the
/// last word are kept zero so popcounts never need masking.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Bits::new(len);
        for i in 0..len {
            if f(i) {
                b.set(i, true);
            }
        }
        b
    }

    pub fn from_bools(values: &[bool]) -> Self {
        Bits::from_fn(values.len(), |i| values[i])
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits::new(len);
        for w in &mut b.words {
            *w = u64::MAX;
        }
        b.clear_spare();
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    fn clear_spare(&mut self) {
        let spare = self.words.len() * 64 - self.len;
        if spare > 0 {
            let last = self.words.len() - 1;
            self.words[last] &= u64::MAX >> spare;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|w| *w != 0)
    }

    fn check_len(&self, other: &Bits) {
        assert_eq!(self.len, other.len, "bitset length mismatch");
    }

    pub fn and(&self, other: &Bits) -> Bits {
        self.check_len(other);
        Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn or(&self, other: &Bits) -> Bits {
        self.check_len(other);
        Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    /// Bits set in `self` but not in `other`.
    pub fn and_not(&self, other: &Bits) -> Bits {
        self.check_len(other);
        Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn or_with(&mut self, other: &Bits) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_with(&mut self, other: &Bits) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// popcount(self & other) without allocating.
    pub fn and_count(&self, other: &Bits) -> usize {
        self.check_len(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// popcount((self ^ other) & mask) without allocating.
    pub fn xor_and_count(&self, other: &Bits, mask: &Bits) -> usize {
        self.check_len(other);
        self.check_len(mask);
        self.words
            .iter()
            .zip(&other.words)
            .zip(&mask.words)
            .map(|((a, b), m)| ((a ^ b) & m).count_ones() as usize)
            .sum()
    }

    /// Intersection of several bitsets; `sets` must be non-empty.
    pub fn intersect_all(sets: &[&Bits]) -> Bits {
        let first = sets[0];
        let mut out = first.clone();
        for s in &sets[1..] {
            out.and_with(s);
        }
        out
    }

    /// (popcount(∩ sets), popcount(∩ sets & mask)) without allocating;
    /// `sets` must be non-empty.
    pub fn intersect_counts(sets: &[&Bits], mask: &Bits) -> (usize, usize) {
        let words = sets[0].words.len();
        let mut total = 0usize;
        let mut masked = 0usize;
        for w in 0..words {
            let mut acc = sets[0].words[w];
            for s in &sets[1..] {
                acc &= s.words[w];
            }
            total += acc.count_ones() as usize;
            masked += (acc & mask.words[w]).count_ones() as usize;
        }
        (total, masked)
    }

    /// Indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_count() {
        let mut b = Bits::new(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert!(b.get(0) && b.get(64) && b.get(129));
        assert!(!b.get(1));
        assert_eq!(b.count_ones(), 3);
        b.set(64, false);
        assert_eq!(b.count_ones(), 2);
    }

    #[test]
    fn fused_ops_match_naive() {
        let a = Bits::from_fn(100, |i| i % 3 == 0);
        let b = Bits::from_fn(100, |i| i % 5 == 0);
        let m = Bits::from_fn(100, |i| i < 50);
        let naive_and = (0..100).filter(|&i| i % 3 == 0 && i % 5 == 0).count();
        assert_eq!(a.and_count(&b), naive_and);
        let naive_xor = (0..100)
            .filter(|&i| (i % 3 == 0) != (i % 5 == 0) && i < 50)
            .count();
        assert_eq!(a.xor_and_count(&b, &m), naive_xor);
        assert_eq!(a.and(&b).count_ones(), naive_and);
        assert_eq!(
            a.and_not(&b).count_ones(),
            (0..100).filter(|&i| i % 3 == 0 && i % 5 != 0).count()
        );
    }

    #[test]
    fn ones_keeps_spare_bits_clear() {
        let b = Bits::ones(70);
        assert_eq!(b.count_ones(), 70);
        assert_eq!(b.iter_ones().count(), 70);
        assert_eq!(b.iter_ones().last(), Some(69));
    }

    #[test]
    fn iter_ones_order() {
        let b = Bits::from_fn(200, |i| i == 5 || i == 63 || i == 64 || i == 199);
        let v: Vec<usize> = b.iter_ones().collect();
        assert_eq!(v, vec![5, 63, 64, 199]);
    }
}
