//! Fixed-width bitsets over dense vertex indices.

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bits::new(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    pub fn from_bools(flags: &[bool]) -> Self {
        let mut b = Bits::new(flags.len());
        for (i, &f) in flags.iter().enumerate() {
            if f {
                b.set(i);
            }
        }
        b
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    /// Smallest index set in `self & a & b`.
    #[inline]
    pub fn first_common3(&self, a: &Bits, b: &Bits) -> Option<usize> {
        for (k, ((x, y), z)) in self.words.iter().zip(&a.words).zip(&b.words).enumerate() {
            let w = x & y & z;
            if w != 0 {
                return Some(k * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    #[inline]
    /// Words of `self & other`, usable as a hash key.
    pub fn and_words(&self, other: &Bits) -> Vec<u64> {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(x, y)| x & y)
            .collect()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + t)
                }
            })
        })
    }

    /// Indices set in `self & other`, ascending.
    pub fn iter_common<'a>(&'a self, other: &'a Bits) -> impl Iterator<Item = usize> + 'a {
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .flat_map(|(k, (&x, &y))| {
                let mut w = x & y;
                std::iter::from_fn(move || {
                    if w == 0 {
                        None
                    } else {
                        let t = w.trailing_zeros() as usize;
                        w &= w - 1;
                        Some(k * 64 + t)
                    }
                })
            })
    }
}
