//! Letter permutations on a k-letter alphabet.
//!
//! A `Perm` is stored in one-line notation: `img[a]` is the image of letter `a`.
//! Composition follows function notation, `(s.compose(&t))(a) = s(t(a))`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest alphabet the crate supports; letters render as `'a'..='j'`.
pub const MAX_K: usize = 10;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    k: u8,
    img: [u8; MAX_K],
}

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

impl Perm {
    pub fn identity(k: usize) -> Perm {
        assert!(k <= MAX_K);
        let mut img = [0u8; MAX_K];
        for (a, slot) in img.iter_mut().enumerate().take(k) {
            *slot = a as u8;
        }
        Perm { k: k as u8, img }
    }

    pub fn from_images(images: &[u8]) -> Result<Perm> {
        let k = images.len();
        if k == 0 || k > MAX_K {
            return Err(Error::Domain(format!("permutation size {k} out of range")));
        }
        let mut seen = [false; MAX_K];
        let mut img = [0u8; MAX_K];
        for (a, &b) in images.iter().enumerate() {
            if b as usize >= k || seen[b as usize] {
                return Err(Error::Domain(format!("{images:?} is not a permutation")));
            }
            seen[b as usize] = true;
            img[a] = b;
        }
        Ok(Perm { k: k as u8, img })
    }

    /// Parses the one-line image string used in cache files, e.g. `"bacde"`.
    pub fn parse(s: &str) -> Result<Perm> {
        let images: Vec<u8> = s
            .bytes()
            .map(|c| c.wrapping_sub(b'a'))
            .collect();
        Perm::from_images(&images)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k as usize
    }

    #[inline]
    pub fn apply(&self, a: u8) -> u8 {
        self.img[a as usize]
    }

    pub fn images(&self) -> &[u8] {
        &self.img[..self.k as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images().iter().enumerate().all(|(a, &b)| a as u8 == b)
    }

    /// `self ∘ other`.
    #[inline]
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.k, other.k);
        let mut img = [0u8; MAX_K];
        for a in 0..self.k as usize {
            img[a] = self.img[other.img[a] as usize];
        }
        Perm { k: self.k, img }
    }

    pub fn inverse(&self) -> Perm {
        let mut img = [0u8; MAX_K];
        for a in 0..self.k as usize {
            img[self.img[a] as usize] = a as u8;
        }
        Perm { k: self.k, img }
    }

    pub fn apply_word(&self, letters: &[u8]) -> Vec<u8> {
        letters.iter().map(|&a| self.apply(a)).collect()
    }

    /// Lexicographic rank in `0..k!` (Lehmer code).
    pub fn rank(&self) -> u32 {
        let k = self.k as usize;
        let mut rank = 0u32;
        for i in 0..k {
            let smaller = (i + 1..k).filter(|&j| self.img[j] < self.img[i]).count() as u32;
            rank = rank * (k - i) as u32 + smaller;
        }
        rank
    }

    pub fn unrank(k: usize, mut rank: u32) -> Perm {
        let mut digits = [0u32; MAX_K];
        for i in (0..k).rev() {
            let base = (k - i) as u32;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<u8> = (0..k as u8).collect();
        let mut img = [0u8; MAX_K];
        for i in 0..k {
            img[i] = pool.remove(digits[i] as usize);
        }
        Perm { k: k as u8, img }
    }

    /// All permutations of `k` letters in rank order.
    pub fn all(k: usize) -> Vec<Perm> {
        (0..factorial(k) as u32).map(|r| Perm::unrank(k, r)).collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.images() {
            write!(f, "{}", (b'a' + b) as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_unrank_cover_all() {
        for k in 1..=6 {
            let all = Perm::all(k);
            assert_eq!(all.len() as u64, factorial(k));
            for (r, p) in all.iter().enumerate() {
                assert_eq!(p.rank(), r as u32);
            }
            assert!(all[0].is_identity());
        }
    }

    #[test]
    fn compose_and_inverse() {
        let s = Perm::parse("cabed").unwrap();
        let t = Perm::parse("bcdea").unwrap();
        let st = s.compose(&t);
        for a in 0..5u8 {
            assert_eq!(st.apply(a), s.apply(t.apply(a)));
        }
        assert!(s.compose(&s.inverse()).is_identity());
        assert_eq!(st.to_string().len(), 5);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Perm::from_images(&[0, 0, 1]).is_err());
        assert!(Perm::parse("abd").is_err());
    }
}
