//! Letters, lazy words and free-group word manipulation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A letter over the generators: `+k` is generator `k-1`, `-k` its inverse,
/// `0` the lazy letter.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter(i8);

impl Letter {
    pub const LAZY: Letter = Letter(0);

    /// The `index`-th generator (0-based).
    pub fn gen(index: usize) -> Letter {
        Letter(index as i8 + 1)
    }

    pub fn gen_inv(index: usize) -> Letter {
        Letter(-(index as i8 + 1))
    }

    pub fn raw(self) -> i8 {
        self.0
    }

    pub fn from_raw(raw: i8) -> Letter {
        Letter(raw)
    }

    pub fn is_lazy(self) -> bool {
        self.0 == 0
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    /// Generator index, `None` for the lazy letter.
    pub fn generator(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.unsigned_abs() as usize - 1)
        }
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Lowercase for generators, uppercase for inverses, `.` for lazy.
    pub fn to_char(self) -> char {
        match self.generator() {
            None => '.',
            Some(g) => {
                let c = (b'a' + g as u8) as char;
                if self.is_inverse() {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            }
        }
    }

    pub fn from_char(c: char) -> Result<Letter> {
        match c {
            '.' => Ok(Letter::LAZY),
            'a'..='z' => Ok(Letter::gen(c as usize - 'a' as usize)),
            'A'..='Z' => Ok(Letter::gen_inv(c as usize - 'A' as usize)),
            _ => Err(Error::InvalidWord(format!("unexpected character `{c}`"))),
        }
    }

    fn order_key(self) -> (i16, u8) {
        match self.generator() {
            None => (-1, 0),
            Some(g) => (g as i16, self.is_inverse() as u8),
        }
    }
}

/// Fixed letter order `. < a < A < b < B < ...` used for canonical geodesics.
impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A word over generators, inverses and the lazy letter.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct LazyWord {
    pub letters: Vec<Letter>,
}

impl LazyWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        LazyWord { letters }
    }

    pub fn empty() -> Self {
        LazyWord::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters with lazy steps removed.
    pub fn without_lazy(&self) -> Vec<Letter> {
        self.letters.iter().copied().filter(|l| !l.is_lazy()).collect()
    }

    /// Cyclic rotation `a_{k+1} ... a_n a_1 ... a_k`.
    pub fn rotated(&self, k: usize) -> LazyWord {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            letters.rotate_left(k % self.letters.len());
        }
        LazyWord { letters }
    }

    pub fn concat(&self, other: &LazyWord) -> LazyWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        LazyWord { letters }
    }

    /// Letter-wise inverse of the reversed word.
    pub fn inverse(&self) -> LazyWord {
        LazyWord { letters: inverse(&self.letters) }
    }
}

impl From<Vec<Letter>> for LazyWord {
    fn from(letters: Vec<Letter>) -> Self {
        LazyWord { letters }
    }
}

impl FromStr for LazyWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(Letter::from_char)
            .collect::<Result<Vec<_>>>()?;
        Ok(LazyWord { letters })
    }
}

impl fmt::Display for LazyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// Format a plain letter slice.
pub fn word_string(w: &[Letter]) -> String {
    w.iter().map(|l| l.to_char()).collect()
}

/// Parse a word that may not contain lazy letters.
pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    let w: LazyWord = s.parse()?;
    if w.letters.iter().any(|l| l.is_lazy()) {
        return Err(Error::InvalidWord(format!("lazy letter in `{s}`")));
    }
    Ok(w.letters)
}

pub fn inverse(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// Free reduction; lazy letters are dropped.
pub fn free_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    push_reduced(&mut out, w);
    out
}

/// Append `w` to an already reduced word, reducing as it goes.
pub fn push_reduced(out: &mut Vec<Letter>, w: &[Letter]) {
    for &l in w {
        if l.is_lazy() {
            continue;
        }
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
}

/// Split a word into `(y, q)` with `w = y q y^-1` freely and `q` cyclically reduced.
pub fn cyclic_reduce(w: &[Letter]) -> (Vec<Letter>, Vec<Letter>) {
    let r = free_reduce(w);
    let mut i = 0;
    let mut j = r.len();
    while j > i + 1 && r[i] == r[j - 1].inverse() {
        i += 1;
        j -= 1;
    }
    (r[..i].to_vec(), r[i..j].to_vec())
}

/// Lexicographically least rotation (by the fixed letter order).
pub fn min_rotation(w: &[Letter]) -> Vec<Letter> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0;
    for k in 1..n {
        let cmp = (0..n)
            .map(|i| w[(k + i) % n].cmp(&w[(best + i) % n]))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        if cmp == Ordering::Less {
            best = k;
        }
    }
    (0..n).map(|i| w[(best + i) % n]).collect()
}

/// `x y x^-1 y^-1`, freely reduced.
pub fn commutator(x: &[Letter], y: &[Letter]) -> Vec<Letter> {
    let mut w = Vec::with_capacity(2 * (x.len() + y.len()));
    w.extend_from_slice(x);
    w.extend_from_slice(y);
    w.extend(inverse(x));
    w.extend(inverse(y));
    free_reduce(&w)
}

/// `x^k` for an integer exponent.
pub fn power(x: &[Letter], k: i64) -> Vec<Letter> {
    let base = if k < 0 { inverse(x) } else { x.to_vec() };
    let mut w = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
    for _ in 0..k.unsigned_abs() {
        w.extend_from_slice(&base);
    }
    free_reduce(&w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<Letter> {
        s.parse::<LazyWord>().unwrap().letters
    }

    #[test]
    fn parse_and_print() {
        let word: LazyWord = "aB.c".parse().unwrap();
        assert_eq!(word.len(), 4);
        assert_eq!(word.to_string(), "aB.c");
        assert!("a1".parse::<LazyWord>().is_err());
    }

    #[test]
    fn letter_order_puts_inverse_after_generator() {
        let mut ls = w("BbAa");
        ls.sort();
        assert_eq!(word_string(&ls), "aAbB");
    }

    #[test]
    fn reduction() {
        assert_eq!(word_string(&free_reduce(&w("aAb.Bb"))), "b");
        let (y, q) = cyclic_reduce(&w("abcBA"));
        assert_eq!(word_string(&y), "ab");
        assert_eq!(word_string(&q), "c");
        assert_eq!(word_string(&commutator(&w("a"), &w("b"))), "abAB");
        assert_eq!(word_string(&min_rotation(&w("bABa"))), "abAB");
    }

    #[test]
    fn min_rotation_is_rotation_invariant() {
        let base = w("bAcaB");
        let m = min_rotation(&base);
        for k in 0..base.len() {
            let mut r = base.clone();
            r.rotate_left(k);
            assert_eq!(min_rotation(&r), m);
        }
    }
}
