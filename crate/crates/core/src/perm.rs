//! Permutations of the 27 line indices.

use std::fmt;

use crate::error::ParseError;
use crate::lines27::LineLabel;

/// Number of points permuted.
pub const N: usize = 27;

/// A permutation of `0..27`, stored as its image array.
///
/// Composition follows function notation: `(a * b)(i) = a(b(i))`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(pub [u8; N]);

impl Perm {
    pub fn identity() -> Self {
        let mut a = [0u8; N];
        for (i, x) in a.iter_mut().enumerate() {
            *x = i as u8;
        }
        Perm(a)
    }

    /// Builds a permutation from an image array, checking bijectivity.
    pub fn from_images(images: &[usize]) -> Option<Self> {
        if images.len() != N {
            return None;
        }
        let mut seen = [false; N];
        let mut a = [0u8; N];
        for (i, &x) in images.iter().enumerate() {
            if x >= N || seen[x] {
                return None;
            }
            seen[x] = true;
            a[i] = x as u8;
        }
        Some(Perm(a))
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    #[inline]
    pub fn compose(&self, other: &Perm) -> Perm {
        let mut a = [0u8; N];
        for i in 0..N {
            a[i] = self.0[other.0[i] as usize];
        }
        Perm(a)
    }

    pub fn inverse(&self) -> Perm {
        let mut a = [0u8; N];
        for i in 0..N {
            a[self.0[i] as usize] = i as u8;
        }
        Perm(a)
    }

    /// `self * g * self⁻¹`.
    pub fn conjugate(&self, g: &Perm) -> Perm {
        let mut a = [0u8; N];
        for i in 0..N {
            a[self.0[i] as usize] = self.0[g.0[i] as usize];
        }
        Perm(a)
    }

    pub fn pow(&self, mut e: u64) -> Perm {
        let mut base = *self;
        let mut acc = Perm::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Cycle lengths, sorted ascending (fixed points included).
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = [false; N];
        let mut out = Vec::new();
        for i in 0..N {
            if seen[i] {
                continue;
            }
            let mut len = 0;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = self.0[j] as usize;
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable();
        out
    }

    pub fn order(&self) -> u64 {
        self.cycle_type().into_iter().fold(1u64, |acc, l| num_integer::lcm(acc, l as u64))
    }

    /// Image of a set given as a bit mask over line indices.
    pub fn apply_mask(&self, mask: u32) -> u32 {
        let mut out = 0u32;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= 1 << self.0[i];
            m &= m - 1;
        }
        out
    }

    /// Cycle notation over canonical line labels, e.g. `(E1 G1)(E2 G2)`; `()` for the identity.
    pub fn to_cycle_string(&self) -> String {
        let mut seen = [false; N];
        let mut s = String::new();
        for i in 0..N {
            if seen[i] || self.0[i] as usize == i {
                continue;
            }
            s.push('(');
            let mut j = i;
            let mut first = true;
            while !seen[j] {
                seen[j] = true;
                if !first {
                    s.push(' ');
                }
                first = false;
                s.push_str(&LineLabel::from_index(j).to_string());
                j = self.0[j] as usize;
            }
            s.push(')');
        }
        if s.is_empty() {
            s.push_str("()");
        }
        s
    }

    /// Parses cycle notation produced by [`Perm::to_cycle_string`].
    pub fn parse_cycles(text: &str) -> Result<Perm, ParseError> {
        let mut a = Perm::identity().0;
        let mut touched = [false; N];
        let t = text.trim();
        if t == "()" || t.is_empty() {
            return Ok(Perm(a));
        }
        let mut rest = t;
        while !rest.is_empty() {
            let open = rest.find('(').ok_or_else(|| ParseError::msg(format!("expected '(' in {text:?}")))?;
            if !rest[..open].trim().is_empty() {
                return Err(ParseError::msg(format!("stray text in {text:?}")));
            }
            let close = rest.find(')').ok_or_else(|| ParseError::msg(format!("unclosed cycle in {text:?}")))?;
            let body = &rest[open + 1..close];
            let idx: Vec<usize> = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<LineLabel>().map(|l| l.index()))
                .collect::<Result<_, _>>()?;
            for (k, &i) in idx.iter().enumerate() {
                if touched[i] {
                    return Err(ParseError::msg(format!("line repeated in {text:?}")));
                }
                touched[i] = true;
                a[i] = idx[(k + 1) % idx.len()] as u8;
            }
            rest = rest[close + 1..].trim_start();
        }
        Ok(Perm(a))
    }
}

impl std::ops::Mul for Perm {
    type Output = Perm;
    fn mul(self, rhs: Perm) -> Perm {
        self.compose(&rhs)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_inverse() {
        let a = Perm::parse_cycles("(E1 E2 E3)(G1 G2)").unwrap();
        let b = Perm::parse_cycles("(E1 G1)").unwrap();
        assert!((a * a.inverse()).is_identity());
        assert_eq!((a * b).apply(LineLabel::G(1).index()), LineLabel::E(2).index());
        assert_eq!((b * a).apply(LineLabel::G(1).index()), LineLabel::G(2).index());
        assert_eq!(a.order(), 6);
        assert_eq!(a.pow(6), Perm::identity());
    }

    #[test]
    fn cycle_string_roundtrip() {
        let a = Perm::parse_cycles("(E1 F23 G4)(F56 E6)").unwrap();
        assert_eq!(Perm::parse_cycles(&a.to_cycle_string()).unwrap(), a);
        assert_eq!(Perm::identity().to_cycle_string(), "()");
        assert!(Perm::parse_cycles("(E1 E1)").is_err());
        assert!(Perm::parse_cycles("(E7)").is_err());
    }
}
