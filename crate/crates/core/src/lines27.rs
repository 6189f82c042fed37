//! The configuration of the 27 lines on a smooth cubic surface.
//!
//! Lines are indexed `0..27` in the fixed order `E1..E6, G1..G6, F12, F13, ..., F56`.
//! Sets of lines are bit masks (`u32`, bit `i` = line `i`).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};

/// Bit mask of line indices.
pub type LineSet = u32;

/// Index pairs `(i, j)`, `1 ≤ i < j ≤ 6`, in the order of the `F` lines.
pub const F_PAIRS: [(u8, u8); 15] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (1, 6),
    (2, 3),
    (2, 4),
    (2, 5),
    (2, 6),
    (3, 4),
    (3, 5),
    (3, 6),
    (4, 5),
    (4, 6),
    (5, 6),
];

/// Mask of the 15 `F` lines.
pub const F_MASK: LineSet = ((1 << 27) - 1) & !((1 << 12) - 1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineLabel {
    E(u8),
    G(u8),
    F(u8, u8),
}

impl LineLabel {
    pub fn index(self) -> usize {
        match self {
            LineLabel::E(i) => i as usize - 1,
            LineLabel::G(i) => 5 + i as usize,
            LineLabel::F(i, j) => 12 + F_PAIRS.iter().position(|&p| p == (i, j)).expect("valid pair"),
        }
    }

    pub fn from_index(idx: usize) -> Self {
        match idx {
            0..=5 => LineLabel::E(idx as u8 + 1),
            6..=11 => LineLabel::G(idx as u8 - 5),
            12..=26 => {
                let (i, j) = F_PAIRS[idx - 12];
                LineLabel::F(i, j)
            }
            _ => panic!("line index {idx} out of range"),
        }
    }

    pub fn all() -> impl Iterator<Item = LineLabel> {
        (0..27).map(LineLabel::from_index)
    }
}

impl fmt::Display for LineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LineLabel::E(i) => write!(f, "E{i}"),
            LineLabel::G(i) => write!(f, "G{i}"),
            LineLabel::F(i, j) => write!(f, "F{i}{j}"),
        }
    }
}

impl FromStr for LineLabel {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let bad = || ParseError::msg(format!("bad line label {s:?}"));
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let digits: Vec<u8> =
            chars.map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad)).collect::<std::result::Result<_, _>>()?;
        let ok = |d: u8| (1..=6).contains(&d);
        match (kind, digits.as_slice()) {
            ('E', [i]) if ok(*i) => Ok(LineLabel::E(*i)),
            ('G', [i]) if ok(*i) => Ok(LineLabel::G(*i)),
            ('F', [i, j]) if ok(*i) && ok(*j) && i != j => Ok(LineLabel::F(*i.min(j), *i.max(j))),
            _ => Err(bad()),
        }
    }
}

pub fn mask_of(lines: &[usize]) -> LineSet {
    lines.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn lines_of(mut mask: LineSet) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

pub fn format_set(mask: LineSet) -> String {
    lines_of(mask).into_iter().map(|i| LineLabel::from_index(i).to_string()).collect::<Vec<_>>().join(" ")
}

/// The 27 lines with their intersection pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineConfiguration {
    pairing: [[i8; 27]; 27],
}

impl LineConfiguration {
    /// Builds the pairing from the blow-up rules.
    pub fn build() -> Self {
        let mut pairing = [[0i8; 27]; 27];
        for a in 0..27 {
            for b in 0..27 {
                pairing[a][b] = rule(LineLabel::from_index(a), LineLabel::from_index(b));
            }
        }
        LineConfiguration { pairing }
    }

    #[inline]
    pub fn pairing(&self, a: usize, b: usize) -> i64 {
        self.pairing[a][b] as i64
    }

    #[inline]
    pub fn meets(&self, a: usize, b: usize) -> bool {
        self.pairing[a][b] == 1
    }

    pub fn matrix(&self) -> Vec<Vec<i64>> {
        self.pairing.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect()
    }

    /// Mask of lines meeting `a` (excluding `a`).
    pub fn neighbours(&self, a: usize) -> LineSet {
        (0..27).filter(|&b| self.meets(a, b)).fold(0, |m, b| m | (1 << b))
    }

    /// `D1 · D2` for divisors given as integer combinations of lines.
    pub fn pair_divisors(&self, d1: &[i64], d2: &[i64]) -> i64 {
        let mut s = 0;
        for a in 0..27 {
            if d1[a] == 0 {
                continue;
            }
            for b in 0..27 {
                s += d1[a] * self.pairing(a, b) * d2[b];
            }
        }
        s
    }
}

fn rule(a: LineLabel, b: LineLabel) -> i8 {
    use LineLabel::*;
    let delta = |i: u8, j: u8| (i == j) as i8;
    match (a, b) {
        (E(i), E(j)) | (G(i), G(j)) => -delta(i, j),
        (E(i), G(j)) | (G(j), E(i)) => 1 - delta(i, j),
        (E(i), F(j, k)) | (F(j, k), E(i)) | (G(i), F(j, k)) | (F(j, k), G(i)) => (i == j || i == k) as i8,
        (F(i, j), F(k, l)) => match [i == k, i == l, j == k, j == l].iter().filter(|&&x| x).count() {
            0 => 1,
            1 => 0,
            _ => -1,
        },
    }
}

/// A pair of complementary sixers. `sixers[0]` is the lexicographically least
/// sixer (the one containing the smaller line index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DoubleSix {
    pub sixers: [LineSet; 2],
}

impl DoubleSix {
    pub fn new(a: LineSet, b: LineSet) -> Self {
        if a.trailing_zeros() < b.trailing_zeros() {
            DoubleSix { sixers: [a, b] }
        } else {
            DoubleSix { sixers: [b, a] }
        }
    }

    pub fn lines(&self) -> LineSet {
        self.sixers[0] | self.sixers[1]
    }

    /// The 15 lines not in the double-six.
    pub fn complement(&self) -> LineSet {
        ((1 << 27) - 1) & !self.lines()
    }

    pub fn is_fixed_by(&self, g: &crate::perm::Perm) -> bool {
        let img = g.apply_mask(self.sixers[0]);
        img == self.sixers[0] || img == self.sixers[1]
    }

    pub fn is_swapped_by(&self, g: &crate::perm::Perm) -> bool {
        g.apply_mask(self.sixers[0]) == self.sixers[1]
    }
}

impl fmt::Display for DoubleSix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} | {}]", format_set(self.sixers[0]), format_set(self.sixers[1]))
    }
}

/// Three pairwise meeting lines.
pub type TritangentPlane = [u8; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Syzygy {
    Equal,
    Syzygetic,
    Azygetic,
}

/// All tritangent planes, sixers, double-sixes and azygetic triples, in canonical order.
#[derive(Clone, Debug)]
pub struct Structures {
    pub planes: Vec<TritangentPlane>,
    pub sixers: Vec<LineSet>,
    pub double_sixes: Vec<DoubleSix>,
    /// Indices into `double_sixes`, each triple sorted.
    pub azygetic_triples: Vec<[usize; 3]>,
    by_lines: HashMap<LineSet, usize>,
}

impl Structures {
    /// Index of the double-six whose 12 lines are `lines`, if any.
    pub fn double_six_with_lines(&self, lines: LineSet) -> Option<usize> {
        self.by_lines.get(&lines).copied()
    }

    pub fn double_six_index(&self, d: &DoubleSix) -> Option<usize> {
        self.double_six_with_lines(d.lines())
    }
}

pub fn enumerate_structures(cfg: &LineConfiguration) -> Result<Structures> {
    let mut planes = Vec::new();
    for a in 0..27 {
        for b in a + 1..27 {
            if !cfg.meets(a, b) {
                continue;
            }
            for c in b + 1..27 {
                if cfg.meets(a, c) && cfg.meets(b, c) {
                    planes.push([a as u8, b as u8, c as u8]);
                }
            }
        }
    }

    let mut sixers = Vec::new();
    skew_cliques(cfg, 0, 0, 0, &mut sixers);
    sixers.sort_unstable_by_key(|&m| lines_of(m));

    let mut double_sixes = Vec::new();
    for &a in &sixers {
        let partners: Vec<LineSet> = sixers
            .iter()
            .copied()
            .filter(|&b| {
                a & b == 0 && lines_of(a).iter().all(|&x| lines_of(b).iter().filter(|&&y| cfg.meets(x, y)).count() == 5)
            })
            .collect();
        if partners.len() != 1 {
            return Err(Error::Inconsistent(format!("sixer {} has {} complements", format_set(a), partners.len())));
        }
        let d = DoubleSix::new(a, partners[0]);
        if d.sixers[0] == a {
            double_sixes.push(d);
        }
    }
    double_sixes.sort_unstable_by_key(|d| (lines_of(d.sixers[0]), lines_of(d.sixers[1])));
    let by_lines: HashMap<LineSet, usize> = double_sixes.iter().enumerate().map(|(i, d)| (d.lines(), i)).collect();

    let mut triples = Vec::new();
    for i in 0..double_sixes.len() {
        for j in i + 1..double_sixes.len() {
            if syzygy_type(&double_sixes[i], &double_sixes[j])? != Syzygy::Azygetic {
                continue;
            }
            let third = double_sixes[i].lines() ^ double_sixes[j].lines();
            let k = *by_lines
                .get(&third)
                .ok_or_else(|| Error::Inconsistent("azygetic closure is not a double-six".into()))?;
            if k > j {
                triples.push([i, j, k]);
            }
        }
    }
    Ok(Structures { planes, sixers, double_sixes, azygetic_triples: triples, by_lines })
}

fn skew_cliques(cfg: &LineConfiguration, start: usize, mask: LineSet, size: usize, out: &mut Vec<LineSet>) {
    if size == 6 {
        out.push(mask);
        return;
    }
    for c in start..27 {
        if lines_of(mask).iter().all(|&x| cfg.pairing(x, c) == 0) {
            skew_cliques(cfg, c + 1, mask | (1 << c), size + 1, out);
        }
    }
}

pub fn syzygy_type(d1: &DoubleSix, d2: &DoubleSix) -> Result<Syzygy> {
    match (d1.lines() & d2.lines()).count_ones() {
        12 if d1 == d2 => Ok(Syzygy::Equal),
        4 => Ok(Syzygy::Syzygetic),
        6 => Ok(Syzygy::Azygetic),
        n => Err(Error::Inconsistent(format!("double-sixes share {n} lines"))),
    }
}

/// Unordered triples of pairwise azygetic double-sixes (as double-six values).
pub fn azygetic_triples(cfg: &LineConfiguration) -> Result<Vec<[DoubleSix; 3]>> {
    let st = enumerate_structures(cfg)?;
    Ok(st.azygetic_triples.iter().map(|t| t.map(|i| st.double_sixes[i])).collect())
}

/// Matrix of pairings `D_i · D_j` between orbit sums.
pub fn orbit_intersection_matrix(cfg: &LineConfiguration, orbits: &[Vec<usize>]) -> Result<Vec<Vec<i64>>> {
    let mut seen: LineSet = 0;
    for o in orbits {
        for &l in o {
            if l >= 27 || seen & (1 << l) != 0 {
                return Err(Error::InvalidInput("orbits overlap or index out of range".into()));
            }
            seen |= 1 << l;
        }
    }
    Ok(orbits
        .iter()
        .map(|a| {
            orbits
                .iter()
                .map(|b| a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).map(|(x, y)| cfg.pairing(x, y)).sum())
                .collect()
        })
        .collect())
}
