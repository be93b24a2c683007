//! Bit strings, the standard length-then-lex enumeration, truth tables,
//! terms, subcubes, DNF formulas, and per-length language models.
//!
//! Conventions used throughout the crate:
//!
//! * Bit positions are 1-based and count from the left, so position 1 is the
//!   most significant bit of a string's numeric value. Lexicographic order
//!   among equal-length strings therefore coincides with numeric order.
//! * The standard enumeration lists the empty string first, then all strings
//!   by length and, within a length, in lexicographic (= numeric) order:
//!   s_0 = "" , s_1 = "0", s_2 = "1", s_3 = "00", ... A length-n string of
//!   numeric value v has global index 2^n - 1 + v.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::{low_mask, Error, Result};

/// Longest bit string representable by the mask-based types.
pub const MAX_BITSTRING_LEN: u32 = 64;
/// Largest arity for which truth tables are materialized (2^24 bits = 2 MiB).
pub const MAX_TABLE_ARITY: u32 = 24;

/// A fixed-length binary string (possibly empty).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    len: u32,
    value: u64,
}

impl BitString {
    /// Builds the length-`len` string with numeric value `value`.
    pub fn new(len: u32, value: u64) -> Result<Self> {
        if len > MAX_BITSTRING_LEN {
            return Err(Error::LengthTooLarge(len));
        }
        if value & !low_mask(len) != 0 {
            return Err(Error::Parse {
                line: 0,
                msg: format!("value {value} does not fit in {len} bits"),
            });
        }
        Ok(Self { len, value })
    }

    /// The empty string, index 0 in the standard enumeration.
    pub fn empty() -> Self {
        Self { len: 0, value: 0 }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Bit at 1-based position `pos` (position 1 is the most significant).
    pub fn bit(&self, pos: u32) -> bool {
        assert!(pos >= 1 && pos <= self.len, "position {pos} out of range");
        (self.value >> (self.len - pos)) & 1 == 1
    }

    /// Index of this string in the standard enumeration.
    pub fn global_index(&self) -> u128 {
        (1u128 << self.len) - 1 + self.value as u128
    }

    /// Inverse of [`global_index`](Self::global_index): the `i`-th string of
    /// the standard enumeration. Panics if the string would exceed
    /// [`MAX_BITSTRING_LEN`] bits.
    pub fn string_at(i: u128) -> Self {
        let len = 127 - (i + 1).leading_zeros();
        assert!(
            len <= MAX_BITSTRING_LEN,
            "enumeration index {i} exceeds representable lengths"
        );
        let value = (i + 1 - (1u128 << len)) as u64;
        Self { len, value }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for pos in 1..=self.len {
            write!(f, "{}", if self.bit(pos) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let len = s.len() as u32;
        if len > MAX_BITSTRING_LEN {
            return Err(Error::LengthTooLarge(len));
        }
        let mut value = 0u64;
        for c in s.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::Parse {
                            line: 0,
                            msg: format!("invalid bit character {other:?}"),
                        })
                    }
                };
        }
        Ok(Self { len, value })
    }
}

/// A Boolean function of fixed arity, stored as a packed table of 2^arity
/// bits indexed by numeric value.
#[derive(Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: u32,
    words: Vec<u64>,
}

impl TruthTable {
    pub fn new_const(arity: u32, value: bool) -> Result<Self> {
        if arity > MAX_TABLE_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        let size = 1u64 << arity;
        let nwords = size.div_ceil(64).max(1) as usize;
        let mut words = vec![if value { u64::MAX } else { 0 }; nwords];
        if value {
            // Keep bits beyond 2^arity clear so word-level equality is exact.
            let tail = size % 64;
            if tail != 0 {
                *words.last_mut().unwrap() = low_mask(tail as u32);
            }
        }
        Ok(Self { arity, words })
    }

    pub fn new_false(arity: u32) -> Result<Self> {
        Self::new_const(arity, false)
    }

    /// Materializes `f` over all 2^arity points.
    pub fn from_fn(arity: u32, mut f: impl FnMut(u64) -> bool) -> Result<Self> {
        let mut table = Self::new_false(arity)?;
        for v in 0..1u64 << arity {
            if f(v) {
                table.set(v, true);
            }
        }
        Ok(table)
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    /// Number of points, 2^arity.
    pub fn size(&self) -> u64 {
        1u64 << self.arity
    }

    pub fn get(&self, value: u64) -> bool {
        assert!(value < self.size(), "point {value} out of range");
        (self.words[(value / 64) as usize] >> (value % 64)) & 1 == 1
    }

    pub fn set(&mut self, value: u64, bit: bool) {
        assert!(value < self.size(), "point {value} out of range");
        let w = &mut self.words[(value / 64) as usize];
        if bit {
            *w |= 1 << (value % 64);
        } else {
            *w &= !(1 << (value % 64));
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `Some(b)` if the function is constantly `b`.
    pub fn as_constant(&self) -> Option<bool> {
        match self.count_ones() {
            0 => Some(false),
            c if c == self.size() => Some(true),
            _ => None,
        }
    }

    /// True points in increasing numeric order.
    pub fn true_points(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.size()).filter(move |&v| self.get(v))
    }

    /// Whether every point of the subcube `{ (base & !free) | s : s subset of free }`
    /// is a true point.
    pub fn all_true_on(&self, base: u64, free: u64) -> bool {
        self.fold_subcube(base, free, true)
    }

    /// Whether every point of the subcube is a false point.
    pub fn all_false_on(&self, base: u64, free: u64) -> bool {
        self.fold_subcube(base, free, false)
    }

    fn fold_subcube(&self, base: u64, free: u64, expect: bool) -> bool {
        let free = free & low_mask(self.arity);
        let base = base & !free & low_mask(self.arity);
        // Ascending submask enumeration: s -> (s - free) & free visits all
        // subsets of `free` in increasing numeric order, starting from 0.
        let mut s = 0u64;
        loop {
            if self.get(base | s) != expect {
                return false;
            }
            if s == free {
                return true;
            }
            s = s.wrapping_sub(free) & free;
        }
    }

    /// Sets every point of the subcube to true.
    pub fn set_subcube(&mut self, base: u64, free: u64) {
        let free = free & low_mask(self.arity);
        let base = base & !free & low_mask(self.arity);
        let mut s = 0u64;
        loop {
            self.set(base | s, true);
            if s == free {
                return;
            }
            s = s.wrapping_sub(free) & free;
        }
    }

    /// The (arity-1)-ary function obtained by fixing 1-based position `pos`
    /// to `bit`. Remaining positions keep their relative order.
    pub fn restrict(&self, pos: u32, bit: bool) -> TruthTable {
        assert!(pos >= 1 && pos <= self.arity, "position {pos} out of range");
        assert!(self.arity >= 1);
        let n = self.arity;
        let b = n - pos; // bit index of `pos` in the value encoding
        let mut out = TruthTable::new_false(n - 1).expect("arity shrinks");
        for v in 0..out.size() {
            let high = (v >> b) << (b + 1);
            let low = v & low_mask(b);
            let full = high | ((bit as u64) << b) | low;
            if self.get(full) {
                out.set(v, true);
            }
        }
        out
    }

    /// Serializes as the two-line text block `n=<arity>` / `<2^n bits>`.
    pub fn to_text(&self) -> String {
        let mut bits = String::with_capacity(self.size() as usize);
        for v in 0..self.size() {
            bits.push(if self.get(v) { '1' } else { '0' });
        }
        format!("n={}\n{}\n", self.arity, bits)
    }

    /// Parses the two-line block produced by [`to_text`](Self::to_text).
    /// `line_base` offsets error line numbers when the block is embedded in
    /// a larger file.
    pub fn from_text_block(header: &str, bits: &str, line_base: usize) -> Result<Self> {
        let arity: u32 = header
            .strip_prefix("n=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: line_base,
                msg: format!("expected 'n=<arity>', got {header:?}"),
            })?;
        if arity > MAX_TABLE_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        let bits = bits.trim_end();
        let expected = 1usize << arity;
        if bits.len() != expected {
            return Err(Error::Parse {
                line: line_base + 1,
                msg: format!("expected {expected} bits, got {}", bits.len()),
            });
        }
        let mut table = Self::new_false(arity)?;
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => table.set(i as u64, true),
                other => {
                    return Err(Error::Parse {
                        line: line_base + 1,
                        msg: format!("invalid bit character {other:?}"),
                    })
                }
            }
        }
        Ok(table)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let bits = lines.next().unwrap_or("");
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse {
                line: 3,
                msg: "trailing content after truth table".into(),
            });
        }
        Self::from_text_block(header, bits, 1)
    }
}

impl fmt::Debug for TruthTable {
    // Readable for low arities without dumping raw words.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arity <= 6 {
            let bits: String = (0..self.size())
                .map(|v| if self.get(v) { '1' } else { '0' })
                .collect();
            write!(f, "TruthTable(n={}, {})", self.arity, bits)
        } else {
            write!(
                f,
                "TruthTable(n={}, {} true points)",
                self.arity,
                self.count_ones()
            )
        }
    }
}

/// A conjunction of literals over `arity` variables: `mask` marks the fixed
/// positions, `values` their required bits (zero on free positions).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    arity: u32,
    mask: u64,
    values: u64,
}

impl Term {
    pub fn new(arity: u32, mask: u64, values: u64) -> Self {
        assert!(arity <= MAX_BITSTRING_LEN);
        assert_eq!(mask & !low_mask(arity), 0, "mask exceeds arity");
        assert_eq!(values & !mask, 0, "values set outside the fixed mask");
        Self { arity, mask, values }
    }

    /// The empty term (no fixed positions), which covers every point.
    pub fn empty(arity: u32) -> Self {
        Self::new(arity, 0, 0)
    }

    /// The full-assignment term covering exactly `x`.
    pub fn minterm(x: &BitString) -> Self {
        Self::new(x.len(), low_mask(x.len()), x.value())
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn values(&self) -> u64 {
        self.values
    }

    /// Number of fixed positions.
    pub fn width(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn free_mask(&self) -> u64 {
        !self.mask & low_mask(self.arity)
    }

    /// Whether the term's literals are all satisfied at numeric point `v`.
    pub fn covers_value(&self, v: u64) -> bool {
        (v ^ self.values) & self.mask == 0
    }

    /// Whether the term covers `x`. The string length must equal the arity.
    pub fn covers(&self, x: &BitString) -> bool {
        assert_eq!(x.len(), self.arity, "term/string arity mismatch");
        self.covers_value(x.value())
    }

    /// Whether every point covered by the term is a true point of `f`.
    pub fn is_implicant(&self, f: &TruthTable) -> bool {
        assert_eq!(f.arity(), self.arity, "term/table arity mismatch");
        f.all_true_on(self.values, self.free_mask())
    }

    /// The set of points covered by the term, as a subcube.
    pub fn subcube(&self) -> Subcube {
        Subcube {
            arity: self.arity,
            mask: self.mask,
            values: self.values,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mask == 0 {
            return write!(f, "1");
        }
        for pos in 1..=self.arity {
            let bit = 1u64 << (self.arity - pos);
            if self.mask & bit != 0 {
                if self.values & bit == 0 {
                    write!(f, "~")?;
                }
                write!(f, "x{pos}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

/// An axis-aligned subcube of {0,1}^arity, encoded like a [`Term`]: `mask`
/// marks the fixed positions, `values` their bits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subcube {
    arity: u32,
    mask: u64,
    values: u64,
}

impl Subcube {
    pub fn new(arity: u32, mask: u64, values: u64) -> Self {
        let t = Term::new(arity, mask, values);
        t.subcube()
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn values(&self) -> u64 {
        self.values
    }

    pub fn free_mask(&self) -> u64 {
        !self.mask & low_mask(self.arity)
    }

    /// Number of free positions.
    pub fn dimension(&self) -> u32 {
        self.arity - self.mask.count_ones()
    }

    /// Number of points, 2^dimension.
    pub fn cardinality(&self) -> u128 {
        1u128 << self.dimension()
    }

    pub fn contains_value(&self, v: u64) -> bool {
        (v ^ self.values) & self.mask == 0
    }

    pub fn contains(&self, x: &BitString) -> bool {
        assert_eq!(x.len(), self.arity, "subcube/string arity mismatch");
        self.contains_value(x.value())
    }

    /// Points of the subcube in increasing numeric order. Intended for small
    /// dimensions; the iterator is exact up to dimension 63.
    pub fn points(&self) -> impl Iterator<Item = u64> {
        let free = self.free_mask();
        let base = self.values;
        let mut s = Some(0u64);
        std::iter::from_fn(move || {
            let cur = s?;
            s = if cur == free {
                None
            } else {
                Some(cur.wrapping_sub(free) & free)
            };
            Some(base | cur)
        })
    }

    pub fn term(&self) -> Term {
        Term::new(self.arity, self.mask, self.values)
    }
}

impl fmt::Debug for Subcube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subcube(n={}, fixed {}, dim {})",
            self.arity,
            self.term(),
            self.dimension()
        )
    }
}

/// A DNF formula: a disjunction of terms over a common arity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dnf {
    arity: u32,
    terms: Vec<Term>,
}

impl Dnf {
    pub fn new(arity: u32, terms: Vec<Term>) -> Self {
        assert!(
            terms.iter().all(|t| t.arity() == arity),
            "mixed-arity terms in DNF"
        );
        Self { arity, terms }
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Maximum term width; 0 for the empty formula.
    pub fn width(&self) -> u32 {
        self.terms.iter().map(Term::width).max().unwrap_or(0)
    }

    pub fn eval_value(&self, v: u64) -> bool {
        self.terms.iter().any(|t| t.covers_value(v))
    }

    pub fn eval(&self, x: &BitString) -> bool {
        assert_eq!(x.len(), self.arity, "formula/string arity mismatch");
        self.eval_value(x.value())
    }

    pub fn to_table(&self) -> Result<TruthTable> {
        TruthTable::from_fn(self.arity, |v| self.eval_value(v))
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A language restricted to finitely many materialized lengths. Membership
/// at a length with no stored slice is false; this makes the model a total
/// function on all strings.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LanguageModel {
    slices: BTreeMap<u32, TruthTable>,
    provenance: String,
}

impl LanguageModel {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            slices: BTreeMap::new(),
            provenance: provenance.into(),
        }
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Installs the slice for length `table.arity()`, replacing any previous one.
    pub fn insert_slice(&mut self, table: TruthTable) {
        self.slices.insert(table.arity(), table);
    }

    pub fn slice(&self, length: u32) -> Option<&TruthTable> {
        self.slices.get(&length)
    }

    pub fn lengths(&self) -> impl Iterator<Item = u32> + '_ {
        self.slices.keys().copied()
    }

    pub fn max_length(&self) -> Option<u32> {
        self.slices.keys().next_back().copied()
    }

    /// Membership of the length-`length` string with numeric value `value`.
    pub fn member_value(&self, length: u32, value: u64) -> bool {
        self.slices.get(&length).is_some_and(|t| t.get(value))
    }

    pub fn member(&self, x: &BitString) -> bool {
        self.member_value(x.len(), x.value())
    }

    /// Bit `i` of the characteristic sequence under the standard enumeration.
    pub fn chi_bit(&self, i: u128) -> bool {
        self.member(&BitString::string_at(i))
    }

    /// Serializes as truth-table blocks separated by blank lines, lengths
    /// strictly increasing.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.slices.values().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&table.to_text());
        }
        out
    }

    pub fn from_text(text: &str, provenance: impl Into<String>) -> Result<Self> {
        let mut model = Self::new(provenance);
        let mut last_len: Option<u32> = None;
        let mut lines = text.lines().enumerate().peekable();
        while let Some((idx, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let (_, bits) = lines.next().ok_or_else(|| Error::Parse {
                line: idx + 2,
                msg: "missing bits line after header".into(),
            })?;
            let table = TruthTable::from_text_block(line, bits, idx + 1)?;
            if let Some(prev) = last_len {
                if table.arity() <= prev {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!(
                            "slice lengths must be strictly increasing ({} after {prev})",
                            table.arity()
                        ),
                    });
                }
            }
            last_len = Some(table.arity());
            model.insert_slice(table);
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference enumeration: generate strings by length then value and pair
    /// them with their position. Independent of the closed-form index.
    fn enumerate_reference(max_len: u32) -> Vec<BitString> {
        let mut out = vec![];
        for n in 0..=max_len {
            for v in 0..1u64 << n {
                out.push(BitString::new(n, v).unwrap());
            }
        }
        out
    }

    #[test]
    fn enumeration_starts_as_expected() {
        let names: Vec<String> = enumerate_reference(2)
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(names, ["", "0", "1", "00", "01", "10", "11"]);
    }

    #[test]
    fn global_index_matches_reference_enumeration() {
        for (i, s) in enumerate_reference(10).iter().enumerate() {
            assert_eq!(s.global_index(), i as u128, "index of {s}");
            assert_eq!(BitString::string_at(i as u128), *s);
        }
    }

    #[test]
    fn global_index_examples() {
        assert_eq!(BitString::empty().global_index(), 0);
        assert_eq!("00".parse::<BitString>().unwrap().global_index(), 3);
        assert_eq!("1111".parse::<BitString>().unwrap().global_index(), 30);
        // Length-n strings occupy [2^n - 1, 2^(n+1) - 2].
        for n in [4u32, 8, 12] {
            assert_eq!(BitString::new(n, 0).unwrap().global_index(), (1 << n) - 1);
            assert_eq!(
                BitString::new(n, low_mask(n)).unwrap().global_index(),
                (1 << (n + 1)) - 2
            );
        }
    }

    #[test]
    fn bit_positions_are_msb_first() {
        let s = "1010".parse::<BitString>().unwrap();
        assert_eq!(s.value(), 0b1010);
        assert!(s.bit(1));
        assert!(!s.bit(2));
        assert!(s.bit(3));
        assert!(!s.bit(4));
        // Lexicographic order equals numeric order at a fixed length.
        let mut strings: Vec<BitString> = (0..16)
            .map(|v| BitString::new(4, v).unwrap())
            .collect();
        strings.sort_by_key(|s| s.to_string());
        assert!(strings.windows(2).all(|w| w[0].value() < w[1].value()));
    }

    /// Independent cover check: decode the term into per-position requirements.
    fn covers_reference(t: &Term, x: &BitString) -> bool {
        (1..=t.arity()).all(|pos| {
            let bit = 1u64 << (t.arity() - pos);
            t.mask() & bit == 0 || x.bit(pos) == (t.values() & bit != 0)
        })
    }

    #[test]
    fn term_covers_example() {
        // x1 x3 ~x4 over arity 4: fixes positions 1, 3, 4 to 1, 1, 0.
        let t = Term::new(4, 0b1011, 0b1010);
        assert_eq!(t.to_string(), "x1x3~x4");
        assert_eq!(t.width(), 3);
        assert!(t.covers(&"1010".parse().unwrap()));
        assert!(t.covers(&"1110".parse().unwrap()));
        assert!(!t.covers(&"1011".parse().unwrap()));
        assert!(!t.covers(&"0010".parse().unwrap()));
        let cube = t.subcube();
        assert_eq!(cube.dimension(), 1);
        assert_eq!(cube.cardinality(), 2);
        let pts: Vec<u64> = cube.points().collect();
        assert_eq!(pts, vec![0b1010, 0b1110]);
    }

    #[test]
    fn term_covers_matches_reference_on_all_points() {
        // Exhaustive at arity 4 over a spread of terms.
        for mask in 0..16u64 {
            for values in 0..16u64 {
                if values & !mask != 0 {
                    continue;
                }
                let t = Term::new(4, mask, values);
                for v in 0..16u64 {
                    let x = BitString::new(4, v).unwrap();
                    assert_eq!(t.covers(&x), covers_reference(&t, &x));
                }
                // Cardinality invariant: 2^(arity - width) covered points.
                let covered = (0..16u64).filter(|&v| t.covers_value(v)).count();
                assert_eq!(covered as u64, 1 << (4 - t.width()));
            }
        }
    }

    #[test]
    fn empty_term_and_minterm() {
        let e = Term::empty(3);
        assert_eq!(e.width(), 0);
        assert!((0..8).all(|v| e.covers_value(v)));
        let x = "101".parse::<BitString>().unwrap();
        let m = Term::minterm(&x);
        assert_eq!(m.width(), 3);
        assert_eq!((0..8).filter(|&v| m.covers_value(v)).count(), 1);
        // Arity-0 degenerate case: the empty term covers the empty string.
        let t0 = Term::empty(0);
        assert!(t0.covers(&BitString::empty()));
    }

    #[test]
    fn subcube_points_are_sorted_and_complete() {
        let cube = Subcube::new(5, 0b10100, 0b10000);
        let pts: Vec<u64> = cube.points().collect();
        assert_eq!(pts.len() as u128, cube.cardinality());
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        for v in 0..32u64 {
            assert_eq!(cube.contains_value(v), pts.contains(&v));
        }
    }

    #[test]
    fn truth_table_basics() {
        let mut t = TruthTable::new_false(3).unwrap();
        assert_eq!(t.as_constant(), Some(false));
        t.set(5, true);
        assert!(t.get(5));
        assert_eq!(t.count_ones(), 1);
        assert_eq!(t.as_constant(), None);
        let ones = TruthTable::new_const(3, true).unwrap();
        assert_eq!(ones.as_constant(), Some(true));
        assert_eq!(ones.count_ones(), 8);
        // Word-tail hygiene at arities below 6 and at the 64-bit boundary.
        for n in [0u32, 1, 2, 5, 6, 7] {
            let ones = TruthTable::new_const(n, true).unwrap();
            assert_eq!(ones.count_ones(), 1 << n);
            let via_fn = TruthTable::from_fn(n, |_| true).unwrap();
            assert_eq!(ones, via_fn);
        }
    }

    #[test]
    fn subcube_queries_match_pointwise_loops() {
        // f = OR at arity 2: true points {01, 10, 11}.
        let f = TruthTable::from_fn(2, |v| v != 0).unwrap();
        assert!(f.all_true_on(0b01, 0b10)); // {01, 11}
        assert!(!f.all_true_on(0b00, 0b10)); // {00, 10}
        assert!(!f.all_false_on(0b00, 0b10));
        assert!(f.all_false_on(0b00, 0b00)); // {00}
        let mut cover = TruthTable::new_false(2).unwrap();
        cover.set_subcube(0b01, 0b10);
        assert_eq!(
            cover.true_points().collect::<Vec<_>>(),
            vec![0b01, 0b11]
        );
    }

    #[test]
    fn restriction_fixes_one_position() {
        // f(x) = x2 at arity 3 (position 2 is value bit 1).
        let f = TruthTable::from_fn(3, |v| v & 0b010 != 0).unwrap();
        assert_eq!(f.restrict(2, true).as_constant(), Some(true));
        assert_eq!(f.restrict(2, false).as_constant(), Some(false));
        // Restricting an irrelevant position keeps the dependence on x2,
        // which becomes position 1 of the restricted function.
        let g = f.restrict(1, false);
        let expect = TruthTable::from_fn(2, |v| v & 0b10 != 0).unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn is_implicant_matches_definition() {
        let f = TruthTable::from_fn(3, |v| v & 0b010 != 0).unwrap(); // x2
        assert!(Term::new(3, 0b010, 0b010).is_implicant(&f));
        assert!(!Term::new(3, 0b100, 0b100).is_implicant(&f));
        assert!(Term::new(3, 0b011, 0b011).is_implicant(&f));
        assert!(!Term::empty(3).is_implicant(&f));
        // Brute-force definition on all arity-3 terms against a fixed f.
        let f = TruthTable::from_fn(3, |v| (v.count_ones() & 1) == 1).unwrap(); // parity
        for mask in 0..8u64 {
            for values in 0..8u64 {
                if values & !mask != 0 {
                    continue;
                }
                let t = Term::new(3, mask, values);
                let brute = (0..8u64).all(|v| !t.covers_value(v) || f.get(v));
                assert_eq!(t.is_implicant(&f), brute);
            }
        }
    }

    #[test]
    fn dnf_eval_example() {
        // D = x1 + ~x2 at arity 2.
        let d = Dnf::new(
            2,
            vec![Term::new(2, 0b10, 0b10), Term::new(2, 0b01, 0b00)],
        );
        assert!(!d.eval(&"01".parse().unwrap()));
        assert!(d.eval(&"00".parse().unwrap()));
        assert!(d.eval(&"10".parse().unwrap()));
        assert!(d.eval(&"11".parse().unwrap()));
        assert_eq!(d.width(), 1);
        assert_eq!(d.to_string(), "x1 + ~x2");
        let table = d.to_table().unwrap();
        for v in 0..4u64 {
            assert_eq!(table.get(v), d.eval_value(v));
        }
        let empty = Dnf::new(2, vec![]);
        assert_eq!(empty.width(), 0);
        assert_eq!(empty.to_table().unwrap().as_constant(), Some(false));
    }

    #[test]
    fn truth_table_text_roundtrip() {
        let f = TruthTable::from_fn(2, |v| v != 0).unwrap();
        let text = f.to_text();
        assert_eq!(text, "n=2\n0111\n");
        assert_eq!(TruthTable::from_text(&text).unwrap(), f);
        // Bits are in numeric-value order: index 0 first.
        let g = TruthTable::from_text("n=1\n10").unwrap();
        assert!(g.get(0));
        assert!(!g.get(1));
    }

    #[test]
    fn truth_table_text_rejects_malformed_input() {
        assert!(TruthTable::from_text("m=2\n0111\n").is_err());
        assert!(TruthTable::from_text("n=2\n011\n").is_err());
        assert!(TruthTable::from_text("n=2\n01x1\n").is_err());
        assert!(TruthTable::from_text("n=25\n0\n").is_err());
    }

    #[test]
    fn language_model_membership_and_chi() {
        let mut lang = LanguageModel::new("test");
        lang.insert_slice(TruthTable::from_fn(2, |v| v == 0b01).unwrap());
        assert!(lang.member(&"01".parse().unwrap()));
        assert!(!lang.member(&"10".parse().unwrap()));
        // Absent lengths are empty.
        assert!(!lang.member(&"0".parse().unwrap()));
        assert!(!lang.member(&BitString::empty()));
        // chi bit 4 is the string "01" (index 2^2 - 1 + 1).
        assert!(lang.chi_bit(4));
        let bits: Vec<bool> = (0..7).map(|i| lang.chi_bit(i)).collect();
        assert_eq!(bits, [false, false, false, false, true, false, false]);
    }

    #[test]
    fn language_text_roundtrip_and_ordering() {
        let mut lang = LanguageModel::new("roundtrip");
        lang.insert_slice(TruthTable::from_fn(1, |v| v == 1).unwrap());
        lang.insert_slice(TruthTable::from_fn(3, |v| v % 3 == 0).unwrap());
        let text = lang.to_text();
        let back = LanguageModel::from_text(&text, "roundtrip").unwrap();
        assert_eq!(back, lang);
        // Non-increasing lengths are rejected.
        let bad = "n=2\n0110\n\nn=2\n1001\n";
        assert!(LanguageModel::from_text(bad, "bad").is_err());
        let bad2 = "n=3\n01100110\n\nn=1\n10\n";
        assert!(LanguageModel::from_text(bad2, "bad").is_err());
    }
}
