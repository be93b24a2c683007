//! Exact betting over characteristic prefixes.
//!
//! A strategy walks the standard enumeration and may wager, before each
//! string's membership bit is revealed, that the string is in the language
//! (`In`) or out of it (`Out`). Payoffs are fair-odds: a correct bet wins the
//! stake, a wrong one loses it, no bet leaves capital unchanged. Under this
//! rule the induced capital function d satisfies the averaging condition
//! d(p) = (d(p0) + d(p1)) / 2 on every prefix p, which [`verify_averaging`]
//! checks by brute replay. All arithmetic is exact rational; no floating
//! point ever touches capital.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boolfn::{BitString, LanguageModel};
use crate::{Error, Result};

/// Nonnegative exact rational capital. Construction and arithmetic preserve
/// nonnegativity; subtraction is checked.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Capital(BigRational);

impl Capital {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn from_int(v: u64) -> Self {
        Self(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num / den`, which must be nonnegative with `den != 0`.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Self(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn try_from_ratio(r: BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::NegativeCapital(format_ratio(&r)));
        }
        Ok(Self(r))
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    /// Checked subtraction; errors if the result would be negative.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.0 > self.0 {
            return Err(Error::NegativeCapital(format_ratio(&(&self.0 - &other.0))));
        }
        Ok(Self(&self.0 - &other.0))
    }

    pub fn double(&self) -> Self {
        Self(&self.0 + &self.0)
    }

    pub fn halve(&self) -> Self {
        Self(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    /// Exact division into `count` equal parts.
    pub fn split(&self, count: usize) -> Self {
        assert!(count > 0, "split into zero parts");
        Self(&self.0 / BigRational::from_integer(BigInt::from(count)))
    }

    /// Multiplication by 2^k.
    pub fn times_pow2(&self, k: u32) -> Self {
        Self(&self.0 * BigRational::from_integer(BigInt::from(1u8) << k))
    }
}

impl fmt::Display for Capital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_ratio(&self.0))
    }
}

impl fmt::Debug for Capital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Capital({self})")
    }
}

impl FromStr for Capital {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::try_from_ratio(parse_ratio(s)?)
    }
}

impl Serialize for Capital {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Capital {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical `num/den` rendering with the denominator always present.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` (or a bare integer) into an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = |msg: String| Error::Parse { line: 0, msg };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|e| bad(format!("bad numerator in {s:?}: {e}")))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|e| bad(format!("bad denominator in {s:?}: {e}")))?;
    if den.is_zero() {
        return Err(bad(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Side of a wager on the next string's membership bit.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BetSide {
    /// The string is in the language (bit 1).
    In,
    /// The string is out of the language (bit 0).
    Out,
}

impl fmt::Display for BetSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BetSide::In => "IN",
            BetSide::Out => "OUT",
        })
    }
}

/// A wager on the string at global index `target`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Bet {
    pub target: u128,
    pub side: BetSide,
    pub stake: Capital,
}

/// A growable bit sequence: a prefix of some characteristic sequence.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Prefix {
    words: Vec<u64>,
    len: usize,
}

impl Prefix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "prefix bit {i} beyond length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    /// The prefix extended by one bit (used to form p0 and p1).
    pub fn child(&self, bit: bool) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut p = Self::new();
        for b in bits {
            p.push(b);
        }
        p
    }

    /// Uniformly random prefix of the given length.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        Self::from_bits((0..len).map(|_| rng.gen_bool(0.5)))
    }

    /// The first `len` characteristic bits of a language model.
    pub fn of_language(lang: &LanguageModel, len: usize) -> Self {
        Self::from_bits((0..len).map(|i| lang.chi_bit(i as u128)))
    }
}

/// Read-only view of the first `len` bits of a prefix, plus the identity of
/// the next string in the enumeration. Strategies see exactly this.
pub struct PrefixView<'a> {
    prefix: &'a Prefix,
    len: usize,
}

impl<'a> PrefixView<'a> {
    pub fn new(prefix: &'a Prefix, len: usize) -> Self {
        assert!(len <= prefix.len(), "view longer than its prefix");
        Self { prefix, len }
    }

    pub fn full(prefix: &'a Prefix) -> Self {
        Self::new(prefix, prefix.len())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Revealed bit `i` (`i < len`), i.e. membership of the `i`-th string.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "queried unrevealed bit {i} at view length {}", self.len);
        self.prefix.bit(i)
    }

    /// Global index of the next (unrevealed) string.
    pub fn next_index(&self) -> u128 {
        self.len as u128
    }

    /// The next string itself.
    pub fn next_string(&self) -> BitString {
        BitString::string_at(self.len as u128)
    }
}

/// A betting strategy. Implementations must be deterministic functions of
/// the revealed prefix: `reset` followed by the same sequence of views must
/// produce the same bets. `next_bet` is called once per enumeration index,
/// in order, starting from the empty view after a `reset`.
pub trait Strategy {
    /// Capital before any bit is revealed, d(empty prefix).
    fn initial_capital(&self) -> Capital;

    /// The wager on the next string, or `None` to abstain.
    fn next_bet(&mut self, view: &PrefixView<'_>) -> Option<Bet>;

    /// Called once after the last bit of a run is revealed, with the full
    /// prefix, so stateful strategies can settle their final wager in any
    /// bookkeeping they expose. Bets are unaffected; the default is a no-op.
    fn finish(&mut self, _view: &PrefixView<'_>) {}

    /// Returns the strategy to its initial state.
    fn reset(&mut self);
}

/// Applies the fair-odds update rule: no bet leaves `current` unchanged, a
/// correct bet adds the stake, a wrong one subtracts it. Errors if the stake
/// exceeds current capital (which would allow negative capital).
pub fn step(current: &Capital, bet: Option<&Bet>, bit: bool) -> Result<Capital> {
    let Some(bet) = bet else {
        return Ok(current.clone());
    };
    if bet.stake.ratio() > current.ratio() {
        return Err(Error::StakeExceedsCapital {
            stake: bet.stake.to_string(),
            capital: current.to_string(),
        });
    }
    let correct = match bet.side {
        BetSide::In => bit,
        BetSide::Out => !bit,
    };
    if correct {
        Ok(current.add(&bet.stake))
    } else {
        current.sub(&bet.stake)
    }
}

/// One settled enumeration step of a run.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub index: u128,
    pub length: u32,
    pub bit: bool,
    pub bet: Option<(BetSide, Capital)>,
    /// Capital after settling this step's bet.
    pub capital: Capital,
}

/// Capital trajectory of a full run, one step per enumeration index.
#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: Capital,
    pub steps: Vec<TraceStep>,
}

/// Per-length aggregation of a trace segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthSummary {
    pub length: u32,
    pub capital_start: Capital,
    pub capital_end: Capital,
    pub capital_max: Capital,
    /// capital_end - capital_start; may be negative.
    pub gain: BigRational,
    /// capital_end / capital_start.
    pub gain_factor: BigRational,
}

impl Trace {
    pub fn final_capital(&self) -> &Capital {
        self.steps.last().map_or(&self.initial, |s| &s.capital)
    }

    pub fn max_capital(&self) -> &Capital {
        self.steps
            .iter()
            .map(|s| &s.capital)
            .chain(std::iter::once(&self.initial))
            .max()
            .expect("nonempty iterator")
    }

    pub fn min_capital(&self) -> &Capital {
        self.steps
            .iter()
            .map(|s| &s.capital)
            .chain(std::iter::once(&self.initial))
            .min()
            .expect("nonempty iterator")
    }

    /// Capital immediately before the step at global index `i`.
    pub fn capital_before(&self, i: u128) -> &Capital {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i as usize - 1].capital
        }
    }

    /// One summary per fully traced length, in increasing order. The segment
    /// of length n spans global indices [2^n - 1, 2^(n+1) - 2]; its start
    /// capital is the capital before the first of those indices and the
    /// maximum ranges over capitals after each settled bet in the segment.
    pub fn length_summaries(&self) -> Vec<LengthSummary> {
        let mut out = vec![];
        let mut n = 0u32;
        loop {
            let first = (1u128 << n) - 1;
            let last = (1u128 << (n + 1)) - 2;
            if last >= self.steps.len() as u128 {
                break;
            }
            let start = self.capital_before(first).clone();
            let end = self.steps[last as usize].capital.clone();
            let max = self.steps[first as usize..=last as usize]
                .iter()
                .map(|s| &s.capital)
                .chain(std::iter::once(&start))
                .max()
                .expect("nonempty segment")
                .clone();
            let gain = end.ratio() - start.ratio();
            let gain_factor = end.ratio() / start.ratio();
            out.push(LengthSummary {
                length: n,
                capital_start: start,
                capital_end: end,
                capital_max: max,
                gain,
                gain_factor,
            });
            n += 1;
        }
        out
    }

    /// Summary for one length, if fully traced.
    pub fn length_summary(&self, length: u32) -> Option<LengthSummary> {
        self.length_summaries().into_iter().find(|s| s.length == length)
    }

    /// Step rows as CSV: `global_index,length,bit,bet_side,bet_stake,capital`.
    /// Rationals are rendered `num/den`; abstentions show side `-` with a
    /// zero stake.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "global_index,length,bit,bet_side,bet_stake,capital")?;
        for s in &self.steps {
            let (side, stake) = match &s.bet {
                Some((side, stake)) => (side.to_string(), stake.to_string()),
                None => ("-".into(), "0/1".into()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.index,
                s.length,
                if s.bit { 1 } else { 0 },
                side,
                stake,
                s.capital
            )?;
        }
        Ok(())
    }

    /// Per-length summary rows as CSV:
    /// `length,capital_start,capital_end,capital_max,gain_factor`.
    pub fn write_summary_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "length,capital_start,capital_end,capital_max,gain_factor")?;
        for s in self.length_summaries() {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.length,
                s.capital_start,
                s.capital_end,
                s.capital_max,
                format_ratio(&s.gain_factor)
            )?;
        }
        Ok(())
    }
}

/// Runs a strategy against a language over all strings of length at most
/// `max_length` (global indices 0 ..= 2^(max_length+1) - 2).
pub fn run(strategy: &mut dyn Strategy, lang: &LanguageModel, max_length: u32) -> Result<Trace> {
    assert!(max_length <= 24, "run length cap exceeded");
    strategy.reset();
    let total = (1u128 << (max_length + 1)) - 1;
    let mut prefix = Prefix::new();
    let mut capital = strategy.initial_capital();
    let mut steps = Vec::with_capacity(total as usize);
    for i in 0..total {
        let view = PrefixView::full(&prefix);
        let bet = strategy.next_bet(&view);
        if let Some(b) = &bet {
            assert_eq!(b.target, i, "strategy bet on a string other than the next one");
        }
        let bit = lang.chi_bit(i);
        capital = step(&capital, bet.as_ref(), bit)?;
        steps.push(TraceStep {
            index: i,
            length: BitString::string_at(i).len(),
            bit,
            bet: bet.map(|b| (b.side, b.stake)),
            capital: capital.clone(),
        });
        prefix.push(bit);
    }
    strategy.finish(&PrefixView::full(&prefix));
    Ok(Trace {
        initial: strategy.initial_capital(),
        steps,
    })
}

/// The capital function induced by a strategy: full fair-odds replay of the
/// strategy over a given prefix. Evaluating at p, p0, p1 independently is
/// what gives [`verify_averaging`] its teeth: it re-derives every bet from
/// scratch, so any hidden state or non-prefix determinism shows up as an
/// averaging violation.
pub fn strategy_capital(strategy: &mut dyn Strategy, prefix: &Prefix) -> Result<Capital> {
    strategy.reset();
    let mut capital = strategy.initial_capital();
    for i in 0..prefix.len() {
        let view = PrefixView::new(prefix, i);
        let bet = strategy.next_bet(&view);
        if let Some(b) = &bet {
            assert_eq!(b.target, i as u128, "strategy bet out of order during replay");
        }
        capital = step(&capital, bet.as_ref(), prefix.bit(i))?;
    }
    Ok(capital)
}

/// A violation of the averaging condition at one sampled prefix.
#[derive(Clone, Debug)]
pub struct AveragingViolation {
    pub prefix_index: usize,
    pub d_parent: Capital,
    pub d_zero: Capital,
    pub d_one: Capital,
}

/// Checks d(p) = (d(p0) + d(p1)) / 2 exactly on every sampled prefix, where
/// `d` is an arbitrary capital function. Returns the first violation.
pub fn verify_averaging_fn(
    mut d: impl FnMut(&Prefix) -> Result<Capital>,
    prefixes: &[Prefix],
) -> Result<Option<AveragingViolation>> {
    for (i, p) in prefixes.iter().enumerate() {
        let parent = d(p)?;
        let zero = d(&p.child(false))?;
        let one = d(&p.child(true))?;
        if zero.add(&one).halve() != parent {
            return Ok(Some(AveragingViolation {
                prefix_index: i,
                d_parent: parent,
                d_zero: zero,
                d_one: one,
            }));
        }
    }
    Ok(None)
}

/// [`verify_averaging_fn`] specialized to a strategy's induced capital.
pub fn verify_averaging(
    strategy: &mut dyn Strategy,
    prefixes: &[Prefix],
) -> Result<Option<AveragingViolation>> {
    verify_averaging_fn(|p| strategy_capital(strategy, p), prefixes)
}

/// Samples random prefixes whose lengths end inside the length-n segment for
/// n drawn uniformly from `min_seg ..= max_seg`. Deterministic in the seed.
pub fn sample_prefixes(count: usize, min_seg: u32, max_seg: u32, seed: u64) -> Vec<Prefix> {
    use rand::SeedableRng;
    assert!(min_seg <= max_seg && max_seg <= 24);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(min_seg..=max_seg);
            let offset = rng.gen_range(0..1u128 << n) as usize;
            let len = ((1u128 << n) - 1) as usize + offset;
            Prefix::random(len, &mut rng)
        })
        .collect()
}

/// A strategy that never bets; its capital is constant. Useful as a baseline
/// and in framework tests.
#[derive(Clone, Debug, Default)]
pub struct NeverBet;

impl Strategy for NeverBet {
    fn initial_capital(&self) -> Capital {
        Capital::from_int(1)
    }

    fn next_bet(&mut self, _view: &PrefixView<'_>) -> Option<Bet> {
        None
    }

    fn reset(&mut self) {}
}

/// A strategy that always wagers its entire capital on `Out`. It doubles on
/// every non-member and goes broke at the first member; used to exercise the
/// all-in edge of the update rule.
#[derive(Clone, Debug)]
pub struct AllInOut {
    capital: Capital,
}

impl Default for AllInOut {
    fn default() -> Self {
        Self {
            capital: Capital::from_int(1),
        }
    }
}

impl Strategy for AllInOut {
    fn initial_capital(&self) -> Capital {
        Capital::from_int(1)
    }

    fn next_bet(&mut self, view: &PrefixView<'_>) -> Option<Bet> {
        // Recompute holdings from the prefix alone: double per revealed 0,
        // zero after any revealed 1.
        let mut c = self.initial_capital();
        for i in 0..view.len() {
            if view.bit(i) {
                c = Capital::zero();
                break;
            }
            c = c.double();
        }
        self.capital = c.clone();
        if c.is_zero() {
            None
        } else {
            Some(Bet {
                target: view.next_index(),
                side: BetSide::Out,
                stake: c,
            })
        }
    }

    fn reset(&mut self) {
        self.capital = Capital::from_int(1);
    }
}
