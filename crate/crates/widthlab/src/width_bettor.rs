//! A betting strategy that exploits small-width structure in language slices.
//!
//! For each string length n the strategy earmarks two equal pools of stake
//! money. The scout pool is wagered all-in OUT on each of the first n
//! strings of length n, doubling on every non-member; it is lost the moment
//! a member appears, but that member w is exactly what the second pool has
//! been waiting for. The positions 1..n are cut into blocks, and within
//! each block every way of freeing `free` of w's positions spans a small
//! subcube around w. The second pool is split equally over these boundary
//! subcubes, and each subcube wagers its share all-in IN on every later
//! string that falls inside it, after checking against revealed bits that
//! every earlier string inside the subcube was a member. A subcube lying
//! wholly inside the language doubles its pot once per point above w; any
//! inconsistency retires the subcube, either before it stakes anything
//! (a revealed hole below the next target) or by losing its pot outright.
//!
//! If no member shows up among the first n strings, the scout pool keeps
//! its winnings and the second pool is never deployed. Everything is
//! deterministic: the bets depend only on the revealed prefix and the
//! parameters.

use std::collections::BTreeSet;
use std::fmt;

use crate::boolfn::{BitString, Subcube};
use crate::martingale::{Bet, BetSide, Capital, PrefixView, Strategy};
use crate::{low_mask, masks_of_weight, Error, Result};

/// How block size and freed-position count scale with string length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WidthSchedule {
    /// Blocks of size floor(lg n); free count min(block, floor(2 lg lg n)).
    LogLog,
    /// Constant block size and free count, independent of length.
    Fixed { block: u32, free: u32 },
}

/// How much stake money each length receives per pool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StakeRule {
    /// 1/n^2 at length n; two pools per length then total less than 4.
    InverseSquare,
    /// The same amount at every active length. The total across lengths
    /// grows without bound, so runs must be budget-checked up front.
    Constant(Capital),
}

/// Full parameterization of the strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettorParams {
    pub schedule: WidthSchedule,
    pub stake: StakeRule,
    pub initial: Capital,
}

impl BettorParams {
    /// Growing schedule: block floor(lg n), free min(block, floor(2 lg lg n)),
    /// stakes 1/n^2, initial capital 4.
    pub fn loglog() -> Self {
        Self {
            schedule: WidthSchedule::LogLog,
            stake: StakeRule::InverseSquare,
            initial: Capital::from_int(4),
        }
    }

    /// Small fixed schedule for hand-checkable runs: blocks of 4, free 2,
    /// stakes 1/n^2, initial capital 4.
    pub fn desk() -> Self {
        Self {
            schedule: WidthSchedule::Fixed { block: 4, free: 2 },
            stake: StakeRule::InverseSquare,
            initial: Capital::from_int(4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let WidthSchedule::Fixed { block, free } = self.schedule {
            if free < 1 || block < free || block > 63 {
                return Err(Error::InvalidConfig(format!(
                    "fixed schedule needs 1 <= free <= block <= 63, got block {block} free {free}"
                )));
            }
        }
        if let StakeRule::Constant(c) = &self.stake {
            if c.is_zero() {
                return Err(Error::InvalidConfig("constant stake must be positive".into()));
            }
        }
        if self.initial.is_zero() {
            return Err(Error::InvalidConfig("initial capital must be positive".into()));
        }
        Ok(())
    }

    /// Block size at length n; 0 means no valid blocking.
    pub fn block_size(&self, n: u32) -> u32 {
        match self.schedule {
            WidthSchedule::LogLog => {
                if n <= 1 {
                    0
                } else {
                    63 - (n as u64).leading_zeros()
                }
            }
            WidthSchedule::Fixed { block, .. } => block,
        }
    }

    /// Freed positions per subcube at length n; 0 means no valid choice.
    pub fn free_bits(&self, n: u32) -> u32 {
        match self.schedule {
            WidthSchedule::LogLog => {
                if n <= 1 {
                    0
                } else {
                    self.block_size(n).min(floor_2loglog(n as u64))
                }
            }
            WidthSchedule::Fixed { free, .. } => free,
        }
    }

    /// Whether the strategy places any bets at length n.
    pub fn active(&self, n: u32) -> bool {
        let b = self.block_size(n);
        let k = self.free_bits(n);
        b >= 1 && b <= n && k >= 1 && k <= b
    }

    /// Stake per pool at an active length n.
    pub fn stake_at(&self, n: u32) -> Capital {
        assert!(self.active(n), "stake requested at inactive length {n}");
        match &self.stake {
            StakeRule::InverseSquare => Capital::from_ratio(1, n as u64 * n as u64),
            StakeRule::Constant(c) => c.clone(),
        }
    }

    /// Smallest active length.
    pub fn n_min(&self) -> u32 {
        (0..).find(|&n| self.active(n)).expect("some length is active")
    }

    /// Total stake money earmarked across lengths 0..=max_length, two pools
    /// per active length. Must not exceed the initial capital for a run to
    /// be incapable of overdrawing.
    pub fn budget(&self, max_length: u32) -> Capital {
        let mut total = Capital::zero();
        for n in 0..=max_length {
            if self.active(n) {
                total = total.add(&self.stake_at(n).double());
            }
        }
        total
    }
}

/// floor(2 lg lg n) for n >= 2, exact. Powers of two go through pure
/// integer arithmetic: for n = 2^a, 2 lg a = lg(a^2) and its floor is the
/// bit length of a^2 minus one. Other n take the f64 route, which cannot
/// straddle an integer boundary here: 2 lg lg n is an integer only when
/// lg n = 2^(m/2), and for odd m that is never an integer, while even m
/// means n is a power of two and is handled exactly.
pub fn floor_2loglog(n: u64) -> u32 {
    assert!(n >= 2, "floor_2loglog needs n >= 2");
    if n.is_power_of_two() {
        let a = n.trailing_zeros() as u64;
        63 - (a * a).leading_zeros()
    } else {
        (2.0 * (n as f64).log2().log2()).floor() as u32
    }
}

/// Cuts positions 1..=n into consecutive blocks of the given size, plus a
/// shorter final block when the size does not divide n. Returns inclusive
/// (first, last) position pairs.
pub fn partition_blocks(n: u32, block: u32) -> Vec<(u32, u32)> {
    assert!(block >= 1 && block <= n, "bad blocking: n {n} block {block}");
    let mut out = vec![];
    let full = n / block;
    for i in 0..full {
        out.push((i * block + 1, (i + 1) * block));
    }
    if !n.is_multiple_of(block) {
        out.push((full * block + 1, n));
    }
    out
}

/// The subcubes obtained from w by freeing `free` positions inside one
/// block, for every block and every choice of positions. Blocks come in
/// position order (leftmost first); within a block the freed-position
/// masks ascend numerically. A block shorter than `free` contributes
/// nothing. Every returned subcube contains w and has dimension `free`.
pub fn boundary_subcubes(w: &BitString, block: u32, free: u32) -> Vec<Subcube> {
    let n = w.len();
    assert!(free >= 1, "need at least one freed position");
    let mut out = vec![];
    for (lo, hi) in partition_blocks(n, block) {
        let size = hi - lo + 1;
        if size < free {
            continue;
        }
        // Position p is bit n - p, so this block spans bits n-hi ..= n-lo.
        let shift = n - hi;
        for m in masks_of_weight(size, free) {
            let free_mask = m << shift;
            let fixed = low_mask(n) & !free_mask;
            out.push(Subcube::new(n, fixed, w.value() & fixed));
        }
    }
    out
}

/// How many boundary subcubes a length-n string has, by pure arithmetic;
/// valid far beyond materializable lengths.
pub fn boundary_subcube_count(n: u64, block: u32, free: u32) -> u128 {
    assert!(block >= 1 && block as u64 <= n && free >= 1);
    let full = n / block as u64;
    let rem = (n % block as u64) as u32;
    let mut total = full as u128 * binom(block, free);
    if rem >= free {
        total += binom(rem, free);
    }
    total
}

fn binom(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut res: u128 = 1;
    for i in 0..k as u128 {
        res = res * (n as u128 - i) / (i + 1);
    }
    res
}

/// First block (index into [`partition_blocks`]) containing at least `free`
/// of the given 1-based positions, if any. When a set of at least
/// (number of blocks) * free positions is handed in, some block must
/// qualify, which is what makes freeing positions blockwise sufficient.
pub fn pigeonhole_block(n: u32, block: u32, free: u32, positions: &[u32]) -> Option<usize> {
    partition_blocks(n, block)
        .iter()
        .position(|&(lo, hi)| positions.iter().filter(|&&p| p >= lo && p <= hi).count() >= free as usize)
}

/// Every global index the strategy could ever wager on at length n, over
/// all languages: the scout targets (first n strings) plus, for each
/// possible scout-found witness, all points above it in its boundary
/// subcubes. Requires n <= 64 to materialize; empty at inactive lengths.
pub fn bet_set(n: u32, params: &BettorParams) -> BTreeSet<u128> {
    assert!((1..=64).contains(&n), "bet sets materialize only up to length 64");
    let mut out = BTreeSet::new();
    if !params.active(n) {
        return out;
    }
    let block = params.block_size(n);
    let free = params.free_bits(n);
    let seg_start = (1u128 << n) - 1;
    for v in 0..n as u64 {
        out.insert(seg_start + v as u128);
    }
    for w_val in 0..n as u64 {
        let w = BitString::new(n, w_val).expect("witness candidate in range");
        for cube in boundary_subcubes(&w, block, free) {
            for p in cube.points() {
                if p > w_val {
                    out.insert(seg_start + p as u128);
                }
            }
        }
    }
    out
}

/// Arithmetic upper bound on the bet set size at length n: n scout targets
/// plus n witness candidates times subcube count times points per subcube.
/// Polynomially bounded in n for the growing schedule.
pub fn bet_set_bound(n: u32, params: &BettorParams) -> u128 {
    if !params.active(n) {
        return 0;
    }
    let count = boundary_subcube_count(n as u64, params.block_size(n), params.free_bits(n));
    n as u128 + n as u128 * count * (1u128 << params.free_bits(n))
}

/// What became of one boundary subcube by the end of its segment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CubeFate {
    /// Still betting (only seen in mid-segment snapshots).
    Open,
    /// Retired before staking at some target: a revealed point below the
    /// target inside the subcube was a non-member. Pot intact.
    VerificationFailed,
    /// Staked and lost. Pot gone.
    LostBet,
    /// Reached the end of the segment without dying.
    Survived,
}

impl fmt::Display for CubeFate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CubeFate::Open => "open",
            CubeFate::VerificationFailed => "verification-failed",
            CubeFate::LostBet => "lost-bet",
            CubeFate::Survived => "survived",
        })
    }
}

/// Final accounting for one boundary subcube.
#[derive(Clone, Debug)]
pub struct CubeOutcome {
    pub cube: Subcube,
    pub pot_initial: Capital,
    pub pot_final: Capital,
    pub fate: CubeFate,
    pub bets_won: u32,
}

/// What the scout phase concluded at one length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SliceOutcome {
    /// The strategy never bets at this length.
    Inactive,
    /// No member among the first n strings; scout winnings kept, second
    /// pool never deployed.
    NoWitness,
    /// The scout found the first member; boundary subcubes were deployed
    /// around it.
    Witness(BitString),
}

impl SliceOutcome {
    pub fn kind(&self) -> &'static str {
        match self {
            SliceOutcome::Inactive => "inactive",
            SliceOutcome::NoWitness => "no-witness",
            SliceOutcome::Witness(_) => "witness",
        }
    }
}

/// Full accounting for one traversed length.
#[derive(Clone, Debug)]
pub struct LengthRecord {
    pub n: u32,
    pub active: bool,
    /// Stake per pool (zero at inactive lengths).
    pub stake: Capital,
    pub outcome: SliceOutcome,
    /// Scout pool at the end of the segment.
    pub scout_final: Capital,
    pub cubes: Vec<CubeOutcome>,
}

struct CubeState {
    cube: Subcube,
    pot: Capital,
    pot_initial: Capital,
    fate: CubeFate,
    bets_won: u32,
}

struct SegState {
    n: u32,
    seg_start: u128,
    active: bool,
    stake: Capital,
    scout_pot: Capital,
    witness: Option<u64>,
    cubes: Vec<CubeState>,
}

impl SegState {
    fn finalize(&self) -> LengthRecord {
        LengthRecord {
            n: self.n,
            active: self.active,
            stake: self.stake.clone(),
            outcome: match (self.active, self.witness) {
                (false, _) => SliceOutcome::Inactive,
                (true, None) => SliceOutcome::NoWitness,
                (true, Some(w)) => {
                    SliceOutcome::Witness(BitString::new(self.n, w).expect("witness in range"))
                }
            },
            scout_final: self.scout_pot.clone(),
            cubes: self
                .cubes
                .iter()
                .map(|c| CubeOutcome {
                    cube: c.cube,
                    pot_initial: c.pot_initial.clone(),
                    pot_final: c.pot.clone(),
                    fate: if c.fate == CubeFate::Open {
                        CubeFate::Survived
                    } else {
                        c.fate
                    },
                    bets_won: c.bets_won,
                })
                .collect(),
        }
    }
}

enum Pending {
    None,
    /// The scout pool was staked OUT on the previous index.
    Scout,
    /// These subcubes (by index) staked their pots IN on the previous index.
    Cubes(Vec<usize>),
}

/// The strategy itself. Stateful across one enumeration pass: views must
/// arrive in order from the empty prefix onward, which [`crate::martingale::run`]
/// and the averaging replays both guarantee.
pub struct WidthBettor {
    params: BettorParams,
    cursor: u128,
    seg: Option<SegState>,
    pending: Pending,
    finished: Vec<LengthRecord>,
}

impl WidthBettor {
    pub fn new(params: BettorParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            cursor: 0,
            seg: None,
            pending: Pending::None,
            finished: vec![],
        })
    }

    pub fn params(&self) -> &BettorParams {
        &self.params
    }

    /// Per-length accounting: all completed segments, plus the current one
    /// finalized as it stands. Call after [`Strategy::finish`] to get every
    /// traversed length settled.
    pub fn length_records(&self) -> Vec<LengthRecord> {
        let mut out = self.finished.clone();
        if let Some(seg) = &self.seg {
            out.push(seg.finalize());
        }
        out
    }

    /// Settles the bet placed on index `cursor - 1`, whose bit is `bit`.
    fn settle(&mut self, bit: bool) {
        let pending = std::mem::replace(&mut self.pending, Pending::None);
        let Some(seg) = self.seg.as_mut() else {
            return;
        };
        match pending {
            Pending::None => {}
            Pending::Scout => {
                if bit {
                    // Scout lost to the first member: deploy the second pool
                    // over that member's boundary subcubes.
                    let w_val = (self.cursor - 1 - seg.seg_start) as u64;
                    let w = BitString::new(seg.n, w_val).expect("witness in range");
                    seg.scout_pot = Capital::zero();
                    seg.witness = Some(w_val);
                    let cubes = boundary_subcubes(
                        &w,
                        self.params.block_size(seg.n),
                        self.params.free_bits(seg.n),
                    );
                    let share = seg.stake.split(cubes.len());
                    seg.cubes = cubes
                        .into_iter()
                        .map(|cube| CubeState {
                            cube,
                            pot: share.clone(),
                            pot_initial: share.clone(),
                            fate: CubeFate::Open,
                            bets_won: 0,
                        })
                        .collect();
                } else {
                    seg.scout_pot = seg.scout_pot.double();
                }
            }
            Pending::Cubes(idxs) => {
                for i in idxs {
                    let c = &mut seg.cubes[i];
                    if bit {
                        c.pot = c.pot.double();
                        c.bets_won += 1;
                    } else {
                        c.pot = Capital::zero();
                        c.fate = CubeFate::LostBet;
                    }
                }
            }
        }
    }

    /// Ensures the current segment matches length n, finalizing the old one.
    fn roll_segment(&mut self, n: u32, seg_start: u128) {
        if self.seg.as_ref().map(|s| s.n) == Some(n) {
            return;
        }
        if let Some(old) = self.seg.take() {
            self.finished.push(old.finalize());
        }
        let active = self.params.active(n);
        let stake = if active {
            self.params.stake_at(n)
        } else {
            Capital::zero()
        };
        self.seg = Some(SegState {
            n,
            seg_start,
            active,
            stake: stake.clone(),
            scout_pot: stake,
            witness: None,
            cubes: vec![],
        });
    }
}

impl Strategy for WidthBettor {
    fn initial_capital(&self) -> Capital {
        self.params.initial.clone()
    }

    fn next_bet(&mut self, view: &PrefixView<'_>) -> Option<Bet> {
        let i = view.next_index();
        assert_eq!(i, self.cursor, "views must arrive in enumeration order");
        if i > 0 {
            let bit = view.bit((i - 1) as usize);
            self.settle(bit);
        }
        let s = view.next_string();
        let (n, seg_start) = (s.len(), (1u128 << s.len()) - 1);
        self.roll_segment(n, seg_start);
        self.cursor += 1;

        let seg = self.seg.as_mut().expect("segment just rolled in");
        if !seg.active {
            return None;
        }
        let v = (i - seg.seg_start) as u64;
        match seg.witness {
            None => {
                // Scout phase: all-in OUT on each of the first n strings.
                if v < n as u64 && !seg.scout_pot.is_zero() {
                    self.pending = Pending::Scout;
                    Some(Bet {
                        target: i,
                        side: BetSide::Out,
                        stake: seg.scout_pot.clone(),
                    })
                } else {
                    None
                }
            }
            Some(w) => {
                debug_assert!(v > w, "enumeration passed the witness already");
                let mut participants = vec![];
                let mut stake = Capital::zero();
                for (ci, c) in seg.cubes.iter_mut().enumerate() {
                    if c.fate != CubeFate::Open || !c.cube.contains_value(v) {
                        continue;
                    }
                    // The subcube only keeps betting while consistent with
                    // lying wholly inside the language: every revealed point
                    // below the target must have been a member.
                    let consistent = c
                        .cube
                        .points()
                        .take_while(|&y| y < v)
                        .all(|y| view.bit((seg.seg_start + y as u128) as usize));
                    if consistent {
                        stake = stake.add(&c.pot);
                        participants.push(ci);
                    } else {
                        c.fate = CubeFate::VerificationFailed;
                    }
                }
                if participants.is_empty() {
                    None
                } else {
                    self.pending = Pending::Cubes(participants);
                    Some(Bet {
                        target: i,
                        side: BetSide::In,
                        stake,
                    })
                }
            }
        }
    }

    fn finish(&mut self, view: &PrefixView<'_>) {
        assert_eq!(view.len() as u128, self.cursor, "finish expects the full prefix");
        if self.cursor > 0 {
            let bit = view.bit((self.cursor - 1) as usize);
            self.settle(bit);
        }
        if let Some(seg) = self.seg.take() {
            self.finished.push(seg.finalize());
        }
    }

    fn reset(&mut self) {
        self.cursor = 0;
        self.seg = None;
        self.pending = Pending::None;
        self.finished.clear();
    }
}
