//! Fixed-width 0-1 vectors, lookup-table blocks, and block-chain models.
//!
//! Vectors are indexed most significant bit first: the vector `(0,1,1)`
//! denotes 3, not 6. `dec` and `bin` are mutually inverse on every valid
//! (value, width) pair. A block is a total function from `width_in`-bit
//! vectors to `width_out`-bit vectors stored as an exhaustive table; a
//! model is a chain of blocks whose widths line up.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest vector the crate will construct. Tables are exhaustive, so this
/// also bounds table sizes at 2^32 in principle; practical inputs stay far
/// below, and the solver applies its own tighter cap for table encodings.
pub const MAX_WIDTH: usize = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("vector width must be between 1 and {MAX_WIDTH}, got {0}")]
    BadWidth(usize),
    #[error("bit vectors are written in binary, got {0:?}")]
    BadBit(char),
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: usize },
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("function table must have {expected} entries, got {got}")]
    TableSize { expected: usize, got: usize },
    #[error("table entry {entry} does not fit in {width} output bits")]
    EntryTooWide { entry: u64, width: usize },
    #[error("block {index} has input width {got}, previous block outputs {expected}")]
    ChainMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("function domain {dom} does not match argument width {arg}")]
    NotInDomain { dom: usize, arg: usize },
}

/// Comparison relation between two vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

impl Relation {
    /// The relation denoting the negation of `self` under integer order.
    pub fn negate(self) -> Relation {
        match self {
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
            Relation::Le => Relation::Gt,
            Relation::Ge => Relation::Lt,
            Relation::Lt => Relation::Ge,
            Relation::Gt => Relation::Le,
        }
    }

    /// Relation with the sides swapped: `a R b` iff `b R.flip() a`.
    pub fn flip(self) -> Relation {
        match self {
            Relation::Eq => Relation::Eq,
            Relation::Ne => Relation::Ne,
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Lt => Relation::Gt,
            Relation::Gt => Relation::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Gt => ">",
        }
    }

    fn holds_int(self, a: u64, b: u64) -> bool {
        match self {
            Relation::Eq => a == b,
            Relation::Ne => a != b,
            Relation::Le => a <= b,
            Relation::Ge => a >= b,
            Relation::Lt => a < b,
            Relation::Gt => a > b,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// How order relations on vectors are read.
///
/// `Integer` compares the denoted numbers. `Elementwise` requires the
/// relation to hold at every bit position. Equality and inequality
/// coincide under both readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VectorOrder {
    #[default]
    Integer,
    Elementwise,
}

/// A 0-1 vector of fixed width, most significant bit first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVec {
    width: usize,
    value: u64,
}

impl BitVec {
    /// `bin(d, w)`: the `w`-bit vector denoting `d`.
    pub fn bin(value: u64, width: usize) -> Result<BitVec, BitsError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::BadWidth(width));
        }
        if width < 64 && value >> width != 0 {
            return Err(BitsError::ValueTooWide { value, width });
        }
        Ok(BitVec { width, value })
    }

    /// `dec(b)`: the number this vector denotes.
    pub fn dec(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Bit at position `i`, where position 0 is the most significant bit.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.width, "bit index {i} out of width {}", self.width);
        (self.value >> (self.width - 1 - i)) & 1 == 1
    }

    /// Vector with the bits in `positions` flipped (positions count from
    /// the most significant bit).
    pub fn flip_bits(&self, positions: impl IntoIterator<Item = usize>) -> BitVec {
        let mut value = self.value;
        for i in positions {
            assert!(i < self.width, "bit index {i} out of width {}", self.width);
            value ^= 1 << (self.width - 1 - i);
        }
        BitVec {
            width: self.width,
            value,
        }
    }

    /// Parse a vector from a 0-1 string, most significant bit first.
    pub fn parse_bits(s: &str) -> Result<BitVec, BitsError> {
        let digits = s.strip_prefix("0b").unwrap_or(s);
        let width = digits.len();
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::BadWidth(width));
        }
        let mut value = 0u64;
        for ch in digits.chars() {
            value <<= 1;
            match ch {
                '0' => {}
                '1' => value |= 1,
                _ => return Err(BitsError::BadBit(ch)),
            }
        }
        Ok(BitVec { width, value })
    }

    /// Compare two vectors of equal width under the given order.
    pub fn compare(&self, rel: Relation, other: &BitVec, order: VectorOrder) -> Result<bool, BitsError> {
        if self.width != other.width {
            return Err(BitsError::WidthMismatch(self.width, other.width));
        }
        match (order, rel) {
            // Equality and inequality are the same bitwise and numerically.
            (_, Relation::Eq) => Ok(self.value == other.value),
            (_, Relation::Ne) => Ok(self.value != other.value),
            (VectorOrder::Integer, r) => Ok(r.holds_int(self.value, other.value)),
            (VectorOrder::Elementwise, r) => {
                Ok((0..self.width).all(|i| r.holds_int(self.bit(i) as u64, other.bit(i) as u64)))
            }
        }
    }

    /// Number of positions at which the two vectors differ.
    pub fn hamming(&self, other: &BitVec) -> Result<usize, BitsError> {
        if self.width != other.width {
            return Err(BitsError::WidthMismatch(self.width, other.width));
        }
        Ok((self.value ^ other.value).count_ones() as usize)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Smallest width that can represent `value`, at least 1.
pub fn min_width(value: u64) -> usize {
    (64 - value.leading_zeros() as usize).max(1)
}

/// Every vector at Hamming distance 1..=radius from the center, each
/// exactly once; the center itself is not in the ball.
pub fn hamming_ball(center: &BitVec, radius: usize) -> Vec<BitVec> {
    fn grow(
        center: &BitVec,
        radius: usize,
        start: usize,
        flips: &mut Vec<usize>,
        out: &mut Vec<BitVec>,
    ) {
        for pos in start..center.width() {
            flips.push(pos);
            out.push(center.flip_bits(flips.iter().copied()));
            if flips.len() < radius {
                grow(center, radius, pos + 1, flips, out);
            }
            flips.pop();
        }
    }
    let mut out = Vec::new();
    if radius > 0 {
        grow(center, radius.min(center.width()), 0, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Deserialize)]
struct RawBoolFn {
    in_width: usize,
    out_width: usize,
    table: Vec<u64>,
}

/// A total function over 0-1 vectors given by an exhaustive lookup table.
///
/// `table[d]` is the decimal value of the output for the input denoting
/// `d`. Entry count is exactly `2^in_width` and every entry fits in
/// `out_width` bits; the constructor enforces both.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBoolFn")]
pub struct BoolFn {
    in_width: usize,
    out_width: usize,
    table: Vec<u64>,
}

impl TryFrom<RawBoolFn> for BoolFn {
    type Error = BitsError;
    fn try_from(raw: RawBoolFn) -> Result<BoolFn, BitsError> {
        BoolFn::new(raw.in_width, raw.out_width, raw.table)
    }
}

impl BoolFn {
    pub fn new(in_width: usize, out_width: usize, table: Vec<u64>) -> Result<BoolFn, BitsError> {
        if in_width == 0 || in_width > MAX_WIDTH {
            return Err(BitsError::BadWidth(in_width));
        }
        if out_width == 0 || out_width > MAX_WIDTH {
            return Err(BitsError::BadWidth(out_width));
        }
        let expected = 1usize << in_width;
        if table.len() != expected {
            return Err(BitsError::TableSize {
                expected,
                got: table.len(),
            });
        }
        for &entry in &table {
            if out_width < 64 && entry >> out_width != 0 {
                return Err(BitsError::EntryTooWide {
                    entry,
                    width: out_width,
                });
            }
        }
        Ok(BoolFn {
            in_width,
            out_width,
            table,
        })
    }

    /// The identity function on `width`-bit vectors.
    pub fn identity(width: usize) -> Result<BoolFn, BitsError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::BadWidth(width));
        }
        let table = (0..1u64 << width).collect();
        BoolFn::new(width, width, table)
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    /// Output for the input denoting `d`.
    pub fn apply_dec(&self, d: u64) -> Result<u64, BitsError> {
        self.table
            .get(d as usize)
            .copied()
            .ok_or(BitsError::ValueTooWide {
                value: d,
                width: self.in_width,
            })
    }

    pub fn apply(&self, input: &BitVec) -> Result<BitVec, BitsError> {
        if input.width() != self.in_width {
            return Err(BitsError::NotInDomain {
                dom: self.in_width,
                arg: input.width(),
            });
        }
        BitVec::bin(self.table[input.dec() as usize], self.out_width)
    }

    /// `self . compose(inner)` is the function `self ∘ inner`: first
    /// `inner`, then `self`.
    pub fn compose(&self, inner: &BoolFn) -> Result<BoolFn, BitsError> {
        if inner.out_width != self.in_width {
            return Err(BitsError::WidthMismatch(inner.out_width, self.in_width));
        }
        let table = inner.table.iter().map(|&v| self.table[v as usize]).collect();
        BoolFn::new(inner.in_width, self.out_width, table)
    }

    pub fn is_identity(&self) -> bool {
        self.in_width == self.out_width
            && self.table.iter().enumerate().all(|(i, &v)| i as u64 == v)
    }
}

impl fmt::Debug for BoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoolFn({}->{}, ", self.in_width, self.out_width)?;
        if self.table.len() <= 16 {
            write!(f, "{:?})", self.table)
        } else {
            write!(f, "[{} entries])", self.table.len())
        }
    }
}

#[derive(Deserialize)]
struct RawModel {
    blocks: Vec<BoolFn>,
}

/// A network: blocks applied in sequence, output widths matching the next
/// input width. The empty network is allowed and denotes the identity
/// behavior of length 0.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct BnnModel {
    blocks: Vec<Arc<BoolFn>>,
}

impl TryFrom<RawModel> for BnnModel {
    type Error = BitsError;
    fn try_from(raw: RawModel) -> Result<BnnModel, BitsError> {
        BnnModel::new(raw.blocks)
    }
}

impl BnnModel {
    pub fn new(blocks: Vec<BoolFn>) -> Result<BnnModel, BitsError> {
        for (i, pair) in blocks.windows(2).enumerate() {
            if pair[0].out_width() != pair[1].in_width() {
                return Err(BitsError::ChainMismatch {
                    index: i + 1,
                    expected: pair[0].out_width(),
                    got: pair[1].in_width(),
                });
            }
        }
        Ok(BnnModel {
            blocks: blocks.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn empty() -> BnnModel {
        BnnModel { blocks: Vec::new() }
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> Option<&Arc<BoolFn>> {
        self.blocks.get(i)
    }

    pub fn blocks(&self) -> &[Arc<BoolFn>] {
        &self.blocks
    }

    pub fn in_width(&self) -> Option<usize> {
        self.blocks.first().map(|b| b.in_width())
    }

    pub fn out_width(&self) -> Option<usize> {
        self.blocks.last().map(|b| b.out_width())
    }

    /// Run the whole chain on `input`.
    pub fn run(&self, input: &BitVec) -> Result<BitVec, BitsError> {
        let mut cur = *input;
        for block in &self.blocks {
            cur = block.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Apply blocks `from..to` (end-exclusive) to `input`; blocks past the
    /// end of the chain act as identities.
    pub fn run_range(&self, input: &BitVec, from: usize, to: usize) -> Result<BitVec, BitsError> {
        let mut cur = *input;
        for i in from..to {
            if let Some(block) = self.blocks.get(i) {
                cur = block.apply(&cur)?;
            }
        }
        Ok(cur)
    }

    /// The composition of the whole chain as a single table, when nonempty.
    pub fn end_to_end(&self) -> Result<Option<BoolFn>, BitsError> {
        let mut iter = self.blocks.iter();
        let Some(first) = iter.next() else {
            return Ok(None);
        };
        let mut acc = (**first).clone();
        for block in iter {
            acc = block.compose(&acc)?;
        }
        Ok(Some(acc))
    }

    pub fn from_json(json: &str) -> Result<BnnModel, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }
}

impl fmt::Debug for BnnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BnnModel[")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}->{}", b.in_width(), b.out_width())?;
        }
        write!(f, "]")
    }
}
