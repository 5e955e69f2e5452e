use std::fmt;
use std::io::{Read, Write};
use std::ops::{Mul, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single ±1 measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
#[repr(i8)]
pub enum Dichotomic {
    Minus = -1,
    Plus = 1,
}

impl Dichotomic {
    #[inline]
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn try_from_int(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Dichotomic::Plus),
            -1 => Ok(Dichotomic::Minus),
            other => Err(Error::InvalidDichotomic(other)),
        }
    }

    #[inline]
    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Dichotomic::Plus
        } else {
            Dichotomic::Minus
        }
    }

    /// Sign of `x`, with zero mapped to `Plus`.
    #[inline]
    pub fn sign_of(x: f64) -> Self {
        Self::from_bool(x >= 0.0)
    }

    pub fn as_char(self) -> char {
        match self {
            Dichotomic::Plus => '+',
            Dichotomic::Minus => '-',
        }
    }
}

impl Neg for Dichotomic {
    type Output = Dichotomic;
    #[inline]
    fn neg(self) -> Self {
        match self {
            Dichotomic::Plus => Dichotomic::Minus,
            Dichotomic::Minus => Dichotomic::Plus,
        }
    }
}

impl Mul for Dichotomic {
    type Output = Dichotomic;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::from_bool(self == rhs)
    }
}

impl From<Dichotomic> for i8 {
    fn from(d: Dichotomic) -> i8 {
        d.value()
    }
}

impl From<Dichotomic> for i64 {
    fn from(d: Dichotomic) -> i64 {
        d.value() as i64
    }
}

impl TryFrom<i8> for Dichotomic {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        Self::try_from_int(v as i64)
    }
}

/// Non-empty ordered list of ±1 outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Dichotomic>", into = "Vec<Dichotomic>")]
pub struct DichotomicSequence {
    entries: Vec<Dichotomic>,
}

impl DichotomicSequence {
    pub fn new(entries: Vec<Dichotomic>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { entries })
    }

    pub fn from_ints<T: Copy + Into<i64>>(values: &[T]) -> Result<Self> {
        let entries = values
            .iter()
            .map(|&v| Dichotomic::try_from_int(v.into()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Constant sequence of length `len` (at least 1).
    pub fn constant(value: Dichotomic, len: usize) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    // Never true; kept so clippy's len_without_is_empty stays quiet.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Dichotomic] {
        &self.entries
    }

    pub fn values(&self) -> impl Iterator<Item = i8> + '_ {
        self.entries.iter().map(|d| d.value())
    }

    pub fn negate(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&d| -d).collect(),
        }
    }

    /// Window `[offset, offset + len)` over the sequence, without copying.
    pub fn block(&self, offset: usize, len: usize) -> Result<Block<'_>> {
        let end = offset.checked_add(len);
        match end {
            Some(end) if len > 0 && end <= self.entries.len() => Ok(Block {
                offset,
                entries: &self.entries[offset..end],
            }),
            _ => Err(Error::BlockOutOfRange {
                offset,
                len,
                total: self.entries.len(),
            }),
        }
    }

    /// Consecutive disjoint windows of length `len`; a short trailing window is kept.
    pub fn blocks(&self, len: usize) -> impl Iterator<Item = Block<'_>> {
        let len = len.max(1);
        self.entries
            .chunks(len)
            .enumerate()
            .map(move |(k, entries)| Block {
                offset: k * len,
                entries,
            })
    }

    pub fn to_sign_string(&self) -> String {
        self.entries.iter().map(|d| d.as_char()).collect()
    }
}

impl FromStr for DichotomicSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .map(|c| match c {
                '+' => Ok(Dichotomic::Plus),
                '-' => Ok(Dichotomic::Minus),
                other => Err(Error::InvalidSignChar(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

impl fmt::Display for DichotomicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sign_string())
    }
}

impl TryFrom<Vec<Dichotomic>> for DichotomicSequence {
    type Error = Error;
    fn try_from(v: Vec<Dichotomic>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DichotomicSequence> for Vec<Dichotomic> {
    fn from(s: DichotomicSequence) -> Self {
        s.entries
    }
}

impl AsRef<[Dichotomic]> for DichotomicSequence {
    fn as_ref(&self) -> &[Dichotomic] {
        &self.entries
    }
}

impl std::ops::Neg for &DichotomicSequence {
    type Output = DichotomicSequence;
    fn neg(self) -> DichotomicSequence {
        self.negate()
    }
}

/// Borrowed constant-axis stretch of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block<'a> {
    pub offset: usize,
    entries: &'a [Dichotomic],
}

impl<'a> Block<'a> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &'a [Dichotomic] {
        self.entries
    }
}

impl AsRef<[Dichotomic]> for Block<'_> {
    fn as_ref(&self) -> &[Dichotomic] {
        self.entries
    }
}

/// Writes named sequences as CSV columns of -1/1. All columns must share one length.
pub fn write_csv<W: Write>(writer: W, columns: &[(&str, &DichotomicSequence)]) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Ok(());
    };
    for (_, col) in columns {
        if col.len() != first.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: col.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(columns.iter().map(|(name, _)| *name))?;
    let mut row = Vec::with_capacity(columns.len());
    for i in 0..first.len() {
        row.clear();
        row.extend(columns.iter().map(|(_, s)| s.entries[i].value().to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every column of a CSV with a header row as a sequence.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<(String, DichotomicSequence)>> {
    let mut r = csv::Reader::from_reader(reader);
    let names: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let mut cols: Vec<Vec<Dichotomic>> = vec![Vec::new(); names.len()];
    for record in r.records() {
        let record = record?;
        for (col, field) in cols.iter_mut().zip(record.iter()) {
            let v: i64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Io(format!("not an integer: {field:?}")))?;
            col.push(Dichotomic::try_from_int(v)?);
        }
    }
    names
        .into_iter()
        .zip(cols)
        .map(|(n, c)| Ok((n, DichotomicSequence::new(c)?)))
        .collect()
}
