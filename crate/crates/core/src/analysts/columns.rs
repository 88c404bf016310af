//! Column-wise bit counting over many packed rows.
//!
//! Each accumulator word holds eight `u8` lanes, one per bit of a source
//! byte, and is flushed into `u32` totals before any lane can overflow.

use crate::model::BinaryVector;

const fn spread_table() -> [u64; 256] {
    let mut table = [0u64; 256];
    let mut byte = 0;
    while byte < 256 {
        let mut lane = 0;
        let mut v = 0u64;
        while lane < 8 {
            v |= (((byte >> lane) & 1) as u64) << (8 * lane);
            lane += 1;
        }
        table[byte] = v;
        byte += 1;
    }
    table
}

static SPREAD: [u64; 256] = spread_table();

const FLUSH_EVERY: u32 = 255;

pub(crate) struct ColumnCounter {
    len: usize,
    lanes: Vec<u64>,
    totals: Vec<u32>,
    pending: u32,
    rows: usize,
}

impl ColumnCounter {
    pub(crate) fn new(len: usize) -> Self {
        let words = len.div_ceil(64);
        Self {
            len,
            lanes: vec![0; words * 8],
            totals: vec![0; words * 64],
            pending: 0,
            rows: 0,
        }
    }

    /// Adds one row, complemented when `flip` is set.
    pub(crate) fn add(&mut self, row: &BinaryVector, flip: bool) {
        debug_assert_eq!(row.len(), self.len);
        let mask = if flip { u64::MAX } else { 0 };
        for (lanes, &word) in self.lanes.chunks_exact_mut(8).zip(row.words()) {
            let w = word ^ mask;
            for (b, lane) in lanes.iter_mut().enumerate() {
                *lane += SPREAD[((w >> (8 * b)) & 0xff) as usize];
            }
        }
        self.rows += 1;
        self.pending += 1;
        if self.pending == FLUSH_EVERY {
            self.flush();
        }
    }

    fn flush(&mut self) {
        for (i, lane) in self.lanes.iter_mut().enumerate() {
            let base = (i / 8) * 64 + (i % 8) * 8;
            let bytes = lane.to_le_bytes();
            for (l, &c) in bytes.iter().enumerate() {
                self.totals[base + l] += u32::from(c);
            }
            *lane = 0;
        }
        self.pending = 0;
    }

    pub(crate) fn rows(&self) -> usize {
        self.rows
    }

    /// Per-column counts of set bits over every added row.
    pub(crate) fn finish(mut self) -> Vec<u32> {
        self.flush();
        self.totals.truncate(self.len);
        self.totals
    }

    /// Bit `j` set iff column `j` holds set bits in strictly more than half of
    /// the rows. Zero rows give all zeros.
    pub(crate) fn strict_majority(self) -> BinaryVector {
        let rows = self.rows;
        let counts = self.finish();
        BinaryVector::from_bits(counts.iter().map(|&c| 2 * c as usize > rows))
    }
}
