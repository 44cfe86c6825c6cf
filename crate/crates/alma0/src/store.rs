//! Variable storage: a cell arena with an Unknown/Known distinction, frames
//! mapping slots to storage, and a trail that makes every mutation reversible.
//!
//! Every destructive write appends the prior cell state to the trail, so
//! rolling back to a mark restores the store exactly as it was when the mark
//! was taken. Trail entries carry a globally monotonic stamp; the engine uses
//! stamps to merge entry sequences that were split across scopes (FORALL body
//! logs) back into chronological order.

use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::program::{ArrayTy, CellTy, EnumId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Enum(EnumId, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellState {
    Unknown,
    Known(Value),
}

impl CellState {
    pub fn is_known(self) -> bool {
        matches!(self, CellState::Known(_))
    }
}

pub type CellIdx = u32;

/// Position in the trail, used to roll mutations back.
pub type TrailMark = usize;

#[derive(Clone, Copy, Debug)]
pub struct TrailEntry {
    pub cell: CellIdx,
    pub prior: CellState,
    pub stamp: u64,
}

/// A write rejected by the cell's declared constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeViolation {
    pub value: i64,
    pub lo: i64,
    pub hi: i64,
}

impl fmt::Display for RangeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "value {} outside subrange [{}..{}]", self.value, self.lo, self.hi)
    }
}

/// The cell arena plus its undo log.
#[derive(Default)]
pub struct Store {
    cells: Vec<CellState>,
    tys: Vec<CellTy>,
    trail: Vec<TrailEntry>,
    stamp: u64,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    /// Allocate `n` fresh Unknown cells of type `ty`; returns the base index.
    pub fn alloc(&mut self, ty: CellTy, n: usize) -> CellIdx {
        let base = self.cells.len() as CellIdx;
        self.cells.resize(self.cells.len() + n, CellState::Unknown);
        self.tys.resize(self.tys.len() + n, ty);
        base
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn state(&self, cell: CellIdx) -> CellState {
        self.cells[cell as usize]
    }

    pub fn ty(&self, cell: CellIdx) -> CellTy {
        self.tys[cell as usize]
    }

    fn check(&self, cell: CellIdx, v: Value) -> Result<(), RangeViolation> {
        if let (CellTy::IntRange(lo, hi), Value::Int(i)) = (self.tys[cell as usize], v) {
            if i < lo || i > hi {
                return Err(RangeViolation { value: i, lo, hi });
            }
        }
        Ok(())
    }

    /// Trailed write: the prior state is logged, then the cell becomes Known(v).
    pub fn write(&mut self, cell: CellIdx, v: Value) -> Result<(), RangeViolation> {
        self.check(cell, v)?;
        self.log(cell);
        self.cells[cell as usize] = CellState::Known(v);
        Ok(())
    }

    /// Trailed copy of a raw cell state (array assignment copies Unknown too).
    pub fn write_state(&mut self, cell: CellIdx, state: CellState) {
        self.log(cell);
        self.cells[cell as usize] = state;
    }

    /// Untrailed initialization of a freshly allocated cell.
    pub fn init(&mut self, cell: CellIdx, state: CellState) {
        self.cells[cell as usize] = state;
    }

    fn log(&mut self, cell: CellIdx) {
        self.stamp += 1;
        self.trail.push(TrailEntry {
            cell,
            prior: self.cells[cell as usize],
            stamp: self.stamp,
        });
    }

    pub fn mark(&self) -> TrailMark {
        self.trail.len()
    }

    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    /// Revert every mutation logged after `m`, most recent first.
    pub fn undo_to(&mut self, m: TrailMark) {
        debug_assert!(m <= self.trail.len());
        while self.trail.len() > m {
            let e = self.trail.pop().unwrap();
            self.cells[e.cell as usize] = e.prior;
        }
    }

    /// Drop cells at and above `watermark`. Callers must first undo past the
    /// cells' creation point, so no trail entry references them anymore.
    pub fn truncate_cells(&mut self, watermark: CellIdx) {
        self.cells.truncate(watermark as usize);
        self.tys.truncate(watermark as usize);
    }

    /// Detach the trail suffix after `m` without restoring anything.
    /// Used by the engine to move FORALL body mutations into a side log.
    pub fn split_off(&mut self, m: TrailMark) -> Vec<TrailEntry> {
        self.trail.split_off(m)
    }

    /// Entries after `m`, oldest first.
    pub fn entries_since(&self, m: TrailMark) -> &[TrailEntry] {
        &self.trail[m..]
    }

    /// Truncate the log to `m` without restoring (the engine has already
    /// applied a merged undo), then append replacement entries.
    pub fn replace_suffix(&mut self, m: TrailMark, entries: &[(CellIdx, CellState)]) {
        self.trail.truncate(m);
        for &(cell, prior) in entries {
            self.stamp += 1;
            let stamp = self.stamp;
            self.trail.push(TrailEntry { cell, prior, stamp });
        }
    }

    /// Restore a single state without consulting the trail. Only the engine's
    /// merged-undo paths use this.
    pub fn restore_raw(&mut self, cell: CellIdx, state: CellState) {
        self.cells[cell as usize] = state;
    }

    /// Full snapshot of cell states, for tests and invariant checks.
    pub fn snapshot(&self) -> Vec<CellState> {
        self.cells.clone()
    }
}

// ---------------------------------------------------------------------------
// frames
// ---------------------------------------------------------------------------

/// Storage of one array variable: a contiguous run of cells plus its shape.
#[derive(Clone, Copy, Debug)]
pub struct ArrayObj<'p> {
    pub base: CellIdx,
    pub ty: &'p ArrayTy,
}

impl<'p> ArrayObj<'p> {
    pub fn cell_count(&self) -> usize {
        self.ty.cell_count()
    }

    /// Row-major flat offset for `indices`, checking every dimension.
    pub fn flatten(&self, indices: &[i64]) -> Result<CellIdx, String> {
        debug_assert_eq!(indices.len(), self.ty.dims.len());
        let mut offset: usize = 0;
        for (i, (&idx, &(lo, hi))) in indices.iter().zip(self.ty.dims.iter()).enumerate() {
            if idx < lo || idx > hi {
                return Err(format!(
                    "index {} out of bounds [{}..{}] in dimension {}",
                    idx,
                    lo,
                    hi,
                    i + 1
                ));
            }
            offset = offset * ((hi - lo + 1) as usize) + (idx - lo) as usize;
        }
        Ok(self.base + offset as CellIdx)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Slot<'p> {
    Cell(CellIdx),
    Array(ArrayObj<'p>),
}

/// One procedure activation (or the module's global storage). VAR and MIX
/// parameter slots alias the caller's storage; value slots are fresh copies.
#[derive(Debug)]
pub struct Frame<'p> {
    pub slots: Vec<Slot<'p>>,
}

pub type FrameRef<'p> = Rc<Frame<'p>>;
