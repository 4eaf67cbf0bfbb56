//! Z-order (Morton) linearization of tile-grid coordinates.
//!
//! Bit k of the tile-row index maps to output bit 2k, bit k of the tile-col
//! index to output bit 2k+1. Non-power-of-two grids are handled by ranking:
//! the grid is conceptually padded to the next power of two per axis for the
//! interleaving, and the physical order is the rank of a cell's code among
//! the codes of real cells, so the file stays compact.

/// Interleaves (row, col) into a Morton code: row bits even, col bits odd.
pub fn interleave(row: u32, col: u32) -> u64 {
    spread(row) | (spread(col) << 1)
}

/// Inverse of `interleave`.
pub fn deinterleave(code: u64) -> (u32, u32) {
    (compact(code), compact(code >> 1))
}

fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact(code: u64) -> u32 {
    let mut x = code & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x >> 16)) & 0x0000_0000_FFFF_FFFF;
    x as u32
}

/// Sorted Morton codes of every cell of a `rows x cols` grid; the rank of a
/// cell's code in this table is its compact linear index.
pub fn rank_table(rows: u64, cols: u64) -> Vec<u64> {
    let mut codes = Vec::with_capacity((rows * cols) as usize);
    for r in 0..rows {
        for c in 0..cols {
            codes.push(interleave(r as u32, c as u32));
        }
    }
    codes.sort_unstable();
    codes
}
