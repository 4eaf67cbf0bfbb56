//! On-disk tiled matrix format and tile addressing.
//!
//! A matrix file is one header block followed by `#tiles * blocks_per_tile`
//! data blocks. Elements are 64-bit IEEE-754 floats, little-endian. All
//! sizes are in scalars; a block holds `B` of them. Vectors are stored as
//! `n x 1` matrices.
//!
//! Header layout (one block, zero-padded to `B * 8` bytes):
//!
//! | offset | size | field                                        |
//! |--------|------|----------------------------------------------|
//! | 0      | 4    | magic `"RIOT"`                               |
//! | 4      | 1    | format version, currently 1                  |
//! | 5      | 8    | rows, u64 LE                                 |
//! | 13     | 8    | cols, u64 LE                                 |
//! | 21     | 8    | tile_rows, u64 LE                            |
//! | 29     | 8    | tile_cols, u64 LE                            |
//! | 37     | 1    | linearization: 0 row-major, 1 col-major, 2 Z |
//! | 38     | 1    | element type: 0 = f64 little-endian          |
//!
//! Tile `(ti, tj)` occupies `blocks_per_tile` consecutive data blocks
//! starting at data-block offset `linear_index(ti, tj) * blocks_per_tile`
//! (data block 0 is file block 1). Within a tile, elements are row-major
//! over the full `tile_rows x tile_cols` extent; edge tiles are zero-padded
//! and the padding is never exposed. No element indices are stored.

pub mod zorder;

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pool::{AccessMode, BlockGuard, BufferPool, FileId, SCALAR_BYTES};

const MAGIC: &[u8; 4] = b"RIOT";
const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 39;
const ELEM_F64_LE: u8 = 0;

/// Logical matrix extent. Vectors are `rows x 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub rows: u64,
    pub cols: u64,
}

impl Shape {
    /// User-visible shapes: both extents at least 1.
    pub fn new(rows: u64, cols: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape { rows, cols });
        }
        Ok(Shape { rows, cols })
    }

    /// Shapes of computed results may be empty (a zero-length gather).
    pub fn result(rows: u64, cols: u64) -> Self {
        Shape { rows, cols }
    }

    pub fn vector(n: u64) -> Self {
        Shape { rows: n, cols: 1 }
    }

    pub fn elements(&self) -> u64 {
        self.rows * self.cols
    }

    pub fn is_vector(&self) -> bool {
        self.cols == 1
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Tiling strategy. Strips are one block long and skinny; Square tiles have
/// side `floor(sqrt(B))` so one tile fits in one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    RowStrips,
    ColStrips,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileSpec {
    pub tile_rows: u64,
    pub tile_cols: u64,
    pub kind: LayoutKind,
}

impl TileSpec {
    pub fn new(kind: LayoutKind, block_scalars: u64) -> Self {
        match kind {
            LayoutKind::RowStrips => TileSpec {
                tile_rows: 1,
                tile_cols: block_scalars,
                kind,
            },
            LayoutKind::ColStrips => TileSpec {
                tile_rows: block_scalars,
                tile_cols: 1,
                kind,
            },
            LayoutKind::Square => {
                let side = (block_scalars as f64).sqrt().floor() as u64;
                TileSpec {
                    tile_rows: side,
                    tile_cols: side,
                    kind,
                }
            }
        }
    }

    pub fn area(&self) -> u64 {
        self.tile_rows * self.tile_cols
    }

    fn kind_from_dims(tile_rows: u64, tile_cols: u64) -> LayoutKind {
        if tile_rows == 1 && tile_cols > 1 {
            LayoutKind::RowStrips
        } else if tile_cols == 1 && tile_rows > 1 {
            LayoutKind::ColStrips
        } else {
            LayoutKind::Square
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    TileRowMajor,
    TileColMajor,
    ZOrder,
}

impl Linearization {
    fn code(self) -> u8 {
        match self {
            Linearization::TileRowMajor => 0,
            Linearization::TileColMajor => 1,
            Linearization::ZOrder => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Linearization::TileRowMajor),
            1 => Some(Linearization::TileColMajor),
            2 => Some(Linearization::ZOrder),
            _ => None,
        }
    }
}

/// Handle to an on-disk tiled matrix. Carries metadata only; block I/O goes
/// through the buffer pool under the owning evaluation context.
#[derive(Debug, Clone)]
pub struct StoredMatrix {
    path: PathBuf,
    file_id: FileId,
    shape: Shape,
    tiles: TileSpec,
    lin: Linearization,
    blocks_per_tile: u64,
    // Sorted Morton codes of the tile grid; present only for ZOrder.
    zorder_ranks: Option<std::rc::Rc<Vec<u64>>>,
}

impl StoredMatrix {
    /// Creates a zero-initialized matrix file and registers it with the pool.
    /// The header is written outside the pool and is not counted.
    pub fn create(
        pool: &BufferPool,
        path: impl AsRef<Path>,
        shape: Shape,
        tiles: TileSpec,
        lin: Linearization,
    ) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let block_scalars = pool.budget().block_scalars();
        if tiles.area() == 0 {
            return Err(Error::InvalidShape {
                rows: tiles.tile_rows,
                cols: tiles.tile_cols,
            });
        }
        let file = File::options()
            .read(true)
            .write(true)
            .create(true)
            .truncate(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut header = vec![0u8; (block_scalars * SCALAR_BYTES) as usize];
        header[0..4].copy_from_slice(MAGIC);
        header[4] = FORMAT_VERSION;
        header[5..13].copy_from_slice(&shape.rows.to_le_bytes());
        header[13..21].copy_from_slice(&shape.cols.to_le_bytes());
        header[21..29].copy_from_slice(&tiles.tile_rows.to_le_bytes());
        header[29..37].copy_from_slice(&tiles.tile_cols.to_le_bytes());
        header[37] = lin.code();
        header[38] = ELEM_F64_LE;
        use std::os::unix::fs::FileExt;
        file.write_all_at(&header, 0).map_err(|e| Error::io(&path, e))?;
        let blocks_per_tile = tiles.area().div_ceil(block_scalars);
        let grid_rows = shape.rows.div_ceil(tiles.tile_rows);
        let grid_cols = shape.cols.div_ceil(tiles.tile_cols);
        let total_blocks = 1 + grid_rows * grid_cols * blocks_per_tile;
        // set_len leaves the data region as file holes, which read as zeros.
        file.set_len(total_blocks * block_scalars * SCALAR_BYTES)
            .map_err(|e| Error::io(&path, e))?;
        let file_id = pool.register_file(file, path.clone());
        Ok(Self::assemble(path, file_id, shape, tiles, lin, blocks_per_tile))
    }

    /// Opens an existing matrix file, parsing and validating the header.
    pub fn open(pool: &BufferPool, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::options()
            .read(true)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut header = [0u8; HEADER_LEN];
        use std::os::unix::fs::FileExt;
        file.read_exact_at(&mut header, 0)
            .map_err(|e| Error::io(&path, e))?;
        if &header[0..4] != MAGIC {
            return Err(Error::BadHeader {
                path,
                reason: "bad magic".into(),
            });
        }
        if header[4] != FORMAT_VERSION {
            return Err(Error::BadHeader {
                path,
                reason: format!("unsupported format version {}", header[4]),
            });
        }
        let rows = u64::from_le_bytes(header[5..13].try_into().unwrap());
        let cols = u64::from_le_bytes(header[13..21].try_into().unwrap());
        let tile_rows = u64::from_le_bytes(header[21..29].try_into().unwrap());
        let tile_cols = u64::from_le_bytes(header[29..37].try_into().unwrap());
        let lin = Linearization::from_code(header[37]).ok_or_else(|| Error::BadHeader {
            path: path.clone(),
            reason: format!("unknown linearization code {}", header[37]),
        })?;
        if header[38] != ELEM_F64_LE {
            return Err(Error::BadHeader {
                path,
                reason: format!("unknown element type code {}", header[38]),
            });
        }
        if tile_rows == 0 || tile_cols == 0 {
            return Err(Error::BadHeader {
                path,
                reason: "zero tile extent".into(),
            });
        }
        let shape = Shape::result(rows, cols);
        let tiles = TileSpec {
            tile_rows,
            tile_cols,
            kind: TileSpec::kind_from_dims(tile_rows, tile_cols),
        };
        let blocks_per_tile = tiles.area().div_ceil(pool.budget().block_scalars());
        let file_id = pool.register_file(file, path.clone());
        Ok(Self::assemble(path, file_id, shape, tiles, lin, blocks_per_tile))
    }

    fn assemble(
        path: PathBuf,
        file_id: FileId,
        shape: Shape,
        tiles: TileSpec,
        lin: Linearization,
        blocks_per_tile: u64,
    ) -> Self {
        let mut m = StoredMatrix {
            path,
            file_id,
            shape,
            tiles,
            lin,
            blocks_per_tile,
            zorder_ranks: None,
        };
        if lin == Linearization::ZOrder {
            let (gr, gc) = m.grid();
            m.zorder_ranks = Some(std::rc::Rc::new(zorder::rank_table(gr, gc)));
        }
        m
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file_id(&self) -> FileId {
        self.file_id
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn tiles(&self) -> TileSpec {
        self.tiles
    }

    pub fn linearization(&self) -> Linearization {
        self.lin
    }

    pub fn blocks_per_tile(&self) -> u64 {
        self.blocks_per_tile
    }

    /// Tile grid extent: `(ceil(rows/tile_rows), ceil(cols/tile_cols))`.
    pub fn grid(&self) -> (u64, u64) {
        (
            self.shape.rows.div_ceil(self.tiles.tile_rows),
            self.shape.cols.div_ceil(self.tiles.tile_cols),
        )
    }

    pub fn tiles_total(&self) -> u64 {
        let (gr, gc) = self.grid();
        gr * gc
    }

    /// Data blocks occupied by the matrix (header excluded).
    pub fn data_blocks(&self) -> u64 {
        self.tiles_total() * self.blocks_per_tile
    }

    /// Linear position of tile `(ti, tj)` under this linearization;
    /// a bijection onto `0..tiles_total()`.
    pub fn linear_index(&self, ti: u64, tj: u64) -> Result<u64> {
        let (gr, gc) = self.grid();
        if ti >= gr || tj >= gc {
            return Err(Error::TileOutOfGrid {
                ti,
                tj,
                grid_rows: gr,
                grid_cols: gc,
            });
        }
        Ok(match self.lin {
            Linearization::TileRowMajor => ti * gc + tj,
            Linearization::TileColMajor => tj * gr + ti,
            Linearization::ZOrder => {
                let code = zorder::interleave(ti as u32, tj as u32);
                let ranks = self.zorder_ranks.as_ref().expect("rank table built");
                ranks.binary_search(&code).expect("cell in rank table") as u64
            }
        })
    }

    /// First data-block offset of tile `(ti, tj)`.
    pub fn tile_address(&self, ti: u64, tj: u64) -> Result<u64> {
        Ok(self.linear_index(ti, tj)? * self.blocks_per_tile)
    }

    /// Extent of the in-bounds region of tile `(ti, tj)`.
    pub fn tile_live(&self, ti: u64, tj: u64) -> (u64, u64) {
        let live_r = (self.shape.rows - ti * self.tiles.tile_rows).min(self.tiles.tile_rows);
        let live_c = (self.shape.cols - tj * self.tiles.tile_cols).min(self.tiles.tile_cols);
        (live_r, live_c)
    }

    /// Maps element `(r, c)` to its data block and the scalar offset inside
    /// that block.
    pub fn elem_block(&self, r: u64, c: u64, block_scalars: u64) -> Result<(u64, u64)> {
        let ti = r / self.tiles.tile_rows;
        let tj = c / self.tiles.tile_cols;
        let local = (r % self.tiles.tile_rows) * self.tiles.tile_cols + (c % self.tiles.tile_cols);
        let addr = self.tile_address(ti, tj)?;
        Ok((addr + local / block_scalars, local % block_scalars))
    }

    /// Pins one data block (file block `1 + data_offset`).
    pub fn pin_block<'p>(
        &self,
        pool: &'p BufferPool,
        data_offset: u64,
        mode: AccessMode,
    ) -> Result<BlockGuard<'p>> {
        pool.get_block(self.file_id, 1 + data_offset, mode)
    }

    /// Pins all blocks of a tile, first block first.
    pub fn pin_tile<'p>(
        &self,
        pool: &'p BufferPool,
        ti: u64,
        tj: u64,
        mode: AccessMode,
    ) -> Result<Vec<BlockGuard<'p>>> {
        let addr = self.tile_address(ti, tj)?;
        (0..self.blocks_per_tile)
            .map(|b| self.pin_block(pool, addr + b, mode))
            .collect()
    }

    /// Copies the in-bounds region of a tile out of the pool, row-major with
    /// stride `live_cols`. Padding is not exposed.
    pub fn read_tile(&self, pool: &BufferPool, ti: u64, tj: u64) -> Result<TileBuf> {
        let (live_r, live_c) = self.tile_live(ti, tj);
        let guards = self.pin_tile(pool, ti, tj, AccessMode::Read)?;
        let bs = pool.budget().block_scalars();
        let mut data = Vec::with_capacity((live_r * live_c) as usize);
        for r in 0..live_r {
            for c in 0..live_c {
                let local = r * self.tiles.tile_cols + c;
                let g = &guards[(local / bs) as usize];
                data.push(g.data()[(local % bs) as usize]);
            }
        }
        Ok(TileBuf {
            rows: live_r,
            cols: live_c,
            data,
        })
    }

    /// Writes the in-bounds region of a tile (row-major, stride `live_cols`);
    /// the padding of edge tiles stays zero.
    pub fn write_tile(&self, pool: &BufferPool, ti: u64, tj: u64, values: &[f64]) -> Result<()> {
        let (live_r, live_c) = self.tile_live(ti, tj);
        if values.len() as u64 != live_r * live_c {
            return Err(Error::StreamLength {
                expected: live_r * live_c,
                got: values.len() as u64,
            });
        }
        let guards = self.pin_tile(pool, ti, tj, AccessMode::Write)?;
        let bs = pool.budget().block_scalars();
        for r in 0..live_r {
            for c in 0..live_c {
                let local = r * self.tiles.tile_cols + c;
                let g = &guards[(local / bs) as usize];
                g.data_mut()[(local % bs) as usize] = values[(r * live_c + c) as usize];
            }
        }
        Ok(())
    }

    /// Detaches cached blocks and deletes the file. For temporaries.
    pub fn delete(self, pool: &BufferPool) -> Result<()> {
        pool.forget_file(self.file_id);
        std::fs::remove_file(&self.path).map_err(|e| Error::io(&self.path, e))
    }
}

/// In-bounds contents of one tile.
#[derive(Debug, Clone, PartialEq)]
pub struct TileBuf {
    pub rows: u64,
    pub cols: u64,
    pub data: Vec<f64>,
}

impl TileBuf {
    pub fn get(&self, r: u64, c: u64) -> f64 {
        assert!(r < self.rows && c < self.cols, "index outside live region");
        self.data[(r * self.cols + c) as usize]
    }
}

/// Creates a matrix and fills it from `value(r, c)`, tile by tile.
pub fn import_with(
    pool: &BufferPool,
    path: impl AsRef<Path>,
    shape: Shape,
    tiles: TileSpec,
    lin: Linearization,
    value: impl Fn(u64, u64) -> f64,
) -> Result<StoredMatrix> {
    let m = StoredMatrix::create(pool, path, shape, tiles, lin)?;
    let (gr, gc) = m.grid();
    let mut buf = Vec::new();
    for ti in 0..gr {
        for tj in 0..gc {
            let (live_r, live_c) = m.tile_live(ti, tj);
            buf.clear();
            for r in 0..live_r {
                for c in 0..live_c {
                    buf.push(value(ti * tiles.tile_rows + r, tj * tiles.tile_cols + c));
                }
            }
            m.write_tile(pool, ti, tj, &buf)?;
        }
    }
    Ok(m)
}

/// Imports a full row-major scalar stream; errors if the length is not
/// exactly `rows * cols`.
pub fn import_dense(
    pool: &BufferPool,
    path: impl AsRef<Path>,
    shape: Shape,
    tiles: TileSpec,
    lin: Linearization,
    values: &[f64],
) -> Result<StoredMatrix> {
    if values.len() as u64 != shape.elements() {
        return Err(Error::StreamLength {
            expected: shape.elements(),
            got: values.len() as u64,
        });
    }
    import_with(pool, path, shape, tiles, lin, |r, c| {
        values[(r * shape.cols + c) as usize]
    })
}

/// Reads the whole matrix back as a row-major scalar vector.
pub fn export_dense(pool: &BufferPool, m: &StoredMatrix) -> Result<Vec<f64>> {
    let shape = m.shape();
    let mut out = vec![0.0; shape.elements() as usize];
    let (gr, gc) = m.grid();
    for ti in 0..gr {
        for tj in 0..gc {
            let tile = m.read_tile(pool, ti, tj)?;
            for r in 0..tile.rows {
                for c in 0..tile.cols {
                    let gr_ = ti * m.tiles().tile_rows + r;
                    let gc_ = tj * m.tiles().tile_cols + c;
                    out[(gr_ * shape.cols + gc_) as usize] = tile.get(r, c);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::ResourceBudget;

    fn pool(memory: u64, block: u64) -> BufferPool {
        BufferPool::new(ResourceBudget::new(memory, block).unwrap())
    }

    #[test]
    fn square_tiling_block_capacity_16() {
        // 8x8 with B=16: 4x4 tiles, 2x2 grid, 1 block per tile.
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 4, 16);
        let tiles = TileSpec::new(LayoutKind::Square, 16);
        assert_eq!((tiles.tile_rows, tiles.tile_cols), (4, 4));
        let m = StoredMatrix::create(
            &pool,
            dir.path().join("m.riot"),
            Shape::new(8, 8).unwrap(),
            tiles,
            Linearization::TileRowMajor,
        )
        .unwrap();
        assert_eq!(m.grid(), (2, 2));
        assert_eq!(m.tiles_total(), 4);
        assert_eq!(m.blocks_per_tile(), 1);
        // header + 4 data blocks
        let len = std::fs::metadata(m.path()).unwrap().len();
        assert_eq!(len, 5 * 16 * 8);
    }

    #[test]
    fn single_padded_tile_row_vector() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(1024 * 4, 1024);
        let m = StoredMatrix::create(
            &pool,
            dir.path().join("v.riot"),
            Shape::new(1, 100).unwrap(),
            TileSpec::new(LayoutKind::RowStrips, 1024),
            Linearization::TileRowMajor,
        )
        .unwrap();
        assert_eq!(m.tiles_total(), 1);
        assert_eq!(m.data_blocks(), 1);
        let tile = m.read_tile(&pool, 0, 0).unwrap();
        assert_eq!((tile.rows, tile.cols), (1, 100));
        assert!(tile.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn square_128_with_zorder_has_16_tiles() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(1024 * 4, 1024);
        let m = StoredMatrix::create(
            &pool,
            dir.path().join("m.riot"),
            Shape::new(128, 128).unwrap(),
            TileSpec::new(LayoutKind::Square, 1024),
            Linearization::ZOrder,
        )
        .unwrap();
        assert_eq!(m.tiles().tile_rows, 32);
        assert_eq!(m.tiles_total(), 16);
        assert_eq!(m.blocks_per_tile(), 1);
    }

    #[test]
    fn linear_index_examples() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 4, 16);
        let shape = Shape::new(16, 16).unwrap(); // 4x4 grid of 4x4 tiles
        let tiles = TileSpec::new(LayoutKind::Square, 16);
        let rm = StoredMatrix::create(
            &pool,
            dir.path().join("rm.riot"),
            shape,
            tiles,
            Linearization::TileRowMajor,
        )
        .unwrap();
        assert_eq!(rm.linear_index(1, 2).unwrap(), 6);
        let cm = StoredMatrix::create(
            &pool,
            dir.path().join("cm.riot"),
            shape,
            tiles,
            Linearization::TileColMajor,
        )
        .unwrap();
        assert_eq!(cm.linear_index(1, 2).unwrap(), 9);
        let zo = StoredMatrix::create(
            &pool,
            dir.path().join("zo.riot"),
            shape,
            tiles,
            Linearization::ZOrder,
        )
        .unwrap();
        assert_eq!(zo.linear_index(1, 1).unwrap(), 3);
        assert_eq!(zo.linear_index(2, 1).unwrap(), 6);
        assert!(zo.linear_index(4, 0).is_err());
    }

    #[test]
    fn tile_address_bijection_all_linearizations() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 4, 16);
        for (i, lin) in [
            Linearization::TileRowMajor,
            Linearization::TileColMajor,
            Linearization::ZOrder,
        ]
        .into_iter()
        .enumerate()
        {
            // 20x44 elements with 4x4 tiles: ragged 5x11 grid.
            let m = StoredMatrix::create(
                &pool,
                dir.path().join(format!("b{i}.riot")),
                Shape::new(20, 44).unwrap(),
                TileSpec::new(LayoutKind::Square, 16),
                lin,
            )
            .unwrap();
            let (gr, gc) = m.grid();
            let mut seen = vec![false; (gr * gc) as usize];
            for ti in 0..gr {
                for tj in 0..gc {
                    let idx = m.linear_index(ti, tj).unwrap();
                    assert!(!seen[idx as usize], "collision at ({ti},{tj})");
                    seen[idx as usize] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn write_read_roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 4, 16);
        let m = StoredMatrix::create(
            &pool,
            dir.path().join("m.riot"),
            Shape::new(6, 6).unwrap(),
            TileSpec::new(LayoutKind::Square, 16),
            Linearization::TileRowMajor,
        )
        .unwrap();
        let vals: Vec<f64> = (0..16).map(|i| (i as f64).sqrt() * 1.25e-3).collect();
        m.write_tile(&pool, 0, 0, &vals).unwrap();
        let back = m.read_tile(&pool, 0, 0).unwrap();
        assert_eq!(back.data, vals);
        // Edge tile exposes only the 6x6 bounds: tile (1,1) is 2x2.
        let edge = m.read_tile(&pool, 1, 1).unwrap();
        assert_eq!((edge.rows, edge.cols), (2, 2));
        assert_eq!(edge.data.len(), 4);
    }

    #[test]
    fn cold_reads_count_one_block_per_tile() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(3 * 1024, 1024);
        let m = StoredMatrix::create(
            &pool,
            dir.path().join("m.riot"),
            Shape::new(128, 128).unwrap(),
            TileSpec::new(LayoutKind::Square, 1024),
            Linearization::TileRowMajor,
        )
        .unwrap();
        pool.reset_counters();
        for ti in 0..4 {
            for tj in 0..4 {
                m.read_tile(&pool, ti, tj).unwrap();
            }
        }
        assert_eq!(pool.stats().blocks_read, 16);
    }

    #[test]
    fn import_export_roundtrip_and_layout_independence() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 8, 16);
        let vals = vec![1.0, 2.0, 3.0, 4.0];
        let shape = Shape::new(2, 2).unwrap();
        let a = import_dense(
            &pool,
            dir.path().join("a.riot"),
            shape,
            TileSpec::new(LayoutKind::Square, 16),
            Linearization::TileRowMajor,
            &vals,
        )
        .unwrap();
        assert_eq!(export_dense(&pool, &a).unwrap(), vals);
        let b = import_dense(
            &pool,
            dir.path().join("b.riot"),
            shape,
            TileSpec::new(LayoutKind::RowStrips, 16),
            Linearization::TileColMajor,
            &vals,
        )
        .unwrap();
        assert_eq!(export_dense(&pool, &b).unwrap(), vals);
    }

    #[test]
    fn open_reads_back_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 8, 16);
        let path = dir.path().join("m.riot");
        let m = import_dense(
            &pool,
            &path,
            Shape::new(3, 5).unwrap(),
            TileSpec::new(LayoutKind::Square, 16),
            Linearization::ZOrder,
            &(0..15).map(|i| i as f64).collect::<Vec<_>>(),
        )
        .unwrap();
        pool.flush().unwrap();
        let reopened = StoredMatrix::open(&pool, &path).unwrap();
        assert_eq!(reopened.shape(), m.shape());
        assert_eq!(reopened.tiles(), m.tiles());
        assert_eq!(reopened.linearization(), Linearization::ZOrder);
        assert_eq!(
            export_dense(&pool, &reopened).unwrap(),
            export_dense(&pool, &m).unwrap()
        );
    }

    #[test]
    fn open_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let pool = pool(16 * 8, 16);
        let path = dir.path().join("junk.riot");
        std::fs::write(&path, b"not a matrix file, definitely long enough").unwrap();
        assert!(matches!(
            StoredMatrix::open(&pool, &path),
            Err(Error::BadHeader { .. })
        ));
    }
}
