//! Binary raster masks and their run-length interchange format.
//!
//! Masks are stored row-major with the origin at the top-left: pixel
//! `(col, row)` lives at bit `row * width + col`. The RLE codec runs over
//! that bit stream and always starts with a zero-run, which may have length
//! zero when the first pixel is set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A width x height binary pixel grid backed by a packed bitset.
#[derive(Debug, Clone)]
pub struct RasterMask {
    width: u32,
    height: u32,
    words: Vec<u64>,
    count: u64,
}

impl PartialEq for RasterMask {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.words == other.words
    }
}

impl Eq for RasterMask {}

impl RasterMask {
    pub fn new(width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let bits = width as usize * height as usize;
        Self { width, height, words: vec![0; bits.div_ceil(64)], count: 0 }
    }

    /// Build a mask by evaluating `pred(col, row)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut pred: impl FnMut(u32, u32) -> bool) -> Self {
        let mut mask = Self::new(width, height);
        for row in 0..height {
            for col in 0..width {
                if pred(col, row) {
                    mask.set(col, row, true);
                }
            }
        }
        mask
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn same_size(&self, other: &RasterMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    fn index(&self, col: u32, row: u32) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row as usize * self.width as usize + col as usize
    }

    #[inline]
    pub fn get(&self, col: u32, row: u32) -> bool {
        let i = self.index(col, row);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, col: u32, row: u32, value: bool) {
        let i = self.index(col, row);
        let word = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        let was = *word & bit != 0;
        if value && !was {
            *word |= bit;
            self.count += 1;
        } else if !value && was {
            *word &= !bit;
            self.count -= 1;
        }
    }

    /// Number of set pixels (cached).
    pub fn population(&self) -> u64 {
        self.count
    }

    /// Recount set pixels from the raw bits. The cached population must
    /// always agree with this.
    pub fn population_recounted(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn intersection_count(&self, other: &RasterMask) -> u64 {
        debug_assert!(self.same_size(other));
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    pub fn union_count(&self, other: &RasterMask) -> u64 {
        debug_assert!(self.same_size(other));
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as u64)
            .sum()
    }

    pub fn is_disjoint(&self, other: &RasterMask) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Intersection of two same-sized masks.
    pub fn and(&self, other: &RasterMask) -> Result<RasterMask> {
        if !self.same_size(other) {
            return Err(Error::size_mismatch(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        let words: Vec<u64> = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        let count = words.iter().map(|w| w.count_ones() as u64).sum();
        Ok(RasterMask { width: self.width, height: self.height, words, count })
    }

    /// Iterate set pixels in row-major order as `(col, row)`. Walks the
    /// packed words and skips empty ones, so the cost scales with the
    /// population rather than the full grid.
    pub fn iter_set(&self) -> SetPixels<'_> {
        SetPixels { words: &self.words, width: self.width, word_idx: 0, current: self.words.first().copied().unwrap_or(0) }
    }

    /// Centroid of the set pixels (pixel-center convention), or `None` for an
    /// empty mask.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        if self.count == 0 {
            return None;
        }
        let mut sx = 0.0;
        let mut sy = 0.0;
        for (c, r) in self.iter_set() {
            sx += c as f64 + 0.5;
            sy += r as f64 + 0.5;
        }
        let n = self.count as f64;
        Some((sx / n, sy / n))
    }

    /// Tight bounding box of set pixels as `(col_min, row_min, col_max, row_max)`
    /// inclusive, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(u32, u32, u32, u32)> {
        if self.count == 0 {
            return None;
        }
        let mut cmin = self.width;
        let mut cmax = 0;
        let mut rmin = self.height;
        let mut rmax = 0;
        for (c, r) in self.iter_set() {
            cmin = cmin.min(c);
            cmax = cmax.max(c);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        Some((cmin, rmin, cmax, rmax))
    }

    /// Chebyshev dilation: a pixel is set in the result iff any input pixel
    /// within Chebyshev distance `k` is set (square structuring element).
    pub fn dilated(&self, k: u32) -> RasterMask {
        if k == 0 {
            return self.clone();
        }
        let k = k as i64;
        let mut out = RasterMask::new(self.width, self.height);
        for (c, r) in self.iter_set() {
            for dr in -k..=k {
                for dc in -k..=k {
                    let nc = c as i64 + dc;
                    let nr = r as i64 + dr;
                    if nc >= 0 && nr >= 0 && (nc as u32) < self.width && (nr as u32) < self.height {
                        out.set(nc as u32, nr as u32, true);
                    }
                }
            }
        }
        out
    }

    /// Chebyshev erosion with zero padding: a pixel survives iff its whole
    /// `(2k+1)^2` neighborhood is inside the image and set.
    pub fn eroded(&self, k: u32) -> RasterMask {
        if k == 0 {
            return self.clone();
        }
        let k = k as i64;
        let mut out = RasterMask::new(self.width, self.height);
        'pixel: for (c, r) in self.iter_set() {
            for dr in -k..=k {
                for dc in -k..=k {
                    let nc = c as i64 + dc;
                    let nr = r as i64 + dr;
                    if nc < 0
                        || nr < 0
                        || nc as u32 >= self.width
                        || nr as u32 >= self.height
                        || !self.get(nc as u32, nr as u32)
                    {
                        continue 'pixel;
                    }
                }
            }
            out.set(c, r, true);
        }
        out
    }

    /// Encode to the run-length record format.
    pub fn to_rle(&self) -> RleRecord {
        let total = self.width as usize * self.height as usize;
        let mut counts = Vec::new();
        let mut current = false; // RLE starts counting zeros
        let mut run: u32 = 0;
        for i in 0..total {
            let bit = self.words[i / 64] >> (i % 64) & 1 == 1;
            if bit == current {
                run += 1;
            } else {
                counts.push(run);
                current = bit;
                run = 1;
            }
        }
        counts.push(run);
        RleRecord { size: [self.height, self.width], counts }
    }
}

/// Iterator over set pixels of a [`RasterMask`] in row-major order.
pub struct SetPixels<'a> {
    words: &'a [u64],
    width: u32,
    word_idx: usize,
    current: u64,
}

impl Iterator for SetPixels<'_> {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        let index = self.word_idx * 64 + bit;
        let col = (index % self.width as usize) as u32;
        let row = (index / self.width as usize) as u32;
        Some((col, row))
    }
}

/// Run-length encoded mask: `size` is `[height, width]`, `counts` are run
/// lengths over the row-major bit stream with the first run counting zeros.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleRecord {
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

impl RleRecord {
    pub fn height(&self) -> u32 {
        self.size[0]
    }

    pub fn width(&self) -> u32 {
        self.size[1]
    }

    /// Decode back into a raster mask. Fails when the run lengths do not sum
    /// to exactly `height * width`.
    pub fn decode(&self) -> Result<RasterMask> {
        let total = self.height() as u64 * self.width() as u64;
        let sum: u64 = self.counts.iter().map(|&c| c as u64).sum();
        if sum != total {
            return Err(Error::size_mismatch(
                format!("runs summing to {total}"),
                format!("sum {sum}"),
            ));
        }
        let mut mask = RasterMask::new(self.width(), self.height());
        let mut i: usize = 0;
        let mut value = false;
        for &run in &self.counts {
            if value {
                for k in i..i + run as usize {
                    let col = (k % self.width() as usize) as u32;
                    let row = (k / self.width() as usize) as u32;
                    mask.set(col, row, true);
                }
            }
            i += run as usize;
            value = !value;
        }
        Ok(mask)
    }
}

/// True when every pair of masks is pixel-disjoint. Single pass over an
/// accumulated claim map, O(n * words) rather than pairwise.
pub fn all_disjoint(masks: &[RasterMask]) -> bool {
    let Some(first) = masks.first() else { return true };
    let mut claimed = vec![0u64; first.words.len()];
    for mask in masks {
        if mask.words.len() != claimed.len() {
            return false;
        }
        for (c, w) in claimed.iter_mut().zip(&mask.words) {
            if *c & w != 0 {
                return false;
            }
            *c |= w;
        }
    }
    true
}
