//! Overlay rendering: masks as flat colors, annotation points as crosses.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::Result;
use crate::mask::RasterMask;
use crate::rng::Rng;
use crate::scene::Scene;

/// Deterministic per-index mask color. Channels are floored away from black
/// so every mask stays visible on the dark background.
pub fn mask_color(index: usize) -> Rgb<u8> {
    let bits = Rng::new(0x6D61_736B ^ index as u64).next_u64();
    let channel = |b: u64| 60 + (b % 196) as u8;
    Rgb([channel(bits >> 16), channel(bits >> 8), channel(bits)])
}

const BACKGROUND: Rgb<u8> = Rgb([12, 12, 12]);
const CROSS: Rgb<u8> = Rgb([255, 255, 255]);

/// Render masks over a dark background with the scene's annotation points
/// drawn as 3x3 crosses, and write a PNG. Identical inputs produce identical
/// bytes.
pub fn render_overlay(scene: &Scene, masks: &[RasterMask], out_path: &Path) -> Result<()> {
    let mut img = RgbImage::from_pixel(scene.width(), scene.height(), BACKGROUND);
    for (i, mask) in masks.iter().enumerate() {
        let color = mask_color(i);
        for (c, r) in mask.iter_set() {
            img.put_pixel(c, r, color);
        }
    }
    for p in scene.points() {
        let (col, row) = p.pixel();
        for (dc, dr) in [(0i64, 0i64), (-1, 0), (1, 0), (0, -1), (0, 1)] {
            let c = col + dc;
            let r = row + dr;
            if c >= 0 && r >= 0 && (c as u32) < scene.width() && (r as u32) < scene.height() {
                img.put_pixel(c as u32, r as u32, CROSS);
            }
        }
    }
    img.save(out_path)?;
    Ok(())
}
