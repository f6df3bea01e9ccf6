//! The five perturbation primitives.
//!
//! Spatial ops act only on pixels inside the given region and are the
//! identity elsewhere; an empty region makes every spatial op the identity.
//! Whole pixels move together, so a 3-channel value never splits across
//! positions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{FrameGrid, MotionMask};

/// Pixel membership for one frame: indices in row-major pixel order plus a
/// dense membership grid for O(1) lookups.
#[derive(Debug, Clone)]
pub struct PixelRegion {
    indices: Vec<usize>,
    member: Vec<bool>,
}

impl PixelRegion {
    pub fn from_mask(mask: &MotionMask) -> Self {
        Self::from_member(mask.as_slice().to_vec())
    }

    pub fn complement_of(mask: &MotionMask) -> Self {
        Self::from_member(mask.as_slice().iter().map(|&b| !b).collect())
    }

    pub fn full(height: usize, width: usize) -> Self {
        Self::from_member(vec![true; height * width])
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Self::from_member(vec![false; height * width])
    }

    fn from_member(member: Vec<bool>) -> Self {
        let indices = member
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Self { indices, member }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains_index(&self, pixel: usize) -> bool {
        self.member[pixel]
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn copy_pixel(src: &FrameGrid, from: usize, dst: &mut FrameGrid, to: usize) {
    let c = src.channels();
    for ch in 0..c {
        let v = src.values()[from * c + ch];
        dst.values_mut()[to * c + ch] = v;
    }
}

/// Permutes pixel positions within the region; the value multiset is
/// preserved exactly.
pub fn pixel_shuffle(frame: &FrameGrid, region: &PixelRegion, rng: &mut impl Rng) -> FrameGrid {
    if region.len() < 2 {
        return frame.clone();
    }
    let mut perm: Vec<usize> = (0..region.len()).collect();
    perm.shuffle(rng);
    let mut out = frame.clone();
    for (slot, &source) in perm.iter().enumerate() {
        copy_pixel(frame, region.indices()[source], &mut out, region.indices()[slot]);
    }
    out
}

/// With probability `p` per region pixel, overwrites it with the value of a
/// uniformly chosen *other* region pixel (sampled from the input frame).
pub fn random_pixel_replace(
    frame: &FrameGrid,
    region: &PixelRegion,
    p: f64,
    rng: &mut impl Rng,
) -> FrameGrid {
    if region.len() < 2 {
        return frame.clone();
    }
    let mut out = frame.clone();
    for (i, &pixel) in region.indices().iter().enumerate() {
        if rng.gen::<f64>() < p {
            let mut j = rng.gen_range(0..region.len() - 1);
            if j >= i {
                j += 1;
            }
            copy_pixel(frame, region.indices()[j], &mut out, pixel);
        }
    }
    out
}

/// Zeroes one randomly placed `block_h` x `block_w` block, restricted to
/// the region.
pub fn block_occlude(
    frame: &FrameGrid,
    region: &PixelRegion,
    block_h: usize,
    block_w: usize,
    rng: &mut impl Rng,
) -> FrameGrid {
    if region.is_empty() {
        return frame.clone();
    }
    let (height, width, channels) = frame.shape();
    let oy = rng.gen_range(0..=height.saturating_sub(block_h));
    let ox = rng.gen_range(0..=width.saturating_sub(block_w));
    let mut out = frame.clone();
    for y in oy..(oy + block_h).min(height) {
        for x in ox..(ox + block_w).min(width) {
            let pixel = y * width + x;
            if region.contains_index(pixel) {
                for ch in 0..channels {
                    out.values_mut()[pixel * channels + ch] = 0.0;
                }
            }
        }
    }
    out
}

/// Adds N(0, sigma^2) noise to every region value, clamped to [0, 1].
/// `sigma == 0` is the exact identity.
pub fn local_gaussian_noise(
    frame: &FrameGrid,
    region: &PixelRegion,
    sigma: f64,
    rng: &mut impl Rng,
) -> FrameGrid {
    if region.is_empty() || sigma == 0.0 {
        return frame.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated non-negative");
    let channels = frame.channels();
    let mut out = frame.clone();
    for &pixel in region.indices() {
        for ch in 0..channels {
            let idx = pixel * channels + ch;
            let v = out.values()[idx] + normal.sample(rng);
            out.values_mut()[idx] = v.clamp(0.0, 1.0);
        }
    }
    out
}

/// Permutes whole frames with a Fisher-Yates shuffle; returns the shuffled
/// frames and the permutation (`output[i] = input[perm[i]]`).
pub fn temporal_shuffle(frames: &[FrameGrid], rng: &mut impl Rng) -> (Vec<FrameGrid>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..frames.len()).collect();
    perm.shuffle(rng);
    let shuffled = perm.iter().map(|&i| frames[i].clone()).collect();
    (shuffled, perm)
}
