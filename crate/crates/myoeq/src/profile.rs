//! Strategy profiles: one simplex block per player.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Action-set sizes per player. Fixes the order in which per-action
/// quantities are flattened into a single vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl Layout {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Dimension("layout needs at least one player".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::Dimension("every player needs at least one action".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Layout {
            sizes: sizes.to_vec(),
            offsets,
        })
    }

    pub fn players(&self) -> usize {
        self.sizes.len()
    }

    pub fn actions(&self, player: usize) -> usize {
        self.sizes[player]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Total number of (player, action) coordinates.
    pub fn flat_len(&self) -> usize {
        self.offsets.last().unwrap() + self.sizes.last().unwrap()
    }

    /// Flat index range of one player's block.
    pub fn block(&self, player: usize) -> Range<usize> {
        let o = self.offsets[player];
        o..o + self.sizes[player]
    }

    pub fn flat_index(&self, player: usize, action: usize) -> usize {
        debug_assert!(action < self.sizes[player]);
        self.offsets[player] + action
    }
}

/// A mixed-strategy profile: a simplex point per player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    blocks: Vec<SimplexPoint>,
}

impl MixedProfile {
    pub fn new(blocks: Vec<SimplexPoint>) -> Self {
        MixedProfile { blocks }
    }

    /// Uniform profile for a layout.
    pub fn barycenter(layout: &Layout) -> Self {
        MixedProfile {
            blocks: layout
                .sizes()
                .iter()
                .map(|&s| SimplexPoint::barycenter(s))
                .collect(),
        }
    }

    /// Rebuilds a profile from a flat vector, validating each block.
    pub fn from_flat(layout: &Layout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.flat_len() {
            return Err(Error::Dimension(format!(
                "flat vector has {} coordinates, layout expects {}",
                flat.len(),
                layout.flat_len()
            )));
        }
        let mut blocks = Vec::with_capacity(layout.players());
        for n in 0..layout.players() {
            blocks.push(SimplexPoint::new(flat[layout.block(n)].to_vec())?);
        }
        Ok(MixedProfile { blocks })
    }

    pub fn players(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, player: usize) -> &SimplexPoint {
        &self.blocks[player]
    }

    pub fn blocks(&self) -> &[SimplexPoint] {
        &self.blocks
    }

    pub fn prob(&self, player: usize, action: usize) -> f64 {
        self.blocks[player].get(action)
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.extend_from_slice(b.coords());
        }
        out
    }

    pub fn layout(&self) -> Result<Layout> {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        Layout::new(&sizes)
    }

    pub fn matches(&self, layout: &Layout) -> bool {
        self.blocks.len() == layout.players()
            && self
                .blocks
                .iter()
                .enumerate()
                .all(|(n, b)| b.len() == layout.actions(n))
    }

    pub fn dist_inf(&self, other: &MixedProfile) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.dist_inf(b))
            .fold(0.0, f64::max)
    }

    /// Euclidean norm of the flattened profile.
    pub fn norm(&self) -> f64 {
        self.flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Replaces one player's block.
    pub fn with_block(&self, player: usize, block: SimplexPoint) -> Self {
        let mut blocks = self.blocks.clone();
        blocks[player] = block;
        MixedProfile { blocks }
    }
}
