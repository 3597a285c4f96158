use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::types::{BlockId, Pos, Tick};

/// Initial placement of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub id: BlockId,
    /// Weight w: the block occupies a w x w footprint and needs w
    /// simultaneous same-face pushers to move.
    pub weight: u32,
    /// North-west corner of the footprint.
    pub anchor: Pos,
}

/// Static episode parameters. Loaded from a TOML file; see `configs/` in the
/// repository root for the schema by example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub width: u32,
    pub height: u32,
    /// Number of easternmost columns forming the goal band.
    pub goal_band_width: u32,
    #[serde(default)]
    pub blocks: Vec<BlockSpec>,
    pub agent_starts: Vec<Pos>,
    pub max_steps: Tick,
    #[serde(default)]
    pub seed: u64,
}

impl EnvConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, EnvError> {
        let cfg: EnvConfig =
            toml::from_str(text).map_err(|e| EnvError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// First column of the goal band.
    pub fn goal_band_start(&self) -> i32 {
        self.width as i32 - self.goal_band_width as i32
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width as i32 && p.y < self.height as i32
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let fail = |msg: String| Err(EnvError::ConfigInvalid(msg));
        if self.width < 4 || self.height < 4 {
            return fail(format!("grid must be at least 4x4, got {}x{}", self.width, self.height));
        }
        if self.goal_band_width == 0 {
            return fail("goal_band_width must be at least 1".into());
        }
        if self.goal_band_width >= self.width {
            return fail("goal band must leave room west of it".into());
        }
        if self.max_steps == 0 {
            return fail("max_steps must be positive".into());
        }
        if self.agent_starts.is_empty() {
            return fail("at least one agent is required".into());
        }

        let mut occupied: Vec<(Pos, String)> = Vec::new();
        for (i, spec) in self.blocks.iter().enumerate() {
            if spec.weight == 0 {
                return fail(format!("{} has zero weight", spec.id));
            }
            if spec.weight > self.goal_band_width {
                return fail(format!(
                    "{} (weight {}) cannot fit in a goal band of width {}",
                    spec.id, spec.weight, self.goal_band_width
                ));
            }
            if self.blocks.iter().skip(i + 1).any(|b| b.id == spec.id) {
                return fail(format!("duplicate block id {}", spec.id));
            }
            for cell in footprint_cells(spec.anchor, spec.weight) {
                if !self.in_bounds(cell) {
                    return fail(format!("{} extends out of bounds at {cell}", spec.id));
                }
                if cell.x >= self.goal_band_start() {
                    return fail(format!("{} starts inside the goal band", spec.id));
                }
                occupied.push((cell, spec.id.to_string()));
            }
        }
        for (i, &start) in self.agent_starts.iter().enumerate() {
            if !self.in_bounds(start) {
                return fail(format!("agent_{i} starts out of bounds at {start}"));
            }
            occupied.push((start, format!("agent_{i}")));
        }
        for (i, (cell, who)) in occupied.iter().enumerate() {
            if let Some((_, other)) = occupied.iter().skip(i + 1).find(|(c, _)| c == cell) {
                return fail(format!("{who} and {other} overlap at {cell}"));
            }
        }
        Ok(())
    }
}

/// Cells of a w x w footprint anchored at its north-west corner.
pub(crate) fn footprint_cells(anchor: Pos, weight: u32) -> impl Iterator<Item = Pos> {
    let w = weight as i32;
    (0..w).flat_map(move |dy| (0..w).map(move |dx| Pos::new(anchor.x + dx, anchor.y + dy)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_block_config() -> EnvConfig {
        EnvConfig {
            width: 10,
            height: 10,
            goal_band_width: 2,
            blocks: vec![
                BlockSpec { id: BlockId(1), weight: 1, anchor: Pos::new(5, 2) },
                BlockSpec { id: BlockId(2), weight: 2, anchor: Pos::new(2, 6) },
            ],
            agent_starts: vec![Pos::new(0, 0), Pos::new(0, 9)],
            max_steps: 150,
            seed: 0,
        }
    }

    #[test]
    fn accepts_reference_layout() {
        assert!(two_block_config().validate().is_ok());
    }

    #[test]
    fn rejects_out_of_bounds_footprint() {
        let mut cfg = two_block_config();
        // Weight-2 footprint at x=9 spills over the eastern edge.
        cfg.blocks[1].anchor = Pos::new(9, 0);
        assert!(matches!(cfg.validate(), Err(EnvError::ConfigInvalid(_))));
    }

    #[test]
    fn rejects_block_in_goal_band() {
        let mut cfg = two_block_config();
        cfg.blocks[0].anchor = Pos::new(8, 0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_overlaps_and_bad_band() {
        let mut cfg = two_block_config();
        cfg.blocks[1].anchor = Pos::new(5, 2);
        assert!(cfg.validate().is_err());

        let mut cfg = two_block_config();
        cfg.goal_band_width = 1; // smaller than the heaviest block
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_toml() {
        let text = r#"
            width = 10
            height = 10
            goal_band_width = 2
            max_steps = 150
            agent_starts = [{ x = 0, y = 0 }]

            [[blocks]]
            id = 1
            weight = 1
            anchor = { x = 5, y = 2 }
        "#;
        let cfg = EnvConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.blocks.len(), 1);
        assert_eq!(cfg.goal_band_start(), 8);
    }
}
