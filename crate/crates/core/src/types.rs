//! Shared identifiers and grid geometry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Simulation timestep counter. One tick = one joint environment step.
pub type Tick = u64;

/// Deserialize a numeric id that may arrive as an integer or, when used
/// as a JSON object key, as a string (optionally carrying `prefix`).
fn deserialize_id<'de, D: serde::Deserializer<'de>>(
    deserializer: D,
    prefix: &'static str,
) -> Result<u32, D::Error> {
    struct IdVisitor(&'static str);

    impl serde::de::Visitor<'_> for IdVisitor {
        type Value = u32;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "an id as an integer or `{}<n>` string", self.0)
        }

        fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<u32, E> {
            u32::try_from(v).map_err(E::custom)
        }

        fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<u32, E> {
            u32::try_from(v).map_err(E::custom)
        }

        fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<u32, E> {
            s.strip_prefix(self.0).unwrap_or(s).parse().map_err(E::custom)
        }
    }

    deserializer.deserialize_any(IdVisitor(prefix))
}

/// Agent identifier. Renders as `agent_<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl<'de> Deserialize<'de> for AgentId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserialize_id(deserializer, "agent_").map(AgentId)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent_{}", self.0)
    }
}

/// Block identifier. Renders as `block_<n>`; this is also the textual form
/// used by the plan grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl<'de> Deserialize<'de> for BlockId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserialize_id(deserializer, "block_").map(BlockId)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block_{}", self.0)
    }
}

impl FromStr for BlockId {
    type Err = String;

    /// Accepts `block_7` (canonical) or a bare integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("block_").unwrap_or(s);
        digits
            .parse::<u32>()
            .map(BlockId)
            .map_err(|_| format!("invalid block id `{s}`"))
    }
}

/// Cardinal direction. Doubles as a block face label: the `N` face of a
/// block is its northern edge, and pushing from the `N` face moves the
/// block south.
///
/// `ALL` fixes the canonical tie-break order (N, S, E, W) used by
/// pathfinding and retreat-direction fallbacks.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Dir {
    N,
    S,
    E,
    W,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::N, Dir::S, Dir::E, Dir::W];

    /// Unit cell offset. North is -y, east is +x.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::N => (0, -1),
            Dir::S => (0, 1),
            Dir::E => (1, 0),
            Dir::W => (-1, 0),
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::S => Dir::N,
            Dir::E => Dir::W,
            Dir::W => Dir::E,
        }
    }

    /// The two directions orthogonal to `self`, in canonical N,S,E,W order.
    pub fn perpendicular(self) -> [Dir; 2] {
        match self {
            Dir::N | Dir::S => [Dir::E, Dir::W],
            Dir::E | Dir::W => [Dir::N, Dir::S],
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dir::N => "N",
            Dir::S => "S",
            Dir::E => "E",
            Dir::W => "W",
        };
        f.write_str(s)
    }
}

impl FromStr for Dir {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Dir::N),
            "S" => Ok(Dir::S),
            "E" => Ok(Dir::E),
            "W" => Ok(Dir::W),
            other => Err(format!("invalid side `{other}`")),
        }
    }
}

/// Grid cell position. `x` grows eastward, `y` grows southward; the goal
/// band occupies the easternmost columns.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn step(self, dir: Dir) -> Pos {
        let (dx, dy) = dir.delta();
        Pos { x: self.x + dx, y: self.y + dy }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_roundtrips() {
        for d in Dir::ALL {
            assert_eq!(d.to_string().parse::<Dir>().unwrap(), d);
            assert_eq!(d.opposite().opposite(), d);
        }
    }

    #[test]
    fn block_id_parses_both_forms() {
        assert_eq!("block_3".parse::<BlockId>().unwrap(), BlockId(3));
        assert_eq!("12".parse::<BlockId>().unwrap(), BlockId(12));
        assert!("block_x".parse::<BlockId>().is_err());
    }

    #[test]
    fn ids_roundtrip_as_json_map_keys() {
        use std::collections::BTreeMap;
        let map: BTreeMap<AgentId, BlockId> =
            [(AgentId(0), BlockId(2)), (AgentId(3), BlockId(1))].into_iter().collect();
        let json = serde_json::to_string(&map).unwrap();
        assert_eq!(json, r#"{"0":2,"3":1}"#);
        let back: BTreeMap<AgentId, BlockId> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn steps_move_one_cell() {
        let p = Pos::new(2, 2);
        assert_eq!(p.step(Dir::N), Pos::new(2, 1));
        assert_eq!(p.step(Dir::S), Pos::new(2, 3));
        assert_eq!(p.step(Dir::E), Pos::new(3, 2));
        assert_eq!(p.step(Dir::W), Pos::new(1, 2));
    }
}
