//! Grid workspace and the breadth-first reachability check.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::FeasibilityError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manipulator {
    pub name: String,
    pub base: [i32; 2],
    /// Reach radius in meters.
    pub reach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub name: String,
    /// Inclusive cell rectangle `[x0, y0, x1, y1]`.
    pub rect: [i32; 4],
    #[serde(rename = "unsafe", default)]
    pub is_unsafe: bool,
}

impl Region {
    pub fn contains(&self, (x, y): (i32, i32)) -> bool {
        let [x0, y0, x1, y1] = self.rect;
        x0 <= x && x <= x1 && y0 <= y && y <= y1
    }

    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let [x0, y0, x1, y1] = self.rect;
        (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| (x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Workspace {
    pub cell_size: f64,
    pub width: i32,
    pub height: i32,
    #[serde(default)]
    pub obstacles: Vec<[i32; 2]>,
    pub manipulators: Vec<Manipulator>,
    pub regions: Vec<Region>,
}

impl Workspace {
    pub fn from_json(text: &str) -> Result<Self, FeasibilityError> {
        let ws: Workspace = serde_json::from_str(text).map_err(|e| FeasibilityError::Format {
            line: e.line(),
            col: e.column(),
            message: e.to_string(),
        })?;
        ws.check()?;
        Ok(ws)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("workspace serializes");
        s.push('\n');
        s
    }

    fn check(&self) -> Result<(), FeasibilityError> {
        let bad = |m: String| Err(FeasibilityError::Invalid(m));
        if self.width <= 0 || self.height <= 0 || self.cell_size <= 0.0 {
            return bad("grid dimensions and cell size must be positive".into());
        }
        let obstacles = self.obstacle_set();
        for m in &self.manipulators {
            let base = (m.base[0], m.base[1]);
            if !self.in_grid(base) || obstacles.contains(&base) {
                return bad(format!("base of `{}` must be a free grid cell", m.name));
            }
            if m.reach.is_nan() || m.reach <= 0.0 {
                return bad(format!("reach of `{}` must be positive", m.name));
            }
        }
        for r in &self.regions {
            let [x0, y0, x1, y1] = r.rect;
            if x0 > x1 || y0 > y1 || !self.in_grid((x0, y0)) || !self.in_grid((x1, y1)) {
                return bad(format!("region `{}` must lie within the grid", r.name));
            }
        }
        Ok(())
    }

    pub fn in_grid(&self, (x, y): (i32, i32)) -> bool {
        0 <= x && x < self.width && 0 <= y && y < self.height
    }

    pub fn obstacle_set(&self) -> HashSet<(i32, i32)> {
        self.obstacles.iter().map(|o| (o[0], o[1])).collect()
    }

    pub fn manipulator(&self, name: &str) -> Result<&Manipulator, FeasibilityError> {
        self.manipulators
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| FeasibilityError::Unknown(format!("manipulator `{name}`")))
    }

    pub fn region(&self, name: &str) -> Result<&Region, FeasibilityError> {
        self.regions
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| FeasibilityError::Unknown(format!("region `{name}`")))
    }

    /// True iff some cell of `region` is reachable from the manipulator's base
    /// through free cells that all lie within its reach.
    pub fn reachable(&self, manip: &str, region: &str) -> Result<bool, FeasibilityError> {
        let m = self.manipulator(manip)?;
        let r = self.region(region)?;
        Ok(self.search(m, |c| r.contains(c)))
    }

    pub fn collision_free(&self, manip: &str, cell: (i32, i32)) -> Result<bool, FeasibilityError> {
        let m = self.manipulator(manip)?;
        if !self.in_grid(cell) {
            return Err(FeasibilityError::OutOfBounds(cell.0, cell.1));
        }
        Ok(self.search(m, |c| c == cell))
    }

    fn within_reach(&self, m: &Manipulator, (x, y): (i32, i32)) -> bool {
        let dx = f64::from(x - m.base[0]);
        let dy = f64::from(y - m.base[1]);
        self.cell_size * (dx * dx + dy * dy).sqrt() <= m.reach + 1e-9
    }

    fn search(&self, m: &Manipulator, target: impl Fn((i32, i32)) -> bool) -> bool {
        let obstacles = self.obstacle_set();
        let start = (m.base[0], m.base[1]);
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            if target(c) {
                return true;
            }
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = (c.0 + dx, c.1 + dy);
                if self.in_grid(n) && !obstacles.contains(&n) && self.within_reach(m, n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(width: i32, height: i32, reach: f64) -> Workspace {
        Workspace {
            cell_size: 0.1,
            width,
            height,
            obstacles: vec![],
            manipulators: vec![Manipulator { name: "arm".into(), base: [0, 0], reach }],
            regions: vec![Region { name: "near".into(), rect: [1, 0, 1, 0], is_unsafe: false }],
        }
    }

    #[test]
    fn adjacent_region_is_reachable() {
        assert!(open(5, 5, 0.2).reachable("arm", "near").unwrap());
    }

    #[test]
    fn enclosed_region_is_not_reachable() {
        let mut ws = open(5, 5, 1.0);
        ws.regions[0].rect = [3, 3, 3, 3];
        ws.obstacles = vec![[2, 3], [4, 3], [3, 2], [3, 4]];
        assert!(!ws.reachable("arm", "near").unwrap());
    }

    #[test]
    fn reach_limits_every_path_cell() {
        let mut ws = open(10, 1, 0.3);
        ws.regions[0].rect = [5, 0, 5, 0];
        assert!(!ws.reachable("arm", "near").unwrap());
        ws.manipulators[0].reach = 0.5;
        assert!(ws.reachable("arm", "near").unwrap());
    }

    #[test]
    fn collision_free_targets() {
        let mut ws = open(6, 1, 1.0);
        assert!(ws.collision_free("arm", (5, 0)).unwrap());
        ws.obstacles = vec![[5, 0]];
        assert!(!ws.collision_free("arm", (5, 0)).unwrap());
        assert!(matches!(ws.collision_free("arm", (9, 0)), Err(FeasibilityError::OutOfBounds(9, 0))));
    }

    #[test]
    fn unknown_names_are_errors() {
        let ws = open(3, 3, 1.0);
        assert!(ws.reachable("leg", "near").is_err());
        assert!(ws.reachable("arm", "moon").is_err());
    }

    #[test]
    fn invalid_files_are_rejected() {
        let mut ws = open(3, 3, 1.0);
        ws.obstacles = vec![[0, 0]];
        assert!(Workspace::from_json(&ws.to_json()).is_err());
        let e = Workspace::from_json("{\n  \"cellSize\": 0.1,\n  \"bogus\": 1}").unwrap_err();
        assert!(matches!(e, FeasibilityError::Format { line: 3, .. }));
    }
}
