//! Example spaces: paths, cycles, grids, grids with a removed pattern, and
//! random connected graphs. Each generator also proposes a domain Ω.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SplitMix64;
use crate::space::{Space, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    Center,
    Cross,
    Corner,
}

/// A generated space with its proposed Ω.
#[derive(Debug, Clone)]
pub struct Generated {
    pub space: Space,
    pub omega: Vec<Vertex>,
}

/// Optional random vertex measures drawn from `[lo, hi)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Weights {
    pub measure: Option<(f64, f64)>,
    pub seed: u64,
}

impl Weights {
    fn measures(&self, n: usize) -> Vec<f64> {
        match self.measure {
            None => vec![1.0; n],
            Some((lo, hi)) => {
                let mut rng = SplitMix64::new(self.seed);
                (0..n).map(|_| rng.range(lo, hi)).collect()
            }
        }
    }
}

fn build(ids: Vec<String>, edges: Vec<(usize, usize, f64)>, weights: &Weights) -> Result<Space> {
    let measures = weights.measures(ids.len());
    let edges = edges.into_iter().map(|(u, v, l)| (ids[u].clone(), ids[v].clone(), l)).collect();
    Space::new(ids.into_iter().zip(measures).collect(), edges)
}

fn check_size(what: &str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(invalid(format!("{what} must be at least {min}, got {n}")));
    }
    Ok(())
}

/// `v0 - v1 - ... - v(n-1)` with unit edges; Ω is everything but the last
/// vertex.
pub fn path(n: usize, weights: &Weights) -> Result<Generated> {
    check_size("path length", n, 2)?;
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    Ok(Generated {
        space: build(ids, edges, weights)?,
        omega: (0..n - 1).collect(),
    })
}

/// The three-vertex path `a - b - c` used throughout the examples.
pub fn abc() -> Space {
    Space::new(
        vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 1.0)],
        vec![("a".into(), "b".into(), 1.0), ("b".into(), "c".into(), 1.0)],
    )
    .expect("valid example")
}

/// A cycle with unit edges; Ω is everything but `v0`.
pub fn cycle(n: usize, weights: &Weights) -> Result<Generated> {
    check_size("cycle length", n, 3)?;
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Ok(Generated {
        space: build(ids, edges, weights)?,
        omega: (1..n).collect(),
    })
}

/// Vertex id of grid cell `(r, c)`.
pub fn grid_id(r: usize, c: usize) -> String {
    format!("r{r}c{c}")
}

fn grid_space(rows: usize, cols: usize, weights: &Weights) -> Result<Space> {
    check_size("grid rows", rows, 1)?;
    check_size("grid columns", cols, 1)?;
    check_size("grid size", rows * cols, 2)?;
    let ids: Vec<String> = (0..rows).flat_map(|r| (0..cols).map(move |c| grid_id(r, c))).collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    build(ids, edges, weights)
}

/// A `rows × cols` grid with unit edges; Ω is the interior, so the boundary
/// is the complement.
pub fn grid(rows: usize, cols: usize, weights: &Weights) -> Result<Generated> {
    check_size("grid rows", rows, 3)?;
    check_size("grid columns", cols, 3)?;
    let space = grid_space(rows, cols, weights)?;
    let omega = (0..rows * cols)
        .filter(|&v| {
            let (r, c) = (v / cols, v % cols);
            r > 0 && c > 0 && r + 1 < rows && c + 1 < cols
        })
        .collect();
    Ok(Generated { space, omega })
}

/// A grid whose complement is a vertex pattern; Ω is everything else.
pub fn grid_minus(rows: usize, cols: usize, pattern: Pattern, weights: &Weights) -> Result<Generated> {
    check_size("grid rows", rows, 2)?;
    check_size("grid columns", cols, 2)?;
    let space = grid_space(rows, cols, weights)?;
    let (cr, cc) = (rows / 2, cols / 2);
    let removed = |r: usize, c: usize| match pattern {
        Pattern::Center => r == cr && c == cc,
        Pattern::Cross => r == cr || c == cc,
        Pattern::Corner => r == 0 && c == 0,
    };
    let omega = (0..rows * cols).filter(|&v| !removed(v / cols, v % cols)).collect();
    Ok(Generated { space, omega })
}

/// A grid whose right column is Ω^c, crossed by a wall column `wall` whose
/// vertices have measure `measure` and whose horizontal edges have length
/// `edge`. Other vertices have measure 1 and other edges length 1.
pub fn walled_grid(rows: usize, cols: usize, wall: usize, edge: f64, measure: f64) -> Result<Generated> {
    check_size("grid rows", rows, 1)?;
    check_size("grid columns", cols, 3)?;
    if wall == 0 || wall + 1 >= cols {
        return Err(invalid(format!("wall column must lie in 1..{}, got {wall}", cols - 1)));
    }
    let ids: Vec<String> = (0..rows).flat_map(|r| (0..cols).map(move |c| grid_id(r, c))).collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                let l = if c == wall || c + 1 == wall { edge } else { 1.0 };
                edges.push((v, v + 1, l));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    let measures = (0..rows * cols).map(|v| if v % cols == wall { measure } else { 1.0 });
    let es = edges.into_iter().map(|(u, v, l)| (ids[u].clone(), ids[v].clone(), l)).collect();
    let space = Space::new(ids.into_iter().zip(measures).collect(), es)?;
    let omega = (0..rows * cols).filter(|&v| v % cols != cols - 1).collect();
    Ok(Generated { space, omega })
}

/// Ranges for [`random_connected`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraph {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub extra_edge_prob: f64,
    pub measure: (f64, f64),
    pub length: (f64, f64),
}

impl Default for RandomGraph {
    fn default() -> Self {
        Self {
            min_vertices: 2,
            max_vertices: 12,
            extra_edge_prob: 0.25,
            measure: (0.5, 4.0),
            length: (0.5, 2.0),
        }
    }
}

/// A random spanning tree plus random extra edges, with a random nonempty
/// proper Ω.
pub fn random_connected(cfg: &RandomGraph, rng: &mut SplitMix64) -> Result<Generated> {
    check_size("vertex count", cfg.min_vertices, 2)?;
    if cfg.max_vertices < cfg.min_vertices {
        return Err(invalid("max_vertices must be >= min_vertices"));
    }
    let n = cfg.min_vertices + rng.below(cfg.max_vertices - cfg.min_vertices + 1);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut adjacent = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.below(v);
        adjacent[u][v] = true;
        edges.push((u, v, rng.range(cfg.length.0, cfg.length.1)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !adjacent[u][v] && rng.chance(cfg.extra_edge_prob) {
                adjacent[u][v] = true;
                edges.push((u, v, rng.range(cfg.length.0, cfg.length.1)));
            }
        }
    }
    let measures: Vec<f64> = (0..n).map(|_| rng.range(cfg.measure.0, cfg.measure.1)).collect();
    let es = edges.into_iter().map(|(u, v, l)| (ids[u].clone(), ids[v].clone(), l)).collect();
    let space = Space::new(ids.into_iter().zip(measures).collect(), es)?;
    let outside = rng.below(n);
    let mut omega: Vec<Vertex> = (0..n).filter(|&v| v != outside && rng.chance(0.7)).collect();
    if omega.is_empty() {
        omega.push((outside + 1) % n);
    }
    Ok(Generated { space, omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Domain;

    #[test]
    fn shapes() {
        let p = path(3, &Weights::default()).unwrap();
        assert_eq!(p.space.dist(0, 2), 2.0);
        assert_eq!(p.omega, vec![0, 1]);
        let g = grid_minus(5, 5, Pattern::Center, &Weights::default()).unwrap();
        assert_eq!(g.omega.len(), 24);
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        assert_eq!(dom.complement().collect::<Vec<_>>(), vec![12]);
        let cross = grid_minus(9, 9, Pattern::Cross, &Weights::default()).unwrap();
        assert_eq!(cross.omega.len(), 64);
        assert!(cross.space.doubling_constant() >= 1.0);
        let inner = grid(4, 4, &Weights::default()).unwrap();
        assert_eq!(inner.omega.len(), 4);
        assert!(path(1, &Weights::default()).is_err());
        let w = walled_grid(3, 5, 3, 0.1, 0.5).unwrap();
        assert_eq!(w.omega.len(), 12);
        assert!((w.space.dist(0, 4) - 2.2).abs() < 1e-12);
        assert_eq!(w.space.measure(3), 0.5);
        assert!(walled_grid(3, 5, 4, 0.1, 0.5).is_err());
    }

    #[test]
    fn random_graphs_are_valid() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..50 {
            let g = random_connected(&RandomGraph::default(), &mut rng).unwrap();
            Domain::new(&g.space, &g.omega).unwrap();
            assert!(g.space.len() <= 12);
        }
    }
}
