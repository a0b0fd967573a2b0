//! Finite metric measure spaces realized as weighted graphs.
//!
//! The metric is always the shortest-path metric over edge lengths, so the
//! space is geodesic and every ball, distance and doubling ratio below is
//! computed exactly from the all-pairs distance table.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Index of a vertex inside its [`Space`].
pub type Vertex = usize;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VertexRecord {
    pub id: String,
    pub measure: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub length: f64,
}

/// On-disk form of a space (JSON).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpaceFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone)]
pub struct Space {
    ids: Vec<String>,
    index: HashMap<String, Vertex>,
    id_rank: Vec<usize>,
    measure: Vec<f64>,
    adj: Vec<Vec<(Vertex, f64)>>,
    edges: Vec<(Vertex, Vertex, f64)>,
    dist: Vec<f64>,
    // Per center: all vertices sorted by distance, ties by index.
    order: Vec<Vec<Vertex>>,
}

impl Space {
    /// Builds and validates a space from vertex records and edges given by id.
    pub fn new(vertices: Vec<(String, f64)>, edges: Vec<(String, String, f64)>) -> Result<Self> {
        let n = vertices.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "a space needs at least 2 vertices, got {n}"
            )));
        }
        let mut index = HashMap::with_capacity(n);
        let mut ids = Vec::with_capacity(n);
        let mut measure = Vec::with_capacity(n);
        for (i, (id, mu)) in vertices.into_iter().enumerate() {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::Validation(format!(
                    "vertex `{id}` has non-positive measure {mu}"
                )));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate vertex id `{id}`")));
            }
            ids.push(id);
            measure.push(mu);
        }

        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        for (u, v, len) in edges {
            let a = *index
                .get(&u)
                .ok_or_else(|| Error::Validation(format!("edge endpoint `{u}` is not a vertex")))?;
            let b = *index
                .get(&v)
                .ok_or_else(|| Error::Validation(format!("edge endpoint `{v}` is not a vertex")))?;
            if a == b {
                return Err(Error::Validation(format!("self-loop at `{u}`")));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::Validation(format!(
                    "edge `{u}`-`{v}` has non-positive length {len}"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Validation(format!("duplicate edge `{u}`-`{v}`")));
            }
            adj[a].push((b, len));
            adj[b].push((a, len));
            edge_list.push((a, b, len));
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|&(w, _)| w);
        }

        let mut sorted: Vec<Vertex> = (0..n).collect();
        sorted.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        let mut id_rank = vec![0; n];
        for (rank, &v) in sorted.iter().enumerate() {
            id_rank[v] = rank;
        }

        let mut space = Space {
            ids,
            index,
            id_rank,
            measure,
            adj,
            edges: edge_list,
            dist: Vec::new(),
            order: Vec::new(),
        };
        space.dist = all_pairs(&space.adj);
        if space.dist.iter().any(|d| d.is_infinite()) {
            return Err(Error::Validation("graph is not connected".into()));
        }
        space.order = (0..n)
            .map(|c| {
                let mut o: Vec<Vertex> = (0..n).collect();
                o.sort_by(|&a, &b| space.dist(c, a).total_cmp(&space.dist(c, b)).then(a.cmp(&b)));
                o
            })
            .collect();
        Ok(space)
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        Self::new(
            file.vertices.into_iter().map(|v| (v.id, v.measure)).collect(),
            file.edges.into_iter().map(|e| (e.u, e.v, e.length)).collect(),
        )
    }

    /// Parses and validates the JSON space format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            vertices: (0..self.len())
                .map(|v| VertexRecord {
                    id: self.ids[v].clone(),
                    measure: self.measure[v],
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b, len)| EdgeRecord {
                    u: self.ids[a].clone(),
                    v: self.ids[b].clone(),
                    length: len,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("space serializes")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.len()
    }

    pub fn id(&self, v: Vertex) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Rank of the vertex id in lexicographic id order.
    pub fn id_rank(&self, v: Vertex) -> usize {
        self.id_rank[v]
    }

    pub fn vertex(&self, id: &str) -> Result<Vertex> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{v}")))
        }
    }

    pub fn measure(&self, v: Vertex) -> f64 {
        self.measure[v]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, f64)] {
        &self.adj[v]
    }

    pub fn edges(&self) -> &[(Vertex, Vertex, f64)] {
        &self.edges
    }

    pub fn edge_length(&self, u: Vertex, v: Vertex) -> Option<f64> {
        self.adj
            .get(u)?
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, len)| len)
    }

    /// Shortest-path distance between two vertex indices.
    #[inline]
    pub fn dist(&self, x: Vertex, y: Vertex) -> f64 {
        self.dist[x * self.len() + y]
    }

    pub fn dist_by_id(&self, x: &str, y: &str) -> Result<f64> {
        Ok(self.dist(self.vertex(x)?, self.vertex(y)?))
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// All vertices sorted by distance from `center` (ties by index).
    pub fn by_distance(&self, center: Vertex) -> &[Vertex] {
        &self.order[center]
    }

    /// The open ball `{v : d(center, v) < radius}`.
    pub fn ball(&self, center: Vertex, radius: f64) -> Result<Ball> {
        self.check_vertex(center)?;
        if !(radius > 0.0) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        let mut members: Vec<Vertex> = self.order[center]
            .iter()
            .copied()
            .take_while(|&v| self.dist(center, v) < radius)
            .collect();
        members.sort_unstable();
        Ok(Ball {
            center,
            radius,
            members,
        })
    }

    pub fn ball_measure(&self, center: Vertex, radius: f64) -> f64 {
        self.order[center]
            .iter()
            .take_while(|&&v| self.dist(center, v) < radius)
            .map(|&v| self.measure[v])
            .sum()
    }

    /// One representative ball per distinct member set among all balls
    /// `B(y, t)` with `containing ∈ B(y, t)` and `0 < t < max_radius`.
    ///
    /// For a center `y` the member set only changes when `t` passes one of
    /// the distances `d(y, v)`; on `(c_j, c_{j+1}]` it equals
    /// `{v : d(y, v) <= c_j}`. The representative radius is the midpoint of
    /// the admissible part of that interval.
    pub fn enumerate_distinct_balls(&self, containing: Vertex, max_radius: f64) -> Result<Vec<Ball>> {
        self.check_vertex(containing)?;
        if !(max_radius > 0.0) {
            return Err(invalid(format!(
                "max_radius must be positive, got {max_radius}"
            )));
        }
        let mut seen: BTreeSet<Vec<Vertex>> = BTreeSet::new();
        let mut out = Vec::new();
        for y in self.vertices() {
            let dyx = self.dist(y, containing);
            if dyx >= max_radius {
                continue;
            }
            let order = &self.order[y];
            let mut i = 0;
            while i < order.len() {
                let c = self.dist(y, order[i]);
                if c >= max_radius {
                    break;
                }
                let mut j = i;
                while j < order.len() && self.dist(y, order[j]) == c {
                    j += 1;
                }
                if c >= dyx {
                    let upper = if j < order.len() {
                        self.dist(y, order[j]).min(max_radius)
                    } else {
                        max_radius
                    };
                    let mut members = order[..j].to_vec();
                    members.sort_unstable();
                    if seen.insert(members.clone()) {
                        out.push(Ball {
                            center: y,
                            radius: 0.5 * (c + upper),
                            members,
                        });
                    }
                }
                i = j;
            }
        }
        Ok(out)
    }

    /// Least `D` with `μ(B(x, 2r)) <= D μ(B(x, r))` for every vertex `x` and
    /// every `r > 0`.
    ///
    /// Both ball measures are piecewise constant in `r`, left-open and
    /// right-closed between consecutive points of `{c, c/2}` over the
    /// distances `c` from `x`, so evaluating at those points is exact.
    pub fn doubling_constant(&self) -> f64 {
        let mut best: f64 = 1.0;
        for x in self.vertices() {
            let mut radii: Vec<f64> = Vec::with_capacity(2 * self.len());
            for v in self.vertices() {
                let c = self.dist(x, v);
                if c > 0.0 {
                    radii.push(c);
                    radii.push(0.5 * c);
                }
            }
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            for r in radii {
                let small = self.ball_measure(x, r);
                let large = self.ball_measure(x, 2.0 * r);
                best = best.max(large / small);
            }
        }
        best
    }
}

fn all_pairs(adj: &[Vec<(Vertex, f64)>]) -> Vec<f64> {
    let n = adj.len();
    let mut out = vec![f64::INFINITY; n * n];
    for s in 0..n {
        let row = &mut out[s * n..(s + 1) * n];
        row[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((OrderedFloat(0.0), s)));
        while let Some(Reverse((OrderedFloat(d), v))) = heap.pop() {
            if d > row[v] {
                continue;
            }
            for &(w, len) in &adj[v] {
                let nd = d + len;
                if nd < row[w] {
                    row[w] = nd;
                    heap.push(Reverse((OrderedFloat(nd), w)));
                }
            }
        }
    }
    // Symmetrize so that d(x, y) and d(y, x) are bitwise equal.
    for a in 0..n {
        for b in (a + 1)..n {
            let m = out[a * n + b].min(out[b * n + a]);
            out[a * n + b] = m;
            out[b * n + a] = m;
        }
    }
    out
}

/// An open ball with its member set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vertex,
    pub radius: f64,
    /// Sorted vertex indices.
    pub members: Vec<Vertex>,
}

impl Ball {
    pub fn contains(&self, v: Vertex) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn measure(&self, space: &Space) -> f64 {
        self.members.iter().map(|&v| space.measure(v)).sum()
    }

    /// The ball with the same center and `factor` times the radius.
    pub fn scaled(&self, space: &Space, factor: f64) -> Result<Ball> {
        space.ball(self.center, self.radius * factor)
    }
}

/// On-disk form of a domain (JSON): the ids of the vertices in Ω.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DomainFile {
    pub omega: Vec<String>,
}

/// An "open set" Ω: a vertex subset with a nonempty complement.
#[derive(Debug, Clone)]
pub struct Domain<'s> {
    space: &'s Space,
    inside: Vec<bool>,
    // d(v, Ω^c), zero on the complement.
    to_complement: Vec<f64>,
}

impl<'s> Domain<'s> {
    pub fn new(space: &'s Space, omega: &[Vertex]) -> Result<Self> {
        let mut inside = vec![false; space.len()];
        for &v in omega {
            space.check_vertex(v)?;
            inside[v] = true;
        }
        Self::from_mask(space, inside)
    }

    pub fn from_mask(space: &'s Space, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != space.len() {
            return Err(invalid("domain mask length does not match the space"));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::Validation("Ω must be nonempty".into()));
        }
        if inside.iter().all(|&b| b) {
            return Err(Error::Validation("the complement of Ω must be nonempty".into()));
        }
        let to_complement = space
            .vertices()
            .map(|x| {
                if !inside[x] {
                    return 0.0;
                }
                space
                    .vertices()
                    .filter(|&v| !inside[v])
                    .map(|v| space.dist(x, v))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Ok(Domain {
            space,
            inside,
            to_complement,
        })
    }

    pub fn from_ids(space: &'s Space, ids: &[String]) -> Result<Self> {
        let omega = ids
            .iter()
            .map(|id| space.vertex(id))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, &omega)
    }

    pub fn from_json(space: &'s Space, text: &str) -> Result<Self> {
        let file: DomainFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_ids(space, &file.omega)
    }

    pub fn to_file(&self) -> DomainFile {
        DomainFile {
            omega: self.omega().map(|v| self.space.id(v).to_string()).collect(),
        }
    }

    pub fn space(&self) -> &'s Space {
        self.space
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.inside[v]
    }

    pub fn mask(&self) -> &[bool] {
        &self.inside
    }

    /// Mask of Ω^c.
    pub fn complement_mask(&self) -> Vec<bool> {
        self.inside.iter().map(|&b| !b).collect()
    }

    pub fn omega(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.space.vertices().filter(move |&v| self.inside[v])
    }

    pub fn complement(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.space.vertices().filter(move |&v| !self.inside[v])
    }

    /// `d(x, Ω^c)` for `x ∈ Ω`.
    pub fn dist_to_complement(&self, x: Vertex) -> Result<f64> {
        self.space.check_vertex(x)?;
        if !self.inside[x] {
            return Err(Error::NotInDomain(self.space.id(x).to_string()));
        }
        Ok(self.to_complement[x])
    }

    /// `d(v, Ω^c)` for any vertex (zero on the complement).
    pub fn complement_distance(&self, v: Vertex) -> f64 {
        self.to_complement[v]
    }

    pub fn require_inside(&self, x: Vertex) -> Result<f64> {
        self.dist_to_complement(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path3() -> Space {
        Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0), ("b".into(), "c".into(), 1.0)],
        )
        .unwrap()
    }

    fn sets(balls: &[Ball], s: &Space) -> BTreeSet<Vec<String>> {
        balls
            .iter()
            .map(|b| b.members.iter().map(|&v| s.id(v).to_string()).collect())
            .collect()
    }

    #[test]
    fn smallest_space() {
        let s = Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0)],
        )
        .unwrap();
        assert_eq!(s.dist_by_id("a", "b").unwrap(), 1.0);
        assert_eq!(s.doubling_constant(), 2.0);
    }

    #[test]
    fn path_metric() {
        let s = path3();
        assert_eq!(s.dist_by_id("a", "c").unwrap(), 2.0);
        assert_eq!(s.dist_by_id("b", "b").unwrap(), 0.0);
        assert!(matches!(s.dist_by_id("a", "z"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn rejects_bad_input() {
        let zero_len = Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 0.0)],
        );
        assert!(matches!(zero_len, Err(Error::Validation(_))));
        let disconnected = Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0)],
        );
        assert!(matches!(disconnected, Err(Error::Validation(_))));
        let single = Space::new(vec![("a".into(), 1.0)], vec![]);
        assert!(matches!(single, Err(Error::Validation(_))));
        let zero_mu = Space::new(
            vec![("a".into(), 0.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0)],
        );
        assert!(matches!(zero_mu, Err(Error::Validation(_))));
        let dup = Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0), ("b".into(), "a".into(), 2.0)],
        );
        assert!(matches!(dup, Err(Error::Validation(_))));
        assert!(matches!(Space::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[{"id":"a","measure":1},{"id":"b","measure":2}],
                       "edges":[{"u":"a","v":"b","length":1.5}]}"#;
        let s = Space::from_json(text).unwrap();
        assert_eq!(s.dist(0, 1), 1.5);
        let again = Space::from_json(&s.to_json()).unwrap();
        assert_eq!(again.to_file(), s.to_file());
    }

    #[test]
    fn cycle_with_long_edge() {
        // Brute force over the two simple a-d paths: direct 10, around 3.
        let s = Space::new(
            vec![
                ("a".into(), 1.0),
                ("b".into(), 1.0),
                ("c".into(), 1.0),
                ("d".into(), 1.0),
            ],
            vec![
                ("a".into(), "b".into(), 1.0),
                ("b".into(), "c".into(), 1.0),
                ("c".into(), "d".into(), 1.0),
                ("d".into(), "a".into(), 10.0),
            ],
        )
        .unwrap();
        assert_eq!(s.dist_by_id("a", "d").unwrap(), 3.0);
    }

    #[test]
    fn balls_use_strict_inequality() {
        let s = path3();
        let b = s.vertex("b").unwrap();
        assert_eq!(s.ball(b, 1.0).unwrap().members, vec![b]);
        assert_eq!(s.ball(b, 1.5).unwrap().members, vec![0, 1, 2]);
        assert_eq!(s.ball(b, 0.5).unwrap().members, vec![b]);
        assert!(s.ball(b, 0.0).is_err());
    }

    #[test]
    fn distinct_balls_on_path() {
        let s = path3();
        let b = s.vertex("b").unwrap();
        let got = sets(&s.enumerate_distinct_balls(b, 1.5).unwrap(), &s);
        let want: BTreeSet<Vec<String>> = [vec!["b"], vec!["a", "b"], vec!["b", "c"], vec!["a", "b", "c"]]
            .iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect())
            .collect();
        assert_eq!(got, want);

        let only_self = sets(&s.enumerate_distinct_balls(b, 0.7).unwrap(), &s);
        assert_eq!(only_self, [vec!["b".to_string()]].into_iter().collect());

        let a = s.vertex("a").unwrap();
        let from_a = s.enumerate_distinct_balls(a, 2.5).unwrap();
        assert!(from_a
            .iter()
            .any(|ball| ball.members == vec![0, 1, 2]));
        for ball in &from_a {
            assert!(ball.radius < 2.5 && ball.contains(a));
            assert_eq!(s.ball(ball.center, ball.radius).unwrap().members, ball.members);
        }
    }

    #[test]
    fn doubling_on_weighted_path() {
        // Enumerating every (center, critical radius) pair by hand:
        // B(b,1) = {b} has measure 1 while B(b,2) = {a,b,c} has 10.
        let s = Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 8.0)],
            vec![("a".into(), "b".into(), 1.0), ("b".into(), "c".into(), 1.0)],
        )
        .unwrap();
        let a = s.vertex("a").unwrap();
        assert_eq!(s.ball_measure(a, 4.0) / s.ball_measure(a, 2.0), 5.0);
        assert_eq!(s.doubling_constant(), 10.0);
    }

    #[test]
    fn domain_distances() {
        let s = path3();
        let dom = Domain::new(&s, &[0, 1]).unwrap();
        assert_eq!(dom.dist_to_complement(1).unwrap(), 1.0);
        assert_eq!(dom.dist_to_complement(0).unwrap(), 2.0);
        assert!(matches!(dom.dist_to_complement(2), Err(Error::NotInDomain(_))));
        assert!(Domain::new(&s, &[]).is_err());
        assert!(Domain::new(&s, &[0, 1, 2]).is_err());
    }
}
