//! Weighted closed triangulated surfaces.
//!
//! A [`WeightedTriangulation`] holds the combinatorics `(V, E, F)` of a closed
//! surface together with one inversive distance per edge and the background
//! geometry the radii are realized in. Edges are derived from the faces; the
//! weights are keyed by unordered vertex pairs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Background geometry of the circle packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Euclidean => f.write_str("euclidean"),
            Geometry::Hyperbolic => f.write_str("hyperbolic"),
        }
    }
}

/// Which admissibility condition the weights must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRegime {
    /// Every `I_ij >= 0`.
    #[default]
    Nonnegative,
    /// Every `I_ij > -1` plus the three per-face product inequalities
    /// `I_ij + I_ik I_jk >= 0` (and permutations).
    ExtendedNote,
}

impl fmt::Display for WeightRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRegime::Nonnegative => f.write_str("nonnegative"),
            WeightRegime::ExtendedNote => f.write_str("extended-note"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("topology error: {0}")]
    Topology(TopologyDefect),
    #[error("weight error: {0}")]
    Weight(String),
}

/// A structural defect that prevents the faces from forming a closed surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyDefect {
    Empty,
    VertexOutOfRange { face: usize, vertex: usize },
    RepeatedVertex { face: usize },
    DuplicateFace { first: usize, second: usize },
    /// Edge contained in only one face.
    BoundaryEdge { edge: (usize, usize) },
    /// Edge contained in three or more faces.
    NonManifoldEdge { edge: (usize, usize), faces: usize },
    Disconnected { unreachable: usize },
}

impl fmt::Display for TopologyDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyDefect::Empty => write!(f, "no vertices or no faces"),
            TopologyDefect::VertexOutOfRange { face, vertex } => {
                write!(f, "face {face} references vertex {vertex} out of range")
            }
            TopologyDefect::RepeatedVertex { face } => write!(f, "face {face} repeats a vertex"),
            TopologyDefect::DuplicateFace { first, second } => {
                write!(f, "faces {first} and {second} span the same vertex triple")
            }
            TopologyDefect::BoundaryEdge { edge } => {
                write!(f, "boundary edge [{}, {}] lies in a single face", edge.0, edge.1)
            }
            TopologyDefect::NonManifoldEdge { edge, faces } => {
                write!(f, "non-manifold edge [{}, {}] lies in {faces} faces", edge.0, edge.1)
            }
            TopologyDefect::Disconnected { unreachable } => {
                write!(f, "edge graph is disconnected (vertex {unreachable} unreachable from 0)")
            }
        }
    }
}

/// Closed triangulated surface with one inversive distance per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTriangulation {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    /// Sorted unordered pairs `(lo, hi)`.
    edges: Vec<(usize, usize)>,
    edge_lookup: HashMap<(usize, usize), usize>,
    /// For face `(a, b, c)`: indices of edges `bc`, `ac`, `ab`, i.e. the edge
    /// opposite each corner.
    face_edges: Vec<[usize; 3]>,
    weights: Vec<f64>,
    geometry: Geometry,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl WeightedTriangulation {
    /// Builds and validates a surface. `weight` is queried once per derived edge.
    pub fn new(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        geometry: Geometry,
        mut weight: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Result<Self, SurfaceError> {
        let topo = |d| SurfaceError::Topology(d);
        if vertex_count == 0 || faces.is_empty() {
            return Err(topo(TopologyDefect::Empty));
        }

        let mut seen_triples: HashMap<[usize; 3], usize> = HashMap::new();
        let mut edge_faces: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= vertex_count {
                    return Err(topo(TopologyDefect::VertexOutOfRange { face: fi, vertex: v }));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(topo(TopologyDefect::RepeatedVertex { face: fi }));
            }
            let mut sorted = *f;
            sorted.sort_unstable();
            if let Some(&first) = seen_triples.get(&sorted) {
                return Err(topo(TopologyDefect::DuplicateFace { first, second: fi }));
            }
            seen_triples.insert(sorted, fi);
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[0], f[2])] {
                *edge_faces.entry(key(a, b)).or_insert(0) += 1;
            }
        }
        for (&edge, &count) in &edge_faces {
            match count {
                2 => {}
                1 => return Err(topo(TopologyDefect::BoundaryEdge { edge })),
                n => return Err(topo(TopologyDefect::NonManifoldEdge { edge, faces: n })),
            }
        }

        let edges: Vec<(usize, usize)> = edge_faces.keys().copied().collect();
        let edge_lookup: HashMap<_, _> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

        // connectivity over the edge graph, all vertices included
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut visited = vec![false; vertex_count];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(unreachable) = visited.iter().position(|&v| !v) {
            return Err(topo(TopologyDefect::Disconnected { unreachable }));
        }

        let face_edges = faces
            .iter()
            .map(|f| {
                [
                    edge_lookup[&key(f[1], f[2])],
                    edge_lookup[&key(f[0], f[2])],
                    edge_lookup[&key(f[0], f[1])],
                ]
            })
            .collect();

        let mut weights = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let w = weight(a, b)
                .ok_or_else(|| SurfaceError::Weight(format!("missing weight for edge [{a}, {b}]")))?;
            if !w.is_finite() {
                return Err(SurfaceError::Weight(format!("non-finite weight on edge [{a}, {b}]")));
            }
            weights.push(w);
        }

        Ok(Self { vertex_count, faces, edges, edge_lookup, face_edges, weights, geometry })
    }

    /// Surface with the same inversive distance on every edge.
    pub fn with_uniform_weight(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        geometry: Geometry,
        weight: f64,
    ) -> Result<Self, SurfaceError> {
        Self::new(vertex_count, faces, geometry, |_, _| Some(weight))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Copy of the surface realized in another background geometry.
    pub fn with_geometry(&self, geometry: Geometry) -> Self {
        Self { geometry, ..self.clone() }
    }

    /// Edge indices opposite each corner of face `f`.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_index(a, b).map(|e| self.weights[e])
    }

    /// `N - |E| + |F|`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Number of faces incident to each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for f in &self.faces {
            for &v in f {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn validate_weights(&self, regime: WeightRegime) -> WeightReport {
        let mut violations = Vec::new();
        match regime {
            WeightRegime::Nonnegative => {
                for (e, &w) in self.weights.iter().enumerate() {
                    if w < 0.0 {
                        violations.push(WeightViolation::Negative { edge: self.edges[e], value: w });
                    }
                }
            }
            WeightRegime::ExtendedNote => {
                for (e, &w) in self.weights.iter().enumerate() {
                    if w <= -1.0 {
                        violations.push(WeightViolation::NotAboveMinusOne {
                            edge: self.edges[e],
                            value: w,
                        });
                    }
                }
                for (fi, fe) in self.face_edges.iter().enumerate() {
                    let [a, b, c] = fe.map(|e| self.weights[e]);
                    for (edge_slot, value) in [(0, a + b * c), (1, b + a * c), (2, c + a * b)] {
                        if value < 0.0 {
                            violations.push(WeightViolation::FaceInequality {
                                face: fi,
                                edge: self.edges[fe[edge_slot]],
                                value,
                            });
                        }
                    }
                }
            }
        }
        WeightReport { regime, violations }
    }
}

/// A single failed weight condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WeightViolation {
    Negative { edge: (usize, usize), value: f64 },
    NotAboveMinusOne { edge: (usize, usize), value: f64 },
    /// `I_e + I_f I_g < 0` for the face, where `e` is the reported edge.
    FaceInequality { face: usize, edge: (usize, usize), value: f64 },
}

impl fmt::Display for WeightViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightViolation::Negative { edge, value } => {
                write!(f, "edge [{}, {}] has negative weight {value}", edge.0, edge.1)
            }
            WeightViolation::NotAboveMinusOne { edge, value } => {
                write!(f, "edge [{}, {}] has weight {value} <= -1", edge.0, edge.1)
            }
            WeightViolation::FaceInequality { face, edge, value } => write!(
                f,
                "face {face}: product inequality for edge [{}, {}] evaluates to {value} < 0",
                edge.0, edge.1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightReport {
    pub regime: WeightRegime,
    pub violations: Vec<WeightViolation>,
}

impl WeightReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

// ---------------------------------------------------------------------------
// file formats

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    geometry: Geometry,
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    weights: WeightsSpec,
    #[serde(default)]
    regime: Option<WeightRegime>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum WeightsSpec {
    Uniform { uniform: f64 },
    PerEdge(Vec<EdgeWeight>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeWeight {
    edge: [usize; 2],
    value: f64,
}

/// A parsed mesh file: the surface plus the weight regime it declares.
#[derive(Debug, Clone)]
pub struct MeshDocument {
    pub surface: WeightedTriangulation,
    /// `None` when the file does not name a regime.
    pub regime: Option<WeightRegime>,
}

pub fn parse_mesh(text: &str) -> Result<MeshDocument, SurfaceError> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| SurfaceError::Parse(e.to_string()))?;
    let surface = match file.weights {
        WeightsSpec::Uniform { uniform } => {
            WeightedTriangulation::with_uniform_weight(file.vertex_count, file.faces, file.geometry, uniform)?
        }
        WeightsSpec::PerEdge(list) => {
            let mut map = HashMap::with_capacity(list.len());
            for EdgeWeight { edge: [a, b], value } in list {
                if a == b {
                    return Err(SurfaceError::Weight(format!("weight given for loop [{a}, {b}]")));
                }
                if let Some(prev) = map.insert(key(a, b), value) {
                    if prev != value {
                        return Err(SurfaceError::Weight(format!(
                            "conflicting weights {prev} and {value} for edge [{a}, {b}]"
                        )));
                    }
                }
            }
            let surface = WeightedTriangulation::new(file.vertex_count, file.faces, file.geometry, |a, b| {
                map.get(&key(a, b)).copied()
            })?;
            if let Some((a, b)) = map.keys().find(|&&(a, b)| surface.edge_index(a, b).is_none()) {
                return Err(SurfaceError::Weight(format!("weight given for non-edge [{a}, {b}]")));
            }
            surface
        }
    };
    Ok(MeshDocument { surface, regime: file.regime })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<MeshDocument, SurfaceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| SurfaceError::Io { path: path.display().to_string(), source })?;
    parse_mesh(&text)
}

/// Reads a mesh file and returns the validated surface.
pub fn load_surface(path: impl AsRef<Path>) -> Result<WeightedTriangulation, SurfaceError> {
    load_mesh(path).map(|doc| doc.surface)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiiFile {
    radii: Vec<f64>,
}

pub fn parse_radii(text: &str) -> Result<Vec<f64>, SurfaceError> {
    let file: RadiiFile = serde_json::from_str(text).map_err(|e| SurfaceError::Parse(e.to_string()))?;
    Ok(file.radii)
}

pub fn load_radii(path: impl AsRef<Path>) -> Result<Vec<f64>, SurfaceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| SurfaceError::Io { path: path.display().to_string(), source })?;
    parse_radii(&text)
}

/// Serializes a radii vector in the `{"radii": [...]}` layout.
pub fn radii_to_json(radii: &[f64]) -> String {
    serde_json::to_string_pretty(&RadiiFile { radii: radii.to_vec() }).expect("radii serialize")
}

// ---------------------------------------------------------------------------
// built-in surfaces

/// Boundary of a tetrahedron, vertices 0..4.
pub fn tetrahedron(geometry: Geometry, weight: f64) -> WeightedTriangulation {
    WeightedTriangulation::with_uniform_weight(
        4,
        vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
        geometry,
        weight,
    )
    .expect("tetrahedron is a closed surface")
}

/// Seven-vertex torus: faces `{i, i+1, i+3}` and `{i, i+2, i+3}` mod 7.
pub fn csaszar_torus(geometry: Geometry, weight: f64) -> WeightedTriangulation {
    WeightedTriangulation::with_uniform_weight(7, csaszar_faces(), geometry, weight)
        .expect("seven-vertex torus is a closed surface")
}

fn csaszar_faces() -> Vec<[usize; 3]> {
    (0..7)
        .flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]])
        .collect()
}

/// Genus-two surface: two seven-vertex tori glued along the face `{0, 1, 3}`.
pub fn genus_two(geometry: Geometry, weight: f64) -> WeightedTriangulation {
    let removed = |f: &[usize; 3]| {
        let mut s = *f;
        s.sort_unstable();
        s == [0, 1, 3]
    };
    let relabel = [0, 1, 7, 3, 8, 9, 10];
    let first = csaszar_faces().into_iter().filter(|f| !removed(f));
    let second = csaszar_faces().into_iter().filter(|f| !removed(f)).map(|f| f.map(|v| relabel[v]));
    WeightedTriangulation::with_uniform_weight(11, first.chain(second).collect(), geometry, weight)
        .expect("glued tori form a closed surface")
}
