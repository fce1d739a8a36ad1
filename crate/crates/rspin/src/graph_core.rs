//! Pre-stable dual graphs.
//!
//! A [`PreStableGraph`] is stored half-edge first: every half-edge carries
//! its vertex (`sigma0`), its partner under the involution `sigma1` (itself
//! for tails), its successor under the cyclic-order map `sigma2` (itself for
//! internal half-edges) and the index of the boundary block it belongs to.
//! Vertices carry their kind, the small genus `genus_hat` and the number of
//! boundaries `n`. Blocks with no members are legal and are simply the block
//! indices below `n` that no half-edge uses.
//!
//! Values are immutable once built. Mutating operations live in
//! [`crate::graph_ops`] and always produce fresh graphs with dense ids.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index of a vertex inside one graph value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

/// Dense index of a half-edge inside one graph value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfEdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for HalfEdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfEdgeKind {
    Boundary,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexData {
    pub kind: VertexKind,
    pub genus_hat: u32,
    pub num_boundaries: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfEdgeData {
    pub kind: HalfEdgeKind,
    pub vertex: VertexId,
    pub sigma1: HalfEdgeId,
    pub sigma2: HalfEdgeId,
    /// Block index for boundary half-edges of open vertices.
    pub block: Option<u32>,
    pub cb: bool,
    pub marking: Option<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("half-edge {half} refers to missing vertex {vertex}")]
    MissingVertex { half: usize, vertex: usize },
    #[error("half-edge {half} has sigma1 image {target} out of range")]
    Sigma1OutOfRange { half: usize, target: usize },
    #[error("half-edge {half} has sigma2 image {target} out of range")]
    Sigma2OutOfRange { half: usize, target: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex set is empty or not connected")]
    Disconnected,
    #[error("vertex set is not a union of whole components")]
    NotAComponent,
    #[error("no edge contains half-edge {0}")]
    UnknownEdge(HalfEdgeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreStableGraph {
    vertices: Vec<VertexData>,
    half_edges: Vec<HalfEdgeData>,
}

impl PreStableGraph {
    /// Assembles a graph from raw maps; only index ranges are checked here.
    pub fn from_parts(
        vertices: Vec<VertexData>,
        half_edges: Vec<HalfEdgeData>,
    ) -> Result<Self, StructureError> {
        let nv = vertices.len();
        let nh = half_edges.len();
        for (i, h) in half_edges.iter().enumerate() {
            if h.vertex.0 >= nv {
                return Err(StructureError::MissingVertex {
                    half: i,
                    vertex: h.vertex.0,
                });
            }
            if h.sigma1.0 >= nh {
                return Err(StructureError::Sigma1OutOfRange {
                    half: i,
                    target: h.sigma1.0,
                });
            }
            if h.sigma2.0 >= nh {
                return Err(StructureError::Sigma2OutOfRange {
                    half: i,
                    target: h.sigma2.0,
                });
            }
        }
        Ok(Self {
            vertices,
            half_edges,
        })
    }

    /// Clones the raw maps back out.
    pub fn parts(&self) -> (Vec<VertexData>, Vec<HalfEdgeData>) {
        (self.vertices.clone(), self.half_edges.clone())
    }

    pub fn vertex_data(&self, v: VertexId) -> &VertexData {
        &self.vertices[v.0]
    }

    pub fn half_edge_data(&self, h: HalfEdgeId) -> &HalfEdgeData {
        &self.half_edges[h.0]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_half_edges(&self) -> usize {
        self.half_edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn half_edge_ids(&self) -> impl Iterator<Item = HalfEdgeId> {
        (0..self.half_edges.len()).map(HalfEdgeId)
    }

    pub fn vertex_kind(&self, v: VertexId) -> VertexKind {
        self.vertices[v.0].kind
    }

    pub fn is_open(&self, v: VertexId) -> bool {
        self.vertex_kind(v) == VertexKind::Open
    }

    pub fn genus_hat(&self, v: VertexId) -> u32 {
        self.vertices[v.0].genus_hat
    }

    pub fn num_boundaries(&self, v: VertexId) -> u32 {
        self.vertices[v.0].num_boundaries
    }

    pub fn kind(&self, h: HalfEdgeId) -> HalfEdgeKind {
        self.half_edges[h.0].kind
    }

    pub fn is_boundary(&self, h: HalfEdgeId) -> bool {
        self.kind(h) == HalfEdgeKind::Boundary
    }

    pub fn sigma0(&self, h: HalfEdgeId) -> VertexId {
        self.half_edges[h.0].vertex
    }

    pub fn sigma1(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.half_edges[h.0].sigma1
    }

    pub fn sigma2(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.half_edges[h.0].sigma2
    }

    pub fn block(&self, h: HalfEdgeId) -> Option<u32> {
        self.half_edges[h.0].block
    }

    pub fn is_cb(&self, h: HalfEdgeId) -> bool {
        self.half_edges[h.0].cb
    }

    pub fn marking(&self, h: HalfEdgeId) -> Option<u32> {
        self.half_edges[h.0].marking
    }

    pub fn is_tail(&self, h: HalfEdgeId) -> bool {
        self.sigma1(h) == h
    }

    /// Boundary tails, elements of T^B.
    pub fn boundary_tails(&self) -> Vec<HalfEdgeId> {
        self.half_edge_ids()
            .filter(|&h| self.is_tail(h) && self.is_boundary(h))
            .collect()
    }

    /// Internal tails that are not contracted boundary tails.
    pub fn internal_tails(&self) -> Vec<HalfEdgeId> {
        self.half_edge_ids()
            .filter(|&h| self.is_tail(h) && !self.is_boundary(h) && !self.is_cb(h))
            .collect()
    }

    pub fn cb_tails(&self) -> Vec<HalfEdgeId> {
        self.half_edge_ids().filter(|&h| self.is_cb(h)).collect()
    }

    pub fn half_edges_at(&self, v: VertexId) -> Vec<HalfEdgeId> {
        self.half_edge_ids()
            .filter(|&h| self.sigma0(h) == v)
            .collect()
    }

    /// k(v): number of boundary half-edges at v.
    pub fn k(&self, v: VertexId) -> usize {
        self.half_edge_ids()
            .filter(|&h| self.sigma0(h) == v && self.is_boundary(h))
            .count()
    }

    /// l(v): number of internal half-edges at v.
    pub fn l(&self, v: VertexId) -> usize {
        self.half_edge_ids()
            .filter(|&h| self.sigma0(h) == v && !self.is_boundary(h))
            .count()
    }

    /// g(v): `2 genus_hat + n - 1` for open vertices, `genus_hat` for closed ones.
    pub fn vertex_genus(&self, v: VertexId) -> i64 {
        let d = &self.vertices[v.0];
        match d.kind {
            VertexKind::Open => 2 * d.genus_hat as i64 + d.num_boundaries as i64 - 1,
            VertexKind::Closed => d.genus_hat as i64,
        }
    }

    pub fn is_stable_vertex(&self, v: VertexId) -> bool {
        let g = self.vertex_genus(v);
        let k = self.k(v) as i64;
        let l = self.l(v) as i64;
        match self.vertex_kind(v) {
            VertexKind::Open => k + 2 * l > 2 - 2 * g,
            VertexKind::Closed => l > 2 - 2 * g,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.vertex_ids().all(|v| self.is_stable_vertex(v))
    }

    /// Edges as ordered pairs `(h, sigma1 h)` with `h < sigma1 h`.
    pub fn edges(&self) -> Vec<(HalfEdgeId, HalfEdgeId)> {
        self.half_edge_ids()
            .filter_map(|h| {
                let p = self.sigma1(h);
                (h < p).then_some((h, p))
            })
            .collect()
    }

    pub fn is_smooth(&self) -> bool {
        self.edges().is_empty() && self.cb_tails().is_empty()
    }

    /// The ordered members of each block of `v`, following `sigma2` from the
    /// smallest member. Empty blocks yield empty lists.
    pub fn blocks(&self, v: VertexId) -> Vec<Vec<HalfEdgeId>> {
        let n = self.num_boundaries(v) as usize;
        let mut out = vec![Vec::new(); n];
        for (b, slot) in out.iter_mut().enumerate() {
            let members: BTreeSet<HalfEdgeId> = self
                .half_edge_ids()
                .filter(|&h| {
                    self.sigma0(h) == v && self.is_boundary(h) && self.block(h) == Some(b as u32)
                })
                .collect();
            if let Some(&start) = members.iter().next() {
                let mut cur = start;
                let mut seen = BTreeSet::new();
                loop {
                    if !members.contains(&cur) || !seen.insert(cur) {
                        break;
                    }
                    slot.push(cur);
                    cur = self.sigma2(cur);
                    if cur == start {
                        break;
                    }
                }
            }
        }
        out
    }

    /// Neighbouring vertices through edges, with multiplicity.
    fn adjacency(&self) -> Vec<Vec<(VertexId, HalfEdgeId)>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (a, b) in self.edges() {
            let va = self.sigma0(a);
            let vb = self.sigma0(b);
            adj[va.0].push((vb, a));
            adj[vb.0].push((va, b));
        }
        adj
    }

    /// Vertices reachable from `start` without crossing the edge containing `skip`.
    fn reach(&self, start: VertexId, skip: Option<HalfEdgeId>) -> BTreeSet<VertexId> {
        let adj = self.adjacency();
        let skip_pair = skip.map(|h| {
            let p = self.sigma1(h);
            (h.min(p), h.max(p))
        });
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(w, h) in &adj[v.0] {
                let p = self.sigma1(h);
                if Some((h.min(p), h.max(p))) == skip_pair {
                    continue;
                }
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut assigned = vec![false; self.num_vertices()];
        let mut out = Vec::new();
        for v in self.vertex_ids() {
            if assigned[v.0] {
                continue;
            }
            let comp: Vec<VertexId> = self.reach(v, None).into_iter().collect();
            for w in &comp {
                assigned[w.0] = true;
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() > 0 && self.components().len() == 1
    }

    /// The two sides left after removing the edge through `h`, if it disconnects:
    /// first the side of `sigma0(h)`, then the side of `sigma0(sigma1 h)`.
    pub fn edge_sides(&self, h: HalfEdgeId) -> Option<(Vec<VertexId>, Vec<VertexId>)> {
        let p = self.sigma1(h);
        if p == h {
            return None;
        }
        let a = self.sigma0(h);
        let b = self.sigma0(p);
        let side_a = self.reach(a, Some(h));
        if side_a.contains(&b) {
            return None;
        }
        let side_b = self.reach(b, Some(h));
        Some((side_a.into_iter().collect(), side_b.into_iter().collect()))
    }

    /// True when the vertex set has no open vertex and carries no cb tail.
    pub fn part_is_closed_without_cb(&self, part: &[VertexId]) -> bool {
        part.iter().all(|&v| !self.is_open(v))
            && self
                .half_edge_ids()
                .all(|h| !(self.is_cb(h) && part.contains(&self.sigma0(h))))
    }
}

// ---------------------------------------------------------------------------
// Builder

/// Incremental construction of well-formed graphs from ordered block lists.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<VertexData>,
    halves: Vec<HalfEdgeData>,
    orders: Vec<Vec<Vec<HalfEdgeId>>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open_vertex(&mut self, genus_hat: u32, num_boundaries: u32) -> VertexId {
        self.vertices.push(VertexData {
            kind: VertexKind::Open,
            genus_hat,
            num_boundaries,
        });
        self.orders.push(vec![Vec::new(); num_boundaries as usize]);
        VertexId(self.vertices.len() - 1)
    }

    pub fn closed_vertex(&mut self, genus_hat: u32) -> VertexId {
        self.vertices.push(VertexData {
            kind: VertexKind::Closed,
            genus_hat,
            num_boundaries: 0,
        });
        self.orders.push(Vec::new());
        VertexId(self.vertices.len() - 1)
    }

    fn push(&mut self, v: VertexId, kind: HalfEdgeKind, block: Option<u32>) -> HalfEdgeId {
        let id = HalfEdgeId(self.halves.len());
        self.halves.push(HalfEdgeData {
            kind,
            vertex: v,
            sigma1: id,
            sigma2: id,
            block,
            cb: false,
            marking: None,
        });
        id
    }

    /// Appends a boundary half-edge at the end of the cyclic order of `block`.
    pub fn boundary(&mut self, v: VertexId, block: u32) -> HalfEdgeId {
        let id = self.push(v, HalfEdgeKind::Boundary, Some(block));
        let orders = &mut self.orders[v.0];
        if orders.len() <= block as usize {
            orders.resize(block as usize + 1, Vec::new());
        }
        orders[block as usize].push(id);
        id
    }

    pub fn internal(&mut self, v: VertexId) -> HalfEdgeId {
        self.push(v, HalfEdgeKind::Internal, None)
    }

    pub fn pair(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.halves[a.0].sigma1 = b;
        self.halves[b.0].sigma1 = a;
    }

    pub fn set_cb(&mut self, h: HalfEdgeId) {
        self.halves[h.0].cb = true;
    }

    pub fn mark(&mut self, h: HalfEdgeId, m: u32) {
        self.halves[h.0].marking = Some(m);
    }

    /// Fills `sigma2` from the block orders and numbers unmarked tails after
    /// the largest marking already in use.
    pub fn build(mut self) -> PreStableGraph {
        for orders in &self.orders {
            for cycle in orders {
                for (i, &h) in cycle.iter().enumerate() {
                    self.halves[h.0].sigma2 = cycle[(i + 1) % cycle.len()];
                }
            }
        }
        let is_tail = |h: &HalfEdgeData, i: usize| h.sigma1.0 == i;
        for kind in [HalfEdgeKind::Boundary, HalfEdgeKind::Internal] {
            let mut next = self
                .halves
                .iter()
                .filter(|h| h.kind == kind)
                .filter_map(|h| h.marking)
                .max()
                .unwrap_or(0);
            for i in 0..self.halves.len() {
                let h = &self.halves[i];
                if h.kind == kind && is_tail(h, i) && !h.cb && h.marking.is_none() {
                    next += 1;
                    self.halves[i].marking = Some(next);
                }
            }
        }
        PreStableGraph {
            vertices: self.vertices,
            half_edges: self.halves,
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrestableViolation {
    Sigma1NotInvolution(HalfEdgeId),
    Sigma1KindMismatch(HalfEdgeId),
    CbNotInternalTail(HalfEdgeId),
    ClosedVertexHasBoundaryHalfEdge(VertexId, HalfEdgeId),
    ClosedVertexHasBoundaries(VertexId),
    OpenVertexWithoutBoundary(VertexId),
    BoundaryHalfEdgeWithoutBlock(HalfEdgeId),
    BlockOutOfRange(HalfEdgeId),
    InternalHalfEdgeInBlock(HalfEdgeId),
    Sigma2MovesInternal(HalfEdgeId),
    Sigma2LeavesBlock(HalfEdgeId),
    Sigma2NotSingleCycle { vertex: VertexId, block: u32 },
    MarkingOnNonTail(HalfEdgeId),
    MissingMarking(HalfEdgeId),
    MarkingNotBijective { boundary: bool },
}

impl fmt::Display for PrestableViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PrestableViolation::*;
        match self {
            Sigma1NotInvolution(h) => write!(f, "sigma1 is not an involution at {h}"),
            Sigma1KindMismatch(h) => write!(f, "sigma1 changes half-edge kind at {h}"),
            CbNotInternalTail(h) => write!(f, "cb tail {h} is not an internal tail"),
            ClosedVertexHasBoundaryHalfEdge(v, h) => {
                write!(f, "closed vertex has boundary half-edge ({v}, {h})")
            }
            ClosedVertexHasBoundaries(v) => write!(f, "closed vertex {v} has n > 0"),
            OpenVertexWithoutBoundary(v) => write!(f, "open vertex {v} has n = 0"),
            BoundaryHalfEdgeWithoutBlock(h) => write!(f, "boundary half-edge {h} lies in no block"),
            BlockOutOfRange(h) => write!(f, "block index of {h} is not below n"),
            InternalHalfEdgeInBlock(h) => write!(f, "internal half-edge {h} lies in a block"),
            Sigma2MovesInternal(h) => write!(f, "sigma2 moves internal half-edge {h}"),
            Sigma2LeavesBlock(h) => write!(f, "sigma2 leaves the block of {h}"),
            Sigma2NotSingleCycle { vertex, block } => {
                write!(f, "sigma2 not a single cycle on block {block} of {vertex}")
            }
            MarkingOnNonTail(h) => write!(f, "marking on non-tail {h}"),
            MissingMarking(h) => write!(f, "tail {h} has no marking"),
            MarkingNotBijective { boundary } => {
                let which = if *boundary { "boundary" } else { "internal" };
                write!(f, "{which} marking is not a bijection onto 1..n")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexReport {
    pub vertex: VertexId,
    pub k: usize,
    pub l: usize,
    pub genus: i64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrestableReport {
    pub violations: Vec<PrestableViolation>,
    pub vertices: Vec<VertexReport>,
}

impl PrestableReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_stable(&self) -> bool {
        self.vertices.iter().all(|v| v.stable)
    }
}

pub fn validate_prestable(g: &PreStableGraph) -> PrestableReport {
    use PrestableViolation::*;
    let mut bad = Vec::new();
    for h in g.half_edge_ids() {
        let p = g.sigma1(h);
        if g.sigma1(p) != h {
            bad.push(Sigma1NotInvolution(h));
        }
        if g.kind(p) != g.kind(h) && h < p {
            bad.push(Sigma1KindMismatch(h));
        }
        if g.is_cb(h) && (g.is_boundary(h) || p != h) {
            bad.push(CbNotInternalTail(h));
        }
        let v = g.sigma0(h);
        let open = g.is_open(v);
        match g.kind(h) {
            HalfEdgeKind::Boundary if !open => bad.push(ClosedVertexHasBoundaryHalfEdge(v, h)),
            HalfEdgeKind::Boundary => match g.block(h) {
                None => bad.push(BoundaryHalfEdgeWithoutBlock(h)),
                Some(b) if b >= g.num_boundaries(v) => bad.push(BlockOutOfRange(h)),
                Some(_) => {
                    let s = g.sigma2(h);
                    if g.sigma0(s) != v || !g.is_boundary(s) || g.block(s) != g.block(h) {
                        bad.push(Sigma2LeavesBlock(h));
                    }
                }
            },
            HalfEdgeKind::Internal => {
                if g.block(h).is_some() {
                    bad.push(InternalHalfEdgeInBlock(h));
                }
                if g.sigma2(h) != h {
                    bad.push(Sigma2MovesInternal(h));
                }
            }
        }
        if g.marking(h).is_some() && (p != h || g.is_cb(h)) {
            bad.push(MarkingOnNonTail(h));
        }
        if p == h && !g.is_cb(h) && g.marking(h).is_none() {
            bad.push(MissingMarking(h));
        }
    }
    for v in g.vertex_ids() {
        let n = g.num_boundaries(v);
        match g.vertex_kind(v) {
            VertexKind::Closed if n != 0 => bad.push(ClosedVertexHasBoundaries(v)),
            VertexKind::Open if n == 0 => bad.push(OpenVertexWithoutBoundary(v)),
            _ => {}
        }
        if g.is_open(v) {
            let blocks = g.blocks(v);
            for b in 0..n {
                let count = g
                    .half_edge_ids()
                    .filter(|&h| g.sigma0(h) == v && g.is_boundary(h) && g.block(h) == Some(b))
                    .count();
                if blocks[b as usize].len() != count {
                    bad.push(Sigma2NotSingleCycle {
                        vertex: v,
                        block: b,
                    });
                }
            }
        }
    }
    for boundary in [true, false] {
        let mut marks: Vec<u32> = g
            .half_edge_ids()
            .filter(|&h| g.is_tail(h) && g.is_boundary(h) == boundary && !g.is_cb(h))
            .filter_map(|h| g.marking(h))
            .collect();
        marks.sort_unstable();
        if marks.iter().enumerate().any(|(i, &m)| m != i as u32 + 1) {
            bad.push(MarkingNotBijective { boundary });
        }
    }
    let vertices = g
        .vertex_ids()
        .map(|v| VertexReport {
            vertex: v,
            k: g.k(v),
            l: g.l(v),
            genus: g.vertex_genus(v),
            stable: g.is_stable_vertex(v),
        })
        .collect();
    PrestableReport {
        violations: bad,
        vertices,
    }
}

// ---------------------------------------------------------------------------
// Genus and edge classes

/// Genus of the connected component spanned by `component`.
pub fn graph_genus(g: &PreStableGraph, component: &[VertexId]) -> Result<i64, GraphError> {
    let Some(&first) = component.first() else {
        return Err(GraphError::Disconnected);
    };
    let want: BTreeSet<VertexId> = component.iter().copied().collect();
    let reach = g.reach(first, None);
    if !want.is_subset(&reach) {
        return Err(GraphError::Disconnected);
    }
    if reach != want {
        return Err(GraphError::NotAComponent);
    }
    let mut total = 0i64;
    for &v in &want {
        match g.vertex_kind(v) {
            VertexKind::Open => total += g.vertex_genus(v) - 1,
            VertexKind::Closed => total += 2 * g.vertex_genus(v) - 2,
        }
    }
    for h in g.half_edge_ids().filter(|h| want.contains(&g.sigma0(*h))) {
        let p = g.sigma1(h);
        if h < p {
            total += if g.is_boundary(h) { 1 } else { 2 };
        }
        if g.is_cb(h) {
            total += 1;
        }
    }
    Ok(total + 1)
}

/// Genus of a connected graph.
pub fn connected_genus(g: &PreStableGraph) -> Result<i64, GraphError> {
    let all: Vec<VertexId> = g.vertex_ids().collect();
    graph_genus(g, &all)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeClass {
    pub halves: (HalfEdgeId, HalfEdgeId),
    pub kind: HalfEdgeKind,
    pub separating: bool,
}

pub fn classify_edge(g: &PreStableGraph, h: HalfEdgeId) -> Result<EdgeClass, GraphError> {
    if h.0 >= g.num_half_edges() || g.is_tail(h) {
        return Err(GraphError::UnknownEdge(h));
    }
    let p = g.sigma1(h);
    let halves = (h.min(p), h.max(p));
    let kind = g.kind(h);
    let separating = match g.edge_sides(h) {
        None => false,
        Some((a, b)) => match kind {
            HalfEdgeKind::Boundary => true,
            HalfEdgeKind::Internal => {
                g.part_is_closed_without_cb(&a) || g.part_is_closed_without_cb(&b)
            }
        },
    };
    Ok(EdgeClass {
        halves,
        kind,
        separating,
    })
}

pub fn classify_edges(g: &PreStableGraph) -> Vec<EdgeClass> {
    g.edges()
        .into_iter()
        .map(|(a, _)| classify_edge(g, a).expect("listed edge"))
        .collect()
}

// ---------------------------------------------------------------------------
// Isomorphism

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub vertex_map: Vec<VertexId>,
    pub half_edge_map: Vec<HalfEdgeId>,
}

impl Isomorphism {
    pub fn identity(g: &PreStableGraph) -> Self {
        Self {
            vertex_map: g.vertex_ids().collect(),
            half_edge_map: g.half_edge_ids().collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut vertex_map = vec![VertexId(0); self.vertex_map.len()];
        for (i, v) in self.vertex_map.iter().enumerate() {
            vertex_map[v.0] = VertexId(i);
        }
        let mut half_edge_map = vec![HalfEdgeId(0); self.half_edge_map.len()];
        for (i, h) in self.half_edge_map.iter().enumerate() {
            half_edge_map[h.0] = HalfEdgeId(i);
        }
        Self {
            vertex_map,
            half_edge_map,
        }
    }

    /// `self` followed by `then`.
    pub fn compose(&self, then: &Isomorphism) -> Self {
        Self {
            vertex_map: self
                .vertex_map
                .iter()
                .map(|v| then.vertex_map[v.0])
                .collect(),
            half_edge_map: self
                .half_edge_map
                .iter()
                .map(|h| then.half_edge_map[h.0])
                .collect(),
        }
    }
}

/// Which decorations an isomorphism must respect beyond the bare structure.
///
pub type PartialMap<'a> = &'a [Option<HalfEdgeId>];

/// `half_colors` adds an opaque label per half-edge for each graph and
/// `pairing` an extra partial involution that must commute with the map.
#[derive(Clone, Copy, Debug, Default)]
pub struct IsoOptions<'a> {
    pub markings: bool,
    pub half_colors: Option<(&'a [u64], &'a [u64])>,
    pub pairing: Option<(PartialMap<'a>, PartialMap<'a>)>,
}

impl IsoOptions<'_> {
    pub fn with_markings() -> Self {
        Self {
            markings: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct HalfColor {
    kind: HalfEdgeKind,
    tail: bool,
    cb: bool,
    marking: u32,
    extra: u64,
    paired: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct VertexColor {
    kind: VertexKind,
    genus_hat: u32,
    n: u32,
    k: usize,
    l: usize,
}

struct Side<'a> {
    g: &'a PreStableGraph,
    hc: Vec<HalfColor>,
    vc: Vec<VertexColor>,
    pairing: Option<&'a [Option<HalfEdgeId>]>,
}

impl<'a> Side<'a> {
    fn new(
        g: &'a PreStableGraph,
        opts: &IsoOptions<'a>,
        colors: Option<&'a [u64]>,
        pairing: Option<&'a [Option<HalfEdgeId>]>,
    ) -> Self {
        let hc = g
            .half_edge_ids()
            .map(|h| HalfColor {
                kind: g.kind(h),
                tail: g.is_tail(h),
                cb: g.is_cb(h),
                marking: if opts.markings {
                    g.marking(h).unwrap_or(0)
                } else {
                    0
                },
                extra: colors.map_or(0, |c| c[h.0]),
                paired: pairing.is_some_and(|p| p[h.0].is_some()),
            })
            .collect();
        let vc = g
            .vertex_ids()
            .map(|v| VertexColor {
                kind: g.vertex_kind(v),
                genus_hat: g.genus_hat(v),
                n: g.num_boundaries(v),
                k: g.k(v),
                l: g.l(v),
            })
            .collect();
        Self { g, hc, vc, pairing }
    }
}

#[derive(Clone)]
struct State {
    h: Vec<Option<usize>>,
    hinv: Vec<Option<usize>>,
    v: Vec<Option<usize>>,
    vinv: Vec<Option<usize>>,
}

fn assign(a: &Side, b: &Side, st: &mut State, h1: usize, h2: usize) -> bool {
    let mut stack = vec![(h1, h2)];
    while let Some((x, y)) = stack.pop() {
        match (st.h[x], st.hinv[y]) {
            (Some(m), _) if m == y => continue,
            (None, None) => {}
            _ => return false,
        }
        if a.hc[x] != b.hc[y] {
            return false;
        }
        st.h[x] = Some(y);
        st.hinv[y] = Some(x);
        let vx = a.g.sigma0(HalfEdgeId(x)).0;
        let vy = b.g.sigma0(HalfEdgeId(y)).0;
        match (st.v[vx], st.vinv[vy]) {
            (Some(m), _) if m == vy => {}
            (None, None) => {
                if a.vc[vx] != b.vc[vy] {
                    return false;
                }
                st.v[vx] = Some(vy);
                st.vinv[vy] = Some(vx);
            }
            _ => return false,
        }
        stack.push((a.g.sigma1(HalfEdgeId(x)).0, b.g.sigma1(HalfEdgeId(y)).0));
        stack.push((a.g.sigma2(HalfEdgeId(x)).0, b.g.sigma2(HalfEdgeId(y)).0));
        if let (Some(pa), Some(pb)) = (a.pairing, b.pairing) {
            match (pa[x], pb[y]) {
                (Some(px), Some(py)) => stack.push((px.0, py.0)),
                (None, None) => {}
                _ => return false,
            }
        }
    }
    true
}

fn search(a: &Side, b: &Side, st: State) -> Option<State> {
    let n = st.h.len();
    let next = (0..n)
        .filter(|&x| st.h[x].is_none())
        .min_by_key(|&x| st.v[a.g.sigma0(HalfEdgeId(x)).0].is_none());
    let Some(x) = next else {
        return Some(st);
    };
    let vx = a.g.sigma0(HalfEdgeId(x)).0;
    let candidates: Vec<usize> = match st.v[vx] {
        Some(vy) => {
            b.g.half_edge_ids()
                .map(|h| h.0)
                .filter(|&y| st.hinv[y].is_none() && b.g.sigma0(HalfEdgeId(y)).0 == vy)
                .collect()
        }
        None => (0..n)
            .filter(|&y| st.hinv[y].is_none() && st.vinv[b.g.sigma0(HalfEdgeId(y)).0].is_none())
            .collect(),
    };
    for y in candidates {
        if a.hc[x] != b.hc[y] {
            continue;
        }
        let mut trial = st.clone();
        if assign(a, b, &mut trial, x, y) {
            if let Some(done) = search(a, b, trial) {
                return Some(done);
            }
        }
    }
    None
}

/// Searches for an isomorphism `g1 -> g2` respecting `opts`.
pub fn are_isomorphic(
    g1: &PreStableGraph,
    g2: &PreStableGraph,
    opts: &IsoOptions,
) -> Option<Isomorphism> {
    if g1.num_vertices() != g2.num_vertices() || g1.num_half_edges() != g2.num_half_edges() {
        return None;
    }
    let a = Side::new(
        g1,
        opts,
        opts.half_colors.map(|c| c.0),
        opts.pairing.map(|p| p.0),
    );
    let b = Side::new(
        g2,
        opts,
        opts.half_colors.map(|c| c.1),
        opts.pairing.map(|p| p.1),
    );
    let sorted = |mut x: Vec<HalfColor>| {
        x.sort();
        x
    };
    let sorted_v = |mut x: Vec<VertexColor>| {
        x.sort();
        x
    };
    if sorted(a.hc.clone()) != sorted(b.hc.clone())
        || sorted_v(a.vc.clone()) != sorted_v(b.vc.clone())
    {
        return None;
    }
    let st = State {
        h: vec![None; g1.num_half_edges()],
        hinv: vec![None; g2.num_half_edges()],
        v: vec![None; g1.num_vertices()],
        vinv: vec![None; g2.num_vertices()],
    };
    let mut st = search(&a, &b, st)?;
    // Vertices without half-edges are matched by colour.
    for x in 0..g1.num_vertices() {
        if st.v[x].is_some() {
            continue;
        }
        let y = (0..g2.num_vertices()).find(|&y| st.vinv[y].is_none() && a.vc[x] == b.vc[y])?;
        st.v[x] = Some(y);
        st.vinv[y] = Some(x);
    }
    let iso = Isomorphism {
        vertex_map: st
            .v
            .into_iter()
            .map(|v| VertexId(v.expect("total")))
            .collect(),
        half_edge_map: st
            .h
            .into_iter()
            .map(|h| HalfEdgeId(h.expect("total")))
            .collect(),
    };
    debug_assert!(is_isomorphism(g1, g2, &iso, opts));
    Some(iso)
}

/// Checks every defining identity of an isomorphism.
pub fn is_isomorphism(
    g1: &PreStableGraph,
    g2: &PreStableGraph,
    f: &Isomorphism,
    opts: &IsoOptions,
) -> bool {
    if f.vertex_map.len() != g1.num_vertices()
        || f.half_edge_map.len() != g1.num_half_edges()
        || g1.num_vertices() != g2.num_vertices()
        || g1.num_half_edges() != g2.num_half_edges()
    {
        return false;
    }
    let vs: BTreeSet<_> = f.vertex_map.iter().collect();
    let hs: BTreeSet<_> = f.half_edge_map.iter().collect();
    if vs.len() != g2.num_vertices() || hs.len() != g2.num_half_edges() {
        return false;
    }
    if vs.iter().any(|v| v.0 >= g2.num_vertices()) || hs.iter().any(|h| h.0 >= g2.num_half_edges())
    {
        return false;
    }
    let fh = |h: HalfEdgeId| f.half_edge_map[h.0];
    let fv = |v: VertexId| f.vertex_map[v.0];
    for v in g1.vertex_ids() {
        let (a, b) = (g1.vertex_data(v), g2.vertex_data(fv(v)));
        if a != b {
            return false;
        }
    }
    for h in g1.half_edge_ids() {
        let y = fh(h);
        if g1.kind(h) != g2.kind(y)
            || fv(g1.sigma0(h)) != g2.sigma0(y)
            || fh(g1.sigma1(h)) != g2.sigma1(y)
            || fh(g1.sigma2(h)) != g2.sigma2(y)
            || g1.is_cb(h) != g2.is_cb(y)
        {
            return false;
        }
        if opts.markings && g1.marking(h) != g2.marking(y) {
            return false;
        }
        if let Some((c1, c2)) = opts.half_colors {
            if c1[h.0] != c2[y.0] {
                return false;
            }
        }
        if let Some((p1, p2)) = opts.pairing {
            if p1[h.0].map(fh) != p2[y.0] {
                return false;
            }
        }
    }
    true
}

/// Disjoint union; returns the union and the offsets of each part.
pub fn disjoint_union(parts: &[&PreStableGraph]) -> (PreStableGraph, Vec<(usize, usize)>) {
    let mut vertices = Vec::new();
    let mut halves = Vec::new();
    let mut offsets = Vec::new();
    for g in parts {
        let (vo, ho) = (vertices.len(), halves.len());
        offsets.push((vo, ho));
        vertices.extend(g.vertices.iter().cloned());
        halves.extend(g.half_edges.iter().map(|h| HalfEdgeData {
            vertex: VertexId(h.vertex.0 + vo),
            sigma1: HalfEdgeId(h.sigma1.0 + ho),
            sigma2: HalfEdgeId(h.sigma2.0 + ho),
            ..h.clone()
        }));
    }
    (
        PreStableGraph {
            vertices,
            half_edges: halves,
        },
        offsets,
    )
}
