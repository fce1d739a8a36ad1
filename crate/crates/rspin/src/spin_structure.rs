//! Twists, legality, anchors and NCB tails on top of a pre-stable graph,
//! together with the numeric formulas attached to them.

use std::fmt;

use thiserror::Error;

use crate::graph_core::{
    are_isomorphic, disjoint_union, validate_prestable, GraphBuilder, HalfEdgeData, HalfEdgeId,
    HalfEdgeKind, IsoOptions, Isomorphism, PreStableGraph, PrestableReport, VertexId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpinError {
    #[error("decoration arrays do not match the half-edge count")]
    LengthMismatch,
    #[error("expected a single open genus-0 vertex")]
    NotSingleDisk,
    #[error("vertex {0} does not have genus 0")]
    NotGenusZero(VertexId),
    #[error("vertex {0} is unstable")]
    Unstable(VertexId),
    #[error("vertex {0} is not open")]
    NotOpen(VertexId),
    #[error("vertex {0} is not closed")]
    NotClosed(VertexId),
    #[error("rank numerator {numerator} is not divisible by r = {r}")]
    NonIntegralRank { numerator: i64, r: u32 },
    #[error("m_delta numerator {numerator} is odd")]
    NonIntegralMDelta { numerator: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinGraph {
    base: PreStableGraph,
    r: u32,
    tw: Vec<i32>,
    alt: Vec<bool>,
    anchors: Vec<bool>,
    ncb: Vec<bool>,
}

impl SpinGraph {
    pub fn from_parts(
        base: PreStableGraph,
        r: u32,
        tw: Vec<i32>,
        alt: Vec<bool>,
        anchors: &[HalfEdgeId],
        ncb: &[HalfEdgeId],
    ) -> Result<Self, SpinError> {
        let n = base.num_half_edges();
        if tw.len() != n || alt.len() != n || anchors.iter().chain(ncb).any(|h| h.0 >= n) {
            return Err(SpinError::LengthMismatch);
        }
        let mut a = vec![false; n];
        let mut c = vec![false; n];
        for h in anchors {
            a[h.0] = true;
        }
        for h in ncb {
            c[h.0] = true;
        }
        Ok(Self {
            base,
            r,
            tw,
            alt,
            anchors: a,
            ncb: c,
        })
    }

    /// An open vertex with `genus_hat = 0`, one boundary, boundary tails in
    /// the given cyclic order and the given internal tails, marked in order.
    pub fn disk(r: u32, boundary: &[(i32, bool)], internal: &[i32]) -> Self {
        let mut b = SpinBuilder::new(r);
        let v = b.open_vertex(0, 1);
        for &(t, legal) in boundary {
            b.boundary(v, 0, t, legal);
        }
        for &t in internal {
            b.internal(v, t);
        }
        b.build()
    }

    pub fn base(&self) -> &PreStableGraph {
        &self.base
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn tw(&self, h: HalfEdgeId) -> i32 {
        self.tw[h.0]
    }

    /// Legality; meaningful on boundary half-edges only.
    pub fn alt(&self, h: HalfEdgeId) -> bool {
        self.alt[h.0]
    }

    pub fn is_anchor(&self, h: HalfEdgeId) -> bool {
        self.anchors[h.0]
    }

    pub fn is_ncb(&self, h: HalfEdgeId) -> bool {
        self.ncb[h.0]
    }

    pub fn anchors(&self) -> Vec<HalfEdgeId> {
        self.base
            .half_edge_ids()
            .filter(|&h| self.is_anchor(h))
            .collect()
    }

    pub fn ncb_tails(&self) -> Vec<HalfEdgeId> {
        self.base
            .half_edge_ids()
            .filter(|&h| self.is_ncb(h))
            .collect()
    }

    pub fn twists(&self) -> &[i32] {
        &self.tw
    }

    pub fn legality(&self) -> &[bool] {
        &self.alt
    }

    pub fn is_ramond(&self, h: HalfEdgeId) -> bool {
        let t = self.tw(h);
        t == -1 || t == self.r as i32 - 1
    }

    /// All boundary tails legal.
    pub fn is_legal(&self) -> bool {
        self.base.boundary_tails().iter().all(|&h| self.alt(h))
    }

    /// The subgraph on `vertices`, which must be closed under `sigma1`.
    /// Returns the old-to-new half-edge map.
    pub fn restrict(&self, vertices: &[VertexId]) -> (SpinGraph, Vec<Option<HalfEdgeId>>) {
        let g = &self.base;
        let mut vmap = vec![None; g.num_vertices()];
        for (i, v) in vertices.iter().enumerate() {
            vmap[v.0] = Some(VertexId(i));
        }
        let mut hmap = vec![None; g.num_half_edges()];
        let mut keep = Vec::new();
        for h in g.half_edge_ids() {
            if vmap[g.sigma0(h).0].is_some() {
                hmap[h.0] = Some(HalfEdgeId(keep.len()));
                keep.push(h);
            }
        }
        let (vs, hs) = g.parts();
        let new_vs = vertices.iter().map(|v| vs[v.0].clone()).collect();
        let mut new_hs: Vec<HalfEdgeData> = keep
            .iter()
            .map(|&h| {
                let d = &hs[h.0];
                HalfEdgeData {
                    vertex: vmap[d.vertex.0].expect("kept"),
                    sigma1: hmap[d.sigma1.0].expect("restriction must be closed under sigma1"),
                    sigma2: hmap[d.sigma2.0].expect("sigma2 stays at the vertex"),
                    ..d.clone()
                }
            })
            .collect();
        compress_markings(&mut new_hs);
        let base = PreStableGraph::from_parts(new_vs, new_hs).expect("in range");
        let pick = |v: &Vec<bool>| keep.iter().map(|h| v[h.0]).collect::<Vec<_>>();
        let s = SpinGraph {
            base,
            r: self.r,
            tw: keep.iter().map(|h| self.tw[h.0]).collect(),
            alt: pick(&self.alt),
            anchors: pick(&self.anchors),
            ncb: pick(&self.ncb),
        };
        (s, hmap)
    }

    /// Connected components as separate graphs with their half-edge maps.
    pub fn split_components(&self) -> Vec<(SpinGraph, Vec<Option<HalfEdgeId>>)> {
        self.base
            .components()
            .iter()
            .map(|c| self.restrict(c))
            .collect()
    }
}

/// Disjoint union of spin graphs with a common `r`; returns the half-edge
/// offset of each part.
pub fn spin_disjoint_union(parts: &[&SpinGraph]) -> (SpinGraph, Vec<usize>) {
    let bases: Vec<&PreStableGraph> = parts.iter().map(|p| p.base()).collect();
    let (base, offsets) = disjoint_union(&bases);
    let cat = |f: fn(&SpinGraph) -> &Vec<bool>| {
        parts
            .iter()
            .flat_map(|p| f(p).iter().copied())
            .collect::<Vec<_>>()
    };
    let s = SpinGraph {
        base,
        r: parts.first().map_or(2, |p| p.r),
        tw: parts.iter().flat_map(|p| p.tw.iter().copied()).collect(),
        alt: cat(|p| &p.alt),
        anchors: cat(|p| &p.anchors),
        ncb: cat(|p| &p.ncb),
    };
    (s, offsets.into_iter().map(|(_, h)| h).collect())
}

/// Renumbers the markings of each kind to 1..n keeping their relative order,
/// then numbers unmarked tails in id order.
pub(crate) fn compress_markings(hs: &mut [HalfEdgeData]) {
    for kind in [HalfEdgeKind::Boundary, HalfEdgeKind::Internal] {
        let tails: Vec<usize> = (0..hs.len())
            .filter(|&i| hs[i].kind == kind && hs[i].sigma1.0 == i && !hs[i].cb)
            .collect();
        let mut marked: Vec<(u32, usize)> = tails
            .iter()
            .filter_map(|&i| hs[i].marking.map(|m| (m, i)))
            .collect();
        marked.sort_unstable();
        let mut next = 0;
        for &(_, i) in &marked {
            next += 1;
            hs[i].marking = Some(next);
        }
        for &i in &tails {
            if !marked.iter().any(|&(_, j)| j == i) {
                next += 1;
                hs[i].marking = Some(next);
            }
        }
        for (i, h) in hs.iter_mut().enumerate() {
            if h.kind == kind && (h.sigma1.0 != i || h.cb) {
                h.marking = None;
            }
        }
    }
}

/// Builds spin graphs alongside their underlying pre-stable graph.
#[derive(Clone, Debug)]
pub struct SpinBuilder {
    r: u32,
    g: GraphBuilder,
    tw: Vec<i32>,
    alt: Vec<bool>,
    anchors: Vec<HalfEdgeId>,
    ncb: Vec<HalfEdgeId>,
}

impl SpinBuilder {
    pub fn new(r: u32) -> Self {
        Self {
            r,
            g: GraphBuilder::new(),
            tw: Vec::new(),
            alt: Vec::new(),
            anchors: Vec::new(),
            ncb: Vec::new(),
        }
    }

    pub fn open_vertex(&mut self, genus_hat: u32, n: u32) -> VertexId {
        self.g.open_vertex(genus_hat, n)
    }

    pub fn closed_vertex(&mut self, genus_hat: u32) -> VertexId {
        self.g.closed_vertex(genus_hat)
    }

    pub fn boundary(&mut self, v: VertexId, block: u32, tw: i32, legal: bool) -> HalfEdgeId {
        self.tw.push(tw);
        self.alt.push(legal);
        self.g.boundary(v, block)
    }

    pub fn internal(&mut self, v: VertexId, tw: i32) -> HalfEdgeId {
        self.tw.push(tw);
        self.alt.push(false);
        self.g.internal(v)
    }

    pub fn pair(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.g.pair(a, b);
    }

    pub fn cb(&mut self, h: HalfEdgeId) {
        self.g.set_cb(h);
    }

    pub fn anchor(&mut self, h: HalfEdgeId) {
        self.anchors.push(h);
    }

    pub fn ncb(&mut self, h: HalfEdgeId) {
        self.ncb.push(h);
    }

    pub fn mark(&mut self, h: HalfEdgeId, m: u32) {
        self.g.mark(h, m);
    }

    pub fn build(self) -> SpinGraph {
        SpinGraph::from_parts(
            self.g.build(),
            self.r,
            self.tw,
            self.alt,
            &self.anchors,
            &self.ncb,
        )
        .expect("builder keeps lengths in step")
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Structure,
    Prestable,
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Structure => "structure",
            Condition::Prestable => "prestable",
            Condition::I => "(i)",
            Condition::II => "(ii)",
            Condition::III => "(iii)",
            Condition::IV => "(iv)",
            Condition::V => "(v)",
            Condition::VI => "(vi)",
            Condition::VII => "(vii)",
            Condition::VIII => "(viii)",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinViolation {
    pub condition: Condition,
    pub ids: Vec<usize>,
    pub message: String,
}

impl fmt::Display for SpinViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.condition, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinReport {
    pub prestable: PrestableReport,
    pub violations: Vec<SpinViolation>,
    pub ramond_half_edges: Vec<HalfEdgeId>,
    pub ramond_edges: Vec<(HalfEdgeId, HalfEdgeId)>,
    pub warnings: Vec<String>,
}

impl SpinReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passes(&self, c: Condition) -> bool {
        self.violations.iter().all(|v| v.condition != c)
    }

    /// Valid and every vertex stable.
    pub fn is_stable_valid(&self) -> bool {
        self.is_valid() && self.prestable.is_stable()
    }
}

fn push(bad: &mut Vec<SpinViolation>, condition: Condition, ids: Vec<usize>, message: String) {
    bad.push(SpinViolation {
        condition,
        ids,
        message,
    });
}

pub fn validate_spin(s: &SpinGraph) -> SpinReport {
    let g = &s.base;
    let prestable = validate_prestable(g);
    let mut bad: Vec<SpinViolation> = Vec::new();
    for v in &prestable.violations {
        push(&mut bad, Condition::Prestable, vec![], v.to_string());
    }
    let r = s.r as i64;
    if r < 2 {
        push(
            &mut bad,
            Condition::Structure,
            vec![],
            format!("r = {r} is below 2"),
        );
    }
    for h in g.half_edge_ids() {
        let t = s.tw(h) as i64;
        if t < -1 || t > r - 1 {
            push(
                &mut bad,
                Condition::Structure,
                vec![h.0],
                format!("twist out of range at {h}: {t}"),
            );
        }
        let internal_tail = g.is_tail(h) && !g.is_boundary(h) && !g.is_cb(h);
        if s.is_anchor(h) && !internal_tail {
            push(
                &mut bad,
                Condition::Structure,
                vec![h.0],
                format!("anchor {h} is not an internal non-cb tail"),
            );
        }
        if s.is_ncb(h) && !internal_tail {
            push(
                &mut bad,
                Condition::Structure,
                vec![h.0],
                format!("ncb tail {h} is not an internal non-cb tail"),
            );
        }
    }
    let mut report = SpinReport {
        prestable,
        violations: Vec::new(),
        ramond_half_edges: Vec::new(),
        ramond_edges: Vec::new(),
        warnings: Vec::new(),
    };
    if !bad.is_empty() {
        report.violations = bad;
        return report;
    }

    let components = g.components();
    let cb_at = |v: VertexId| g.half_edge_ids().any(|h| g.is_cb(h) && g.sigma0(h) == v);
    let anchor_in = |part: &[VertexId]| {
        g.half_edge_ids()
            .any(|h| s.is_anchor(h) && part.contains(&g.sigma0(h)))
    };

    // (i) and (ii)
    for v in g.vertex_ids() {
        let gv = g.vertex_genus(v);
        let halves = g.half_edges_at(v);
        if g.is_open(v) {
            let sum: i64 = halves
                .iter()
                .map(|&h| {
                    if g.is_boundary(h) {
                        s.tw(h) as i64
                    } else {
                        2 * s.tw(h) as i64
                    }
                })
                .sum();
            if (sum - (2 * gv - 2)).rem_euclid(r) != 0 {
                push(
                    &mut bad,
                    Condition::I,
                    vec![v.0],
                    format!("twist sum {sum} at {v} is not 2g-2 mod r"),
                );
            } else {
                let q = (sum - 2 * gv + 2) / r;
                let legal = halves
                    .iter()
                    .filter(|&&h| g.is_boundary(h) && s.alt(h))
                    .count() as i64;
                if (q + gv - legal).rem_euclid(2) != 0 {
                    push(
                        &mut bad,
                        Condition::I,
                        vec![v.0],
                        format!("legality parity fails at {v}"),
                    );
                }
            }
        } else {
            let sum: i64 = halves.iter().map(|&h| s.tw(h) as i64).sum();
            if (sum - (2 * gv - 2)).rem_euclid(r) != 0 {
                push(
                    &mut bad,
                    Condition::II,
                    vec![v.0],
                    format!("twist sum {sum} at closed {v} is not 2g-2 mod r"),
                );
            }
        }
    }

    // (iii)
    for comp in &components {
        let needs = comp.iter().all(|&v| !g.is_open(v)) && !comp.iter().any(|&v| cb_at(v));
        let anchors: Vec<usize> = g
            .half_edge_ids()
            .filter(|&h| s.is_anchor(h) && comp.contains(&g.sigma0(h)))
            .map(|h| h.0)
            .collect();
        match (needs, anchors.len()) {
            (true, 1) | (false, 0) => {}
            (true, n) => push(
                &mut bad,
                Condition::III,
                anchors,
                format!("component needs exactly one anchor, has {n}"),
            ),
            (false, _) => push(
                &mut bad,
                Condition::III,
                anchors,
                "anchor on a component with open vertex or cb tail".into(),
            ),
        }
    }
    for h in g.internal_tails() {
        if s.tw(h) == -1 && !s.is_anchor(h) {
            push(
                &mut bad,
                Condition::III,
                vec![h.0],
                format!("tail {h} has twist -1 but is not an anchor"),
            );
        }
    }

    // (iv)
    for (a, b) in g.edges() {
        let sum = (s.tw(a) + s.tw(b)) as i64;
        if (sum - (r - 2)).rem_euclid(r) != 0 {
            push(
                &mut bad,
                Condition::IV,
                vec![a.0, b.0],
                format!("edge ({a},{b}) twists sum to {sum}"),
            );
        }
        if g.is_boundary(a) {
            continue;
        }
        let sides = g.edge_sides(a);
        for (x, idx) in [(a, 0), (b, 1)] {
            if (s.tw(x) as i64 + 1).rem_euclid(r) != 0 {
                continue;
            }
            let expect_minus = match &sides {
                Some((sa, sb)) => {
                    let own = if idx == 0 { sa } else { sb };
                    let sep = g.part_is_closed_without_cb(sa) || g.part_is_closed_without_cb(sb);
                    sep && g.part_is_closed_without_cb(own) && !anchor_in(own)
                }
                None => false,
            };
            if expect_minus != (s.tw(x) == -1) {
                push(
                    &mut bad,
                    Condition::IV,
                    vec![x.0],
                    format!("half-edge {x} has the wrong Ramond representative"),
                );
            }
        }
    }
    for h in g.half_edge_ids() {
        if g.is_boundary(h) && s.tw(h) == -1 {
            push(
                &mut bad,
                Condition::IV,
                vec![h.0],
                format!("boundary half-edge {h} has twist -1"),
            );
        }
    }

    // (v) and (vi)
    for h in g.half_edge_ids() {
        if (g.is_cb(h) || s.is_ncb(h)) && s.tw(h) as i64 != r - 1 {
            push(
                &mut bad,
                Condition::V,
                vec![h.0],
                format!("cb or ncb tail {h} has twist {}", s.tw(h)),
            );
        }
        if s.is_anchor(h) && s.tw(h) as i64 == r - 1 && !s.is_ncb(h) {
            push(
                &mut bad,
                Condition::VI,
                vec![h.0],
                format!("anchor {h} with twist r-1 is not ncb"),
            );
        }
    }

    // (vii)
    for (a, b) in g.edges() {
        if !g.is_boundary(a) {
            continue;
        }
        for (x, y) in [(a, b), (b, a)] {
            let ok = if s.tw(x) as i64 != r - 1 {
                s.alt(x) != s.alt(y)
            } else {
                !s.alt(x) && !s.alt(y)
            };
            if !ok {
                push(
                    &mut bad,
                    Condition::VII,
                    vec![x.0, y.0],
                    format!("legality on edge ({x},{y}) is inconsistent"),
                );
                break;
            }
        }
    }

    // (viii)
    for h in g.half_edge_ids().filter(|&h| g.is_boundary(h)) {
        let t = s.tw(h) as i64;
        let ok = if r % 2 == 1 {
            s.alt(h) == (t.rem_euclid(2) == 1)
        } else {
            t.rem_euclid(2) == 0
        };
        if !ok {
            let what = if r % 2 == 1 {
                "alt differs from tw mod 2"
            } else {
                "tw is odd"
            };
            push(
                &mut bad,
                Condition::VIII,
                vec![h.0],
                format!("{what} at {h}"),
            );
        }
    }

    report.ramond_half_edges = g.half_edge_ids().filter(|&h| s.is_ramond(h)).collect();
    report.ramond_edges = g
        .edges()
        .into_iter()
        .filter(|&(a, _)| s.is_ramond(a))
        .collect();
    if bad.is_empty() {
        for comp in &components {
            if let [v] = comp[..] {
                if g.is_open(v) && g.vertex_genus(v) == 0 {
                    if let Ok(rank) = vertex_witten_rank(s, v) {
                        if rank < 0 {
                            report
                                .warnings
                                .push(format!("negative Witten rank {rank} at {v}"));
                        }
                    }
                }
            }
        }
    }
    report.violations = bad;
    report
}

// ---------------------------------------------------------------------------
// Numeric formulas

/// Existence of an r-spin structure on an open genus-g surface.
pub fn spin_exists(r: u32, g: i64, internal: &[i32], boundary: &[i32]) -> bool {
    let r = r as i64;
    let a: i64 = internal.iter().map(|&x| x as i64).sum();
    let b: i64 = boundary.iter().map(|&x| x as i64).sum();
    (2 * a + b + (g - 1) * (r - 2)).rem_euclid(r) == 0
}

/// Existence of an r-spin structure on a closed genus-g surface.
pub fn spin_exists_closed(r: u32, g: i64, internal: &[i32]) -> bool {
    let r = r as i64;
    let a: i64 = internal.iter().map(|&x| x as i64).sum();
    (a + (g - 1) * (r - 2)).rem_euclid(r) == 0
}

/// `(2 sum a + sum b - (r - 2)) / r`.
pub fn rank_from_twists(r: u32, internal: &[i32], boundary: &[i32]) -> Result<i64, SpinError> {
    let a: i64 = internal.iter().map(|&x| x as i64).sum();
    let b: i64 = boundary.iter().map(|&x| x as i64).sum();
    let numerator = 2 * a + b - (r as i64 - 2);
    if numerator.rem_euclid(r as i64) != 0 {
        return Err(SpinError::NonIntegralRank { numerator, r });
    }
    Ok(numerator / r as i64)
}

fn vertex_twists(s: &SpinGraph, v: VertexId) -> (Vec<i32>, Vec<i32>) {
    let g = s.base();
    let mut internal = Vec::new();
    let mut boundary = Vec::new();
    for h in g.half_edges_at(v) {
        if g.is_boundary(h) {
            boundary.push(s.tw(h));
        } else {
            internal.push(s.tw(h));
        }
    }
    (internal, boundary)
}

fn check_disk_vertex(s: &SpinGraph, v: VertexId) -> Result<(), SpinError> {
    let g = s.base();
    if !g.is_open(v) {
        return Err(SpinError::NotOpen(v));
    }
    if g.vertex_genus(v) != 0 {
        return Err(SpinError::NotGenusZero(v));
    }
    Ok(())
}

fn single_disk(s: &SpinGraph) -> Result<VertexId, SpinError> {
    let g = s.base();
    if g.num_vertices() != 1 || !g.is_open(VertexId(0)) || g.vertex_genus(VertexId(0)) != 0 {
        return Err(SpinError::NotSingleDisk);
    }
    Ok(VertexId(0))
}

/// Real rank of the Witten bundle for the moduli of one open genus-0 vertex,
/// all of whose half-edges count as markings.
pub fn vertex_witten_rank(s: &SpinGraph, v: VertexId) -> Result<i64, SpinError> {
    check_disk_vertex(s, v)?;
    let (a, b) = vertex_twists(s, v);
    rank_from_twists(s.r(), &a, &b)
}

pub fn witten_rank(s: &SpinGraph) -> Result<i64, SpinError> {
    let v = single_disk(s)?;
    vertex_witten_rank(s, v)
}

/// Complex rank of the Witten bundle at a closed genus-0 vertex.
pub fn closed_vertex_rank(s: &SpinGraph, v: VertexId) -> Result<i64, SpinError> {
    let g = s.base();
    if g.is_open(v) {
        return Err(SpinError::NotClosed(v));
    }
    if g.vertex_genus(v) != 0 {
        return Err(SpinError::NotGenusZero(v));
    }
    let sum: i64 = g.half_edges_at(v).iter().map(|&h| s.tw(h) as i64).sum();
    let numerator = sum - (s.r() as i64 - 2);
    if numerator.rem_euclid(s.r() as i64) != 0 {
        return Err(SpinError::NonIntegralRank {
            numerator,
            r: s.r(),
        });
    }
    Ok(numerator / s.r() as i64)
}

pub fn stratum_dimension(s: &SpinGraph) -> Result<i64, SpinError> {
    let g = s.base();
    let mut dim = 0;
    for v in g.vertex_ids() {
        if g.vertex_genus(v) != 0 {
            return Err(SpinError::NotGenusZero(v));
        }
        if !g.is_stable_vertex(v) {
            return Err(SpinError::Unstable(v));
        }
        let (k, l) = (g.k(v) as i64, g.l(v) as i64);
        dim += if g.is_open(v) {
            k + 2 * l - 3
        } else {
            2 * (l - 3)
        };
    }
    Ok(dim)
}

pub fn is_level_h(s: &SpinGraph, h: u32) -> bool {
    let r = s.r() as i64;
    let h = h as i64;
    s.base().boundary_tails().iter().all(|&x| {
        let t = s.tw(x) as i64;
        if s.alt(x) {
            t >= r - 2 - 2 * h
        } else {
            t <= 2 * h
        }
    })
}

/// `(rank + 1 - #legal) / 2` for one open genus-0 vertex.
pub fn vertex_m_delta(s: &SpinGraph, v: VertexId) -> Result<i64, SpinError> {
    let rank = vertex_witten_rank(s, v)?;
    let g = s.base();
    let legal = g
        .half_edges_at(v)
        .iter()
        .filter(|&&h| g.is_boundary(h) && s.alt(h))
        .count() as i64;
    let numerator = rank + 1 - legal;
    if numerator.rem_euclid(2) != 0 {
        return Err(SpinError::NonIntegralMDelta { numerator });
    }
    Ok(numerator / 2)
}

pub fn m_delta(s: &SpinGraph) -> Result<i64, SpinError> {
    let v = single_disk(s)?;
    vertex_m_delta(s, v)
}

// ---------------------------------------------------------------------------
// Isomorphism

/// Opaque per-half-edge colour: twist, legality, anchor and ncb flags.
pub fn spin_colors(s: &SpinGraph) -> Vec<u64> {
    s.base()
        .half_edge_ids()
        .map(|h| {
            ((s.tw(h) + 1) as u64)
                | (s.alt(h) as u64) << 20
                | (s.is_anchor(h) as u64) << 21
                | (s.is_ncb(h) as u64) << 22
        })
        .collect()
}

pub fn spin_isomorphism(a: &SpinGraph, b: &SpinGraph, markings: bool) -> Option<Isomorphism> {
    if a.r() != b.r() {
        return None;
    }
    let (ca, cb) = (spin_colors(a), spin_colors(b));
    let opts = IsoOptions {
        markings,
        half_colors: Some((&ca, &cb)),
        pairing: None,
    };
    are_isomorphic(a.base(), b.base(), &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legal(ts: &[i32]) -> Vec<(i32, bool)> {
        ts.iter().map(|&t| (t, true)).collect()
    }

    #[test]
    fn circle_segment_disk_is_valid() {
        let s = SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[]);
        let rep = validate_spin(&s);
        assert!(rep.is_valid(), "{:?}", rep.violations);
        // Oracle: 16 = 7 + 9, and (16 + 2) / 9 = 2 has the parity of 4 legal tails.
        assert_eq!((16 - 7) % 9, 0);
        assert_eq!(((16 + 2) / 9) % 2, 4 % 2);
    }

    #[test]
    fn sphere_cell_disk_is_valid() {
        let s = SpinGraph::disk(2, &legal(&[0, 0, 0]), &[0]);
        assert!(validate_spin(&s).is_valid());
    }

    #[test]
    fn odd_boundary_twist_for_even_r_fails_viii() {
        let s = SpinGraph::disk(4, &[(1, true), (1, true), (0, true)], &[]);
        let rep = validate_spin(&s);
        assert!(!rep.passes(Condition::VIII));
    }

    #[test]
    fn out_of_range_twist_is_a_structure_violation() {
        let s = SpinGraph::disk(3, &[(3, true)], &[]);
        let rep = validate_spin(&s);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.message.contains("twist out of range")));
    }

    #[test]
    fn existence_congruence_examples() {
        assert!(spin_exists(9, 0, &[], &[1, 5, 5, 5]));
        assert!(!spin_exists(9, 0, &[], &[7, 7]));
        for r in 2..8 {
            assert!(spin_exists(r, 1, &[], &[]));
        }
        assert!(spin_exists_closed(3, 0, &[1]));
        assert!(!spin_exists_closed(3, 0, &[0]));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(
            witten_rank(&SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[])).unwrap(),
            1
        );
        assert_eq!(
            witten_rank(&SpinGraph::disk(2, &legal(&[0, 0, 0]), &[0])).unwrap(),
            0
        );
        assert_eq!(
            witten_rank(&SpinGraph::disk(9, &legal(&[7]), &[0])).unwrap(),
            0
        );
        assert_eq!(
            rank_from_twists(9, &[], &[7, 7]),
            Err(SpinError::NonIntegralRank { numerator: 7, r: 9 })
        );
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(
            stratum_dimension(&SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[])).unwrap(),
            1
        );
        assert_eq!(
            stratum_dimension(&SpinGraph::disk(2, &legal(&[0, 0, 0]), &[0])).unwrap(),
            2
        );
        let mut b = SpinBuilder::new(2);
        let v1 = b.open_vertex(0, 1);
        let v2 = b.open_vertex(0, 1);
        b.boundary(v1, 0, 0, true);
        b.boundary(v1, 0, 0, true);
        let h1 = b.boundary(v1, 0, 0, false);
        let h2 = b.boundary(v2, 0, 0, true);
        b.boundary(v2, 0, 0, true);
        b.boundary(v2, 0, 0, true);
        b.pair(h1, h2);
        assert_eq!(stratum_dimension(&b.build()).unwrap(), 0);
        assert_eq!(
            stratum_dimension(&SpinGraph::disk(2, &legal(&[0, 0]), &[])),
            Err(SpinError::Unstable(VertexId(0)))
        );
    }

    #[test]
    fn level_examples() {
        assert!(is_level_h(
            &SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[]),
            3
        ));
        assert!(!is_level_h(&SpinGraph::disk(9, &legal(&[5]), &[]), 0));
        assert!(is_level_h(&SpinGraph::disk(2, &legal(&[0, 0, 0]), &[]), 0));
    }

    #[test]
    fn m_delta_examples() {
        assert_eq!(
            m_delta(&SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[])).unwrap(),
            -1
        );
        assert_eq!(
            m_delta(&SpinGraph::disk(2, &legal(&[0, 0, 0]), &[0])).unwrap(),
            -1
        );
        // rank 0 with one legal tail
        assert_eq!(m_delta(&SpinGraph::disk(9, &legal(&[7]), &[0])).unwrap(), 0);
    }

    #[test]
    fn internal_labels_matter_once_twists_differ() {
        let mut b = SpinBuilder::new(5);
        let v = b.open_vertex(0, 1);
        b.boundary(v, 0, 3, true);
        let i = b.internal(v, 0);
        let j = b.internal(v, 1);
        b.mark(i, 1);
        b.mark(j, 2);
        let s1 = b.build();
        let mut b = SpinBuilder::new(5);
        let v = b.open_vertex(0, 1);
        b.boundary(v, 0, 3, true);
        let i = b.internal(v, 0);
        let j = b.internal(v, 1);
        b.mark(i, 2);
        b.mark(j, 1);
        let s2 = b.build();
        assert!(spin_isomorphism(&s1, &s2, true).is_none());
        assert!(spin_isomorphism(&s1, &s2, false).is_some());
        assert!(spin_isomorphism(&s1, &s1, true).is_some());
    }

    #[test]
    fn closed_vertex_rank_and_anchor_rules() {
        // Closed sphere with twists 0, 0, 1 for r = 3: sum 1 is -2 mod 3.
        let mut b = SpinBuilder::new(3);
        let c = b.closed_vertex(0);
        let a = b.internal(c, 0);
        b.internal(c, 0);
        b.internal(c, 1);
        b.anchor(a);
        let s = b.build();
        let rep = validate_spin(&s);
        assert!(rep.is_valid(), "{:?}", rep.violations);
        assert_eq!(closed_vertex_rank(&s, c).unwrap(), 0);

        let mut b = SpinBuilder::new(3);
        let c = b.closed_vertex(0);
        b.internal(c, 0);
        b.internal(c, 0);
        b.internal(c, 1);
        let rep = validate_spin(&b.build());
        assert!(!rep.passes(Condition::III), "missing anchor");

        let mut b = SpinBuilder::new(3);
        let c = b.closed_vertex(0);
        for _ in 0..3 {
            b.internal(c, 1);
        }
        assert!(!validate_spin(&b.build()).passes(Condition::II));
    }

    #[test]
    fn restriction_is_closed_and_renumbers_markings() {
        let mut b = SpinBuilder::new(2);
        let v1 = b.open_vertex(0, 1);
        let v2 = b.open_vertex(0, 1);
        b.boundary(v1, 0, 0, true);
        b.boundary(v2, 0, 0, true);
        b.boundary(v2, 0, 0, true);
        let s = b.build();
        let parts = s.split_components();
        assert_eq!(parts.len(), 2);
        let (second, map) = &parts[1];
        assert_eq!(second.base().num_half_edges(), 2);
        assert_eq!(map[1], Some(HalfEdgeId(0)));
        let marks: Vec<_> = second
            .base()
            .half_edge_ids()
            .map(|h| second.base().marking(h))
            .collect();
        assert_eq!(marks, vec![Some(1), Some(2)]);
    }
}
