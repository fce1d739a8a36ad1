//! Smoothing, detaching and the inverse operation of splitting a disk vertex
//! into boundary strata.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::editor::Editor;
use crate::graph_core::{HalfEdgeId, HalfEdgeKind, VertexId, VertexKind};
use crate::spin_structure::{spin_isomorphism, validate_spin, SpinGraph};

/// A place where a graph can be smoothed or detached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    /// The edge through this half-edge.
    Edge(HalfEdgeId),
    /// A contracted boundary tail.
    Cb(HalfEdgeId),
}

impl Site {
    pub fn half_edge(self) -> HalfEdgeId {
        match self {
            Site::Edge(h) | Site::Cb(h) => h,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpsError {
    #[error("half-edge {0} does not exist")]
    UnknownHalfEdge(HalfEdgeId),
    #[error("half-edge {0} is not part of an edge")]
    NotAnEdge(HalfEdgeId),
    #[error("half-edge {0} is not a cb tail")]
    NotCb(HalfEdgeId),
    #[error("boundary self-edge through {0} has both halves in one block")]
    SameBlockSelfEdge(HalfEdgeId),
    #[error("vertex {0} is not an open genus-0 vertex with one boundary")]
    NotDiskVertex(VertexId),
    #[error("expected a smooth graph with a single open genus-0 vertex")]
    NotSmoothDisk,
    #[error("result fails validation: {0}")]
    Invalid(String),
}

/// Every site of the graph: one per edge (smallest half) and one per cb tail.
pub fn sites(s: &SpinGraph) -> Vec<Site> {
    let g = s.base();
    let mut out: Vec<Site> = g.edges().into_iter().map(|(a, _)| Site::Edge(a)).collect();
    out.extend(g.cb_tails().into_iter().map(Site::Cb));
    out
}

pub fn smooth(s: &SpinGraph, site: Site) -> Result<SpinGraph, OpsError> {
    smooth_mapped(s, site).map(|(t, _)| t)
}

/// Smoothing together with the map from old to surviving half-edges.
pub fn smooth_mapped(
    s: &SpinGraph,
    site: Site,
) -> Result<(SpinGraph, Vec<Option<HalfEdgeId>>), OpsError> {
    let g = s.base();
    let h = site.half_edge();
    if h.0 >= g.num_half_edges() {
        return Err(OpsError::UnknownHalfEdge(h));
    }
    let mut e = Editor::from_spin(s);
    match site {
        Site::Cb(h) => {
            if !g.is_cb(h) {
                return Err(OpsError::NotCb(h));
            }
            let v = g.sigma0(h).0;
            e.halves[h.0].alive = false;
            e.vertices[v].kind = VertexKind::Open;
            e.vertices[v].blocks.push(Vec::new());
        }
        Site::Edge(h) => {
            let p = g.sigma1(h);
            if p == h {
                return Err(OpsError::NotAnEdge(h));
            }
            let (v1, v2) = (g.sigma0(h), g.sigma0(p));
            let boundary = g.is_boundary(h);
            if boundary && v1 == v2 && g.block(h) == g.block(p) {
                return Err(OpsError::SameBlockSelfEdge(h));
            }
            let removed = |x: HalfEdgeId| x == h || x == p;
            let next = |y: HalfEdgeId| {
                let x = g.sigma2(y);
                if !removed(x) {
                    return x;
                }
                let t = g.sigma2(g.sigma1(x));
                if t != g.sigma1(x) {
                    t
                } else {
                    g.sigma2(x)
                }
            };
            let mut old_blocks = e.vertices[v1.0].blocks.clone();
            if v1 != v2 {
                old_blocks.extend(e.vertices[v2.0].blocks.clone());
                let (k1, k2) = (g.vertex_kind(v1), g.vertex_kind(v2));
                let closed = k1 == VertexKind::Closed && k2 == VertexKind::Closed;
                e.vertices[v1.0].kind = if closed {
                    VertexKind::Closed
                } else {
                    VertexKind::Open
                };
                e.vertices[v1.0].genus_hat += g.genus_hat(v2);
                e.vertices[v2.0].alive = false;
                for x in g.half_edges_at(v2) {
                    e.move_half(x.0, v1.0);
                }
            } else {
                e.vertices[v1.0].genus_hat += 1;
            }
            let mut blocks = Vec::new();
            let mut merged_done = false;
            for b in old_blocks {
                if !b.iter().any(|&x| removed(HalfEdgeId(x))) {
                    blocks.push(b);
                    continue;
                }
                if merged_done {
                    continue;
                }
                merged_done = true;
                let survivors: BTreeSet<usize> = g
                    .half_edge_ids()
                    .filter(|&x| {
                        g.is_boundary(x)
                            && !removed(x)
                            && (g.sigma0(x) == v1 || g.sigma0(x) == v2)
                            && (g.block(x) == g.block(h) && g.sigma0(x) == v1
                                || g.block(x) == g.block(p) && g.sigma0(x) == v2)
                    })
                    .map(|x| x.0)
                    .collect();
                let mut cycle = Vec::new();
                if let Some(&start) = survivors.iter().next() {
                    let mut cur = HalfEdgeId(start);
                    loop {
                        cycle.push(cur.0);
                        cur = next(cur);
                        if cur.0 == start || cycle.len() > survivors.len() {
                            break;
                        }
                    }
                }
                debug_assert_eq!(cycle.iter().copied().collect::<BTreeSet<_>>(), survivors);
                blocks.push(cycle);
            }
            if e.vertices[v1.0].kind == VertexKind::Closed {
                blocks.clear();
            }
            e.vertices[v1.0].blocks = blocks;
            e.halves[h.0].alive = false;
            e.halves[p.0].alive = false;
        }
    }
    Ok(e.finish())
}

/// Cuts an edge into two tails, or turns a cb tail into an ncb tail, with
/// anchor fixups. The result is validated.
pub fn detach(s: &SpinGraph, site: Site) -> Result<SpinGraph, OpsError> {
    let g = s.base();
    let h = site.half_edge();
    if h.0 >= g.num_half_edges() {
        return Err(OpsError::UnknownHalfEdge(h));
    }
    let mut e = Editor::from_spin(s);
    let anchor_free = |part: &[VertexId]| {
        g.part_is_closed_without_cb(part)
            && !g
                .half_edge_ids()
                .any(|x| s.is_anchor(x) && part.contains(&g.sigma0(x)))
    };
    match site {
        Site::Edge(h) => {
            let p = g.sigma1(h);
            if p == h {
                return Err(OpsError::NotAnEdge(h));
            }
            e.halves[h.0].partner = None;
            e.halves[p.0].partner = None;
            if !g.is_boundary(h) {
                if let Some((sh, sp)) = g.edge_sides(h) {
                    for (x, side) in [(h, sh), (p, sp)] {
                        if anchor_free(&side) {
                            e.halves[x.0].anchor = true;
                        }
                    }
                }
            }
        }
        Site::Cb(h) => {
            if !g.is_cb(h) {
                return Err(OpsError::NotCb(h));
            }
            e.halves[h.0].cb = false;
            e.halves[h.0].ncb = true;
            let v = g.sigma0(h);
            let comp = g
                .components()
                .into_iter()
                .find(|c| c.contains(&v))
                .expect("vertex has a component");
            let others_cb = g
                .half_edge_ids()
                .any(|x| x != h && g.is_cb(x) && comp.contains(&g.sigma0(x)));
            let has_anchor = g
                .half_edge_ids()
                .any(|x| s.is_anchor(x) && comp.contains(&g.sigma0(x)));
            if comp.iter().all(|&w| !g.is_open(w)) && !others_cb && !has_anchor {
                e.halves[h.0].anchor = true;
            }
        }
    }
    let (out, _) = e.finish();
    let rep = validate_spin(&out);
    if !rep.is_valid() {
        let msgs: Vec<String> = rep.violations.iter().map(|v| v.to_string()).collect();
        return Err(OpsError::Invalid(msgs.join("; ")));
    }
    Ok(out)
}

/// A graph one degeneration away from a parent, with the site to smooth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degeneration {
    pub graph: SpinGraph,
    pub site: Site,
}

struct Candidate {
    a_cycle: Vec<usize>,
    a_int: Vec<usize>,
    b_cycle: Vec<usize>,
    b_int: Vec<usize>,
}

fn subsets(items: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0u32..1 << items.len())
        .map(|mask| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (i, &x) in items.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    a.push(x);
                } else {
                    b.push(x);
                }
            }
            (a, b)
        })
        .collect()
}

fn candidates(cyc: &[usize], ints: &[usize]) -> Vec<Candidate> {
    let k = cyc.len();
    let mut out = Vec::new();
    if k == 0 {
        for (a, b) in subsets(ints) {
            if a.contains(&ints[0]) && !b.is_empty() {
                out.push(Candidate {
                    a_cycle: vec![],
                    a_int: a,
                    b_cycle: vec![],
                    b_int: b,
                });
            }
        }
        return out;
    }
    for len in 1..k {
        for off in 0..len {
            let start = (k - off) % k;
            let a: Vec<usize> = (0..len).map(|i| cyc[(start + i) % k]).collect();
            let b: Vec<usize> = (len..k).map(|i| cyc[(start + i) % k]).collect();
            for (sa, sb) in subsets(ints) {
                out.push(Candidate {
                    a_cycle: a.clone(),
                    a_int: sa,
                    b_cycle: b.clone(),
                    b_int: sb,
                });
            }
        }
    }
    for gap in 0..k {
        let a: Vec<usize> = (1..=k).map(|i| cyc[(gap + i) % k]).collect();
        for (sa, sb) in subsets(ints) {
            if !sb.is_empty() {
                out.push(Candidate {
                    a_cycle: a.clone(),
                    a_int: sa,
                    b_cycle: vec![],
                    b_int: sb,
                });
            }
        }
    }
    out
}

/// All single degenerations of an open genus-0 vertex with one boundary:
/// boundary-edge splittings, and for vertices without boundary half-edges the
/// contraction of the boundary to a cb tail. Each result is validated.
pub fn split_vertex(s: &SpinGraph, v: VertexId) -> Result<Vec<Degeneration>, OpsError> {
    let g = s.base();
    if v.0 >= g.num_vertices() || !g.is_open(v) || g.genus_hat(v) != 0 || g.num_boundaries(v) != 1 {
        return Err(OpsError::NotDiskVertex(v));
    }
    let r = s.r() as i64;
    let cyc: Vec<usize> = g.blocks(v)[0].iter().map(|h| h.0).collect();
    let ints: Vec<usize> = g
        .half_edges_at(v)
        .into_iter()
        .filter(|&h| !g.is_boundary(h))
        .map(|h| h.0)
        .collect();
    let mut out = Vec::new();
    if cyc.is_empty() && ints.is_empty() {
        return Ok(out);
    }
    let tw = |x: &usize| s.tw(HalfEdgeId(*x)) as i64;
    let alt = |x: &usize| s.alt(HalfEdgeId(*x));
    for c in candidates(&cyc, &ints) {
        let stable = |b: &[usize], i: &[usize]| b.len() + 1 + 2 * i.len() > 2;
        if !stable(&c.a_cycle, &c.a_int) || !stable(&c.b_cycle, &c.b_int) {
            continue;
        }
        let side = |b: &[usize], i: &[usize]| {
            let sum: i64 = 2 * i.iter().map(tw).sum::<i64>() + b.iter().map(tw).sum::<i64>();
            let t = (-2 - sum).rem_euclid(r);
            let m = (sum + t + 2) / r;
            let legal = b.iter().filter(|x| alt(x)).count() as i64;
            (t, (m - legal).rem_euclid(2) == 1)
        };
        let (ta, aa) = side(&c.a_cycle, &c.a_int);
        let (tb, ab) = side(&c.b_cycle, &c.b_int);
        let vii = if ta != r - 1 { aa != ab } else { !aa && !ab };
        let viii = |t: i64, a: bool| {
            if r % 2 == 1 {
                a == (t % 2 == 1)
            } else {
                t % 2 == 0
            }
        };
        if !vii || !viii(ta, aa) || !viii(tb, ab) {
            continue;
        }
        let mut e = Editor::from_spin(s);
        let vb = e.add_vertex(VertexKind::Open, 0, 1);
        let ha = e.add_half(v.0, HalfEdgeKind::Boundary, ta as i32, aa);
        let hb = e.add_half(vb, HalfEdgeKind::Boundary, tb as i32, ab);
        e.pair(ha, hb);
        let mut a_cycle = c.a_cycle.clone();
        a_cycle.push(ha);
        let mut b_cycle = c.b_cycle.clone();
        b_cycle.push(hb);
        for &x in c.b_cycle.iter().chain(&c.b_int) {
            e.move_half(x, vb);
        }
        e.vertices[v.0].blocks = vec![a_cycle];
        e.vertices[vb].blocks = vec![b_cycle];
        let (graph, map) = e.finish();
        if validate_spin(&graph).is_valid() {
            out.push(Degeneration {
                graph,
                site: Site::Edge(map[ha].expect("new half survives")),
            });
        }
    }
    if cyc.is_empty() && ints.len() >= 2 {
        let mut e = Editor::from_spin(s);
        e.vertices[v.0].kind = VertexKind::Closed;
        e.vertices[v.0].blocks.clear();
        let c = e.add_half(v.0, HalfEdgeKind::Internal, r as i32 - 1, false);
        e.halves[c].cb = true;
        let (graph, map) = e.finish();
        if validate_spin(&graph).is_valid() {
            out.push(Degeneration {
                graph,
                site: Site::Cb(map[c].expect("new half survives")),
            });
        }
    }
    Ok(dedup(out))
}

fn dedup(items: Vec<Degeneration>) -> Vec<Degeneration> {
    let mut out: Vec<Degeneration> = Vec::new();
    for d in items {
        if !out
            .iter()
            .any(|o| spin_isomorphism(&o.graph, &d.graph, true).is_some())
        {
            out.push(d);
        }
    }
    out
}

/// Codimension-1 boundary strata of a smooth disk graph.
pub fn codim1_boundaries(s: &SpinGraph) -> Result<Vec<Degeneration>, OpsError> {
    let g = s.base();
    if g.num_vertices() != 1 || !g.is_smooth() {
        return Err(OpsError::NotSmoothDisk);
    }
    split_vertex(s, VertexId(0)).map_err(|_| OpsError::NotSmoothDisk)
}

/// A graph two boundary degenerations away from a smooth disk graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corner {
    pub graph: SpinGraph,
    pub sites: [Site; 2],
}

/// Codimension-2 strata obtained by splitting a vertex of each boundary
/// graph once more; only boundary-edge degenerations are kept.
pub fn codim2_boundaries(s: &SpinGraph) -> Result<Vec<Corner>, OpsError> {
    let mut out: Vec<Corner> = Vec::new();
    for d in codim1_boundaries(s)? {
        if matches!(d.site, Site::Cb(_)) {
            continue;
        }
        for v in d.graph.base().vertex_ids() {
            let Ok(splits) = split_vertex(&d.graph, v) else {
                continue;
            };
            for d2 in splits {
                if matches!(d2.site, Site::Cb(_)) {
                    continue;
                }
                if !out
                    .iter()
                    .any(|o| spin_isomorphism(&o.graph, &d2.graph, true).is_some())
                {
                    out.push(Corner {
                        graph: d2.graph,
                        sites: [d.site, d2.site],
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{are_isomorphic, connected_genus, IsoOptions};
    use crate::spin_structure::SpinBuilder;

    fn legal(ts: &[i32]) -> Vec<(i32, bool)> {
        ts.iter().map(|&t| (t, true)).collect()
    }

    fn two_disks() -> SpinGraph {
        // Oracle by hand: r=9, {1,5,h}|{h',5,5}; h = -2-6 = 1 mod 9 is legal, h' = 6 illegal
        let mut b = SpinBuilder::new(9);
        let v1 = b.open_vertex(0, 1);
        let v2 = b.open_vertex(0, 1);
        b.boundary(v1, 0, 1, true);
        b.boundary(v1, 0, 5, true);
        let h1 = b.boundary(v1, 0, 1, true);
        let h2 = b.boundary(v2, 0, 6, false);
        b.boundary(v2, 0, 5, true);
        b.boundary(v2, 0, 5, true);
        b.pair(h1, h2);
        b.build()
    }

    #[test]
    fn smoothing_two_disks_gives_the_disk() {
        let s = two_disks();
        assert!(
            validate_spin(&s).is_valid(),
            "{:?}",
            validate_spin(&s).violations
        );
        let t = smooth(&s, Site::Edge(HalfEdgeId(2))).unwrap();
        let expect = SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[]);
        assert!(spin_isomorphism(&t, &expect, true).is_some());
        assert_eq!(
            connected_genus(t.base()).unwrap(),
            connected_genus(s.base()).unwrap()
        );
    }

    #[test]
    fn smoothing_cb_opens_the_vertex() {
        let mut b = SpinBuilder::new(3);
        let v = b.closed_vertex(0);
        b.internal(v, 1);
        b.internal(v, 1);
        let c = b.internal(v, 2);
        b.cb(c);
        let s = b.build();
        assert!(
            validate_spin(&s).is_valid(),
            "{:?}",
            validate_spin(&s).violations
        );
        let t = smooth(&s, Site::Cb(c)).unwrap();
        let g = t.base();
        assert!(g.is_open(VertexId(0)));
        assert_eq!(g.num_boundaries(VertexId(0)), 1);
        assert!(validate_spin(&t).is_valid());
    }

    #[test]
    fn internal_self_edge_raises_genus_hat() {
        let mut b = SpinBuilder::new(2);
        let v = b.open_vertex(0, 1);
        b.boundary(v, 0, 0, true);
        let a = b.internal(v, 0);
        let c = b.internal(v, 0);
        b.pair(a, c);
        let t = smooth(&b.build(), Site::Edge(a)).unwrap();
        assert_eq!(t.base().genus_hat(VertexId(0)), 1);
        assert_eq!(t.base().num_boundaries(VertexId(0)), 1);
    }

    #[test]
    fn boundary_self_edge_across_blocks_merges_them() {
        let mut b = SpinBuilder::new(2);
        let v = b.open_vertex(0, 2);
        b.boundary(v, 0, 0, true);
        let a = b.boundary(v, 0, 0, true);
        b.boundary(v, 1, 0, true);
        let c = b.boundary(v, 1, 0, true);
        b.pair(a, c);
        let t = smooth(&b.build(), Site::Edge(a)).unwrap();
        let g = t.base();
        assert_eq!(g.genus_hat(VertexId(0)), 1);
        assert_eq!(g.num_boundaries(VertexId(0)), 1);
        assert_eq!(g.blocks(VertexId(0))[0].len(), 2);
    }

    #[test]
    fn boundary_self_edge_within_a_block_is_rejected() {
        let mut b = SpinBuilder::new(2);
        let v = b.open_vertex(0, 1);
        let a = b.boundary(v, 0, 0, true);
        let c = b.boundary(v, 0, 0, true);
        b.boundary(v, 0, 0, true);
        b.pair(a, c);
        assert_eq!(
            smooth(&b.build(), Site::Edge(a)),
            Err(OpsError::SameBlockSelfEdge(a))
        );
    }

    #[test]
    fn detach_boundary_edge_keeps_decorations() {
        let s = two_disks();
        let t = detach(&s, Site::Edge(HalfEdgeId(2))).unwrap();
        assert_eq!(t.base().components().len(), 2);
        assert_eq!(t.tw(HalfEdgeId(2)), 1);
        assert!(t.alt(HalfEdgeId(2)));
        assert_eq!(t.tw(HalfEdgeId(3)), 6);
        assert!(!t.alt(HalfEdgeId(3)));
        assert!(t.anchors().is_empty());
    }

    #[test]
    fn detach_separating_internal_edge_adds_anchor() {
        // r=3: open {b=1, h=0} -- closed {h'=1, x=0, y=0}
        let mut b = SpinBuilder::new(3);
        let o = b.open_vertex(0, 1);
        let c = b.closed_vertex(0);
        b.boundary(o, 0, 1, true);
        let h = b.internal(o, 0);
        let hp = b.internal(c, 1);
        b.internal(c, 0);
        b.internal(c, 0);
        b.pair(h, hp);
        let s = b.build();
        assert!(
            validate_spin(&s).is_valid(),
            "{:?}",
            validate_spin(&s).violations
        );
        let t = detach(&s, Site::Edge(h)).unwrap();
        assert_eq!(t.anchors(), vec![hp]);
    }

    #[test]
    fn detach_lone_cb_tail_makes_anchor_and_ncb() {
        let mut b = SpinBuilder::new(3);
        let v = b.closed_vertex(0);
        b.internal(v, 1);
        b.internal(v, 1);
        let c = b.internal(v, 2);
        b.cb(c);
        let t = detach(&b.build(), Site::Cb(c)).unwrap();
        assert!(t.is_anchor(c) && t.is_ncb(c));
    }

    #[test]
    fn circle_disk_has_two_boundary_graphs() {
        let s = SpinGraph::disk(9, &legal(&[1, 5, 5, 5]), &[]);
        let ds = codim1_boundaries(&s).unwrap();
        assert_eq!(ds.len(), 2);
        for d in &ds {
            let Site::Edge(h) = d.site else {
                panic!("boundary edge expected")
            };
            let p = d.graph.base().sigma1(h);
            let mut tws = [d.graph.tw(h), d.graph.tw(p)];
            tws.sort();
            assert_eq!(tws, [1, 6]);
            for x in [h, p] {
                assert_eq!(d.graph.alt(x), d.graph.tw(x) == 1);
            }
            let back = smooth(&d.graph, d.site).unwrap();
            assert!(spin_isomorphism(&back, &s, true).is_some());
        }
    }

    #[test]
    fn sphere_disk_has_six_boundary_graphs() {
        let s = SpinGraph::disk(2, &legal(&[0, 0, 0]), &[0]);
        let ds = codim1_boundaries(&s).unwrap();
        assert_eq!(ds.len(), 6);
        for d in &ds {
            let back = smooth(&d.graph, d.site).unwrap();
            assert!(spin_isomorphism(&back, &s, true).is_some());
        }
    }

    #[test]
    fn one_boundary_tail_admits_no_split() {
        let s = SpinGraph::disk(3, &[(1, true)], &[0]);
        assert!(validate_spin(&s).is_valid());
        assert!(codim1_boundaries(&s).unwrap().is_empty());
    }

    #[test]
    fn no_boundary_tails_allows_cb() {
        // r=3, internal twists 1,1: 2+2 = 4 = -2 mod 3, closed sum 2 = -1 mod 3.
        let s = SpinGraph::disk(3, &[], &[1, 1]);
        assert!(
            validate_spin(&s).is_valid(),
            "{:?}",
            validate_spin(&s).violations
        );
        let ds = codim1_boundaries(&s).unwrap();
        assert!(ds.iter().any(|d| matches!(d.site, Site::Cb(_))));
        for d in &ds {
            let back = smooth(&d.graph, d.site).unwrap();
            assert!(are_isomorphic(back.base(), s.base(), &IsoOptions::with_markings()).is_some());
        }
    }

    #[test]
    fn sphere_corners_smooth_back() {
        let s = SpinGraph::disk(2, &legal(&[0, 0, 0]), &[0]);
        let cs = codim2_boundaries(&s).unwrap();
        assert!(!cs.is_empty());
        for c in &cs {
            assert_eq!(c.graph.base().edges().len(), 2);
            let once = smooth(&c.graph, c.sites[1]).unwrap();
            let twice = smooth(&once, c.sites[0]).unwrap();
            assert!(spin_isomorphism(&twice, &s, true).is_some());
        }
    }
}
