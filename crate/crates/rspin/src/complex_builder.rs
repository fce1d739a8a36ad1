//! The glued moduli space as a cell complex of dimension at most two.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::graph_core::HalfEdgeId;
use crate::graph_ops::{codim1_boundaries, codim2_boundaries, smooth_mapped, Site};
use crate::orientation::{pi_pair_sign, OrientationError, PiPairSign, Sign};
use crate::point_insertion::{
    boundary_strata, enumerate_smooth_rh, insert_point, pi_forward, rh_isomorphic, stratum_graph,
    BoundaryStratumRef, BoundaryType, HalfRef, PiError, RhGraph,
};
use crate::spin_structure::{spin_exists, SpinGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("dimension {0} is outside 0..=2")]
    UnsupportedDimension(i64),
    #[error("BI facet {facet} of cell {cell} has no AI partner")]
    UnmatchedBi { cell: usize, facet: usize },
    #[error("AI facet {facet} of cell {cell} is matched {times} times")]
    AiMatchCount {
        cell: usize,
        facet: usize,
        times: usize,
    },
    #[error("cell {cell} is not a polygon: {detail}")]
    NotPolygon { cell: usize, detail: String },
    #[error("corner {corner} of cell {cell} has no image across a PI pair")]
    UnmatchedCorner { cell: usize, corner: usize },
    #[error(transparent)]
    Pi(#[from] PiError),
    #[error(transparent)]
    Orientation(#[from] OrientationError),
}

/// A PI identification between a BI facet and an AI facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiPair {
    pub bi: (usize, usize),
    pub ai: (usize, usize),
    pub sign: PiPairSign,
}

/// A codimension-2 stratum of a two-dimensional cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerRecord {
    pub stratum: RhGraph,
    pub sites: [HalfRef; 2],
    /// `facets[k]` is the facet obtained by smoothing the other site, so it
    /// keeps `sites[k]`.
    pub facets: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellComplex {
    pub r: u32,
    pub level: u32,
    pub dimension: usize,
    pub cells: Vec<RhGraph>,
    pub facets: Vec<Vec<BoundaryStratumRef>>,
    pub pairs: Vec<PiPair>,
    pub free: Vec<(usize, usize, BoundaryType)>,
    pub corners: Vec<Vec<CornerRecord>>,
    /// 0-cell class of each endpoint: facets in dimension 1, corners in dimension 2.
    pub zero_cell_of: BTreeMap<(usize, usize), usize>,
    pub num_zero_cells: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.0[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }

    /// Dense class numbers in order of first appearance.
    fn classes(&mut self) -> (Vec<usize>, usize) {
        let mut ids = BTreeMap::new();
        let out: Vec<usize> = (0..self.0.len())
            .map(|x| {
                let root = self.find(x);
                let n = ids.len();
                *ids.entry(root).or_insert(n)
            })
            .collect();
        (out, ids.len())
    }
}

pub fn build_complex(
    r: u32,
    level: u32,
    boundary: &[i32],
    internal: &[i32],
) -> Result<CellComplex, BuildError> {
    let dim = boundary.len() as i64 + 2 * internal.len() as i64 - 3;
    if !spin_exists(r, 0, internal, boundary) {
        return build_from_cells(r, level, dim.clamp(0, 2) as usize, Vec::new());
    }
    if !(0..=2).contains(&dim) {
        return Err(BuildError::UnsupportedDimension(dim));
    }
    let cells = enumerate_smooth_rh(r, level, boundary, internal)?;
    build_from_cells(r, level, dim as usize, cells)
}

/// Assembles a complex from given top cells.
pub fn build_from_cells(
    r: u32,
    level: u32,
    dimension: usize,
    cells: Vec<RhGraph>,
) -> Result<CellComplex, BuildError> {
    let mut facets = Vec::new();
    for c in &cells {
        facets.push(boundary_strata(c)?);
    }
    let strata: Vec<Vec<RhGraph>> = cells
        .iter()
        .zip(&facets)
        .map(|(c, fs)| fs.iter().map(|f| stratum_graph(c, f)).collect())
        .collect();

    let mut pairs = Vec::new();
    let mut ai_hits: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut free = Vec::new();
    for (ci, fs) in facets.iter().enumerate() {
        for (fi, f) in fs.iter().enumerate() {
            match f.kind {
                BoundaryType::Bi => {
                    let (d, ai) = pi_forward(&cells[ci], f)?;
                    let image = stratum_graph(&d, &ai);
                    let target = cells.iter().enumerate().find_map(|(di, cell)| {
                        if !rh_isomorphic(cell, &d) {
                            return None;
                        }
                        facets[di]
                            .iter()
                            .enumerate()
                            .find(|(fj, g)| {
                                g.kind == BoundaryType::Ai
                                    && rh_isomorphic(&strata[di][*fj], &image)
                            })
                            .map(|(fj, _)| (di, fj))
                    });
                    let Some(target) = target else {
                        return Err(BuildError::UnmatchedBi {
                            cell: ci,
                            facet: fi,
                        });
                    };
                    *ai_hits.entry(target).or_default() += 1;
                    let sign = pi_pair_sign(&cells[ci], f)?;
                    pairs.push(PiPair {
                        bi: (ci, fi),
                        ai: target,
                        sign,
                    });
                }
                BoundaryType::Ai => {}
                kind => free.push((ci, fi, kind)),
            }
        }
    }
    for (ci, fs) in facets.iter().enumerate() {
        for (fi, f) in fs.iter().enumerate() {
            let times = ai_hits.get(&(ci, fi)).copied().unwrap_or(0);
            if f.kind == BoundaryType::Ai && times != 1 {
                return Err(BuildError::AiMatchCount {
                    cell: ci,
                    facet: fi,
                    times,
                });
            }
        }
    }

    let mut complex = CellComplex {
        r,
        level,
        dimension,
        cells,
        facets,
        pairs,
        free,
        corners: Vec::new(),
        zero_cell_of: BTreeMap::new(),
        num_zero_cells: 0,
    };
    match dimension {
        1 => glue_endpoints(&mut complex),
        2 => glue_corners(&mut complex, &strata)?,
        _ => {}
    }
    Ok(complex)
}

fn glue_endpoints(x: &mut CellComplex) {
    let keys: Vec<(usize, usize)> = x
        .facets
        .iter()
        .enumerate()
        .flat_map(|(c, fs)| (0..fs.len()).map(move |f| (c, f)))
        .collect();
    let index: BTreeMap<(usize, usize), usize> =
        keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut uf = UnionFind::new(keys.len());
    for p in &x.pairs {
        uf.union(index[&p.bi], index[&p.ai]);
    }
    let (class, n) = uf.classes();
    x.zero_cell_of = keys
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, class[i]))
        .collect();
    x.num_zero_cells = n;
}

/// Smooths one enumerated site of a stratum, carrying dashed lines along.
fn smooth_site(g: &RhGraph, site: HalfRef) -> Result<RhGraph, BuildError> {
    let comp = g.component(site.0);
    let s = if comp.base().is_cb(site.1) {
        Site::Cb(site.1)
    } else {
        Site::Edge(site.1)
    };
    let (t, map) = smooth_mapped(comp, s).map_err(PiError::from)?;
    Ok(g.replace_component(site.0, t, &map))
}

/// Identity on the half-edges of `comp`; splits append new half-edges.
fn identity(comp: &SpinGraph) -> Vec<Option<HalfEdgeId>> {
    comp.base().half_edge_ids().map(Some).collect()
}

fn cell_corners(cell: &RhGraph) -> Result<Vec<(RhGraph, [HalfRef; 2])>, BuildError> {
    let mut out = Vec::new();
    for (i, comp) in cell.components().iter().enumerate() {
        for c in codim2_boundaries(comp).map_err(PiError::from)? {
            let stratum = cell.replace_component(i, c.graph.clone(), &identity(comp));
            out.push((
                stratum,
                [(i, c.sites[0].half_edge()), (i, c.sites[1].half_edge())],
            ));
        }
    }
    let n = cell.components().len();
    for i in 0..n {
        for j in i + 1..n {
            let fi = codim1_boundaries(cell.component(i)).map_err(PiError::from)?;
            let fj = codim1_boundaries(cell.component(j)).map_err(PiError::from)?;
            for a in &fi {
                for b in &fj {
                    let stratum = cell
                        .replace_component(i, a.graph.clone(), &identity(cell.component(i)))
                        .replace_component(j, b.graph.clone(), &identity(cell.component(j)));
                    out.push((stratum, [(i, a.site.half_edge()), (j, b.site.half_edge())]));
                }
            }
        }
    }
    Ok(out)
}

fn glue_corners(x: &mut CellComplex, strata: &[Vec<RhGraph>]) -> Result<(), BuildError> {
    for (ci, cell) in x.cells.iter().enumerate() {
        let mut records = Vec::new();
        for (stratum, sites) in cell_corners(cell)? {
            let mut adj = Vec::new();
            for k in 0..2 {
                let other = sites[1 - k];
                let face = smooth_site(&stratum, other)?;
                let hit = strata[ci].iter().position(|f| rh_isomorphic(f, &face));
                match hit {
                    Some(f) => adj.push(f),
                    None => {
                        return Err(BuildError::NotPolygon {
                            cell: ci,
                            detail: "corner does not lie on an enumerated facet".into(),
                        })
                    }
                }
            }
            records.push(CornerRecord {
                stratum,
                sites,
                facets: [adj[0], adj[1]],
            });
        }
        check_polygon(ci, x.facets[ci].len(), &records)?;
        x.corners.push(records);
    }

    let keys: Vec<(usize, usize)> = x
        .corners
        .iter()
        .enumerate()
        .flat_map(|(c, cs)| (0..cs.len()).map(move |k| (c, k)))
        .collect();
    let index: BTreeMap<(usize, usize), usize> =
        keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut uf = UnionFind::new(keys.len());
    for p in &x.pairs {
        let (bc, bf) = p.bi;
        let (ac, af) = p.ai;
        let bi_comp = x.facets[bc][bf].component;
        for (k, corner) in x.corners[bc].iter().enumerate() {
            let Some(slot) = corner.facets.iter().position(|&f| f == bf) else {
                continue;
            };
            // facets[k] keeps sites[k], so this is the BI edge.
            let kept = corner.sites[slot];
            debug_assert_eq!(kept.0, bi_comp);
            let (image, _, _) = insert_point(&corner.stratum, kept.0, kept.1)?;
            let mut found = None;
            for (m, other) in x.corners[ac].iter().enumerate() {
                let Some(oslot) = other.facets.iter().position(|&f| f == af) else {
                    continue;
                };
                let ai_site = other.sites[oslot];
                let reduced = smooth_site(&other.stratum, ai_site)?;
                if rh_isomorphic(&reduced, &image) {
                    found = Some(m);
                    break;
                }
            }
            let Some(m) = found else {
                return Err(BuildError::UnmatchedCorner {
                    cell: bc,
                    corner: k,
                });
            };
            uf.union(index[&(bc, k)], index[&(ac, m)]);
        }
    }
    let (class, n) = uf.classes();
    x.zero_cell_of = keys
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, class[i]))
        .collect();
    x.num_zero_cells = n;
    Ok(())
}

fn check_polygon(
    cell: usize,
    num_facets: usize,
    corners: &[CornerRecord],
) -> Result<(), BuildError> {
    let fail = |detail: String| Err(BuildError::NotPolygon { cell, detail });
    if num_facets < 2 {
        return fail(format!("{num_facets} facets"));
    }
    let mut deg = vec![0; num_facets];
    for c in corners {
        if c.facets[0] == c.facets[1] {
            return fail("corner meets one facet twice".into());
        }
        deg[c.facets[0]] += 1;
        deg[c.facets[1]] += 1;
    }
    if let Some(f) = deg.iter().position(|&d| d != 2) {
        return fail(format!("facet {f} meets {} corners", deg[f]));
    }
    let mut seen = vec![false; num_facets];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(f) = queue.pop_front() {
        for c in corners {
            if c.facets.contains(&f) {
                let g = if c.facets[0] == f {
                    c.facets[1]
                } else {
                    c.facets[0]
                };
                if !seen[g] {
                    seen[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return fail("facets and corners do not form a single cycle".into());
    }
    Ok(())
}

/// Components of the glued complex as sets of top cells.
pub fn cell_components(x: &CellComplex) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(x.cells.len());
    for p in &x.pairs {
        uf.union(p.bi.0, p.ai.0);
    }
    let (class, n) = uf.classes();
    let mut out = vec![Vec::new(); n];
    for (c, &k) in class.iter().enumerate() {
        out[k].push(c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentReport {
    pub cells: Vec<usize>,
    /// Sorted descending facet counts of the top cells.
    pub facet_counts: Vec<usize>,
    pub zero_cells: usize,
    pub one_cells: usize,
    pub two_cells: usize,
    pub euler: i64,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologyReport {
    pub dimension: usize,
    pub components: Vec<ComponentReport>,
    pub zero_cells: usize,
    pub one_cells: usize,
    pub two_cells: usize,
    pub euler: i64,
    pub closed: bool,
    pub free_census: BTreeMap<BoundaryType, usize>,
    pub num_pairs: usize,
    pub bi_count: usize,
    pub ai_count: usize,
    pub perfect_matching: bool,
    pub all_pairs_opposite: bool,
    pub cocycle_trivial: bool,
    pub canonical_consistent: bool,
    /// Every 0-cell meets exactly two edge ends (dimension 1) or every
    /// 1-cell has two sides (dimension 2).
    pub manifold_check: bool,
}

/// Orientation signs s(C) with s(C) s(D) = -pi_pair_sign along every pair,
/// if they exist.
pub fn solve_orientation_cocycle(x: &CellComplex) -> Option<Vec<Sign>> {
    let n = x.cells.len();
    let mut adj: Vec<Vec<(usize, Sign)>> = vec![Vec::new(); n];
    for p in &x.pairs {
        let w = Sign::Minus * p.sign.sign;
        adj[p.bi.0].push((p.ai.0, w));
        adj[p.ai.0].push((p.bi.0, w));
    }
    let mut s: Vec<Option<Sign>> = vec![None; n];
    for start in 0..n {
        if s[start].is_some() {
            continue;
        }
        s[start] = Some(Sign::Plus);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let sc = s[c].expect("visited");
            for &(d, w) in &adj[c] {
                let want = sc * w;
                match s[d] {
                    None => {
                        s[d] = Some(want);
                        queue.push_back(d);
                    }
                    Some(v) if v != want => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(s.into_iter().map(|v| v.expect("all visited")).collect())
}

pub fn topology_report(x: &CellComplex) -> TopologyReport {
    let comps = cell_components(x);
    let mut free_census = BTreeMap::new();
    for &(_, _, k) in &x.free {
        *free_census.entry(k).or_insert(0) += 1;
    }
    let count = |k: BoundaryType| x.facets.iter().flatten().filter(|f| f.kind == k).count();
    let (bi_count, ai_count) = (count(BoundaryType::Bi), count(BoundaryType::Ai));
    let mut components = Vec::new();
    for cells in &comps {
        let inside = |c: usize| cells.contains(&c);
        let pairs = x.pairs.iter().filter(|p| inside(p.bi.0)).count();
        let free = x.free.iter().filter(|f| inside(f.0)).count();
        let mut zero: Vec<usize> = x
            .zero_cell_of
            .iter()
            .filter(|((c, _), _)| inside(*c))
            .map(|(_, &z)| z)
            .collect();
        zero.sort_unstable();
        zero.dedup();
        let mut facet_counts: Vec<usize> = cells.iter().map(|&c| x.facets[c].len()).collect();
        facet_counts.sort_unstable_by(|a, b| b.cmp(a));
        let (v, e, f) = match x.dimension {
            0 => (cells.len(), 0, 0),
            1 => (zero.len(), cells.len(), 0),
            _ => (zero.len(), pairs + free, cells.len()),
        };
        components.push(ComponentReport {
            cells: cells.clone(),
            facet_counts,
            zero_cells: v,
            one_cells: e,
            two_cells: f,
            euler: v as i64 - e as i64 + f as i64,
            closed: free == 0,
        });
    }
    let sum = |f: fn(&ComponentReport) -> usize| components.iter().map(f).sum::<usize>();
    let (zero_cells, one_cells, two_cells) = (
        sum(|c| c.zero_cells),
        sum(|c| c.one_cells),
        sum(|c| c.two_cells),
    );
    let all_pairs_opposite = x.pairs.iter().all(|p| p.sign.sign == Sign::Minus);
    let manifold_check = match x.dimension {
        1 => {
            let mut ends: BTreeMap<usize, usize> = BTreeMap::new();
            for &z in x.zero_cell_of.values() {
                *ends.entry(z).or_default() += 1;
            }
            let free_ends: Vec<usize> = x
                .free
                .iter()
                .map(|&(c, f, _)| x.zero_cell_of[&(c, f)])
                .collect();
            ends.iter()
                .all(|(z, &n)| n == 2 || (n == 1 && free_ends.contains(z)))
        }
        2 => 2 * x.pairs.len() + x.free.len() == x.facets.iter().map(|f| f.len()).sum::<usize>(),
        _ => true,
    };
    TopologyReport {
        dimension: x.dimension,
        zero_cells,
        one_cells,
        two_cells,
        euler: zero_cells as i64 - one_cells as i64 + two_cells as i64,
        closed: x.free.is_empty(),
        components,
        free_census,
        num_pairs: x.pairs.len(),
        bi_count,
        ai_count,
        perfect_matching: bi_count == ai_count && x.pairs.len() == bi_count,
        all_pairs_opposite,
        cocycle_trivial: solve_orientation_cocycle(x).is_some(),
        canonical_consistent: all_pairs_opposite,
        manifold_check,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_complex() {
        let x = build_complex(9, 3, &[1, 5, 5, 5], &[]).unwrap();
        let t = topology_report(&x);
        assert_eq!(x.cells.len(), 12);
        assert_eq!(t.one_cells, 12);
        assert_eq!(t.zero_cells, 12);
        assert_eq!(t.num_pairs, 12);
        assert_eq!(t.euler, 0);
        assert!(t.closed && t.perfect_matching && t.manifold_check);
        assert_eq!(t.components.len(), 1);
        assert!(t.all_pairs_opposite && t.cocycle_trivial);
    }

    #[test]
    fn sphere_complex() {
        let x = build_complex(2, 0, &[0, 0, 0], &[0]).unwrap();
        let t = topology_report(&x);
        assert_eq!(t.two_cells, 16);
        assert_eq!(t.components.len(), 2);
        for c in &t.components {
            assert_eq!(c.facet_counts, vec![6, 6, 2, 2, 2, 2, 2, 2]);
            assert_eq!(c.one_cells, 12);
            assert_eq!(c.zero_cells, 6);
            assert_eq!(c.euler, 2);
            assert!(c.closed);
        }
        assert!(t.all_pairs_opposite && t.cocycle_trivial);
    }

    #[test]
    fn empty_when_no_spin_structure() {
        let x = build_complex(9, 0, &[7, 7], &[]).unwrap();
        assert!(x.cells.is_empty());
        let t = topology_report(&x);
        assert_eq!((t.components.len(), t.euler), (0, 0));
    }

    #[test]
    fn dimension_out_of_range_is_rejected() {
        assert_eq!(
            build_complex(2, 0, &[0, 0, 0, 0, 0, 0], &[]),
            Err(BuildError::UnsupportedDimension(3))
        );
    }
}
