//! Oracles and sample pools shared by the integration and acceptance tests.
#![allow(dead_code)]

use rspin::graph_core::{HalfEdgeId, VertexKind};
use rspin::graph_ops::{codim1_boundaries, smooth_mapped, split_vertex, Site};
use rspin::point_insertion::{
    boundary_strata, enumerate_smooth_rh, BoundaryStratumRef, BoundaryType, RhGraph,
};
use rspin::spin_structure::{spin_exists, vertex_witten_rank, SpinBuilder, SpinGraph};

pub const CIRCLE: (u32, u32, &[i32], &[i32]) = (9, 3, &[1, 5, 5, 5], &[]);
pub const SPHERE: (u32, u32, &[i32], &[i32]) = (2, 0, &[0, 0, 0], &[0]);

/// Direct reading of conditions (i)-(viii) for one open vertex with
/// genus_hat 0, one boundary circle and no edges, so g(v) = 0.
pub fn oracle_accepts(
    r: u32,
    boundary: &[(i32, bool)],
    internal: &[i32],
    anchor: &[bool],
    ncb: &[bool],
) -> bool {
    let r = r as i64;
    let in_range = |t: i32| (-1..r).contains(&(t as i64));
    if !boundary.iter().all(|&(t, _)| in_range(t)) || !internal.iter().all(|&t| in_range(t)) {
        return false;
    }
    // (i) with g = 0: 2a + b = -2 mod r, and (2a + b + 2) / r has the parity of #legal.
    let s: i64 = 2 * internal.iter().map(|&t| t as i64).sum::<i64>()
        + boundary.iter().map(|&(t, _)| t as i64).sum::<i64>();
    if (s + 2).rem_euclid(r) != 0 {
        return false;
    }
    let legal = boundary.iter().filter(|&&(_, a)| a).count() as i64;
    if ((s + 2) / r - legal).rem_euclid(2) != 0 {
        return false;
    }
    // (iii) the component has an open vertex, so there are no anchors, and a
    // tail of twist -1 would have to be one.
    if anchor.iter().any(|&a| a) {
        return false;
    }
    if internal.contains(&-1) {
        return false;
    }
    // (iv) no boundary half-edge has twist -1.
    if boundary.iter().any(|&(t, _)| t == -1) {
        return false;
    }
    // (v) ncb tails have twist r-1.
    if internal
        .iter()
        .zip(ncb)
        .any(|(&t, &n)| n && t as i64 != r - 1)
    {
        return false;
    }
    // (vi) holds vacuously without anchors; (vii) needs boundary edges.
    // (viii)
    boundary.iter().all(|&(t, a)| {
        let odd = (t as i64).rem_euclid(2) == 1;
        if r % 2 == 1 {
            a == odd
        } else {
            !odd
        }
    })
}

pub fn single_vertex(
    r: u32,
    boundary: &[(i32, bool)],
    internal: &[i32],
    anchor: &[bool],
    ncb: &[bool],
) -> SpinGraph {
    let mut b = SpinBuilder::new(r);
    let v = b.open_vertex(0, 1);
    for (i, &(t, legal)) in boundary.iter().enumerate() {
        let h = b.boundary(v, 0, t, legal);
        b.mark(h, i as u32 + 1);
    }
    for (i, &t) in internal.iter().enumerate() {
        let h = b.internal(v, t);
        b.mark(h, i as u32 + 1);
        if anchor[i] {
            b.anchor(h);
        }
        if ncb[i] {
            b.ncb(h);
        }
    }
    b.build()
}

/// Every tuple over `values` of length `n`.
pub fn tuples<T: Clone>(values: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                values.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Non-decreasing tuples over `values` of length `n`.
pub fn multisets(values: &[i32], n: usize) -> Vec<Vec<i32>> {
    tuples(values, n)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] <= w[1]))
        .collect()
}

/// Twists a legal boundary tail can carry at level `h`.
pub fn legal_boundary_twists(r: u32, h: u32) -> Vec<i32> {
    let (r, h) = (r as i32, h as i32);
    (0..r)
        .filter(|&t| t >= r - 2 - 2 * h && if r % 2 == 1 { t % 2 == 1 } else { t % 2 == 0 })
        .collect()
}

/// Moduli data (r, h, B, I) with a spin structure and dimension in `0..=max_dim`.
pub fn moduli_params(
    rs: &[u32],
    max_b: usize,
    max_i: usize,
    max_dim: i64,
) -> Vec<(u32, u32, Vec<i32>, Vec<i32>)> {
    let mut out = Vec::new();
    for &r in rs {
        for h in 0..=(r - 2) / 2 {
            let bvals = legal_boundary_twists(r, h);
            let ivals: Vec<i32> = (0..r as i32).collect();
            for nb in 0..=max_b {
                for ni in 0..=max_i {
                    let dim = nb as i64 + 2 * ni as i64 - 3;
                    if !(0..=max_dim).contains(&dim) {
                        continue;
                    }
                    for b in multisets(&bvals, nb) {
                        for i in multisets(&ivals, ni) {
                            if spin_exists(r, 0, &i, &b) {
                                out.push((r, h, b.clone(), i));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// BI facets of enumerated cells, together with the cell.
pub fn bi_pool(max_dim: i64) -> Vec<(RhGraph, BoundaryStratumRef)> {
    let mut out = Vec::new();
    for (r, h, b, i) in moduli_params(&[2, 3, 4, 5, 9], 4, 2, max_dim) {
        for cell in enumerate_smooth_rh(r, h, &b, &i).expect("enumeration") {
            for f in boundary_strata(&cell).expect("strata") {
                if f.kind == BoundaryType::Bi {
                    out.push((cell.clone(), f));
                }
            }
        }
    }
    out
}

fn site_like(s: Site, h: HalfEdgeId) -> Site {
    match s {
        Site::Edge(_) => Site::Edge(h),
        Site::Cb(_) => Site::Cb(h),
    }
}

/// Graphs with exactly two smoothable sites, built by splitting smooth cells twice.
pub fn two_site_pool() -> Vec<(SpinGraph, Site, Site)> {
    let mut out = Vec::new();
    for (r, h, b, i) in moduli_params(&[2, 3, 4, 5, 9], 4, 2, 2) {
        for cell in enumerate_smooth_rh(r, h, &b, &i).expect("enumeration") {
            for comp in cell.components() {
                for d in codim1_boundaries(comp).expect("facets") {
                    for v in d.graph.base().vertex_ids() {
                        let Ok(splits) = split_vertex(&d.graph, v) else {
                            continue;
                        };
                        for d2 in splits {
                            out.push((d2.graph, d.site, d2.site));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Smooths `s1` then `s2`, and `s2` then `s1`.
pub fn smooth_both_orders(g: &SpinGraph, s1: Site, s2: Site) -> (SpinGraph, SpinGraph) {
    let once = |a: Site, b: Site| {
        let (t, map) = smooth_mapped(g, a).expect("first smoothing");
        let b2 = site_like(b, map[b.half_edge().0].expect("second site survives"));
        smooth_mapped(&t, b2).expect("second smoothing").0
    };
    (once(s1, s2), once(s2, s1))
}

/// Checks every facet of `cell`: smoothing gives back the component, and each
/// open vertex of the facet satisfies rank = #legal - 1 (mod 2). Returns the
/// number of facets checked.
pub fn facet_round_trip(cell: &RhGraph) -> Result<usize, String> {
    let mut n = 0;
    for f in boundary_strata(cell).map_err(|e| e.to_string())? {
        let comp = cell.component(f.component);
        let back = smooth_mapped(&f.facet.graph, f.facet.site)
            .map_err(|e| e.to_string())?
            .0;
        if rspin::spin_structure::spin_isomorphism(&back, comp, true).is_none() {
            return Err(format!("facet {n} does not smooth back to its component"));
        }
        let g = f.facet.graph.base();
        for v in g.vertex_ids() {
            if g.vertex_kind(v) == VertexKind::Closed {
                continue;
            }
            let rank = vertex_witten_rank(&f.facet.graph, v).map_err(|e| e.to_string())?;
            let legal = g
                .half_edges_at(v)
                .iter()
                .filter(|&&h| g.is_boundary(h) && f.facet.graph.alt(h))
                .count() as i64;
            if (rank - legal + 1).rem_euclid(2) != 0 {
                return Err(format!("rank parity fails at {v} of facet {n}"));
            }
        }
        n += 1;
    }
    Ok(n)
}
