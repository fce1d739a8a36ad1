//! Sign calculus for canonical relative orientations.

use std::fmt;
use std::ops::Mul;

use thiserror::Error;

use crate::graph_core::{HalfEdgeId, VertexId};
use crate::graph_ops::{Degeneration, Site};
use crate::point_insertion::{pi_forward, BoundaryStratumRef, BoundaryType, PiError, RhGraph};
use crate::spin_structure::{
    closed_vertex_rank, m_delta, vertex_m_delta, vertex_witten_rank, SpinError, SpinGraph,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(e: i64) -> Sign {
        if e.rem_euclid(2) == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientationError {
    #[error("boundary marking set is empty")]
    EmptyBoundary,
    #[error("tokens have different references")]
    ReferenceMismatch,
    #[error("facet is not a genus-0 NS boundary edge between two open vertices")]
    NotOpenOpenFacet,
    #[error("facet is not an internal edge between a closed and an open vertex")]
    NotClosedOpenFacet,
    #[error("m_delta is not additive: {total} != {parts:?}")]
    NotAdditive { total: i64, parts: Vec<i64> },
    #[error("tokens do not match across the pair")]
    TokenMismatch,
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Pi(#[from] PiError),
}

/// A sign relative to the canonical orientation of a reference object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationToken {
    pub reference: String,
    pub sign: Sign,
}

impl OrientationToken {
    pub fn canonical(reference: impl Into<String>) -> Self {
        Self {
            reference: reference.into(),
            sign: Sign::Plus,
        }
    }

    pub fn compose(&self, other: &OrientationToken) -> Result<OrientationToken, OrientationError> {
        if self.reference != other.reference {
            return Err(OrientationError::ReferenceMismatch);
        }
        Ok(OrientationToken {
            reference: self.reference.clone(),
            sign: self.sign * other.sign,
        })
    }
}

/// Moving the base point of the boundary order one step: `(-1)^(|B|-1)`.
pub fn basepoint_transition_sign(num_boundary: usize) -> Result<Sign, OrientationError> {
    if num_boundary == 0 {
        return Err(OrientationError::EmptyBoundary);
    }
    Ok(Sign::from_parity(num_boundary as i64 - 1))
}

/// `(-1)^|E(G)|` over the dashed lines.
pub fn rh_sign(g: &RhGraph) -> Sign {
    Sign::from_parity(g.dashed().len() as i64)
}

/// Constituent signs of the restriction of a canonical orientation to an NS
/// boundary facet splitting a disk into `v1` (illegal half) and `v2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenOpenRestriction {
    pub v1: VertexId,
    pub v2: VertexId,
    pub k1: usize,
    pub k2: usize,
    pub ranks: (i64, i64),
    pub m_deltas: (i64, i64),
    pub m_delta_total: i64,
    pub moduli_sign: Sign,
    pub commute_sign: Sign,
    pub bundle_sign: Sign,
    pub m_delta_sign: Sign,
    pub net: Sign,
}

fn edge_halves(facet: &Degeneration) -> Option<(HalfEdgeId, HalfEdgeId)> {
    let Site::Edge(h) = facet.site else {
        return None;
    };
    let s = &facet.graph;
    let p = s.base().sigma1(h);
    if p == h {
        return None;
    }
    Some((h, p))
}

pub fn restriction_sign_open_open(
    facet: &Degeneration,
) -> Result<OpenOpenRestriction, OrientationError> {
    let s: &SpinGraph = &facet.graph;
    let g = s.base();
    let (a, b) = edge_halves(facet).ok_or(OrientationError::NotOpenOpenFacet)?;
    if !g.is_boundary(a) || g.num_vertices() != 2 || s.is_ramond(a) || s.alt(a) == s.alt(b) {
        return Err(OrientationError::NotOpenOpenFacet);
    }
    let (h1, h2) = if s.alt(a) { (b, a) } else { (a, b) };
    let (v1, v2) = (g.sigma0(h1), g.sigma0(h2));
    let tails_at = |v: VertexId| {
        g.half_edges_at(v)
            .into_iter()
            .filter(|&x| g.is_boundary(x) && g.is_tail(x))
            .count()
    };
    let (k1, k2) = (tails_at(v1), tails_at(v2));
    let ranks = (vertex_witten_rank(s, v1)?, vertex_witten_rank(s, v2)?);
    let m_deltas = (vertex_m_delta(s, v1)?, vertex_m_delta(s, v2)?);
    let dim2 = (g.k(v2) + 2 * g.l(v2)) as i64 - 3;
    let (smoothed, _) = crate::graph_ops::smooth_mapped(s, facet.site)
        .map_err(|_| OrientationError::NotOpenOpenFacet)?;
    let m_delta_total = m_delta(&smoothed)?;
    if m_delta_total != m_deltas.0 + m_deltas.1 {
        return Err(OrientationError::NotAdditive {
            total: m_delta_total,
            parts: vec![m_deltas.0, m_deltas.1],
        });
    }
    let moduli_sign = Sign::from_parity((k1 as i64 - 1) * k2 as i64);
    let commute_sign = Sign::from_parity(ranks.0 * dim2);
    let bundle_sign = Sign::Plus;
    let m_delta_sign = Sign::from_parity(m_delta_total - m_deltas.0 - m_deltas.1);
    Ok(OpenOpenRestriction {
        v1,
        v2,
        k1,
        k2,
        ranks,
        m_deltas,
        m_delta_total,
        moduli_sign,
        commute_sign,
        bundle_sign,
        m_delta_sign,
        net: moduli_sign * commute_sign * bundle_sign * m_delta_sign,
    })
}

/// Bookkeeping at an internal edge joining a closed vertex to an open one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedOpenRestriction {
    pub closed: VertexId,
    pub open: VertexId,
    pub m_c: i64,
    pub m_delta_open: i64,
    pub m_delta_total: i64,
    pub closed_sign: Sign,
    pub complex_sign: Sign,
    pub net: Sign,
}

pub fn restriction_sign_closed_open(
    facet: &Degeneration,
) -> Result<ClosedOpenRestriction, OrientationError> {
    let s = &facet.graph;
    let g = s.base();
    let (a, b) = edge_halves(facet).ok_or(OrientationError::NotClosedOpenFacet)?;
    if g.is_boundary(a) || g.num_vertices() != 2 {
        return Err(OrientationError::NotClosedOpenFacet);
    }
    let (va, vb) = (g.sigma0(a), g.sigma0(b));
    let (closed, open) = match (g.is_open(va), g.is_open(vb)) {
        (false, true) => (va, vb),
        (true, false) => (vb, va),
        _ => return Err(OrientationError::NotClosedOpenFacet),
    };
    let m_c = closed_vertex_rank(s, closed)?;
    let m_delta_open = vertex_m_delta(s, open)?;
    let (smoothed, _) = crate::graph_ops::smooth_mapped(s, facet.site)
        .map_err(|_| OrientationError::NotClosedOpenFacet)?;
    let m_delta_total = m_delta(&smoothed)?;
    if m_delta_total != m_c + m_delta_open {
        return Err(OrientationError::NotAdditive {
            total: m_delta_total,
            parts: vec![m_c, m_delta_open],
        });
    }
    let closed_sign = Sign::from_parity(m_c);
    let complex_sign = Sign::Plus;
    let net = closed_sign * complex_sign * Sign::from_parity(m_delta_total - m_delta_open);
    Ok(ClosedOpenRestriction {
        closed,
        open,
        m_c,
        m_delta_open,
        m_delta_total,
        closed_sign,
        complex_sign,
        net,
    })
}

/// The factors entering the comparison of the orientations that two
/// PI-paired facets inherit from their cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiPairSign {
    pub rh_before: Sign,
    pub rh_after: Sign,
    pub restriction_before: Sign,
    pub restriction_after: Sign,
    pub token_match: Sign,
    pub bubble: Sign,
    pub sign: Sign,
}

/// Compares the orientation induced on a BI facet of `cell` with the one
/// induced on its AI partner.
pub fn pi_pair_sign(
    cell: &RhGraph,
    bi: &BoundaryStratumRef,
) -> Result<PiPairSign, OrientationError> {
    if bi.kind != BoundaryType::Bi {
        return Err(PiError::NotBi.into());
    }
    let (after, ai) = pi_forward(cell, bi)?;
    pi_pair_sign_between(cell, bi, &after, &ai)
}

/// As [`pi_pair_sign`] for an explicitly given pair.
pub fn pi_pair_sign_between(
    cell: &RhGraph,
    bi: &BoundaryStratumRef,
    after: &RhGraph,
    ai: &BoundaryStratumRef,
) -> Result<PiPairSign, OrientationError> {
    let rb = restriction_sign_open_open(&bi.facet)?;
    let ra = restriction_sign_open_open(&ai.facet)?;
    // Illegal sides agree as spin vertices; the legal side of the BI facet
    // is the component holding the partner of the inserted point.
    let illegal_before = rb.m_deltas.0;
    let illegal_after = ra.m_deltas.0;
    let bubble_m = ra.m_deltas.1;
    let legal_before = rb.m_deltas.1;
    let inserted = ai_inserted_point(ai)?;
    let (pc, _) = after
        .partner(inserted)
        .ok_or(OrientationError::TokenMismatch)?;
    let legal_after = m_delta(after.component(pc))?;
    if illegal_before != illegal_after || legal_before != legal_after || bubble_m != 0 {
        return Err(OrientationError::TokenMismatch);
    }
    let token_match = Sign::from_parity(illegal_before - illegal_after)
        * Sign::from_parity(legal_before - legal_after);
    let bubble = Sign::from_parity(bubble_m);
    let rh_before = rh_sign(cell);
    let rh_after = rh_sign(after);
    let sign = rh_before * rh_after * rb.net * ra.net * token_match * bubble;
    Ok(PiPairSign {
        rh_before,
        rh_after,
        restriction_before: rb.net,
        restriction_after: ra.net,
        token_match,
        bubble,
        sign,
    })
}

/// The internal tail on the bubble vertex of an AI facet, as a half-edge of
/// the cell.
fn ai_inserted_point(ai: &BoundaryStratumRef) -> Result<(usize, HalfEdgeId), OrientationError> {
    let s = &ai.facet.graph;
    let g = s.base();
    let (a, b) = edge_halves(&ai.facet).ok_or(OrientationError::TokenMismatch)?;
    let hl = if s.alt(a) { a } else { b };
    let p = g
        .half_edges_at(g.sigma0(hl))
        .into_iter()
        .find(|&x| x != hl)
        .ok_or(OrientationError::TokenMismatch)?;
    let pc = ai.to_component[p.0].ok_or(OrientationError::TokenMismatch)?;
    Ok((ai.component, pc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_ops::codim1_boundaries;
    use crate::point_insertion::{boundary_strata, single_disk_cells};
    use crate::spin_structure::SpinBuilder;

    #[test]
    fn basepoint_signs() {
        assert_eq!(basepoint_transition_sign(4).unwrap(), Sign::Minus);
        assert_eq!(basepoint_transition_sign(1).unwrap(), Sign::Plus);
        assert!(basepoint_transition_sign(0).is_err());
        for n in 1..9usize {
            let s = basepoint_transition_sign(n).unwrap();
            let full = (0..n).fold(Sign::Plus, |acc, _| acc * s);
            assert_eq!(full, Sign::Plus);
        }
    }

    #[test]
    fn circle_restriction_record() {
        let s = SpinGraph::disk(9, &[(1, true), (5, true), (5, true), (5, true)], &[]);
        for d in codim1_boundaries(&s).unwrap() {
            let rec = restriction_sign_open_open(&d).unwrap();
            // illegal side {5,5,6}: rank (16-7)/9 = 1; legal side {1,5,1}: rank 0
            assert_eq!(rec.ranks, (1, 0));
            assert_eq!((rec.k1, rec.k2), (2, 2));
            assert_eq!(rec.m_deltas, (0, -1));
            assert_eq!(rec.m_delta_total, -1);
            assert_eq!(rec.net, Sign::Plus);
        }
    }

    #[test]
    fn closed_open_bookkeeping() {
        let mut b = SpinBuilder::new(9);
        let o = b.open_vertex(0, 1);
        let c = b.closed_vertex(0);
        b.boundary(o, 0, 7, true);
        let ho = b.internal(o, 0);
        b.internal(c, 2);
        b.internal(c, 7);
        let hc = b.internal(c, 7);
        b.pair(ho, hc);
        let s = b.build();
        assert!(crate::spin_structure::validate_spin(&s).is_valid());
        let rec = restriction_sign_closed_open(&Degeneration {
            graph: s,
            site: Site::Edge(ho),
        })
        .unwrap();
        assert_eq!((rec.m_c, rec.m_delta_open, rec.m_delta_total), (1, 0, 1));
        assert_eq!(rec.closed_sign, Sign::Minus);
        assert_eq!(rec.net, Sign::Plus);
    }

    #[test]
    fn circle_pairs_are_opposite() {
        for cell in single_disk_cells(9, 3, &[1, 5, 5, 5], &[]) {
            for b in boundary_strata(&cell).unwrap() {
                let rec = pi_pair_sign(&cell, &b).unwrap();
                assert_eq!(rec.sign, Sign::Minus);
                assert_eq!(rec.rh_before * rec.rh_after, Sign::Minus);
            }
        }
    }

    #[test]
    fn token_composition() {
        let a = OrientationToken::canonical("x");
        let b = OrientationToken {
            reference: "x".into(),
            sign: Sign::Minus,
        };
        assert_eq!(a.compose(&b).unwrap().sign, Sign::Minus);
        assert!(a.compose(&OrientationToken::canonical("y")).is_err());
    }
}
