//! (r,h)-graphs: legal level-h components joined by dashed lines, the five
//! boundary types, point insertion in both directions and enumeration of the
//! smooth cells.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::editor::Editor;
use crate::graph_core::{
    are_isomorphic, connected_genus, HalfEdgeId, HalfEdgeKind, IsoOptions, VertexId,
};
use crate::graph_ops::{codim1_boundaries, smooth_mapped, Degeneration, OpsError, Site};
use crate::spin_structure::{
    is_level_h, spin_colors, spin_disjoint_union, spin_exists, validate_spin, SpinBuilder,
    SpinGraph,
};

/// A half-edge of a given component.
pub type HalfRef = (usize, HalfEdgeId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PiError {
    #[error("component {0} does not exist")]
    UnknownComponent(usize),
    #[error("half-edge {0} is not on a boundary edge")]
    NotBoundaryEdge(HalfEdgeId),
    #[error("edge through {0} has no illegal and legal half")]
    NotNs(HalfEdgeId),
    #[error("illegal twist {0} is odd")]
    OddTwist(i32),
    #[error("edge through {0} does not separate its component")]
    NotSeparating(HalfEdgeId),
    #[error("facet is not of type BI")]
    NotBi,
    #[error("facet is not of type AI")]
    NotAi,
    #[error("dashed partner lies on the same component")]
    PartnerOnSameComponent,
    #[error("no AI facet matches the inserted point")]
    NoAiImage,
    #[error("result is not a valid (r,h)-graph: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ops(#[from] OpsError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhGraph {
    r: u32,
    level: u32,
    components: Vec<SpinGraph>,
    dashed: Vec<(HalfRef, HalfRef)>,
    labels: BTreeMap<HalfRef, u32>,
}

impl RhGraph {
    /// Assembles the parts; see [`validate_rh`] for the checks.
    pub fn new(
        r: u32,
        level: u32,
        components: Vec<SpinGraph>,
        dashed: Vec<(HalfRef, HalfRef)>,
        labels: BTreeMap<HalfRef, u32>,
    ) -> Self {
        Self {
            r,
            level,
            components,
            dashed,
            labels,
        }
    }

    /// One component without dashed lines, labelled by its markings.
    pub fn from_component(s: SpinGraph, level: u32) -> Self {
        let g = s.base();
        let labels = g
            .half_edge_ids()
            .filter(|&h| g.is_tail(h) && !g.is_cb(h))
            .filter_map(|h| g.marking(h).map(|m| ((0, h), m)))
            .collect();
        Self {
            r: s.r(),
            level,
            components: vec![s],
            dashed: Vec::new(),
            labels,
        }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn components(&self) -> &[SpinGraph] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SpinGraph {
        &self.components[i]
    }

    /// Pairs `(internal, boundary)`.
    pub fn dashed(&self) -> &[(HalfRef, HalfRef)] {
        &self.dashed
    }

    pub fn labels(&self) -> &BTreeMap<HalfRef, u32> {
        &self.labels
    }

    pub fn label(&self, x: HalfRef) -> Option<u32> {
        self.labels.get(&x).copied()
    }

    pub fn partner(&self, x: HalfRef) -> Option<HalfRef> {
        self.dashed.iter().find_map(|&(p, q)| {
            if p == x {
                Some(q)
            } else if q == x {
                Some(p)
            } else {
                None
            }
        })
    }

    pub fn is_paired(&self, x: HalfRef) -> bool {
        self.partner(x).is_some()
    }

    pub fn is_smooth(&self) -> bool {
        self.components.iter().all(|c| c.base().is_smooth())
    }

    /// Internal tails paired by a dashed line.
    pub fn paired_internal(&self) -> Vec<HalfRef> {
        self.dashed.iter().map(|&(p, _)| p).collect()
    }

    pub fn paired_boundary(&self) -> Vec<HalfRef> {
        self.dashed.iter().map(|&(_, q)| q).collect()
    }

    /// The components as one spin graph, with component half-edge offsets.
    pub fn union(&self) -> (SpinGraph, Vec<usize>) {
        let parts: Vec<&SpinGraph> = self.components.iter().collect();
        spin_disjoint_union(&parts)
    }

    /// Replace component `c`, carrying dashed lines and labels along `map`
    /// (old half-edge of `c` to half-edge of `new`).
    pub fn replace_component(
        &self,
        c: usize,
        new: SpinGraph,
        map: &[Option<HalfEdgeId>],
    ) -> RhGraph {
        let fix = |x: HalfRef| {
            if x.0 == c {
                map[x.1 .0].map(|h| (c, h))
            } else {
                Some(x)
            }
        };
        let mut out = self.clone();
        out.components[c] = new;
        out.dashed = self
            .dashed
            .iter()
            .filter_map(|&(p, q)| Some((fix(p)?, fix(q)?)))
            .collect();
        out.labels = self
            .labels
            .iter()
            .filter_map(|(&x, &l)| Some((fix(x)?, l)))
            .collect();
        out
    }
}

/// Inverts an injective partial map of half-edges.
pub fn invert_map(map: &[Option<HalfEdgeId>], target_len: usize) -> Vec<Option<HalfEdgeId>> {
    let mut inv = vec![None; target_len];
    for (i, m) in map.iter().enumerate() {
        if let Some(h) = m {
            inv[h.0] = Some(HalfEdgeId(i));
        }
    }
    inv
}

fn display_ref(x: HalfRef) -> String {
    format!("c{}:{}", x.0, x.1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhViolation {
    pub component: Option<usize>,
    pub message: String,
}

impl fmt::Display for RhViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.component {
            Some(c) => write!(f, "component {c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RhReport {
    pub violations: Vec<RhViolation>,
}

impl RhReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_rh(gr: &RhGraph) -> RhReport {
    let mut out = Vec::new();
    let mut bad =
        |component: Option<usize>, message: String| out.push(RhViolation { component, message });
    let r = gr.r as i64;
    if r < 2 || gr.level as i64 > (r - 2) / 2 {
        bad(
            None,
            format!("level {} exceeds (r-2)/2 for r = {r}", gr.level),
        );
    }
    if gr.components.is_empty() {
        bad(None, "no components".into());
    }
    for (i, c) in gr.components.iter().enumerate() {
        let g = c.base();
        if c.r() != gr.r {
            bad(Some(i), "component r differs".into());
        }
        let rep = validate_spin(c);
        for v in &rep.violations {
            bad(Some(i), v.to_string());
        }
        if !rep.prestable.is_stable() {
            bad(Some(i), "unstable vertex".into());
        }
        if !g.is_connected() {
            bad(Some(i), "not connected".into());
        }
        if !c.is_legal() {
            bad(Some(i), "illegal boundary tail".into());
        }
        if !is_level_h(c, gr.level) {
            bad(Some(i), format!("not of level {}", gr.level));
        }
        if g.part_is_closed_without_cb(&g.vertex_ids().collect::<Vec<_>>()) {
            bad(Some(i), "no open vertex and no cb tail".into());
        }
    }
    let in_range = |x: HalfRef| {
        x.0 < gr.components.len() && x.1 .0 < gr.components[x.0].base().num_half_edges()
    };
    let mut seen = BTreeSet::new();
    for &(p, q) in &gr.dashed {
        let name = format!("dashed pair ({}, {})", display_ref(p), display_ref(q));
        if !in_range(p) || !in_range(q) {
            bad(None, format!("{name} is out of range"));
            continue;
        }
        let (cp, cq) = (&gr.components[p.0], &gr.components[q.0]);
        let (gp, gq) = (cp.base(), cq.base());
        if !(gp.is_tail(p.1) && !gp.is_boundary(p.1) && !gp.is_cb(p.1) && !cp.is_anchor(p.1)) {
            bad(None, format!("{name}: first entry is not an internal tail"));
        }
        if !(gq.is_tail(q.1) && gq.is_boundary(q.1)) {
            bad(None, format!("{name}: second entry is not a boundary tail"));
        }
        if 2 * cp.tw(p.1) as i64 + cq.tw(q.1) as i64 != r - 2 {
            bad(None, format!("{name} violates 2a+b = r-2"));
        }
        if !seen.insert(p) || !seen.insert(q) {
            bad(None, format!("{name} reuses a tail"));
        }
    }
    for (i, c) in gr.components.iter().enumerate() {
        let g = c.base();
        if g.num_vertices() == 1 && g.num_half_edges() == 2 && connected_genus(g) == Ok(0) {
            let paired: Vec<HalfEdgeId> = g
                .half_edge_ids()
                .filter(|&h| seen.contains(&(i, h)))
                .collect();
            let kinds: BTreeSet<bool> = paired.iter().map(|&h| g.is_boundary(h)).collect();
            if paired.len() == 2 && kinds.len() == 2 {
                bad(
                    Some(i),
                    "only one paired internal and one paired boundary tail".into(),
                );
            }
        }
    }
    if !gr.components.is_empty() {
        let n = gr.components.len();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            if uf[x] != x {
                let root = find(uf, uf[x]);
                uf[x] = root;
            }
            uf[x]
        }
        for &(p, q) in &gr.dashed {
            if p.0 < n && q.0 < n {
                let (a, b) = (find(&mut uf, p.0), find(&mut uf, q.0));
                uf[a] = b;
            }
        }
        let root = find(&mut uf, 0);
        if (0..n).any(|i| find(&mut uf, i) != root) {
            bad(None, "dashed lines do not connect the components".into());
        }
    }
    for kind in [HalfEdgeKind::Boundary, HalfEdgeKind::Internal] {
        let mut got = Vec::new();
        for (i, c) in gr.components.iter().enumerate() {
            let g = c.base();
            for h in g.half_edge_ids() {
                if g.kind(h) != kind || !g.is_tail(h) || g.is_cb(h) {
                    continue;
                }
                let paired = seen.contains(&(i, h));
                match (paired, gr.label((i, h))) {
                    (false, Some(l)) => got.push(l),
                    (false, None) => bad(Some(i), format!("unpaired tail {h} has no label")),
                    (true, Some(_)) => bad(Some(i), format!("paired tail {h} carries a label")),
                    (true, None) => {}
                }
            }
        }
        got.sort_unstable();
        if got.iter().enumerate().any(|(j, &l)| l != j as u32 + 1) {
            bad(None, format!("{kind:?} labels are not 1..{}", got.len()));
        }
    }
    RhReport { violations: out }
}

/// `sum of component genera + |dashed| - |components| + 1`.
pub fn rh_genus(gr: &RhGraph) -> Result<i64, crate::graph_core::GraphError> {
    let mut total = 0;
    for c in &gr.components {
        total += connected_genus(c.base())?;
    }
    Ok(total + gr.dashed.len() as i64 - gr.components.len() as i64 + 1)
}

// ---------------------------------------------------------------------------
// Isomorphism

fn rh_colors(gr: &RhGraph) -> (SpinGraph, Vec<u64>, Vec<Option<HalfEdgeId>>) {
    let (u, offs) = gr.union();
    let mut colors = spin_colors(&u);
    let mut pairing = vec![None; colors.len()];
    for (&(c, h), &l) in &gr.labels {
        colors[offs[c] + h.0] |= (l as u64 + 1) << 24;
    }
    for &(p, q) in &gr.dashed {
        let (a, b) = (offs[p.0] + p.1 .0, offs[q.0] + q.1 .0);
        colors[a] |= 1 << 23;
        colors[b] |= 1 << 23;
        pairing[a] = Some(HalfEdgeId(b));
        pairing[b] = Some(HalfEdgeId(a));
    }
    (u, colors, pairing)
}

/// Isomorphism of (r,h)-graphs: components, decorations, labels and dashed
/// lines must all correspond.
pub fn rh_isomorphic(a: &RhGraph, b: &RhGraph) -> bool {
    if a.r != b.r
        || a.level != b.level
        || a.components.len() != b.components.len()
        || a.dashed.len() != b.dashed.len()
    {
        return false;
    }
    let (ua, ca, pa) = rh_colors(a);
    let (ub, cb, pb) = rh_colors(b);
    let opts = IsoOptions {
        markings: false,
        half_colors: Some((&ca, &cb)),
        pairing: Some((&pa, &pb)),
    };
    are_isomorphic(ua.base(), ub.base(), &opts).is_some()
}

/// Cheap isomorphism invariant used to bucket candidates.
pub fn rh_key(gr: &RhGraph) -> Vec<(usize, Vec<u64>)> {
    let (u, colors, _) = rh_colors(gr);
    let (_, offs) = gr.union();
    let mut key: Vec<(usize, Vec<u64>)> = gr
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = c.base().num_half_edges();
            let mut cs: Vec<u64> = colors[offs[i]..offs[i] + n].to_vec();
            cs.sort_unstable();
            (c.base().num_vertices(), cs)
        })
        .collect();
    key.sort();
    let _ = u;
    key
}

// ---------------------------------------------------------------------------
// Boundary strata

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryType {
    Cb,
    R,
    NsPlus,
    Ai,
    Bi,
}

impl BoundaryType {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryType::Cb => "CB",
            BoundaryType::R => "R",
            BoundaryType::NsPlus => "NS+",
            BoundaryType::Ai => "AI",
            BoundaryType::Bi => "BI",
        }
    }

    /// Boundary types left unglued.
    pub fn is_free(self) -> bool {
        matches!(
            self,
            BoundaryType::Cb | BoundaryType::R | BoundaryType::NsPlus
        )
    }
}

impl fmt::Display for BoundaryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A codimension-1 stratum of one component of an (r,h)-graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryStratumRef {
    pub component: usize,
    pub facet: Degeneration,
    /// Facet half-edges to the half-edges of the smoothed component.
    pub to_component: Vec<Option<HalfEdgeId>>,
    pub kind: BoundaryType,
}

/// The illegal and legal halves of an NS boundary edge.
fn ns_halves(s: &SpinGraph, h: HalfEdgeId) -> Result<(HalfEdgeId, HalfEdgeId), PiError> {
    let g = s.base();
    let p = g.sigma1(h);
    if p == h || !g.is_boundary(h) {
        return Err(PiError::NotBoundaryEdge(h));
    }
    match (s.alt(h), s.alt(p)) {
        (false, true) => Ok((h, p)),
        (true, false) => Ok((p, h)),
        _ => Err(PiError::NotNs(h)),
    }
}

pub fn classify_boundary(
    gr: &RhGraph,
    component: usize,
    facet: &Degeneration,
    to_component: &[Option<HalfEdgeId>],
) -> Result<BoundaryType, PiError> {
    let s = &facet.graph;
    let g = s.base();
    let h = match facet.site {
        Site::Cb(_) => return Ok(BoundaryType::Cb),
        Site::Edge(h) => h,
    };
    if s.is_ramond(h) || s.is_ramond(g.sigma1(h)) {
        return Ok(BoundaryType::R);
    }
    let (hi, hl) = ns_halves(s, h)?;
    if s.tw(hi) as i64 > 2 * gr.level as i64 {
        return Ok(BoundaryType::NsPlus);
    }
    let at = g.half_edges_at(g.sigma0(hl));
    if at.len() == 2 {
        let x = if at[0] == hl { at[1] } else { at[0] };
        let paired = to_component
            .get(x.0)
            .copied()
            .flatten()
            .is_some_and(|xc| gr.dashed.iter().any(|&(p, _)| p == (component, xc)));
        if !g.is_boundary(x) && g.is_tail(x) && paired {
            return Ok(BoundaryType::Ai);
        }
    }
    Ok(BoundaryType::Bi)
}

fn stratum_ref(
    gr: &RhGraph,
    component: usize,
    facet: Degeneration,
) -> Result<BoundaryStratumRef, PiError> {
    let (_, to_component) = smooth_mapped(&facet.graph, facet.site)?;
    let kind = classify_boundary(gr, component, &facet, &to_component)?;
    Ok(BoundaryStratumRef {
        component,
        facet,
        to_component,
        kind,
    })
}

/// All codimension-1 strata of a smooth (r,h)-graph, component by component.
pub fn boundary_strata(gr: &RhGraph) -> Result<Vec<BoundaryStratumRef>, PiError> {
    let mut out = Vec::new();
    for (c, comp) in gr.components.iter().enumerate() {
        for facet in codim1_boundaries(comp)? {
            out.push(stratum_ref(gr, c, facet)?);
        }
    }
    Ok(out)
}

/// The stratum graph of `b`: its component replaced by the facet.
pub fn stratum_graph(gr: &RhGraph, b: &BoundaryStratumRef) -> RhGraph {
    let inv = invert_map(
        &b.to_component,
        gr.components[b.component].base().num_half_edges(),
    );
    gr.replace_component(b.component, b.facet.graph.clone(), &inv)
}

// ---------------------------------------------------------------------------
// Point insertion

/// Cuts the NS boundary edge through `site` in component `c`, turning its
/// illegal half of twist t into an internal tail of twist t/2 and pairing it
/// with the legal half by a new dashed line. The illegal side stays at index
/// `c`; the legal side is appended. Returns the new graph and the new pair.
pub fn insert_point(
    gr: &RhGraph,
    c: usize,
    site: HalfEdgeId,
) -> Result<(RhGraph, HalfRef, HalfRef), PiError> {
    insert_point_located(gr, c, site).map(|(g, p, q, _)| (g, p, q))
}

type Located = (RhGraph, HalfRef, HalfRef, Vec<Option<HalfRef>>);

/// As [`insert_point`], also returning where each half-edge of `c` went.
fn insert_point_located(gr: &RhGraph, c: usize, site: HalfEdgeId) -> Result<Located, PiError> {
    let s = gr.components.get(c).ok_or(PiError::UnknownComponent(c))?;
    if site.0 >= s.base().num_half_edges() {
        return Err(PiError::NotBoundaryEdge(site));
    }
    let (hi, hl) = ns_halves(s, site)?;
    let t = s.tw(hi);
    if t % 2 != 0 {
        return Err(PiError::OddTwist(t));
    }
    let mut e = Editor::from_spin(s);
    let vi = e.halves[hi.0].vertex;
    for b in &mut e.vertices[vi].blocks {
        b.retain(|&x| x != hi.0);
    }
    e.halves[hi.0].kind = HalfEdgeKind::Internal;
    e.halves[hi.0].tw = t / 2;
    e.halves[hi.0].alt = false;
    e.halves[hi.0].partner = None;
    e.halves[hl.0].partner = None;
    let (cut, map) = e.finish();
    let parts = cut.split_components();
    if parts.len() != 2 {
        return Err(PiError::NotSeparating(site));
    }
    let p_cut = map[hi.0].expect("kept");
    let (first, second) = if parts[0].1[p_cut.0].is_some() {
        (0, 1)
    } else {
        (1, 0)
    };
    let new_index = gr.components.len();
    let locate = |x: HalfEdgeId| -> Option<HalfRef> {
        let y = map[x.0]?;
        if let Some(z) = parts[first].1[y.0] {
            Some((c, z))
        } else {
            parts[second].1[y.0].map(|z| (new_index, z))
        }
    };
    let fix = |x: HalfRef| if x.0 == c { locate(x.1) } else { Some(x) };
    let mut components = gr.components.clone();
    components[c] = parts[first].0.clone();
    components.push(parts[second].0.clone());
    let mut dashed: Vec<(HalfRef, HalfRef)> = gr
        .dashed
        .iter()
        .filter_map(|&(p, q)| Some((fix(p)?, fix(q)?)))
        .collect();
    let p = locate(hi).expect("inserted point survives");
    let q = locate(hl).expect("legal half survives");
    dashed.push((p, q));
    let labels = gr
        .labels
        .iter()
        .filter_map(|(&x, &l)| Some((fix(x)?, l)))
        .collect();
    let located = s.base().half_edge_ids().map(locate).collect();
    Ok((
        RhGraph {
            r: gr.r,
            level: gr.level,
            components,
            dashed,
            labels,
        },
        p,
        q,
        located,
    ))
}

/// Point insertion at a BI stratum: returns the neighbouring smooth cell and
/// its AI stratum.
pub fn pi_forward(
    gr: &RhGraph,
    b: &BoundaryStratumRef,
) -> Result<(RhGraph, BoundaryStratumRef), PiError> {
    if b.kind != BoundaryType::Bi {
        return Err(PiError::NotBi);
    }
    let st = stratum_graph(gr, b);
    let (d, p, _, located) = insert_point_located(&st, b.component, b.facet.site.half_edge())?;
    let (hi, _) = ns_halves(&b.facet.graph, b.facet.site.half_edge())?;
    let after = b.facet.graph.base().sigma2(hi);
    let after = if after == hi { None } else { located[after.0] };
    let rep = validate_rh(&d);
    if !rep.is_valid() {
        let msgs: Vec<String> = rep.violations.iter().map(|v| v.to_string()).collect();
        return Err(PiError::Invalid(msgs.join("; ")));
    }
    let comp = &d.components[p.0];
    for facet in codim1_boundaries(comp)? {
        let a = stratum_ref(&d, p.0, facet)?;
        if a.kind != BoundaryType::Ai {
            continue;
        }
        let g = a.facet.graph.base();
        let (ai, hl) = ns_halves(&a.facet.graph, a.facet.site.half_edge())?;
        let has_p = g
            .half_edges_at(g.sigma0(hl))
            .iter()
            .any(|&x| a.to_component[x.0] == Some(p.1));
        let next = g.sigma2(ai);
        let same_place = if next == ai {
            after.is_none()
        } else {
            after == a.to_component[next.0].map(|h| (p.0, h))
        };
        if has_p && same_place {
            return Ok((d, a));
        }
    }
    Err(PiError::NoAiImage)
}

/// Removes the bubble of an AI stratum and reattaches the dashed partner by
/// a boundary edge: returns the neighbouring smooth cell and its BI stratum.
pub fn pi_backward(
    d: &RhGraph,
    a: &BoundaryStratumRef,
) -> Result<(RhGraph, BoundaryStratumRef), PiError> {
    if a.kind != BoundaryType::Ai {
        return Err(PiError::NotAi);
    }
    let c = a.component;
    let delta = &a.facet.graph;
    let g = delta.base();
    let (hi, hl) = ns_halves(delta, a.facet.site.half_edge())?;
    let vb: VertexId = g.sigma0(hl);
    let p_f = g
        .half_edges_at(vb)
        .into_iter()
        .find(|&x| x != hl)
        .ok_or(PiError::NotAi)?;
    let p_c = a.to_component[p_f.0].ok_or(PiError::NotAi)?;
    let (c2, q) = d.partner((c, p_c)).ok_or(PiError::NotAi)?;
    if c2 == c {
        return Err(PiError::PartnerOnSameComponent);
    }
    let st = stratum_graph(d, a);
    let (u, offs) = spin_disjoint_union(&[&st.components[c], &st.components[c2]]);
    let mut e = Editor::from_spin(&u);
    e.vertices[vb.0].alive = false;
    e.halves[hl.0].alive = false;
    e.halves[p_f.0].alive = false;
    e.pair(hi.0, offs[1] + q.0);
    let (x, map) = e.finish();
    let keep = c.min(c2);
    let mut index = vec![None; st.components.len()];
    let mut components = Vec::new();
    for (i, comp) in st.components.iter().enumerate() {
        if i == keep {
            index[i] = Some(components.len());
            components.push(x.clone());
        } else if i != c && i != c2 {
            index[i] = Some(components.len());
            components.push(comp.clone());
        }
    }
    let fix = |r: HalfRef| -> Option<HalfRef> {
        if r.0 == c {
            map[r.1 .0].map(|h| (keep, h))
        } else if r.0 == c2 {
            map[offs[1] + r.1 .0].map(|h| (keep, h))
        } else {
            index[r.0].map(|i| (i, r.1))
        }
    };
    let dashed = st
        .dashed
        .iter()
        .filter(|&&(pp, _)| pp != (c, p_f))
        .filter_map(|&(pp, qq)| Some((fix(pp)?, fix(qq)?)))
        .collect();
    let labels = st
        .labels
        .iter()
        .filter_map(|(&r, &l)| Some((fix(r)?, l)))
        .collect();
    let stratum = RhGraph {
        r: d.r,
        level: d.level,
        components,
        dashed,
        labels,
    };
    let site = Site::Edge(map[hi.0].expect("illegal half survives"));
    let (smooth_x, smap) = smooth_mapped(&x, site)?;
    let cell = stratum.replace_component(keep, smooth_x, &smap);
    let rep = validate_rh(&cell);
    if !rep.is_valid() {
        let msgs: Vec<String> = rep.violations.iter().map(|v| v.to_string()).collect();
        return Err(PiError::Invalid(msgs.join("; ")));
    }
    let b = stratum_ref(&cell, keep, Degeneration { graph: x, site })?;
    Ok((cell, b))
}

// ---------------------------------------------------------------------------
// Enumeration

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// The valid single-disk cells: one per cyclic order of the boundary points.
pub fn single_disk_cells(r: u32, level: u32, boundary: &[i32], internal: &[i32]) -> Vec<RhGraph> {
    let k = boundary.len();
    let rest: Vec<usize> = (1..k).collect();
    let orders: Vec<Vec<usize>> = if k == 0 {
        vec![vec![]]
    } else {
        permutations(&rest)
            .into_iter()
            .map(|p| std::iter::once(0).chain(p).collect())
            .collect()
    };
    let mut out = Vec::new();
    for order in orders {
        let mut b = SpinBuilder::new(r);
        let v = b.open_vertex(0, 1);
        for &i in &order {
            let h = b.boundary(v, 0, boundary[i], true);
            b.mark(h, i as u32 + 1);
        }
        for (j, &t) in internal.iter().enumerate() {
            let h = b.internal(v, t);
            b.mark(h, j as u32 + 1);
        }
        let s = b.build();
        let rep = validate_spin(&s);
        if rep.is_stable_valid() && is_level_h(&s, level) {
            out.push(RhGraph::from_component(s, level));
        }
    }
    out
}

/// Cells reachable from `seeds` by point insertion in either direction,
/// deduplicated up to isomorphism, in discovery order.
pub fn closure_from_seeds(seeds: Vec<RhGraph>) -> Result<Vec<RhGraph>, PiError> {
    let mut cells: Vec<RhGraph> = Vec::new();
    let mut buckets: HashMap<Vec<(usize, Vec<u64>)>, Vec<usize>> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut add = |g: RhGraph, cells: &mut Vec<RhGraph>, queue: &mut VecDeque<usize>| {
        let key = rh_key(&g);
        let bucket = buckets.entry(key).or_default();
        if bucket.iter().any(|&i| rh_isomorphic(&cells[i], &g)) {
            return;
        }
        bucket.push(cells.len());
        queue.push_back(cells.len());
        cells.push(g);
    };
    for s in seeds {
        add(s, &mut cells, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let cell = cells[i].clone();
        for b in boundary_strata(&cell)? {
            let next = match b.kind {
                BoundaryType::Bi => pi_forward(&cell, &b)?.0,
                BoundaryType::Ai => pi_backward(&cell, &b)?.0,
                _ => continue,
            };
            add(next, &mut cells, &mut queue);
        }
    }
    Ok(cells)
}

/// Smooth (r,h)-graphs of the glued moduli space for the given twists.
pub fn enumerate_smooth_rh(
    r: u32,
    level: u32,
    boundary: &[i32],
    internal: &[i32],
) -> Result<Vec<RhGraph>, PiError> {
    if !spin_exists(r, 0, internal, boundary) {
        return Ok(Vec::new());
    }
    closure_from_seeds(single_disk_cells(r, level, boundary, internal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_disk_cells_of_the_circle() {
        let cells = single_disk_cells(9, 3, &[1, 5, 5, 5], &[]);
        assert_eq!(cells.len(), 6);
        for c in &cells {
            assert!(validate_rh(c).is_valid(), "{:?}", validate_rh(c));
            assert_eq!(rh_genus(c).unwrap(), 0);
        }
    }

    #[test]
    fn circle_facets_are_one_bi_and_one_free_or_ai() {
        let cells = single_disk_cells(9, 3, &[1, 5, 5, 5], &[]);
        let strata = boundary_strata(&cells[0]).unwrap();
        assert_eq!(strata.len(), 2);
        assert!(strata.iter().all(|b| b.kind == BoundaryType::Bi));
    }

    #[test]
    fn forward_then_backward_returns() {
        let cells = single_disk_cells(9, 3, &[1, 5, 5, 5], &[]);
        let b = &boundary_strata(&cells[0]).unwrap()[0];
        let (d, a) = pi_forward(&cells[0], b).unwrap();
        assert_eq!(d.components().len(), 2);
        assert_eq!(d.dashed().len(), 1);
        assert!(validate_rh(&d).is_valid());
        assert_eq!(a.kind, BoundaryType::Ai);
        let (c, b2) = pi_backward(&d, &a).unwrap();
        assert!(rh_isomorphic(&c, &cells[0]));
        assert_eq!(b2.kind, BoundaryType::Bi);
        assert!(rh_isomorphic(
            &stratum_graph(&c, &b2),
            &stratum_graph(&cells[0], b)
        ));
    }

    #[test]
    fn dashed_twist_violation_names_the_pair() {
        let cells = single_disk_cells(9, 3, &[1, 5, 5, 5], &[]);
        let b = &boundary_strata(&cells[0]).unwrap()[0];
        let (d, _) = pi_forward(&cells[0], b).unwrap();
        let (p, q) = d.dashed()[0];
        let other = d
            .component(q.0)
            .base()
            .boundary_tails()
            .into_iter()
            .find(|&h| d.component(q.0).tw(h) == 5)
            .unwrap();
        let mut labels = d.labels().clone();
        let l = labels.remove(&(q.0, other)).unwrap();
        labels.insert(q, l);
        let bad = RhGraph::new(
            d.r(),
            d.level(),
            d.components().to_vec(),
            vec![(p, (q.0, other))],
            labels,
        );
        let rep = validate_rh(&bad);
        assert!(
            rep.violations
                .iter()
                .any(|v| v.message.contains("dashed pair (c")),
            "{rep:?}"
        );
    }

    #[test]
    fn genus_counts_loops_of_dashed_lines() {
        let cells = single_disk_cells(9, 3, &[1, 5, 5, 5], &[]);
        let mut g = cells[0].clone();
        assert_eq!(rh_genus(&g).unwrap(), 0);
        let b = &boundary_strata(&g).unwrap()[0];
        g = pi_forward(&g, b).unwrap().0;
        assert_eq!(rh_genus(&g).unwrap(), 0);
        let mut looped = g.clone();
        looped.dashed.push(looped.dashed[0]);
        assert_eq!(rh_genus(&looped).unwrap(), 1);
    }
}
