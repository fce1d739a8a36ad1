//! Document format, graph-description export and command implementations.
//!
//! Documents are versioned JSON. A document has a `kind` of `prestable`,
//! `spin` or `rh`; the first two carry one `graph` section, the last carries
//! `components`, `dashed` pairs and `labels`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::complex_builder::{
    build_complex, topology_report, BuildError, CellComplex, TopologyReport,
};
use crate::graph_core::{
    validate_prestable, HalfEdgeData, HalfEdgeId, HalfEdgeKind, PreStableGraph, VertexData,
    VertexId, VertexKind,
};
use crate::graph_ops::{codim1_boundaries, detach, smooth_mapped, Site};
use crate::point_insertion::{
    boundary_strata, pi_backward, pi_forward, rh_isomorphic, stratum_graph, validate_rh,
    BoundaryStratumRef, BoundaryType, HalfRef, RhGraph,
};
use crate::spin_structure::{validate_spin, SpinGraph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Prestable,
    Spin,
    Rh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub version: u32,
    pub kind: DocumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<GraphSection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dashed: Option<Vec<[HalfRefDoc; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<LabelDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub vertices: Vec<VertexDoc>,
    pub half_edges: Vec<HalfEdgeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ncb: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: usize,
    pub kind: VertexKind,
    pub genus_hat: u32,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfEdgeDoc {
    pub id: usize,
    pub kind: HalfEdgeKind,
    pub vertex: usize,
    /// `null` for tails.
    pub sigma1_partner: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<u32>,
    /// Omitted when the half-edge is fixed by sigma2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_next: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cb: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marking: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tw: Option<i32>,
    /// True for legal half-edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfRefDoc {
    pub component: usize,
    pub half_edge: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelDoc {
    pub component: usize,
    pub half_edge: usize,
    pub label: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Object {
    Prestable(PreStableGraph),
    Spin(SpinGraph),
    Rh(RhGraph),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported document version {found}, expected {FORMAT_VERSION}")]
    Version { found: u32 },
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Schema {
        location: location.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Decoding

fn decode_section(
    sec: &GraphSection,
    at: &str,
    spin: bool,
) -> Result<(PreStableGraph, Vec<i32>, Vec<bool>), ParseError> {
    let nh = sec.half_edges.len();
    let mut vertices = Vec::new();
    for (i, v) in sec.vertices.iter().enumerate() {
        if v.id != i {
            return Err(schema(
                format!("{at}.vertices[{i}].id"),
                "ids must be 0, 1, 2, ... in order",
            ));
        }
        vertices.push(VertexData {
            kind: v.kind,
            genus_hat: v.genus_hat,
            num_boundaries: v.n,
        });
    }
    let mut halves = Vec::new();
    let (mut tw, mut alt) = (Vec::new(), Vec::new());
    for (i, h) in sec.half_edges.iter().enumerate() {
        let loc = format!("{at}.half_edges[{i}]");
        if h.id != i {
            return Err(schema(
                format!("{loc}.id"),
                "ids must be 0, 1, 2, ... in order",
            ));
        }
        let check = |x: usize, field: &str| {
            if x < nh {
                Ok(HalfEdgeId(x))
            } else {
                Err(schema(
                    format!("{loc}.{field}"),
                    format!("no half-edge {x}"),
                ))
            }
        };
        if h.vertex >= vertices.len() {
            return Err(schema(
                format!("{loc}.vertex"),
                format!("no vertex {}", h.vertex),
            ));
        }
        let sigma1 = h
            .sigma1_partner
            .map_or(Ok(HalfEdgeId(i)), |x| check(x, "sigma1_partner"))?;
        let sigma2 = h
            .sigma2_next
            .map_or(Ok(HalfEdgeId(i)), |x| check(x, "sigma2_next"))?;
        halves.push(HalfEdgeData {
            kind: h.kind,
            vertex: VertexId(h.vertex),
            sigma1,
            sigma2,
            block: h.block,
            cb: h.cb,
            marking: h.marking,
        });
        match (spin, h.tw, h.alt) {
            (true, Some(t), Some(a)) => {
                tw.push(t);
                alt.push(a);
            }
            (true, _, _) => return Err(schema(loc, "spin half-edges need tw and alt")),
            (false, None, None) => {}
            (false, _, _) => return Err(schema(loc, "prestable half-edges carry no tw or alt")),
        }
    }
    if !spin && (!sec.anchors.is_empty() || !sec.ncb.is_empty()) {
        return Err(schema(at, "prestable graphs carry no anchors or ncb"));
    }
    for (field, ids) in [("anchors", &sec.anchors), ("ncb", &sec.ncb)] {
        if let Some(&x) = ids.iter().find(|&&x| x >= nh) {
            return Err(schema(format!("{at}.{field}"), format!("no half-edge {x}")));
        }
    }
    let g = PreStableGraph::from_parts(vertices, halves).map_err(|e| schema(at, e.to_string()))?;
    Ok((g, tw, alt))
}

fn decode_spin(sec: &GraphSection, at: &str, r: u32) -> Result<SpinGraph, ParseError> {
    let (g, tw, alt) = decode_section(sec, at, true)?;
    let ids = |v: &[usize]| v.iter().map(|&x| HalfEdgeId(x)).collect::<Vec<_>>();
    SpinGraph::from_parts(g, r, tw, alt, &ids(&sec.anchors), &ids(&sec.ncb))
        .map_err(|e| schema(at, e.to_string()))
}

/// Converts a document to an object, checking only the schema.
pub fn decode(doc: &Document) -> Result<Object, ParseError> {
    if doc.version != FORMAT_VERSION {
        return Err(ParseError::Version { found: doc.version });
    }
    let need_r = || doc.r.ok_or_else(|| schema("r", "missing"));
    let only_graph = || {
        if doc.components.is_some() || doc.dashed.is_some() || doc.labels.is_some() {
            return Err(schema(
                "components",
                "only rh documents have components, dashed or labels",
            ));
        }
        doc.graph.as_ref().ok_or_else(|| schema("graph", "missing"))
    };
    match doc.kind {
        DocumentKind::Prestable => {
            let sec = only_graph()?;
            Ok(Object::Prestable(decode_section(sec, "graph", false)?.0))
        }
        DocumentKind::Spin => {
            let sec = only_graph()?;
            Ok(Object::Spin(decode_spin(sec, "graph", need_r()?)?))
        }
        DocumentKind::Rh => {
            if doc.graph.is_some() {
                return Err(schema("graph", "rh documents use components"));
            }
            let r = need_r()?;
            let h = doc.h.ok_or_else(|| schema("h", "missing"))?;
            let secs = doc
                .components
                .as_ref()
                .ok_or_else(|| schema("components", "missing"))?;
            let comps = secs
                .iter()
                .enumerate()
                .map(|(i, s)| decode_spin(s, &format!("components[{i}]"), r))
                .collect::<Result<Vec<_>, _>>()?;
            let href = |x: &HalfRefDoc| (x.component, HalfEdgeId(x.half_edge));
            let dashed = doc
                .dashed
                .iter()
                .flatten()
                .map(|[p, q]| (href(p), href(q)))
                .collect();
            let mut labels = BTreeMap::new();
            for (i, l) in doc.labels.iter().flatten().enumerate() {
                let key = (l.component, HalfEdgeId(l.half_edge));
                if labels.insert(key, l.label).is_some() {
                    return Err(schema(format!("labels[{i}]"), "half-edge labelled twice"));
                }
            }
            Ok(Object::Rh(RhGraph::new(r, h, comps, dashed, labels)))
        }
    }
}

/// Violations of the object's own validator, as display strings.
pub fn violations(obj: &Object) -> Vec<String> {
    match obj {
        Object::Prestable(g) => validate_prestable(g)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect(),
        Object::Spin(s) => validate_spin(s)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect(),
        Object::Rh(gr) => validate_rh(gr)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect(),
    }
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses and validates.
pub fn parse(text: &str) -> Result<Object, ParseError> {
    let obj = decode(&parse_document(text)?)?;
    let bad = violations(&obj);
    if bad.is_empty() {
        Ok(obj)
    } else {
        Err(ParseError::Validation(bad))
    }
}

// ---------------------------------------------------------------------------
// Encoding

fn encode_section(g: &PreStableGraph, spin: Option<&SpinGraph>) -> GraphSection {
    let vertices = g
        .vertex_ids()
        .map(|v| VertexDoc {
            id: v.0,
            kind: g.vertex_kind(v),
            genus_hat: g.genus_hat(v),
            n: g.num_boundaries(v),
        })
        .collect();
    let half_edges = g
        .half_edge_ids()
        .map(|h| HalfEdgeDoc {
            id: h.0,
            kind: g.kind(h),
            vertex: g.sigma0(h).0,
            sigma1_partner: (!g.is_tail(h)).then(|| g.sigma1(h).0),
            block: g.block(h),
            sigma2_next: (g.sigma2(h) != h).then(|| g.sigma2(h).0),
            cb: g.is_cb(h),
            marking: g.marking(h),
            tw: spin.map(|s| s.tw(h)),
            alt: spin.map(|s| s.alt(h)),
        })
        .collect();
    let ids = |v: Vec<HalfEdgeId>| v.into_iter().map(|h| h.0).collect();
    GraphSection {
        vertices,
        half_edges,
        anchors: spin.map_or_else(Vec::new, |s| ids(s.anchors())),
        ncb: spin.map_or_else(Vec::new, |s| ids(s.ncb_tails())),
    }
}

pub fn encode(obj: &Object) -> Document {
    let mut doc = Document {
        version: FORMAT_VERSION,
        kind: DocumentKind::Prestable,
        r: None,
        h: None,
        graph: None,
        components: None,
        dashed: None,
        labels: None,
    };
    match obj {
        Object::Prestable(g) => doc.graph = Some(encode_section(g, None)),
        Object::Spin(s) => {
            doc.kind = DocumentKind::Spin;
            doc.r = Some(s.r());
            doc.graph = Some(encode_section(s.base(), Some(s)));
        }
        Object::Rh(gr) => {
            let href = |x: HalfRef| HalfRefDoc {
                component: x.0,
                half_edge: x.1 .0,
            };
            doc.kind = DocumentKind::Rh;
            doc.r = Some(gr.r());
            doc.h = Some(gr.level());
            doc.components = Some(
                gr.components()
                    .iter()
                    .map(|s| encode_section(s.base(), Some(s)))
                    .collect(),
            );
            doc.dashed = Some(
                gr.dashed()
                    .iter()
                    .map(|&(p, q)| [href(p), href(q)])
                    .collect(),
            );
            doc.labels = Some(
                gr.labels()
                    .iter()
                    .map(|(&(c, h), &label)| LabelDoc {
                        component: c,
                        half_edge: h.0,
                        label,
                    })
                    .collect(),
            );
        }
    }
    doc
}

pub fn serialize(obj: &Object) -> String {
    serde_json::to_string_pretty(&encode(obj)).expect("documents serialize")
}

// ---------------------------------------------------------------------------
// Graph-description export

fn dot_component(out: &mut String, s: &PreStableGraph, prefix: &str, tw: Option<&[i32]>) {
    let label = |h: HalfEdgeId| match tw {
        Some(t) => format!("{}:{}", h.0, t[h.0]),
        None => h.0.to_string(),
    };
    for v in s.vertex_ids() {
        let shape = if s.is_open(v) {
            "box, penwidth=3"
        } else {
            "circle"
        };
        let _ = writeln!(
            out,
            "    {prefix}v{} [shape={shape}, label=\"v{}\"];",
            v.0, v.0
        );
    }
    for h in s.half_edge_ids() {
        if !s.is_tail(h) {
            continue;
        }
        let _ = writeln!(out, "    {prefix}t{} [shape=point];", h.0);
        let style = if s.is_boundary(h) {
            ""
        } else {
            ", color=\"black:invis:black\""
        };
        let _ = writeln!(
            out,
            "    {prefix}v{} -> {prefix}t{} [label=\"{}\"{style}];",
            s.sigma0(h).0,
            h.0,
            label(h)
        );
    }
    for (a, b) in s.edges() {
        let style = if s.is_boundary(a) {
            ""
        } else {
            ", color=\"black:invis:black\""
        };
        let _ = writeln!(
            out,
            "    {prefix}v{} -> {prefix}v{} [taillabel=\"{}\", headlabel=\"{}\"{style}];",
            s.sigma0(a).0,
            s.sigma0(b).0,
            label(a),
            label(b)
        );
    }
}

/// Deterministic DOT text: boxes are open vertices, circles closed ones,
/// double lines internal edges and dashed lines PI pairs.
pub fn export_dot(obj: &Object) -> String {
    let mut out = String::from("digraph G {\n    edge [arrowhead=none];\n");
    match obj {
        Object::Prestable(g) => dot_component(&mut out, g, "", None),
        Object::Spin(s) => dot_component(&mut out, s.base(), "", Some(s.twists())),
        Object::Rh(gr) => {
            for (i, c) in gr.components().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  subgraph cluster_{i} {{\n    label=\"component {i}\";"
                );
                dot_component(&mut out, c.base(), &format!("c{i}_"), Some(c.twists()));
                out.push_str("  }\n");
            }
            for &(p, q) in gr.dashed() {
                let _ = writeln!(
                    out,
                    "  c{}_t{} -> c{}_t{} [style=dashed];",
                    p.0, p.1 .0, q.0, q.1 .0
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// Commands

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommandError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Invalid(_) => 1,
            CommandError::Usage(_) => 2,
        }
    }
}

impl From<ParseError> for CommandError {
    fn from(e: ParseError) -> Self {
        CommandError::Invalid(e.to_string())
    }
}

impl From<BuildError> for CommandError {
    fn from(e: BuildError) -> Self {
        CommandError::Invalid(e.to_string())
    }
}

/// Output text of a command and whether it reports success.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub text: String,
    pub ok: bool,
}

impl CommandOutput {
    fn json(v: Value) -> Self {
        Self {
            text: serde_json::to_string_pretty(&v).expect("json") + "\n",
            ok: true,
        }
    }
}

fn invalid(e: impl ToString) -> CommandError {
    CommandError::Invalid(e.to_string())
}

fn kind_name(obj: &Object) -> &'static str {
    match obj {
        Object::Prestable(_) => "prestable",
        Object::Spin(_) => "spin",
        Object::Rh(_) => "rh",
    }
}

pub fn cmd_validate(text: &str) -> Result<CommandOutput, CommandError> {
    let obj = decode(&parse_document(text)?)?;
    let bad = violations(&obj);
    let mut report = json!({ "kind": kind_name(&obj), "valid": bad.is_empty(), "violations": bad });
    if let Object::Spin(s) = &obj {
        let rep = validate_spin(s);
        report["warnings"] = json!(rep.warnings);
        report["ramond_edges"] = json!(rep
            .ramond_edges
            .iter()
            .map(|&(a, b)| [a.0, b.0])
            .collect::<Vec<_>>());
        report["stable"] = json!(rep.prestable.is_stable());
    }
    let mut out = CommandOutput::json(report);
    out.ok = bad.is_empty();
    Ok(out)
}

/// A site written `h` or `c:h`.
pub fn parse_site(text: &str) -> Result<HalfRef, CommandError> {
    let bad = || CommandError::Usage(format!("site must be `h` or `c:h`, got `{text}`"));
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once(':') {
        Some((c, h)) => Ok((num(c)?, HalfEdgeId(num(h)?))),
        None => Ok((0, HalfEdgeId(num(text)?))),
    }
}

fn site_of(s: &SpinGraph, h: HalfEdgeId) -> Result<Site, CommandError> {
    if h.0 >= s.base().num_half_edges() {
        return Err(invalid(format!("no half-edge {h}")));
    }
    Ok(if s.base().is_cb(h) {
        Site::Cb(h)
    } else {
        Site::Edge(h)
    })
}

fn surgery(
    text: &str,
    site: &str,
    op: impl Fn(&SpinGraph, Site) -> Result<(SpinGraph, Option<Vec<Option<HalfEdgeId>>>), CommandError>,
) -> Result<CommandOutput, CommandError> {
    let obj = parse(text)?;
    let (c, h) = parse_site(site)?;
    let result = match obj {
        Object::Spin(s) => {
            if c != 0 {
                return Err(CommandError::Usage(
                    "spin documents have a single component".into(),
                ));
            }
            Object::Spin(op(&s, site_of(&s, h)?)?.0)
        }
        Object::Rh(gr) => {
            let comp = gr
                .components()
                .get(c)
                .ok_or_else(|| invalid(format!("no component {c}")))?;
            let (t, map) = op(comp, site_of(comp, h)?)?;
            let map =
                map.ok_or_else(|| CommandError::Usage("detach applies to spin documents".into()))?;
            Object::Rh(gr.replace_component(c, t, &map))
        }
        Object::Prestable(_) => {
            return Err(CommandError::Usage("needs a spin or rh document".into()))
        }
    };
    Ok(CommandOutput {
        text: serialize(&result) + "\n",
        ok: true,
    })
}

pub fn cmd_smooth(text: &str, site: &str) -> Result<CommandOutput, CommandError> {
    surgery(text, site, |s, site| {
        let (t, map) = smooth_mapped(s, site).map_err(invalid)?;
        Ok((t, Some(map)))
    })
}

pub fn cmd_detach(text: &str, site: &str) -> Result<CommandOutput, CommandError> {
    surgery(text, site, |s, site| {
        Ok((detach(s, site).map_err(invalid)?, None))
    })
}

fn site_json(site: Site) -> Value {
    match site {
        Site::Edge(h) => json!({ "edge": h.0 }),
        Site::Cb(h) => json!({ "cb": h.0 }),
    }
}

/// Reads an rh document, or a spin document lifted to one component at level `h`.
fn rh_input(text: &str, r: Option<u32>, h: Option<u32>) -> Result<RhGraph, CommandError> {
    let gr = match parse(text)? {
        Object::Rh(gr) => gr,
        Object::Spin(s) => {
            let level =
                h.ok_or_else(|| CommandError::Usage("--h is required for spin documents".into()))?;
            RhGraph::from_component(s, level)
        }
        Object::Prestable(_) => {
            return Err(CommandError::Usage("needs a spin or rh document".into()))
        }
    };
    if r.is_some_and(|r| r != gr.r()) || h.is_some_and(|h| h != gr.level()) {
        return Err(CommandError::Usage(
            "--r/--h disagree with the document".into(),
        ));
    }
    let bad = violations(&Object::Rh(gr.clone()));
    if !bad.is_empty() {
        return Err(ParseError::Validation(bad).into());
    }
    Ok(gr)
}

pub fn cmd_boundaries(
    text: &str,
    classify: bool,
    r: Option<u32>,
    h: Option<u32>,
) -> Result<CommandOutput, CommandError> {
    let mut rows = Vec::new();
    if classify {
        let gr = rh_input(text, r, h)?;
        for (i, b) in boundary_strata(&gr).map_err(invalid)?.iter().enumerate() {
            rows.push(json!({
                "index": i,
                "component": b.component,
                "site": site_json(b.facet.site),
                "type": b.kind.name(),
                "graph": encode(&Object::Rh(stratum_graph(&gr, b))),
            }));
        }
    } else {
        let comps = match parse(text)? {
            Object::Spin(s) => vec![s],
            Object::Rh(gr) => gr.components().to_vec(),
            Object::Prestable(_) => {
                return Err(CommandError::Usage("needs a spin or rh document".into()))
            }
        };
        for (c, s) in comps.iter().enumerate() {
            for d in codim1_boundaries(s).map_err(invalid)? {
                rows.push(json!({
                    "index": rows.len(),
                    "component": c,
                    "site": site_json(d.site),
                    "graph": encode(&Object::Spin(d.graph)),
                }));
            }
        }
    }
    Ok(CommandOutput::json(
        json!({ "count": rows.len(), "facets": rows }),
    ))
}

fn facet_index(gr: &RhGraph, b: &BoundaryStratumRef) -> Option<usize> {
    let target = stratum_graph(gr, b);
    boundary_strata(gr)
        .ok()?
        .iter()
        .position(|f| f.kind == b.kind && rh_isomorphic(&stratum_graph(gr, f), &target))
}

pub fn cmd_pi(
    text: &str,
    forward: bool,
    facet: usize,
    h: Option<u32>,
) -> Result<CommandOutput, CommandError> {
    let gr = rh_input(text, None, h)?;
    let strata = boundary_strata(&gr).map_err(invalid)?;
    let b = strata
        .get(facet)
        .ok_or_else(|| invalid(format!("no facet {facet}; there are {}", strata.len())))?;
    let (out, back) = if forward {
        pi_forward(&gr, b)
    } else {
        pi_backward(&gr, b)
    }
    .map_err(invalid)?;
    Ok(CommandOutput::json(json!({
        "direction": if forward { "forward" } else { "backward" },
        "input_facet": facet,
        "input_type": b.kind.name(),
        "output_facet": facet_index(&out, &back),
        "output_type": back.kind.name(),
        "graph": encode(&Object::Rh(out)),
    })))
}

/// Comma-separated integers; empty text is the empty list.
pub fn parse_twists(text: &str) -> Result<Vec<i32>, CommandError> {
    let text = text.trim().trim_matches('"');
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|x| {
            x.trim()
                .parse::<i32>()
                .map_err(|_| CommandError::Usage(format!("bad twist `{x}`")))
        })
        .collect()
}

pub fn cmd_enumerate(
    r: u32,
    h: u32,
    boundary: &[i32],
    internal: &[i32],
) -> Result<CommandOutput, CommandError> {
    let cells =
        crate::point_insertion::enumerate_smooth_rh(r, h, boundary, internal).map_err(invalid)?;
    let docs: Vec<Value> = cells
        .iter()
        .map(|c| json!({ "components": c.components().len(), "graph": encode(&Object::Rh(c.clone())) }))
        .collect();
    Ok(CommandOutput::json(json!({
        "r": r, "h": h, "B": boundary, "I": internal, "count": docs.len(), "cells": docs,
    })))
}

/// Which sections a topology report prints; all when none are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReportSections {
    pub euler: bool,
    pub components: bool,
    pub signs: bool,
    pub free_boundaries: bool,
}

impl ReportSections {
    fn all_if_none(self) -> Self {
        if self == Self::default() {
            Self {
                euler: true,
                components: true,
                signs: true,
                free_boundaries: true,
            }
        } else {
            self
        }
    }
}

pub fn report_json(x: &CellComplex, t: &TopologyReport, sections: ReportSections) -> Value {
    let s = sections.all_if_none();
    let mut v = json!({
        "r": x.r,
        "h": x.level,
        "dimension": t.dimension,
        "cells": { "0": t.zero_cells, "1": t.one_cells, "2": t.two_cells },
        "pi_pairs": t.num_pairs,
        "perfect_matching": t.perfect_matching,
    });
    if s.euler {
        v["euler"] = json!(t.euler);
        v["closed"] = json!(t.closed);
    }
    if s.components {
        v["components"] = t
            .components
            .iter()
            .map(|c| {
                json!({
                    "cells": c.cells,
                    "facet_counts": c.facet_counts,
                    "zero_cells": c.zero_cells,
                    "one_cells": c.one_cells,
                    "two_cells": c.two_cells,
                    "euler": c.euler,
                    "closed": c.closed,
                })
            })
            .collect();
    }
    if s.signs {
        v["signs"] = json!({
            "pairs": x.pairs.iter().map(|p| json!({
                "bi": [p.bi.0, p.bi.1],
                "ai": [p.ai.0, p.ai.1],
                "sign": p.sign.sign.value(),
            })).collect::<Vec<_>>(),
            "all_pairs_minus_one": t.all_pairs_opposite,
            "cocycle_trivial": t.cocycle_trivial,
        });
    }
    if s.free_boundaries {
        let census: BTreeMap<&str, usize> =
            [BoundaryType::Cb, BoundaryType::R, BoundaryType::NsPlus]
                .into_iter()
                .map(|k| (k.name(), t.free_census.get(&k).copied().unwrap_or(0)))
                .collect();
        v["free_boundaries"] = json!(census);
    }
    v
}

pub fn cmd_glue(
    r: u32,
    h: u32,
    boundary: &[i32],
    internal: &[i32],
    sections: ReportSections,
) -> Result<CommandOutput, CommandError> {
    let x = build_complex(r, h, boundary, internal)?;
    let t = topology_report(&x);
    Ok(CommandOutput::json(report_json(&x, &t, sections)))
}

pub fn cmd_export_dot(text: &str) -> Result<CommandOutput, CommandError> {
    Ok(CommandOutput {
        text: export_dot(&parse(text)?),
        ok: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_structure::SpinGraph;

    fn circle_cell() -> Object {
        Object::Rh(RhGraph::from_component(
            SpinGraph::disk(9, &[(1, true), (5, true), (5, true), (5, true)], &[]),
            3,
        ))
    }

    #[test]
    fn round_trip_modulo_key_order() {
        for obj in [
            circle_cell(),
            Object::Spin(SpinGraph::disk(3, &[(1, true), (1, true)], &[1])),
        ] {
            let text = serialize(&obj);
            let back = parse(&text).unwrap();
            assert_eq!(back, obj);
            let a: Value = serde_json::from_str(&text).unwrap();
            let b: Value = serde_json::from_str(&serialize(&back)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn twist_equal_to_r_is_out_of_range() {
        let mut doc = encode(&Object::Spin(SpinGraph::disk(
            3,
            &[(1, true), (1, true)],
            &[1],
        )));
        doc.graph.as_mut().unwrap().half_edges[2].tw = Some(3);
        let err = parse(&serde_json::to_string(&doc).unwrap()).unwrap_err();
        assert!(err.to_string().contains("twist out of range"), "{err}");
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        let text = serialize(&circle_cell());
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["extra"] = json!(1);
        assert!(matches!(
            parse(&v.to_string()),
            Err(ParseError::Syntax { .. })
        ));
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["version"] = json!(7);
        assert_eq!(parse(&v.to_string()), Err(ParseError::Version { found: 7 }));
    }

    #[test]
    fn dot_shapes_and_determinism() {
        let obj = Object::Spin(SpinGraph::disk(9, &[(1, true), (5, true), (5, true)], &[]));
        let d = export_dot(&obj);
        assert_eq!(d.matches("shape=box").count(), 1);
        assert_eq!(d.matches("shape=point").count(), 3);
        assert_eq!(d, export_dot(&obj));
    }

    #[test]
    fn twist_lists() {
        assert_eq!(parse_twists("1,5, 5").unwrap(), vec![1, 5, 5]);
        assert_eq!(parse_twists("").unwrap(), Vec::<i32>::new());
        assert_eq!(parse_twists("\"\"").unwrap(), Vec::<i32>::new());
        assert!(parse_twists("1,x").is_err());
    }
}
