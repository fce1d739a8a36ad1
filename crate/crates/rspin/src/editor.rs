//! Mutable scratch representation for surgery on spin graphs.

use crate::graph_core::{
    HalfEdgeData, HalfEdgeId, HalfEdgeKind, PreStableGraph, VertexData, VertexId, VertexKind,
};
use crate::spin_structure::{compress_markings, SpinGraph};

#[derive(Clone, Debug)]
pub(crate) struct EVertex {
    pub kind: VertexKind,
    pub genus_hat: u32,
    /// Ordered block contents; open vertices only.
    pub blocks: Vec<Vec<usize>>,
    pub alive: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct EHalf {
    pub kind: HalfEdgeKind,
    pub vertex: usize,
    pub partner: Option<usize>,
    pub cb: bool,
    pub marking: Option<u32>,
    pub tw: i32,
    pub alt: bool,
    pub anchor: bool,
    pub ncb: bool,
    pub alive: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Editor {
    pub r: u32,
    pub vertices: Vec<EVertex>,
    pub halves: Vec<EHalf>,
}

impl Editor {
    pub fn from_spin(s: &SpinGraph) -> Self {
        let g = s.base();
        let vertices = g
            .vertex_ids()
            .map(|v| EVertex {
                kind: g.vertex_kind(v),
                genus_hat: g.genus_hat(v),
                blocks: g
                    .blocks(v)
                    .into_iter()
                    .map(|b| b.into_iter().map(|h| h.0).collect())
                    .collect(),
                alive: true,
            })
            .collect();
        let halves = g
            .half_edge_ids()
            .map(|h| EHalf {
                kind: g.kind(h),
                vertex: g.sigma0(h).0,
                partner: (!g.is_tail(h)).then(|| g.sigma1(h).0),
                cb: g.is_cb(h),
                marking: g.marking(h),
                tw: s.tw(h),
                alt: s.alt(h),
                anchor: s.is_anchor(h),
                ncb: s.is_ncb(h),
                alive: true,
            })
            .collect();
        Self {
            r: s.r(),
            vertices,
            halves,
        }
    }

    pub fn add_vertex(&mut self, kind: VertexKind, genus_hat: u32, blocks: usize) -> usize {
        self.vertices.push(EVertex {
            kind,
            genus_hat,
            blocks: vec![Vec::new(); blocks],
            alive: true,
        });
        self.vertices.len() - 1
    }

    /// A new unmarked tail; boundary halves still need a place in a block.
    pub fn add_half(&mut self, vertex: usize, kind: HalfEdgeKind, tw: i32, alt: bool) -> usize {
        self.halves.push(EHalf {
            kind,
            vertex,
            partner: None,
            cb: false,
            marking: None,
            tw,
            alt,
            anchor: false,
            ncb: false,
            alive: true,
        });
        self.halves.len() - 1
    }

    pub fn pair(&mut self, a: usize, b: usize) {
        self.halves[a].partner = Some(b);
        self.halves[b].partner = Some(a);
    }

    /// Reassigns a half-edge to vertex `to`; block lists are left to the caller.
    pub fn move_half(&mut self, h: usize, to: usize) {
        self.halves[h].vertex = to;
    }

    pub fn finish(self) -> (SpinGraph, Vec<Option<HalfEdgeId>>) {
        let mut vmap = vec![None; self.vertices.len()];
        let mut nv = 0;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.alive {
                vmap[i] = Some(nv);
                nv += 1;
            }
        }
        let mut hmap = vec![None; self.halves.len()];
        let mut nh = 0;
        for (i, h) in self.halves.iter().enumerate() {
            if h.alive {
                hmap[i] = Some(nh);
                nh += 1;
            }
        }
        let mut block_of = vec![None; self.halves.len()];
        let mut next = vec![None; self.halves.len()];
        for v in self.vertices.iter().filter(|v| v.alive) {
            for (bi, b) in v.blocks.iter().enumerate() {
                for (j, &h) in b.iter().enumerate() {
                    block_of[h] = Some(bi as u32);
                    next[h] = Some(b[(j + 1) % b.len()]);
                }
            }
        }
        let vertices: Vec<VertexData> = self
            .vertices
            .iter()
            .filter(|v| v.alive)
            .map(|v| VertexData {
                kind: v.kind,
                genus_hat: v.genus_hat,
                num_boundaries: if v.kind == VertexKind::Open {
                    v.blocks.len() as u32
                } else {
                    0
                },
            })
            .collect();
        let live: Vec<usize> = (0..self.halves.len())
            .filter(|&i| self.halves[i].alive)
            .collect();
        let mut halves: Vec<HalfEdgeData> = live
            .iter()
            .map(|&i| {
                let h = &self.halves[i];
                let id = HalfEdgeId(hmap[i].expect("live"));
                HalfEdgeData {
                    kind: h.kind,
                    vertex: VertexId(vmap[h.vertex].expect("live half on dead vertex")),
                    sigma1: h
                        .partner
                        .map_or(id, |p| HalfEdgeId(hmap[p].expect("dead partner"))),
                    sigma2: next[i].map_or(id, |n| HalfEdgeId(hmap[n].expect("dead block member"))),
                    block: if h.kind == HalfEdgeKind::Boundary {
                        block_of[i]
                    } else {
                        None
                    },
                    cb: h.cb,
                    marking: h.marking,
                }
            })
            .collect();
        compress_markings(&mut halves);
        let base =
            PreStableGraph::from_parts(vertices, halves).expect("editor keeps indices in range");
        let tw = live.iter().map(|&i| self.halves[i].tw).collect();
        let alt = live.iter().map(|&i| self.halves[i].alt).collect();
        let pick = |f: fn(&EHalf) -> bool| {
            live.iter()
                .filter(|&&i| f(&self.halves[i]))
                .map(|&i| HalfEdgeId(hmap[i].unwrap()))
                .collect::<Vec<_>>()
        };
        let anchors = pick(|h| h.anchor);
        let ncb = pick(|h| h.ncb);
        let s =
            SpinGraph::from_parts(base, self.r, tw, alt, &anchors, &ncb).expect("lengths match");
        (s, hmap.into_iter().map(|x| x.map(HalfEdgeId)).collect())
    }
}
