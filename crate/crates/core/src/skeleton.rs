//! Directed-graph skeleta and digraph morphisms.
//!
//! Vertex and arrow ids are opaque strings kept in lexicographic order, so
//! iteration, enumeration and serialization are deterministic. Loops and
//! parallel arrows are allowed.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Size limit (vertices and arrows, per digraph) for exhaustive enumeration.
pub const ENUMERATION_GUARD: usize = 8;

/// Endpoints of an arrow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Incidence {
    pub tail: String,
    pub head: String,
}

/// A finite directed multigraph: the skeleton of a gesture.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    vertices: BTreeSet<String>,
    arrows: BTreeMap<String, Incidence>,
}

impl Digraph {
    /// Builds a digraph, rejecting duplicate ids and dangling arrows.
    pub fn new<V, A>(vertices: V, arrows: A) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        A: IntoIterator<Item = (String, String, String)>,
    {
        let mut vs = BTreeSet::new();
        for v in vertices {
            let v = v.into();
            if !vs.insert(v.clone()) {
                return Err(Error::InvalidDigraph(format!("duplicate vertex id `{v}`")));
            }
        }
        let mut arrows_map = BTreeMap::new();
        for (id, tail, head) in arrows {
            for end in [&tail, &head] {
                if !vs.contains(end) {
                    return Err(Error::InvalidDigraph(format!(
                        "arrow `{id}` references unknown vertex `{end}`"
                    )));
                }
            }
            if arrows_map.insert(id.clone(), Incidence { tail, head }).is_some() {
                return Err(Error::InvalidDigraph(format!("duplicate arrow id `{id}`")));
            }
        }
        Ok(Self {
            vertices: vs,
            arrows: arrows_map,
        })
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = &str> {
        self.vertices.iter().map(String::as_str)
    }

    pub fn arrows(&self) -> impl ExactSizeIterator<Item = (&str, &Incidence)> {
        self.arrows.iter().map(|(id, inc)| (id.as_str(), inc))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.vertices.contains(v)
    }

    pub fn arrow(&self, id: &str) -> Option<&Incidence> {
        self.arrows.get(id)
    }

    pub fn tail(&self, arrow: &str) -> Option<&str> {
        self.arrows.get(arrow).map(|inc| inc.tail.as_str())
    }

    pub fn head(&self, arrow: &str) -> Option<&str> {
        self.arrows.get(arrow).map(|inc| inc.head.as_str())
    }

    fn within_guard(&self) -> bool {
        self.vertex_count() <= ENUMERATION_GUARD && self.arrow_count() <= ENUMERATION_GUARD
    }
}

/// The skeleton `↑`: vertices `v0`, `v1` and one arrow `a0: v0 → v1`.
pub fn make_arrow_skeleton() -> Digraph {
    chain(1)
}

/// A path `v0 → v1 → … → vn` with arrows `a0 … a(n-1)`.
pub fn chain(arrows: usize) -> Digraph {
    let vertices = (0..=arrows).map(|i| format!("v{i}"));
    let arrows = (0..arrows).map(|i| (format!("a{i}"), format!("v{i}"), format!("v{}", i + 1)));
    Digraph::new(vertices, arrows).expect("chain is well formed")
}

/// One vertex `v0`, optionally carrying a loop `l0`.
pub fn point(with_loop: bool) -> Digraph {
    let arrows = with_loop.then(|| ("l0".to_string(), "v0".to_string(), "v0".to_string()));
    Digraph::new(["v0"], arrows).expect("point is well formed")
}

/// An incidence-preserving pair of maps between two digraphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigraphMorphism {
    source: Digraph,
    target: Digraph,
    vertex_map: BTreeMap<String, String>,
    arrow_map: BTreeMap<String, String>,
}

impl DigraphMorphism {
    /// Checks totality and incidence before accepting the maps.
    pub fn new(
        source: Digraph,
        target: Digraph,
        vertex_map: BTreeMap<String, String>,
        arrow_map: BTreeMap<String, String>,
    ) -> Result<Self> {
        for v in source.vertices() {
            match vertex_map.get(v) {
                None => return Err(Error::NotTotal(format!("vertex `{v}` is unmapped"))),
                Some(w) if !target.has_vertex(w) => {
                    return Err(Error::NotTotal(format!(
                        "vertex `{v}` maps to unknown vertex `{w}`"
                    )))
                }
                _ => {}
            }
        }
        if vertex_map.len() != source.vertex_count() {
            return Err(Error::NotTotal("vertex map has entries outside the source".into()));
        }
        for (a, inc) in source.arrows() {
            let Some(b) = arrow_map.get(a) else {
                return Err(Error::NotTotal(format!("arrow `{a}` is unmapped")));
            };
            let Some(img) = target.arrow(b) else {
                return Err(Error::NotTotal(format!("arrow `{a}` maps to unknown arrow `{b}`")));
            };
            let tail = &vertex_map[&inc.tail];
            let head = &vertex_map[&inc.head];
            if &img.tail != tail || &img.head != head {
                return Err(Error::IncidenceViolation {
                    arrow: a.to_string(),
                    detail: format!(
                        "image `{b}` runs {} → {}, expected {tail} → {head}",
                        img.tail, img.head
                    ),
                });
            }
        }
        if arrow_map.len() != source.arrow_count() {
            return Err(Error::NotTotal("arrow map has entries outside the source".into()));
        }
        Ok(Self {
            source,
            target,
            vertex_map,
            arrow_map,
        })
    }

    pub fn identity(d: &Digraph) -> Self {
        Self {
            source: d.clone(),
            target: d.clone(),
            vertex_map: d.vertices().map(|v| (v.to_string(), v.to_string())).collect(),
            arrow_map: d.arrows().map(|(a, _)| (a.to_string(), a.to_string())).collect(),
        }
    }

    pub fn source(&self) -> &Digraph {
        &self.source
    }

    pub fn target(&self) -> &Digraph {
        &self.target
    }

    pub fn vertex_map(&self) -> &BTreeMap<String, String> {
        &self.vertex_map
    }

    pub fn arrow_map(&self) -> &BTreeMap<String, String> {
        &self.arrow_map
    }

    pub fn map_vertex(&self, v: &str) -> Option<&str> {
        self.vertex_map.get(v).map(String::as_str)
    }

    pub fn map_arrow(&self, a: &str) -> Option<&str> {
        self.arrow_map.get(a).map(String::as_str)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.vertex_map.iter().all(|(k, v)| k == v)
            && self.arrow_map.iter().all(|(k, v)| k == v)
    }

    /// Returns `next ∘ self`.
    pub fn then(&self, next: &DigraphMorphism) -> Result<DigraphMorphism> {
        compose_digraph_morphisms(self, next)
    }
}

/// Returns `g ∘ f` (apply `f` first).
pub fn compose_digraph_morphisms(f: &DigraphMorphism, g: &DigraphMorphism) -> Result<DigraphMorphism> {
    if f.target != g.source {
        return Err(Error::MismatchedDigraphs);
    }
    let vertex_map = f
        .vertex_map
        .iter()
        .map(|(v, w)| (v.clone(), g.vertex_map[w].clone()))
        .collect();
    let arrow_map = f
        .arrow_map
        .iter()
        .map(|(a, b)| (a.clone(), g.arrow_map[b].clone()))
        .collect();
    Ok(DigraphMorphism {
        source: f.source.clone(),
        target: g.target.clone(),
        vertex_map,
        arrow_map,
    })
}

/// Every incidence-preserving morphism `src → dst`.
///
/// Vertex assignments are explored in lexicographic order of source vertex
/// ids and target ids; arrow assignments likewise, so the output order is
/// stable. Both digraphs must be within [`ENUMERATION_GUARD`].
pub fn enumerate_digraph_morphisms(src: &Digraph, dst: &Digraph) -> Result<Vec<DigraphMorphism>> {
    for d in [src, dst] {
        if !d.within_guard() {
            return Err(Error::TooLarge {
                vertices: d.vertex_count(),
                arrows: d.arrow_count(),
                limit: ENUMERATION_GUARD,
            });
        }
    }

    let src_vertices: Vec<&str> = src.vertices().collect();
    let dst_vertices: Vec<&str> = dst.vertices().collect();
    let src_arrows: Vec<(&str, &Incidence)> = src.arrows().collect();
    let index: BTreeMap<&str, usize> = src_vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    // Arrows become checkable once both endpoints are assigned; bucket them by
    // the later of their two endpoint positions.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); src_vertices.len()];
    for (k, (_, inc)) in src_arrows.iter().enumerate() {
        let pos = index[inc.tail.as_str()].max(index[inc.head.as_str()]);
        ready[pos].push(k);
    }

    let mut out = Vec::new();
    let mut assignment: Vec<usize> = Vec::with_capacity(src_vertices.len());
    let ctx = EnumCtx {
        src,
        dst,
        src_vertices: &src_vertices,
        dst_vertices: &dst_vertices,
        src_arrows: &src_arrows,
        index: &index,
        ready: &ready,
    };
    ctx.assign_vertices(&mut assignment, &mut out);
    Ok(out)
}

struct EnumCtx<'a> {
    src: &'a Digraph,
    dst: &'a Digraph,
    src_vertices: &'a [&'a str],
    dst_vertices: &'a [&'a str],
    src_arrows: &'a [(&'a str, &'a Incidence)],
    index: &'a BTreeMap<&'a str, usize>,
    ready: &'a [Vec<usize>],
}

impl EnumCtx<'_> {
    fn candidates(&self, assignment: &[usize], arrow: usize) -> Vec<&str> {
        let inc = self.src_arrows[arrow].1;
        let tail = self.dst_vertices[assignment[self.index[inc.tail.as_str()]]];
        let head = self.dst_vertices[assignment[self.index[inc.head.as_str()]]];
        self.dst
            .arrows()
            .filter(|(_, img)| img.tail == tail && img.head == head)
            .map(|(id, _)| id)
            .collect()
    }

    fn assign_vertices(&self, assignment: &mut Vec<usize>, out: &mut Vec<DigraphMorphism>) {
        let pos = assignment.len();
        if pos == self.src_vertices.len() {
            self.assign_arrows(assignment, 0, &mut Vec::new(), out);
            return;
        }
        for w in 0..self.dst_vertices.len() {
            assignment.push(w);
            let feasible = self.ready[pos]
                .iter()
                .all(|&k| !self.candidates(assignment, k).is_empty());
            if feasible {
                self.assign_vertices(assignment, out);
            }
            assignment.pop();
        }
    }

    fn assign_arrows<'s>(
        &'s self,
        assignment: &[usize],
        k: usize,
        chosen: &mut Vec<&'s str>,
        out: &mut Vec<DigraphMorphism>,
    ) {
        if k == self.src_arrows.len() {
            let vertex_map = self
                .src_vertices
                .iter()
                .zip(assignment)
                .map(|(v, &w)| (v.to_string(), self.dst_vertices[w].to_string()))
                .collect();
            let arrow_map = self
                .src_arrows
                .iter()
                .zip(chosen.iter())
                .map(|((a, _), b)| (a.to_string(), b.to_string()))
                .collect();
            out.push(DigraphMorphism {
                source: self.src.clone(),
                target: self.dst.clone(),
                vertex_map,
                arrow_map,
            });
            return;
        }
        for b in self.candidates(assignment, k) {
            chosen.push(b);
            self.assign_arrows(assignment, k + 1, chosen, out);
            chosen.pop();
        }
    }
}
