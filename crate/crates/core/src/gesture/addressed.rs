use std::collections::BTreeMap;

use serde::Serialize;

use super::morphism::{check_morphism_on, GestureMorphism};
use super::{apply_spacemap_to_gesture, gesture_distance_on, Flavor, Gesture};
use crate::check::CONSTRUCTED_TOLERANCE;
use crate::curvespace::{same_space, Continuity, Curve, SpaceMap, SpaceRef, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::skeleton::{Digraph, DigraphMorphism};

/// A tensor grid of addresses: one strictly increasing node list per
/// address coordinate. Flat indices run row-major, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressGrid {
    axes: Vec<Vec<f64>>,
}

impl AddressGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::RaggedGrid("address grid has no axes".into()));
        }
        for (k, nodes) in axes.iter().enumerate() {
            if nodes.is_empty() || nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::RaggedGrid(format!(
                    "axis {k} needs finite, strictly increasing nodes"
                )));
            }
        }
        Ok(Self { axes })
    }

    /// `n` evenly spaced nodes on `[lo, hi]` for a 1-D address.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let nodes = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * crate::curvespace::grid_time(i, n)).collect()
        };
        Self::new(vec![nodes])
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.axes.len()];
        for k in (0..self.axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.axes[k + 1].len();
        }
        strides
    }

    fn multi_index(&self, mut j: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|s| {
                let i = j / s;
                j %= s;
                i
            })
            .collect()
    }

    /// The address at flat index `j`.
    pub fn point(&self, j: usize) -> Vec<f64> {
        self.multi_index(j)
            .iter()
            .zip(&self.axes)
            .map(|(&i, nodes)| nodes[i])
            .collect()
    }

    /// Flat indices and weights of the multilinear stencil around `alpha`,
    /// clamped onto the grid. Zero weights are dropped.
    fn stencil(&self, alpha: &[f64]) -> Vec<(usize, f64)> {
        let strides = self.strides();
        let mut stencil = vec![(0usize, 1.0f64)];
        for ((nodes, &a), &stride) in self.axes.iter().zip(alpha).zip(&strides) {
            let last = nodes.len() - 1;
            let (lo, frac) = if a.is_nan() || a <= nodes[0] || last == 0 {
                (0, 0.0)
            } else if a >= nodes[last] {
                (last, 0.0)
            } else {
                let k = nodes.partition_point(|&x| x <= a) - 1;
                (k, (a - nodes[k]) / (nodes[k + 1] - nodes[k]))
            };
            let mut next = Vec::with_capacity(stencil.len() * 2);
            for &(j, w) in &stencil {
                if frac == 0.0 {
                    next.push((j + lo * stride, w));
                } else {
                    next.push((j + lo * stride, w * (1.0 - frac)));
                    next.push((j + (lo + 1) * stride, w * frac));
                }
            }
            stencil = next;
        }
        stencil
    }
}

/// A sampled map `q: A × [0,1] → X` per arrow: `arrows[a][j][i]` is the
/// point at address `j` and curve sample `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressedSamples {
    pub address_space: SpaceRef,
    pub grid: AddressGrid,
    pub body_space: SpaceRef,
    pub arrows: BTreeMap<String, Vec<Vec<Vec<f64>>>>,
}

/// A family of gestures indexed by an address grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressedGesture {
    address_space: SpaceRef,
    grid: AddressGrid,
    skeleton: Digraph,
    body_space: SpaceRef,
    bodies: Vec<Gesture>,
    lipschitz: Option<f64>,
}

/// Address-continuity check against the declared Lipschitz bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AddressContinuity {
    /// Largest `d(g(αⱼ), g(αₖ)) / |αⱼ − αₖ|` over grid neighbours, addresses normalized.
    pub max_ratio: f64,
    pub lipschitz: Option<f64>,
    pub within_bound: bool,
}

impl AddressedGesture {
    pub fn address_space(&self) -> &SpaceRef {
        &self.address_space
    }

    pub fn grid(&self) -> &AddressGrid {
        &self.grid
    }

    pub fn skeleton(&self) -> &Digraph {
        &self.skeleton
    }

    pub fn body_space(&self) -> &SpaceRef {
        &self.body_space
    }

    pub fn bodies(&self) -> &[Gesture] {
        &self.bodies
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }

    /// Replaces the gesture at flat address index `j`.
    pub fn with_body(mut self, j: usize, body: Gesture) -> Result<Self> {
        if j >= self.bodies.len() {
            return Err(Error::RaggedGrid(format!("no address with index {j}")));
        }
        if body.skeleton() != &self.skeleton || !same_space(body.space(), &self.body_space) {
            return Err(Error::StructuralMismatch("replacement body has another skeleton or space".into()));
        }
        self.bodies[j] = body;
        Ok(self)
    }

    /// The gesture at address `alpha`, interpolated multilinearly between
    /// grid addresses and clamped onto the grid. Grid nodes return their
    /// stored gesture unchanged.
    pub fn at(&self, alpha: &[f64]) -> Result<Gesture> {
        if alpha.len() != self.grid.axes.len() {
            return Err(Error::StructuralMismatch(format!(
                "address has {} coordinates, grid has {} axes",
                alpha.len(),
                self.grid.axes.len()
            )));
        }
        let stencil = self.grid.stencil(alpha);
        if let [(j, _)] = stencil[..] {
            return Ok(self.bodies[j].clone());
        }
        let blend = |pick: &dyn Fn(&Gesture) -> &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; self.body_space.dim()];
            for &(j, w) in &stencil {
                for (o, x) in out.iter_mut().zip(pick(&self.bodies[j])) {
                    *o += w * x;
                }
            }
            out
        };
        let first = &self.bodies[0];
        let vertex_points = first
            .vertex_points()
            .keys()
            .map(|v| (v.clone(), blend(&|g: &Gesture| g.vertex_points()[v].as_slice())))
            .collect();
        let arrow_curves = first
            .arrow_curves()
            .iter()
            .map(|(a, c)| {
                let samples = (0..c.len())
                    .map(|i| blend(&|g: &Gesture| g.arrow_curves()[a].samples()[i].as_slice()))
                    .collect();
                (a.clone(), Curve::from_parts(self.body_space.clone(), samples, c.continuity()))
            })
            .collect();
        Ok(Gesture {
            skeleton: self.skeleton.clone(),
            space: self.body_space.clone(),
            vertex_points,
            arrow_curves,
            flavor: first.flavor(),
        })
    }

    /// Compares neighbouring bodies with the declared Lipschitz bound.
    pub fn continuity_report(&self) -> Result<AddressContinuity> {
        let strides = self.grid.strides();
        let dims = self.address_space.dims();
        let mut max_ratio: f64 = 0.0;
        for j in 0..self.bodies.len() {
            let idx = self.grid.multi_index(j);
            for (k, nodes) in self.grid.axes.iter().enumerate() {
                if idx[k] + 1 >= nodes.len() {
                    continue;
                }
                let step = (nodes[idx[k] + 1] - nodes[idx[k]]) / dims[k].width();
                let d = gesture_distance_on(&self.bodies[j], &self.bodies[j + strides[k]], DEFAULT_GRID)?;
                max_ratio = max_ratio.max(d / step);
            }
        }
        Ok(AddressContinuity {
            max_ratio,
            lipschitz: self.lipschitz,
            within_bound: self.lipschitz.is_some_and(|l| max_ratio <= l * (1.0 + 1e-12)),
        })
    }
}

/// Curries `q` into one gesture per grid address. Vertex points are read
/// off the curve endpoints.
pub fn curry_addressed(q: &AddressedSamples, skeleton: &Digraph, flavor: Flavor) -> Result<AddressedGesture> {
    if q.grid.axes.len() != q.address_space.dim() {
        return Err(Error::RaggedGrid(format!(
            "grid has {} axes but the address space has {} coordinates",
            q.grid.axes.len(),
            q.address_space.dim()
        )));
    }
    if q.arrows.len() != skeleton.arrow_count() || !skeleton.arrows().all(|(a, _)| q.arrows.contains_key(a)) {
        return Err(Error::StructuralMismatch("sampled arrows differ from the skeleton arrows".into()));
    }
    let n_addr = q.grid.len();
    let mut sample_counts = BTreeMap::new();
    for (a, rows) in &q.arrows {
        if rows.len() != n_addr {
            return Err(Error::RaggedGrid(format!(
                "arrow `{a}` has {} addresses, the grid has {n_addr}",
                rows.len()
            )));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::RaggedGrid(format!("arrow `{a}` has differing sample counts across addresses")));
        }
        sample_counts.insert(a.clone(), n);
    }
    let continuity = match flavor {
        Flavor::Symbolic => Continuity::PiecewiseWithJumps,
        Flavor::Physical => Continuity::Continuous { speed_bound: None },
    };
    let mut bodies = Vec::with_capacity(n_addr);
    for j in 0..n_addr {
        let curves = q
            .arrows
            .iter()
            .map(|(a, rows)| Ok((a.clone(), Curve::new(q.body_space.clone(), rows[j].clone(), continuity)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let body = Gesture::from_curves(skeleton.clone(), q.body_space.clone(), curves, flavor)
            .map_err(|e| Error::InvalidGesture(format!("address {j}: {e}")))?;
        bodies.push(body);
    }
    Ok(AddressedGesture {
        address_space: q.address_space.clone(),
        grid: q.grid.clone(),
        skeleton: skeleton.clone(),
        body_space: q.body_space.clone(),
        bodies,
        lipschitz: None,
    })
}

/// Inverse of [`curry_addressed`] at grid nodes.
pub fn uncurry(g: &AddressedGesture) -> AddressedSamples {
    let arrows = g
        .skeleton
        .arrows()
        .map(|(a, _)| {
            let rows = g.bodies.iter().map(|b| b.arrow_curves()[a].samples().to_vec()).collect();
            (a.to_string(), rows)
        })
        .collect();
    AddressedSamples {
        address_space: g.address_space.clone(),
        grid: g.grid.clone(),
        body_space: g.body_space.clone(),
        arrows,
    }
}

/// A triple `(t, a, m)`: skeleton map, address change `B → A` and body map.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressedGestureMorphism {
    pub t: DigraphMorphism,
    pub address_change: SpaceMap,
    pub m: SpaceMap,
    pub tolerance: f64,
}

impl AddressedGestureMorphism {
    pub fn identity(g: &AddressedGesture) -> Self {
        Self {
            t: DigraphMorphism::identity(&g.skeleton),
            address_change: SpaceMap::identity(&g.address_space),
            m: SpaceMap::identity(&g.body_space),
            tolerance: CONSTRUCTED_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AddressedReport {
    pub residual: f64,
    /// Residual at each of the target's grid addresses, in flat order.
    pub per_address: Vec<f64>,
    pub tolerance: f64,
    pub commutes: bool,
}

/// For every address `β` of `h`: pulls `g` back to `a(β)`, pushes it through
/// `m` and compares it with `h(β)` along `t`.
pub fn check_addressed_morphism(
    f: &AddressedGestureMorphism,
    g: &AddressedGesture,
    h: &AddressedGesture,
) -> Result<AddressedReport> {
    if !same_space(f.address_change.source(), &h.address_space) || !same_space(f.address_change.target(), &g.address_space) {
        return Err(Error::StructuralMismatch(
            "address change must run from the target's address space to the source's".into(),
        ));
    }
    let square = GestureMorphism::new(f.t.clone(), SpaceMap::identity(&h.body_space), f.tolerance)?;
    let mut per_address = Vec::with_capacity(h.bodies.len());
    for (j, target) in h.bodies.iter().enumerate() {
        let alpha = f.address_change.apply_point(&h.grid.point(j));
        let pulled = g.at(&alpha)?;
        if !same_space(f.m.source(), pulled.space()) {
            return Err(Error::StructuralMismatch(format!(
                "body map starts in `{}` but source bodies live in `{}`",
                f.m.source().name(),
                pulled.space().name()
            )));
        }
        let mapped = apply_spacemap_to_gesture(&f.m, &pulled)?;
        per_address.push(check_morphism_on(&square, &mapped, target, DEFAULT_GRID)?.residual);
    }
    let residual = per_address.iter().copied().fold(0.0, f64::max);
    Ok(AddressedReport {
        residual,
        per_address,
        tolerance: f.tolerance,
        commutes: residual <= f.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvespace::{grid_time, ConfigSpace, Dimension};
    use crate::skeleton::make_arrow_skeleton;

    fn address() -> SpaceRef {
        ConfigSpace::new("address", vec![Dimension::new("alpha", "", 0.0, 2.0)]).unwrap()
    }

    fn body() -> SpaceRef {
        ConfigSpace::new(
            "body",
            vec![Dimension::new("x", "", -1.0, 1.0), Dimension::new("y", "", -1.0, 1.0)],
        )
        .unwrap()
    }

    fn trig_samples(n_addr: usize, n_t: usize) -> AddressedSamples {
        let grid = AddressGrid::uniform(0.0, 2.0, n_addr).unwrap();
        let rows = (0..n_addr)
            .map(|j| {
                let alpha = grid.point(j)[0];
                (0..n_t)
                    .map(|i| {
                        let t = grid_time(i, n_t);
                        vec![(alpha * t).sin(), (alpha * t).cos()]
                    })
                    .collect()
            })
            .collect();
        AddressedSamples {
            address_space: address(),
            grid,
            body_space: body(),
            arrows: BTreeMap::from([("a0".to_string(), rows)]),
        }
    }

    #[test]
    fn curry_matches_direct_sampling() {
        let q = trig_samples(5, 33);
        let g = curry_addressed(&q, &make_arrow_skeleton(), Flavor::Symbolic).unwrap();
        for (j, b) in g.bodies().iter().enumerate() {
            let alpha = q.grid.point(j)[0];
            for (i, p) in b.arrow_curves()["a0"].samples().iter().enumerate() {
                let t = grid_time(i, 33);
                assert_eq!(p, &vec![(alpha * t).sin(), (alpha * t).cos()]);
            }
            assert!(b.validate().is_valid());
        }
        assert_eq!(uncurry(&g), q);
    }

    #[test]
    fn constant_in_address() {
        let mut q = trig_samples(4, 9);
        let row = q.arrows["a0"][1].clone();
        q.arrows.insert("a0".into(), vec![row; 4]);
        let g = curry_addressed(&q, &make_arrow_skeleton(), Flavor::Symbolic).unwrap();
        assert!(g.bodies().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn ragged_grid_is_rejected() {
        let mut q = trig_samples(4, 9);
        q.arrows.get_mut("a0").unwrap()[2].pop();
        assert!(matches!(
            curry_addressed(&q, &make_arrow_skeleton(), Flavor::Symbolic),
            Err(Error::RaggedGrid(_))
        ));
        let mut q = trig_samples(4, 9);
        q.arrows.get_mut("a0").unwrap().pop();
        assert!(matches!(
            curry_addressed(&q, &make_arrow_skeleton(), Flavor::Symbolic),
            Err(Error::RaggedGrid(_))
        ));
    }

    #[test]
    fn identity_triple_has_zero_residual() {
        let g = curry_addressed(&trig_samples(5, 33), &make_arrow_skeleton(), Flavor::Symbolic).unwrap();
        let r = check_addressed_morphism(&AddressedGestureMorphism::identity(&g), &g, &g).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.commutes);
    }

    #[test]
    fn shifted_body_is_detected() {
        let g = curry_addressed(&trig_samples(5, 33), &make_arrow_skeleton(), Flavor::Symbolic).unwrap();
        let shift = SpaceMap::affine(body(), body(), vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 0.0]).unwrap();
        let moved = apply_spacemap_to_gesture(&shift, &g.bodies()[2]).unwrap();
        let h = g.clone().with_body(2, moved).unwrap();
        let r = check_addressed_morphism(&AddressedGestureMorphism::identity(&g), &g, &h).unwrap();
        assert!(r.residual >= 0.5);
        assert_eq!(r.per_address[0], 0.0);
    }

    #[test]
    fn continuity_ratio() {
        let g = curry_addressed(&trig_samples(9, 65), &make_arrow_skeleton(), Flavor::Symbolic)
            .unwrap()
            .with_lipschitz(4.0);
        let report = g.continuity_report().unwrap();
        assert!(report.max_ratio > 0.0);
        assert!(report.within_bound);
    }
}
