//! Continuous maps between configuration spaces and their lift to curves.

use nalgebra::{DMatrix, DVector};

use super::curve::{Continuity, Curve};
use super::space::{same_space, SpaceRef};
use crate::error::{Error, Result};

/// How a [`SpaceMap`] computes images.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// `y = A·x + b`, `A` stored row-major as `target × source`.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// `yᵢ = x[perm[i]]`.
    Permutation { perm: Vec<usize> },
    /// Values on a tensor grid spanning the source box, interpolated
    /// multilinearly. `values` is row-major with the last source coordinate
    /// varying fastest. Points outside the box are clamped onto it.
    Tabulated { nodes: Vec<usize>, values: Vec<Vec<f64>> },
    /// Composite applied left to right.
    Chain(Vec<SpaceMap>),
}

/// A continuous map `m: X → Y`; [`apply_spacemap_to_curve`] is its lift `ṁ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceMap {
    source: SpaceRef,
    target: SpaceRef,
    kind: MapKind,
}

impl SpaceMap {
    pub fn new(source: SpaceRef, target: SpaceRef, kind: MapKind) -> Result<Self> {
        let (n, m) = (source.dim(), target.dim());
        match &kind {
            MapKind::Affine { matrix, offset } => {
                if matrix.len() != m || matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidSpaceMap(format!(
                        "affine matrix must be {m}×{n} for `{}` → `{}`",
                        source.name(),
                        target.name()
                    )));
                }
                if offset.len() != m {
                    return Err(Error::InvalidSpaceMap(format!("affine offset must have length {m}")));
                }
                if matrix.iter().flatten().chain(offset).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidSpaceMap("affine entries must be finite".into()));
                }
            }
            MapKind::Permutation { perm } => {
                let mut seen = vec![false; n];
                let valid = n == m
                    && perm.len() == n
                    && perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
                if !valid {
                    return Err(Error::InvalidSpaceMap(format!(
                        "{perm:?} is not a permutation of {n} coordinates onto {m}"
                    )));
                }
            }
            MapKind::Tabulated { nodes, values } => {
                if nodes.len() != n || nodes.iter().any(|&k| k < 2) {
                    return Err(Error::InvalidSpaceMap(format!(
                        "tabulated grid needs {n} axes with at least 2 nodes each"
                    )));
                }
                let total: usize = nodes.iter().product();
                if values.len() != total || values.iter().any(|v| v.len() != m) {
                    return Err(Error::InvalidSpaceMap(format!(
                        "tabulated grid needs {total} values of dimension {m}"
                    )));
                }
                if values.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidSpaceMap("tabulated values must be finite".into()));
                }
            }
            MapKind::Chain(maps) => {
                let Some(first) = maps.first() else {
                    return Err(Error::InvalidSpaceMap("empty chain".into()));
                };
                let last = maps.last().expect("non-empty");
                let linked = maps.windows(2).all(|w| same_space(&w[0].target, &w[1].source));
                if !same_space(&first.source, &source) || !same_space(&last.target, &target) || !linked {
                    return Err(Error::InvalidSpaceMap("chain links do not line up".into()));
                }
            }
        }
        Ok(Self { source, target, kind })
    }

    pub fn identity(space: &SpaceRef) -> Self {
        Self {
            source: space.clone(),
            target: space.clone(),
            kind: MapKind::Permutation {
                perm: (0..space.dim()).collect(),
            },
        }
    }

    pub fn affine(source: SpaceRef, target: SpaceRef, matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        Self::new(source, target, MapKind::Affine { matrix, offset })
    }

    pub fn permutation(source: SpaceRef, target: SpaceRef, perm: Vec<usize>) -> Result<Self> {
        Self::new(source, target, MapKind::Permutation { perm })
    }

    /// Tabulates `f` on a tensor grid over the source box.
    pub fn tabulate(
        source: SpaceRef,
        target: SpaceRef,
        nodes: Vec<usize>,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        if nodes.len() != source.dim() || nodes.iter().any(|&k| k < 2) {
            return Err(Error::InvalidSpaceMap("tabulation needs at least 2 nodes per axis".into()));
        }
        let total: usize = nodes.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; nodes.len()];
        for _ in 0..total {
            let p: Vec<f64> = idx
                .iter()
                .zip(&nodes)
                .zip(source.dims())
                .map(|((&i, &k), d)| {
                    if i + 1 == k {
                        d.max
                    } else {
                        d.min + d.width() * i as f64 / (k - 1) as f64
                    }
                })
                .collect();
            values.push(f(&p));
            for axis in (0..idx.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < nodes[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Self::new(source, target, MapKind::Tabulated { nodes, values })
    }

    pub fn source(&self) -> &SpaceRef {
        &self.source
    }

    pub fn target(&self) -> &SpaceRef {
        &self.target
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_identity(&self) -> bool {
        same_space(&self.source, &self.target)
            && matches!(&self.kind, MapKind::Permutation { perm } if perm.iter().enumerate().all(|(i, &p)| i == p))
    }

    pub fn apply_point(&self, p: &[f64]) -> Vec<f64> {
        match &self.kind {
            MapKind::Affine { matrix, offset } => matrix
                .iter()
                .zip(offset)
                .map(|(row, b)| row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + b)
                .collect(),
            MapKind::Permutation { perm } => perm.iter().map(|&j| p[j]).collect(),
            MapKind::Tabulated { nodes, values } => self.interpolate(nodes, values, p),
            MapKind::Chain(maps) => maps
                .iter()
                .fold(p.to_vec(), |acc, m| m.apply_point(&acc)),
        }
    }

    fn interpolate(&self, nodes: &[usize], values: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
        let d = nodes.len();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for ((&x, &k), dim) in p.iter().zip(nodes).zip(self.source.dims()) {
            let u = ((x - dim.min) / dim.width()).clamp(0.0, 1.0);
            let pos = u * (k - 1) as f64;
            let i = (pos.floor() as usize).min(k - 2);
            base.push(i);
            frac.push(pos - i as f64);
        }
        let mut out = vec![0.0; self.target.dim()];
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut flat = 0;
            for axis in 0..d {
                let up = (corner >> (d - 1 - axis)) & 1;
                weight *= if up == 1 { frac[axis] } else { 1.0 - frac[axis] };
                flat = flat * nodes[axis] + base[axis] + up;
            }
            if weight != 0.0 {
                for (o, v) in out.iter_mut().zip(&values[flat]) {
                    *o += weight * v;
                }
            }
        }
        out
    }

    /// `(A, b)` when the map is affine (permutations and chains of affine maps included).
    pub fn as_affine(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        let (n, m) = (self.source.dim(), self.target.dim());
        match &self.kind {
            MapKind::Affine { matrix, offset } => Some((
                DMatrix::from_fn(m, n, |i, j| matrix[i][j]),
                DVector::from_column_slice(offset),
            )),
            MapKind::Permutation { perm } => Some((
                DMatrix::from_fn(m, n, |i, j| if perm[i] == j { 1.0 } else { 0.0 }),
                DVector::zeros(m),
            )),
            MapKind::Tabulated { .. } => None,
            MapKind::Chain(maps) => maps.iter().try_fold(
                (DMatrix::identity(n, n), DVector::zeros(n)),
                |(a, b), next| {
                    let (a2, b2) = next.as_affine()?;
                    Some((&a2 * a, &a2 * b + b2))
                },
            ),
        }
    }

    /// Operator norm of the linear part in normalized coordinates: the
    /// Lipschitz constant of the map for normalized Euclidean distance.
    pub fn normalized_operator_norm(&self) -> Option<f64> {
        let (a, _) = self.as_affine()?;
        let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            a[(i, j)] * self.source.dims()[j].width() / self.target.dims()[i].width()
        });
        Some(scaled.singular_values().max())
    }

    /// Returns `next ∘ self`.
    pub fn then(&self, next: &SpaceMap) -> Result<SpaceMap> {
        if !same_space(&self.target, &next.source) {
            return Err(Error::space_mismatch(
                next.source.name(),
                self.target.name(),
                "space map composition",
            ));
        }
        if self.is_identity() {
            return Ok(next.clone());
        }
        if next.is_identity() {
            return Ok(self.clone());
        }
        let kind = match (&self.kind, &next.kind) {
            (MapKind::Permutation { perm: p }, MapKind::Permutation { perm: q }) => MapKind::Permutation {
                perm: q.iter().map(|&j| p[j]).collect(),
            },
            (MapKind::Affine { .. } | MapKind::Permutation { .. }, MapKind::Affine { .. } | MapKind::Permutation { .. }) => {
                let (a1, b1) = self.as_affine().expect("affine");
                let (a2, b2) = next.as_affine().expect("affine");
                affine_kind(&(&a2 * &a1), &(&a2 * b1 + b2))
            }
            _ => {
                let mut maps = Vec::new();
                for m in [self, next] {
                    match &m.kind {
                        MapKind::Chain(inner) => maps.extend(inner.iter().cloned()),
                        _ => maps.push(m.clone()),
                    }
                }
                MapKind::Chain(maps)
            }
        };
        SpaceMap::new(self.source.clone(), next.target.clone(), kind)
    }

    /// Exact inverse of an invertible affine map or permutation.
    pub fn inverse(&self) -> Result<SpaceMap> {
        if let MapKind::Permutation { perm } = &self.kind {
            let mut inv = vec![0; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                inv[p] = i;
            }
            return SpaceMap::permutation(self.target.clone(), self.source.clone(), inv);
        }
        let (a, b) = self
            .as_affine()
            .ok_or_else(|| Error::InvalidSpaceMap("only affine maps can be inverted".into()))?;
        if !a.is_square() {
            return Err(Error::InvalidSpaceMap("non-square affine map has no inverse".into()));
        }
        let inv = a
            .try_inverse()
            .ok_or_else(|| Error::InvalidSpaceMap("affine map is singular".into()))?;
        let offset = -(&inv * b);
        SpaceMap::new(self.target.clone(), self.source.clone(), affine_kind(&inv, &offset))
    }

    /// Moore–Penrose pseudo-inverse of an affine map, `x ↦ A⁺(x − b)`.
    pub fn pseudo_inverse(&self) -> Result<SpaceMap> {
        let (a, b) = self
            .as_affine()
            .ok_or_else(|| Error::InvalidSpaceMap("only affine maps have a pseudo-inverse".into()))?;
        let pinv = a
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidSpaceMap(e.to_string()))?;
        let offset = -(&pinv * b);
        SpaceMap::new(self.target.clone(), self.source.clone(), affine_kind(&pinv, &offset))
    }

    /// A bound on the normalized speed gain, when one is known.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.normalized_operator_norm()
    }
}

fn affine_kind(a: &DMatrix<f64>, b: &DVector<f64>) -> MapKind {
    MapKind::Affine {
        matrix: (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
            .collect(),
        offset: b.iter().copied().collect(),
    }
}

/// The lift `ṁ`: maps every sample of `c` through `m`.
///
/// A declared speed bound is carried over scaled by the map's Lipschitz
/// constant, or replaced by the measured speed when the constant is unknown.
pub fn apply_spacemap_to_curve(m: &SpaceMap, c: &Curve) -> Result<Curve> {
    if !same_space(c.space(), &m.source) {
        return Err(Error::space_mismatch(m.source.name(), c.space().name(), "space map source"));
    }
    let samples: Vec<Vec<f64>> = c.samples().iter().map(|p| m.apply_point(p)).collect();
    if samples.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidCurve("space map produced non-finite samples".into()));
    }
    let mapped = Curve::from_parts(m.target.clone(), samples, Continuity::PiecewiseWithJumps);
    let continuity = match c.continuity() {
        Continuity::PiecewiseWithJumps => Continuity::PiecewiseWithJumps,
        Continuity::Continuous { speed_bound: None } => Continuity::Continuous { speed_bound: None },
        Continuity::Continuous { speed_bound: Some(b) } => {
            let scaled = match m.lipschitz_bound() {
                Some(l) if l > 0.0 => b * l,
                Some(_) => b,
                None => {
                    let measured = mapped.max_speed();
                    if measured > 0.0 { measured } else { b }
                }
            };
            Continuity::Continuous { speed_bound: Some(scaled) }
        }
    };
    Ok(mapped.with_continuity(continuity))
}
