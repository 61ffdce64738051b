//! Higher-order Lipschitz data (Whitney fields) on a surface, their Taylor
//! remainders and validator, and the Whitney extension to a shell around the
//! surface.
//!
//! A Whitney field is the collection {f^(j) : |j| <= k} of multivector values
//! on the mesh nodes. Data may optionally carry an analytic "jet" closure
//! that evaluates f^(j) at arbitrary surface points; operator outputs and
//! analytically generated test data provide one, which lets downstream
//! consumers (nested operator application, the extension) evaluate off-node
//! without interpolation error.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::clifford::{Multivector, Vector};
use crate::error::{Error, Result};
use crate::multiindex::{enumerate_indices, MultiIndex};
use crate::polynomial::PolyField;
use crate::scalar::Real;
use crate::surface::{SurfaceKind, SurfaceMesh};

/// Analytic evaluator for a Whitney field: (surface point, j) -> f^(j).
pub type Jet<T> = Arc<dyn Fn(&Vector<T>, &MultiIndex) -> Multivector<T> + Send + Sync>;

#[derive(Clone)]
pub struct LipschitzData<T> {
    k: usize,
    alpha: T,
    mesh: Arc<SurfaceMesh<T>>,
    indices: Vec<MultiIndex>,
    /// values[pos][node] = f^(indices[pos]) at that node.
    values: Vec<Vec<Multivector<T>>>,
    jet: Option<Jet<T>>,
}

impl<T: Real> std::fmt::Debug for LipschitzData<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LipschitzData")
            .field("k", &self.k)
            .field("alpha", &self.alpha)
            .field("nodes", &self.mesh.len())
            .field("indices", &self.indices.len())
            .field("has_jet", &self.jet.is_some())
            .finish()
    }
}

impl<T: Real> LipschitzData<T> {
    pub fn zero(mesh: Arc<SurfaceMesh<T>>, k: usize, alpha: T) -> Self {
        let m = mesh.dim();
        let indices = enumerate_indices(m, k);
        let values = indices
            .iter()
            .map(|_| vec![Multivector::zero(m); mesh.len()])
            .collect();
        Self { k, alpha, mesh, indices, values, jet: None }
    }

    /// Build from explicit node values (one block per index in
    /// [`enumerate_indices`] order) and an optional analytic jet.
    pub fn from_parts(
        mesh: Arc<SurfaceMesh<T>>,
        k: usize,
        alpha: T,
        values: Vec<Vec<Multivector<T>>>,
        jet: Option<Jet<T>>,
    ) -> Result<Self> {
        let indices = enumerate_indices(mesh.dim(), k);
        if values.len() != indices.len() {
            return Err(Error::LengthMismatch(values.len(), indices.len()));
        }
        for block in &values {
            if block.len() != mesh.len() {
                return Err(Error::LengthMismatch(block.len(), mesh.len()));
            }
        }
        Ok(Self { k, alpha, mesh, indices, values, jet })
    }

    /// Sample an analytic jet on the mesh nodes.
    pub fn from_jet(mesh: Arc<SurfaceMesh<T>>, k: usize, alpha: T, jet: Jet<T>) -> Self {
        let indices = enumerate_indices(mesh.dim(), k);
        let values = indices
            .iter()
            .map(|j| mesh.nodes().iter().map(|x| jet(x, j)).collect())
            .collect();
        Self { k, alpha, mesh, indices, values, jet: Some(jet) }
    }

    /// Data of a polynomial field: f^(j) = d^j P restricted to the mesh,
    /// with the exact polynomial jet attached.
    pub fn from_poly(mesh: Arc<SurfaceMesh<T>>, k: usize, alpha: T, p: &PolyField<T>) -> Self {
        let m = mesh.dim();
        assert_eq!(p.dim(), m);
        let derivs: HashMap<MultiIndex, PolyField<T>> = enumerate_indices(m, k)
            .into_iter()
            .map(|j| (j.clone(), p.deriv(&j)))
            .collect();
        let jet: Jet<T> = Arc::new(move |x, j| {
            derivs
                .get(j)
                .map(|d| d.eval(x))
                .unwrap_or_else(|| Multivector::zero(x.dim()))
        });
        Self::from_jet(mesh, k, alpha, jet)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn mesh(&self) -> &Arc<SurfaceMesh<T>> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    /// The index collection in canonical order.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, j: &MultiIndex) -> Result<usize> {
        self.indices
            .iter()
            .position(|i| i == j)
            .ok_or_else(|| Error::IndexOutOfRange(j.to_string(), self.k))
    }

    /// f^(j) at a node, by index position.
    pub fn value(&self, pos: usize, node: usize) -> &Multivector<T> {
        &self.values[pos][node]
    }

    /// f^(j) at a node, by multi-index.
    pub fn value_at(&self, j: &MultiIndex, node: usize) -> Result<&Multivector<T>> {
        Ok(&self.values[self.position(j)?][node])
    }

    pub fn values_for(&self, pos: usize) -> &[Multivector<T>] {
        &self.values[pos]
    }

    pub fn has_jet(&self) -> bool {
        self.jet.is_some()
    }

    /// Evaluate f^(j) at an arbitrary surface point through the jet.
    pub fn jet_eval(&self, x: &Vector<T>, j: &MultiIndex) -> Option<Multivector<T>> {
        self.jet.as_ref().map(|jet| jet(x, j))
    }

    /// Largest node-value norm across all components.
    pub fn max_norm(&self) -> T {
        self.values
            .iter()
            .flat_map(|block| block.iter())
            .map(|v| v.norm())
            .fold(T::zero(), T::max)
    }

    /// a*self + b*other, preserving the jet when both operands carry one.
    pub fn linear_comb(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.k != other.k || self.mesh.len() != other.mesh.len() {
            return Err(Error::ValidationFailed(
                "incompatible data collections in linear combination".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(ba, bb)| {
                ba.iter()
                    .zip(bb)
                    .map(|(va, vb)| &va.scale(a) + &vb.scale(b))
                    .collect()
            })
            .collect();
        let jet = match (&self.jet, &other.jet) {
            (Some(ja), Some(jb)) => {
                let (ja, jb) = (ja.clone(), jb.clone());
                Some(Arc::new(move |x: &Vector<T>, j: &MultiIndex| {
                    &ja(x, j).scale(a) + &jb(x, j).scale(b)
                }) as Jet<T>)
            }
            _ => None,
        };
        Ok(Self {
            k: self.k,
            alpha: self.alpha,
            mesh: self.mesh.clone(),
            indices: self.indices.clone(),
            values,
            jet,
        })
    }

    /// Taylor remainder of Eq-style form:
    /// R_j(x, y) = f^(j)(x) - sum_{|j+l| <= k} f^(j+l)(y) (x-y)^l / l!.
    pub fn remainder(&self, j: &MultiIndex, x_node: usize, y_node: usize) -> Result<Multivector<T>> {
        let jpos = self.position(j)?;
        let x = &self.mesh.nodes()[x_node];
        let y = &self.mesh.nodes()[y_node];
        let diff = x.sub(y);
        let mut acc = self.values[jpos][x_node].clone();
        for (pos, idx) in self.indices.iter().enumerate() {
            if let Some(l) = idx.checked_sub(j) {
                if &j.add(&l) == idx {
                    let coeff = l.monomial(&diff) / T::from_u64(l.factorial()).unwrap();
                    acc -= &self.values[pos][y_node].scale(coeff);
                }
            }
        }
        Ok(acc)
    }

    /// Estimate the Lipschitz constant M of Eq.-(2) type bounds:
    /// M = max over j and node pairs of max(||f^(j)||, ||R_j(x,y)|| / |x-y|^{k+alpha-|j|}).
    ///
    /// Exhaustive over node pairs on small meshes; on large meshes the pair
    /// set is subsampled deterministically by striding, which keeps the
    /// estimate reproducible.
    pub fn validate(&self) -> ValidationReport<T> {
        let n = self.mesh.len();
        // cap the x-side sample so cost stays ~256 * n
        let stride = n.div_ceil(256).max(1);
        let xs: Vec<usize> = (0..n).step_by(stride).collect();
        let mut m_est = T::zero();
        for block in &self.values {
            for v in block {
                m_est = m_est.max(v.norm());
            }
        }
        let mut finite = true;
        for (jpos, j) in self.indices.iter().enumerate() {
            let exponent = T::from_usize(self.k - j.order()).unwrap() + self.alpha;
            for &xi in &xs {
                for yi in 0..n {
                    if xi == yi {
                        continue;
                    }
                    let d = self.mesh.nodes()[xi].distance(&self.mesh.nodes()[yi]);
                    let r = self
                        .remainder(j, xi, yi)
                        .expect("index from own collection");
                    let _ = jpos;
                    let ratio = r.norm() / d.powf(exponent);
                    if !ratio.is_finite() {
                        finite = false;
                    }
                    m_est = m_est.max(ratio);
                }
            }
        }
        ValidationReport { m_est, ok: finite && m_est.is_finite() }
    }

    /// The shifted collection {f^(j+l) : |l| <= k - |j|}, which is itself
    /// Lipschitz data of order k - |j| (same alpha).
    pub fn sub_collection(&self, j: &MultiIndex) -> Result<Self> {
        if j.order() > self.k {
            return Err(Error::IndexOutOfRange(j.to_string(), self.k));
        }
        let sub_k = self.k - j.order();
        let sub_indices = enumerate_indices(self.dim(), sub_k);
        let mut values = Vec::with_capacity(sub_indices.len());
        for l in &sub_indices {
            let pos = self.position(&j.add(l))?;
            values.push(self.values[pos].clone());
        }
        let jet = self.jet.as_ref().map(|jet| {
            let jet = jet.clone();
            let j = j.clone();
            Arc::new(move |x: &Vector<T>, l: &MultiIndex| jet(x, &j.add(l))) as Jet<T>
        });
        Ok(Self {
            k: sub_k,
            alpha: self.alpha,
            mesh: self.mesh.clone(),
            indices: sub_indices,
            values,
            jet,
        })
    }

    /// Export as text: one node per line, one 2^m-column block per index in
    /// canonical order.
    pub fn export(&self, mut out: impl Write) -> Result<()> {
        let width = 1 << self.dim();
        for node in 0..self.mesh.len() {
            let mut fields = Vec::with_capacity(self.indices.len() * width);
            for block in &self.values {
                for c in block[node].coeffs() {
                    fields.push(format!("{c:.17e}"));
                }
            }
            writeln!(out, "{}", fields.join(" "))?;
        }
        Ok(())
    }

    /// Import data written by [`export`](Self::export) for a known mesh/k/alpha.
    pub fn import(
        mesh: Arc<SurfaceMesh<T>>,
        k: usize,
        alpha: T,
        input: impl BufRead,
    ) -> Result<Self> {
        let m = mesh.dim();
        let width = 1 << m;
        let indices = enumerate_indices(m, k);
        let mut values: Vec<Vec<Multivector<T>>> =
            indices.iter().map(|_| Vec::with_capacity(mesh.len())).collect();
        let mut rows = 0usize;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<T> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map(T::lit)
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if vals.len() != indices.len() * width {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, got {}",
                    lineno + 1,
                    indices.len() * width,
                    vals.len()
                )));
            }
            for (pos, block) in values.iter_mut().enumerate() {
                let mut mv = Multivector::zero(m);
                for b in 0..width {
                    *mv.coeff_mut(b) = vals[pos * width + b];
                }
                block.push(mv);
            }
            rows += 1;
        }
        if rows != mesh.len() {
            return Err(Error::LengthMismatch(rows, mesh.len()));
        }
        Self::from_parts(mesh, k, alpha, values, None)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationReport<T> {
    pub m_est: T,
    pub ok: bool,
}

/// One Whitney cube: dyadic cube in the off-surface shell together with its
/// assigned nearest surface point and the Taylor coefficients of the data
/// there.
#[derive(Debug, Clone)]
struct Cube<T> {
    center: Vector<T>,
    side: T,
    /// f^(l)(p)/l! per canonical index, for the local Taylor polynomial.
    taylor: Vec<Multivector<T>>,
    nearest: Vector<T>,
}

/// Whitney extension of Lipschitz data to a shell around the surface.
///
/// Cubes are generated dyadically from root side `shell_width` down to
/// `max_depth`, keeping exactly those with diam <= dist(cube, surface)
/// <= 4 diam (exact cube-to-sphere distances). The partition of unity uses
/// the standard exp(-1/(1-t^2)) bump on 1.5x-expanded cubes, normalized over
/// overlaps; values are the node data at mesh nodes (returned directly) and
/// the weighted Taylor sum elsewhere, with a smooth radial cutoff at the
/// outer edge of the shell.
pub struct WhitneyExtension<T> {
    data: LipschitzData<T>,
    radius: T,
    shell_width: T,
    max_depth: usize,
    cubes: Vec<Cube<T>>,
    /// (depth, quantized cell coords) -> cube ids.
    cells: HashMap<(usize, [i64; 3]), Vec<usize>>,
    /// mesh node bit patterns -> node id, for bit-exact restriction.
    node_lookup: HashMap<Vec<u64>, usize>,
}

/// Support radius of a cube's bump, as a multiple of its half-side.
const BUMP_EXPANSION: f64 = 1.5;

fn bump<T: Real>(t: T) -> T {
    if t >= T::one() {
        T::zero()
    } else {
        (-T::one() / (T::one() - t * t)).exp()
    }
}

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
fn smooth_step<T: Real>(t: T) -> T {
    let ramp = |s: T| {
        if s <= T::zero() {
            T::zero()
        } else {
            (-T::one() / s).exp()
        }
    };
    let a = ramp(t);
    let b = ramp(T::one() - t);
    a / (a + b)
}

impl<T: Real> WhitneyExtension<T> {
    /// Build with default geometry: shell width half the surface radius,
    /// four dyadic refinement levels.
    pub fn build(data: &LipschitzData<T>) -> Result<Self> {
        let shell = data.mesh().radius() * T::lit(0.5);
        Self::build_with(data, shell, 4)
    }

    pub fn build_with(data: &LipschitzData<T>, shell_width: T, max_depth: usize) -> Result<Self> {
        let report = data.validate();
        if !report.ok {
            return Err(Error::ValidationFailed(format!(
                "non-finite Lipschitz constant estimate {:e}",
                report.m_est
            )));
        }
        let mesh = data.mesh().clone();
        let m = mesh.dim();
        let radius = mesh.radius();
        let root_side = shell_width;
        let outer = radius + shell_width;

        let mut cubes = Vec::new();
        let mut cells: HashMap<(usize, [i64; 3]), Vec<usize>> = HashMap::new();

        // breadth-first dyadic refinement from the root grid
        let mut frontier: Vec<(usize, Vector<T>, T)> = Vec::new();
        let span = (outer / root_side).ceil().to_i64().unwrap_or(0) + 1;
        let mut root_cells = vec![Vec::new()];
        for _ in 0..m {
            root_cells = root_cells
                .into_iter()
                .flat_map(|cell: Vec<i64>| {
                    (-span..=span).map(move |i| {
                        let mut c = cell.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        for cell in root_cells {
            let center = Vector::new(
                cell.iter()
                    .map(|&i| (T::from_i64(i).unwrap() + T::lit(0.5)) * root_side)
                    .collect::<Vec<T>>(),
            );
            frontier.push((0, center, root_side));
        }

        let sqrt_m = T::from_usize(m).unwrap().sqrt();
        while let Some((depth, center, side)) = frontier.pop() {
            let diam = side * sqrt_m;
            let dist = Self::cube_surface_distance(&mesh, &center, side);
            if dist > T::lit(4.0) * diam || dist > shell_width + diam {
                continue;
            }
            if dist >= diam {
                // accepted Whitney cube
                let nearest = Self::nearest_surface_point(&mesh, &center);
                let taylor = data
                    .indices()
                    .iter()
                    .map(|l| {
                        let v = match data.jet_eval(&nearest, l) {
                            Some(v) => v,
                            None => {
                                let ni = Self::nearest_node(&mesh, &center);
                                data.value(data.position(l).unwrap(), ni).clone()
                            }
                        };
                        v.scale(T::one() / T::from_u64(l.factorial()).unwrap())
                    })
                    .collect();
                let id = cubes.len();
                cubes.push(Cube { center: center.clone(), side, taylor, nearest });
                cells
                    .entry((depth, Self::cell_of(&center, side)))
                    .or_default()
                    .push(id);
                continue;
            }
            if depth < max_depth {
                let half = side * T::lit(0.5);
                let quarter = side * T::lit(0.25);
                let mut offsets = vec![Vec::new()];
                for _ in 0..m {
                    offsets = offsets
                        .into_iter()
                        .flat_map(|o: Vec<T>| {
                            [-quarter, quarter].into_iter().map(move |d| {
                                let mut v = o.clone();
                                v.push(d);
                                v
                            })
                        })
                        .collect();
                }
                for off in offsets {
                    let child = center.add(&Vector::new(off));
                    frontier.push((depth + 1, child, half));
                }
            }
        }

        let node_lookup = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, p)| (Self::bits(p), i))
            .collect();

        Ok(Self {
            data: data.clone(),
            radius,
            shell_width,
            max_depth,
            cubes,
            cells,
            node_lookup,
        })
    }

    fn bits(p: &Vector<T>) -> Vec<u64> {
        p.comps()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN).to_bits())
            .collect()
    }

    fn cell_of(center: &Vector<T>, side: T) -> [i64; 3] {
        let mut cell = [0i64; 3];
        for (i, c) in center.comps().iter().enumerate() {
            cell[i] = (*c / side).floor().to_i64().unwrap_or(0);
        }
        cell
    }

    /// Exact Euclidean distance from an axis-aligned cube to the sphere, via
    /// the nearest/farthest cube points from the origin. Falls back to the
    /// center-to-nearest-node distance for imported meshes.
    fn cube_surface_distance(mesh: &SurfaceMesh<T>, center: &Vector<T>, side: T) -> T {
        let r = mesh.radius();
        match mesh.kind() {
            SurfaceKind::Circle | SurfaceKind::Sphere => {
                let half = side * T::lit(0.5);
                let mut near_sq = T::zero();
                let mut far_sq = T::zero();
                for &c in center.comps() {
                    let lo = c - half;
                    let hi = c + half;
                    let near = if lo > T::zero() {
                        lo
                    } else if hi < T::zero() {
                        -hi
                    } else {
                        T::zero()
                    };
                    let far = lo.abs().max(hi.abs());
                    near_sq = near_sq + near * near;
                    far_sq = far_sq + far * far;
                }
                let dmin = near_sq.sqrt();
                let dmax = far_sq.sqrt();
                if dmin >= r {
                    dmin - r
                } else if dmax <= r {
                    r - dmax
                } else {
                    T::zero()
                }
            }
            SurfaceKind::Custom => {
                let dc = mesh
                    .nodes()
                    .iter()
                    .map(|p| p.distance(center))
                    .fold(T::infinity(), T::min);
                (dc - side * T::lit(0.5) * T::from_usize(mesh.dim()).unwrap().sqrt())
                    .max(T::zero())
            }
        }
    }

    fn nearest_surface_point(mesh: &SurfaceMesh<T>, x: &Vector<T>) -> Vector<T> {
        match mesh.kind() {
            SurfaceKind::Circle | SurfaceKind::Sphere => {
                // exact radial projection
                x.scale(mesh.radius() / x.norm())
            }
            SurfaceKind::Custom => mesh.nodes()[Self::nearest_node(mesh, x)].clone(),
        }
    }

    fn nearest_node(mesh: &SurfaceMesh<T>, x: &Vector<T>) -> usize {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, p) in mesh.nodes().iter().enumerate() {
            let d = p.distance(x);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn data(&self) -> &LipschitzData<T> {
        &self.data
    }

    pub fn cube_count(&self) -> usize {
        self.cubes.len()
    }

    /// Check the Whitney sandwich diam <= dist <= 4 diam for every cube.
    pub fn cubes_satisfy_sandwich(&self) -> bool {
        let sqrt_m = T::from_usize(self.data.dim()).unwrap().sqrt();
        self.cubes.iter().all(|c| {
            let diam = c.side * sqrt_m;
            let dist = Self::cube_surface_distance(self.data.mesh(), &c.center, c.side);
            dist >= diam && dist <= T::lit(4.0) * diam
        })
    }

    /// Raw partition-of-unity sum before normalization; positive exactly on
    /// the covered shell.
    pub fn coverage(&self, x: &Vector<T>) -> T {
        let mut den = T::zero();
        self.for_nearby_cubes(x, |cube| {
            den = den + self.bump_value(cube, x);
        });
        den
    }

    fn bump_value(&self, cube: &Cube<T>, x: &Vector<T>) -> T {
        let scale = cube.side * T::lit(0.5) * T::lit(BUMP_EXPANSION);
        let mut phi = T::one();
        for (xi, ci) in x.comps().iter().zip(cube.center.comps()) {
            phi = phi * bump((*xi - *ci).abs() / scale);
            if phi == T::zero() {
                return T::zero();
            }
        }
        phi
    }

    fn for_nearby_cubes(&self, x: &Vector<T>, mut visit: impl FnMut(&Cube<T>)) {
        let m = self.data.dim();
        for depth in 0..=self.max_depth {
            let side = self.shell_width / T::from_usize(1 << depth).unwrap();
            let base = Self::cell_of(x, side);
            // expanded supports reach less than one full cell away
            let mut deltas = vec![Vec::new()];
            for _ in 0..m {
                deltas = deltas
                    .into_iter()
                    .flat_map(|d: Vec<i64>| {
                        [-1i64, 0, 1].into_iter().map(move |q| {
                            let mut v = d.clone();
                            v.push(q);
                            v
                        })
                    })
                    .collect();
            }
            for delta in deltas {
                let mut cell = [0i64; 3];
                for i in 0..m {
                    cell[i] = base[i] + delta[i];
                }
                if let Some(ids) = self.cells.get(&(depth, cell)) {
                    for &id in ids {
                        visit(&self.cubes[id]);
                    }
                }
            }
        }
    }

    /// Evaluate the extension. Mesh nodes return the stored f^(0) directly
    /// (bit-exact restriction); other points get the normalized Taylor-field
    /// sum over nearby cubes, smoothly cut off at the outer shell edge, and
    /// zero where no cube reaches.
    pub fn eval(&self, x: &Vector<T>) -> Multivector<T> {
        if let Some(&node) = self.node_lookup.get(&Self::bits(x)) {
            let pos = self
                .data
                .position(&MultiIndex::zeros(self.data.dim()))
                .expect("zero index always present");
            return self.data.value(pos, node).clone();
        }
        let m = self.data.dim();
        let mut num = Multivector::zero(m);
        let mut den = T::zero();
        self.for_nearby_cubes(x, |cube| {
            let phi = self.bump_value(cube, x);
            if phi == T::zero() {
                return;
            }
            let diff = x.sub(&cube.nearest);
            let mut taylor = Multivector::zero(m);
            for (l, coeff) in self.data.indices().iter().zip(&cube.taylor) {
                taylor += &coeff.scale(l.monomial(&diff));
            }
            num += &taylor.scale(phi);
            den = den + phi;
        });
        if den == T::zero() {
            return Multivector::zero(m);
        }
        let dist = (x.norm() - self.radius).abs();
        // smooth outer cutoff: plateau of 1 until 60% of the shell, 0 at the edge
        let t = (self.shell_width - dist) / (self.shell_width * T::lit(0.4));
        let chi = smooth_step(t.min(T::one()));
        num.scale(chi / den)
    }

    /// Nested central finite difference d^j of the extension, step h per
    /// applied derivative.
    pub fn eval_deriv_fd(&self, j: &MultiIndex, x: &Vector<T>, h: T) -> Multivector<T> {
        fn go<T: Real>(
            ext: &WhitneyExtension<T>,
            j: &MultiIndex,
            x: &Vector<T>,
            h: T,
        ) -> Multivector<T> {
            for i in 0..j.dim() {
                if let Some(lower) = j.decremented(i) {
                    let mut xp = x.comps().to_vec();
                    let mut xm = x.comps().to_vec();
                    xp[i] = xp[i] + h;
                    xm[i] = xm[i] - h;
                    let fp = go(ext, &lower, &Vector::new(xp), h);
                    let fm = go(ext, &lower, &Vector::new(xm), h);
                    return (&fp - &fm).scale(T::lit(0.5) / h);
                }
            }
            ext.eval(x)
        }
        go(self, j, x, h)
    }

    /// Log-log fit of ||d^j f~|| against dist(x, surface) over probe points;
    /// passes when the fitted exponent is >= alpha - 1 - 0.2 (Whitney's
    /// derivative growth bound for |j| = k+1).
    pub fn derivative_bound_check(&self, j: &MultiIndex, probes: &[Vector<T>]) -> BoundReport<T> {
        let mut logs: Vec<(T, T)> = Vec::new();
        for x in probes {
            let dist = (x.norm() - self.radius).abs();
            let h = dist / T::lit(10.0);
            let norm = self.eval_deriv_fd(j, x, h).norm();
            if norm > T::lit(1e-300) {
                logs.push((dist.ln(), norm.ln()));
            }
        }
        if logs.len() < 2 {
            // derivative numerically zero everywhere: bounded, trivially passes
            return BoundReport {
                exponent: T::zero(),
                samples: logs.len(),
                pass: true,
            };
        }
        let n = T::from_usize(logs.len()).unwrap();
        let sx = logs.iter().map(|(a, _)| *a).fold(T::zero(), |p, q| p + q);
        let sy = logs.iter().map(|(_, b)| *b).fold(T::zero(), |p, q| p + q);
        let sxx = logs.iter().map(|(a, _)| *a * *a).fold(T::zero(), |p, q| p + q);
        let sxy = logs.iter().map(|(a, b)| *a * *b).fold(T::zero(), |p, q| p + q);
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let threshold = self.data.alpha() - T::one() - T::lit(0.2);
        BoundReport {
            exponent: slope,
            samples: logs.len(),
            pass: slope >= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundReport<T> {
    pub exponent: T,
    pub samples: usize,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::PolyField;
    use smallvec::SmallVec;

    fn mi(e: &[u8]) -> MultiIndex {
        MultiIndex::new(SmallVec::from_slice(e))
    }

    fn sphere(level: usize) -> Arc<SurfaceMesh<f64>> {
        Arc::new(SurfaceMesh::sphere(3, 1.0, level).unwrap())
    }

    fn x1_poly(m: usize) -> PolyField<f64> {
        let mut j = vec![0u8; m];
        j[0] = 1;
        PolyField::monomial(m, MultiIndex::new(SmallVec::from_slice(&j)))
    }

    #[test]
    fn remainder_at_center_is_zero() {
        let mesh = sphere(2);
        let p = x1_poly(3).mul(&x1_poly(3)); // x1^2
        let data = LipschitzData::from_poly(mesh, 2, 0.5, &p);
        for j in data.indices().to_vec() {
            let r = data.remainder(&j, 7, 7).unwrap();
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn remainder_vanishes_for_polynomial_data() {
        let mesh = sphere(2);
        let p = x1_poly(3).mul(&x1_poly(3));
        let data = LipschitzData::from_poly(mesh.clone(), 2, 0.5, &p);
        for j in data.indices().to_vec() {
            for (x, y) in [(0usize, 5usize), (3, 11), (8, 2)] {
                let r = data.remainder(&j, x, y).unwrap();
                assert!(r.norm() < 1e-12, "j={j} pair ({x},{y}): {:e}", r.norm());
            }
        }
    }

    #[test]
    fn validate_polynomial_data() {
        let mesh = sphere(2);
        let data = LipschitzData::from_poly(mesh, 1, 0.5, &x1_poly(3));
        let rep = data.validate();
        assert!(rep.ok);
        // remainders vanish, so M is the max node value norm (|x1| <= 1,
        // f^(e1) = 1)
        assert!((rep.m_est - 1.0).abs() < 1e-10, "M = {}", rep.m_est);
    }

    #[test]
    fn validate_zero_data() {
        let mesh = sphere(2);
        let data = LipschitzData::<f64>::zero(mesh, 1, 0.5);
        let rep = data.validate();
        assert!(rep.ok);
        assert_eq!(rep.m_est, 0.0);
    }

    #[test]
    fn validate_flags_corrupted_component() {
        let mesh = sphere(2);
        let clean = LipschitzData::from_poly(mesh.clone(), 1, 0.5, &x1_poly(3));
        let m_clean = clean.validate().m_est;
        let mut values: Vec<Vec<Multivector<f64>>> = clean
            .indices()
            .iter()
            .enumerate()
            .map(|(pos, _)| clean.values_for(pos).to_vec())
            .collect();
        // corrupt f^(e1) at one node by 1.0
        let e1 = mi(&[1, 0, 0]);
        let pos = clean.position(&e1).unwrap();
        *values[pos][0].coeff_mut(0) += 10.0;
        let dirty = LipschitzData::from_parts(mesh, 1, 0.5, values, None).unwrap();
        let m_dirty = dirty.validate().m_est;
        assert!(m_dirty > 5.0 * m_clean, "clean {m_clean} dirty {m_dirty}");
    }

    #[test]
    fn sub_collection_validates() {
        let mesh = sphere(2);
        let p = x1_poly(3).mul(&x1_poly(3));
        let data = LipschitzData::from_poly(mesh, 2, 0.5, &p);
        for j in data.indices().to_vec() {
            let sub = data.sub_collection(&j).unwrap();
            assert_eq!(sub.k(), 2 - j.order());
            let rep = sub.validate();
            assert!(rep.ok, "sub-collection at {j} invalid");
        }
    }

    #[test]
    fn export_import_roundtrip() {
        let mesh = sphere(1);
        let data = LipschitzData::from_poly(mesh.clone(), 1, 0.5, &x1_poly(3));
        let mut buf = Vec::new();
        data.export(&mut buf).unwrap();
        let back = LipschitzData::import(mesh, 1, 0.5, buf.as_slice()).unwrap();
        for pos in 0..data.indices().len() {
            for node in 0..data.mesh().len() {
                let d = (data.value(pos, node) - back.value(pos, node)).norm();
                assert!(d < 1e-15);
            }
        }
    }

    #[test]
    fn extension_restriction_bit_exact() {
        let mesh = sphere(2);
        let data = LipschitzData::from_poly(mesh.clone(), 1, 0.5, &x1_poly(3));
        let ext = WhitneyExtension::build(&data).unwrap();
        let pos = data.position(&mi(&[0, 0, 0])).unwrap();
        for node in 0..mesh.len() {
            let v = ext.eval(mesh.node(node));
            assert_eq!(v.coeffs(), data.value(pos, node).coeffs(), "node {node}");
        }
    }

    #[test]
    fn cubes_sandwich_and_partition_of_unity() {
        let mesh = sphere(2);
        let data = LipschitzData::from_poly(mesh, 1, 0.5, &x1_poly(3));
        let ext = WhitneyExtension::build(&data).unwrap();
        assert!(ext.cube_count() > 0);
        assert!(ext.cubes_satisfy_sandwich());
        // covered shell points have positive raw coverage; the normalized
        // sum is then exactly 1 by construction
        let mut rng = crate::rng::SplitMix64::new(11);
        let mut covered = 0;
        for _ in 0..500 {
            let dir = loop {
                let v = Vector::new(vec![
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                ]);
                if v.norm() > 0.1 {
                    break v.scale(1.0 / v.norm());
                }
            };
            let r = 1.0 + rng.range(0.12, 0.3) * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
            let x = dir.scale(r);
            if ext.coverage(&x) > 0.0 {
                covered += 1;
            }
        }
        assert!(covered >= 495, "covered {covered}/500");
    }

    #[test]
    fn extension_reproduces_linear_data_on_shell() {
        let mesh = sphere(2);
        let data = LipschitzData::from_poly(mesh, 1, 0.5, &x1_poly(3));
        let ext = WhitneyExtension::build(&data).unwrap();
        let mut rng = crate::rng::SplitMix64::new(3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let v = Vector::new(vec![
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ]);
            if v.norm() < 0.1 {
                continue;
            }
            let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
            let x = v.scale((1.0 + sign * rng.range(0.12, 0.28)) / v.norm());
            let got = ext.eval(&x);
            if ext.coverage(&x) == 0.0 {
                continue;
            }
            worst = worst.max((got.scalar_part() - x[0]).abs());
            worst = worst.max((&got - &Multivector::scalar(3, got.scalar_part())).norm());
        }
        assert!(worst < 1e-6, "linear reproduction error {worst:e}");
    }

    #[test]
    fn extension_vanishes_far_away() {
        let mesh = sphere(1);
        let data = LipschitzData::from_poly(mesh, 1, 0.5, &x1_poly(3));
        let ext = WhitneyExtension::build(&data).unwrap();
        let x = Vector::new(vec![3.0, 0.5, -1.0]);
        assert!(ext.eval(&x).is_zero());
    }

    #[test]
    fn derivative_bound_polynomial_data() {
        // smooth data: the (k+1)-derivative stays bounded, exponent fit >= 0
        let mesh = Arc::new(SurfaceMesh::<f64>::sphere(2, 1.0, 4).unwrap());
        let data = LipschitzData::from_poly(mesh, 1, 0.5, &x1_poly(2));
        let ext = WhitneyExtension::build_with(&data, 0.5, 6).unwrap();
        let probes: Vec<Vector<f64>> = (0..12)
            .map(|i| {
                let d = 0.04 * 1.25f64.powi(i);
                Vector::new(vec![(1.0 + d) * 0.6, (1.0 + d) * 0.8])
            })
            .collect();
        let rep = ext.derivative_bound_check(&mi(&[2, 0]), &probes);
        assert!(rep.pass, "exponent {}", rep.exponent);
    }

    #[test]
    fn zero_data_extension_is_zero() {
        let mesh = sphere(1);
        let data = LipschitzData::<f64>::zero(mesh, 1, 0.5);
        let ext = WhitneyExtension::build(&data).unwrap();
        let x = Vector::new(vec![0.0, 0.0, 1.2]);
        assert!(ext.eval(&x).is_zero());
        assert!(ext.eval_deriv_fd(&mi(&[1, 0, 0]), &x, 1e-3).is_zero());
    }

    #[test]
    fn linear_comb_and_jets() {
        let mesh = sphere(1);
        let a = LipschitzData::from_poly(mesh.clone(), 1, 0.5, &x1_poly(3));
        let b = LipschitzData::<f64>::zero(mesh, 1, 0.5);
        let c = a.linear_comb(2.0, &a, 3.0).unwrap();
        assert!(c.has_jet());
        let pos = 0;
        for node in 0..c.mesh().len() {
            let want = a.value(pos, node).scale(5.0);
            assert!((c.value(pos, node) - &want).norm() < 1e-14);
        }
        // zero data has no jet: the combination drops it
        assert!(!a.linear_comb(1.0, &b, 1.0).unwrap().has_jet());
    }
}
