//! Discretized closed surfaces (circles and spheres) with outward normals,
//! quadrature weights, principal-value integration and off-surface probes.

use std::io::{BufRead, Write};

use crate::clifford::{Multivector, Vector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize(n).unwrap();
    for i in 0..n {
        // Tricomi-style initial guess
        let theta = T::PI() * (T::from_usize(i).unwrap() + T::lit(0.75))
            / (nf + T::lit(0.5));
        let mut x = theta.cos();
        for _ in 0..100 {
            // p = P_n(x), dp = P_n'(x)
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::from_usize(k).unwrap();
                let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1
                    - (kf - T::one()) * p0)
                    / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = nf * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() < T::lit(1e-16) {
                break;
            }
        }
        // recompute P_{n-1} at the converged node for the weight formula
        let mut p0 = T::one();
        let mut p1 = x;
        for k in 2..=n {
            let kf = T::from_usize(k).unwrap();
            let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = nf * (x * p1 - p0) / (x * x - T::one());
        nodes[i] = x;
        weights[i] = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
    }
    // ascending order
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Circle,
    Sphere,
    /// Imported from a file; geometry known only through the node table.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

/// Quadrature mesh of a closed surface in R^m.
#[derive(Debug, Clone)]
pub struct SurfaceMesh<T> {
    dim: usize,
    kind: SurfaceKind,
    radius: T,
    level: usize,
    nodes: Vec<Vector<T>>,
    normals: Vec<Vector<T>>,
    weights: Vec<T>,
    /// Characteristic node spacing h.
    spacing: T,
}

impl<T: Real> SurfaceMesh<T> {
    /// Circle (m=2) or sphere (m=3) of the given radius.
    ///
    /// m=3 uses Gauss-Legendre nodes in cos(colatitude) times a uniform
    /// longitude grid (2*level x 4*level nodes); m=2 uses 8*level uniform
    /// angles. Both integrate constants exactly.
    pub fn sphere(m: usize, radius: T, level: usize) -> Result<Self> {
        assert!(level >= 1);
        assert!(radius > T::zero());
        match m {
            2 => {
                let n = 8 * level;
                let dtheta = T::lit(2.0) * T::PI() / T::from_usize(n).unwrap();
                let mut nodes = Vec::with_capacity(n);
                let mut normals = Vec::with_capacity(n);
                let mut weights = Vec::with_capacity(n);
                for i in 0..n {
                    let theta = dtheta * T::from_usize(i).unwrap();
                    let dir = Vector::new(vec![theta.cos(), theta.sin()]);
                    nodes.push(dir.scale(radius));
                    normals.push(dir);
                    weights.push(radius * dtheta);
                }
                Ok(Self {
                    dim: 2,
                    kind: SurfaceKind::Circle,
                    radius,
                    level,
                    nodes,
                    normals,
                    weights,
                    spacing: radius * dtheta,
                })
            }
            3 => {
                let ntheta = 2 * level;
                let nphi = 4 * level;
                let (ct, wt) = gauss_legendre::<T>(ntheta);
                let dphi = T::lit(2.0) * T::PI() / T::from_usize(nphi).unwrap();
                let mut nodes = Vec::with_capacity(ntheta * nphi);
                let mut normals = Vec::with_capacity(ntheta * nphi);
                let mut weights = Vec::with_capacity(ntheta * nphi);
                for (c, w) in ct.iter().zip(&wt) {
                    let s = (T::one() - *c * *c).sqrt();
                    for ip in 0..nphi {
                        let phi = dphi * T::from_usize(ip).unwrap();
                        let dir = Vector::new(vec![s * phi.cos(), s * phi.sin(), *c]);
                        nodes.push(dir.scale(radius));
                        normals.push(dir);
                        weights.push(radius * radius * *w * dphi);
                    }
                }
                Ok(Self {
                    dim: 3,
                    kind: SurfaceKind::Sphere,
                    radius,
                    level,
                    nodes,
                    normals,
                    weights,
                    spacing: radius * T::PI() / T::from_usize(ntheta).unwrap(),
                })
            }
            m => Err(Error::UnsupportedDimension(m)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector<T>] {
        &self.nodes
    }

    pub fn normals(&self) -> &[Vector<T>] {
        &self.normals
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &Vector<T> {
        &self.nodes[i]
    }

    pub fn normal(&self, i: usize) -> &Vector<T> {
        &self.normals[i]
    }

    /// Characteristic node spacing h_mesh.
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn area(&self) -> T {
        self.weights.iter().copied().fold(T::zero(), |a, w| a + w)
    }

    /// Deterministic left-fold quadrature of node-indexed multivector values.
    pub fn integrate(&self, density: &[Multivector<T>]) -> Result<Multivector<T>> {
        if density.len() != self.len() {
            return Err(Error::LengthMismatch(density.len(), self.len()));
        }
        let mut acc = Multivector::zero(self.dim);
        for (d, w) in density.iter().zip(&self.weights) {
            acc += &d.scale(*w);
        }
        Ok(acc)
    }

    /// Principal-value quadrature: excludes all nodes within 2 h_mesh of node
    /// `z` and sums the rest. The density closure is never called on excluded
    /// nodes, so it may be singular there.
    pub fn pv_integrate(
        &self,
        z: usize,
        mut density: impl FnMut(usize) -> Multivector<T>,
    ) -> Multivector<T> {
        let eps = T::lit(2.0) * self.spacing;
        let zp = &self.nodes[z];
        let mut acc = Multivector::zero(self.dim);
        for i in 0..self.len() {
            if self.nodes[i].distance(zp) < eps {
                continue;
            }
            acc += &density(i).scale(self.weights[i]);
        }
        acc
    }

    /// Probe path approaching node `z` from the given side along the normal,
    /// offsets 4 h_mesh / 2^i, i = 0..count.
    pub fn probe_points(&self, z: usize, side: Side, count: usize) -> ProbePath<T> {
        let offsets = (0..count)
            .map(|i| T::lit(4.0) * self.spacing / T::from_usize(1 << i).unwrap())
            .collect();
        ProbePath {
            base: self.nodes[z].clone(),
            normal: self.normals[z].clone(),
            side,
            offsets,
        }
    }

    /// Target-adapted quadrature grid on the same circle/sphere with the
    /// singular point `z` at a pole (m=3) or between nodes (m=2). With the
    /// singularity-subtracted integrands used by the operators this gives
    /// spectral accuracy; see the module notes.
    ///
    /// For m=3 the colatitude gamma away from z is sampled by Gauss-Legendre
    /// on [0, pi] with the sin(gamma) area factor folded into the weights,
    /// and the grid is rotated so that z becomes the pole. For m=2 the grid
    /// is uniform in angle, offset half a step so z is never a node.
    pub fn polar_grid(&self, z: &Vector<T>) -> PolarGrid<T> {
        let r = self.radius;
        match self.dim {
            2 => {
                // 4x angular oversampling: the trapezoid error for a target
                // at distance d off the circle is ~exp(-n d / R), and
                // boundary-limit probes come as close as half a mesh
                // spacing, so the grid must be denser than the mesh
                let n = 32 * self.level;
                let dtheta = T::lit(2.0) * T::PI() / T::from_usize(n).unwrap();
                let theta0 = z[1].atan2(z[0]);
                let mut nodes = Vec::with_capacity(n);
                let mut normals = Vec::with_capacity(n);
                let mut weights = Vec::with_capacity(n);
                for i in 0..n {
                    let theta = theta0
                        + dtheta * (T::from_usize(i).unwrap() + T::lit(0.5));
                    let dir = Vector::new(vec![theta.cos(), theta.sin()]);
                    nodes.push(dir.scale(r));
                    normals.push(dir);
                    weights.push(r * dtheta);
                }
                PolarGrid { nodes, normals, weights }
            }
            3 => {
                let ngam = 2 * self.level;
                let nphi = 4 * self.level;
                let (t, wt) = gauss_legendre::<T>(ngam);
                let dphi = T::lit(2.0) * T::PI() / T::from_usize(nphi).unwrap();
                let half_pi = T::PI() * T::lit(0.5);
                let rot = rotation_to(&z.scale(T::one() / r));
                let mut nodes = Vec::with_capacity(ngam * nphi);
                let mut normals = Vec::with_capacity(ngam * nphi);
                let mut weights = Vec::with_capacity(ngam * nphi);
                for (ti, wi) in t.iter().zip(&wt) {
                    let gam = (*ti + T::one()) * half_pi;
                    let wg = *wi * half_pi * gam.sin();
                    let (sg, cg) = (gam.sin(), gam.cos());
                    for ip in 0..nphi {
                        let phi = dphi * T::from_usize(ip).unwrap();
                        let local = [sg * phi.cos(), sg * phi.sin(), cg];
                        let dir = apply_rotation(&rot, &local);
                        nodes.push(dir.scale(r));
                        normals.push(dir);
                        weights.push(r * r * wg * dphi);
                    }
                }
                PolarGrid { nodes, normals, weights }
            }
            m => panic!("polar_grid: unsupported dimension m={m}"),
        }
    }

    /// Export as plain text, one node per line: "x_1 .. x_m n_1 .. n_m w".
    pub fn export(&self, mut out: impl Write) -> Result<()> {
        for i in 0..self.len() {
            let mut fields: Vec<String> = Vec::with_capacity(2 * self.dim + 1);
            for c in self.nodes[i].comps() {
                fields.push(format!("{c:.17e}"));
            }
            for c in self.normals[i].comps() {
                fields.push(format!("{c:.17e}"));
            }
            fields.push(format!("{:.17e}", self.weights[i]));
            writeln!(out, "{}", fields.join(" "))?;
        }
        Ok(())
    }

    /// Import a mesh written by [`export`](Self::export). The dimension is
    /// inferred from the column count; kind is recorded as `Custom`.
    pub fn import(input: impl BufRead) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut normals = Vec::new();
        let mut weights = Vec::new();
        let mut dim = 0usize;
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
            let m = (vals.len().saturating_sub(1)) / 2;
            if vals.len() != 2 * m + 1 || !(2..=4).contains(&m) {
                return Err(Error::Parse(format!(
                    "line {}: expected 2m+1 columns for m in 2..=4, got {}",
                    lineno + 1,
                    vals.len()
                )));
            }
            if dim == 0 {
                dim = m;
            } else if dim != m {
                return Err(Error::Parse(format!(
                    "line {}: inconsistent column count",
                    lineno + 1
                )));
            }
            nodes.push(Vector::new(vals[0..m].to_vec()));
            normals.push(Vector::new(vals[m..2 * m].to_vec()));
            weights.push(vals[2 * m]);
        }
        if nodes.is_empty() {
            return Err(Error::Parse("empty mesh file".into()));
        }
        let radius = nodes[0].norm();
        let spacing = nodes
            .iter()
            .skip(1)
            .map(|p| p.distance(&nodes[0]))
            .fold(T::infinity(), T::min);
        // infer an equivalent refinement level from the node count so that
        // target-adapted polar grids stay usable on imported meshes
        let level = match dim {
            2 => (nodes.len() / 8).max(1),
            _ => (((nodes.len() as f64) / 8.0).sqrt().round() as usize).max(1),
        };
        Ok(Self {
            dim,
            kind: SurfaceKind::Custom,
            radius,
            level,
            nodes,
            normals,
            weights,
            spacing,
        })
    }
}

/// Target-adapted grid returned by [`SurfaceMesh::polar_grid`].
#[derive(Debug, Clone)]
pub struct PolarGrid<T> {
    pub nodes: Vec<Vector<T>>,
    pub normals: Vec<Vector<T>>,
    pub weights: Vec<T>,
}

/// Sequence of off-surface points approaching a boundary node.
#[derive(Debug, Clone)]
pub struct ProbePath<T> {
    pub base: Vector<T>,
    pub normal: Vector<T>,
    pub side: Side,
    pub offsets: Vec<T>,
}

impl<T: Real> ProbePath<T> {
    /// The probe points z -+ delta n (interior: inward).
    pub fn points(&self) -> Vec<Vector<T>> {
        let sign = match self.side {
            Side::Interior => -T::one(),
            Side::Exterior => T::one(),
        };
        self.offsets
            .iter()
            .map(|d| self.base.add(&self.normal.scale(sign * *d)))
            .collect()
    }
}

/// 3x3 rotation matrix taking e_3 to the unit vector u (Rodrigues form).
fn rotation_to<T: Real>(u: &Vector<T>) -> [[T; 3]; 3] {
    let (x, y, z) = (u[0], u[1], u[2]);
    let eye = |s: T| {
        [
            [s, T::zero(), T::zero()],
            [T::zero(), s, T::zero()],
            [T::zero(), T::zero(), s],
        ]
    };
    if z > T::one() - T::lit(1e-12) {
        return eye(T::one());
    }
    if z < -T::one() + T::lit(1e-12) {
        let mut m = eye(T::one());
        m[1][1] = -T::one();
        m[2][2] = -T::one();
        return m;
    }
    // v = e_3 x u = (-y, x, 0), cos = z
    let v = [-y, x, T::zero()];
    let vx = [
        [T::zero(), -v[2], v[1]],
        [v[2], T::zero(), -v[0]],
        [-v[1], v[0], T::zero()],
    ];
    let mut out = eye(T::one());
    let denom = T::one() + z;
    for r in 0..3 {
        for c in 0..3 {
            let mut vx2 = T::zero();
            for t in 0..3 {
                vx2 = vx2 + vx[r][t] * vx[t][c];
            }
            out[r][c] = out[r][c] + vx[r][c] + vx2 / denom;
        }
    }
    out
}

fn apply_rotation<T: Real>(m: &[[T; 3]; 3], x: &[T; 3]) -> Vector<T> {
    Vector::new(
        (0..3)
            .map(|r| m[r][0] * x[0] + m[r][1] * x[1] + m[r][2] * x[2])
            .collect::<Vec<T>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::BufReader;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn sphere_area_exact() {
        for level in [1, 4, 8, 16] {
            let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, level).unwrap();
            assert!((mesh.area() - 4.0 * PI).abs() < 1e-10, "level {level}");
        }
    }

    #[test]
    fn circle_circumference_exact() {
        let mesh = SurfaceMesh::<f64>::sphere(2, 2.0, 4).unwrap();
        assert!((mesh.area() - 4.0 * PI).abs() < 1e-12);
        assert_eq!(mesh.len(), 32);
    }

    #[test]
    fn normals_unit_and_radial() {
        let mesh = SurfaceMesh::<f64>::sphere(3, 2.5, 4).unwrap();
        for i in 0..mesh.len() {
            let n = mesh.normal(i);
            assert!((n.norm() - 1.0).abs() < 1e-12);
            let expect = mesh.node(i).scale(1.0 / 2.5);
            assert!(n.distance(&expect) < 1e-12);
        }
    }

    #[test]
    fn unsupported_dimension() {
        assert!(SurfaceMesh::<f64>::sphere(4, 1.0, 4).is_err());
    }

    #[test]
    fn integrate_constant() {
        let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, 8).unwrap();
        let ones = vec![Multivector::scalar(3, 1.0); mesh.len()];
        let total = mesh.integrate(&ones).unwrap();
        assert!((total.scalar_part() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn integrate_length_mismatch() {
        let mesh = SurfaceMesh::<f64>::sphere(2, 1.0, 2).unwrap();
        let short = vec![Multivector::scalar(2, 1.0); 3];
        assert!(matches!(
            mesh.integrate(&short),
            Err(Error::LengthMismatch(3, _))
        ));
    }

    #[test]
    fn pv_excludes_neighborhood_and_matches_smooth() {
        let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, 8).unwrap();
        // smooth density: pv must equal full integral minus the small cap
        let dens: Vec<_> = (0..mesh.len())
            .map(|i| Multivector::scalar(3, mesh.node(i)[2]))
            .collect();
        let full = mesh.integrate(&dens).unwrap();
        // equatorial node: the excluded cap carries density x3 ~ 0
        let z = mesh.len() / 2;
        assert!(mesh.node(z)[2].abs() < 0.1);
        let pv = mesh.pv_integrate(z, |i| dens[i].clone());
        // x3 integrates to 0 over the sphere; the excluded cap contributes
        // only its small local density
        assert!(full.norm() < 1e-10);
        assert!(pv.norm() < 0.05, "pv = {:e}", pv.norm());
    }

    #[test]
    fn pv_odd_symmetry_on_circle() {
        let mesh = SurfaceMesh::<f64>::sphere(2, 1.0, 8).unwrap();
        // density odd around node 0 (angle theta): sin(theta)/(1-cos theta)
        // is singular at theta=0 but odd, so the symmetric sum cancels
        let pv = mesh.pv_integrate(0, |i| {
            let theta = mesh.node(i)[1].atan2(mesh.node(i)[0]);
            Multivector::scalar(2, theta.sin() / (1.0 - theta.cos()))
        });
        assert!(pv.norm() < 1e-10, "odd pv = {:e}", pv.norm());
    }

    #[test]
    fn probe_points_sides() {
        let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, 4).unwrap();
        let inner = mesh.probe_points(5, Side::Interior, 4);
        let outer = mesh.probe_points(5, Side::Exterior, 4);
        for p in inner.points() {
            assert!(p.norm() < 1.0);
        }
        for p in outer.points() {
            assert!(p.norm() > 1.0);
        }
        for w in inner.offsets.windows(2) {
            assert!((w[1] - w[0] / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre::<f64>(8);
        // integrates x^14 exactly: 2/15
        let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((val - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polar_grid_area_and_pole() {
        let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, 8).unwrap();
        let z = Vector::new(vec![0.3, -0.5, (1.0f64 - 0.34).sqrt()]);
        let grid = mesh.polar_grid(&z);
        let area: f64 = grid.weights.iter().sum();
        assert!((area - 4.0 * PI).abs() < 1e-8, "area err {:e}", area - 4.0 * PI);
        for (n, p) in grid.normals.iter().zip(&grid.nodes) {
            assert!((n.norm() - 1.0).abs() < 1e-12);
            assert!(p.distance(&z) > 1e-6, "grid node collides with target");
        }
    }

    #[test]
    fn polar_grid_circle_offset() {
        let mesh = SurfaceMesh::<f64>::sphere(2, 1.5, 4).unwrap();
        let z = mesh.node(3).clone();
        let grid = mesh.polar_grid(&z);
        let area: f64 = grid.weights.iter().sum();
        assert!((area - 2.0 * PI * 1.5).abs() < 1e-12);
        // the half-step offset keeps z at least half a grid step from every
        // grid node
        let half_step = 0.5 * 1.5 * 2.0 * PI / grid.nodes.len() as f64;
        for p in &grid.nodes {
            assert!(p.distance(&z) > 0.8 * half_step);
        }
    }

    #[test]
    fn export_import_roundtrip() {
        let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, 2).unwrap();
        let mut buf = Vec::new();
        mesh.export(&mut buf).unwrap();
        let back = SurfaceMesh::<f64>::import(BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back.len(), mesh.len());
        assert_eq!(back.dim(), 3);
        for i in 0..mesh.len() {
            assert!(back.node(i).distance(mesh.node(i)) < 1e-15);
            assert!((back.weights()[i] - mesh.weights()[i]).abs() < 1e-15);
        }
        assert!((back.area() - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn import_rejects_garbage() {
        let bad = "1.0 2.0 nope 4.0 5.0";
        assert!(SurfaceMesh::<f64>::import(BufReader::new(bad.as_bytes())).is_err());
        let empty = "";
        assert!(SurfaceMesh::<f64>::import(BufReader::new(empty.as_bytes())).is_err());
    }
}
