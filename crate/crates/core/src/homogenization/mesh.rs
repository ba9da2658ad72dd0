use std::f64::consts::{FRAC_PI_4, TAU};
use std::io::Write;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::shape::{tetra_outward_normals, tetra_vertices, ParticleShape};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

/// One quadrature cell of a boundary mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Indices into [`SurfaceMesh::nodes`] of the facet's corners.
    pub vertices: Vec<usize>,
    /// Quadrature point on the boundary.
    pub center: Vector3<f64>,
    pub area: f64,
    /// Unit normal pointing into the particle.
    pub normal: Vector3<f64>,
}

/// Discretised particle boundary carrying a one-point-per-facet quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub nodes: Vec<Vector3<f64>>,
    pub facets: Vec<Facet>,
}

/// Construction used for sphere meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereMeshKind {
    /// Geodesic subdivision of the icosahedron (frequency = resolution).
    #[default]
    Icosphere,
    /// Equiangular gnomonic cube projected to the sphere (resolution² cells per face).
    CubeSphere,
}

impl SurfaceMesh {
    pub fn area(&self) -> f64 {
        let a: Vec<f64> = self.facets.iter().map(|f| f.area).collect();
        pairwise_sum(&a)
    }

    /// Enclosed volume by the divergence theorem, `(1/3) ∮ x·n_out dσ`.
    pub fn volume(&self) -> f64 {
        let v: Vec<f64> = self.facets.iter().map(|f| -f.area * f.center.dot(&f.normal) / 3.0).collect();
        pairwise_sum(&v)
    }

    /// `Σ area · n_out`; vanishes for a closed surface.
    pub fn flux_defect(&self) -> Vector3<f64> {
        let mut s = Vector3::zeros();
        for f in &self.facets {
            s -= f.normal * f.area;
        }
        s
    }

    /// Quadrature of `g(x, ν)` over the mesh (`ν` inward).
    pub fn integrate(&self, g: impl Fn(&Vector3<f64>, &Vector3<f64>) -> f64) -> f64 {
        let vals: Vec<f64> = self.facets.iter().map(|f| f.area * g(&f.center, &f.normal)).collect();
        pairwise_sum(&vals)
    }

    /// Writes `cx,cy,cz,nx,ny,nz,area` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cx,cy,cz,nx,ny,nz,area")?;
        for f in &self.facets {
            let (c, n) = (f.center, f.normal);
            writeln!(w, "{},{},{},{},{},{},{}", c.x, c.y, c.z, n.x, n.y, n.z, f.area)?;
        }
        Ok(())
    }
}

/// Builds the boundary mesh of a shape. Spheres use the icosphere.
pub fn build_mesh(shape: &ParticleShape, resolution: usize) -> Result<SurfaceMesh> {
    build_mesh_with(shape, resolution, SphereMeshKind::Icosphere)
}

pub fn build_mesh_with(shape: &ParticleShape, resolution: usize, sphere: SphereMeshKind) -> Result<SurfaceMesh> {
    if resolution == 0 {
        return Err(Error::Precondition("mesh resolution must be at least 1".into()));
    }
    shape.validate()?;
    Ok(match *shape {
        ParticleShape::Sphere => match sphere {
            SphereMeshKind::Icosphere => ellipsoid_icosphere([1.0; 3], resolution),
            SphereMeshKind::CubeSphere => cube_sphere(resolution),
        },
        ParticleShape::Ellipsoid { semi_axes } => ellipsoid_icosphere(semi_axes, resolution),
        ParticleShape::Cube { half_side } => cube(half_side, resolution),
        ParticleShape::Cylinder { radius, half_height } => cylinder(radius, half_height, resolution),
        ParticleShape::Tetrahedron { circumradius } => tetrahedron(circumradius, resolution),
    })
}

/// Area of the spherical triangle with unit-vector corners.
pub fn spherical_triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = 0.5 * (1.0 + 5f64.sqrt());
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let v = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z).normalize()).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Icosphere mapped onto the ellipsoid `diag(semi_axes)·S²`. Each facet is a
/// geodesic triangle; its quadrature point is the image of the normalised
/// centroid and its weight the exact spherical area times the surface
/// Jacobian `det A |A⁻¹ω|` at that point.
fn ellipsoid_icosphere(semi_axes: [f64; 3], r: usize) -> SurfaceMesh {
    let (iv, ifaces) = icosahedron();
    let a = Vector3::from(semi_axes);
    let det = a.x * a.y * a.z;
    let mut nodes = Vec::new();
    let mut facets = Vec::with_capacity(20 * r * r);
    for face in &ifaces {
        let (p0, p1, p2) = (iv[face[0]], iv[face[1]], iv[face[2]]);
        let mut index = vec![vec![0usize; r + 1]; r + 1];
        for i in 0..=r {
            for j in 0..=(r - i) {
                let p = p0 + (p1 - p0) * (i as f64 / r as f64) + (p2 - p0) * (j as f64 / r as f64);
                index[i][j] = nodes.len();
                nodes.push(p.normalize());
            }
        }
        let mut emit = |ia: usize, ib: usize, ic: usize, nodes: &Vec<Vector3<f64>>| {
            let (u, v, w) = (nodes[ia], nodes[ib], nodes[ic]);
            let omega = (u + v + w).normalize();
            let grad = omega.component_div(&a);
            let jac = det * grad.norm();
            facets.push(Facet {
                vertices: vec![ia, ib, ic],
                center: omega.component_mul(&a),
                area: spherical_triangle_area(&u, &v, &w) * jac,
                normal: -grad.normalize(),
            });
        };
        for i in 0..r {
            for j in 0..(r - i) {
                emit(index[i][j], index[i + 1][j], index[i][j + 1], &nodes);
                if i + j + 1 < r {
                    emit(index[i + 1][j], index[i + 1][j + 1], index[i][j + 1], &nodes);
                }
            }
        }
    }
    for n in &mut nodes {
        *n = n.component_mul(&a);
    }
    SurfaceMesh { nodes, facets }
}

fn cube_sphere(r: usize) -> SurfaceMesh {
    let mut nodes = Vec::new();
    let mut facets = Vec::with_capacity(6 * r * r);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let (u_ax, v_ax) = ((axis + 1) % 3, (axis + 2) % 3);
            let point = |s: f64, t: f64| {
                let mut p = Vector3::zeros();
                p[axis] = sign;
                p[u_ax] = s.tan();
                p[v_ax] = t.tan();
                p.normalize()
            };
            let angle = |k: usize| -FRAC_PI_4 + 2.0 * FRAC_PI_4 * k as f64 / r as f64;
            for i in 0..r {
                for j in 0..r {
                    let c = [
                        point(angle(i), angle(j)),
                        point(angle(i + 1), angle(j)),
                        point(angle(i + 1), angle(j + 1)),
                        point(angle(i), angle(j + 1)),
                    ];
                    let area =
                        spherical_triangle_area(&c[0], &c[1], &c[2]) + spherical_triangle_area(&c[0], &c[2], &c[3]);
                    let center = (c[0] + c[1] + c[2] + c[3]).normalize();
                    let base = nodes.len();
                    nodes.extend_from_slice(&c);
                    facets.push(Facet { vertices: (base..base + 4).collect(), center, area, normal: -center });
                }
            }
        }
    }
    SurfaceMesh { nodes, facets }
}

fn cube(h: f64, r: usize) -> SurfaceMesh {
    let mut nodes = Vec::new();
    let mut facets = Vec::with_capacity(6 * r * r);
    let step = 2.0 * h / r as f64;
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let (u_ax, v_ax) = ((axis + 1) % 3, (axis + 2) % 3);
            let point = |s: f64, t: f64| {
                let mut p = Vector3::zeros();
                p[axis] = sign * h;
                p[u_ax] = s;
                p[v_ax] = t;
                p
            };
            let mut normal = Vector3::zeros();
            normal[axis] = -sign;
            for i in 0..r {
                for j in 0..r {
                    let (s0, t0) = (-h + step * i as f64, -h + step * j as f64);
                    let base = nodes.len();
                    nodes.extend_from_slice(&[
                        point(s0, t0),
                        point(s0 + step, t0),
                        point(s0 + step, t0 + step),
                        point(s0, t0 + step),
                    ]);
                    facets.push(Facet {
                        vertices: (base..base + 4).collect(),
                        center: point(s0 + 0.5 * step, t0 + 0.5 * step),
                        area: step * step,
                        normal,
                    });
                }
            }
        }
    }
    SurfaceMesh { nodes, facets }
}

/// Side: `4r` angular by `r` axial cells with exact curved areas. Caps: `r`
/// rings of `4r` annular sectors. Facets never straddle the circular edges,
/// so each takes the normal of its own face.
fn cylinder(radius: f64, half_height: f64, r: usize) -> SurfaceMesh {
    let mut nodes = Vec::new();
    let mut facets = Vec::new();
    let n_theta = 4 * r;
    let dth = TAU / n_theta as f64;
    let dz = 2.0 * half_height / r as f64;
    let on_circle = |rho: f64, th: f64, z: f64| Vector3::new(rho * th.cos(), rho * th.sin(), z);
    for i in 0..n_theta {
        let (t0, t1) = (i as f64 * dth, (i + 1) as f64 * dth);
        let tm = 0.5 * (t0 + t1);
        for k in 0..r {
            let (z0, z1) = (-half_height + k as f64 * dz, -half_height + (k + 1) as f64 * dz);
            let base = nodes.len();
            nodes.extend_from_slice(&[
                on_circle(radius, t0, z0),
                on_circle(radius, t1, z0),
                on_circle(radius, t1, z1),
                on_circle(radius, t0, z1),
            ]);
            facets.push(Facet {
                vertices: (base..base + 4).collect(),
                center: on_circle(radius, tm, 0.5 * (z0 + z1)),
                area: radius * dth * dz,
                normal: -Vector3::new(tm.cos(), tm.sin(), 0.0),
            });
        }
    }
    let dr = radius / r as f64;
    for sign in [1.0, -1.0] {
        let z = sign * half_height;
        for ring in 0..r {
            let (r0, r1) = (ring as f64 * dr, (ring + 1) as f64 * dr);
            // area-weighted radius of the annulus
            let rm = ((r0 * r0 + r1 * r1) / 2.0).sqrt();
            for i in 0..n_theta {
                let (t0, t1) = (i as f64 * dth, (i + 1) as f64 * dth);
                let base = nodes.len();
                nodes.extend_from_slice(&[
                    on_circle(r0, t0, z),
                    on_circle(r1, t0, z),
                    on_circle(r1, t1, z),
                    on_circle(r0, t1, z),
                ]);
                facets.push(Facet {
                    vertices: (base..base + 4).collect(),
                    center: on_circle(rm, 0.5 * (t0 + t1), z),
                    area: 0.5 * (r1 * r1 - r0 * r0) * dth,
                    normal: Vector3::new(0.0, 0.0, -sign),
                });
            }
        }
    }
    SurfaceMesh { nodes, facets }
}

fn tetrahedron(circumradius: f64, r: usize) -> SurfaceMesh {
    let v = tetra_vertices().map(|x| x * circumradius);
    let normals = tetra_outward_normals();
    let mut nodes = Vec::new();
    let mut facets = Vec::new();
    for face in 0..4 {
        let corners: Vec<Vector3<f64>> = (0..4).filter(|&k| k != face).map(|k| v[k]).collect();
        let (p0, p1, p2) = (corners[0], corners[1], corners[2]);
        let mut index = vec![vec![0usize; r + 1]; r + 1];
        for i in 0..=r {
            for j in 0..=(r - i) {
                index[i][j] = nodes.len();
                nodes.push(p0 + (p1 - p0) * (i as f64 / r as f64) + (p2 - p0) * (j as f64 / r as f64));
            }
        }
        let inward = -normals[face];
        let mut emit = |ia: usize, ib: usize, ic: usize, nodes: &Vec<Vector3<f64>>| {
            let (a, b, c) = (nodes[ia], nodes[ib], nodes[ic]);
            facets.push(Facet {
                vertices: vec![ia, ib, ic],
                center: (a + b + c) / 3.0,
                area: 0.5 * (b - a).cross(&(c - a)).norm(),
                normal: inward,
            });
        };
        for i in 0..r {
            for j in 0..(r - i) {
                emit(index[i][j], index[i + 1][j], index[i][j + 1], &nodes);
                if i + j + 1 < r {
                    emit(index[i + 1][j], index[i + 1][j + 1], index[i][j + 1], &nodes);
                }
            }
        }
    }
    SurfaceMesh { nodes, facets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn all_shapes() -> Vec<ParticleShape> {
        vec![
            ParticleShape::Sphere,
            ParticleShape::Ellipsoid { semi_axes: [1.0, 0.5, 2.0] },
            ParticleShape::Cube { half_side: 1.0 },
            ParticleShape::Cylinder { radius: 0.6, half_height: 1.1 },
            ParticleShape::Tetrahedron { circumradius: 1.0 },
        ]
    }

    #[test]
    fn sphere_area_is_exact() {
        for r in [1, 2, 5, 16] {
            assert!((build_mesh(&ParticleShape::Sphere, r).unwrap().area() - 4.0 * PI).abs() < 1e-12);
            let cs = build_mesh_with(&ParticleShape::Sphere, r, SphereMeshKind::CubeSphere).unwrap();
            assert!((cs.area() - 4.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_areas() {
        let cube = build_mesh(&ParticleShape::Cube { half_side: 1.0 }, 3).unwrap();
        assert!((cube.area() - 24.0).abs() < 1e-12);
        let cyl = build_mesh(&ParticleShape::Cylinder { radius: 0.6, half_height: 1.1 }, 4).unwrap();
        assert!((cyl.area() - (2.0 * PI * 0.6 * 2.2 + 2.0 * PI * 0.36)).abs() < 1e-12);
        let tet = build_mesh(&ParticleShape::Tetrahedron { circumradius: 1.0 }, 3).unwrap();
        let edge = (8.0f64 / 3.0).sqrt();
        assert!((tet.area() - 3f64.sqrt() * edge * edge).abs() < 1e-12);
    }

    #[test]
    fn unit_ellipsoid_matches_sphere() {
        let s = build_mesh(&ParticleShape::Sphere, 6).unwrap();
        let e = build_mesh(&ParticleShape::Ellipsoid { semi_axes: [1.0; 3] }, 6).unwrap();
        assert_eq!(s, e);
    }

    #[test]
    fn ellipsoid_area_converges() {
        // prolate spheroid a = b = 0.5, c = 2
        let (a, c) = (0.5f64, 2.0f64);
        let e = (1.0 - a * a / (c * c)).sqrt();
        let exact = 2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin());
        let err = |r| (build_mesh(&ParticleShape::Ellipsoid { semi_axes: [a, a, c] }, r).unwrap().area() - exact).abs();
        let (e1, e2) = (err(8), err(16));
        assert!(e2 < 1e-2 * exact && e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn mesh_invariants_hold() {
        for shape in all_shapes() {
            let m = build_mesh(&shape, 8).unwrap();
            assert!(m.flux_defect().norm() < 1e-8, "{shape:?}");
            for f in &m.facets {
                assert!((f.normal.norm() - 1.0).abs() < 1e-12);
                assert!(f.normal.dot(&(-f.center)) > 0.0, "{shape:?}");
                for &v in &f.vertices {
                    assert!(v < m.nodes.len());
                }
            }
            let rel = (m.volume() - shape.volume()).abs() / shape.volume();
            assert!(rel < 2e-2, "{shape:?} {rel}");
        }
        assert!(build_mesh(&ParticleShape::Sphere, 0).is_err());
        assert!(build_mesh(&ParticleShape::Cube { half_side: 0.0 }, 2).is_err());
    }

    #[test]
    fn csv_export_has_one_row_per_facet() {
        let m = build_mesh(&ParticleShape::Cube { half_side: 1.0 }, 2).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), m.facets.len() + 1);
    }
}
