//! Triangle meshes for rotational profiles and graph surfaces, with a
//! cotangent-Laplacian discrete mean-curvature oracle and OBJ/CSV export.
//!
//! Revolution meshes place vertices at (sqrt(h(z)) cos t, sqrt(h(z)) sin t, z)
//! on a z-by-angle grid; non-rotational surfaces are meshed as z-graphs
//! over an (x, y) grid. The discrete curvature uses the same orientation
//! convention as the rest of the crate: a unit sphere reads -1.

use std::io::Write;

use thiserror::Error;

use crate::delaunay::ProfileCurve;
use crate::spline::{CubicSpline, SplineError};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("empty profile")]
    EmptyProfile,
    #[error("angular resolution {0} is below the minimum of 8")]
    AngularTooSmall(usize),
    #[error("nonpositive squared radius {0} in profile")]
    NonPositiveRadius(f64),
    #[error("empty mesh")]
    EmptyMesh,
    #[error("grid needs at least 2 samples per axis")]
    DegenerateGrid,
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Indexed triangle mesh with per-vertex outward normals.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<[f64; 3]>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn triangle_area(p: [f64; 3], q: [f64; 3], r: [f64; 3]) -> f64 {
    0.5 * norm(cross(sub(q, p), sub(r, p)))
}

impl TriangleMesh {
    /// Every edge is shared by at most two triangles, and any shared edge
    /// is traversed once in each direction (consistent winding).
    pub fn is_manifold(&self) -> bool {
        use std::collections::HashMap;
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed.iter().all(|(&(a, b), &count)| {
            let opposite = directed.get(&(b, a)).copied().unwrap_or(0);
            count == 1 && opposite <= 1
        })
    }

    /// Signed volume enclosed by the mesh (exact for closed meshes;
    /// positive for outward winding).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (p, q, r) = (
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                );
                dot(p, cross(q, r)) / 6.0
            })
            .sum()
    }
}

/// Evenly resample a profile to `n` z-rows through a clamped cubic spline
/// in h(z).
pub fn resample_profile(profile: &ProfileCurve, n: usize) -> Result<ProfileCurve, MeshError> {
    if profile.is_empty() {
        return Err(MeshError::EmptyProfile);
    }
    if n < 2 || profile.len() < 2 {
        return Err(MeshError::DegenerateGrid);
    }
    let spline = CubicSpline::clamped(
        &profile.z,
        &profile.h,
        profile.hp[0],
        profile.hp[profile.hp.len() - 1],
    )?;
    let (z0, z1) = (profile.z[0], profile.z[profile.z.len() - 1]);
    let mut out = ProfileCurve {
        z: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        hp: Vec::with_capacity(n),
        truncated: profile.truncated,
    };
    for i in 0..n {
        let z = z0 + (z1 - z0) * i as f64 / (n - 1) as f64;
        let jet = spline.eval(z);
        out.z.push(z);
        out.h.push(jet.value);
        out.hp.push(jet.d1);
    }
    Ok(out)
}

/// Surface of revolution about the z-axis: one vertex ring per profile
/// row, closed in the angular direction, quad-split triangulation with
/// outward winding. Normals come from the implicit form
/// x^2 + y^2 - h(z) with gradient (2x, 2y, -h'(z)).
pub fn tessellate_revolution(
    profile: &ProfileCurve,
    angular: usize,
) -> Result<TriangleMesh, MeshError> {
    if profile.is_empty() {
        return Err(MeshError::EmptyProfile);
    }
    if angular < 8 {
        return Err(MeshError::AngularTooSmall(angular));
    }
    let rows = profile.len();
    let mut vertices = Vec::with_capacity(rows * angular);
    let mut normals = Vec::with_capacity(rows * angular);
    for i in 0..rows {
        let h = profile.h[i];
        if h <= 0.0 {
            return Err(MeshError::NonPositiveRadius(h));
        }
        let r = h.sqrt();
        let z = profile.z[i];
        let hp = profile.hp[i];
        for j in 0..angular {
            let t = std::f64::consts::TAU * j as f64 / angular as f64;
            let (x, y) = (r * t.cos(), r * t.sin());
            vertices.push([x, y, z]);
            normals.push(normalize([2.0 * x, 2.0 * y, -hp]));
        }
    }
    let mut triangles = Vec::with_capacity(2 * (rows - 1) * angular);
    let v = |i: usize, j: usize| i * angular + j % angular;
    for i in 0..rows - 1 {
        for j in 0..angular {
            for tri in [
                [v(i, j), v(i, j + 1), v(i + 1, j + 1)],
                [v(i, j), v(i + 1, j + 1), v(i + 1, j)],
            ] {
                let area = triangle_area(
                    vertices[tri[0]],
                    vertices[tri[1]],
                    vertices[tri[2]],
                );
                if area > 1e-14 {
                    triangles.push(tri);
                }
            }
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
        normals,
    })
}

/// z-graph surface over a rectangular (x, y) grid. The closure returns
/// the height and its two partial derivatives at each grid node.
pub fn tessellate_graph(
    xs: &[f64],
    ys: &[f64],
    height: impl Fn(f64, f64) -> (f64, f64, f64),
) -> Result<TriangleMesh, MeshError> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(MeshError::DegenerateGrid);
    }
    let (nx, ny) = (xs.len(), ys.len());
    let mut vertices = Vec::with_capacity(nx * ny);
    let mut normals = Vec::with_capacity(nx * ny);
    for &x in xs {
        for &y in ys {
            let (z, zx, zy) = height(x, y);
            vertices.push([x, y, z]);
            normals.push(normalize([-zx, -zy, 1.0]));
        }
    }
    let v = |i: usize, j: usize| i * ny + j;
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            for tri in [
                [v(i, j), v(i + 1, j), v(i + 1, j + 1)],
                [v(i, j), v(i + 1, j + 1), v(i, j + 1)],
            ] {
                let area = triangle_area(
                    vertices[tri[0]],
                    vertices[tri[1]],
                    vertices[tri[2]],
                );
                if area > 1e-14 {
                    triangles.push(tri);
                }
            }
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
        normals,
    })
}

/// Cotangent-Laplacian discrete mean curvature per vertex, signed against
/// the stored outward normal (unit sphere reads about -1). Boundary and
/// non-manifold vertices are skipped (`None`).
pub fn discrete_mean_curvature(mesh: &TriangleMesh) -> Vec<Option<f64>> {
    use std::collections::HashMap;
    let n = mesh.vertices.len();
    // edge -> number of incident triangles, to find boundary/non-manifold
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let key = (a.min(b), a.max(b));
            *edge_count.entry(key).or_insert(0) += 1;
        }
    }
    let mut skip = vec![false; n];
    let mut seen = vec![false; n];
    for (&(a, b), &count) in &edge_count {
        seen[a] = true;
        seen[b] = true;
        if count != 2 {
            skip[a] = true;
            skip[b] = true;
        }
    }
    for (i, was_seen) in seen.iter().enumerate() {
        if !was_seen {
            skip[i] = true;
        }
    }
    let mut laplacian = vec![[0.0; 3]; n];
    let mut area = vec![0.0; n];
    for t in &mesh.triangles {
        let p = [
            mesh.vertices[t[0]],
            mesh.vertices[t[1]],
            mesh.vertices[t[2]],
        ];
        let a = triangle_area(p[0], p[1], p[2]);
        for k in 0..3 {
            area[t[k]] += a / 3.0;
            // opposite-angle cotangent weights the edge (k+1, k+2)
            let (i, j, o) = (t[(k + 1) % 3], t[(k + 2) % 3], t[k]);
            let e1 = sub(mesh.vertices[i], mesh.vertices[o]);
            let e2 = sub(mesh.vertices[j], mesh.vertices[o]);
            let cot = dot(e1, e2) / norm(cross(e1, e2)).max(1e-300);
            let d = sub(mesh.vertices[j], mesh.vertices[i]);
            for c in 0..3 {
                laplacian[i][c] += 0.5 * cot * d[c];
                laplacian[j][c] -= 0.5 * cot * d[c];
            }
        }
    }
    (0..n)
        .map(|i| {
            if skip[i] || area[i] <= 0.0 {
                return None;
            }
            // Laplace-Beltrami of position is the mean-curvature normal;
            // projecting on the outward normal matches the crate's sign
            // convention (unit sphere reads -1)
            let k = [
                laplacian[i][0] / area[i],
                laplacian[i][1] / area[i],
                laplacian[i][2] / area[i],
            ];
            Some(dot(k, mesh.normals[i]) / 2.0)
        })
        .collect()
}

/// Wavefront OBJ: `v x y z` lines, then `f i j k` with 1-based indices.
pub fn export_obj(mesh: &TriangleMesh, mut out: impl Write) -> Result<(), MeshError> {
    if mesh.vertices.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Vertex table with header `x,y,z,nx,ny,nz`.
pub fn export_csv(mesh: &TriangleMesh, mut out: impl Write) -> Result<(), MeshError> {
    if mesh.vertices.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    writeln!(out, "x,y,z,nx,ny,nz")?;
    for (v, nrm) in mesh.vertices.iter().zip(&mesh.normals) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            v[0], v[1], v[2], nrm[0], nrm[1], nrm[2]
        )?;
    }
    Ok(())
}
