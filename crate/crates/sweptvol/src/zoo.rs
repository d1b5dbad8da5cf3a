//! Canonical shapes, fields, and velocity profiles shared by tests, the
//! verification experiments, and the CLI: dipole and 2+2 point
//! configurations, rings and linked rings, sample meshes, bump plateaus, and
//! seeded test-form suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::currents::{add, cross, norm, scale, sub};
use crate::explicit::Curve3D;
use crate::grid::GridSpec;
use crate::trig::{TestForm, TrigPoly};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard dipole on the unit torus: +1 at (0.25, 0.5), −1 at (0.75, 0.5).
pub fn dipole_points() -> (Vec<[f64; 3]>, Vec<i8>) {
    (vec![[0.25, 0.5, 0.0], [0.75, 0.5, 0.0]], vec![1, -1])
}

/// Off-axis dipole with no mirror symmetry; the natural configuration for
/// flux functionals that the symmetric dipole sends to zero identically.
pub fn dipole_points_offset() -> (Vec<[f64; 3]>, Vec<i8>) {
    (vec![[0.27, 0.36, 0.0], [0.64, 0.61, 0.0]], vec![1, -1])
}

/// 2+2 configuration with the sign pattern of two positive and two negative
/// zeros (plus at (0.25,0.25) and (0.75,0.75), minus on the other diagonal).
pub fn two_plus_two_points() -> (Vec<[f64; 3]>, Vec<i8>) {
    (
        vec![
            [0.25, 0.25, 0.0],
            [0.75, 0.75, 0.0],
            [0.25, 0.75, 0.0],
            [0.75, 0.25, 0.0],
        ],
        vec![1, 1, -1, -1],
    )
}

/// Axis-aligned planar ring in T³: circle of radius `r` in the z = `center[2]`
/// plane around (center[0], center[1]).
pub fn ring_curve(center: [f64; 3], r: f64, nverts: usize) -> Curve3D {
    let vertices = (0..nverts)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / nverts as f64;
            [center[0] + r * th.cos(), center[1] + r * th.sin(), center[2]]
        })
        .collect();
    Curve3D { vertices }
}

/// Ring in the y = center[1] plane (axis along ŷ), used for linked pairs.
pub fn ring_curve_y(center: [f64; 3], r: f64, nverts: usize) -> Curve3D {
    let vertices = (0..nverts)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / nverts as f64;
            [center[0] + r * th.cos(), center[1], center[2] + r * th.sin()]
        })
        .collect();
    Curve3D { vertices }
}

/// Circle in ℝ³ around `center` in a plane spanned by (e1, e2).
pub fn circle_in_plane(center: [f64; 3], r: f64, e1: [f64; 3], e2: [f64; 3], n: usize) -> Curve3D {
    let vertices = (0..n)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / n as f64;
            add(center, add(scale(e1, r * th.cos()), scale(e2, r * th.sin())))
        })
        .collect();
    Curve3D { vertices }
}

/// Planar circle of radius r in z = center[2], counterclockwise seen from +ẑ.
pub fn circle3d(center: [f64; 3], r: f64, n: usize) -> Curve3D {
    circle_in_plane(center, r, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], n)
}

/// Ellipse with semi-axes (a, b) in the z = 0 plane.
pub fn ellipse3d(a: f64, b: f64, n: usize) -> Curve3D {
    let vertices = (0..n)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / n as f64;
            [a * th.cos(), b * th.sin(), 0.0]
        })
        .collect();
    Curve3D { vertices }
}

/// Flat disk mesh in the z = center[2] plane with normals +ẑ.
pub fn disk_mesh(center: [f64; 3], r: f64, nseg: usize, nring: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    curved_disk_mesh(center, r, 0.0, nseg, nring)
}

/// Disk-like cap z = center_z + bulge·(1 − (ρ/r)²) over a circle of radius r;
/// set `bulge = 0` for a flat disk. Triangles oriented with normals upward.
pub fn curved_disk_mesh(
    center: [f64; 3],
    r: f64,
    bulge: f64,
    nseg: usize,
    nring: usize,
) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut vertices = vec![[center[0], center[1], center[2] + bulge]];
    for j in 1..=nring {
        let rho = r * j as f64 / nring as f64;
        let z = center[2] + bulge * (1.0 - (rho / r) * (rho / r));
        for i in 0..nseg {
            let th = std::f64::consts::TAU * i as f64 / nseg as f64;
            vertices.push([center[0] + rho * th.cos(), center[1] + rho * th.sin(), z]);
        }
    }
    let idx = |j: usize, i: usize| -> usize {
        if j == 0 {
            0
        } else {
            1 + (j - 1) * nseg + (i % nseg)
        }
    };
    let mut triangles = Vec::new();
    for i in 0..nseg {
        triangles.push([0, idx(1, i), idx(1, i + 1)]);
    }
    for j in 1..nring {
        for i in 0..nseg {
            triangles.push([idx(j, i), idx(j + 1, i), idx(j + 1, i + 1)]);
            triangles.push([idx(j, i), idx(j + 1, i + 1), idx(j, i + 1)]);
        }
    }
    (vertices, triangles)
}

/// Closed UV sphere of radius r centered at the origin, outward normals.
pub fn uv_sphere(r: f64, nseg: usize, nlat: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    sphere_band(r, nseg, nlat, 0.0, std::f64::consts::PI)
}

/// Upper hemisphere (z ≥ 0) of radius r, outward (upward-tilted) normals.
pub fn uv_hemisphere(r: f64, nseg: usize, nlat: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    sphere_band(r, nseg, nlat, 0.0, 0.5 * std::f64::consts::PI)
}

fn sphere_band(
    r: f64,
    nseg: usize,
    nlat: usize,
    phi0: f64,
    phi1: f64,
) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    // phi measured from the north pole; phi0 = 0 starts with a pole fan.
    let mut vertices = vec![[0.0, 0.0, r]];
    for j in 1..=nlat {
        let phi = phi0 + (phi1 - phi0) * j as f64 / nlat as f64;
        for i in 0..nseg {
            let th = std::f64::consts::TAU * i as f64 / nseg as f64;
            vertices.push([r * phi.sin() * th.cos(), r * phi.sin() * th.sin(), r * phi.cos()]);
        }
    }
    let idx = |j: usize, i: usize| -> usize {
        if j == 0 {
            0
        } else {
            1 + (j - 1) * nseg + (i % nseg)
        }
    };
    let mut triangles = Vec::new();
    for i in 0..nseg {
        triangles.push([0, idx(1, i), idx(1, i + 1)]);
    }
    for j in 1..nlat {
        for i in 0..nseg {
            triangles.push([idx(j, i), idx(j + 1, i), idx(j + 1, i + 1)]);
            triangles.push([idx(j, i), idx(j + 1, i + 1), idx(j, i + 1)]);
        }
    }
    if (phi1 - std::f64::consts::PI).abs() < 1e-12 {
        // close the south pole
        let south = vertices.len();
        vertices.push([0.0, 0.0, -r]);
        let j = nlat; // last ring collapses to the pole
        for i in 0..nseg {
            triangles.push([idx(j - 1, i), south, idx(j - 1, i + 1)]);
        }
        // drop the degenerate last ring produced by the generic band
        let keep = |t: &[usize; 3]| t.iter().all(|&v| v < 1 + (nlat - 1) * nseg || v == south);
        triangles.retain(keep);
        vertices.truncate(1 + (nlat - 1) * nseg + 1);
        // re-add south at correct index
        let fix = 1 + (nlat - 1) * nseg;
        for t in &mut triangles {
            for v in t.iter_mut() {
                if *v == south {
                    *v = fix;
                }
            }
        }
    }
    (vertices, triangles)
}

/// C² plateau bump χ(x): 1 inside radius r0 of `center` (periodic distance),
/// 0 outside r1, quintic smoothstep ramp between.
pub fn plateau_bump(grid: &GridSpec, center: [f64; 3], r0: f64, r1: f64) -> impl Fn([f64; 3]) -> f64 + Clone {
    let g = grid.clone();
    move |p: [f64; 3]| {
        let d = g.distance(p, center);
        smooth_plateau(d, r0, r1)
    }
}

/// Quintic smoothstep plateau in the scalar distance d.
pub fn smooth_plateau(d: f64, r0: f64, r1: f64) -> f64 {
    if d <= r0 {
        1.0
    } else if d >= r1 {
        0.0
    } else {
        let s = (d - r0) / (r1 - r0);
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Exact divergence-free field on T²: the 90°-rotated gradient of a stream
/// function g, u = (−∂_y g, ∂_x g), so that ι_u μ = −dg is exact.
pub fn rotated_gradient_2d(stream: &TrigPoly) -> (impl Fn([f64; 3]) -> [f64; 3] + Clone, TrigPoly, TrigPoly) {
    let gx = stream.partial(0);
    let gy = stream.partial(1);
    let (gx2, gy2) = (gx.clone(), gy.clone());
    (
        move |p: [f64; 3]| [-gy2.eval(p), gx2.eval(p), 0.0],
        gx,
        gy,
    )
}

/// Cyclic coordinate primitive of the Euclidean volume form on ℝ³:
/// ν = (1/3)(x₀ dx₁∧dx₂ + x₁ dx₂∧dx₀ + x₂ dx₀∧dx₁), stored in
/// (01, 02, 12) component order as (x₂/3, −x₁/3, x₀/3). Satisfies dν = μ.
pub fn nu_cyclic() -> TestForm {
    let l = [1.0, 1.0, 1.0];
    TestForm {
        degree: 2,
        m: 3,
        comps: vec![
            TrigPoly::monomial(l, 1.0 / 3.0, [0, 0, 1]),
            TrigPoly::monomial(l, -1.0 / 3.0, [0, 1, 0]),
            TrigPoly::monomial(l, 1.0 / 3.0, [1, 0, 0]),
        ],
    }
}

/// Alternative primitive ν = x₀ dx₁∧dx₂ of the Euclidean volume form.
pub fn nu_single_term() -> TestForm {
    let l = [1.0, 1.0, 1.0];
    TestForm {
        degree: 2,
        m: 3,
        comps: vec![
            TrigPoly::zero(l),
            TrigPoly::zero(l),
            TrigPoly::monomial(l, 1.0, [1, 0, 0]),
        ],
    }
}

/// Seeded suite of random (m−2)-degree test forms for boundary-identity
/// pairing checks: 0-forms on T², 1-forms on T³.
pub fn seeded_form_suite(seed: u64, m: usize, lengths: [f64; 3], count: usize) -> Vec<TestForm> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let form = if m == 2 {
            TestForm::zero_form(m, TrigPoly::random(&mut r, lengths, m, 3, 2))
        } else {
            let comps = (0..3).map(|_| TrigPoly::random(&mut r, lengths, m, 2, 1)).collect();
            TestForm::one_form(m, comps).expect("three components")
        };
        out.push(form);
    }
    out
}

/// Deterministic uniform sample in [lo, hi) from a seeded generator.
pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}

/// Tilted circle for non-degenerate rotation families: circle of radius r
/// centered at `center`, in the plane spanned by (x̂, cos α ŷ + sin α ẑ).
pub fn tilted_circle(center: [f64; 3], r: f64, alpha: f64, n: usize) -> Curve3D {
    circle_in_plane(center, r, [1.0, 0.0, 0.0], [0.0, alpha.cos(), alpha.sin()], n)
}

/// Unit tangent of a curve vertex by central differences (helper for tests).
pub fn unit_tangent(c: &Curve3D, i: usize) -> [f64; 3] {
    let n = c.vertices.len();
    let t = sub(c.vertices[(i + 1) % n], c.vertices[(i + n - 1) % n]);
    scale(t, 1.0 / norm(t))
}

/// Outward radial unit vector in the z = const plane of a circle around `center`.
pub fn radial_unit(center: [f64; 3], p: [f64; 3]) -> [f64; 3] {
    let d = [p[0] - center[0], p[1] - center[1], 0.0];
    scale(d, 1.0 / norm(d))
}

/// Normal of a planar polygon via Newell's formula (helper for tests).
pub fn polygon_normal(pts: &[[f64; 3]]) -> [f64; 3] {
    let mut n = [0.0; 3];
    for i in 0..pts.len() {
        let a = pts[i];
        let b = pts[(i + 1) % pts.len()];
        n = add(n, cross(a, b));
    }
    scale(n, 0.5)
}
