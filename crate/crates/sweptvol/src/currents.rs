//! Desk-scale de Rham currents: oriented point sets, closed polylines, and
//! triangle surfaces, paired with closed-form test forms by midpoint
//! quadrature. The boundary operator extracts oriented rims of surfaces.

use crate::error::{Error, Result};
use crate::trig::TestForm;

/// An oriented polyline chain. Vertices may live on the universal cover of a
/// torus (consecutive steps are always geometric, never wrapped jumps), so
/// closed chains carry an explicit final vertex that repeats the first one up
/// to a lattice period. All segments are the consecutive vertex pairs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Chain {
    pub vertices: Vec<[f64; 3]>,
    pub closed: bool,
}

impl Chain {
    pub fn segment_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn segment(&self, i: usize) -> ([f64; 3], [f64; 3]) {
        (self.vertices[i], self.vertices[i + 1])
    }

    /// Vertices without the duplicated closure point of closed chains.
    pub fn unique_vertices(&self) -> &[[f64; 3]] {
        if self.closed && self.vertices.len() > 1 {
            &self.vertices[..self.vertices.len() - 1]
        } else {
            &self.vertices
        }
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                dist(a, b)
            })
            .sum()
    }
}

/// Shapes as currents: the codimension-m supports (points), codimension-2
/// curves, and codimension-1 surfaces that appear as phase level sets.
#[derive(Debug, Clone)]
pub enum ShapeCurrent {
    /// Signed points in a 2-dimensional ambient (z component unused).
    OrientedPoints { positions: Vec<[f64; 3]>, signs: Vec<i8> },
    /// One or more oriented polylines. Open chains arise from clipped level
    /// sets whose endpoints lie on the zero set.
    PolyCurve { chains: Vec<Chain> },
    /// Oriented triangle surface, possibly with boundary. When `periods` is
    /// set the vertices live on a torus and each triangle is evaluated with
    /// its corners localized by minimal images around the first corner.
    TriSurface {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        periods: Option<[f64; 3]>,
    },
}

impl ShapeCurrent {
    /// Dimension of the support: 0 for points, 1 for curves, 2 for surfaces.
    pub fn support_dim(&self) -> usize {
        match self {
            ShapeCurrent::OrientedPoints { .. } => 0,
            ShapeCurrent::PolyCurve { .. } => 1,
            ShapeCurrent::TriSurface { .. } => 2,
        }
    }
}

/// Minimal-image difference a − b under optional periods.
#[inline]
pub fn periodic_sub(a: [f64; 3], b: [f64; 3], periods: Option<[f64; 3]>) -> [f64; 3] {
    let mut d = sub(a, b);
    if let Some(l) = periods {
        for k in 0..3 {
            if l[k] > 0.0 {
                d[k] -= (d[k] / l[k]).round() * l[k];
            }
        }
    }
    d
}

#[inline]
pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot(a, cross(b, c))
}

#[inline]
pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn midpoint(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    scale(add(a, b), 0.5)
}

/// Pairs a current with a test form of matching degree by midpoint
/// quadrature: signed evaluation at points, per-segment for curves,
/// per-triangle (centroid) for surfaces.
pub fn pair(c: &ShapeCurrent, alpha: &TestForm) -> Result<f64> {
    let dim = c.support_dim();
    if alpha.degree != dim {
        return Err(Error::DegreeMismatch { form: alpha.degree, current: dim });
    }
    let mut acc = 0.0;
    match c {
        ShapeCurrent::OrientedPoints { positions, signs } => {
            if positions.len() != signs.len() {
                return Err(Error::SizeMismatch("points vs signs".into()));
            }
            for (p, &s) in positions.iter().zip(signs) {
                acc += s as f64 * alpha.eval(*p, &[]);
            }
        }
        ShapeCurrent::PolyCurve { chains } => {
            for ch in chains {
                for i in 0..ch.segment_count() {
                    let (a, b) = ch.segment(i);
                    acc += alpha.eval(midpoint(a, b), &[sub(b, a)]);
                }
            }
        }
        ShapeCurrent::TriSurface { vertices, triangles, periods } => {
            for t in triangles {
                let a = vertices[t[0]];
                let e1 = periodic_sub(vertices[t[1]], a, *periods);
                let e2 = periodic_sub(vertices[t[2]], a, *periods);
                let centroid = add(a, scale(add(e1, e2), 1.0 / 3.0));
                acc += 0.5 * alpha.eval(centroid, &[e1, e2]);
            }
        }
    }
    Ok(acc)
}

/// Flux of a vector field through an oriented surface (m = 3): per triangle,
/// u(centroid) · n̂ · area with n̂ the orientation normal.
pub fn flux_surface(
    vertices: &[[f64; 3]],
    triangles: &[[usize; 3]],
    periods: Option<[f64; 3]>,
    u: impl Fn([f64; 3]) -> [f64; 3],
) -> f64 {
    let mut acc = 0.0;
    for t in triangles {
        let a = vertices[t[0]];
        let e1 = periodic_sub(vertices[t[1]], a, periods);
        let e2 = periodic_sub(vertices[t[2]], a, periods);
        let centroid = add(a, scale(add(e1, e2), 1.0 / 3.0));
        let nvec = scale(cross(e1, e2), 0.5);
        acc += dot(u(centroid), nvec);
    }
    acc
}

/// Flux of a planar vector field through an oriented curve (m = 2):
/// ∫_c ι_u μ with μ = dx∧dy, i.e. per segment u(mid)·(Δy, −Δx).
pub fn flux_curve_2d(chains: &[Chain], u: impl Fn([f64; 3]) -> [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for ch in chains {
        for i in 0..ch.segment_count() {
            let (a, b) = ch.segment(i);
            let m = midpoint(a, b);
            let d = sub(b, a);
            let uv = u(m);
            acc += uv[0] * d[1] - uv[1] * d[0];
        }
    }
    acc
}

/// Flux through any shape current playing the hypersurface role:
/// surfaces in m = 3, curves in m = 2.
pub fn flux(c: &ShapeCurrent, u: impl Fn([f64; 3]) -> [f64; 3]) -> Result<f64> {
    match c {
        ShapeCurrent::TriSurface { vertices, triangles, periods } => {
            Ok(flux_surface(vertices, triangles, *periods, u))
        }
        ShapeCurrent::PolyCurve { chains } => Ok(flux_curve_2d(chains, u)),
        ShapeCurrent::OrientedPoints { .. } => Err(Error::DegreeMismatch { form: 1, current: 0 }),
    }
}

/// Extracts the oriented boundary of a triangle surface: edges incident to
/// exactly one triangle, chained into polylines with the induced orientation.
/// Errors on non-manifold edges (3+ incident triangles).
pub fn boundary(vertices: &[[f64; 3]], triangles: &[[usize; 3]]) -> Result<Vec<Chain>> {
    use std::collections::HashMap;
    // Count directed edges; a boundary edge is one whose reverse is absent.
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let key = if e.0 < e.1 { (e.0, e.1) } else { (e.1, e.0) };
            *count.entry(key).or_insert(0) += 1;
        }
    }
    for (&(a, b), &c) in &count {
        if c > 2 {
            return Err(Error::NonManifoldEdge(a, b));
        }
    }
    // Directed boundary edges keep the triangle's own winding, which is the
    // induced boundary orientation.
    let mut nexts: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut edge_count = 0usize;
    for t in triangles {
        for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let key = if e.0 < e.1 { (e.0, e.1) } else { (e.1, e.0) };
            if count[&key] == 1 {
                nexts.entry(e.0).or_default().push(e.1);
                edge_count += 1;
            }
        }
    }
    for v in nexts.values_mut() {
        v.sort_unstable();
    }
    // Chain edges into polylines, deterministically from the smallest start.
    let mut chains = Vec::new();
    let mut used = 0usize;
    let mut starts: Vec<usize> = nexts.keys().copied().collect();
    starts.sort_unstable();
    let mut taken: HashMap<usize, usize> = HashMap::new(); // per-vertex consumed count
    while used < edge_count {
        let start = *starts
            .iter()
            .find(|s| taken.get(s).copied().unwrap_or(0) < nexts[s].len())
            .expect("unconsumed boundary edge");
        let mut verts = vec![start];
        let mut cur = start;
        loop {
            let slot = taken.entry(cur).or_insert(0);
            let outs = &nexts[&cur];
            if *slot >= outs.len() {
                break; // open chain end
            }
            let nxt = outs[*slot];
            *slot += 1;
            used += 1;
            if nxt == start {
                verts.push(start); // explicit closing vertex
                chains.push(Chain { vertices: verts.iter().map(|&i| vertices[i]).collect(), closed: true });
                verts.clear();
                break;
            }
            verts.push(nxt);
            cur = nxt;
        }
        if !verts.is_empty() {
            chains.push(Chain { vertices: verts.iter().map(|&i| vertices[i]).collect(), closed: false });
        }
    }
    Ok(chains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{Phase, TestForm, TrigPoly};

    fn l1() -> [f64; 3] {
        [1.0, 1.0, 1.0]
    }

    #[test]
    fn dirac_pairing_evaluates_at_point() {
        let f = TrigPoly::single(l1(), 2.0, [(1, Phase::Sin), (0, Phase::Cos), (0, Phase::Cos)]);
        let alpha = TestForm::zero_form(2, f.clone());
        let c = ShapeCurrent::OrientedPoints { positions: vec![[0.2, 0.4, 0.0]], signs: vec![1] };
        let got = pair(&c, &alpha).unwrap();
        assert!((got - f.eval([0.2, 0.4, 0.0])).abs() < 1e-15);
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let alpha = TestForm::zero_form(2, TrigPoly::constant(l1(), 1.0));
        let c = ShapeCurrent::PolyCurve {
            chains: vec![Chain { vertices: vec![[0.0; 3], [1.0, 0.0, 0.0]], closed: false }],
        };
        assert!(matches!(pair(&c, &alpha), Err(Error::DegreeMismatch { .. })));
    }

    fn unit_square_mesh(nx: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
        // Regular triangulation of [0,1]² in z = 0 with normals +ẑ.
        let mut vertices = Vec::new();
        for j in 0..=nx {
            for i in 0..=nx {
                vertices.push([i as f64 / nx as f64, j as f64 / nx as f64, 0.0]);
            }
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::new();
        for j in 0..nx {
            for i in 0..nx {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        (vertices, triangles)
    }

    #[test]
    fn unit_square_area_form() {
        let (v, t) = unit_square_mesh(10);
        let c = ShapeCurrent::TriSurface { vertices: v, triangles: t, periods: None };
        // α = dx∧dy has constant coefficient 1.
        let alpha = TestForm::two_form(
            3,
            vec![
                TrigPoly::constant(l1(), 1.0),
                TrigPoly::zero(l1()),
                TrigPoly::zero(l1()),
            ],
        )
        .unwrap();
        let got = pair(&c, &alpha).unwrap();
        assert!((got - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_square_flux() {
        let (v, t) = unit_square_mesh(8);
        assert!((flux_surface(&v, &t, None, |_| [0.0, 0.0, 1.0]) - 1.0).abs() < 1e-12);
        // tangent field has zero flux
        assert!(flux_surface(&v, &t, None, |_| [0.3, -0.7, 0.0]).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_flux_matches_projected_area() {
        // Hemisphere of radius r, u = ẑ: flux equals the projected area πr²
        // (closed form for the projection of the upper hemisphere onto z = 0).
        let r = 0.7;
        let (mut v, t) = crate::zoo::uv_hemisphere(r, 120, 50);
        assert!(t.len() >= 10_000, "want ≥ 10⁴ triangles, got {}", t.len());
        for p in &mut v {
            *p = *p; // mesh already centered at origin
        }
        let got = flux_surface(&v, &t, None, |_| [0.0, 0.0, 1.0]);
        let expect = std::f64::consts::PI * r * r;
        assert!((got - expect).abs() < 0.01 * expect, "got {got}, want {expect}");
    }

    #[test]
    fn single_triangle_boundary_is_three_edge_loop() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let t = vec![[0usize, 1, 2]];
        let b = boundary(&v, &t).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].closed);
        assert_eq!(b[0].unique_vertices().len(), 3);
        assert_eq!(b[0].segment_count(), 3);
    }

    #[test]
    fn disk_boundary_is_counterclockwise_rim() {
        let (v, t) = crate::zoo::disk_mesh([0.5, 0.5, 0.0], 0.3, 24, 6);
        let b = boundary(&v, &t).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].closed);
        // Signed area of the rim must be positive: counterclockwise w.r.t.
        // the +ẑ disk normal.
        let mut area2 = 0.0;
        for i in 0..b[0].segment_count() {
            let (a, c) = b[0].segment(i);
            area2 += (a[0] - 0.5) * (c[1] - 0.5) - (c[0] - 0.5) * (a[1] - 0.5);
        }
        assert!(area2 > 0.0);
    }

    #[test]
    fn closed_sphere_has_empty_boundary() {
        let (v, t) = crate::zoo::uv_sphere(0.4, 24, 16);
        let b = boundary(&v, &t).unwrap();
        assert!(b.is_empty(), "closed surface boundary should be empty");
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, -1.0, 0.0],
        ];
        let t = vec![[0usize, 1, 2], [0, 1, 3], [0, 1, 4]];
        assert!(matches!(boundary(&v, &t), Err(Error::NonManifoldEdge(0, 1))));
    }

    #[test]
    fn stokes_pairing_on_curved_disk() {
        // ⟨Σ, dα⟩ = ⟨∂Σ, α⟩ for a curved disk and a degree-1 trig form.
        let (v, t) = crate::zoo::curved_disk_mesh([0.5, 0.5, 0.3], 0.3, 0.4, 64, 24);
        let alpha = TestForm::one_form(
            3,
            vec![
                TrigPoly::single(l1(), 0.8, [(1, Phase::Sin), (1, Phase::Cos), (0, Phase::Cos)]),
                TrigPoly::single(l1(), -0.5, [(0, Phase::Cos), (1, Phase::Sin), (1, Phase::Cos)]),
                TrigPoly::single(l1(), 0.3, [(1, Phase::Cos), (0, Phase::Cos), (1, Phase::Sin)]),
            ],
        )
        .unwrap();
        let surf = ShapeCurrent::TriSurface { vertices: v.clone(), triangles: t.clone(), periods: None };
        let lhs = pair(&surf, &alpha.d().unwrap()).unwrap();
        let rim = ShapeCurrent::PolyCurve { chains: boundary(&v, &t).unwrap() };
        let rhs = pair(&rim, &alpha).unwrap();
        assert!((lhs - rhs).abs() < 1e-3, "lhs {lhs} rhs {rhs}");
    }
}
