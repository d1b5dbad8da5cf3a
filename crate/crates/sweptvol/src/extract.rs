//! Oriented extraction of phase level sets {arg ψ = s} as currents.
//!
//! The level set is the half of {Im(ψ e^{−is}) = 0} where Re(ψ e^{−is}) > 0.
//! Cells are split into simplices (two triangles per square, six Kuhn
//! tetrahedra per cube), which makes the piecewise-linear extraction
//! unambiguous and deterministic; the Re > 0 clipping is linear per element.
//! Orientation follows the phase gradient: curves run with the 90°-rotated
//! gradient of Im(ψ e^{−is}) (from negative to positive zeros), surfaces take
//! the normal on the side of increasing phase — exactly what makes the
//! boundary of every regular page reproduce the oriented zero set.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::currents::{add, cross, dot, norm, scale, sub, Chain, ShapeCurrent};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::implicit::PsiField;

const TIE_OFFSET: f64 = 1e-12;

/// Extracts the phase-s level set of ψ: an oriented polyline family on T²,
/// an oriented triangle surface on T³. Degenerate incidence (a saddle of the
/// phase on the page) is reported as a near-critical phase error.
///
/// Vertices produced by the Re-clip lie on the zero set of ψ, where one grid
/// cell sees an O(1) phase swing no matter how fine the grid; the linear
/// elements there zigzag at a scale-independent amplitude. Those rim vertices
/// are therefore snapped onto the bilinear zero-set estimate, which restores
/// first-order boundary geometry.
pub fn extract_phase_levelset(psi: &PsiField, s: f64) -> Result<ShapeCurrent> {
    let rot = Complex64::from_polar(1.0, -s);
    let g = psi.grid().clone();
    let n = g.node_count();
    let mut gv = Vec::with_capacity(n);
    let mut rv = Vec::with_capacity(n);
    for z in &psi.field.values {
        let w = z * rot;
        // deterministic tie perturbation keeps node values off the level
        let im = if w.im == 0.0 { TIE_OFFSET } else { w.im };
        gv.push(im);
        rv.push(w.re);
    }
    let zeros = crate::implicit::zero_set(psi)?;
    if g.dim() == 2 {
        extract_2d(&g, &gv, &rv, s, &zeros)
    } else {
        extract_3d(&g, &gv, &rv, s, &zeros)
    }
}

/// Nearest point on the zero set (points or polyline), by minimal images.
fn snap_to_zero_set(g: &GridSpec, zeros: &ShapeCurrent, p: [f64; 3], max_dist: f64) -> [f64; 3] {
    let mut best = max_dist;
    let mut out = p;
    match zeros {
        ShapeCurrent::OrientedPoints { positions, .. } => {
            for q in positions {
                let d = g.distance(p, *q);
                if d < best {
                    best = d;
                    out = add(p, g.min_image(*q, g.wrap(p)));
                }
            }
        }
        ShapeCurrent::PolyCurve { chains } => {
            for ch in chains {
                for i in 0..ch.segment_count() {
                    let (a, b) = ch.segment(i);
                    // localize the segment around p
                    let a_loc = add(p, g.min_image(g.wrap(a), g.wrap(p)));
                    let d = sub(b, a);
                    let dd = dot(d, d);
                    let t = if dd > 1e-30 {
                        (dot(sub(p, a_loc), d) / dd).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let q = add(a_loc, scale(d, t));
                    let dist = norm(sub(q, p));
                    if dist < best {
                        best = dist;
                        out = q;
                    }
                }
            }
        }
        ShapeCurrent::TriSurface { .. } => {}
    }
    out
}

// ── 2D: marching triangles with Re-clipping ─────────────────────────────

struct Seg {
    a: [f64; 3],
    b: [f64; 3],
    ra: f64,
    rb: f64,
}

fn extract_2d(
    g: &GridSpec,
    gv: &[f64],
    rv: &[f64],
    s: f64,
    zeros: &ShapeCurrent,
) -> Result<ShapeCurrent> {
    let h = g.h();
    let nn = g.n();
    let mut segments: Vec<Seg> = Vec::new();
    for cy in 0..nn[1] {
        for cx in 0..nn[0] {
            let i00 = g.index([cx, cy, 0]);
            let i10 = g.shift(i00, 0, 1);
            let i01 = g.shift(i00, 1, 1);
            let i11 = g.shift(i10, 1, 1);
            let p = |ix: usize, iy: usize| {
                [(cx + ix) as f64 * h[0], (cy + iy) as f64 * h[1], 0.0]
            };
            // split along the (00)-(11) diagonal
            let tris = [
                [(i00, p(0, 0)), (i10, p(1, 0)), (i11, p(1, 1))],
                [(i00, p(0, 0)), (i11, p(1, 1)), (i01, p(0, 1))],
            ];
            for t in &tris {
                march_triangle(t, gv, rv, &mut segments);
            }
        }
    }
    // Micro-segments from amplitude-collapsed cells right at a zero carry no
    // geometry; drop them before chaining.
    let hmin = h[0].min(h[1]);
    segments.retain(|sg| norm(sub(sg.b, sg.a)) > 1e-6 * hmin);

    // Chain segments by quantized endpoints. More than two incidences at a
    // well-conditioned point (|ψ| ≈ |Re ψe^{−is}| away from the level curve's
    // own zeros) means the page passes a phase saddle: near-critical s.
    // Clusters with small amplitude are the zero set itself; chains simply
    // terminate there.
    let quant = |p: [f64; 3]| -> (i64, i64) {
        let q = 1e7;
        let x = (p[0].rem_euclid(g.lengths()[0]) * q / g.lengths()[0]).round() as i64;
        let y = (p[1].rem_euclid(g.lengths()[1]) * q / g.lengths()[1]).round() as i64;
        (x % 10_000_000, y % 10_000_000)
    };
    let mut incidence: HashMap<(i64, i64), Vec<(usize, bool)>> = HashMap::new();
    for (idx, sg) in segments.iter().enumerate() {
        incidence.entry(quant(sg.a)).or_default().push((idx, false));
        incidence.entry(quant(sg.b)).or_default().push((idx, true));
    }
    let mut terminal: std::collections::HashSet<(i64, i64)> = Default::default();
    for (key, v) in &incidence {
        if v.len() > 2 {
            let rmax = v
                .iter()
                .map(|&(i, end)| if end { segments[i].rb.abs() } else { segments[i].ra.abs() })
                .fold(0.0f64, f64::max);
            if rmax > 0.3 {
                return Err(Error::NearCriticalPhase(s));
            }
            terminal.insert(*key);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    // deterministic starts: open-chain seeds first (endpoints with a single
    // incidence or at a terminal cluster), then remaining loops
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|&i| {
        let ka = quant(segments[i].a);
        let open_a = incidence[&ka].len() == 1 || terminal.contains(&ka);
        (if open_a { 0 } else { 1 }, i)
    });
    for &start in &order {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a0, b0) = (segments[start].a, segments[start].b);
        // unwrapped chain: step by minimal images
        let mut verts = vec![a0, add(a0, g.min_image(b0, a0))];
        let mut cur_key = quant(b0);
        let start_key = quant(a0);
        let mut closed = false;
        loop {
            if cur_key == start_key {
                // the explicit closure vertex (lattice image of the start)
                // stays in the chain
                closed = true;
                break;
            }
            if terminal.contains(&cur_key) {
                break;
            }
            let inc = match incidence.get(&cur_key) {
                Some(v) => v,
                None => break,
            };
            let next = inc.iter().find(|&&(i, _)| !used[i]);
            let Some(&(i, end_is_here)) = next else { break };
            used[i] = true;
            let nxt_wrapped = if end_is_here { segments[i].a } else { segments[i].b };
            let prev = *verts.last().unwrap();
            verts.push(add(prev, g.min_image(nxt_wrapped, prev)));
            cur_key = quant(nxt_wrapped);
        }
        if verts.len() >= 2 {
            chains.push(Chain { vertices: verts, closed });
        }
    }
    if chains.is_empty() {
        return Err(Error::NearCriticalPhase(s));
    }
    // Open chains end on the zero set: snap their endpoints to the bilinear
    // zero estimate, which is accurate to a fraction of a cell.
    let snap_radius = 2.0 * hmin;
    for ch in chains.iter_mut() {
        if !ch.closed {
            let first = snap_to_zero_set(g, zeros, ch.vertices[0], snap_radius);
            ch.vertices[0] = first;
            let lastidx = ch.vertices.len() - 1;
            let last = snap_to_zero_set(g, zeros, ch.vertices[lastidx], snap_radius);
            ch.vertices[lastidx] = last;
        }
    }
    Ok(ShapeCurrent::PolyCurve { chains })
}

/// Marches one linear triangle: emits the oriented, Re-clipped piece of the
/// zero level of g, with tangent along the 90°-rotated gradient of g.
fn march_triangle(
    t: &[(usize, [f64; 3]); 3],
    gv: &[f64],
    rv: &[f64],
    segments: &mut Vec<Seg>,
) {
    let vals = [gv[t[0].0], gv[t[1].0], gv[t[2].0]];
    let rvals = [rv[t[0].0], rv[t[1].0], rv[t[2].0]];
    let pos = [t[0].1, t[1].1, t[2].1];
    let mut pts: Vec<([f64; 3], f64)> = Vec::new(); // crossing + R value
    for e in [(0usize, 1usize), (1, 2), (2, 0)] {
        let (ga, gb) = (vals[e.0], vals[e.1]);
        if (ga > 0.0) != (gb > 0.0) {
            let tt = ga / (ga - gb);
            let p = add(pos[e.0], scale(sub(pos[e.1], pos[e.0]), tt));
            let r = rvals[e.0] + tt * (rvals[e.1] - rvals[e.0]);
            pts.push((p, r));
        }
    }
    if pts.len() != 2 {
        return;
    }
    // gradient of the linear interpolant
    let e1 = sub(pos[1], pos[0]);
    let e2 = sub(pos[2], pos[0]);
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    if det.abs() < 1e-30 {
        return;
    }
    let d1 = vals[1] - vals[0];
    let d2 = vals[2] - vals[0];
    let grad = [(d1 * e2[1] - d2 * e1[1]) / det, (d2 * e1[0] - d1 * e2[0]) / det];
    let tdir = [-grad[1], grad[0], 0.0];
    let (mut a, mut b) = (pts[0], pts[1]);
    if dot(tdir, sub(b.0, a.0)) < 0.0 {
        std::mem::swap(&mut a, &mut b);
    }
    // clip to R > 0 along the segment
    match (a.1 > 0.0, b.1 > 0.0) {
        (true, true) => segments.push(Seg { a: a.0, b: b.0, ra: a.1, rb: b.1 }),
        (false, false) => {}
        (true, false) => {
            let tt = a.1 / (a.1 - b.1);
            let cut = add(a.0, scale(sub(b.0, a.0), tt));
            if norm(sub(cut, a.0)) > 1e-14 {
                segments.push(Seg { a: a.0, b: cut, ra: a.1, rb: 0.0 });
            }
        }
        (false, true) => {
            let tt = a.1 / (a.1 - b.1);
            let cut = add(a.0, scale(sub(b.0, a.0), tt));
            if norm(sub(b.0, cut)) > 1e-14 {
                segments.push(Seg { a: cut, b: b.0, ra: 0.0, rb: b.1 });
            }
        }
    }
}

// ── 3D: marching Kuhn tetrahedra with Re-clipping ───────────────────────

fn extract_3d(
    g: &GridSpec,
    gv: &[f64],
    rv: &[f64],
    s: f64,
    zeros: &ShapeCurrent,
) -> Result<ShapeCurrent> {
    let h = g.h();
    let nn = g.n();
    let l = g.lengths();
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    // Weld coincident crossing points (shared tet edges across cells compute
    // identical coordinates) so the mesh has genuine shared topology for the
    // boundary operator. Keys are wrapped, so seam vertices weld too; the
    // resulting cross-seam triangles are handled by the stored periods.
    let mut weld: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let quant = move |p: [f64; 3]| -> (i64, i64, i64) {
        let q = 1e7;
        let f = |x: f64, ll: f64| ((x.rem_euclid(ll)) * q / ll).round() as i64 % 10_000_000;
        (f(p[0], l[0]), f(p[1], l[1]), f(p[2], l[2]))
    };
    // Kuhn split: six tets per cube, one per axis permutation.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut rim_flags: Vec<bool> = Vec::new();
    let mut emit = |tri: [[f64; 3]; 3], rim: [bool; 3]| {
        let mut idx = [0usize; 3];
        for (k, p) in tri.iter().enumerate() {
            let key = quant(*p);
            idx[k] = *weld.entry(key).or_insert_with(|| {
                vertices.push(*p);
                rim_flags.push(rim[k]);
                vertices.len() - 1
            });
        }
        if idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2] {
            triangles.push(idx);
        }
    };
    for cz in 0..nn[2] {
        for cy in 0..nn[1] {
            for cx in 0..nn[0] {
                let base = [cx, cy, cz];
                let node = g.index(base);
                // skip cubes whose corner signs are uniform and unclipped fast
                let mut any_neg = false;
                let mut any_pos = false;
                for dz in 0..2usize {
                    for dy in 0..2usize {
                        for dx in 0..2usize {
                            let idx = g.shift(g.shift(g.shift(node, 0, dx as isize), 1, dy as isize), 2, dz as isize);
                            if gv[idx] > 0.0 {
                                any_pos = true;
                            } else {
                                any_neg = true;
                            }
                        }
                    }
                }
                if !(any_neg && any_pos) {
                    continue;
                }
                for perm in &PERMS {
                    // cumulative corners of the Kuhn tet
                    let mut offs = [[0usize; 3]; 4];
                    for k in 1..4 {
                        offs[k] = offs[k - 1];
                        offs[k][perm[k - 1]] += 1;
                    }
                    let mut corner_idx = [0usize; 4];
                    let mut corner_pos = [[0.0f64; 3]; 4];
                    for k in 0..4 {
                        let mut idx = node;
                        for d in 0..3 {
                            idx = g.shift(idx, d, offs[k][d] as isize);
                        }
                        corner_idx[k] = idx;
                        corner_pos[k] = [
                            (base[0] + offs[k][0]) as f64 * h[0],
                            (base[1] + offs[k][1]) as f64 * h[1],
                            (base[2] + offs[k][2]) as f64 * h[2],
                        ];
                    }
                    march_tet(&corner_idx, &corner_pos, gv, rv, &mut emit);
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(Error::NearCriticalPhase(s));
    }
    let snap_radius = 2.0 * h[0].max(h[1]).max(h[2]);
    for (v, rim) in vertices.iter_mut().zip(&rim_flags) {
        if *rim {
            *v = snap_to_zero_set(g, zeros, *v, snap_radius);
        }
    }
    Ok(ShapeCurrent::TriSurface { vertices, triangles, periods: Some(l) })
}

fn march_tet(
    idx: &[usize; 4],
    pos: &[[f64; 3]; 4],
    gv: &[f64],
    rv: &[f64],
    emit: &mut impl FnMut([[f64; 3]; 3], [bool; 3]),
) {
    let vals = [gv[idx[0]], gv[idx[1]], gv[idx[2]], gv[idx[3]]];
    let rvals = [rv[idx[0]], rv[idx[1]], rv[idx[2]], rv[idx[3]]];
    let pos_mask: u8 = (0..4).fold(0, |m, k| m | ((vals[k] > 0.0) as u8) << k);
    if pos_mask == 0 || pos_mask == 0b1111 {
        return;
    }
    let crossing = |a: usize, b: usize| -> ([f64; 3], f64) {
        let t = vals[a] / (vals[a] - vals[b]);
        (
            add(pos[a], scale(sub(pos[b], pos[a]), t)),
            rvals[a] + t * (rvals[b] - rvals[a]),
        )
    };
    // reference direction toward the positive side
    let mut cpos = [0.0; 3];
    let mut cneg = [0.0; 3];
    let (mut npos, mut nneg) = (0.0, 0.0);
    for k in 0..4 {
        if (pos_mask >> k) & 1 == 1 {
            cpos = add(cpos, pos[k]);
            npos += 1.0;
        } else {
            cneg = add(cneg, pos[k]);
            nneg += 1.0;
        }
    }
    let toward_pos = sub(scale(cpos, 1.0 / npos), scale(cneg, 1.0 / nneg));
    let mut polys: Vec<Vec<([f64; 3], f64)>> = Vec::new();
    let singles: Vec<usize> = (0..4).filter(|&k| (pos_mask >> k) & 1 == 1).collect();
    match singles.len() {
        1 | 3 => {
            let lone = if singles.len() == 1 {
                singles[0]
            } else {
                (0..4).find(|&k| (pos_mask >> k) & 1 == 0).unwrap()
            };
            let others: Vec<usize> = (0..4).filter(|&k| k != lone).collect();
            polys.push(others.iter().map(|&o| crossing(lone, o)).collect());
        }
        2 => {
            // quad between the two positive and two negative corners
            let (p0, p1) = (singles[0], singles[1]);
            let negs: Vec<usize> = (0..4).filter(|&k| (pos_mask >> k) & 1 == 0).collect();
            let (q0, q1) = (negs[0], negs[1]);
            polys.push(vec![
                crossing(p0, q0),
                crossing(p0, q1),
                crossing(p1, q1),
                crossing(p1, q0),
            ]);
        }
        _ => unreachable!(),
    }
    for poly in polys {
        // fan-triangulate, orient toward the positive side, clip to R > 0
        for k in 1..poly.len() - 1 {
            let mut tri = [poly[0], poly[k], poly[k + 1]];
            let nrm = cross(sub(tri[1].0, tri[0].0), sub(tri[2].0, tri[0].0));
            if dot(nrm, toward_pos) < 0.0 {
                tri.swap(1, 2);
            }
            clip_triangle(tri, emit);
        }
    }
}

/// Clips one triangle with per-vertex R values to the half-space R > 0. Cut
/// vertices (R = 0) are labeled as rim points.
fn clip_triangle(tri: [([f64; 3], f64); 3], emit: &mut impl FnMut([[f64; 3]; 3], [bool; 3])) {
    let inside: Vec<usize> = (0..3).filter(|&k| tri[k].1 > 0.0).collect();
    let cut = |a: ([f64; 3], f64), b: ([f64; 3], f64)| -> [f64; 3] {
        let t = a.1 / (a.1 - b.1);
        add(a.0, scale(sub(b.0, a.0), t))
    };
    match inside.len() {
        0 => {}
        3 => emit([tri[0].0, tri[1].0, tri[2].0], [false; 3]),
        1 => {
            let i = inside[0];
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let a = cut(tri[i], tri[j]);
            let b = cut(tri[i], tri[k]);
            if area2(tri[i].0, a, b) > 1e-28 {
                emit([tri[i].0, a, b], [false, true, true]);
            }
        }
        2 => {
            let out = (0..3).find(|k| !inside.contains(k)).unwrap();
            let (i, j) = ((out + 1) % 3, (out + 2) % 3);
            let a = cut(tri[j], tri[out]); // on edge j-out
            let b = cut(tri[i], tri[out]); // on edge i-out
            if area2(tri[i].0, tri[j].0, a) > 1e-28 {
                emit([tri[i].0, tri[j].0, a], [false, false, true]);
            }
            if area2(tri[i].0, a, b) > 1e-28 {
                emit([tri[i].0, a, b], [false, true, true]);
            }
        }
        _ => unreachable!(),
    }
}

fn area2(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let n = cross(sub(b, a), sub(c, a));
    dot(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::{boundary, flux, ShapeCurrent};
    use crate::grid::make_grid;
    use crate::implicit::{build_psi_2d, build_psi_3d, zero_set};
    use crate::zoo;
    use std::f64::consts::TAU;

    #[test]
    fn dipole_level_curve_joins_zeros() {
        let g = make_grid(2, &[128, 128], &[1.0, 1.0]).unwrap();
        let (pts, signs) = zoo::dipole_points();
        let psi = build_psi_2d(&g, &pts, &signs, 0.05).unwrap();
        let zeros = match zero_set(&psi).unwrap() {
            ShapeCurrent::OrientedPoints { positions, .. } => positions,
            _ => panic!(),
        };
        for s in [0.4, 2.0, -1.3] {
            let page = extract_phase_levelset(&psi, s).unwrap();
            let chains = match &page {
                ShapeCurrent::PolyCurve { chains } => chains,
                _ => panic!(),
            };
            // single open polyline whose endpoints coincide with the zeros
            let open: Vec<&crate::currents::Chain> =
                chains.iter().filter(|c| !c.closed).collect();
            assert_eq!(open.len(), 1, "phase {s}: {} open chains", open.len());
            let ch = open[0];
            let first = g.wrap(*ch.vertices.first().unwrap());
            let last = g.wrap(*ch.vertices.last().unwrap());
            let h = 1.0 / 128.0;
            let d_first = zeros.iter().map(|z| g.distance(first, *z)).fold(f64::INFINITY, f64::min);
            let d_last = zeros.iter().map(|z| g.distance(last, *z)).fold(f64::INFINITY, f64::min);
            assert!(d_first <= 1.5 * h, "endpoint off the zero set: {d_first}");
            assert!(d_last <= 1.5 * h, "endpoint off the zero set: {d_last}");
            // oriented from the negative zero to the positive zero
            let d_start_neg = g.distance(first, pts[1]);
            let d_end_plus = g.distance(last, pts[0]);
            assert!(d_start_neg <= 1.5 * h, "chain must start at the − zero");
            assert!(d_end_plus <= 1.5 * h, "chain must end at the + zero");
        }
    }

    #[test]
    fn ring_page_is_disk_with_matching_boundary() {
        let g = make_grid(3, &[64, 64, 64], &[1.0, 1.0, 1.0]).unwrap();
        let r = 0.25;
        let ring = zoo::ring_curve([0.5, 0.5, 0.5], r, 96);
        let psi = build_psi_3d(&g, &ring, 0.05).unwrap();
        let page = extract_phase_levelset(&psi, 1.0).unwrap();
        let (v, t) = match &page {
            ShapeCurrent::TriSurface { vertices, triangles, .. } => (vertices, triangles),
            _ => panic!(),
        };
        let rim = boundary(v, t).unwrap();
        let total_len: f64 = rim.iter().map(|c| c.length()).sum();
        let expect = TAU * r;
        assert!(
            (total_len - expect).abs() <= 0.04 * expect,
            "rim length {total_len}, want {expect}"
        );
        // Hausdorff distance of rim vertices to the ring within 2 max(h)
        let hmax = 2.0 / 64.0;
        for c in &rim {
            for p in &c.vertices {
                let d = ring
                    .vertices
                    .iter()
                    .map(|q| g.distance(*p, *q))
                    .fold(f64::INFINITY, f64::min);
                assert!(d <= hmax, "rim vertex {d} from the zero curve");
            }
        }
    }

    #[test]
    fn page_flux_equals_lambda_flux_for_exact_field() {
        // For exact divergence-free u the flux through every regular page is
        // the same and equals ⟨Λ(ψ), ι_u μ⟩ / 2π.
        let g = make_grid(2, &[128, 128], &[1.0, 1.0]).unwrap();
        let (pts, signs) = zoo::dipole_points();
        let psi = build_psi_2d(&g, &pts, &signs, 0.05).unwrap();
        let stream = crate::trig::TrigPoly::single(
            [1.0, 1.0, 1.0],
            0.4,
            [(1, crate::trig::Phase::Cos), (1, crate::trig::Phase::Sin), (0, crate::trig::Phase::Cos)],
        );
        let (u, _, _) = zoo::rotated_gradient_2d(&stream);
        let uf = crate::grid::VectorField::from_fn(&g, u.clone());
        let lf = crate::implicit::lambda_flux(&psi, &uf).unwrap() / TAU;
        let mut vals = Vec::new();
        for k in 0..6 {
            let s = TAU * (k as f64 + 0.37) / 6.0;
            let page = extract_phase_levelset(&psi, s).unwrap();
            vals.push(flux(&page, &u).unwrap());
        }
        for v in &vals {
            assert!(
                (v - lf).abs() <= 0.03 * lf.abs().max(0.02),
                "page flux {v} vs lambda flux {lf}"
            );
        }
    }
}
