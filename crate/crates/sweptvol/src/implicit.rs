//! Implicit representations of codimension-2 shapes: complex fields on the
//! torus whose oriented zero sets are the shapes.
//!
//! Construction goes through quantized face charges and a Coulomb-gauge edge
//! form: the charges make every plaquette winding an exact integer, the
//! spanning-tree integration turns the edge form into a single-valued phase
//! (after snapping the harmonic periods to multiples of 2π), and a tanh
//! amplitude profile keeps the field well conditioned away from the zero
//! tube. The connection 1-form on this space integrates the infinitesimal
//! phase shift against the volume form; evaluated on group-generated
//! velocities it splits into a vertical part ∫ Im a μ and the flux of the
//! circle differential, which is how it is computed by default.

use num_complex::Complex64;
use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::currents::{add, cross, dot, norm, scale, sub, Chain, ShapeCurrent};
use crate::error::{Error, Result};
use crate::explicit::Curve3D;
use crate::grid::{
    edge_flux_quadrature, gradient_central, integrate, perm_sign, ComplexField, EdgeOneForm,
    FaceTwoForm, GridSpec, Kahan, ScalarField, VectorField,
};
use crate::spectral::solve_coulomb_oneform;

/// An implicit representation: complex node field with a nondegenerate,
/// nonempty zero set, plus the core radius of its amplitude profile.
#[derive(Debug, Clone)]
pub struct PsiField {
    pub field: ComplexField,
    pub eps: f64,
}

/// Tangent data at a ψ: either a raw field ψ̇ or a generated pair (u, a)
/// meaning ψ̇ = −ι_u dψ + aψ.
#[derive(Debug, Clone)]
pub enum ImplicitVelocity {
    Raw(ComplexField),
    Generated { u: VectorField, a: ComplexField },
}

/// Wraps a generated velocity. The raw realization by central differences is
/// available through [`realize_raw`].
pub fn make_velocity(u: VectorField, a: ComplexField) -> ImplicitVelocity {
    ImplicitVelocity::Generated { u, a }
}

/// Central-difference realization −ι_u dψ + aψ of a generated velocity.
pub fn realize_raw(psi: &PsiField, vel: &ImplicitVelocity) -> Result<ComplexField> {
    match vel {
        ImplicitVelocity::Raw(f) => Ok(f.clone()),
        ImplicitVelocity::Generated { u, a } => {
            let g = &psi.field.grid;
            if &u.grid != g || &a.grid != g {
                return Err(Error::GridMismatch("realize_raw".into()));
            }
            let grad = gradient_central(&psi.field);
            let n = g.node_count();
            let mut values = Vec::with_capacity(n);
            for i in 0..n {
                let mut v = a.values[i] * psi.field.values[i];
                for d in 0..g.dim() {
                    v -= grad[d * n + i] * u.values[i][d];
                }
                values.push(v);
            }
            Ok(ComplexField { grid: g.clone(), values })
        }
    }
}

impl PsiField {
    pub fn grid(&self) -> &GridSpec {
        &self.field.grid
    }

    /// Checks the representability invariants: finite values, all plaquette
    /// windings in {−1, 0, +1} and at least one nonzero.
    pub fn validate(&self) -> Result<()> {
        if !self.field.is_finite() {
            return Err(Error::NonFinite("psi field"));
        }
        let w = face_windings(self)?;
        let nonzero = w.iter().filter(|&&x| x != 0).count();
        if nonzero == 0 {
            return Err(Error::Grid("zero set empty: field winds nowhere".into()));
        }
        Ok(())
    }
}

/// Principal-branch phase increments of ψ along every grid edge:
/// Arg(ψ_head / ψ_tail) ∈ (−π, π]. Total circulation around any plaquette is
/// 2π × its integer winding.
pub fn circle_differential(psi: &PsiField) -> Result<EdgeOneForm> {
    let g = psi.grid().clone();
    let n = g.node_count();
    let mut out = EdgeOneForm::zeros(&g);
    for d in 0..g.dim() {
        for i in 0..n {
            let tail = psi.field.values[i];
            let head = psi.field.values[g.shift(i, d, 1)];
            // Arg(head/tail) via the product avoids overflow; reject edges
            // buried in the zero tube where the phase is meaningless.
            let prod = head * tail.conj();
            if prod.norm() < 1e-16 {
                return Err(Error::NonFinite("circle differential on a vanishing edge"));
            }
            out.values[d * n + i] = prod.arg();
        }
    }
    Ok(out)
}

/// Integer winding per face: plaquette circulation of the principal-branch
/// increments divided by 2π. Errors on |w| ≥ 2 (degenerate zero).
pub fn face_windings(psi: &PsiField) -> Result<Vec<i64>> {
    let lam = circle_differential(psi)?;
    let circ = lam.exterior_derivative();
    let mut out = Vec::with_capacity(circ.values.len());
    for (idx, &c) in circ.values.iter().enumerate() {
        let w = c / TAU;
        let r = w.round();
        if (w - r).abs() > 1e-6 {
            return Err(Error::NonFinite("non-integer plaquette winding"));
        }
        let wi = r as i64;
        if wi.abs() >= 2 {
            return Err(Error::DegenerateZero { face: idx % psi.grid().node_count(), winding: wi });
        }
        out.push(wi);
    }
    Ok(out)
}

// ── Construction ─────────────────────────────────────────────────────────

/// Snaps the harmonic periods of λ to multiples of 2π so that the integrated
/// phase is single-valued around every homology cycle.
fn snap_harmonic_periods(lam: &mut EdgeOneForm) {
    let g = lam.grid.clone();
    let n = g.node_count();
    for d in 0..g.dim() {
        let p = lam.period(d);
        let c = p - TAU * (p / TAU).round();
        if c.abs() > 0.0 {
            let per_edge = c / g.n()[d] as f64;
            for i in 0..n {
                lam.values[d * n + i] -= per_edge;
            }
        }
    }
}

/// Integrates an edge form to a node phase along a breadth-first spanning
/// tree rooted at node 0 (root phase 0). The phase is single-valued up to
/// 2π because the form's plaquette circulations and homology periods are
/// multiples of 2π.
fn spanning_tree_phase(lam: &EdgeOneForm) -> ScalarField {
    let g = lam.grid.clone();
    let n = g.node_count();
    let mut theta = vec![0.0f64; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        for d in 0..g.dim() {
            let fwd = g.shift(i, d, 1);
            if !seen[fwd] {
                seen[fwd] = true;
                theta[fwd] = theta[i] + lam.at(d, i);
                queue.push_back(fwd);
            }
            let bwd = g.shift(i, d, -1);
            if !seen[bwd] {
                seen[bwd] = true;
                theta[bwd] = theta[i] - lam.at(d, bwd);
                queue.push_back(bwd);
            }
        }
    }
    ScalarField { grid: g, values: theta }
}

/// Periodic distance field to a finite point set.
fn distance_to_points(grid: &GridSpec, points: &[[f64; 3]]) -> ScalarField {
    ScalarField::from_fn(grid, |p| {
        points
            .iter()
            .map(|&q| grid.distance(p, q))
            .fold(f64::INFINITY, f64::min)
    })
}

/// Periodic distance field to a closed polyline (minimum over segments, each
/// segment anchored to the query point by its minimal image).
fn distance_to_curve(grid: &GridSpec, curve: &Curve3D) -> ScalarField {
    let nseg = curve.vertices.len();
    let segs: Vec<([f64; 3], [f64; 3])> = (0..nseg)
        .map(|i| {
            let a = curve.vertices[i];
            let b = curve.vertices[(i + 1) % nseg];
            (a, sub(b, a))
        })
        .collect();
    ScalarField::from_fn(grid, |p| {
        let mut best = f64::INFINITY;
        for &(a, d) in &segs {
            // anchor the segment start at its minimal image relative to p
            let rel = grid.min_image(a, p); // a − p wrapped
            let e = rel; // segment start relative to p
            // closest point on segment e + t·d to the origin
            let dd = dot(d, d);
            let t = if dd > 1e-30 { (-dot(e, d) / dd).clamp(0.0, 1.0) } else { 0.0 };
            let q = add(e, scale(d, t));
            best = best.min(norm(q));
        }
        best
    })
}

fn tanh_profile(d: &ScalarField, eps: f64) -> ScalarField {
    ScalarField {
        grid: d.grid.clone(),
        values: d.values.iter().map(|&x| (x / eps).tanh()).collect(),
    }
}

fn assemble_psi(
    grid: &GridSpec,
    charges: FaceTwoForm,
    rho: ScalarField,
    eps: f64,
) -> Result<PsiField> {
    let mut lam = solve_coulomb_oneform(&charges)?;
    snap_harmonic_periods(&mut lam);
    let theta = spanning_tree_phase(&lam);
    // Nodes landing exactly on the zero set keep a tiny positive amplitude so
    // the phase stays defined there; the winding structure is unaffected.
    let values = rho
        .values
        .iter()
        .zip(&theta.values)
        .map(|(&r, &t)| Complex64::from_polar(r.max(1e-6), t))
        .collect();
    let psi = PsiField { field: ComplexField { grid: grid.clone(), values }, eps };
    psi.validate()?;
    Ok(psi)
}

/// Builds an implicit representation of signed points on T². Requires total
/// index zero; each point charges the plaquette containing it.
pub fn build_psi_2d(
    grid: &GridSpec,
    positions: &[[f64; 3]],
    signs: &[i8],
    eps: f64,
) -> Result<PsiField> {
    if grid.dim() != 2 {
        return Err(Error::Grid("build_psi_2d needs a 2-dimensional grid".into()));
    }
    if positions.len() != signs.len() {
        return Err(Error::SizeMismatch("points vs signs".into()));
    }
    let total: i64 = signs.iter().map(|&s| s as i64).sum();
    if total != 0 {
        return Err(Error::IndexObstruction(total));
    }
    let h = grid.h();
    let mut charges = FaceTwoForm::zeros(grid);
    let mut cells = std::collections::HashMap::new();
    for (p, &s) in positions.iter().zip(signs) {
        let q = grid.wrap(*p);
        let cell = grid.index([
            ((q[0] / h[0]) as usize).min(grid.n()[0] - 1),
            ((q[1] / h[1]) as usize).min(grid.n()[1] - 1),
            0,
        ]);
        *cells.entry(cell).or_insert(0i64) += s as i64;
        *charges.at_mut(0, cell) += TAU * s as f64;
    }
    if cells.values().any(|&c| c == 0) || cells.len() != positions.len() {
        return Err(Error::Grid(
            "points too close for this resolution: cancelling or stacked plaquette charges".into(),
        ));
    }
    let d = distance_to_points(grid, positions);
    let rho = tanh_profile(&d, eps);
    assemble_psi(grid, charges, rho, eps)
}

/// Signed face crossings of a closed polyline, as 2π-quantized face charges.
///
/// The polyline is walked through the cell complex: every plane crossing
/// steps the current cell by one along the crossing axis and charges the
/// face between the two cells with ±2π (signed by direction × permutation
/// parity of (transverse pair, axis)). Assigning faces through the cell path
/// rather than by flooring hit coordinates keeps the charge 2-form exactly
/// closed even when vertices or tangencies land on grid planes.
pub fn curve_face_charges(grid: &GridSpec, curve: &Curve3D) -> FaceTwoForm {
    let h = grid.h();
    let n = grid.n();
    let l = grid.lengths();
    let mut charges = FaceTwoForm::zeros(grid);
    let nv = curve.vertices.len();
    if nv == 0 {
        return charges;
    }
    // Unwrapped vertex chain with the closure snapped exactly: the final
    // position is forced to the lattice image of the start so that the
    // signed crossing counts telescope to exactly zero (mod the homology
    // winding) even when vertices sit on grid planes.
    let mut q = Vec::with_capacity(nv + 1);
    q.push(grid.wrap(curve.vertices[0]));
    for i in 1..nv {
        let prev = q[i - 1];
        let step = grid.min_image(grid.wrap(curve.vertices[i]), grid.wrap(prev));
        q.push(add(prev, step));
    }
    let naive_end = {
        let prev = q[nv - 1];
        let step = grid.min_image(q[0], grid.wrap(prev));
        add(prev, step)
    };
    let mut end = q[0];
    for d in 0..3 {
        end[d] += l[d] * ((naive_end[d] - q[0][d]) / l[d]).round();
    }
    q.push(end);

    let mut cell: [i64; 3] = [0; 3];
    for d in 0..3 {
        cell[d] = ((q[0][d] / h[d]).floor() as i64).rem_euclid(n[d] as i64);
    }
    for i in 0..nv {
        let (a, b) = (q[i], q[i + 1]);
        // plane crossings of this segment, ordered along it
        let mut crossings: Vec<(f64, usize, f64)> = Vec::new(); // (t, axis, dir)
        for c_axis in 0..3 {
            let x0 = a[c_axis] / h[c_axis];
            let x1 = b[c_axis] / h[c_axis];
            if x0 == x1 {
                continue;
            }
            let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
            let mut k = lo.floor();
            while k <= hi.ceil() {
                // planes shifted down by an infinitesimal: crossed iff lo < k ≤ hi
                if lo < k && k <= hi {
                    let t = (k - x0) / (x1 - x0);
                    crossings.push((t, c_axis, (x1 - x0).signum()));
                }
                k += 1.0;
            }
        }
        crossings.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        for (_, c_axis, dir) in crossings {
            let next_cell_c = (cell[c_axis] + dir as i64).rem_euclid(n[c_axis] as i64);
            // face between the two cells sits at the higher c-index cell base
            let mut coords = [cell[0] as usize, cell[1] as usize, cell[2] as usize];
            coords[c_axis] = if dir > 0.0 { next_cell_c as usize } else { cell[c_axis] as usize };
            let (ax, bx) = match c_axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let pair = grid
                .pairs()
                .iter()
                .position(|&(x, y)| (x, y) == (ax, bx))
                .expect("face pair");
            let face = grid.index(coords);
            *charges.at_mut(pair, face) += TAU * dir * perm_sign(ax, bx, c_axis);
            cell[c_axis] = next_cell_c;
        }
    }
    charges
}

/// Builds an implicit representation of a closed curve in T³. The curve must
/// be null-homologous (zero net crossings through every axis plane).
pub fn build_psi_3d(grid: &GridSpec, curve: &Curve3D, eps: f64) -> Result<PsiField> {
    if grid.dim() != 3 {
        return Err(Error::Grid("build_psi_3d needs a 3-dimensional grid".into()));
    }
    let charges = curve_face_charges(grid, curve);
    // Homology check with a friendlier error than the solver's.
    let mut totals = [0i64; 3];
    for (p, &(a, b)) in grid.pairs().iter().enumerate() {
        let c = 3 - a - b;
        let s = charges.cycle_sum(p) / TAU;
        totals[c] = s.round() as i64;
    }
    if totals.iter().any(|&t| t != 0) {
        return Err(Error::NonExactHomology(totals));
    }
    let d = distance_to_curve(grid, curve);
    let rho = tanh_profile(&d, eps);
    assemble_psi(grid, charges, rho, eps)
}

// ── Zero-set extraction ──────────────────────────────────────────────────

/// Sub-cell zero of the bilinear interpolant on a plaquette with corner
/// values (z00, z10, z11, z01) in cycle order; returns (ξ, υ) ∈ [0,1]².
fn bilinear_zero(z00: Complex64, z10: Complex64, z11: Complex64, z01: Complex64) -> (f64, f64) {
    let f = |x: f64, y: f64| -> Complex64 {
        z00 * (1.0 - x) * (1.0 - y) + z10 * x * (1.0 - y) + z11 * x * y + z01 * (1.0 - x) * y
    };
    let (mut x, mut y) = (0.5f64, 0.5f64);
    for _ in 0..40 {
        let v = f(x, y);
        let dx = (z10 - z00) * (1.0 - y) + (z11 - z01) * y;
        let dy = (z01 - z00) * (1.0 - x) + (z11 - z10) * x;
        // Solve the 2×2 real system [Re dx, Re dy; Im dx, Im dy]·Δ = −v.
        let det = dx.re * dy.im - dy.re * dx.im;
        if det.abs() < 1e-30 {
            break;
        }
        let ux = (-v.re * dy.im + v.im * dy.re) / det;
        let uy = (-dx.re * v.im + dx.im * v.re) / det;
        x = (x + ux).clamp(0.0, 1.0);
        y = (y + uy).clamp(0.0, 1.0);
        if v.norm() < 1e-14 {
            break;
        }
    }
    (x, y)
}

/// Extracts the oriented zero set: signed sub-cell points for m = 2, chained
/// oriented closed polylines through pierced faces for m = 3.
pub fn zero_set(psi: &PsiField) -> Result<ShapeCurrent> {
    let g = psi.grid().clone();
    let w = face_windings(psi)?;
    let n = g.node_count();
    let h = g.h();
    if g.dim() == 2 {
        let mut positions = Vec::new();
        let mut signs = Vec::new();
        for i in 0..n {
            if w[i] == 0 {
                continue;
            }
            let c = g.coords(i);
            let z00 = psi.field.values[i];
            let z10 = psi.field.values[g.shift(i, 0, 1)];
            let z11 = psi.field.values[g.shift(g.shift(i, 0, 1), 1, 1)];
            let z01 = psi.field.values[g.shift(i, 1, 1)];
            let (x, y) = bilinear_zero(z00, z10, z11, z01);
            positions.push([
                (c[0] as f64 + x) * h[0],
                (c[1] as f64 + y) * h[1],
                0.0,
            ]);
            signs.push(w[i] as i8);
        }
        if positions.is_empty() {
            return Err(Error::Grid("zero set empty".into()));
        }
        Ok(ShapeCurrent::OrientedPoints { positions, signs })
    } else {
        // Pierced faces with sub-face puncture points and crossing directions.
        #[derive(Clone, Copy)]
        struct Puncture {
            point: [f64; 3],
            from_cell: usize,
            to_cell: usize,
        }
        let mut punctures: Vec<(usize, Puncture)> = Vec::new(); // (face key, data)
        for (p, &(a, b)) in g.pairs().iter().enumerate() {
            let c_axis = 3 - a - b;
            for i in 0..n {
                let wi = w[p * n + i];
                if wi == 0 {
                    continue;
                }
                let z00 = psi.field.values[i];
                let z10 = psi.field.values[g.shift(i, a, 1)];
                let z11 = psi.field.values[g.shift(g.shift(i, a, 1), b, 1)];
                let z01 = psi.field.values[g.shift(i, b, 1)];
                let (x, y) = bilinear_zero(z00, z10, z11, z01);
                let cc = g.coords(i);
                let mut point = [0.0f64; 3];
                point[a] = (cc[a] as f64 + x) * h[a];
                point[b] = (cc[b] as f64 + y) * h[b];
                point[c_axis] = cc[c_axis] as f64 * h[c_axis];
                // crossing direction along axis c
                let dir = wi as f64 * perm_sign(a, b, c_axis);
                let below = g.shift(i, c_axis, -1);
                let (from_cell, to_cell) = if dir > 0.0 { (below, i) } else { (i, below) };
                punctures.push((p * n + i, Puncture { point, from_cell, to_cell }));
            }
        }
        if punctures.is_empty() {
            return Err(Error::Grid("zero set empty".into()));
        }
        punctures.sort_by_key(|&(k, _)| k);
        // cell → (incoming puncture idx, outgoing puncture idx)
        let mut incoming: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        let mut outgoing: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for (idx, &(_, pu)) in punctures.iter().enumerate() {
            incoming.entry(pu.to_cell).or_default().push(idx);
            outgoing.entry(pu.from_cell).or_default().push(idx);
        }
        for (&cell, ins) in &incoming {
            let outs = outgoing.get(&cell).map_or(0, |v| v.len());
            if ins.len() != 1 || outs != 1 {
                return Err(Error::UnmatchedPunctures { cell, count: ins.len() + outs });
            }
        }
        for (&cell, outs) in &outgoing {
            if !incoming.contains_key(&cell) {
                return Err(Error::UnmatchedPunctures { cell, count: outs.len() });
            }
        }
        let mut used = vec![false; punctures.len()];
        let mut chains = Vec::new();
        for start in 0..punctures.len() {
            if used[start] {
                continue;
            }
            // unwrap the chain by minimal-image steps; close with the lattice
            // image of the first vertex
            let mut verts: Vec<[f64; 3]> = Vec::new();
            let mut cur = start;
            loop {
                used[cur] = true;
                let p = punctures[cur].1.point;
                match verts.last() {
                    None => verts.push(p),
                    Some(&prev) => {
                        let step = g.min_image(p, g.wrap(prev));
                        verts.push([prev[0] + step[0], prev[1] + step[1], prev[2] + step[2]]);
                    }
                }
                let cell = punctures[cur].1.to_cell;
                let next = outgoing[&cell][0];
                if next == start {
                    let first = verts[0];
                    let prev = *verts.last().unwrap();
                    let step = g.min_image(g.wrap(first), g.wrap(prev));
                    verts.push([prev[0] + step[0], prev[1] + step[1], prev[2] + step[2]]);
                    break;
                }
                if used[next] {
                    return Err(Error::UnmatchedPunctures { cell, count: 0 });
                }
                cur = next;
            }
            chains.push(Chain { vertices: verts, closed: true });
        }
        Ok(ShapeCurrent::PolyCurve { chains })
    }
}

// ── The connection 1-form ────────────────────────────────────────────────

/// Flux pairing of the circle-differential current with ι_u μ:
/// ⟨Λ(ψ), ι_u μ⟩ = ∫ (ι_u λ_ψ) μ by edge-averaged quadrature.
pub fn lambda_flux(psi: &PsiField, u: &VectorField) -> Result<f64> {
    let lam = circle_differential(psi)?;
    edge_flux_quadrature(&lam, u)
}

/// The connection 1-form Θ on implicit representations.
///
/// Generated velocities use the exact split
/// Θ(−ι_u dψ + aψ) = (1/2π)(∫ Im a μ − ⟨Λ(ψ), ι_u μ⟩); the vertical part is
/// exact to round-off, which is what makes Θ(icψ) = c·Vol/2π reproducible.
///
/// Raw velocities use node quadrature of Im(ψ̇ ψ̄)/|ψ|² with a smooth window
/// that turns off within the eps-tube of the zero set, plus a local
/// polar-coordinate model of the excluded (integrable 1/r) region built from
/// the linearized dψ and ψ̇ at each zero sample. Accuracy near zeros is O(h).
pub fn theta(psi: &PsiField, vel: &ImplicitVelocity) -> Result<f64> {
    match vel {
        ImplicitVelocity::Generated { u, a } => {
            let g = psi.grid();
            if &u.grid != g || &a.grid != g {
                return Err(Error::GridMismatch("theta".into()));
            }
            let im_a = ScalarField {
                grid: g.clone(),
                values: a.values.iter().map(|z| z.im).collect(),
            };
            let vertical = integrate(&im_a)?;
            let flux = lambda_flux(psi, u)?;
            Ok((vertical - flux) / TAU)
        }
        ImplicitVelocity::Raw(psidot) => theta_raw(psi, psidot),
    }
}

/// Smooth tube window in ρ = d/eps: 0 for ρ ≤ 0.25, 1 for ρ ≥ 0.75.
fn tube_window(rho: f64) -> f64 {
    1.0 - crate::zoo::smooth_plateau(rho, 0.25, 0.75)
}

/// Zero-set samples with local frames for the singular model: position,
/// weight (1 per point / local segment length), and an orthonormal basis of
/// the normal plane (full plane for m = 2).
pub(crate) struct ZeroSample {
    pub(crate) point: [f64; 3],
    pub(crate) weight: f64,
    pub(crate) frame: [[f64; 3]; 2],
}

pub(crate) fn zero_samples(psi: &PsiField) -> Result<Vec<ZeroSample>> {
    match zero_set(psi)? {
        ShapeCurrent::OrientedPoints { positions, .. } => Ok(positions
            .into_iter()
            .map(|p| ZeroSample {
                point: p,
                weight: 1.0,
                frame: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            })
            .collect()),
        ShapeCurrent::PolyCurve { chains } => {
            let g = psi.grid();
            let mut out = Vec::new();
            for ch in &chains {
                let vs = ch.unique_vertices();
                let nv = vs.len();
                if nv < 3 {
                    continue;
                }
                for i in 0..nv {
                    let prev = vs[(i + nv - 1) % nv];
                    let here = vs[i];
                    let next = vs[(i + 1) % nv];
                    let t = g.min_image(next, prev);
                    let tl = norm(t);
                    if tl < 1e-14 {
                        continue;
                    }
                    let that = scale(t, 1.0 / tl);
                    // deterministic normal frame: cross with the least-aligned axis
                    let mut axis = [0.0; 3];
                    let k = (0..3)
                        .min_by(|&a, &b| that[a].abs().partial_cmp(&that[b].abs()).unwrap())
                        .unwrap();
                    axis[k] = 1.0;
                    let n1 = {
                        let c = cross(axis, that);
                        scale(c, 1.0 / norm(c))
                    };
                    let n2 = cross(that, n1);
                    let w = 0.5 * (norm(g.min_image(next, here)) + norm(g.min_image(here, prev)));
                    out.push(ZeroSample { point: here, weight: w, frame: [n1, n2] });
                }
            }
            Ok(out)
        }
        ShapeCurrent::TriSurface { .. } => unreachable!("zero sets are points or curves"),
    }
}

/// Periodic multilinear interpolation of a complex node array at point p.
pub(crate) fn interp_complex_at(grid: &GridSpec, values: &[Complex64], p: [f64; 3]) -> Complex64 {
    let h = grid.h();
    let n = grid.n();
    let m = grid.dim();
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for d in 0..m {
        let x = p[d].rem_euclid(grid.lengths()[d]) / h[d];
        let i = x.floor() as usize % n[d];
        base[d] = i;
        frac[d] = x - x.floor();
    }
    let corners = 1usize << m;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..corners {
        let mut idx = base;
        let mut wgt = 1.0;
        for d in 0..m {
            if (c >> d) & 1 == 1 {
                idx[d] = (base[d] + 1) % n[d];
                wgt *= frac[d];
            } else {
                wgt *= 1.0 - frac[d];
            }
        }
        acc += values[grid.index(idx)] * wgt;
    }
    acc
}

fn theta_raw(psi: &PsiField, psidot: &ComplexField) -> Result<f64> {
    let g = psi.grid().clone();
    if psidot.grid != g {
        return Err(Error::GridMismatch("theta raw".into()));
    }
    if !psidot.is_finite() {
        return Err(Error::NonFinite("theta raw velocity"));
    }
    let eps = psi.eps;
    let samples = zero_samples(psi)?;
    // distance to the extracted zero set (points or polyline vertices suffice
    // at window resolution: vertices are ≤ one cell apart on the curve)
    let pts: Vec<[f64; 3]> = samples.iter().map(|s| s.point).collect();
    let mut acc = Kahan::new();
    for i in 0..g.node_count() {
        let p = g.position(i);
        let mut dmin = f64::INFINITY;
        for q in &pts {
            dmin = dmin.min(g.distance(p, *q));
        }
        let wgt = tube_window(dmin / eps);
        if wgt == 0.0 {
            continue;
        }
        let z = psi.field.values[i];
        let nz = z.norm_sqr();
        if nz < 1e-16 {
            continue;
        }
        acc.add(wgt * (psidot.values[i] * z.conj()).im / nz);
    }
    let mut total = acc.sum() * g.cell_volume();

    // Window-mass radial integrals: w1 = ∫(1−W)dρ, w2 = ∫(1−W)ρ dρ.
    let (mut w1, mut w2) = (0.0, 0.0);
    let steps = 4096;
    for k in 0..steps {
        let rho = (k as f64 + 0.5) / steps as f64;
        let c = 1.0 - tube_window(rho);
        w1 += c / steps as f64;
        w2 += c * rho / steps as f64;
    }
    let (c1, c2) = (eps * w1, eps * eps * w2);

    // Local polar model of the excluded region around each zero sample. The
    // integrand Im(ψ̇ ψ̄)/|ψ|² at radius r in normal direction n̂ is
    // Im((w0 + r Dw n̂) conj(A n̂))/(r |A n̂|²) with A the linearized dψ.
    let grad_psi = gradient_central(&psi.field);
    let grad_dot = gradient_central(psidot);
    let nn = g.node_count();
    let nphi = 64;
    for s in &samples {
        let w0 = interp_complex_at(&g, &psidot.values, s.point);
        let mut a_dir = [Complex64::new(0.0, 0.0); 2];
        let mut d_dir = [Complex64::new(0.0, 0.0); 2];
        for (j, nvec) in s.frame.iter().enumerate() {
            for d in 0..g.dim() {
                let ga = interp_complex_at(&g, &grad_psi[d * nn..(d + 1) * nn], s.point);
                let gd = interp_complex_at(&g, &grad_dot[d * nn..(d + 1) * nn], s.point);
                a_dir[j] += ga * nvec[d];
                d_dir[j] += gd * nvec[d];
            }
        }
        let (mut i1, mut i2) = (0.0, 0.0);
        for k in 0..nphi {
            let phi = TAU * k as f64 / nphi as f64;
            let an = a_dir[0] * phi.cos() + a_dir[1] * phi.sin();
            let dn = d_dir[0] * phi.cos() + d_dir[1] * phi.sin();
            let denom = an.norm_sqr();
            if denom < 1e-20 {
                continue;
            }
            i1 += (w0 * an.conj()).im / denom;
            i2 += (dn * an.conj()).im / denom;
        }
        let dphi = TAU / nphi as f64;
        total += s.weight * (c1 * i1 + c2 * i2) * dphi;
    }
    Ok(total / TAU)
}

// ── Structure-group action ───────────────────────────────────────────────

/// Acts by a constant phase and integer powers of the unit-modulus harmonic
/// factors e^{2πi x_d / L_d}: the zero set and all plaquette windings are
/// unchanged, while the circle differential shifts by the harmonic form
/// Σ 2π k_d dx_d / L_d.
pub fn group_act(psi: &PsiField, c: f64, k: &[i64]) -> Result<PsiField> {
    let g = psi.grid().clone();
    if k.len() != g.dim() {
        return Err(Error::SizeMismatch("one integer per torus axis".into()));
    }
    let l = g.lengths();
    let values = (0..g.node_count())
        .map(|i| {
            let p = g.position(i);
            let mut phase = c;
            for d in 0..g.dim() {
                phase += TAU * k[d] as f64 * p[d] / l[d];
            }
            psi.field.values[i] * Complex64::from_polar(1.0, phase)
        })
        .collect();
    Ok(PsiField { field: ComplexField { grid: g, values }, eps: psi.eps })
}

/// Conformal multiplication by an arbitrary nowhere-zero factor ζ.
pub fn conformal_multiply(psi: &PsiField, zeta: impl Fn([f64; 3]) -> Complex64) -> PsiField {
    let g = psi.grid().clone();
    let values = (0..g.node_count())
        .map(|i| psi.field.values[i] * zeta(g.position(i)))
        .collect();
    PsiField { field: ComplexField { grid: g, values }, eps: psi.eps }
}
