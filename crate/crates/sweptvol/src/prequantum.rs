//! The volume-bundle connection over the explicit shape space: horizontal
//! projection and lifts of velocity schedules, holonomy of closed loops with
//! its swept-volume estimators, finite-difference exterior derivatives of
//! 1-forms on shape and field families, the zero-set presymplectic formula,
//! and the horizontal Hamiltonian step of the binormal flow.
//!
//! Lifts integrate with midpoint RK2 and re-apply the horizontal projection
//! at every substep evaluation, so the measured connection value of each
//! applied velocity is zero to round-off. Holonomy is measured as the
//! principal-branch phase-volume (1/2π) ∫ Arg(ψ_T/ψ₀) μ, flagged when the
//! phase ratio concentrates near the branch cut.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::currents::{add, scale, ShapeCurrent};
use crate::error::{Error, Result};
use crate::explicit::{binormal_velocity, mw_form, Curve3D, ExplicitShape, Points2D};
use crate::grid::{ComplexField, GridSpec, Kahan, VectorField};
use crate::implicit::{
    face_windings, make_velocity, realize_raw, theta, zero_samples, zero_set, ImplicitVelocity,
    PsiField,
};

/// Ambient velocity field given in closed form.
pub type AmbientField = Box<dyn Fn([f64; 3]) -> [f64; 3]>;

/// One leg of a velocity schedule: flow along `u` (optionally with a complex
/// multiplier part `a`) for a signed `duration` in `steps` integrator steps.
pub struct Leg {
    pub u: AmbientField,
    pub a: Option<Box<dyn Fn([f64; 3]) -> Complex64>>,
    pub duration: f64,
    pub steps: usize,
}

impl Leg {
    pub fn translation(dir: [f64; 3], duration: f64, steps: usize) -> Leg {
        Leg { u: Box::new(move |_| dir), a: None, duration, steps }
    }
}

/// A 1-parameter velocity schedule (the discrete path family driving lifts).
pub struct Schedule {
    pub legs: Vec<Leg>,
}

/// Projects a velocity onto the horizontal distribution:
/// ψ̇ ↦ ψ̇ − i (2π Θ(ψ, ψ̇) / Vol) ψ, after which Θ vanishes to round-off.
pub fn horizontal_project(psi: &PsiField, vel: &ImplicitVelocity) -> Result<ImplicitVelocity> {
    let th = theta(psi, vel)?;
    let c = TAU * th / psi.grid().volume();
    match vel {
        ImplicitVelocity::Raw(f) => {
            let values = f
                .values
                .iter()
                .zip(&psi.field.values)
                .map(|(v, z)| v - Complex64::new(0.0, c) * z)
                .collect();
            Ok(ImplicitVelocity::Raw(ComplexField { grid: f.grid.clone(), values }))
        }
        ImplicitVelocity::Generated { u, a } => {
            let values = a.values.iter().map(|z| z - Complex64::new(0.0, c)).collect();
            Ok(ImplicitVelocity::Generated {
                u: u.clone(),
                a: ComplexField { grid: a.grid.clone(), values },
            })
        }
    }
}

fn winding_count(psi: &PsiField) -> Result<usize> {
    Ok(face_windings(psi)?.iter().filter(|&&w| w != 0).count())
}

fn add_scaled(psi: &PsiField, vel: &ComplexField, dt: f64) -> PsiField {
    PsiField {
        field: ComplexField {
            grid: psi.field.grid.clone(),
            values: psi
                .field
                .values
                .iter()
                .zip(&vel.values)
                .map(|(z, v)| z + v * dt)
                .collect(),
        },
        eps: psi.eps,
    }
}

/// One horizontal RK2 (midpoint) step along a generated velocity field.
/// Returns the new field and the connection value of the applied velocity,
/// measured at the midpoint state (zero to round-off by construction).
pub fn horizontal_step(
    psi: &PsiField,
    u: &VectorField,
    a: Option<&ComplexField>,
    dt: f64,
) -> Result<(PsiField, f64)> {
    let g = psi.grid().clone();
    let a0 = a.cloned().unwrap_or_else(|| ComplexField::zeros(&g));
    let gen = make_velocity(u.clone(), a0);
    let k1 = horizontal_project(psi, &gen)?;
    let k1_raw = realize_raw(psi, &k1)?;
    let mid = add_scaled(psi, &k1_raw, 0.5 * dt);
    let k2 = horizontal_project(&mid, &gen)?;
    let residual = theta(&mid, &k2)?;
    let k2_raw = realize_raw(&mid, &k2)?;
    Ok((add_scaled(psi, &k2_raw, dt), residual.abs()))
}

/// Result of a horizontal lift.
pub struct Lift {
    pub final_psi: PsiField,
    /// Largest |Θ| of any applied substep velocity.
    pub theta_max: f64,
    pub steps: usize,
}

/// Horizontally lifts a velocity schedule, checking at every accepted step
/// that the field still represents a shape (integer windings, preserved zero
/// count) and aborting with a chart error otherwise.
pub fn horizontal_lift(
    psi0: &PsiField,
    schedule: &Schedule,
    mut on_step: impl FnMut(usize, &PsiField),
) -> Result<Lift> {
    let g = psi0.grid().clone();
    let count0 = winding_count(psi0)?;
    let mut psi = psi0.clone();
    let mut theta_max: f64 = 0.0;
    let mut total_steps = 0usize;
    for leg in &schedule.legs {
        if leg.steps == 0 {
            return Err(Error::InvalidTimeStep(0.0));
        }
        let dt = leg.duration / leg.steps as f64;
        let u = VectorField::from_fn(&g, |p| (leg.u)(g.wrap(p)));
        let a = leg
            .a
            .as_ref()
            .map(|f| ComplexField::from_fn(&g, |p| f(g.wrap(p))));
        for _ in 0..leg.steps {
            let (next, residual) = horizontal_step(&psi, &u, a.as_ref(), dt)?;
            theta_max = theta_max.max(residual);
            let count = winding_count(&next).map_err(|e| Error::LiftLeftChart {
                step: total_steps,
                reason: e.to_string(),
            })?;
            if count != count0 {
                return Err(Error::LiftLeftChart {
                    step: total_steps,
                    reason: format!("zero count changed {count0} → {count}"),
                });
            }
            psi = next;
            total_steps += 1;
            on_step(total_steps, &psi);
        }
    }
    Ok(Lift { final_psi: psi, theta_max, steps: total_steps })
}

// ── Holonomy ─────────────────────────────────────────────────────────────

/// Outputs of a holonomy measurement around a closed loop.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HolonomyReport {
    /// Principal-branch phase volume (1/2π) ∫ Arg(ψ_T/ψ₀) μ.
    pub holonomy: f64,
    /// Independent estimate ∬ ω(∂_s, ∂_t) ds dt over the loop's parameter
    /// rectangle, from the tracked explicit shape family. The orientation
    /// convention makes holonomy = −mw_area for horizontal transport.
    pub mw_area: f64,
    /// Signed area swept by the tracked zero points (2-dimensional ambients).
    pub swept_oracle: Option<f64>,
    /// |holonomy + mw_area|.
    pub residual_vs_mw: f64,
    pub theta_max: f64,
    /// Fraction of the volume within 1e−3 of the Arg branch cut.
    pub branch_fraction: f64,
}

/// Phase-volume displacement between two fields over the same grid.
pub fn phase_volume(psi0: &PsiField, psi1: &PsiField) -> Result<(f64, f64)> {
    let g = psi0.grid();
    if psi1.grid() != g {
        return Err(Error::GridMismatch("phase_volume".into()));
    }
    let mut acc = Kahan::new();
    let mut near_cut = 0usize;
    let mut counted = 0usize;
    for (a, b) in psi0.field.values.iter().zip(&psi1.field.values) {
        if a.norm() < 1e-12 || b.norm() < 1e-12 {
            continue;
        }
        let arg = (b / a).arg();
        if (arg.abs() - std::f64::consts::PI).abs() < 1e-3 {
            near_cut += 1;
        }
        counted += 1;
        acc.add(arg);
    }
    let frac = near_cut as f64 / counted.max(1) as f64;
    Ok((acc.sum() * g.cell_volume() / TAU, frac))
}

/// RK4 flow of explicit points along a closed-form velocity field.
pub fn flow_points_rk4(
    points: &[[f64; 3]],
    u: &dyn Fn([f64; 3]) -> [f64; 3],
    time: f64,
    steps: usize,
) -> Vec<[f64; 3]> {
    let mut pts = points.to_vec();
    let dt = time / steps.max(1) as f64;
    for _ in 0..steps {
        for p in pts.iter_mut() {
            let k1 = u(*p);
            let k2 = u(add(*p, scale(k1, 0.5 * dt)));
            let k3 = u(add(*p, scale(k2, 0.5 * dt)));
            let k4 = u(add(*p, scale(k3, dt)));
            let incr = add(add(k1, scale(add(k2, k3), 2.0)), k4);
            *p = add(*p, scale(incr, dt / 6.0));
        }
    }
    pts
}

enum Tracked {
    Points(Vec<[f64; 3]>, Vec<i8>),
    Curve(Vec<[f64; 3]>),
}

impl Tracked {
    fn positions(&self) -> &[[f64; 3]] {
        match self {
            Tracked::Points(p, _) => p,
            Tracked::Curve(p) => p,
        }
    }

    fn with_positions(&self, p: Vec<[f64; 3]>) -> Tracked {
        match self {
            Tracked::Points(_, s) => Tracked::Points(p, s.clone()),
            Tracked::Curve(_) => Tracked::Curve(p),
        }
    }

    fn mw(&self, v: &[[f64; 3]], w: &[[f64; 3]]) -> Result<f64> {
        match self {
            Tracked::Points(p, s) => mw_form(
                &ExplicitShape::Points2D(Points2D { positions: p.clone(), signs: s.clone() }),
                &v.to_vec(),
                &w.to_vec(),
            ),
            Tracked::Curve(p) => mw_form(
                &ExplicitShape::Curve3D(Curve3D { vertices: p.clone() }),
                &v.to_vec(),
                &w.to_vec(),
            ),
        }
    }
}

/// ∬ ω(∂_s, ∂_t) ds dt over [0,S]×[0,T] for the explicit family generated by
/// flowing the tracked shape along u1 (in s) then u2 (in t), midpoint lattice
/// rule with `k` cells per side.
fn mw_rectangle_estimate(
    shape: &Tracked,
    u1: &dyn Fn([f64; 3]) -> [f64; 3],
    u2: &dyn Fn([f64; 3]) -> [f64; 3],
    s_len: f64,
    t_len: f64,
    k: usize,
) -> Result<f64> {
    let ds = s_len / k as f64;
    let dt = t_len / k as f64;
    // corner lattice (k+1)², built incrementally
    let mut corners: Vec<Vec<Vec<[f64; 3]>>> = Vec::with_capacity(k + 1);
    let substeps = 4;
    let mut row0 = shape.positions().to_vec();
    for i in 0..=k {
        if i > 0 {
            row0 = flow_points_rk4(&row0, u1, ds, substeps);
        }
        let mut col = Vec::with_capacity(k + 1);
        let mut cur = row0.clone();
        for j in 0..=k {
            if j > 0 {
                cur = flow_points_rk4(&cur, u2, dt, substeps);
            }
            col.push(cur.clone());
        }
        corners.push(col);
    }
    let mut total = 0.0;
    let npts = shape.positions().len();
    for i in 0..k {
        for j in 0..k {
            let mut vs = Vec::with_capacity(npts);
            let mut vt = Vec::with_capacity(npts);
            let mut center = Vec::with_capacity(npts);
            for p in 0..npts {
                let p00 = corners[i][j][p];
                let p10 = corners[i + 1][j][p];
                let p01 = corners[i][j + 1][p];
                let p11 = corners[i + 1][j + 1][p];
                vs.push(scale(
                    add(
                        [p10[0] - p00[0], p10[1] - p00[1], p10[2] - p00[2]],
                        [p11[0] - p01[0], p11[1] - p01[1], p11[2] - p01[2]],
                    ),
                    0.5 / ds,
                ));
                vt.push(scale(
                    add(
                        [p01[0] - p00[0], p01[1] - p00[1], p01[2] - p00[2]],
                        [p11[0] - p10[0], p11[1] - p10[1], p11[2] - p10[2]],
                    ),
                    0.5 / dt,
                ));
                center.push(scale(add(add(p00, p10), add(p01, p11)), 0.25));
            }
            let shape_c = shape.with_positions(center);
            total += shape_c.mw(&vs, &vt)? * ds * dt;
        }
    }
    Ok(total)
}

fn tracked_from_zero_set(psi: &PsiField) -> Result<Tracked> {
    match zero_set(psi)? {
        ShapeCurrent::OrientedPoints { positions, signs } => Ok(Tracked::Points(positions, signs)),
        ShapeCurrent::PolyCurve { chains } => {
            let mut vertices = Vec::new();
            for c in &chains {
                vertices.extend_from_slice(c.unique_vertices());
            }
            Ok(Tracked::Curve(vertices))
        }
        _ => unreachable!(),
    }
}

/// Holonomy of the rectangle loop generated by flowing along u1 for `s_len`,
/// u2 for `t_len`, then back. Reports the phase-volume holonomy, the
/// explicit-side ∬ω estimate, and (for point shapes) the swept-area oracle.
pub fn holonomy_rectangle(
    psi0: &PsiField,
    u1: impl Fn([f64; 3]) -> [f64; 3] + Clone + 'static,
    u2: impl Fn([f64; 3]) -> [f64; 3] + Clone + 'static,
    s_len: f64,
    t_len: f64,
    steps_per_leg: usize,
    mw_lattice: usize,
) -> Result<HolonomyReport> {
    let (u1a, u1b) = (u1.clone(), u1.clone());
    let (u2a, u2b) = (u2.clone(), u2.clone());
    let schedule = Schedule {
        legs: vec![
            Leg { u: Box::new(u1a), a: None, duration: s_len, steps: steps_per_leg },
            Leg { u: Box::new(u2a), a: None, duration: t_len, steps: steps_per_leg },
            Leg { u: Box::new(u1b), a: None, duration: -s_len, steps: steps_per_leg },
            Leg { u: Box::new(u2b), a: None, duration: -t_len, steps: steps_per_leg },
        ],
    };
    let lift = horizontal_lift(psi0, &schedule, |_, _| {})?;
    let (holonomy, branch_fraction) = phase_volume(psi0, &lift.final_psi)?;
    if branch_fraction > 0.01 {
        return Err(Error::BranchAmbiguous { frac: branch_fraction, margin: 1e-3 });
    }
    let tracked = tracked_from_zero_set(psi0)?;
    let mw_area = mw_rectangle_estimate(&tracked, &u1, &u2, s_len, t_len, mw_lattice)?;
    // Swept-area oracle for point shapes: signed shoelace of each tracked
    // point around the loop.
    let swept_oracle = match &tracked {
        Tracked::Points(pts, signs) => {
            let mut total = 0.0;
            for (p, &s) in pts.iter().zip(signs) {
                let mut path = vec![*p];
                let legs: [(&dyn Fn([f64; 3]) -> [f64; 3], f64); 4] =
                    [(&u1, s_len), (&u2, t_len), (&u1, -s_len), (&u2, -t_len)];
                for (u, len) in legs {
                    let sub = 8 * steps_per_leg.max(1);
                    let dt = len / sub as f64;
                    let mut cur = *path.last().unwrap();
                    for _ in 0..sub {
                        let next = flow_points_rk4(&[cur], u, dt, 1)[0];
                        path.push(next);
                        cur = next;
                    }
                }
                let mut area2 = 0.0;
                for w in path.windows(2) {
                    area2 += w[0][0] * w[1][1] - w[1][0] * w[0][1];
                }
                total += s as f64 * 0.5 * area2;
            }
            Some(total)
        }
        Tracked::Curve(_) => None,
    };
    Ok(HolonomyReport {
        holonomy,
        mw_area,
        swept_oracle,
        residual_vs_mw: (holonomy + mw_area).abs(),
        theta_max: lift.theta_max,
        branch_fraction,
    })
}

// ── Finite-difference exterior derivative ────────────────────────────────

/// Finite-difference exterior derivative of a 1-form on a 2-parameter family:
/// midpoint-rule circulation around the centered eps × eps parameter square,
/// divided by eps². Converges at O(eps²) for smooth families.
pub fn dform_fd_loop<S, V>(
    family: impl Fn(f64, f64) -> Result<S>,
    diff: impl Fn(&S, &S) -> V,
    evaluator: impl Fn(&S, &V) -> Result<f64>,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::InvalidFamily(format!("eps_loop {eps} outside (0, 0.1]")));
    }
    let h = 0.5 * eps;
    let corners = [(-h, -h), (h, -h), (h, h), (-h, h)];
    let mids = [(0.0, -h), (h, 0.0), (0.0, h), (-h, 0.0)];
    let mut acc = 0.0;
    for e in 0..4 {
        let a = family(corners[e].0, corners[e].1)?;
        let b = family(corners[(e + 1) % 4].0, corners[(e + 1) % 4].1)?;
        let m = family(mids[e].0, mids[e].1)?;
        let v = diff(&b, &a);
        acc += evaluator(&m, &v)?;
    }
    Ok(acc / (eps * eps))
}

/// Pure-advection RK4 flow of an implicit field (ψ̇ = −ι_u dψ), used to build
/// smooth 2-parameter ψ-families for the FD loop.
pub fn flow_psi_rk4(psi: &PsiField, u: &VectorField, time: f64, steps: usize) -> Result<PsiField> {
    let mut cur = psi.clone();
    let dt = time / steps.max(1) as f64;
    let g = psi.grid().clone();
    let zero_a = ComplexField::zeros(&g);
    for _ in 0..steps {
        let vel = |p: &PsiField| -> Result<ComplexField> {
            realize_raw(p, &ImplicitVelocity::Generated { u: u.clone(), a: zero_a.clone() })
        };
        let k1 = vel(&cur)?;
        let p2 = add_scaled(&cur, &k1, 0.5 * dt);
        let k2 = vel(&p2)?;
        let p3 = add_scaled(&cur, &k2, 0.5 * dt);
        let k3 = vel(&p3)?;
        let p4 = add_scaled(&cur, &k3, dt);
        let k4 = vel(&p4)?;
        let mut values = Vec::with_capacity(cur.field.values.len());
        for i in 0..cur.field.values.len() {
            let incr = k1.values[i] + (k2.values[i] + k3.values[i]) * 2.0 + k4.values[i];
            values.push(cur.field.values[i] + incr * (dt / 6.0));
        }
        cur = PsiField { field: ComplexField { grid: g.clone(), values }, eps: psi.eps };
    }
    Ok(cur)
}

// ── Zero-set presymplectic formula ───────────────────────────────────────

/// Pointwise kernel of the zero-set presymplectic pairing:
/// det(dψ_N)⁻¹ · Re(ψ̇ i conj(ψ̊)), with dψ_N given by its complex values on
/// an oriented orthonormal normal frame.
pub fn z_kernel(a1: Complex64, a2: Complex64, psidot: Complex64, psiring: Complex64) -> Result<f64> {
    let det = (a1.conj() * a2).im;
    if det.abs() < 1e-8 {
        return Err(Error::SingularNormalDifferential(0));
    }
    Ok((psidot * Complex64::i() * psiring.conj()).re / det)
}

/// The no-rotation variant Re(ψ̇ conj(ψ̊)) / det(dψ_N): a formally appealing
/// metric kernel that depends on the chosen representative and does not
/// descend to the shape space.
pub fn b_kernel(a1: Complex64, a2: Complex64, psidot: Complex64, psiring: Complex64) -> Result<f64> {
    let det = (a1.conj() * a2).im;
    if det.abs() < 1e-8 {
        return Err(Error::SingularNormalDifferential(0));
    }
    Ok((psidot * psiring.conj()).re / det)
}

fn zero_set_pairing(
    psi: &PsiField,
    psidot: &ComplexField,
    psiring: &ComplexField,
    kernel: impl Fn(Complex64, Complex64, Complex64, Complex64) -> Result<f64>,
) -> Result<f64> {
    let g = psi.grid().clone();
    if psidot.grid != g || psiring.grid != g {
        return Err(Error::GridMismatch("zero-set pairing".into()));
    }
    let samples = zero_samples(psi)?;
    let grad = crate::grid::gradient_central(&psi.field);
    let nn = g.node_count();
    let mut total = 0.0;
    for (si, s) in samples.iter().enumerate() {
        let mut a_dir = [Complex64::new(0.0, 0.0); 2];
        for (j, nvec) in s.frame.iter().enumerate() {
            for d in 0..g.dim() {
                let ga = crate::implicit::interp_complex_at(&g, &grad[d * nn..(d + 1) * nn], s.point);
                a_dir[j] += ga * nvec[d];
            }
        }
        let wd = crate::implicit::interp_complex_at(&g, &psidot.values, s.point);
        let wr = crate::implicit::interp_complex_at(&g, &psiring.values, s.point);
        let k = kernel(a_dir[0], a_dir[1], wd, wr)
            .map_err(|_| Error::SingularNormalDifferential(si))?;
        total += k * s.weight;
    }
    Ok(total)
}

/// Zero-set expression of the pulled-back symplectic pairing:
/// Σ over zero samples of det(dψ_N)⁻¹ Re(ψ̇ i conj ψ̊) × Hausdorff weight.
pub fn presymplectic_z(
    psi: &PsiField,
    psidot: &ComplexField,
    psiring: &ComplexField,
) -> Result<f64> {
    zero_set_pairing(psi, psidot, psiring, z_kernel)
}

/// The representative-dependent metric variant (no i in the kernel).
pub fn b_metric(psi: &PsiField, psidot: &ComplexField, psiring: &ComplexField) -> Result<f64> {
    zero_set_pairing(psi, psidot, psiring, b_kernel)
}

// ── Swept-volume oracle for the connection ───────────────────────────────

/// Independent estimate of Θ(ψ̇) as the negative average swept-volume rate of
/// the phase pages: for n_phases regular phase values, the flux through each
/// page of the page-velocity field reconstructed from ψ̇, averaged and negated.
pub fn avg_swept_volume_rate(psi: &PsiField, psidot: &ComplexField, n_phases: usize) -> Result<f64> {
    let g = psi.grid().clone();
    if psidot.grid != g {
        return Err(Error::GridMismatch("avg_swept_volume_rate".into()));
    }
    if n_phases < 8 {
        return Err(Error::TooFewRegularPhases { found: 0, need: 8 });
    }
    // page-velocity field u_eff = −(∂_t arg ψ) ∇φ / |∇φ|²
    let lam = crate::implicit::circle_differential(psi)?;
    let grad_phi = lam.node_components();
    let n = g.node_count();
    let mut ueff = vec![[0.0f64; 3]; n];
    for i in 0..n {
        let z = psi.field.values[i];
        let nz = z.norm_sqr();
        if nz < 1e-16 {
            continue;
        }
        let phidot = (psidot.values[i] * z.conj()).im / nz;
        let gp = grad_phi.values[i];
        let g2 = gp[0] * gp[0] + gp[1] * gp[1] + gp[2] * gp[2];
        if g2 < 1e-12 {
            continue;
        }
        let s = -phidot / g2;
        ueff[i] = [gp[0] * s, gp[1] * s, gp[2] * s];
    }
    let ueff_interp = {
        let g2 = g.clone();
        move |p: [f64; 3]| -> [f64; 3] {
            let mut out = [0.0; 3];
            for d in 0..3 {
                out[d] = interp_component(&g2, &ueff, d, p);
            }
            out
        }
    };
    let mut found = 0usize;
    let mut acc = 0.0;
    let mut attempt = 0usize;
    while found < n_phases && attempt < 2 * n_phases {
        let s = TAU * (attempt as f64 + 0.37) / n_phases as f64;
        attempt += 1;
        let page = match crate::extract::extract_phase_levelset(psi, s) {
            Ok(p) => p,
            Err(_) => continue,
        };
        acc += crate::currents::flux(&page, &ueff_interp)?;
        found += 1;
    }
    if found < n_phases {
        return Err(Error::TooFewRegularPhases { found, need: n_phases });
    }
    Ok(-acc / found as f64)
}

fn interp_component(g: &GridSpec, values: &[[f64; 3]], d: usize, p: [f64; 3]) -> f64 {
    let h = g.h();
    let n = g.n();
    let m = g.dim();
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for dd in 0..m {
        let x = p[dd].rem_euclid(g.lengths()[dd]) / h[dd];
        let i = x.floor() as usize % n[dd];
        base[dd] = i;
        frac[dd] = x - x.floor();
    }
    let corners = 1usize << m;
    let mut acc = 0.0;
    for c in 0..corners {
        let mut idx = base;
        let mut wgt = 1.0;
        for dd in 0..m {
            if (c >> dd) & 1 == 1 {
                idx[dd] = (base[dd] + 1) % n[dd];
                wgt *= frac[dd];
            } else {
                wgt *= 1.0 - frac[dd];
            }
        }
        acc += values[g.index(idx)][d] * wgt;
    }
    acc
}

// ── Horizontal Hamiltonian step of the binormal flow ─────────────────────

/// One horizontal step of the implicit binormal flow: extract the zero curve,
/// compute its binormal velocity, extend it to the ambient with a tanh
/// falloff over 4·eps, advect horizontally with RK2.
pub fn hamiltonian_horizontal_step(psi: &PsiField, dt: f64) -> Result<PsiField> {
    if dt == 0.0 {
        return Ok(psi.clone());
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let g = psi.grid().clone();
    if g.dim() != 3 {
        return Err(Error::Grid("horizontal Hamiltonian step needs a 3-torus field".into()));
    }
    let chains = match zero_set(psi)? {
        ShapeCurrent::PolyCurve { chains } => chains,
        _ => return Err(Error::Grid("zero set is not a curve".into())),
    };
    // binormal velocity per chain vertex
    let mut verts: Vec<[f64; 3]> = Vec::new();
    let mut vels: Vec<[f64; 3]> = Vec::new();
    for c in &chains {
        let curve = Curve3D { vertices: c.unique_vertices().to_vec() };
        let v = binormal_velocity(&curve)?;
        verts.extend_from_slice(c.unique_vertices());
        vels.extend(v);
    }
    let falloff = 4.0 * psi.eps;
    let u = VectorField::from_fn(&g, |p| {
        let mut best = f64::INFINITY;
        let mut vbest = [0.0; 3];
        for (q, v) in verts.iter().zip(&vels) {
            let d = g.distance(p, *q);
            if d < best {
                best = d;
                vbest = *v;
            }
        }
        let w = 1.0 - (best / falloff).tanh();
        scale(vbest, w)
    });
    let (next, _) = horizontal_step(psi, &u, None, dt)?;
    let _ = winding_count(&next).map_err(|e| Error::LiftLeftChart { step: 0, reason: e.to_string() })?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::implicit::build_psi_2d;
    use crate::zoo;

    fn dipole_psi(n: usize) -> PsiField {
        let g = make_grid(2, &[n, n], &[1.0, 1.0]).unwrap();
        let (pts, signs) = zoo::dipole_points();
        build_psi_2d(&g, &pts, &signs, 0.05).unwrap()
    }

    #[test]
    fn projection_kills_vertical_and_is_idempotent() {
        let psi = dipole_psi(64);
        let g = psi.grid().clone();
        // pure vertical velocity projects to (numerically) zero
        let vert = make_velocity(
            VectorField::zeros(&g),
            ComplexField::from_fn(&g, |_| Complex64::new(0.0, 0.7)),
        );
        let proj = horizontal_project(&psi, &vert).unwrap();
        assert!(theta(&psi, &proj).unwrap().abs() < 1e-14);
        if let ImplicitVelocity::Generated { a, .. } = &proj {
            for z in &a.values {
                assert!((z - Complex64::new(0.0, 0.0)).norm() < 1e-12);
            }
        }
        // idempotence on an arbitrary velocity
        let vel = make_velocity(
            VectorField::from_fn(&g, |_| [1.0, 0.5, 0.0]),
            ComplexField::from_fn(&g, |p| Complex64::new(0.1 * p[0], 0.3)),
        );
        let p1 = horizontal_project(&psi, &vel).unwrap();
        assert!(theta(&psi, &p1).unwrap().abs() < 1e-13);
        let p2 = horizontal_project(&psi, &p1).unwrap();
        if let (ImplicitVelocity::Generated { a: a1, .. }, ImplicitVelocity::Generated { a: a2, .. }) =
            (&p1, &p2)
        {
            for (x, y) in a1.values.iter().zip(&a2.values) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_schedule_is_constant_path() {
        let psi = dipole_psi(64);
        let schedule = Schedule { legs: vec![Leg::translation([0.0, 0.0, 0.0], 0.1, 5)] };
        let lift = horizontal_lift(&psi, &schedule, |_, _| {}).unwrap();
        for (a, b) in psi.field.values.iter().zip(&lift.final_psi.field.values) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(lift.theta_max < 1e-12);
    }

    #[test]
    fn translation_loop_returns_zero_set() {
        let psi = dipole_psi(64);
        let g = psi.grid().clone();
        let schedule = Schedule {
            legs: vec![
                Leg::translation([1.0, 0.0, 0.0], 0.05, 8),
                Leg::translation([1.0, 0.0, 0.0], -0.05, 8),
            ],
        };
        let lift = horizontal_lift(&psi, &schedule, |_, _| {}).unwrap();
        let z0 = tracked_from_zero_set(&psi).unwrap();
        let z1 = tracked_from_zero_set(&lift.final_psi).unwrap();
        for (a, b) in z0.positions().iter().zip(z1.positions()) {
            assert!(g.distance(*a, *b) < 1.5 / 64.0, "zero moved {:?} → {:?}", a, b);
        }
        assert!(lift.theta_max < 1e-12);
    }

    #[test]
    fn fd_loop_of_exact_form_vanishes() {
        // evaluator = dF for F(γ) = Σ first-vertex coordinates: a closed form,
        // so the loop integral must vanish at O(eps²).
        let c0 = zoo::circle3d([0.0, 0.0, 0.0], 0.5, 64);
        let eps = 5e-3;
        let got = dform_fd_loop(
            |s, t| {
                Ok(Curve3D {
                    vertices: c0.vertices.iter().map(|p| [p[0] + s, p[1], p[2] + t]).collect(),
                })
            },
            |b: &Curve3D, a: &Curve3D| {
                (0..a.vertices.len())
                    .map(|i| {
                        [
                            b.vertices[i][0] - a.vertices[i][0],
                            b.vertices[i][1] - a.vertices[i][1],
                            b.vertices[i][2] - a.vertices[i][2],
                        ]
                    })
                    .collect::<Vec<_>>()
            },
            |c: &Curve3D, v: &Vec<[f64; 3]>| {
                // dF(v) for F = mean of x+z over vertices
                let n = c.vertices.len() as f64;
                Ok(v.iter().map(|w| (w[0] + w[2]) / n).sum())
            },
            eps,
        )
        .unwrap();
        assert!(got.abs() < 5.0 * eps * eps, "d² residual {got}");
    }

    #[test]
    fn fd_loop_rejects_bad_eps() {
        let r = dform_fd_loop(
            |_, _| Ok(0.0f64),
            |_, _| 0.0f64,
            |_, _| Ok(0.0),
            0.5,
        );
        assert!(r.is_err());
    }

    #[test]
    fn z_kernel_local_model_values() {
        // ψ₀ = x + iy: dψ on the standard frame is (1, i); velocities from
        // v = (0,1) are L_vψ₀ = i. The metric kernel gives 1; for
        // ψ₁ = x + y + iy (dψ on frame (1, 1+i), L_vψ₁ = 1+i) it gives 2,
        // while the symplectic kernel is representative-independent.
        let a1 = Complex64::new(1.0, 0.0);
        let a2 = Complex64::new(0.0, 1.0);
        let w = Complex64::new(0.0, 1.0);
        assert_eq!(b_kernel(a1, a2, w, w).unwrap(), 1.0);
        let b1 = Complex64::new(1.0, 0.0);
        let b2 = Complex64::new(1.0, 1.0);
        let w1 = Complex64::new(1.0, 1.0);
        assert_eq!(b_kernel(b1, b2, w1, w1).unwrap(), 2.0);
        // symplectic kernel with u = x̂, v = ŷ on both representatives
        let zdot0 = Complex64::new(-1.0, 0.0); // −L_uψ₀
        let zring0 = Complex64::new(0.0, -1.0); // −L_vψ₀
        assert_eq!(z_kernel(a1, a2, zdot0, zring0).unwrap(), 1.0);
        let zdot1 = Complex64::new(-1.0, 0.0); // −L_uψ₁
        let zring1 = Complex64::new(-1.0, -1.0); // −L_vψ₁
        assert_eq!(z_kernel(b1, b2, zdot1, zring1).unwrap(), 1.0);
    }

    #[test]
    fn z_antisymmetry() {
        let psi = dipole_psi(64);
        let g = psi.grid().clone();
        let u = VectorField::from_fn(&g, |_| [0.3, 0.8, 0.0]);
        let vel = realize_raw(&psi, &make_velocity(u, ComplexField::zeros(&g))).unwrap();
        let z = presymplectic_z(&psi, &vel, &vel).unwrap();
        assert!(z.abs() < 1e-12);
    }
}
