use num_complex::Complex64;
use sweptvol::grid::{make_grid, ComplexField, VectorField};
use sweptvol::implicit::{build_psi_2d, theta, ImplicitVelocity, PsiField};
use sweptvol::prequantum::{dform_fd_loop, flow_psi_rk4, holonomy_rectangle};
use sweptvol::zoo;

fn main() {
    let n = 128;
    let g = make_grid(2, &[n, n], &[1.0, 1.0]).unwrap();
    let (pts, signs) = zoo::dipole_points();
    let psi0 = build_psi_2d(&g, &pts, &signs, 0.05).unwrap();

    // dΘ FD loop: bump translations of the + point
    let chi = zoo::plateau_bump(&g, pts[0], 0.12, 0.2);
    let c1 = chi.clone();
    let c2 = chi.clone();
    let u1 = VectorField::from_fn(&g, move |p| [c1(p), 0.0, 0.0]);
    let u2 = VectorField::from_fn(&g, move |p| [0.0, c2(p), 0.0]);
    for eps in [1e-2, 5e-3, 2.5e-3] {
        let got = dform_fd_loop(
            |s, t| {
                let a = flow_psi_rk4(&psi0, &u1, s, 1)?;
                flow_psi_rk4(&a, &u2, t, 1)
            },
            |b: &PsiField, a: &PsiField| ComplexField {
                grid: a.field.grid.clone(),
                values: b.field.values.iter().zip(&a.field.values).map(|(x, y)| x - y).collect(),
            },
            |m: &PsiField, v: &ComplexField| theta(m, &ImplicitVelocity::Raw(v.clone())),
            eps,
        )
        .unwrap();
        println!("dTheta loop eps={eps:.1e}: {got:.6} (want 1, err {:+.3}%)", (got - 1.0) * 100.0);
    }

    // holonomy: rectangle 0.3 × 0.2 (area 0.06)
    let c3 = chi.clone();
    let c4 = chi.clone();
    let rep = holonomy_rectangle(
        &psi0,
        move |p| [c3(p), 0.0, 0.0],
        move |p| [0.0, c4(p), 0.0],
        0.3, 0.2, 48, 12,
    )
    .unwrap();
    println!("holonomy {:.6} mw {:.6} swept {:?} theta_max {:.2e} branch {:.4}",
        rep.holonomy, rep.mw_area, rep.swept_oracle, rep.theta_max, rep.branch_fraction);

    // vertical raw check on icψ through avg swept volume
    let c = 0.8;
    let raw = ComplexField {
        grid: g.clone(),
        values: psi0.field.values.iter().map(|z| Complex64::new(0.0, c) * z).collect(),
    };
    let oracle = sweptvol::prequantum::avg_swept_volume_rate(&psi0, &raw, 16).unwrap();
    println!("avg swept for ic-psi: {oracle:.5} want {:.5}", c / std::f64::consts::TAU);
}
