//! Fourier-diagonalized solve for edge 1-forms on the periodic lattice.
//!
//! Given a quantized face source F (values 2π × integers, closed, with zero
//! homology periods), returns the unique edge form λ with
//!
//!   dλ = F   (plaquette circulation reproduces F exactly),
//!   δλ = 0   (discrete Coulomb gauge),
//!   zero harmonic part (per-axis mean of λ set to zero).
//!
//! On the uniform periodic lattice the combinatorial 1-form Hodge Laplacian
//! Δ₁ = d₀δ₁ + δ₂d₁ diagonalizes in Fourier space to the scalar symbol
//! Σ_d |1 − e^{iκ_d}|², acting componentwise on the m edge-component lattices.
//! With δλ = 0 the solution is λ = Δ₁⁻¹ δ₂ F with the κ = 0 modes zeroed.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{EdgeOneForm, FaceTwoForm, GridSpec};

const QUANTIZATION_TOL: f64 = 1e-9;
const CYCLE_TOL: f64 = 1e-9;

/// In-place m-dimensional FFT over the node-major lattice, separable 1-D
/// passes per axis. `inverse` applies the unnormalized inverse transform.
pub fn fft_nd(data: &mut [Complex64], grid: &GridSpec, inverse: bool) {
    let n = grid.n();
    let mut planner = FftPlanner::new();
    for axis in 0..grid.dim() {
        let len = n[axis];
        if len == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        // Iterate over all lattice lines parallel to `axis`.
        let stride = match axis {
            0 => 1,
            1 => n[0],
            _ => n[0] * n[1],
        };
        let line_count = grid.node_count() / len;
        for lc in 0..line_count {
            // Base index of this line: enumerate nodes with coord[axis] = 0.
            let base = match axis {
                0 => lc * n[0],
                1 => {
                    let x = lc % n[0];
                    let z = lc / n[0];
                    (z * n[1]) * n[0] + x
                }
                _ => lc,
            };
            for k in 0..len {
                line[k] = data[base + k * stride];
            }
            fft.process(&mut line);
            for k in 0..len {
                data[base + k * stride] = line[k];
            }
        }
    }
}

/// Validates that F is 2π-quantized, closed (m = 3), and has zero homology
/// periods, then solves dλ = F, δλ = 0 with zero harmonic part.
pub fn solve_coulomb_oneform(f: &FaceTwoForm) -> Result<EdgeOneForm> {
    let g = f.grid.clone();
    let two_pi = std::f64::consts::TAU;

    for (idx, &v) in f.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite("solve_coulomb_oneform"));
        }
        let q = v / two_pi;
        if (q - q.round()).abs() > QUANTIZATION_TOL {
            return Err(Error::NotQuantized { face: idx % g.node_count(), value: v });
        }
    }
    for p in 0..g.pair_count() {
        let s = f.cycle_sum(p);
        if s.abs() > CYCLE_TOL {
            let (a, b) = g.pairs()[p];
            return Err(Error::SourceNotExact(format!(
                "nonzero homology period {s:.6e} over the ({a},{b}) cycle"
            )));
        }
    }
    if g.dim() == 3 {
        let div = f.cube_divergence_max();
        if div > CYCLE_TOL {
            return Err(Error::SourceNotExact(format!(
                "face source not closed: max cube divergence {div:.3e}"
            )));
        }
    }

    let n_nodes = g.node_count();
    let m = g.dim();
    let n = g.n();

    // Forward-transform each face component.
    let fhat: Vec<Vec<Complex64>> = (0..g.pair_count())
        .map(|p| {
            let mut buf: Vec<Complex64> = f.values[p * n_nodes..(p + 1) * n_nodes]
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            fft_nd(&mut buf, &g, false);
            buf
        })
        .collect();

    // λ̂_a(κ) = (δ₂F)̂_a / Σ_d |D_d|², with (δ₂F)_a = Σ_{b≠a} (F_ab(k) − F_ab(k−δ_b))
    // and F_ba = −F_ab. In Fourier space the backward difference is (1 − e^{−iκ_b}).
    let mut lam_hat: Vec<Vec<Complex64>> =
        (0..m).map(|_| vec![Complex64::new(0.0, 0.0); n_nodes]).collect();

    let pair_index = |a: usize, b: usize| -> (usize, f64) {
        // returns (component index for {a,b}, sign of F_ab relative to stored order)
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let idx = g
            .pairs()
            .iter()
            .position(|&(x, y)| (x, y) == (lo, hi))
            .expect("valid axis pair");
        (idx, sign)
    };

    for node in 0..n_nodes {
        let c = g.coords(node);
        // Symbol factors D_d = 1 − e^{iκ_d}.
        let mut dd = [Complex64::new(0.0, 0.0); 3];
        let mut denom = 0.0;
        for d in 0..m {
            let kappa = two_pi * c[d] as f64 / n[d] as f64;
            dd[d] = Complex64::new(1.0 - kappa.cos(), -kappa.sin());
            denom += dd[d].norm_sqr();
        }
        if denom < 1e-14 {
            // κ = 0: harmonic part pinned to zero.
            for lam in lam_hat.iter_mut().take(m) {
                lam[node] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        for a in 0..m {
            let mut rhs = Complex64::new(0.0, 0.0);
            for b in 0..m {
                if b == a {
                    continue;
                }
                let (p, sign) = pair_index(a, b);
                rhs += dd[b].conj() * fhat[p][node] * sign;
            }
            lam_hat[a][node] = rhs / denom;
        }
    }
    drop(fhat);

    let mut out = EdgeOneForm::zeros(&g);
    let scale = 1.0 / n_nodes as f64;
    for (a, mut buf) in lam_hat.into_iter().enumerate() {
        fft_nd(&mut buf, &g, true);
        for (i, z) in buf.into_iter().enumerate() {
            out.values[a * n_nodes + i] = z.re * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::TAU;

    #[test]
    fn zero_source_gives_zero_form() {
        let g = make_grid(2, &[16, 16], &[1.0, 1.0]).unwrap();
        let f = FaceTwoForm::zeros(&g);
        let lam = solve_coulomb_oneform(&f).unwrap();
        assert!(lam.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn dipole_circulations_reproduce_source() {
        // One face +2π, one face −2π; verify by direct plaquette summation.
        let g = make_grid(2, &[32, 32], &[1.0, 1.0]).unwrap();
        let mut f = FaceTwoForm::zeros(&g);
        *f.at_mut(0, g.index([8, 16, 0])) = TAU;
        *f.at_mut(0, g.index([24, 16, 0])) = -TAU;
        let lam = solve_coulomb_oneform(&f).unwrap();
        let df = lam.exterior_derivative();
        let mut worst: f64 = 0.0;
        for i in 0..g.node_count() {
            worst = worst.max((df.at(0, i) - f.at(0, i)).abs());
        }
        assert!(worst < 1e-9 * TAU, "residual {worst}");
    }

    #[test]
    fn unbalanced_source_is_rejected() {
        let g = make_grid(2, &[16, 16], &[1.0, 1.0]).unwrap();
        let mut f = FaceTwoForm::zeros(&g);
        *f.at_mut(0, 5) = TAU;
        assert!(matches!(solve_coulomb_oneform(&f), Err(Error::SourceNotExact(_))));
    }

    #[test]
    fn non_quantized_source_is_rejected() {
        let g = make_grid(2, &[16, 16], &[1.0, 1.0]).unwrap();
        let mut f = FaceTwoForm::zeros(&g);
        *f.at_mut(0, 5) = 1.0;
        *f.at_mut(0, 6) = -1.0;
        assert!(matches!(solve_coulomb_oneform(&f), Err(Error::NotQuantized { .. })));
    }

    #[test]
    fn three_dimensional_ring_source() {
        // Face charges rasterized from a closed ring form a closed, balanced
        // source; the solve must reproduce its circulations.
        let g = make_grid(3, &[16, 16, 16], &[1.0, 1.0, 1.0]).unwrap();
        let ring = crate::zoo::ring_curve([0.47, 0.53, 0.5], 0.27, 64);
        let f = crate::implicit::curve_face_charges(&g, &ring);
        assert!(f.cube_divergence_max() < 1e-9, "rasterized source must be closed");
        let lam = solve_coulomb_oneform(&f).unwrap();
        let df = lam.exterior_derivative();
        let mut worst: f64 = 0.0;
        for p in 0..g.pair_count() {
            for i in 0..g.node_count() {
                worst = worst.max((df.at(p, i) - f.at(p, i)).abs());
            }
        }
        assert!(worst < 1e-9 * TAU, "residual {worst}");
    }

    #[test]
    fn solve_is_linear() {
        let g = make_grid(2, &[16, 16], &[1.0, 1.0]).unwrap();
        let mut f1 = FaceTwoForm::zeros(&g);
        *f1.at_mut(0, g.index([3, 3, 0])) = TAU;
        *f1.at_mut(0, g.index([12, 3, 0])) = -TAU;
        let mut f2 = FaceTwoForm::zeros(&g);
        *f2.at_mut(0, g.index([5, 9, 0])) = TAU;
        *f2.at_mut(0, g.index([9, 12, 0])) = -TAU;
        let mut f12 = FaceTwoForm::zeros(&g);
        for i in 0..f12.values.len() {
            f12.values[i] = f1.values[i] + f2.values[i];
        }
        let l1 = solve_coulomb_oneform(&f1).unwrap();
        let l2 = solve_coulomb_oneform(&f2).unwrap();
        let l12 = solve_coulomb_oneform(&f12).unwrap();
        for i in 0..l12.values.len() {
            assert!((l12.values[i] - l1.values[i] - l2.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn coulomb_gauge_divergence_free() {
        let g = make_grid(2, &[32, 32], &[1.0, 1.0]).unwrap();
        let mut f = FaceTwoForm::zeros(&g);
        *f.at_mut(0, g.index([8, 16, 0])) = TAU;
        *f.at_mut(0, g.index([24, 16, 0])) = -TAU;
        let lam = solve_coulomb_oneform(&f).unwrap();
        // δλ at each node: Σ_d (λ_d(k − δ_d) − λ_d(k)) = 0.
        for i in 0..g.node_count() {
            let mut div = 0.0;
            for d in 0..2 {
                div += lam.at(d, g.shift(i, d, -1)) - lam.at(d, i);
            }
            assert!(div.abs() < 1e-10, "divergence {div} at node {i}");
        }
    }
}
