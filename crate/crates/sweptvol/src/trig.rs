//! Trigonometric polynomials on the torus and differential forms built from
//! them. Closed under partial differentiation, so exterior derivatives of
//! test forms are available in closed form.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Cos,
    Sin,
}

/// One separable term c · Π_d x_d^{p_d} · trig_d(2π k_d x_d / L_d).
/// A factor with k = 0 and phase Cos is the constant 1. Monomial powers are
/// for Euclidean-ambient forms (coordinate primitives of the volume form);
/// keep them zero on the torus, where only the trig part is periodic.
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub coef: f64,
    pub modes: [(i32, Phase); 3],
    pub powers: [u32; 3],
}

impl Term {
    pub fn trig(coef: f64, modes: [(i32, Phase); 3]) -> Self {
        Term { coef, modes, powers: [0; 3] }
    }

    pub fn monomial(coef: f64, powers: [u32; 3]) -> Self {
        Term { coef, modes: [(0, Phase::Cos); 3], powers }
    }
}

/// Sum of separable trigonometric terms on a torus with periods `lengths`.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    pub lengths: [f64; 3],
    pub terms: Vec<Term>,
}

impl TrigPoly {
    pub fn zero(lengths: [f64; 3]) -> Self {
        TrigPoly { lengths, terms: Vec::new() }
    }

    pub fn constant(lengths: [f64; 3], c: f64) -> Self {
        TrigPoly { lengths, terms: vec![Term::trig(c, [(0, Phase::Cos); 3])] }
    }

    pub fn single(lengths: [f64; 3], coef: f64, modes: [(i32, Phase); 3]) -> Self {
        TrigPoly { lengths, terms: vec![Term::trig(coef, modes)] }
    }

    /// Coordinate monomial c · Π x_d^{p_d} (Euclidean ambients only).
    pub fn monomial(lengths: [f64; 3], coef: f64, powers: [u32; 3]) -> Self {
        TrigPoly { lengths, terms: vec![Term::monomial(coef, powers)] }
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for d in 0..3 {
                for _ in 0..t.powers[d] {
                    v *= p[d];
                }
                let (k, ph) = t.modes[d];
                if k == 0 && ph == Phase::Cos {
                    continue;
                }
                let arg = std::f64::consts::TAU * k as f64 * p[d] / self.lengths[d];
                v *= match ph {
                    Phase::Cos => arg.cos(),
                    Phase::Sin => arg.sin(),
                };
            }
            acc += v;
        }
        acc
    }

    /// Exact partial derivative along `axis` (product rule over the monomial
    /// and trigonometric factors).
    pub fn partial(&self, axis: usize) -> TrigPoly {
        let mut terms = Vec::new();
        for t in &self.terms {
            let (k, ph) = t.modes[axis];
            let pw = t.powers[axis];
            if pw > 0 {
                let mut powers = t.powers;
                powers[axis] = pw - 1;
                terms.push(Term { coef: t.coef * pw as f64, modes: t.modes, powers });
            }
            if k != 0 {
                let freq = std::f64::consts::TAU * k as f64 / self.lengths[axis];
                let (nph, sign) = match ph {
                    Phase::Cos => (Phase::Sin, -1.0),
                    Phase::Sin => (Phase::Cos, 1.0),
                };
                let mut modes = t.modes;
                modes[axis] = (k, nph);
                terms.push(Term { coef: t.coef * freq * sign, modes, powers: t.powers });
            }
        }
        TrigPoly { lengths: self.lengths, terms }
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= s;
        }
        out
    }

    /// Crude amplitude bound Σ |c| used to reject degenerate random draws.
    pub fn amplitude_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }

    /// Seeded random trig polynomial with `nterms` terms, per-axis mode range
    /// |k| ≤ kmax, zero constant part. `m` restricts the active axes.
    pub fn random(rng: &mut impl Rng, lengths: [f64; 3], m: usize, nterms: usize, kmax: i32) -> Self {
        let mut terms = Vec::with_capacity(nterms);
        for _ in 0..nterms {
            let mut modes = [(0, Phase::Cos); 3];
            let mut nonconst = false;
            for mode in modes.iter_mut().take(m) {
                let k = rng.gen_range(0..=kmax);
                let ph = if rng.gen_bool(0.5) { Phase::Cos } else { Phase::Sin };
                *mode = (k, ph);
                if k != 0 {
                    nonconst = true;
                }
            }
            if !nonconst {
                modes[0] = (1, Phase::Sin);
            }
            let coef = rng.gen_range(-1.0..1.0);
            terms.push(Term::trig(coef, modes));
        }
        TrigPoly { lengths, terms }
    }
}

/// Differential k-form with trigonometric coefficients.
///
/// Components are stored in lexicographic index order:
/// degree 0 — one component; degree 1 — m components (dx_d);
/// degree 2 — one component per axis pair in [`crate::grid::GridSpec::pairs`] order.
#[derive(Debug, Clone)]
pub struct TestForm {
    pub degree: usize,
    pub m: usize,
    pub comps: Vec<TrigPoly>,
}

impl TestForm {
    pub fn zero_form(m: usize, c: TrigPoly) -> Self {
        TestForm { degree: 0, m, comps: vec![c] }
    }

    pub fn one_form(m: usize, comps: Vec<TrigPoly>) -> Result<Self> {
        if comps.len() != m {
            return Err(Error::SizeMismatch(format!("one-form needs {m} components")));
        }
        Ok(TestForm { degree: 1, m, comps })
    }

    pub fn two_form(m: usize, comps: Vec<TrigPoly>) -> Result<Self> {
        let want = m * (m - 1) / 2;
        if comps.len() != want {
            return Err(Error::SizeMismatch(format!("two-form needs {want} components")));
        }
        Ok(TestForm { degree: 2, m, comps })
    }

    fn pairs(&self) -> &'static [(usize, usize)] {
        if self.m == 2 {
            &[(0, 1)]
        } else {
            &[(0, 1), (0, 2), (1, 2)]
        }
    }

    /// Exact exterior derivative.
    pub fn d(&self) -> Result<TestForm> {
        match self.degree {
            0 => {
                let comps = (0..self.m).map(|d| self.comps[0].partial(d)).collect();
                TestForm::one_form(self.m, comps)
            }
            1 => {
                let comps = self
                    .pairs()
                    .iter()
                    .map(|&(a, b)| {
                        let mut t = self.comps[b].partial(a);
                        let s = self.comps[a].partial(b);
                        for term in s.terms {
                            t.terms.push(Term { coef: -term.coef, ..term });
                        }
                        t
                    })
                    .collect();
                TestForm::two_form(self.m, comps)
            }
            2 if self.m == 3 => {
                // dβ = (∂₀β₁₂ − ∂₁β₀₂ + ∂₂β₀₁) dx₀∧dx₁∧dx₂, returned as a
                // degree-3 form with a single component.
                let mut c = self.comps[2].partial(0);
                let t1 = self.comps[1].partial(1);
                for term in t1.terms {
                    c.terms.push(Term { coef: -term.coef, ..term });
                }
                let t2 = self.comps[0].partial(2);
                for term in t2.terms {
                    c.terms.push(term);
                }
                Ok(TestForm { degree: 3, m: self.m, comps: vec![c] })
            }
            _ => Err(Error::DegreeMismatch { form: self.degree, current: self.m }),
        }
    }

    /// Evaluates the form at `p` on the given ordered tangent vectors.
    pub fn eval(&self, p: [f64; 3], vecs: &[[f64; 3]]) -> f64 {
        match self.degree {
            0 => self.comps[0].eval(p),
            1 => {
                let v = vecs[0];
                (0..self.m).map(|d| self.comps[d].eval(p) * v[d]).sum()
            }
            2 => {
                let (v, w) = (vecs[0], vecs[1]);
                self.pairs()
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| self.comps[i].eval(p) * (v[a] * w[b] - v[b] * w[a]))
                    .sum()
            }
            _ => 0.0,
        }
    }

    /// For an (m−1)-degree interpretation on flux pairings: the vector proxy b
    /// with β = ι_b μ. Only defined for degree m−1.
    pub fn flux_proxy(&self, p: [f64; 3]) -> [f64; 3] {
        match (self.m, self.degree) {
            (2, 1) => {
                // β = β₀dx₀ + β₁dx₁ = ι_b μ with b = (β₁, −β₀).
                [self.comps[1].eval(p), -self.comps[0].eval(p), 0.0]
            }
            (3, 2) => {
                // β = b₀ dx₁∧dx₂ − b₁ dx₀∧dx₂ + b₂ dx₀∧dx₁.
                [self.comps[2].eval(p), -self.comps[1].eval(p), self.comps[0].eval(p)]
            }
            _ => [0.0; 3],
        }
    }
}
