//! Y-dependence of the shipped energy families.
//!
//! Matrices are flat row-major slices of length `d*d`; index `i*d + j` is
//! `Y_ij`. Fourth-order tensors are flat `d^4` slices indexed as
//! `(i*d + j) * d*d + (k*d + l)`.

use serde::{Deserialize, Serialize};

/// Shape of the strain dependence of one dictionary entry.
///
/// Both families share the quadratic part
/// `a |Y|_F^2 + b tr(Y)^2 + c |sym Y|_F^2`. The saturating family adds
/// `eps * psi(|Y|_F^2)` with `psi(s) = s - ln(1 + s)`, which has
/// `psi(0) = psi'(0) = 0`, bounded second to fourth derivatives and a
/// positive semi-definite Hessian contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyFamily {
    Quadratic {
        a: f64,
        #[serde(default)]
        b: f64,
        #[serde(default)]
        c: f64,
    },
    Saturating {
        a: f64,
        #[serde(default)]
        b: f64,
        #[serde(default)]
        c: f64,
        eps: f64,
    },
}

impl EnergyFamily {
    pub fn quadratic(a: f64) -> Self {
        EnergyFamily::Quadratic { a, b: 0.0, c: 0.0 }
    }

    pub fn saturating(a: f64, eps: f64) -> Self {
        EnergyFamily::Saturating {
            a,
            b: 0.0,
            c: 0.0,
            eps,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergyFamily::Quadratic { .. } => "quadratic",
            EnergyFamily::Saturating { .. } => "saturating",
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, EnergyFamily::Quadratic { .. })
    }

    /// `(a, b, c)` of the shared quadratic part.
    pub fn quadratic_part(&self) -> (f64, f64, f64) {
        match *self {
            EnergyFamily::Quadratic { a, b, c } | EnergyFamily::Saturating { a, b, c, .. } => {
                (a, b, c)
            }
        }
    }

    /// Weight of the saturating term, zero for the quadratic family.
    pub fn nonlinear_weight(&self) -> f64 {
        match *self {
            EnergyFamily::Quadratic { .. } => 0.0,
            EnergyFamily::Saturating { eps, .. } => eps,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let (a, b, c) = self.quadratic_part();
        let eps = self.nonlinear_weight();
        if !(a.is_finite() && a > 0.0) {
            return Err(format!("a must be positive and finite, got {a}"));
        }
        for (name, v) in [("b", b), ("c", c), ("eps", eps)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if let EnergyFamily::Saturating { eps, .. } = self {
            if *eps <= 0.0 {
                return Err(format!("eps must be positive for the saturating family, got {eps}"));
            }
        }
        Ok(())
    }

    pub fn energy(&self, d: usize, y: &[f64]) -> f64 {
        let (a, b, c) = self.quadratic_part();
        let s = frob2(y);
        let tr = trace(d, y);
        let mut sym2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v = 0.5 * (y[i * d + j] + y[j * d + i]);
                sym2 += v * v;
            }
        }
        let mut e = a * s + b * tr * tr + c * sym2;
        let eps = self.nonlinear_weight();
        if eps > 0.0 {
            e += eps * psi(s);
        }
        e
    }

    /// Writes `grad_Y C(Y)` into `out` (overwrites).
    pub fn stress(&self, d: usize, y: &[f64], out: &mut [f64]) {
        let (a, b, c) = self.quadratic_part();
        let tr = trace(d, y);
        let eps = self.nonlinear_weight();
        let g = if eps > 0.0 { 2.0 * eps * psi1(frob2(y)) } else { 0.0 };
        for i in 0..d {
            for j in 0..d {
                let ij = i * d + j;
                let mut v = (2.0 * a + g) * y[ij] + c * (y[ij] + y[j * d + i]);
                if i == j {
                    v += 2.0 * b * tr;
                }
                out[ij] = v;
            }
        }
    }

    /// Writes the `d^2 x d^2` Hessian `grad_Y grad_Y C(Y)` into `out`.
    pub fn hessian(&self, d: usize, y: &[f64], out: &mut [f64]) {
        let (a, b, c) = self.quadratic_part();
        let eps = self.nonlinear_weight();
        let dd = d * d;
        let (g1, g2) = if eps > 0.0 {
            let s = frob2(y);
            (2.0 * eps * psi1(s), 4.0 * eps * psi2(s))
        } else {
            (0.0, 0.0)
        };
        for i in 0..d {
            for j in 0..d {
                let ij = i * d + j;
                for k in 0..d {
                    for l in 0..d {
                        let kl = k * d + l;
                        let mut v = 0.0;
                        if i == k && j == l {
                            v += 2.0 * a + c + g1;
                        }
                        if i == l && j == k {
                            v += c;
                        }
                        if i == j && k == l {
                            v += 2.0 * b;
                        }
                        if g2 != 0.0 {
                            v += g2 * y[ij] * y[kl];
                        }
                        out[ij * dd + kl] = v;
                    }
                }
            }
        }
    }

    /// Writes the third derivative contracted with `h1` and `h2`:
    /// `out_ij = sum_{kl,pq} d^3 C / dY_ij dY_kl dY_pq * h1_kl * h2_pq`.
    pub fn third(&self, d: usize, y: &[f64], h1: &[f64], h2: &[f64], out: &mut [f64]) {
        let dd = d * d;
        let eps = self.nonlinear_weight();
        if eps == 0.0 {
            out[..dd].iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let s = frob2(y);
        let yh1 = dot(y, h1);
        let yh2 = dot(y, h2);
        let h1h2 = dot(h1, h2);
        let c2 = 4.0 * eps * psi2(s);
        let c3 = 8.0 * eps * psi3(s);
        for a in 0..dd {
            out[a] = c2 * (h1[a] * yh2 + h2[a] * yh1 + y[a] * h1h2) + c3 * y[a] * yh1 * yh2;
        }
    }

    /// Single entry of the third derivative tensor (flat matrix indices).
    pub fn third_entry(&self, y: &[f64], a: usize, b: usize, c: usize) -> f64 {
        let eps = self.nonlinear_weight();
        if eps == 0.0 {
            return 0.0;
        }
        let s = frob2(y);
        let dl = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
        eps * (8.0 * psi3(s) * y[a] * y[b] * y[c]
            + 4.0 * psi2(s) * (dl(a, b) * y[c] + dl(a, c) * y[b] + dl(b, c) * y[a]))
    }

    /// Single entry of the fourth derivative tensor (flat matrix indices).
    pub fn fourth_entry(&self, y: &[f64], a: usize, b: usize, c: usize, e: usize) -> f64 {
        let eps = self.nonlinear_weight();
        if eps == 0.0 {
            return 0.0;
        }
        let s = frob2(y);
        let dl = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
        let pairs = dl(a, b) * y[c] * y[e]
            + dl(a, c) * y[b] * y[e]
            + dl(a, e) * y[b] * y[c]
            + dl(b, c) * y[a] * y[e]
            + dl(b, e) * y[a] * y[c]
            + dl(c, e) * y[a] * y[b];
        let deltas = dl(a, b) * dl(c, e) + dl(a, c) * dl(b, e) + dl(a, e) * dl(b, c);
        eps * (16.0 * psi4(s) * y[a] * y[b] * y[c] * y[e] + 8.0 * psi3(s) * pairs + 4.0 * psi2(s) * deltas)
    }
}

pub(crate) fn frob2(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn trace(d: usize, y: &[f64]) -> f64 {
    (0..d).map(|i| y[i * d + i]).sum()
}

/// `psi(s) = s - ln(1 + s)`, evaluated by its Taylor series near zero to
/// avoid cancellation.
pub(crate) fn psi(s: f64) -> f64 {
    if s < 1e-3 {
        // s^2/2 - s^3/3 + s^4/4 - ... truncated after s^8
        let mut term = s * s;
        let mut acc = 0.0;
        for k in 2..=8 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / k as f64;
            term *= s;
        }
        acc
    } else {
        s - s.ln_1p()
    }
}

fn psi1(s: f64) -> f64 {
    s / (1.0 + s)
}

fn psi2(s: f64) -> f64 {
    let t = 1.0 + s;
    1.0 / (t * t)
}

fn psi3(s: f64) -> f64 {
    let t = 1.0 + s;
    -2.0 / (t * t * t)
}

fn psi4(s: f64) -> f64 {
    let t = 1.0 + s;
    6.0 / (t * t * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_branches_agree_at_switch() {
        let s = 1e-3;
        let series = {
            let below = s * (1.0 - 1e-12);
            psi(below)
        };
        let closed = s - s.ln_1p();
        assert!((series - closed).abs() <= 1e-9 * closed);
    }

    #[test]
    fn third_contraction_matches_entries() {
        let fam = EnergyFamily::Saturating {
            a: 1.0,
            b: 0.3,
            c: 0.2,
            eps: 0.7,
        };
        let d = 2;
        let y = [0.3, -0.4, 0.8, 0.1];
        let h1 = [0.5, 0.1, -0.2, 0.9];
        let h2 = [-0.3, 0.6, 0.4, 0.2];
        let mut out = [0.0; 4];
        fam.third(d, &y, &h1, &h2, &mut out);
        for a in 0..4 {
            let mut acc = 0.0;
            for b in 0..4 {
                for c in 0..4 {
                    acc += fam.third_entry(&y, a, b, c) * h1[b] * h2[c];
                }
            }
            assert!((acc - out[a]).abs() < 1e-13, "{a}: {acc} vs {}", out[a]);
        }
    }
}
