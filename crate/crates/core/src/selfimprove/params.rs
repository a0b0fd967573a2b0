use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Ratio between consecutive level sets.
pub const M: f64 = 4.0;
/// Absorption weight.
pub const DELTA: f64 = 0.25;

/// Inputs from which [`ImprovementParams`] are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInputs {
    pub p: f64,
    pub p_prime: f64,
    /// Improved exponent; `None` takes the midpoint of the admissible range.
    pub q: Option<f64>,
    pub kappa: f64,
    pub nu: f64,
    pub c_gamma: f64,
    pub c_a: f64,
    /// Doubling constant `D`.
    pub doubling: f64,
}

/// All constants of one self-improvement run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovementParams {
    pub p: f64,
    pub p_prime: f64,
    pub q: f64,
    pub kappa: f64,
    pub nu: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    #[serde(rename = "N")]
    pub big_n: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub delta: f64,
    pub k: u64,
    /// `1 + M^k ν + 3 C_A M^k`; infinite once it leaves the `f64` range.
    #[serde(rename = "S", with = "extended")]
    pub s: f64,
    #[serde(rename = "log10_S")]
    pub log10_s: f64,
    #[serde(rename = "C_Gamma")]
    pub c_gamma: f64,
    #[serde(rename = "C_A")]
    pub c_a: f64,
    #[serde(rename = "D")]
    pub doubling: f64,
}

/// JSON has no infinity, so overflowed constants are written as `null`.
pub(crate) mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// `(8 C_Γ)^{p/(p-1)} D^{5/(p-1)}`, the value `k` has to exceed.
pub fn k_threshold(p: f64, c_gamma: f64, doubling: f64) -> f64 {
    ((p / (p - 1.0)) * (8.0 * c_gamma).ln() + (5.0 / (p - 1.0)) * doubling.ln()).exp()
}

/// `ceil(threshold + 1)`, snapping to the nearest integer when the floating
/// value is within `1e-9` relative of it.
fn k_for(p: f64, c_gamma: f64, doubling: f64) -> Result<u64> {
    let v = k_threshold(p, c_gamma, doubling) + 1.0;
    if !(v < 9.0e18) {
        return Err(Error::Overflow(format!("k = ceil({v:e}) does not fit in 64 bits")));
    }
    let r = v.round();
    let k = if (v - r).abs() <= 1e-9 * v { r } else { v.ceil() };
    Ok(k as u64)
}

fn check_exponents(p: f64, p_prime: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be > 1, got {p}")));
    }
    if !(p_prime >= 1.0_f64.max(p / 2.0) && p_prime < p) {
        return Err(invalid(format!("need max(1, p/2) <= p' < p, got p = {p}, p' = {p_prime}")));
    }
    Ok(())
}

/// `k = ceil((32 C_H)^{p/(p-1)} D^{5/(p-1)} + 1)` and `q_min = max(p', p - p/k)`;
/// any `q ∈ (q_min, p)` is admissible.
pub fn quantitative_exponents(p: f64, p_prime: f64, c_h: f64, doubling: f64) -> Result<(u64, f64)> {
    check_exponents(p, p_prime)?;
    check_constants(4.0 * c_h, 1.0, doubling)?;
    let k = k_for(p, 4.0 * c_h, doubling)?;
    Ok((k, p_prime.max(p - p / k as f64)))
}

fn check_constants(c_gamma: f64, c_a: f64, doubling: f64) -> Result<()> {
    if !(c_gamma > 0.0 && c_gamma.is_finite() && c_a > 0.0 && c_a.is_finite()) {
        return Err(invalid(format!("C_Gamma and C_A must be positive, got {c_gamma} and {c_a}")));
    }
    if !(doubling >= 1.0 && doubling.is_finite()) {
        return Err(invalid(format!("D must be >= 1, got {doubling}")));
    }
    Ok(())
}

impl ImprovementParams {
    pub fn new(inputs: &ParamInputs) -> Result<Self> {
        check_exponents(inputs.p, inputs.p_prime)?;
        check_constants(inputs.c_gamma, inputs.c_a, inputs.doubling)?;
        let k = k_for(inputs.p, inputs.c_gamma, inputs.doubling)?;
        Self::with_k(inputs, k)
    }

    /// Same derivation with a caller-chosen `k`, which need not exceed the
    /// threshold. Used for counter-runs and for checking the formulas.
    pub fn with_k(inputs: &ParamInputs, k: u64) -> Result<Self> {
        let &ParamInputs {
            p,
            p_prime,
            kappa,
            nu,
            c_gamma,
            c_a,
            doubling,
            ..
        } = inputs;
        check_exponents(p, p_prime)?;
        check_constants(c_gamma, c_a, doubling)?;
        crate::poincare::check_nu_kappa(nu, kappa)?;
        if k == 0 {
            return Err(invalid("k must be positive"));
        }
        let kf = k as f64;
        let q = match inputs.q {
            Some(q) => q,
            None => (p_prime.max(p - p / kf) + p) / 2.0,
        };
        if inputs.q.is_none() && q >= p {
            return Err(Error::Overflow(format!("k = {k} leaves no double strictly between p - p/k and p")));
        }
        if !(q > p_prime && q < p) {
            return Err(invalid(format!("need p' < q < p, got q = {q}")));
        }
        let tail = nu + 3.0 * c_a;
        let log4 = M.log10();
        let (s, log10_s) = if kf * log4 < 300.0 {
            let s = 1.0 + M.powf(kf) * tail;
            (s, s.log10())
        } else {
            (f64::INFINITY, kf * log4 + tail.log10())
        };
        Ok(Self {
            p,
            p_prime,
            q,
            kappa,
            nu,
            big_k: 4.0 * kappa,
            big_n: 3.0 * nu,
            m: M,
            delta: DELTA,
            k,
            s,
            log10_s,
            c_gamma,
            c_a,
            doubling,
        })
    }

    /// `δ M^{k(p-q)/p}`; absorption needs it below 1.
    pub fn absorption_factor(&self) -> f64 {
        self.delta * self.m.powf(self.k as f64 * (self.p - self.q) / self.p)
    }

    /// `M^{iq/p}`.
    pub fn level_weight(&self, i: u64) -> f64 {
        self.m.powf(i as f64 * self.q / self.p)
    }

    /// `δ M^{-iq/p} d`, the budget for `E_i` along the base curve.
    pub fn level_budget(&self, i: u64, d: f64) -> f64 {
        self.delta * d / self.level_weight(i)
    }

    /// Whether `k` exceeds the threshold that makes `C_Γ M h(x) < δ`.
    pub fn k_is_sufficient(&self) -> bool {
        self.k as f64 > k_threshold(self.p, self.c_gamma, self.doubling)
    }
}

/// `C_α = S / (1 - δ M^{k(p-q)/p})`.
pub fn absorbed_constant(params: &ImprovementParams) -> Result<f64> {
    let f = params.absorption_factor();
    if !(f < 1.0) {
        return Err(Error::Precondition(format!("absorption needs δ M^(k(p-q)/p) < 1, got {f}")));
    }
    Ok(params.s / (1.0 - f))
}

/// `log10 C_α`, finite even when `S` overflows.
pub fn log10_absorbed_constant(params: &ImprovementParams) -> Result<f64> {
    let f = params.absorption_factor();
    if !(f < 1.0) {
        return Err(Error::Precondition(format!("absorption needs δ M^(k(p-q)/p) < 1, got {f}")));
    }
    Ok(params.log10_s - (1.0 - f).log10())
}
