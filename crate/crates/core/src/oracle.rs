//! Closed-form reduced density matrices as coefficient tables, and diffs
//! against the matrices built from the fermionic operators.
//!
//! Each table is a list of `(ket, bra, coefficient)` terms over the
//! three-qubit basis `|a x y>` of Alice and the detector's two retained
//! modes. The operator construction is ground truth; a table that fails
//! its own consistency checks is reported as flagged rather than wrong.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{DensityMatrix, Operator};
use crate::fock::C64;
use crate::linalg;
use crate::scenarios::{reduce_for, DetectorConfig, Ordering, ScenarioError};
use crate::states::{build_shared_state_from, Family, SharedStateSpec, UnruhParams};

/// Entrywise agreement threshold.
pub const MATCH_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated before a table counts as non-positive.
pub const TABLE_PSD_TOL: f64 = 1e-10;
/// Parameter points drawn by [`check_table`].
pub const HEALTH_SAMPLES: usize = 50;
const HEALTH_SEED: u64 = 0x5eed_7ab1e;

/// Arguments every coefficient may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffArgs {
    pub alpha: f64,
    pub gamma: f64,
    pub q_r: f64,
    pub q_l: f64,
    pub fidelity: f64,
}

impl CoeffArgs {
    pub fn new(alpha: f64, params: &UnruhParams, fidelity: f64) -> CoeffArgs {
        CoeffArgs {
            alpha,
            gamma: params.gamma(),
            q_r: params.q_r(),
            q_l: params.q_l(),
            fidelity,
        }
    }

    pub fn params(&self) -> UnruhParams {
        UnruhParams::new(self.gamma, self.q_r).expect("coefficient arguments hold valid parameters")
    }
}

#[derive(Clone, Copy)]
pub struct Term {
    pub ket: &'static str,
    pub bra: &'static str,
    pub symbol: &'static str,
    pub coeff: fn(&CoeffArgs) -> f64,
}

impl std::fmt::Debug for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} |{}><{}|", self.symbol, self.ket, self.bra)
    }
}

#[derive(Debug, Clone)]
pub struct ClosedFormTable {
    pub name: &'static str,
    pub family: Family,
    pub config: DetectorConfig,
    pub terms: Vec<Term>,
}

/// Basis index of a three-character label. Alice's character is `0`/`1`,
/// or `+`/`-` for the charge basis.
pub fn label_index(label: &str) -> Option<usize> {
    let mut idx = 0;
    let mut n = 0;
    for ch in label.chars() {
        let bit = match ch {
            '0' | '+' => 0,
            '1' | '-' | '−' => 1,
            _ => return None,
        };
        idx = idx * 2 + bit;
        n += 1;
    }
    (n == 3).then_some(idx)
}

pub fn index_label(index: usize, family: Family) -> String {
    let alice = match (family, index >> 2) {
        (Family::PhiStar, 0) => '+',
        (Family::PhiStar, _) => '-',
        (_, 0) => '0',
        _ => '1',
    };
    format!("{alice}{}{}", (index >> 1) & 1, index & 1)
}

impl ClosedFormTable {
    pub fn spec(&self, alpha: f64, fidelity: f64) -> SharedStateSpec {
        match self.family {
            Family::Werner => SharedStateSpec::werner(fidelity),
            family => SharedStateSpec::pure(family, alpha),
        }
    }

    /// Dense matrix of the table. Not validated as a state: flagged tables
    /// are generally not positive.
    pub fn assemble(&self, args: &CoeffArgs) -> Operator {
        let mut m = DMatrix::<C64>::zeros(8, 8);
        for t in &self.terms {
            let k = label_index(t.ket).expect("table labels are well formed");
            let b = label_index(t.bra).expect("table labels are well formed");
            m[(k, b)] += C64::new((t.coeff)(args), 0.0);
        }
        Operator::new(vec![2, 2, 2], m).expect("8x8 matches [2, 2, 2]")
    }

    /// Sum of the symbols of all terms landing on `(ket, bra)`.
    pub fn symbol_at(&self, ket: usize, bra: usize) -> String {
        let parts: Vec<&str> = self
            .terms
            .iter()
            .filter(|t| label_index(t.ket) == Some(ket) && label_index(t.bra) == Some(bra))
            .map(|t| t.symbol)
            .collect();
        if parts.is_empty() {
            "0".to_owned()
        } else {
            parts.join(" + ")
        }
    }
}

fn term(ket: &'static str, bra: &'static str, symbol: &'static str, coeff: fn(&CoeffArgs) -> f64) -> Term {
    Term { ket, bra, symbol, coeff }
}

/// A coherence and its Hermitian partner with the same real coefficient.
fn pair(ket: &'static str, bra: &'static str, symbol: &'static str, coeff: fn(&CoeffArgs) -> f64) -> [Term; 2] {
    [term(ket, bra, symbol, coeff), term(bra, ket, symbol, coeff)]
}

fn sc(x: f64) -> (f64, f64) {
    x.sin_cos()
}

fn phi_plus_region_i() -> Vec<Term> {
    let mut t = vec![term("000", "000", "cos²α cos⁴γ", |a| {
        let (_, ca) = sc(a.alpha);
        ca * ca * a.gamma.cos().powi(4)
    })];
    t.extend(pair("000", "110", "(q_R/2) sin2α cos³γ", |a| {
        a.q_r / 2.0 * (2.0 * a.alpha).sin() * a.gamma.cos().powi(3)
    }));
    t.push(term("100", "100", "q_L² sin²α cos²γ", |a| {
        a.q_l.powi(2) * a.alpha.sin().powi(2) * a.gamma.cos().powi(2)
    }));
    t.push(term("110", "110", "½(1+(1−2q_L²)cos2γ) sin²α", |a| {
        0.5 * (1.0 + (1.0 - 2.0 * a.q_l.powi(2)) * (2.0 * a.gamma).cos()) * a.alpha.sin().powi(2)
    }));
    t.extend(pair("001", "100", "−(q_L/2) sin2α cos²γ sinγ", |a| {
        let (s, c) = sc(a.gamma);
        -a.q_l / 2.0 * (2.0 * a.alpha).sin() * c * c * s
    }));
    t.extend(pair("100", "111", "−(q_R q_L/2) sin²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.sin().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.push(term("001", "001", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("010", "010", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.extend(pair("001", "111", "(q_R/2) sin2α cosγ sin²γ", |a| {
        let (s, c) = sc(a.gamma);
        a.q_r / 2.0 * (2.0 * a.alpha).sin() * c * s * s
    }));
    t.push(term("111", "111", "q_R² sin²α sin²γ", |a| {
        a.q_r.powi(2) * a.alpha.sin().powi(2) * a.gamma.sin().powi(2)
    }));
    t.extend(pair("011", "110", "(q_L/2) sin2α sin³γ", |a| {
        a.q_l / 2.0 * (2.0 * a.alpha).sin() * a.gamma.sin().powi(3)
    }));
    t.push(term("011", "011", "cos²α sin⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.sin().powi(4)
    }));
    t
}

fn phi_plus_region_ii() -> Vec<Term> {
    let mut t = vec![term("000", "000", "cos²α cos⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.cos().powi(4)
    })];
    t.extend(pair("000", "110", "(q_L/2) sin2α cos³γ", |a| {
        a.q_l / 2.0 * (2.0 * a.alpha).sin() * a.gamma.cos().powi(3)
    }));
    t.push(term("100", "100", "q_R² sin²α cos²γ", |a| {
        a.q_r.powi(2) * a.alpha.sin().powi(2) * a.gamma.cos().powi(2)
    }));
    t.push(term("110", "110", "½(1+(1−2q_L²)cos2γ) sin²α", |a| {
        0.5 * (1.0 + (1.0 - 2.0 * a.q_l.powi(2)) * (2.0 * a.gamma).cos()) * a.alpha.sin().powi(2)
    }));
    t.extend(pair("001", "100", "(q_R/2) sin2α cos²γ sinγ", |a| {
        let (s, c) = sc(a.gamma);
        a.q_r / 2.0 * (2.0 * a.alpha).sin() * c * c * s
    }));
    t.extend(pair("100", "111", "−(q_R q_L/2) sin²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.sin().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.push(term("001", "001", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("010", "010", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.extend(pair("001", "111", "−(q_L/2) sin2α cosγ sin²γ", |a| {
        let (s, c) = sc(a.gamma);
        -a.q_l / 2.0 * (2.0 * a.alpha).sin() * c * s * s
    }));
    t.push(term("111", "111", "q_L² sin²α sin²γ", |a| {
        a.q_l.powi(2) * a.alpha.sin().powi(2) * a.gamma.sin().powi(2)
    }));
    t.extend(pair("011", "110", "(q_R/2) sin2α sin³γ", |a| {
        a.q_r / 2.0 * (2.0 * a.alpha).sin() * a.gamma.sin().powi(3)
    }));
    t.push(term("011", "011", "cos²α sin⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.sin().powi(4)
    }));
    t
}

fn phi_minus_region_i() -> Vec<Term> {
    let mut t = vec![term("000", "000", "cos²α cos⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.cos().powi(4)
    })];
    t.extend(pair("000", "101", "(q_R/2) sin2α cos³γ", |a| {
        a.q_r / 2.0 * (2.0 * a.alpha).sin() * a.gamma.cos().powi(3)
    }));
    t.push(term("101", "101", "q_L² sin²α cos²γ", |a| {
        a.q_l.powi(2) * a.alpha.sin().powi(2) * a.gamma.cos().powi(2)
    }));
    t.push(term("101", "101", "½(1+(1−2q_L²)cos2γ) sin²α", |a| {
        0.5 * (1.0 + (1.0 - 2.0 * a.q_l.powi(2)) * (2.0 * a.gamma).cos()) * a.alpha.sin().powi(2)
    }));
    t.extend(pair("010", "100", "(q_L/2) sin2α cos²γ sinγ", |a| {
        let (s, c) = sc(a.gamma);
        a.q_l / 2.0 * (2.0 * a.alpha).sin() * c * c * s
    }));
    t.extend(pair("100", "111", "−(q_R q_L/2) sin²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.sin().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.push(term("001", "001", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("010", "010", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.extend(pair("010", "111", "−(q_R/2) sin2α cosγ sin²γ", |a| {
        let (s, c) = sc(a.gamma);
        -a.q_r / 2.0 * (2.0 * a.alpha).sin() * c * s * s
    }));
    t.push(term("111", "111", "q_R² sin²α sin²γ", |a| {
        a.q_r.powi(2) * a.alpha.sin().powi(2) * a.gamma.sin().powi(2)
    }));
    t.extend(pair("011", "101", "(q_L/2) sin2α sin³γ", |a| {
        a.q_l / 2.0 * (2.0 * a.alpha).sin() * a.gamma.sin().powi(3)
    }));
    t.push(term("011", "011", "cos²α sin⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.sin().powi(4)
    }));
    t
}

fn phi_minus_region_ii() -> Vec<Term> {
    let mut t = vec![term("000", "000", "cos²α cos⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.cos().powi(4)
    })];
    t.extend(pair("000", "101", "(q_L/2) sin2α cos³γ", |a| {
        a.q_l / 2.0 * (2.0 * a.alpha).sin() * a.gamma.cos().powi(3)
    }));
    t.push(term("100", "100", "q_R² sin²α cos²γ", |a| {
        a.q_r.powi(2) * a.alpha.sin().powi(2) * a.gamma.cos().powi(2)
    }));
    t.push(term("101", "101", "½(1+(1−2q_R²)cos2γ) sin²α", |a| {
        0.5 * (1.0 + (1.0 - 2.0 * a.q_r.powi(2)) * (2.0 * a.gamma).cos()) * a.alpha.sin().powi(2)
    }));
    t.extend(pair("010", "100", "−(q_L/2) sin2α cos²γ sinγ", |a| {
        let (s, c) = sc(a.gamma);
        -a.q_l / 2.0 * (2.0 * a.alpha).sin() * c * c * s
    }));
    t.extend(pair("100", "111", "−(q_R q_L/2) sin²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.sin().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.push(term("001", "001", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("010", "010", "¼ cos²α sin²2γ", |a| {
        0.25 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin().powi(2)
    }));
    t.extend(pair("010", "111", "(q_R/2) sin2α cosγ sin²γ", |a| {
        let (s, c) = sc(a.gamma);
        a.q_r / 2.0 * (2.0 * a.alpha).sin() * c * s * s
    }));
    t.push(term("111", "111", "q_L² sin²α sin²γ", |a| {
        a.q_l.powi(2) * a.alpha.sin().powi(2) * a.gamma.sin().powi(2)
    }));
    t.extend(pair("011", "101", "(q_L/2) sin2α sin³γ", |a| {
        a.q_l / 2.0 * (2.0 * a.alpha).sin() * a.gamma.sin().powi(3)
    }));
    t.push(term("011", "011", "cos²α sin⁴γ", |a| {
        a.alpha.cos().powi(2) * a.gamma.sin().powi(4)
    }));
    t
}

fn h(q: f64, gamma: f64) -> f64 {
    1.0 + (1.0 - 2.0 * q * q) * (2.0 * gamma).cos()
}

fn phi_star_region_i() -> Vec<Term> {
    let mut t = vec![
        term("+00", "+00", "q_L² cos²α cos²γ", |a| {
            a.q_l.powi(2) * a.alpha.cos().powi(2) * a.gamma.cos().powi(2)
        }),
        term("+10", "+10", "½(1+(1−2q_L²)cos2γ) cos²α", |a| {
            0.5 * h(a.q_l, a.gamma) * a.alpha.cos().powi(2)
        }),
    ];
    t.extend(pair("+10", "-01", "¼(1+(1−2q_L²)cos2γ) sin2α", |a| {
        0.25 * h(a.q_l, a.gamma) * (2.0 * a.alpha).sin()
    }));
    t.push(term("-01", "-01", "½(1+(1−2q_L²)cos2γ) sin²α", |a| {
        0.5 * h(a.q_l, a.gamma) * a.alpha.sin().powi(2)
    }));
    t.push(term("-00", "-00", "q_L² sin²α cos²γ", |a| {
        a.q_l.powi(2) * a.alpha.sin().powi(2) * a.gamma.cos().powi(2)
    }));
    t.extend(pair("+00", "+11", "−(q_R q_L/2) cos²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.extend(pair("-00", "-11", "−(q_R q_L/2) sin²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.sin().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.push(term("+11", "+11", "q_R² cos²α sin²γ", |a| {
        a.q_r.powi(2) * a.alpha.cos().powi(2) * a.gamma.sin().powi(2)
    }));
    t.push(term("-11", "-11", "q_R² sin²α sin²γ", |a| {
        a.q_r.powi(2) * a.alpha.sin().powi(2) * a.gamma.sin().powi(2)
    }));
    t
}

fn phi_star_region_ii() -> Vec<Term> {
    let mut t = vec![
        term("+00", "+00", "q_R² cos²α cos²γ", |a| {
            a.q_r.powi(2) * a.alpha.cos().powi(2) * a.gamma.cos().powi(2)
        }),
        term("+10", "+10", "½(1+(1−2q_R²)cos2γ) cos²α", |a| {
            0.5 * h(a.q_r, a.gamma) * a.alpha.cos().powi(2)
        }),
    ];
    t.extend(pair("+10", "-01", "¼(1+(1−2q_R²)cos2γ) sin2α", |a| {
        0.25 * h(a.q_r, a.gamma) * (2.0 * a.alpha).sin()
    }));
    t.push(term("-01", "-01", "½(1+(1−2q_R²)cos2γ) sin²α", |a| {
        0.5 * h(a.q_r, a.gamma) * a.alpha.sin().powi(2)
    }));
    t.push(term("-00", "-00", "q_R² sin²α cos²γ", |a| {
        a.q_r.powi(2) * a.alpha.sin().powi(2) * a.gamma.cos().powi(2)
    }));
    t.extend(pair("+00", "+11", "−(q_R q_L/2) cos²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.cos().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.extend(pair("-00", "-11", "−(q_R q_L/2) sin²α sin2γ", |a| {
        -a.q_r * a.q_l / 2.0 * a.alpha.sin().powi(2) * (2.0 * a.gamma).sin()
    }));
    t.push(term("+11", "+11", "q_L² cos²α sin²γ", |a| {
        a.q_l.powi(2) * a.alpha.cos().powi(2) * a.gamma.sin().powi(2)
    }));
    t.push(term("-11", "-11", "q_L² sin²α sin²γ", |a| {
        a.q_l.powi(2) * a.alpha.sin().powi(2) * a.gamma.sin().powi(2)
    }));
    t
}

fn werner_region_i() -> Vec<Term> {
    let mut t = Vec::new();
    t.extend(pair("000", "110", "(F q_R/2) cos³γ", |a| {
        0.5 * a.fidelity * a.q_r * a.gamma.cos().powi(3)
    }));
    t.push(term("100", "100", "(cos²γ/8)(3−2q_R²+F(1−2q_R²)+(1−F)cos2γ)", |a| {
        let (f, q) = (a.fidelity, a.q_r);
        a.gamma.cos().powi(2) / 8.0 * (3.0 - 2.0 * q * q + f * (1.0 - 2.0 * q * q) + (1.0 - f) * (2.0 * a.gamma).cos())
    }));
    t.push(term("000", "000", "(cos²γ/8)(3−2q_R²−F(1−2q_R²)+(1+F)cos2γ)", |a| {
        let (f, q) = (a.fidelity, a.q_r);
        a.gamma.cos().powi(2) / 8.0 * (3.0 - 2.0 * q * q - f * (1.0 - 2.0 * q * q) + (1.0 + f) * (2.0 * a.gamma).cos())
    }));
    t.extend(pair("001", "100", "−(F q_L/2) cos²γ sinγ", |a| {
        let (s, c) = sc(a.gamma);
        -a.fidelity * a.q_l / 2.0 * c * c * s
    }));
    t.extend(pair("001", "111", "(F q_R/2) cosγ sin²γ", |a| {
        let (s, c) = sc(a.gamma);
        a.fidelity * a.q_r / 2.0 * c * s * s
    }));
    t.extend(pair("011", "110", "(F q_L/2) sin³γ", |a| {
        a.fidelity * a.q_l / 2.0 * a.gamma.sin().powi(3)
    }));
    t.push(term("111", "111", "(sin²γ/4)((1+F)q_R²+(1−F)sin²γ)", |a| {
        let (f, s) = (a.fidelity, a.gamma.sin());
        s * s / 4.0 * ((1.0 + f) * a.q_r.powi(2) + (1.0 - f) * s * s)
    }));
    t.push(term("011", "011", "(sin²γ/4)((1−F)q_R²+(1+F)sin²γ)", |a| {
        let (f, s) = (a.fidelity, a.gamma.sin());
        s * s / 4.0 * ((1.0 - f) * a.q_r.powi(2) + (1.0 + f) * s * s)
    }));
    t.extend(pair("000", "011", "−((1−F)/8) q_L q_R sin2γ", |a| {
        -(1.0 - a.fidelity) / 8.0 * a.q_l * a.q_r * (2.0 * a.gamma).sin()
    }));
    t.extend(pair("100", "111", "−((1+F)/8) q_L q_R sin2γ", |a| {
        -(1.0 + a.fidelity) / 8.0 * a.q_l * a.q_r * (2.0 * a.gamma).sin()
    }));
    t.push(term("101", "101", "((1−F)/16) sin²2γ", |a| {
        (1.0 - a.fidelity) / 16.0 * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("001", "001", "((1+F)/16) sin²2γ", |a| {
        (1.0 + a.fidelity) / 16.0 * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("110", "110", "(2(1+F)−2(1+F)(1−2q_R²)cos2γ+(1−F)sin²2γ)/16", |a| {
        let (f, q, g2) = (a.fidelity, a.q_r, 2.0 * a.gamma);
        (2.0 * (1.0 + f) - 2.0 * (1.0 + f) * (1.0 - 2.0 * q * q) * g2.cos() + (1.0 - f) * g2.sin().powi(2)) / 16.0
    }));
    t.push(term("010", "010", "(2(1−F)−2(1−F)(1−2q_R²)cos2γ+(1+F)sin²2γ)/16", |a| {
        let (f, q, g2) = (a.fidelity, a.q_r, 2.0 * a.gamma);
        (2.0 * (1.0 - f) - 2.0 * (1.0 - f) * (1.0 - 2.0 * q * q) * g2.cos() + (1.0 + f) * g2.sin().powi(2)) / 16.0
    }));
    t
}

fn werner_region_ii() -> Vec<Term> {
    let mut t = Vec::new();
    t.extend(pair("000", "110", "(F q_L/2) cos³γ", |a| {
        0.5 * a.fidelity * a.q_l * a.gamma.cos().powi(3)
    }));
    t.push(term("111", "111", "(sin²γ/8)(3−2q_R²+F(1−2q_R²)−(1−F)cos2γ)", |a| {
        let (f, q) = (a.fidelity, a.q_r);
        a.gamma.sin().powi(2) / 8.0 * (3.0 - 2.0 * q * q + f * (1.0 - 2.0 * q * q) - (1.0 - f) * (2.0 * a.gamma).cos())
    }));
    t.push(term("011", "011", "(sin²γ/8)(3−2q_R²−F(1−2q_R²)−(1+F)cos2γ)", |a| {
        let (f, q) = (a.fidelity, a.q_r);
        a.gamma.sin().powi(2) / 8.0 * (3.0 - 2.0 * q * q - f * (1.0 - 2.0 * q * q) - (1.0 + f) * (2.0 * a.gamma).cos())
    }));
    t.extend(pair("001", "100", "(F q_R/2) cos²γ sinγ", |a| {
        let (s, c) = sc(a.gamma);
        a.fidelity * a.q_r / 2.0 * c * c * s
    }));
    t.extend(pair("001", "111", "−(F q_L/2) cosγ sin²γ", |a| {
        let (s, c) = sc(a.gamma);
        -a.fidelity * a.q_l / 2.0 * c * s * s
    }));
    t.extend(pair("011", "110", "(F q_R/2) sin³γ", |a| {
        a.fidelity * a.q_r / 2.0 * a.gamma.sin().powi(3)
    }));
    t.push(term("100", "100", "(cos²γ/4)((1+F)q_R²+(1−F)cos²γ)", |a| {
        let (f, c) = (a.fidelity, a.gamma.cos());
        c * c / 4.0 * ((1.0 + f) * a.q_r.powi(2) + (1.0 - f) * c * c)
    }));
    t.push(term("000", "000", "(cos²γ/4)((1−F)q_R²+(1+F)cos²γ)", |a| {
        let (f, c) = (a.fidelity, a.gamma.cos());
        c * c / 4.0 * ((1.0 - f) * a.q_r.powi(2) + (1.0 + f) * c * c)
    }));
    t.extend(pair("000", "011", "−((1−F)/8) q_L q_R sin2γ", |a| {
        -(1.0 - a.fidelity) / 8.0 * a.q_l * a.q_r * (2.0 * a.gamma).sin()
    }));
    t.extend(pair("100", "111", "−((1+F)/8) q_L q_R sin2γ", |a| {
        -(1.0 + a.fidelity) / 8.0 * a.q_l * a.q_r * (2.0 * a.gamma).sin()
    }));
    t.push(term("101", "101", "((1−F)/16) sin²2γ", |a| {
        (1.0 - a.fidelity) / 16.0 * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("001", "001", "((1+F)/16) sin²2γ", |a| {
        (1.0 + a.fidelity) / 16.0 * (2.0 * a.gamma).sin().powi(2)
    }));
    t.push(term("110", "110", "(2(1+F)+2(1+F)(1−2q_R²)cos2γ+(1−F)sin²2γ)/16", |a| {
        let (f, q, g2) = (a.fidelity, a.q_r, 2.0 * a.gamma);
        (2.0 * (1.0 + f) + 2.0 * (1.0 + f) * (1.0 - 2.0 * q * q) * g2.cos() + (1.0 - f) * g2.sin().powi(2)) / 16.0
    }));
    t.push(term("010", "010", "(2(1−F)+2(1−F)(1−2q_R²)cos2γ+(1+F)sin²2γ)/16", |a| {
        let (f, q, g2) = (a.fidelity, a.q_r, 2.0 * a.gamma);
        (2.0 * (1.0 - f) + 2.0 * (1.0 - f) * (1.0 - 2.0 * q * q) * g2.cos() + (1.0 + f) * g2.sin().powi(2)) / 16.0
    }));
    t
}

/// All eight printed tables: each family against Bob in region I and
/// anti-Bob in region II, non-distinguishing detectors.
pub fn tables() -> Vec<ClosedFormTable> {
    let t = |name, family, config, terms| ClosedFormTable {
        name,
        family,
        config,
        terms,
    };
    vec![
        t("phi-plus/ab-i", Family::PhiPlus, DetectorConfig::AB_I, phi_plus_region_i()),
        t("phi-plus/ab-ii", Family::PhiPlus, DetectorConfig::AB_II, phi_plus_region_ii()),
        t("phi-minus/ab-i", Family::PhiMinus, DetectorConfig::AB_I, phi_minus_region_i()),
        t("phi-minus/ab-ii", Family::PhiMinus, DetectorConfig::AB_II, phi_minus_region_ii()),
        t("phi-star/ab-i", Family::PhiStar, DetectorConfig::AB_I, phi_star_region_i()),
        t("phi-star/ab-ii", Family::PhiStar, DetectorConfig::AB_II, phi_star_region_ii()),
        t("werner/ab-i", Family::Werner, DetectorConfig::AB_I, werner_region_i()),
        t("werner/ab-ii", Family::Werner, DetectorConfig::AB_II, werner_region_ii()),
    ]
}

pub fn table(family: Family, config: DetectorConfig) -> Option<ClosedFormTable> {
    tables().into_iter().find(|t| t.family == family && t.config == config)
}

/// Outcome of the self-consistency checks on one table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableHealth {
    pub table: String,
    /// `(ket, bra)` labels printed more than once.
    pub duplicate_entries: Vec<(String, String)>,
    /// Coherences whose conjugate partner is missing or different.
    pub unpaired_entries: Vec<(String, String)>,
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
}

impl TableHealth {
    pub fn trace_ok(&self) -> bool {
        self.max_trace_deviation <= MATCH_TOL
    }

    pub fn is_flagged(&self) -> bool {
        !self.duplicate_entries.is_empty()
            || !self.unpaired_entries.is_empty()
            || !self.trace_ok()
            || self.min_eigenvalue < -TABLE_PSD_TOL
    }

    pub fn reasons(&self) -> Vec<String> {
        let mut r = Vec::new();
        for (k, b) in &self.duplicate_entries {
            r.push(format!("|{k}><{b}| printed more than once"));
        }
        for (k, b) in &self.unpaired_entries {
            r.push(format!("|{k}><{b}| has no matching conjugate"));
        }
        if !self.trace_ok() {
            r.push(format!("trace deviates from 1 by up to {:.3e}", self.max_trace_deviation));
        }
        if self.min_eigenvalue < -TABLE_PSD_TOL {
            r.push(format!("not positive semidefinite (eigenvalue {:.3e})", self.min_eigenvalue));
        }
        r
    }
}

/// Random parameter points in the physical range, reproducible.
pub fn sample_points(n: usize, seed: u64) -> Vec<CoeffArgs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let alpha = rng.gen_range(0.0..=FRAC_PI_2);
            let gamma = rng.gen_range(0.0..=FRAC_PI_4);
            let q_r: f64 = rng.gen_range(0.0..=1.0);
            let fidelity = rng.gen_range(0.0..=1.0);
            CoeffArgs::new(alpha, &UnruhParams::new(gamma, q_r).expect("sampled in range"), fidelity)
        })
        .collect()
}

pub fn check_table(table: &ClosedFormTable) -> TableHealth {
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for t in &table.terms {
        let key = (label_index(t.ket).unwrap(), label_index(t.bra).unwrap());
        *seen.entry(key).or_default() += 1;
    }
    let label = |i| index_label(i, table.family);
    let duplicate_entries = seen
        .iter()
        .filter(|&(_, &n)| n > 1)
        .map(|(&(k, b), _)| (label(k), label(b)))
        .collect();

    let points = sample_points(HEALTH_SAMPLES, HEALTH_SEED);
    let mut unpaired = BTreeSet::new();
    let mut max_trace_deviation: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    for args in &points {
        let m = table.assemble(args).into_matrix();
        for i in 0..8 {
            for j in 0..8 {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > MATCH_TOL {
                    unpaired.insert((i.min(j), i.max(j)));
                }
            }
        }
        max_trace_deviation = max_trace_deviation.max((m.trace() - C64::new(1.0, 0.0)).norm());
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        if let Ok(values) = linalg::hermitian_eigenvalues(&sym) {
            min_eigenvalue = min_eigenvalue.min(values[0]);
        }
    }
    TableHealth {
        table: table.name.to_owned(),
        duplicate_entries,
        unpaired_entries: unpaired.into_iter().map(|(k, b)| (label(k), label(b))).collect(),
        max_trace_deviation,
        min_eigenvalue,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyEntry {
    pub ket: String,
    pub bra: String,
    pub symbol: String,
    pub expected: f64,
    pub constructed: f64,
    pub params: CoeffArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub table: String,
    pub max_deviation: f64,
    pub entries: Vec<DiscrepancyEntry>,
}

impl DiscrepancyReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct `(ket, bra)` positions that disagree.
    pub fn offending_positions(&self) -> BTreeSet<(String, String)> {
        self.entries.iter().map(|e| (e.ket.clone(), e.bra.clone())).collect()
    }
}

/// Reduced matrix built from the operators for the table's state and
/// detector at one parameter point.
pub fn constructed(table: &ClosedFormTable, args: &CoeffArgs, ordering: &Ordering) -> Result<DensityMatrix, ScenarioError> {
    let spec = table.spec(args.alpha, args.fidelity);
    let state = build_shared_state_from(&spec, &ordering.kets(&args.params())?)?;
    reduce_for(table.config, &state, ordering)
}

/// Entrywise comparison of a table against the constructed matrix at one
/// point. Entries differing by more than [`MATCH_TOL`] are listed.
pub fn diff_against_constructed(
    table: &ClosedFormTable,
    args: &CoeffArgs,
    ordering: &Ordering,
) -> Result<DiscrepancyReport, ScenarioError> {
    let built = constructed(table, args, ordering)?;
    Ok(diff_matrices(table, args, table.assemble(args).matrix(), built.matrix()))
}

fn diff_matrices(table: &ClosedFormTable, args: &CoeffArgs, expected: &DMatrix<C64>, built: &DMatrix<C64>) -> DiscrepancyReport {
    let mut max_deviation: f64 = 0.0;
    let mut entries = Vec::new();
    for k in 0..8 {
        for b in 0..8 {
            let dev = (expected[(k, b)] - built[(k, b)]).norm();
            max_deviation = max_deviation.max(dev);
            if dev > MATCH_TOL {
                entries.push(DiscrepancyEntry {
                    ket: index_label(k, table.family),
                    bra: index_label(b, table.family),
                    symbol: table.symbol_at(k, b),
                    expected: expected[(k, b)].re,
                    constructed: built[(k, b)].re,
                    params: *args,
                });
            }
        }
    }
    DiscrepancyReport {
        table: table.name.to_owned(),
        max_deviation,
        entries,
    }
}

/// Parameter grid for whole-table comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffGrid {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub q_rs: Vec<f64>,
    pub fidelities: Vec<f64>,
}

impl Default for DiffGrid {
    fn default() -> DiffGrid {
        DiffGrid {
            alphas: vec![FRAC_PI_4, std::f64::consts::PI / 18.0, 1.1],
            gammas: (0..=12).map(|k| FRAC_PI_4 * k as f64 / 12.0).collect(),
            q_rs: vec![0.25, 0.5, 0.73, 0.75, 0.85, 1.0],
            fidelities: vec![0.95, 0.65, 0.3],
        }
    }
}

impl DiffGrid {
    pub fn points(&self, family: Family) -> Vec<CoeffArgs> {
        let (alphas, fids): (&[f64], &[f64]) = if family == Family::Werner {
            (&[FRAC_PI_4], &self.fidelities)
        } else {
            (&self.alphas, &[1.0])
        };
        let mut out = Vec::new();
        for &alpha in alphas {
            for &gamma in &self.gammas {
                for &q_r in &self.q_rs {
                    for &f in fids {
                        let p = UnruhParams::new(gamma, q_r).expect("grid in range");
                        out.push(CoeffArgs::new(alpha, &p, f));
                    }
                }
            }
        }
        out
    }
}

/// Health plus grid-wide diff for one table. Only the worst disagreement
/// of each offending position is kept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableComparison {
    pub health: TableHealth,
    pub report: DiscrepancyReport,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableStatus {
    Match,
    Flagged,
    Mismatch,
}

impl TableComparison {
    pub fn status(&self) -> TableStatus {
        if self.health.is_flagged() {
            TableStatus::Flagged
        } else if self.report.is_empty() {
            TableStatus::Match
        } else {
            TableStatus::Mismatch
        }
    }
}

pub fn compare_table(table: &ClosedFormTable, grid: &DiffGrid, ordering: &Ordering) -> Result<TableComparison, ScenarioError> {
    let points = grid.points(table.family);
    let mut worst: BTreeMap<(String, String), DiscrepancyEntry> = BTreeMap::new();
    let mut max_deviation: f64 = 0.0;
    for args in &points {
        let r = diff_against_constructed(table, args, ordering)?;
        max_deviation = max_deviation.max(r.max_deviation);
        for e in r.entries {
            let key = (e.ket.clone(), e.bra.clone());
            let dev = (e.expected - e.constructed).abs();
            match worst.get(&key) {
                Some(old) if (old.expected - old.constructed).abs() >= dev => {}
                _ => {
                    worst.insert(key, e);
                }
            }
        }
    }
    Ok(TableComparison {
        health: check_table(table),
        report: DiscrepancyReport {
            table: table.name.to_owned(),
            max_deviation,
            entries: worst.into_values().collect(),
        },
        points: points.len(),
    })
}

pub fn compare_all(grid: &DiffGrid, ordering: &Ordering) -> Result<Vec<TableComparison>, ScenarioError> {
    tables().iter().map(|t| compare_table(t, grid, ordering)).collect()
}

pub fn render_text(comparisons: &[TableComparison]) -> String {
    let mut out = String::new();
    for c in comparisons {
        let status = match c.status() {
            TableStatus::Match => "match",
            TableStatus::Flagged => "FLAGGED",
            TableStatus::Mismatch => "MISMATCH",
        };
        let _ = writeln!(
            out,
            "{}: {} (max deviation {:.3e} over {} points)",
            c.report.table, status, c.report.max_deviation, c.points
        );
        for reason in c.health.reasons() {
            let _ = writeln!(out, "  suspect: {reason}");
        }
        for e in &c.report.entries {
            let _ = writeln!(
                out,
                "  |{}><{}|  printed {}  expected {:.12e}  constructed {:.12e}  at alpha={:.6} gamma={:.6} qR={:.4} F={:.4}",
                e.ket, e.bra, e.symbol, e.expected, e.constructed, e.params.alpha, e.params.gamma, e.params.q_r, e.params.fidelity
            );
        }
    }
    out
}

/// Writes `<stem>.txt` and `<stem>.json`; returns both paths.
pub fn write_reports(comparisons: &[TableComparison], stem: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let txt = stem.with_extension("txt");
    let json = stem.with_extension("json");
    fs::write(&txt, render_text(comparisons))?;
    #[derive(Serialize)]
    struct Record<'a> {
        table: &'a str,
        status: TableStatus,
        #[serde(flatten)]
        entry: &'a DiscrepancyEntry,
    }
    let records: Vec<Record> = comparisons
        .iter()
        .flat_map(|c| {
            c.report.entries.iter().map(move |entry| Record {
                table: &c.report.table,
                status: c.status(),
                entry,
            })
        })
        .collect();
    let body = serde_json::to_string_pretty(&records).map_err(io::Error::other)?;
    fs::write(&json, body + "\n")?;
    Ok((txt, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(label_index("000"), Some(0));
        assert_eq!(label_index("110"), Some(6));
        assert_eq!(label_index("-01"), Some(5));
        assert_eq!(label_index("+11"), Some(3));
        assert_eq!(label_index("01"), None);
        assert_eq!(label_index("0x1"), None);
        assert_eq!(index_label(5, Family::PhiStar), "-01");
        assert_eq!(index_label(6, Family::PhiPlus), "110");
    }

    #[test]
    fn eight_tables() {
        let all = tables();
        assert_eq!(all.len(), 8);
        for t in &all {
            for term in &t.terms {
                assert!(label_index(term.ket).is_some() && label_index(term.bra).is_some(), "{term:?}");
            }
        }
    }

    #[test]
    fn phi_plus_region_i_zero_acceleration() {
        let t = table(Family::PhiPlus, DetectorConfig::AB_I).unwrap();
        let p = UnruhParams::new(0.0, 1.0).unwrap();
        let m = t.assemble(&CoeffArgs::new(FRAC_PI_4, &p, 1.0)).into_matrix();
        for (i, j) in [(0, 0), (0, 6), (6, 0), (6, 6)] {
            assert!((m[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert!((m.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn werner_at_unit_fidelity_matches_phi_plus() {
        let w = table(Family::Werner, DetectorConfig::AB_I).unwrap();
        let pp = table(Family::PhiPlus, DetectorConfig::AB_I).unwrap();
        for args in sample_points(20, 3) {
            let args = CoeffArgs {
                alpha: FRAC_PI_4,
                fidelity: 1.0,
                ..args
            };
            let d = (w.assemble(&args).into_matrix() - pp.assemble(&args).into_matrix()).norm();
            assert!(d < 1e-14, "{d}");
        }
    }

    #[test]
    fn identical_matrices_give_empty_report() {
        let t = table(Family::PhiPlus, DetectorConfig::AB_I).unwrap();
        let args = sample_points(1, 9)[0];
        let m = t.assemble(&args).into_matrix();
        let r = diff_matrices(&t, &args, &m, &m);
        assert!(r.is_empty());
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn symbols_join_duplicates() {
        let t = table(Family::PhiMinus, DetectorConfig::AB_I).unwrap();
        let s = t.symbol_at(5, 5);
        assert!(s.contains(" + "), "{s}");
        assert_eq!(t.symbol_at(4, 4), "0");
    }
}
