//! Truncated Fock-space simulation of the lossless pump acting on vacuum.
//!
//! The state `exp(r (X − X†)) |0⟩` with `X = â†_h b̂†_v − â†_v b̂†_h` is built
//! directly on the basis of four-mode number states with at most `2·n_max`
//! photons, by Taylor-stepping the exponential on the state vector. Observables
//! are then explicit matrix elements, with no reference to second moments.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::criteria::CorrelatorSpec;
use crate::error::{Error, Result};
use crate::gaussian::ModeIndex;
use crate::wick::OperatorFactor;

/// Largest truncated basis the oracle will build.
pub const MAX_FOCK_DIMENSION: usize = 150_000;

/// Largest gain increment per Taylor step.
const TAYLOR_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockConfig {
    /// Pair-number cutoff; the basis holds states with at most `2·n_max`
    /// photons in total.
    pub n_max: usize,
    pub r: f64,
}

impl FockConfig {
    pub fn new(n_max: usize, r: f64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::domain("n_max must be ≥ 1"));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("r must be finite and ≥ 0, got {r}")));
        }
        Ok(Self { n_max, r })
    }

    /// Smallest cutoff whose truncation estimate is below `target`.
    pub fn for_gain(r: f64, target: f64) -> Result<Self> {
        let t2 = r.tanh().powi(2);
        let n_max = if t2 == 0.0 {
            1
        } else {
            ((target.ln() / t2.ln()).floor() as usize + 1).max(1)
        };
        Self::new(n_max, r)
    }

    /// `tanh^{2·n_max}(r)`, the weight of the first omitted pair number.
    pub fn truncation_estimate(&self) -> f64 {
        self.r.tanh().powi(2 * self.n_max as i32)
    }

    /// Number of basis states, `C(2·n_max + 4, 4)`.
    pub fn dimension(&self) -> usize {
        let p = 2 * self.n_max;
        (p + 1) * (p + 2) * (p + 3) * (p + 4) / 24
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockObservable {
    JSquared,
    TotalN,
    BCorrelator(CorrelatorSpec),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockResult {
    pub value: f64,
    pub truncation_error: f64,
}

type Occupations = [u32; 4];
type Sparse = BTreeMap<Occupations, Complex64>;

/// Evolved pure state on the truncated basis.
#[derive(Clone, Debug)]
pub struct FockState {
    config: FockConfig,
    amplitudes: Sparse,
}

fn enumerate_basis(max_photons: u32) -> Vec<Occupations> {
    let mut basis = Vec::new();
    for total in 0..=max_photons {
        for a in 0..=total {
            for b in 0..=(total - a) {
                for c in 0..=(total - a - b) {
                    basis.push([a, b, c, total - a - b - c]);
                }
            }
        }
    }
    basis
}

/// Column-wise sparse form of the anti-Hermitian generator `X − X†`
/// restricted to the basis.
fn generator_columns(
    basis: &[Occupations],
    index: &HashMap<Occupations, usize>,
) -> Vec<Vec<(usize, f64)>> {
    let (ah, av, bh, bv) = (
        ModeIndex::AH.index(),
        ModeIndex::AV.index(),
        ModeIndex::BH.index(),
        ModeIndex::BV.index(),
    );
    let shift = |n: &Occupations, i: usize, j: usize, up: bool| -> Option<(Occupations, f64)> {
        let mut out = *n;
        let weight = if up {
            out[i] += 1;
            out[j] += 1;
            ((n[i] + 1) as f64 * (n[j] + 1) as f64).sqrt()
        } else {
            if n[i] == 0 || n[j] == 0 {
                return None;
            }
            out[i] -= 1;
            out[j] -= 1;
            (n[i] as f64 * n[j] as f64).sqrt()
        };
        Some((out, weight))
    };

    basis
        .iter()
        .map(|n| {
            let mut col = Vec::with_capacity(4);
            // X|n⟩ = â†_h b̂†_v|n⟩ − â†_v b̂†_h|n⟩, and −X†|n⟩ with the opposite signs
            let terms = [
                (ah, bv, true, 1.0),
                (av, bh, true, -1.0),
                (ah, bv, false, -1.0),
                (av, bh, false, 1.0),
            ];
            for (i, j, up, sign) in terms {
                if let Some((target, w)) = shift(n, i, j, up) {
                    if let Some(&row) = index.get(&target) {
                        col.push((row, sign * w));
                    }
                }
            }
            col
        })
        .collect()
}

impl FockState {
    pub fn evolve(config: &FockConfig) -> Result<Self> {
        let dim = config.dimension();
        if dim > MAX_FOCK_DIMENSION {
            return Err(Error::Capacity {
                what: "Fock basis dimension",
                size: dim,
                limit: MAX_FOCK_DIMENSION,
            });
        }
        let basis = enumerate_basis(2 * config.n_max as u32);
        debug_assert_eq!(basis.len(), dim);
        let index: HashMap<Occupations, usize> =
            basis.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let columns = generator_columns(&basis, &index);

        let mut psi = vec![0.0; dim];
        psi[index[&[0, 0, 0, 0]]] = 1.0;
        let steps = (config.r / TAYLOR_STEP).ceil().max(1.0) as usize;
        let h = config.r / steps as f64;
        let mut term = vec![0.0; dim];
        let mut next = vec![0.0; dim];
        for _ in 0..steps {
            term.copy_from_slice(&psi);
            for k in 1..=60 {
                next.iter_mut().for_each(|x| *x = 0.0);
                for (col, entries) in columns.iter().enumerate() {
                    let x = term[col];
                    if x == 0.0 {
                        continue;
                    }
                    for &(row, g) in entries {
                        next[row] += g * x;
                    }
                }
                let scale = h / k as f64;
                let mut norm2 = 0.0;
                for (t, n) in term.iter_mut().zip(next.iter()) {
                    *t = n * scale;
                    norm2 += *t * *t;
                }
                for (p, t) in psi.iter_mut().zip(term.iter()) {
                    *p += t;
                }
                if norm2.sqrt() < 1e-18 {
                    break;
                }
            }
        }

        let amplitudes = basis
            .iter()
            .zip(psi)
            .filter(|(_, a)| *a != 0.0)
            .map(|(n, a)| (*n, Complex64::new(a, 0.0)))
            .collect();
        Ok(Self {
            config: *config,
            amplitudes,
        })
    }

    pub fn config(&self) -> &FockConfig {
        &self.config
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨ψ| factors[0] · factors[1] · … |ψ⟩`.
    pub fn moment(&self, factors: &[OperatorFactor]) -> Complex64 {
        let mut phi = self.amplitudes.clone();
        for f in factors.iter().rev() {
            phi = apply_factor(&phi, *f);
        }
        inner(&self.amplitudes, &phi)
    }

    pub fn expectation(&self, observable: FockObservable) -> FockResult {
        let value = match observable {
            FockObservable::TotalN => self
                .amplitudes
                .iter()
                .map(|(n, a)| a.norm_sqr() * n.iter().sum::<u32>() as f64)
                .sum(),
            FockObservable::JSquared => {
                let components = [stokes_x, stokes_y, stokes_z];
                components
                    .iter()
                    .map(|component| {
                        let mut total = component(&self.amplitudes, 0, 1);
                        add_into(
                            &mut total,
                            &component(&self.amplitudes, 2, 3),
                            Complex64::new(1.0, 0.0),
                        );
                        inner(&total, &total).re
                    })
                    .sum()
            }
            FockObservable::BCorrelator(spec) => {
                let mut phi = self.amplitudes.clone();
                for f in spec.destruction_string().iter().rev() {
                    phi = apply_factor(&phi, *f);
                }
                inner(&phi, &phi).re
            }
        };
        FockResult {
            value,
            truncation_error: self.config.truncation_estimate(),
        }
    }
}

/// Evolves the vacuum and evaluates one observable.
pub fn fock_expectation(config: &FockConfig, observable: FockObservable) -> Result<FockResult> {
    Ok(FockState::evolve(config)?.expectation(observable))
}

fn inner(bra: &Sparse, ket: &Sparse) -> Complex64 {
    bra.iter()
        .filter_map(|(n, a)| ket.get(n).map(|b| a.conj() * b))
        .sum()
}

fn add_into(acc: &mut Sparse, other: &Sparse, weight: Complex64) {
    for (n, a) in other {
        *acc.entry(*n).or_default() += weight * a;
    }
}

fn apply_factor(state: &Sparse, factor: OperatorFactor) -> Sparse {
    let i = factor.mode.index();
    let mut out = Sparse::new();
    for (n, a) in state {
        let mut m = *n;
        if factor.dagger {
            m[i] += 1;
            out.insert(m, a * (m[i] as f64).sqrt());
        } else if n[i] > 0 {
            m[i] -= 1;
            out.insert(m, a * (n[i] as f64).sqrt());
        }
    }
    out
}

// Schwinger forms for one arm with horizontal mode `h` and vertical `v`:
// Ĵ_z = (n̂_h − n̂_v)/2, Ĵ_x = (â†_h â_v + â†_v â_h)/2, Ĵ_y = i(â†_h â_v − â†_v â_h)/2.
fn hop(state: &Sparse, to: usize, from: usize) -> Sparse {
    let to = OperatorFactor::create(ModeIndex::ALL[to]);
    let from = OperatorFactor::annihilate(ModeIndex::ALL[from]);
    apply_factor(&apply_factor(state, from), to)
}

fn stokes_z(state: &Sparse, h: usize, v: usize) -> Sparse {
    state
        .iter()
        .map(|(n, a)| (*n, a * 0.5 * (n[h] as f64 - n[v] as f64)))
        .collect()
}

fn stokes_x(state: &Sparse, h: usize, v: usize) -> Sparse {
    let mut out = Sparse::new();
    add_into(&mut out, &hop(state, h, v), Complex64::new(0.5, 0.0));
    add_into(&mut out, &hop(state, v, h), Complex64::new(0.5, 0.0));
    out
}

fn stokes_y(state: &Sparse, h: usize, v: usize) -> Sparse {
    let mut out = Sparse::new();
    add_into(&mut out, &hop(state, h, v), Complex64::new(0.0, 0.5));
    add_into(&mut out, &hop(state, v, h), Complex64::new(0.0, -0.5));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_cap() {
        let c = FockConfig::new(2, 0.1).unwrap();
        assert_eq!(c.dimension(), 70);
        assert_eq!(enumerate_basis(4).len(), 70);
        let big = FockConfig::new(30, 0.1).unwrap();
        assert!(matches!(
            FockState::evolve(&big),
            Err(Error::Capacity { .. })
        ));
        assert!(FockConfig::new(0, 0.1).is_err());
        assert!(FockConfig::new(3, -0.1).is_err());
    }

    #[test]
    fn cutoff_selection_meets_target() {
        let c = FockConfig::for_gain(0.3, 1e-8).unwrap();
        assert!(c.truncation_estimate() < 1e-8);
        let smaller = FockConfig::new(c.n_max - 1, 0.3).unwrap();
        assert!(smaller.truncation_estimate() >= 1e-8);
        assert_eq!(FockConfig::for_gain(0.0, 1e-8).unwrap().n_max, 1);
    }

    #[test]
    fn evolution_is_unitary_and_gives_pair_statistics() {
        let config = FockConfig::for_gain(0.3, 1e-14).unwrap();
        let state = FockState::evolve(&config).unwrap();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        let n = state.expectation(FockObservable::TotalN).value;
        assert!((n - 4.0 * 0.3f64.sinh().powi(2)).abs() < 1e-10);
        let ah_bv = state.moment(&[
            OperatorFactor::annihilate(ModeIndex::AH),
            OperatorFactor::annihilate(ModeIndex::BV),
        ]);
        let av_bh = state.moment(&[
            OperatorFactor::annihilate(ModeIndex::AV),
            OperatorFactor::annihilate(ModeIndex::BH),
        ]);
        let a = 0.3f64.sinh() * 0.3f64.cosh();
        assert!((ah_bv.re - a).abs() < 1e-10);
        assert!((av_bh.re + a).abs() < 1e-10);
    }

    #[test]
    fn pumped_vacuum_is_a_singlet() {
        for r in [0.1, 0.3, 0.5] {
            let config = FockConfig::for_gain(r, 1e-12).unwrap();
            let j2 = fock_expectation(&config, FockObservable::JSquared).unwrap();
            assert!(j2.value.abs() < 1e-9, "r={r}: {}", j2.value);
            assert!(j2.truncation_error < 1e-12);
        }
    }

    #[test]
    fn unpumped_state_is_vacuum() {
        let s = FockState::evolve(&FockConfig::new(2, 0.0).unwrap()).unwrap();
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.expectation(FockObservable::TotalN).value, 0.0);
    }
}
