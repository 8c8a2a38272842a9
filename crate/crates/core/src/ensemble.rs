//! Seeded random instances for property suites.
//!
//! Every instance is a pure function of its seed. The generator is
//! SplitMix64: the state advances by `0x9E3779B97F4A7C15` per draw and each
//! output is the usual xor-shift-multiply finalizer of the state, so other
//! implementations can reproduce the streams.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::linalg::{c64, eig_hermitian, op_norm, OperatorMatrix};
use crate::open::LindbladModel;
use crate::swt::{band_split, BandSplit};
use crate::Result;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

fn gaussian_c64(r: &mut SplitMix64) -> c64 {
    c64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Complex Gaussian matrix with unit-variance real and imaginary parts.
pub fn random_complex(r: &mut SplitMix64, dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |_, _| gaussian_c64(r))
}

/// GUE-distributed Hermitian matrix.
pub fn random_hermitian(r: &mut SplitMix64, dim: usize) -> OperatorMatrix {
    random_complex(r, dim).hermitian_part()
}

/// Eigenvectors of a GUE matrix, a Haar-distributed unitary up to phases.
pub fn random_unitary(r: &mut SplitMix64, dim: usize) -> Result<OperatorMatrix> {
    Ok(eig_hermitian(&random_hermitian(r, dim))?.basis)
}

/// Hermitian matrix with operator norm exactly `norm`.
pub fn random_hermitian_with_norm(r: &mut SplitMix64, dim: usize, norm: f64) -> OperatorMatrix {
    let h = random_hermitian(r, dim);
    let n = op_norm(&h);
    h.scale_real(norm / n)
}

/// A closed test instance: `H0` with an isolated band, a coupling `V` of
/// prescribed relative strength, and an observable.
#[derive(Clone, Debug)]
pub struct ClosedInstance {
    pub seed: u64,
    pub h0: OperatorMatrix,
    pub v: OperatorMatrix,
    pub o: OperatorMatrix,
    pub split: BandSplit,
    /// `||V|| / Delta0`.
    pub ratio: f64,
}

/// Dimensions 4 to 16, band ranks 1 to 3, `||V||/Delta0` in `[0.01, 0.45]`
/// and `Delta0 = 1`.
///
/// The band spectrum lies in `[0, 0.5]`. The complement sits above the band,
/// below it, or on both sides, with one level exactly one unit away so the
/// gap is 1. Eigenvectors are rotated by a random unitary.
pub fn closed_instance(seed: u64) -> Result<ClosedInstance> {
    let mut r = rng(seed);
    let dim = r.random_range(4..=16usize);
    let rank = r.random_range(1..=3usize);
    let ratio = r.random_range(0.01..=0.45f64);
    let mut band: Vec<f64> = (0..rank).map(|_| r.random_range(0.0..=0.5f64)).collect();
    band.sort_by(f64::total_cmp);
    let (b_lo, b_hi) = (band[0], band[rank - 1]);
    // 0: above, 1: below, 2: both sides.
    let layout = r.random_range(0..3u8);
    let mut levels = band.clone();
    for k in 0..dim - rank {
        let above = match layout {
            0 => true,
            1 => false,
            _ => k % 2 == 0,
        };
        let offset = if k < 2 { 1.0 } else { 1.0 + r.random_range(0.0..=2.0f64) };
        levels.push(if above { b_hi + offset } else { b_lo - offset });
    }
    let u = random_unitary(&mut r, dim)?;
    let h0 = &(&u * &OperatorMatrix::diag_real(&levels)) * &u.adjoint();
    let h0 = h0.hermitian_part();
    let split = band_split(&h0, (b_lo - 0.25, b_hi + 0.25))?;
    let v = random_hermitian_with_norm(&mut r, dim, ratio * split.gap);
    let o = random_hermitian_with_norm(&mut r, dim, 1.0);
    Ok(ClosedInstance { seed, h0, v, o, split, ratio })
}

/// `count` instances with seeds `base, base + 1, ...`.
pub fn closed_ensemble(base: u64, count: usize) -> Result<Vec<ClosedInstance>> {
    (0..count as u64).map(|k| closed_instance(base.wrapping_add(k))).collect()
}

/// A random two-qubit Lindblad model with one jump operator.
#[derive(Clone, Debug)]
pub struct OpenInstance {
    pub seed: u64,
    pub model: LindbladModel,
    pub o: OperatorMatrix,
    /// `||V|| / Delta0`.
    pub ratio: f64,
    pub dfs_rank: usize,
}

/// Two qubits, one jump `J = G Q` where `Q` projects out a random subspace
/// of dimension 1 to 3 (the DFS) and `G` is complex Gaussian, a drive with
/// `||V|| / Delta0` in `[0.01, 0.1]` and a unit-norm Hermitian observable.
pub fn open_instance(seed: u64) -> Result<OpenInstance> {
    let dim = 4;
    let mut r = rng(seed);
    let dfs_rank = r.random_range(1..=3usize);
    let u = random_unitary(&mut r, dim)?;
    let weights: Vec<f64> = (0..dim).map(|k| if k < dfs_rank { 0.0 } else { 1.0 }).collect();
    let q = &(&u * &OperatorMatrix::diag_real(&weights)) * &u.adjoint();
    let g = random_complex(&mut r, dim);
    let j = &g * &q;
    let ratio = r.random_range(0.01..=0.1f64);
    let probe = LindbladModel::new(OperatorMatrix::zeros(dim), alloc::vec![j.clone()])?;
    let v = random_hermitian_with_norm(&mut r, dim, ratio * probe.gap());
    let o = random_hermitian_with_norm(&mut r, dim, 1.0);
    Ok(OpenInstance { seed, model: LindbladModel::new(v, alloc::vec![j])?, o, ratio, dfs_rank })
}

pub fn open_ensemble(base: u64, count: usize) -> Result<Vec<OpenInstance>> {
    (0..count as u64).map(|k| open_instance(base.wrapping_add(k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::open::dfs_projector;

    #[test]
    fn seeds_are_reproducible() {
        let a = closed_instance(7).unwrap();
        let b = closed_instance(7).unwrap();
        assert!(op_norm(&(&a.v - &b.v)) == 0.0);
        let c = closed_instance(8).unwrap();
        assert!(a.ratio != c.ratio);
    }

    #[test]
    fn closed_instances_meet_their_ranges() {
        for inst in closed_ensemble(100, 30).unwrap() {
            let d = inst.h0.dim();
            assert!((4..=16).contains(&d));
            assert!((1..=3).contains(&inst.split.rank()));
            assert!((inst.split.gap - 1.0).abs() < 1e-12, "gap {}", inst.split.gap);
            assert!((op_norm(&inst.v) / inst.split.gap - inst.ratio).abs() < 1e-12);
            assert!((0.01..=0.45).contains(&inst.ratio));
            assert!((op_norm(&inst.o) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn open_instances_have_a_dfs() {
        for inst in open_ensemble(500, 20).unwrap() {
            let split = dfs_projector(&inst.model).unwrap();
            assert_eq!(split.rank(), inst.dfs_rank);
            assert!(inst.model.gap() >= 10.0 * op_norm(inst.model.v()) * (1.0 - 1e-12));
        }
    }
}
