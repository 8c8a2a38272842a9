//! Open 1D spin-1/2 chains.
//!
//! Sites are numbered `1..=N`. Site 1 is the most significant tensor factor,
//! so site `s` lives on bit `N - s` of a computational basis index. Bit value
//! 0 is spin up (`sigma^z = +1`), 1 is spin down. Inside a local matrix the
//! support sites are ordered ascending, the first one again most significant.

use alloc::vec;
use alloc::vec::Vec;

use faer::{Mat, MatMut, MatRef};

use crate::linalg::{self, c64, eig_hermitian, op_norm, OperatorMatrix, ZERO};
use crate::{Error, Result};

/// Largest chain the dense simulators accept.
pub const MAX_SITES: usize = 12;

/// Nonempty sorted set of sites of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportSet {
    sites: Vec<usize>,
}

impl SupportSet {
    pub fn new(sites: &[usize], chain_length: usize) -> Result<Self> {
        let mut s = sites.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(Error::InvalidParam("support must be nonempty".into()));
        }
        for &x in &s {
            if x == 0 || x > chain_length {
                return Err(Error::IndexOutOfRange { index: x, len: chain_length });
            }
        }
        Ok(Self { sites: s })
    }

    pub fn single(site: usize, chain_length: usize) -> Result<Self> {
        Self::new(&[site], chain_length)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> usize {
        self.sites[0]
    }

    pub fn max(&self) -> usize {
        self.sites[self.sites.len() - 1]
    }

    /// `l_A = max - min`.
    pub fn diameter(&self) -> usize {
        self.max() - self.min()
    }

    /// Smallest `r` such that some lattice site is within `r` of every member.
    pub fn radius(&self) -> usize {
        self.diameter().div_ceil(2)
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.sites.iter().any(|s| other.contains(*s))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.sites.clone();
        s.extend_from_slice(&other.sites);
        s.sort_unstable();
        s.dedup();
        Self { sites: s }
    }

    /// Chain distance between the closest members.
    pub fn dist(&self, other: &Self) -> usize {
        let mut best = usize::MAX;
        for &a in &self.sites {
            for &b in &other.sites {
                best = best.min(a.abs_diff(b));
            }
        }
        best
    }
}

/// Bit masks that scatter a local basis index onto a full chain index.
#[derive(Clone, Debug)]
struct Scatter {
    mask: usize,
    bits: Vec<usize>,
    patterns: Vec<usize>,
}

impl Scatter {
    fn new(support: &SupportSet, chain_length: usize) -> Self {
        let k = support.len();
        let bits: Vec<usize> = support.sites().iter().map(|&s| chain_length - s).collect();
        let mask = bits.iter().fold(0usize, |m, &b| m | (1 << b));
        let patterns = (0..1usize << k)
            .map(|a| {
                let mut p = 0usize;
                for (idx, &b) in bits.iter().enumerate() {
                    if (a >> (k - 1 - idx)) & 1 == 1 {
                        p |= 1 << b;
                    }
                }
                p
            })
            .collect();
        Self { mask, bits, patterns }
    }

    fn local_index(&self, full: usize) -> usize {
        let k = self.bits.len();
        self.bits.iter().enumerate().fold(0, |a, (idx, &b)| a | (((full >> b) & 1) << (k - 1 - idx)))
    }
}

/// An operator acting nontrivially only on `support`.
///
/// The local factor is stored; the full `2^N` matrix is built on request.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    support: SupportSet,
    local: OperatorMatrix,
    local_norm: f64,
    chain_length: usize,
    scatter: Scatter,
}

impl LocalTerm {
    pub fn new(local: OperatorMatrix, support: SupportSet, chain_length: usize) -> Result<Self> {
        if chain_length == 0 || chain_length > MAX_SITES {
            return Err(Error::InvalidParam(alloc::format!("chain length {chain_length} outside 1..={MAX_SITES}")));
        }
        if support.max() > chain_length {
            return Err(Error::IndexOutOfRange { index: support.max(), len: chain_length });
        }
        let expected = 1usize << support.len();
        if local.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: local.dim() });
        }
        let local_norm = op_norm(&local);
        let scatter = Scatter::new(&support, chain_length);
        Ok(Self { support, local, local_norm, chain_length, scatter })
    }

    /// Single-site operator at `site`.
    pub fn site(op: &OperatorMatrix, site: usize, chain_length: usize) -> Result<Self> {
        Self::new(op.clone(), SupportSet::single(site, chain_length)?, chain_length)
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn local(&self) -> &OperatorMatrix {
        &self.local
    }

    pub fn local_norm(&self) -> f64 {
        self.local_norm
    }

    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn dim(&self) -> usize {
        1 << self.chain_length
    }

    /// Row of the local factor that full basis index `full` sees.
    pub fn local_index(&self, full: usize) -> usize {
        self.scatter.local_index(full)
    }

    pub fn full_matrix(&self) -> OperatorMatrix {
        let n = self.dim();
        let mut out = Mat::<c64>::zeros(n, n);
        let sc = &self.scatter;
        let k = sc.patterns.len();
        for i in 0..n {
            let rest = i & !sc.mask;
            let a = sc.local_index(i);
            for b in 0..k {
                let v = self.local.get(a, b);
                if v != ZERO {
                    out[(i, rest | sc.patterns[b])] = v;
                }
            }
        }
        OperatorMatrix::wrap(out)
    }

    /// `Y = B X` column by column without forming the full matrix.
    pub fn apply(&self, x: MatRef<'_, c64>, mut y: MatMut<'_, c64>) {
        let n = self.dim();
        let sc = &self.scatter;
        let k = sc.patterns.len();
        for c in 0..x.ncols() {
            for i in 0..n {
                let rest = i & !sc.mask;
                let a = sc.local_index(i);
                let mut acc = ZERO;
                for b in 0..k {
                    acc += self.local.get(a, b) * x[(rest | sc.patterns[b], c)];
                }
                y[(i, c)] = acc;
            }
        }
    }

    /// `Y = X B` row by row.
    pub fn apply_right(&self, x: MatRef<'_, c64>, mut y: MatMut<'_, c64>) {
        let n = self.dim();
        let sc = &self.scatter;
        let k = sc.patterns.len();
        for j in 0..n {
            let rest = j & !sc.mask;
            let b = sc.local_index(j);
            for r in 0..x.nrows() {
                let mut acc = ZERO;
                for a in 0..k {
                    acc += x[(r, rest | sc.patterns[a])] * self.local.get(a, b);
                }
                y[(r, j)] = acc;
            }
        }
    }
}

/// A sum of local terms on one chain.
#[derive(Clone, Debug)]
pub struct InteractionSum {
    pub chain_length: usize,
    pub terms: Vec<LocalTerm>,
}

impl InteractionSum {
    pub fn new(chain_length: usize) -> Self {
        Self { chain_length, terms: Vec::new() }
    }

    pub fn push(&mut self, term: LocalTerm) -> Result<()> {
        if term.chain_length() != self.chain_length {
            return Err(Error::DimensionMismatch { expected: self.chain_length, found: term.chain_length() });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.chain_length
    }

    /// Sum of all term matrices on the full space.
    pub fn total(&self) -> OperatorMatrix {
        let mut acc = OperatorMatrix::zeros(self.dim());
        for t in &self.terms {
            acc += &t.full_matrix();
        }
        acc
    }

    /// Largest term diameter.
    pub fn max_diameter(&self) -> usize {
        self.terms.iter().map(|t| t.support().diameter()).max().unwrap_or(0)
    }

    /// Largest term support size.
    pub fn max_support(&self) -> usize {
        self.terms.iter().map(|t| t.support().len()).max().unwrap_or(0)
    }
}

/// `sigma^y` on site `j` as a local term.
pub fn pauli_y_site(j: usize, n: usize) -> Result<LocalTerm> {
    LocalTerm::site(&crate::linalg::pauli::y(), j, n)
}

/// Places a 2x2 operator on site `j` of an `n`-site chain.
pub fn embed_site(op: &OperatorMatrix, j: usize, n: usize) -> Result<OperatorMatrix> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    Ok(LocalTerm::site(op, j, n)?.full_matrix())
}

/// Parent Hamiltonian of the PXP model on an open chain.
///
/// `H0 = (delta0/4) sum_j (sz_j + 1)(sz_{j+1} + 1)` as `N-1` bond terms and
/// `V = (omega/2) sum_j sx_j` as `N` site terms.
pub fn build_pxp(n: usize, delta0: f64, omega: f64) -> Result<(InteractionSum, InteractionSum)> {
    if n < 2 {
        return Err(Error::InvalidParam(alloc::format!("PXP chain needs N >= 2, got {n}")));
    }
    if !(delta0 > 0.0) {
        return Err(Error::InvalidParam(alloc::format!("delta0 must be positive, got {delta0}")));
    }
    if !omega.is_finite() {
        return Err(Error::InvalidParam("omega must be finite".into()));
    }
    let mut h0 = InteractionSum::new(n);
    // (sz+1)(sz+1)/4 is |up up><up up|, local index 0.
    let bond = OperatorMatrix::diag_real(&[delta0, 0.0, 0.0, 0.0]);
    for j in 1..n {
        h0.push(LocalTerm::new(bond.clone(), SupportSet::new(&[j, j + 1], n)?, n)?)?;
    }
    let mut v = InteractionSum::new(n);
    let x = linalg::pauli::x().scale_real(omega / 2.0);
    for j in 1..=n {
        v.push(LocalTerm::site(&x, j, n)?)?;
    }
    Ok((h0, v))
}

/// Projector onto configurations with no two adjacent up spins.
pub fn pxp_projector(n: usize) -> OperatorMatrix {
    let dim = 1usize << n;
    let mut p = OperatorMatrix::zeros(dim);
    for i in 0..dim {
        // Up is bit 0; adjacent ups are adjacent zero bits.
        let up = !i & (dim - 1);
        if up & (up >> 1) == 0 {
            p.set(i, i, linalg::ONE);
        }
    }
    p
}

/// `||W||_mu = max_j sum_{A contains j} ||W_A|| e^{mu l_A}`.
pub fn interaction_norm(w: &InteractionSum, mu: f64) -> f64 {
    let mut per_site = vec![0.0f64; w.chain_length + 1];
    for t in &w.terms {
        let weight = t.local_norm() * libm::exp(mu * t.support().diameter() as f64);
        for &s in t.support().sites() {
            per_site[s] += weight;
        }
    }
    per_site.into_iter().fold(0.0, f64::max)
}

/// `w = max_j |union of the supports R_j' that contain j|`.
pub fn w_constant(h0: &InteractionSum) -> usize {
    let mut best = 0;
    for j in 1..=h0.chain_length {
        let mut acc: Option<SupportSet> = None;
        for t in h0.terms.iter().filter(|t| t.support().contains(j)) {
            acc = Some(match acc {
                None => t.support().clone(),
                Some(a) => a.union(t.support()),
            });
        }
        best = best.max(acc.map_or(0, |a| a.len()));
    }
    best
}

/// Locality degree of the local generator: the largest support obtained by
/// joining a `V` support with all `H0` supports it touches.
pub fn u_constant(h0: &InteractionSum, v: &InteractionSum) -> usize {
    v.terms
        .iter()
        .map(|vt| {
            h0.terms
                .iter()
                .filter(|ht| ht.support().intersects(vt.support()))
                .fold(vt.support().clone(), |acc, ht| acc.union(ht.support()))
                .len()
        })
        .max()
        .unwrap_or(0)
}

/// Number of sites in a radius-`r` ball of the 1D chain, `2r + 1`.
pub fn ball_volume_1d(r: f64) -> f64 {
    2.0 * r + 1.0
}

/// Result of the local Schrieffer-Wolff construction for a frustration-free
/// commuting `H0`.
#[derive(Clone, Debug)]
pub struct LocalSwt {
    /// Generator terms `L_A(V_A)`, supported on `R_A`.
    pub generator: InteractionSum,
    /// Block-diagonal terms `D_A(V_A) = P_A V_A P_A + Q_A V_A Q_A`.
    pub diagonal: InteractionSum,
    /// Off-diagonal terms `P_A V_A Q_A + h.c.`.
    pub off_diagonal: InteractionSum,
    /// Smallest nonzero eigenvalue over all local `H0_A` blocks.
    pub local_gap: f64,
}

impl LocalSwt {
    /// `H1 = H0 + sum_A D_A(V_A)` on the full space.
    pub fn h1(&self, h0: &InteractionSum) -> OperatorMatrix {
        &h0.total() + &self.diagonal.total()
    }

    pub fn t(&self) -> OperatorMatrix {
        self.generator.total()
    }
}

/// Builds the local generator `T = sum_A (Q_A H0_A Q_A)^{-1} Q_A V_A P_A - h.c.`.
///
/// Every `H0` term must be positive semidefinite; `P_j` is its kernel
/// projector and `P_A` the product over terms touching `A`.
pub fn local_swt(h0: &InteractionSum, v: &InteractionSum) -> Result<LocalSwt> {
    if h0.chain_length != v.chain_length {
        return Err(Error::DimensionMismatch { expected: h0.chain_length, found: v.chain_length });
    }
    let n = h0.chain_length;
    let mut generator = InteractionSum::new(n);
    let mut diagonal = InteractionSum::new(n);
    let mut off_diagonal = InteractionSum::new(n);
    let mut local_gap = f64::INFINITY;
    for vt in &v.terms {
        let touching: Vec<&LocalTerm> = h0.terms.iter().filter(|ht| ht.support().intersects(vt.support())).collect();
        let region = touching.iter().fold(vt.support().clone(), |acc, ht| acc.union(ht.support()));
        let dim = 1usize << region.len();
        // Work on the R_A space: re-embed every factor there.
        let embed_in_region = |term: &LocalTerm| -> Result<OperatorMatrix> {
            let shifted: Vec<usize> = term
                .support()
                .sites()
                .iter()
                .map(|s| region.sites().iter().position(|r| r == s).unwrap() + 1)
                .collect();
            Ok(LocalTerm::new(term.local().clone(), SupportSet::new(&shifted, region.len())?, region.len())?
                .full_matrix())
        };
        let mut h0a = OperatorMatrix::zeros(dim);
        for ht in &touching {
            h0a += &embed_in_region(ht)?;
        }
        let va = embed_in_region(vt)?;
        let eig = eig_hermitian(&h0a)?;
        let scale = eig.norm().max(f64::MIN_POSITIVE);
        if eig.eigenvalues[0] < -1e-10 * scale {
            return Err(Error::InvalidParam("local H0 terms must be positive semidefinite".into()));
        }
        let tol = 1e-10 * scale;
        if eig.eigenvalues.iter().all(|&x| x <= tol) {
            // Nothing gapped in this region; V_A is already block diagonal.
            diagonal.push(LocalTerm::new(va.clone(), region.clone(), n)?)?;
            continue;
        }
        for &x in &eig.eigenvalues {
            if x > tol {
                local_gap = local_gap.min(x);
            }
        }
        let pa = eig.map(|x| if x <= tol { linalg::ONE } else { ZERO });
        let qa = &OperatorMatrix::identity(dim) - &pa;
        let pinv = eig.map(|x| if x <= tol { ZERO } else { c64::new(1.0 / x, 0.0) });
        let qvp = &(&qa * &va) * &pa;
        let l = &pinv * &qvp;
        let t_local = &l - &l.adjoint();
        let d_local = &(&(&pa * &va) * &pa) + &(&(&qa * &va) * &qa);
        let o_local = &qvp + &qvp.adjoint();
        generator.push(LocalTerm::new(t_local, region.clone(), n)?)?;
        diagonal.push(LocalTerm::new(d_local, region.clone(), n)?)?;
        off_diagonal.push(LocalTerm::new(o_local, region, n)?)?;
    }
    Ok(LocalSwt { generator, diagonal, off_diagonal, local_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn embed_conventions() {
        let id = embed_site(&pauli::identity(), 2, 3).unwrap();
        assert!(op_norm(&(&id - &OperatorMatrix::identity(8))) == 0.0);
        // Site 1 is the most significant factor.
        let z1 = embed_site(&pauli::z(), 1, 2).unwrap();
        let expect = OperatorMatrix::diag_real(&[1.0, 1.0, -1.0, -1.0]);
        assert!(op_norm(&(&z1 - &expect)) == 0.0);
        let x1 = embed_site(&pauli::x(), 1, 2).unwrap();
        let x2 = embed_site(&pauli::x(), 2, 2).unwrap();
        assert!(op_norm(&x1.commutator(&x2)) == 0.0);
        assert!(op_norm(&(&x1 - &pauli::x().kron(&pauli::identity()))) == 0.0);
        assert!(op_norm(&(&x2 - &pauli::identity().kron(&pauli::x()))) == 0.0);
        assert!(matches!(embed_site(&pauli::x(), 3, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn two_site_embedding_matches_kron() {
        let a = pauli::x().kron(&pauli::y());
        let t = LocalTerm::new(a.clone(), SupportSet::new(&[2, 3], 4).unwrap(), 4).unwrap();
        let expect = pauli::identity().kron(&a).kron(&pauli::identity());
        assert!(op_norm(&(&t.full_matrix() - &expect)) < 1e-15);
        // Non-adjacent support: site 1 and 3 of 3.
        let t = LocalTerm::new(a, SupportSet::new(&[1, 3], 3).unwrap(), 3).unwrap();
        let expect = &embed_site(&pauli::x(), 1, 3).unwrap() * &embed_site(&pauli::y(), 3, 3).unwrap();
        assert!(op_norm(&(&t.full_matrix() - &expect)) < 1e-15);
    }

    #[test]
    fn apply_matches_full_matrix() {
        let a = pauli::x().kron(&pauli::z()).scale(c64::new(0.3, 0.8));
        let t = LocalTerm::new(a, SupportSet::new(&[2, 4], 5).unwrap(), 5).unwrap();
        let full = t.full_matrix();
        let x = Mat::<c64>::from_fn(32, 3, |i, j| c64::new(i as f64 * 0.1 - j as f64, (i * j) as f64 * 0.01));
        let mut y = Mat::<c64>::zeros(32, 3);
        t.apply(x.as_ref(), y.as_mut());
        let expect = full.as_ref() * x.as_ref();
        assert!((&y - &expect).norm_max() < 1e-13);
        let xr = Mat::<c64>::from_fn(3, 32, |i, j| c64::new(j as f64 * 0.1 - i as f64, 0.2));
        let mut yr = Mat::<c64>::zeros(3, 32);
        t.apply_right(xr.as_ref(), yr.as_mut());
        let expect = xr.as_ref() * full.as_ref();
        assert!((&yr - &expect).norm_max() < 1e-13);
    }

    #[test]
    fn pxp_two_sites() {
        let (h0, _) = build_pxp(2, 3.0, 1.0).unwrap();
        let e = eig_hermitian(&h0.total()).unwrap();
        let expect = [0.0, 0.0, 0.0, 3.0];
        for (a, b) in e.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(w_constant(&h0), 2);
        assert!(matches!(build_pxp(3, 0.0, 1.0), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn pxp_projector_ranks() {
        let fib = [1usize, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144];
        for n in 2..=8 {
            let p = pxp_projector(n);
            let rank = p.trace().re.round() as usize;
            assert_eq!(rank, fib[n + 1], "N = {n}");
            assert!(op_norm(&(&(&p * &p) - &p)) == 0.0);
        }
        // N=2 excludes only |up up>.
        let p = pxp_projector(2);
        assert_eq!(p.get(0, 0).re, 0.0);
    }

    #[test]
    fn pxp_norms() {
        for n in [2, 3, 6] {
            let (h0, v) = build_pxp(n, 10.0, 2.0).unwrap();
            assert!((interaction_norm(&v, 0.0) - 1.0).abs() < 1e-14);
            assert!((interaction_norm(&v, 2.0) - 1.0).abs() < 1e-14);
            let expect = if n == 2 { 10.0 } else { 20.0 };
            assert!((interaction_norm(&h0, 0.0) - expect).abs() < 1e-12);
            assert!(interaction_norm(&h0, 0.5) >= interaction_norm(&h0, 0.0));
            assert_eq!(u_constant(&h0, &v), if n == 2 { 2 } else { 3 });
        }
        let (h0, _) = build_pxp(5, 1.0, 1.0).unwrap();
        assert_eq!(w_constant(&h0), 3);
        let mut onsite = InteractionSum::new(4);
        for j in 1..=4 {
            onsite.push(LocalTerm::site(&pauli::z(), j, 4).unwrap()).unwrap();
        }
        assert_eq!(w_constant(&onsite), 1);
        assert!((interaction_norm(&onsite, 3.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn support_geometry() {
        let a = SupportSet::new(&[3, 1, 3], 5).unwrap();
        assert_eq!(a.sites(), &[1, 3]);
        assert_eq!(a.diameter(), 2);
        assert_eq!(a.radius(), 1);
        let b = SupportSet::new(&[5], 5).unwrap();
        assert_eq!(a.dist(&b), 2);
        assert_eq!(SupportSet::new(&[1, 2], 5).unwrap().radius(), 1);
        assert!(SupportSet::new(&[], 5).is_err());
        assert!(SupportSet::new(&[6], 5).is_err());
        assert_eq!(ball_volume_1d(0.0), 1.0);
        assert_eq!(ball_volume_1d(3.0), 7.0);
    }

    #[test]
    fn local_swt_pxp_generator_equation() {
        let (h0, v) = build_pxp(5, 10.0, 1.3).unwrap();
        let sw = local_swt(&h0, &v).unwrap();
        let h0m = h0.total();
        let t = sw.t();
        let off = sw.off_diagonal.total();
        assert!(op_norm(&(&h0m.commutator(&t) - &off)) < 1e-12);
        // Each generator term obeys ||L_A(V_A)|| <= ||V_A|| / delta0.
        for (gt, vt) in sw.generator.terms.iter().zip(&v.terms) {
            assert!(gt.local_norm() <= vt.local_norm() / 10.0 + 1e-14);
        }
        assert!((sw.local_gap - 10.0).abs() < 1e-12);
        let w = w_constant(&h0) as f64;
        assert!(interaction_norm(&sw.generator, 0.0) <= w * interaction_norm(&v, 0.0) / 10.0 + 1e-12);
    }
}
