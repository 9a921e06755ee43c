//! Cross-checks of the matrix pipelines against dense linear algebra from nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use spread_core::eigen::TridiagEigen;
use spread_core::evolution::log_grid;
use spread_core::hamiltonians::{disorder_fields, random_state, ring_bonds, state_moments};
use spread_core::tridiag::{householder_full, lanczos_with_basis};
use spread_core::{
    build_spin_sector, domain_wall_state, householder_hessenberg, lanczos_tridiagonalize, ldos_summary,
    moments_to_lanczos, sample_goe, KrylovEvolution, SectorHamiltonian, SpinChainSpec,
};

fn dense(ham: &SectorHamiltonian) -> DMatrix<f64> {
    let n = ham.dim();
    DMatrix::from_fn(n, n, |i, j| ham.h.get(i, j))
}

fn spectrum(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn full_depth_lanczos_recovers_the_spectrum() {
    for (dim, seed) in [(5, 1), (30, 2), (120, 3)] {
        let ham = sample_goe(dim, seed).unwrap();
        let psi = random_state(dim, seed + 100).unwrap();
        let lc = lanczos_tridiagonalize(&ham, &psi, dim).unwrap();
        assert_eq!(lc.dim(), dim);
        let eig = TridiagEigen::new(lc.a(), lc.b()).unwrap();
        for (x, y) in eig.values().iter().zip(spectrum(dense(&ham))) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn partial_depth_ritz_values_interlace() {
    let ham = sample_goe(80, 9).unwrap();
    let psi = random_state(80, 10).unwrap();
    let full = spectrum(dense(&ham));
    let lc = lanczos_tridiagonalize(&ham, &psi, 20).unwrap();
    let ritz = TridiagEigen::new(lc.a(), lc.b()).unwrap();
    let (lo, hi) = (full[0], full[full.len() - 1]);
    assert!(ritz.values().iter().all(|&r| r >= lo - 1e-10 && r <= hi + 1e-10));
}

#[test]
fn krylov_basis_is_orthonormal() {
    let ham = sample_goe(150, 4).unwrap();
    let psi = random_state(150, 5).unwrap();
    let (_, basis) = lanczos_with_basis(&ham, &psi, 150).unwrap();
    assert!(basis.orthonormality_error() < 1e-10);
    let spin = build_spin_sector(&SpinChainSpec::new(10, 0.4, 3)).unwrap();
    let wall = domain_wall_state(&spin).unwrap();
    let (_, basis) = lanczos_with_basis(&spin, &wall, 100).unwrap();
    assert!(basis.orthonormality_error() < 1e-10);
}

#[test]
fn lanczos_and_householder_agree() {
    for (dim, seed) in [(12, 1), (60, 2), (200, 3)] {
        let ham = sample_goe(dim, seed).unwrap();
        let psi = random_state(dim, seed + 50).unwrap();
        let l = lanczos_tridiagonalize(&ham, &psi, dim).unwrap();
        let h = householder_hessenberg(&ham, &psi).unwrap();
        assert_eq!(l.dim(), h.dim());
        for (x, y) in l.a().iter().zip(h.a()).chain(l.b().iter().zip(h.b())) {
            assert!((x - y).abs() < 1e-8, "N = {dim}: {x} vs {y}");
        }
    }
    let ham = sample_goe(600, 7).unwrap();
    let psi = random_state(600, 8).unwrap();
    let l = lanczos_tridiagonalize(&ham, &psi, 51).unwrap();
    let (_, hb) = householder_full(&ham, &psi).unwrap();
    for (x, y) in l.b().iter().zip(&hb).take(50) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn state_moments_feed_the_recursion() {
    let ham = sample_goe(40, 11).unwrap();
    let psi = random_state(40, 12).unwrap();
    let mu = state_moments(&ham, &psi, 10).unwrap();
    let from_mu = moments_to_lanczos(&mu, 5).unwrap();
    let direct = lanczos_tridiagonalize(&ham, &psi, 5).unwrap();
    for (x, y) in from_mu.a().iter().zip(direct.a()).chain(from_mu.b().iter().zip(direct.b())) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn ldos_width_is_b1() {
    for seed in 0..5 {
        let spin = build_spin_sector(&SpinChainSpec::new(10, 0.4, seed)).unwrap();
        let wall = domain_wall_state(&spin).unwrap();
        let s = ldos_summary(&spin, &wall).unwrap();
        let lc = lanczos_tridiagonalize(&spin, &wall, 3).unwrap();
        assert!((s.sigma0 - lc.b1()).abs() < 1e-10);
        assert!((s.e0 - lc.a()[0]).abs() < 1e-10);
    }
}

/// `kron(op_{L-1}, ..., op_0)` with local basis `(down, up)`, so site `j` is bit `j`.
fn site_op(sites: usize, j: usize, op: &DMatrix<f64>) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for s in (0..sites).rev() {
        out = out.kronecker(if s == j { op } else { &id });
    }
    out
}

#[test]
fn spin_sector_matches_the_full_space() {
    let sz = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5]);
    let sp = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let sm = sp.transpose();
    for sites in [2, 4, 6, 8] {
        let spec = SpinChainSpec { g: 0.7, ..SpinChainSpec::new(sites, 1.3, 21 + sites as u64) };
        let fields = disorder_fields(&spec);
        let dim = 1 << sites;
        let mut full = DMatrix::<f64>::zeros(dim, dim);
        for (j, hj) in fields.iter().enumerate() {
            full += site_op(sites, j, &sz) * *hj;
        }
        for (j, k) in ring_bonds(sites) {
            let zz = site_op(sites, j, &sz) * site_op(sites, k, &sz);
            let flip = (site_op(sites, j, &sp) * site_op(sites, k, &sm)
                + site_op(sites, j, &sm) * site_op(sites, k, &sp))
                * 0.5;
            full += (zz + flip) * spec.g;
        }
        let ham = build_spin_sector(&spec).unwrap();
        assert!(ham.h.is_symmetric());
        let inside: Vec<bool> = (0..dim).map(|s| (s as u64).count_ones() as usize == sites / 2).collect();
        for r in 0..dim {
            for c in 0..dim {
                if inside[r] != inside[c] {
                    assert_eq!(full[(r, c)], 0.0, "H leaks between sectors at ({r}, {c})");
                }
            }
        }
        for (r, &br) in ham.basis.iter().enumerate() {
            for (c, &bc) in ham.basis.iter().enumerate() {
                assert!((full[(br as usize, bc as usize)] - ham.h.get(r, c)).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn survival_matches_direct_evolution() {
    let ham = sample_goe(8, 31).unwrap();
    let psi = random_state(8, 32).unwrap();
    let v = psi.to_real().unwrap();
    let eig = SymmetricEigen::new(dense(&ham));
    let overlaps: Vec<f64> =
        (0..8).map(|k| eig.eigenvectors.column(k).iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
    let lc = lanczos_tridiagonalize(&ham, &psi, 8).unwrap();
    let times = log_grid(1e-2, 1e2, 100).unwrap();
    let series = KrylovEvolution::new(&lc).unwrap().series(&times).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, w) in overlaps.iter().enumerate() {
            let e = eig.eigenvalues[k];
            re += w * w * (e * t).cos();
            im -= w * w * (e * t).sin();
        }
        assert!((series.f[i] - (re * re + im * im)).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn running_mean_approaches_the_long_time_average() {
    let ham = sample_goe(100, 41).unwrap();
    let psi = random_state(100, 42).unwrap();
    let lc = lanczos_tridiagonalize(&ham, &psi, 100).unwrap();
    let ev = KrylovEvolution::new(&lc).unwrap();
    let avg = ev.long_time_average();
    // T well beyond the inverse mean level spacing ~ N / sqrt(2N)
    let t0 = 2000.0;
    let times: Vec<f64> = (0..4000).map(|i| t0 + t0 * i as f64 / 4000.0).collect();
    let s = ev.series(&times).unwrap();
    let mean = s.c.iter().sum::<f64>() / s.c.len() as f64;
    assert!((mean / avg.c_bar - 1.0).abs() < 0.02, "{mean} vs {}", avg.c_bar);
}

#[test]
fn disorder_is_reproducible() {
    let spec = SpinChainSpec::new(12, 0.4, 77);
    let a = build_spin_sector(&spec).unwrap();
    let b = build_spin_sector(&spec).unwrap();
    assert!(a.h.as_slice().iter().zip(b.h.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(build_spin_sector(&SpinChainSpec::new(12, 0.4, 78)).unwrap().h, a.h);
}
