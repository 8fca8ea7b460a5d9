//! Dense complex linear algebra kernel used by every other module.
//!
//! Matrices are `ndarray::Array2<Complex64>`; eigendecomposition and linear
//! solves are delegated to LAPACK through `ndarray-linalg`, everything else
//! is implemented here. `vectorize` stacks columns, so
//! `vectorize(A X B) = kron(Bᵀ, A) · vectorize(X)`.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, Factorize, Solve, UPLO};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tolerances as tol;

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Array2::eye(n)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().iter().sum()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-entry deviation from Hermiticity, max_ij |M_ij - conj(M_ji)|.
pub fn herm_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev
}

fn require_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Matrix-vector product. Large systems go through the BLAS GEMM path
/// (`ndarray` does not dispatch complex GEMV to BLAS); small ones use a plain
/// loop, which beats the BLAS call overhead.
pub fn matvec(m: &CMat, v: &CVec) -> CVec {
    if m.nrows() <= 16 {
        let mut out = CVec::zeros(m.nrows());
        for (i, row) in m.rows().into_iter().enumerate() {
            out[i] = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        return out;
    }
    serial_blas();
    let col = v.view().insert_axis(Axis(1));
    m.dot(&col).remove_axis(Axis(1))
}

/// Kronecker product of square matrices, a-index major.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    require_square(a)?;
    require_square(b)?;
    Ok(ndarray::linalg::kron(a, b))
}

/// Column-stacking vectorization: `v[j*n + i] = rho[i, j]`.
pub fn vectorize(rho: &CMat) -> CVec {
    let n = rho.nrows();
    let mut v = Array1::zeros(n * rho.ncols());
    for j in 0..rho.ncols() {
        for i in 0..n {
            v[j * n + i] = rho[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`]; the length must be a perfect square.
pub fn unvectorize(v: &CVec) -> Result<CMat> {
    let len = v.len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {len} is not a vectorized square matrix"
        )));
    }
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            m[[i, j]] = v[j * n + i];
        }
    }
    Ok(m)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues ascending and the matching eigenvectors as columns,
/// with `M v_k = λ_k v_k` to within [`tol::EIG_RESIDUAL`]. Errors on inputs
/// whose Hermiticity defect exceeds [`tol::HERMITICITY`].
pub fn eig_herm(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    serial_blas();
    let n = require_square(m)?;
    let dev = herm_deviation(m);
    if dev > tol::HERMITICITY {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol: tol::HERMITICITY,
        });
    }
    let (vals, vecs_raw) = m.eigh(UPLO::Lower)?;
    // ndarray-linalg 0.16 hands back the conjugated eigenvector matrix for
    // complex Hermitian input; undo that so columns satisfy M v = λ v.
    let vecs = vecs_raw.mapv(|z| z.conj());
    for k in [0, n - 1] {
        let v = vecs.column(k).to_owned();
        let mv = matvec(m, &v);
        let resid = mv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b * c64(vals[k], 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if resid > tol::EIG_RESIDUAL * (1.0 + vals[k].abs()) * (n as f64).sqrt() {
            return Err(Error::Backend(format!(
                "eigenpair residual {resid:.3e} out of contract for eigenvalue {}",
                vals[k]
            )));
        }
    }
    Ok((vals, vecs))
}

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian inputs go through the eigendecomposition (so
/// propagators of Hermitian generators are unitary to [`tol::UNITARITY`]);
/// everything else falls back to scaling-and-squaring with a truncated
/// series.
pub fn expm(m: &CMat) -> Result<CMat> {
    serial_blas();
    require_square(m)?;
    if herm_deviation(m) <= tol::HERMITICITY {
        let (vals, vecs) = eig_herm(m)?;
        return Ok(recompose(&vecs, &vals.mapv(|l| c64(l.exp(), 0.0))));
    }
    // anti-Hermitian: i·M is Hermitian and e^M = V e^{-iΛ} V†
    let im = m.mapv(|z| z * c64(0.0, 1.0));
    if herm_deviation(&im) <= tol::HERMITICITY {
        let (vals, vecs) = eig_herm(&im)?;
        return Ok(recompose(&vecs, &vals.mapv(|l| c64(0.0, -l).exp())));
    }
    Ok(expm_taylor(m))
}

/// V · diag(d) · V† for unitary V (columns) and diagonal entries d.
fn recompose(vecs: &CMat, diag: &CVec) -> CMat {
    let mut scaled = vecs.clone();
    for (mut col, d) in scaled.columns_mut().into_iter().zip(diag.iter()) {
        col.mapv_inplace(|z| z * d);
    }
    scaled.dot(&dagger(vecs))
}

fn norm_one(m: &CMat) -> f64 {
    let mut best: f64 = 0.0;
    for col in m.columns() {
        best = best.max(col.iter().map(|z| z.norm()).sum());
    }
    best
}

fn expm_taylor(m: &CMat) -> CMat {
    let n = m.nrows();
    let norm = norm_one(m);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.mapv(|z| z / c64(2f64.powi(squarings as i32), 0.0));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=60 {
        term = term.dot(&scaled).mapv(|z| z / c64(k as f64, 0.0));
        result += &term;
        if norm_one(&term) <= f64::EPSILON * norm_one(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// All numerically-null directions of a rank-deficient square matrix.
///
/// A direction counts as null when its refined singular estimate ‖M v‖ falls
/// below [`tol::NULL_RANK_REL`]·‖M‖_F; each returned vector is unit norm with
/// ‖M v‖ ≤ [`tol::NULL_RESIDUAL_REL`]·‖M‖_F. Errors with [`Error::FullRank`]
/// when no direction qualifies.
pub fn null_vectors(m: &CMat) -> Result<Vec<CVec>> {
    serial_blas();
    let n = require_square(m)?;
    let norm = frobenius(m);
    if norm == 0.0 {
        return Ok((0..n)
            .map(|k| CVec::from_shape_fn(n, |i| c64(if i == k { 1.0 } else { 0.0 }, 0.0)))
            .collect());
    }
    let gram = {
        let g = dagger(m).dot(m);
        // kill roundoff asymmetry so eigh never rejects it
        let gd = dagger(&g);
        (g + gd).mapv(|z| z * c64(0.5, 0.0))
    };
    let sigma_null = tol::NULL_RANK_REL * norm;
    let resid_bound = tol::NULL_RESIDUAL_REL * norm;

    if n > 64 {
        if let Some(out) = null_iterative(m, &gram, sigma_null, resid_bound)? {
            return Ok(out);
        }
    }
    null_direct(m, &gram, sigma_null, resid_bound)
}

extern "C" {
    fn openblas_set_num_threads(n: i32);
}

/// Pin OpenBLAS to one thread. Its threaded kernels allocate work buffers on
/// the calling thread's stack and overflow the 2 MiB default of test and
/// rayon worker threads; parallelism lives at the sweep level instead.
pub fn serial_blas() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| unsafe { openblas_set_num_threads(1) });
}

/// Dense path: full eigendecomposition of M†M, then refinement.
fn null_direct(m: &CMat, gram: &CMat, sigma_null: f64, resid_bound: f64) -> Result<Vec<CVec>> {
    let (vals, vecs) = eig_herm(gram)?;
    // candidates: eigenvalues within a generous factor of the rank cutoff
    let cutoff = (10.0 * sigma_null).powi(2);
    let mut candidates: Vec<CVec> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= cutoff)
        .map(|(k, _)| vecs.column(k).to_owned())
        .collect();
    if candidates.is_empty() {
        candidates.push(vecs.column(0).to_owned());
    }
    let lu = shifted_factorization(gram)?;
    let mut nulls = Vec::new();
    let mut sigma_min = f64::INFINITY;
    for cand in &mut candidates {
        let sigma = refine_null(m, &lu, cand, 40);
        sigma_min = sigma_min.min(sigma);
        if sigma <= sigma_null {
            if sigma > resid_bound {
                return Err(Error::NullResidual {
                    residual: sigma,
                    bound: resid_bound,
                });
            }
            nulls.push(cand.clone());
        }
    }
    if nulls.is_empty() {
        return Err(Error::FullRank {
            sigma_min,
            threshold: sigma_null,
        });
    }
    orthonormalize(&mut nulls);
    Ok(nulls)
}

type Factorized = ndarray_linalg::LUFactorized<ndarray::OwnedRepr<C64>>;

fn shifted_factorization(gram: &CMat) -> Result<Factorized> {
    let shift = 1e3 * f64::EPSILON * frobenius(gram).max(f64::MIN_POSITIVE);
    let mut shifted = gram.clone();
    for i in 0..shifted.nrows() {
        shifted[[i, i]] += c64(shift, 0.0);
    }
    Ok(shifted.factorize()?)
}

/// Inverse iteration on (M†M + μI) driven down to the floating-point floor;
/// returns the final ‖M v‖ for unit v.
fn refine_null(m: &CMat, lu: &Factorized, v: &mut CVec, max_rounds: usize) -> f64 {
    let eps_floor = 20.0 * f64::EPSILON * frobenius(m);
    let mut sigma = vec_norm(&matvec(m, v));
    for _ in 0..max_rounds {
        if sigma <= eps_floor {
            break;
        }
        let solved = match lu.solve(v) {
            Ok(s) => s,
            Err(_) => break,
        };
        let norm = vec_norm(&solved);
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        let next = solved.mapv(|z| z / c64(norm, 0.0));
        let next_sigma = vec_norm(&matvec(m, &next));
        if next_sigma >= sigma {
            break;
        }
        *v = next;
        sigma = next_sigma;
    }
    sigma
}

/// Modified Gram-Schmidt in place.
fn orthonormalize(vs: &mut [CVec]) {
    for i in 0..vs.len() {
        for j in 0..i {
            let proj: C64 = vs[j]
                .iter()
                .zip(vs[i].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let prev = vs[j].clone();
            vs[i].zip_mut_with(&prev, |x, y| *x -= proj * y);
        }
        let norm = vec_norm(&vs[i]);
        if norm > 0.0 {
            vs[i].mapv_inplace(|z| z / c64(norm, 0.0));
        }
    }
}

/// Fast path for large matrices: block inverse iteration with a Ritz split.
/// Returns `Ok(None)` when the spectrum near zero is too ambiguous and the
/// dense path should decide.
fn null_iterative(
    m: &CMat,
    gram: &CMat,
    sigma_null: f64,
    resid_bound: f64,
) -> Result<Option<Vec<CVec>>> {
    let n = m.nrows();
    let eps_floor = 20.0 * f64::EPSILON * frobenius(m);
    let lu = shifted_factorization(gram)?;
    let mut block: Vec<CVec> = (0..2)
        .map(|k| seeded_vector(n, 0x51ab_c0de ^ k as u64))
        .collect();
    orthonormalize(&mut block);
    let mut sigmas = [f64::INFINITY; 2];
    let mut stalled = 0usize;
    for _round in 0..120 {
        for v in block.iter_mut() {
            let solved = lu.solve(v)?;
            let norm = vec_norm(&solved);
            if !norm.is_finite() || norm == 0.0 {
                return Ok(None);
            }
            *v = solved.mapv(|z| z / c64(norm, 0.0));
        }
        orthonormalize(&mut block);
        let fresh = [
            vec_norm(&matvec(m, &block[0])),
            vec_norm(&matvec(m, &block[1])),
        ];
        let improved = fresh[0] < 0.7 * sigmas[0];
        sigmas = fresh;
        if sigmas[0] <= eps_floor {
            break;
        }
        stalled = if improved { 0 } else { stalled + 1 };
        if stalled >= 3 {
            break;
        }
    }
    // ambiguous second direction: let the dense path classify the spectrum
    if sigmas[1] <= 10.0 * sigma_null && sigmas[1] > 0.0 {
        return Ok(None);
    }
    if sigmas[0] > sigma_null {
        return Err(Error::FullRank {
            sigma_min: sigmas[0],
            threshold: sigma_null,
        });
    }
    let mut v = block[0].clone();
    let sigma = refine_null(m, &lu, &mut v, 20);
    if sigma > resid_bound {
        return Ok(None);
    }
    Ok(Some(vec![v]))
}

/// Deterministic pseudo-random unit vector (splitmix64 stream).
fn seeded_vector(n: usize, seed: u64) -> CVec {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = z ^ (z >> 31);
        (z as f64 / u64::MAX as f64) - 0.5
    };
    let mut v = CVec::from_shape_fn(n, |_| c64(next(), next()));
    let norm = vec_norm(&v);
    v.mapv_inplace(|z| z / c64(norm, 0.0));
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Least-squares straight line through (xs, ys).
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "line_fit got {} x values and {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
    })
}
