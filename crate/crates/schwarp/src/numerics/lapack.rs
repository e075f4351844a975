//! Thin safe wrappers over the LAPACK routines this crate needs.
//!
//! All wrappers convert between the row-major `ndarray` layout and LAPACK's
//! column-major convention explicitly; the conversion cost is negligible next
//! to the O(n^3) work inside the routines.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[allow(clippy::too_many_arguments)]
extern "C" {
    fn zheevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        lrwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );

    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );

    fn zgetrf_(
        m: *const i32,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );

    fn zgetri_(
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        ipiv: *const i32,
        work: *mut C64,
        lwork: *const i32,
        info: *mut i32,
    );

    fn zgbtrf_(
        m: *const i32,
        n: *const i32,
        kl: *const i32,
        ku: *const i32,
        ab: *mut C64,
        ldab: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );

    fn zgbtrs_(
        trans: *const u8,
        n: *const i32,
        kl: *const i32,
        ku: *const i32,
        nrhs: *const i32,
        ab: *const C64,
        ldab: *const i32,
        ipiv: *const i32,
        b: *mut C64,
        ldb: *const i32,
        info: *mut i32,
    );

    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut C64,
        vl: *mut C64,
        ldvl: *const i32,
        vr: *mut C64,
        ldvr: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );

    fn dpbtrf_(
        uplo: *const u8,
        n: *const i32,
        kd: *const i32,
        ab: *mut f64,
        ldab: *const i32,
        info: *mut i32,
    );

    fn dpbtrs_(
        uplo: *const u8,
        n: *const i32,
        kd: *const i32,
        nrhs: *const i32,
        ab: *const f64,
        ldab: *const i32,
        b: *mut f64,
        ldb: *const i32,
        info: *mut i32,
    );
}

fn check(routine: &'static str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Lapack { routine, info })
    }
}

/// Eigendecomposition of a complex Hermitian matrix via `zheevd`
/// (divide and conquer). Returns ascending eigenvalues and a matrix whose
/// columns are the eigenvectors.
pub fn zheevd(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "zheevd needs a square matrix");
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let ni = n as i32;
    // column-major copy
    let mut f = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            f[i + j * n] = a[(i, j)];
        }
    }
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let m1 = -1i32;
    let (mut wkopt, mut rwkopt, mut iwkopt) = (C64::new(0.0, 0.0), 0.0f64, 0i32);
    unsafe {
        zheevd_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            f.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &m1,
            &mut rwkopt,
            &m1,
            &mut iwkopt,
            &m1,
            &mut info,
        );
    }
    check("zheevd (workspace query)", info)?;
    let lwork = wkopt.re as i32;
    let lrwork = rwkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        zheevd_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            f.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check("zheevd", info)?;
    let mut u = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            u[(i, j)] = f[i + j * n];
        }
    }
    Ok((Array1::from(w), u))
}

/// Eigendecomposition of a real symmetric matrix via `dsyevd`.
pub fn dsyevd(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "dsyevd needs a square matrix");
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let ni = n as i32;
    let mut f = vec![0.0f64; n * n];
    for j in 0..n {
        for i in 0..n {
            f[i + j * n] = a[(i, j)];
        }
    }
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let m1 = -1i32;
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        dsyevd_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            f.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &m1,
            &mut iwkopt,
            &m1,
            &mut info,
        );
    }
    check("dsyevd (workspace query)", info)?;
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        dsyevd_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            f.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check("dsyevd", info)?;
    let mut u = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            u[(i, j)] = f[i + j * n];
        }
    }
    Ok((Array1::from(w), u))
}

/// Eigenvalues of a general complex matrix via `zgeev` (no eigenvectors).
pub fn zgeev_values(a: &Array2<C64>) -> Result<Vec<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "zgeev needs a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    let ni = n as i32;
    let mut f = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            f[i + j * n] = a[(i, j)];
        }
    }
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let m1 = -1i32;
    let one = 1i32;
    let mut wkopt = C64::new(0.0, 0.0);
    let mut dummy = C64::new(0.0, 0.0);
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            f.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut dummy,
            &one,
            &mut dummy,
            &one,
            &mut wkopt,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    check("zgeev (workspace query)", info)?;
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            f.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut dummy,
            &one,
            &mut dummy,
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    check("zgeev", info)?;
    Ok(w)
}

/// Dense inverse of a complex matrix via LU (`zgetrf` + `zgetri`).
pub fn zinvert(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "zinvert needs a square matrix");
    let ni = n as i32;
    let mut f = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            f[i + j * n] = a[(i, j)];
        }
    }
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgetrf_(&ni, &ni, f.as_mut_ptr(), &ni, ipiv.as_mut_ptr(), &mut info);
    }
    check("zgetrf", info)?;
    let m1 = -1i32;
    let mut wkopt = C64::new(0.0, 0.0);
    unsafe {
        zgetri_(&ni, f.as_mut_ptr(), &ni, ipiv.as_ptr(), &mut wkopt, &m1, &mut info);
    }
    check("zgetri (workspace query)", info)?;
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        zgetri_(
            &ni,
            f.as_mut_ptr(),
            &ni,
            ipiv.as_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    check("zgetri", info)?;
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = f[i + j * n];
        }
    }
    Ok(out)
}

/// LU factorization of a complex banded matrix (`zgbtrf`), reusable across
/// many right-hand sides.
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<i32>,
}

impl BandLu {
    /// Factorizes a banded matrix given as `entries(i, j) -> value` over the
    /// band `|i - j| <= max(kl, ku)`. `kl`/`ku` are the lower/upper bandwidths.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl Fn(usize, usize) -> C64,
    ) -> Result<Self> {
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C64::new(0.0, 0.0); ldab * n];
        // LAPACK band layout: AB[kl + ku + i - j, j] = A[i, j]
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[(kl + ku + i - j) + j * ldab] = entries(i, j);
            }
        }
        let (ni, kli, kui, ldabi) = (n as i32, kl as i32, ku as i32, ldab as i32);
        let mut ipiv = vec![0i32; n];
        let mut info = 0i32;
        unsafe {
            zgbtrf_(&ni, &ni, &kli, &kui, ab.as_mut_ptr(), &ldabi, ipiv.as_mut_ptr(), &mut info);
        }
        if info > 0 {
            return Err(Error::SingularShift);
        }
        check("zgbtrf", info)?;
        Ok(BandLu { n, kl, ku, ldab, ab, ipiv })
    }

    /// Solves A x = b in place for one right-hand side.
    pub fn solve(&self, b: &mut [C64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        let (ni, kli, kui, ldabi) = (
            self.n as i32,
            self.kl as i32,
            self.ku as i32,
            self.ldab as i32,
        );
        let one = 1i32;
        let mut info = 0i32;
        unsafe {
            zgbtrs_(
                b"N".as_ptr(),
                &ni,
                &kli,
                &kui,
                &one,
                self.ab.as_ptr(),
                &ldabi,
                self.ipiv.as_ptr(),
                b.as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        check("zgbtrs", info)
    }
}

/// Cholesky factorization of a real symmetric positive definite banded matrix
/// (`dpbtrf`).
pub struct BandChol {
    n: usize,
    kd: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandChol {
    /// Factorizes with half-bandwidth `kd`; `entries(i, j)` is queried for
    /// the lower triangle `j <= i <= j + kd`.
    pub fn factor(n: usize, kd: usize, entries: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let ldab = kd + 1;
        let mut ab = vec![0.0f64; ldab * n];
        // lower-triangle band layout: AB[i - j, j] = A[i, j]
        for j in 0..n {
            let hi = (j + kd).min(n - 1);
            for i in j..=hi {
                ab[(i - j) + j * ldab] = entries(i, j);
            }
        }
        let (ni, kdi, ldabi) = (n as i32, kd as i32, ldab as i32);
        let mut info = 0i32;
        unsafe {
            dpbtrf_(b"L".as_ptr(), &ni, &kdi, ab.as_mut_ptr(), &ldabi, &mut info);
        }
        if info > 0 {
            return Err(Error::SingularShift);
        }
        check("dpbtrf", info)?;
        Ok(BandChol { n, kd, ldab, ab })
    }

    pub fn solve(&self, b: &mut [f64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        let (ni, kdi, ldabi) = (self.n as i32, self.kd as i32, self.ldab as i32);
        let one = 1i32;
        let mut info = 0i32;
        unsafe {
            dpbtrs_(
                b"L".as_ptr(),
                &ni,
                &kdi,
                &one,
                self.ab.as_ptr(),
                &ldabi,
                b.as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        check("dpbtrs", info)
    }
}
