//! Banded Hermitian eigenvalue counting.
//!
//! The Galerkin matrices built in [`crate::spectral`] are Hermitian with
//! entries that die off geometrically away from the diagonal, so the number
//! of eigenvalues below a shift can be read off an LDL* factorization of the
//! shifted band in O(n w^2) time.  Counting at a handful of shifts is the
//! only spectral primitive the index machinery needs; eigenvectors are never
//! formed here.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Hermitian matrix stored as its lower band.
///
/// `w` is the largest |i - j| with a stored entry.  Storage is column-major:
/// column j occupies a slab of `w + 1` entries, slot 0 being the diagonal
/// (whose imaginary part is ignored; assembly writes it as real).
pub(crate) struct BandedHermitian {
    n: usize,
    w: usize,
    cols: Vec<Complex64>,
}

impl BandedHermitian {
    pub fn zeros(n: usize, w: usize) -> Self {
        assert!(n > 0, "empty matrix");
        let w = w.min(n - 1);
        Self {
            n,
            w,
            cols: vec![Complex64::ZERO; n * (w + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn bandwidth(&self) -> usize {
        self.w
    }

    /// Store entry (i, j) with i >= j and i - j <= w; the mirror entry is
    /// implied by Hermitian symmetry.
    pub fn set_lower(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i >= j && i - j <= self.w);
        self.cols[j * (self.w + 1) + (i - j)] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = if i >= j { (j, i) } else { (i, j) };
        if hi - lo > self.w {
            return Complex64::ZERO;
        }
        let v = self.cols[lo * (self.w + 1) + (hi - lo)];
        if i >= j {
            v
        } else {
            v.conj()
        }
    }

    /// y = H x, expanding the implied upper triangle on the fly.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::ZERO; self.n];
        for j in 0..self.n {
            y[j] += Complex64::from(self.cols[j * (self.w + 1)].re) * x[j];
            let hi = (j + self.w).min(self.n - 1);
            for i in (j + 1)..=hi {
                let a = self.cols[j * (self.w + 1) + (i - j)];
                y[i] += a * x[j];
                y[j] += a.conj() * x[i];
            }
        }
        y
    }

    /// Number of eigenvalues strictly below `shift`, read off the inertia of
    /// the LDL* factorization of `self - shift I`.
    ///
    /// A pivot whose magnitude collapses below eps^2 times the matrix scale
    /// is pushed to a small negative value (the usual Sturm-count
    /// convention); that only triggers when the shift is an eigenvalue of a
    /// leading minor to near machine precision, and keeps every later
    /// quantity finite.
    pub fn count_below(&self, shift: f64) -> usize {
        let n = self.n;
        let w = self.w;
        let stride = w + 1;

        let mut scale = shift.abs();
        for c in &self.cols {
            scale = scale.max(c.re.abs() + c.im.abs());
        }
        let pivmin = (f64::EPSILON * f64::EPSILON) * scale.max(1e-30);

        let mut l = vec![Complex64::ZERO; n * stride];
        let mut d = vec![0.0f64; n];
        let mut neg = 0usize;

        for j in 0..n {
            let lo = j.saturating_sub(w);
            let mut dj = self.cols[j * stride].re - shift;
            for k in lo..j {
                let ljk = l[k * stride + (j - k)];
                dj -= ljk.norm_sqr() * d[k];
            }
            if dj.abs() < pivmin {
                dj = -pivmin;
            }
            if dj < 0.0 {
                neg += 1;
            }
            d[j] = dj;

            let hi = (j + w).min(n - 1);
            for i in (j + 1)..=hi {
                let mut s = self.cols[j * stride + (i - j)];
                let klo = lo.max(i.saturating_sub(w));
                for k in klo..j {
                    let lik = l[k * stride + (i - k)];
                    let ljk = l[k * stride + (j - k)];
                    s -= lik * ljk.conj() * d[k];
                }
                l[j * stride + (i - j)] = s / dj;
            }
        }
        neg
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0f64; self.n];
        for j in 0..self.n {
            let hi = (j + self.w).min(self.n - 1);
            for i in (j + 1)..=hi {
                let a = self.cols[j * (self.w + 1) + (i - j)].norm();
                radius[i] += a;
                radius[j] += a;
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.n {
            let dj = self.cols[j * (self.w + 1)].re;
            lo = lo.min(dj - radius[j]);
            hi = hi.max(dj + radius[j]);
        }
        (lo, hi)
    }

    /// The `count` smallest eigenvalues in ascending order, located by
    /// bisection on the inertia count inside the Gershgorin interval.
    pub fn smallest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let count = count.min(self.n);
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).max(f64::MIN_POSITIVE);
        let tol = 1e-13 * span.max(glo.abs()).max(ghi.abs()).max(1.0);

        let mut out = Vec::with_capacity(count);
        // eigenvalues come out sorted, so each search can start at the
        // previous one's lower bound
        let mut floor = glo;
        for rank in 0..count {
            let mut lo = floor;
            let mut hi = ghi;
            for _ in 0..200 {
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid) <= rank {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
            floor = lo;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_banded(n: usize, w: usize, seed: u64) -> BandedHermitian {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut b = BandedHermitian::zeros(n, w);
        for j in 0..n {
            b.set_lower(j, j, Complex64::from(rng.random_range(-3.0..3.0)));
            for i in (j + 1)..=(j + w).min(n - 1) {
                let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                b.set_lower(i, j, v);
            }
        }
        b
    }

    fn dense_eigenvalues(b: &BandedHermitian) -> Vec<f64> {
        let mut ev: Vec<f64> = b
            .to_dense()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn counts_match_dense_spectrum() {
        for (seed, n, w) in [(1u64, 40, 3), (2, 61, 7), (3, 30, 29), (4, 25, 1)] {
            let b = random_banded(n, w, seed);
            let ev = dense_eigenvalues(&b);
            let mut rng = StdRng::seed_from_u64(seed ^ 0xabcd);
            for _ in 0..25 {
                let shift = rng.random_range(-8.0..8.0);
                let expect = ev.iter().filter(|&&e| e < shift).count();
                assert_eq!(b.count_below(shift), expect, "seed {seed} shift {shift}");
            }
        }
    }

    #[test]
    fn smallest_eigenvalues_match_dense() {
        let b = random_banded(50, 5, 9);
        let ev = dense_eigenvalues(&b);
        let got = b.smallest_eigenvalues(6);
        for (g, e) in got.iter().zip(ev.iter()) {
            assert!((g - e).abs() < 1e-9, "got {g}, dense {e}");
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let b = random_banded(33, 4, 11);
        let dense = b.to_dense();
        let mut rng = StdRng::seed_from_u64(17);
        let x: Vec<Complex64> = (0..33)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let y = b.matvec(&x);
        let xv = nalgebra::DVector::from_vec(x);
        let yd = &dense * &xv;
        for i in 0..33 {
            assert!((y[i] - yd[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let b = random_banded(40, 6, 21);
        let ev = dense_eigenvalues(&b);
        let (lo, hi) = b.gershgorin();
        assert!(lo <= ev[0] && ev[ev.len() - 1] <= hi);
    }

    #[test]
    fn count_is_stable_at_a_near_eigenvalue_shift() {
        // shifting exactly onto an eigenvalue must not panic or overflow
        let b = random_banded(20, 3, 5);
        let ev = dense_eigenvalues(&b);
        for &e in &ev {
            let c = b.count_below(e);
            assert!(c <= 20);
        }
    }
}
