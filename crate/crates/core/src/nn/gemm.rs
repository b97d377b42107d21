//! Accumulating matrix products on row-major slices.
//!
//! All three kernels add into `c`; callers zero it when they want a plain product.

/// Depth of one packed block along the shared dimension.
const KC: usize = 256;

/// Strided view of a matrix: element `(r, c)` lives at `r * rs + c * cs`.
#[derive(Clone, Copy)]
struct View<'a> {
    data: &'a [f64],
    rs: usize,
    cs: usize,
}

impl View<'_> {
    #[inline(always)]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.rs + c * self.cs]
    }
}

/// `c[m,n] += a[m,k] * b[k,n]`
pub(crate) fn gemm_nn(m: usize, n: usize, k: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    gemm(m, n, k, View { data: a, rs: k, cs: 1 }, View { data: b, rs: n, cs: 1 }, c);
}

/// `c[m,n] += a[m,k] * b[n,k]^T`
pub(crate) fn gemm_nt(m: usize, n: usize, k: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= n * k && c.len() >= m * n);
    gemm(m, n, k, View { data: a, rs: k, cs: 1 }, View { data: b, rs: 1, cs: k }, c);
}

/// `c[m,n] += a[k,m]^T * b[k,n]`
pub(crate) fn gemm_tn(m: usize, n: usize, k: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= k * m && b.len() >= k * n && c.len() >= m * n);
    gemm(m, n, k, View { data: a, rs: 1, cs: m }, View { data: b, rs: n, cs: 1 }, c);
}

fn gemm(m: usize, n: usize, k: usize, a: View, b: View, c: &mut [f64]) {
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
        // SAFETY: the required CPU features were detected at runtime.
        unsafe { gemm_avx2_fma(m, n, k, a, b, c) };
        return;
    }
    blocked::<6, 4, false>(m, n, k, a, b, c);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn gemm_avx2_fma(m: usize, n: usize, k: usize, a: View, b: View, c: &mut [f64]) {
    blocked::<6, 8, true>(m, n, k, a, b, c);
}

/// Packs `KC`-deep slabs of A (MR-row panels) and B (NR-column panels) with
/// zero padding, then runs an MR x NR register tile over every panel pair.
#[inline(always)]
fn blocked<const MR: usize, const NR: usize, const FMA: bool>(
    m: usize,
    n: usize,
    k: usize,
    a: View,
    b: View,
    c: &mut [f64],
) {
    let mp = m.div_ceil(MR);
    let np = n.div_ceil(NR);
    let mut apack = vec![0.0; mp * MR * KC.min(k)];
    let mut bpack = vec![0.0; np * NR * KC.min(k)];
    for p0 in (0..k).step_by(KC) {
        let kc = KC.min(k - p0);
        for ib in 0..mp {
            let panel = &mut apack[ib * MR * kc..(ib + 1) * MR * kc];
            for p in 0..kc {
                for r in 0..MR {
                    let i = ib * MR + r;
                    panel[p * MR + r] = if i < m { a.at(i, p0 + p) } else { 0.0 };
                }
            }
        }
        for jb in 0..np {
            let panel = &mut bpack[jb * NR * kc..(jb + 1) * NR * kc];
            for p in 0..kc {
                for q in 0..NR {
                    let j = jb * NR + q;
                    panel[p * NR + q] = if j < n { b.at(p0 + p, j) } else { 0.0 };
                }
            }
        }
        for jb in 0..np {
            let bp = &bpack[jb * NR * kc..(jb + 1) * NR * kc];
            for ib in 0..mp {
                let ap = &apack[ib * MR * kc..(ib + 1) * MR * kc];
                let acc = tile::<MR, NR, FMA>(kc, ap, bp);
                let rows = MR.min(m - ib * MR);
                let cols = NR.min(n - jb * NR);
                for (r, acc_row) in acc.iter().enumerate().take(rows) {
                    let off = (ib * MR + r) * n + jb * NR;
                    for (x, v) in c[off..off + cols].iter_mut().zip(acc_row) {
                        *x += v;
                    }
                }
            }
        }
    }
}

#[inline(always)]
fn tile<const MR: usize, const NR: usize, const FMA: bool>(
    kc: usize,
    ap: &[f64],
    bp: &[f64],
) -> [[f64; NR]; MR] {
    let mut acc = [[0.0; NR]; MR];
    for (a, b) in ap.chunks_exact(MR).zip(bp.chunks_exact(NR)).take(kc) {
        let b: &[f64; NR] = b.try_into().unwrap();
        for r in 0..MR {
            let av = a[r];
            for q in 0..NR {
                acc[r][q] = if FMA {
                    av.mul_add(b[q], acc[r][q])
                } else {
                    acc[r][q] + av * b[q]
                };
            }
        }
    }
    acc
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for (ca, cb) in a.chunks_exact(4).zip(b.chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
