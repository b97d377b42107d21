//! Bilinear resampling shared by the depth resize and the augmentation crops.

/// `a + (b - a) * t`, clamped to the closed interval spanned by `a` and `b`.
#[inline]
pub(crate) fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        return a;
    }
    let v = a + (b - a) * t;
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    v.clamp(lo, hi)
}

/// Source sample positions for one output axis: (lower index, upper index, fraction).
/// Uses pixel-center alignment, so equal sizes map every pixel onto itself.
fn axis_taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let t = s - i0 as f64;
            if t == 0.0 || i0 + 1 >= src {
                (i0, i0, 0.0)
            } else {
                (i0, i0 + 1, t)
            }
        })
        .collect()
}

/// Resamples a masked row-major grid. An output pixel is valid only if every
/// source pixel contributing a nonzero weight is valid; invalid outputs are 0.
pub(crate) fn resample_bilinear(
    data: &[f64],
    mask: &[bool],
    width: usize,
    height: usize,
    out_width: usize,
    out_height: usize,
) -> (Vec<f64>, Vec<bool>) {
    debug_assert_eq!(data.len(), width * height);
    debug_assert_eq!(mask.len(), width * height);
    let xs = axis_taps(width, out_width);
    let ys = axis_taps(height, out_height);
    let mut out = vec![0.0; out_width * out_height];
    let mut out_mask = vec![false; out_width * out_height];
    for (oy, &(y0, y1, ty)) in ys.iter().enumerate() {
        for (ox, &(x0, x1, tx)) in xs.iter().enumerate() {
            let at = |y: usize, x: usize| y * width + x;
            let mut valid = mask[at(y0, x0)];
            if tx != 0.0 {
                valid &= mask[at(y0, x1)];
            }
            if ty != 0.0 {
                valid &= mask[at(y1, x0)];
                if tx != 0.0 {
                    valid &= mask[at(y1, x1)];
                }
            }
            let o = oy * out_width + ox;
            if !valid {
                continue;
            }
            let top = lerp(data[at(y0, x0)], data[at(y0, x1)], tx);
            let bottom = lerp(data[at(y1, x0)], data[at(y1, x1)], tx);
            out[o] = lerp(top, bottom, ty);
            out_mask[o] = true;
        }
    }
    (out, out_mask)
}
