//! Per-layer forward and backward kernels over flat row-major buffers.
//!
//! Conv inputs are `C×H×W`; weights `C_out×C_in×K×K`. Out-of-bounds taps
//! read implicit zero padding.

use crate::scalar::Scalar;

#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_forward<T: Scalar>(
    in_shape: &[usize],
    out_shape: &[usize],
    kernel: usize,
    stride: usize,
    padding: usize,
    x: &[T],
    w: &[T],
    b: &[T],
) -> Vec<T> {
    let (c_in, h, wd) = (in_shape[0], in_shape[1], in_shape[2]);
    let (c_out, oh, ow) = (out_shape[0], out_shape[1], out_shape[2]);
    let patch_len = c_in * kernel * kernel;
    // im2col: one row of `patch_len` taps per output position, zero where padded.
    let mut patches = vec![T::zero(); oh * ow * patch_len];
    for i in 0..oh {
        for j in 0..ow {
            let patch = &mut patches[(i * ow + j) * patch_len..(i * ow + j + 1) * patch_len];
            for c in 0..c_in {
                for ki in 0..kernel {
                    let r = (i * stride + ki) as isize - padding as isize;
                    if r < 0 || r as usize >= h {
                        continue;
                    }
                    for kj in 0..kernel {
                        let s = (j * stride + kj) as isize - padding as isize;
                        if s < 0 || s as usize >= wd {
                            continue;
                        }
                        patch[(c * kernel + ki) * kernel + kj] = x[(c * h + r as usize) * wd + s as usize];
                    }
                }
            }
        }
    }
    let mut y = Vec::with_capacity(c_out * oh * ow);
    for (o, filter) in w.chunks_exact(patch_len).enumerate() {
        y.extend(
            patches
                .chunks_exact(patch_len)
                .map(|patch| filter.iter().zip(patch).fold(b[o], |acc, (&wv, &xv)| acc + wv * xv)),
        );
    }
    y
}

/// Returns `(dx, dw, db)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_backward<T: Scalar>(
    in_shape: &[usize],
    out_shape: &[usize],
    kernel: usize,
    stride: usize,
    padding: usize,
    x: &[T],
    w: &[T],
    dy: &[T],
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let (c_in, h, wd) = (in_shape[0], in_shape[1], in_shape[2]);
    let (c_out, oh, ow) = (out_shape[0], out_shape[1], out_shape[2]);
    let mut dx = vec![T::zero(); x.len()];
    let mut dw = vec![T::zero(); w.len()];
    let mut db = vec![T::zero(); c_out];
    for o in 0..c_out {
        for i in 0..oh {
            for j in 0..ow {
                let g = dy[(o * oh + i) * ow + j];
                db[o] += g;
                for c in 0..c_in {
                    for ki in 0..kernel {
                        let r = (i * stride + ki) as isize - padding as isize;
                        if r < 0 || r as usize >= h {
                            continue;
                        }
                        for kj in 0..kernel {
                            let s = (j * stride + kj) as isize - padding as isize;
                            if s < 0 || s as usize >= wd {
                                continue;
                            }
                            let xi = (c * h + r as usize) * wd + s as usize;
                            let wi = ((o * c_in + c) * kernel + ki) * kernel + kj;
                            dw[wi] += g * x[xi];
                            dx[xi] += g * w[wi];
                        }
                    }
                }
            }
        }
    }
    (dx, dw, db)
}

pub(crate) fn dense_forward<T: Scalar>(in_f: usize, out_f: usize, x: &[T], w: &[T], b: &[T]) -> Vec<T> {
    (0..out_f)
        .map(|o| {
            let row = &w[o * in_f..(o + 1) * in_f];
            row.iter().zip(x).fold(b[o], |acc, (&wv, &xv)| acc + wv * xv)
        })
        .collect()
}

pub(crate) fn dense_backward<T: Scalar>(
    in_f: usize,
    out_f: usize,
    x: &[T],
    w: &[T],
    dy: &[T],
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let mut dx = vec![T::zero(); in_f];
    let mut dw = vec![T::zero(); in_f * out_f];
    for o in 0..out_f {
        let g = dy[o];
        for k in 0..in_f {
            dw[o * in_f + k] = g * x[k];
            dx[k] += g * w[o * in_f + k];
        }
    }
    (dx, dw, dy.to_vec())
}

pub(crate) fn relu_forward<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect()
}

pub(crate) fn relu_backward<T: Scalar>(x: &[T], dy: &[T]) -> Vec<T> {
    x.iter()
        .zip(dy)
        .map(|(&v, &g)| if v > T::zero() { g } else { T::zero() })
        .collect()
}

/// Index into `x` of the maximum of each pooling window (first maximum on ties).
fn maxpool_argmax<T: Scalar>(in_shape: &[usize], window: usize, x: &[T]) -> Vec<usize> {
    let (c, h, w) = (in_shape[0], in_shape[1], in_shape[2]);
    let (oh, ow) = (h / window, w / window);
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for i in 0..oh {
            for j in 0..ow {
                let mut best = (ch * h + i * window) * w + j * window;
                for a in 0..window {
                    for b in 0..window {
                        let k = (ch * h + i * window + a) * w + j * window + b;
                        if x[k] > x[best] {
                            best = k;
                        }
                    }
                }
                idx.push(best);
            }
        }
    }
    idx
}

pub(crate) fn maxpool_forward<T: Scalar>(in_shape: &[usize], window: usize, x: &[T]) -> Vec<T> {
    maxpool_argmax(in_shape, window, x).into_iter().map(|k| x[k]).collect()
}

pub(crate) fn maxpool_backward<T: Scalar>(in_shape: &[usize], window: usize, x: &[T], dy: &[T]) -> Vec<T> {
    let mut dx = vec![T::zero(); x.len()];
    for (k, g) in maxpool_argmax(in_shape, window, x).into_iter().zip(dy) {
        dx[k] += *g;
    }
    dx
}
