use crate::dsp::{AudioClip, REFERENCE_SAMPLES, SAMPLE_RATE_HZ};
use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

/// Truncates or zero-pads at the end to exactly 199 936 samples.
pub fn preprocess_audio<T: Scalar>(clip: &AudioClip<T>) -> Result<AudioClip<T>> {
    if clip.is_empty() {
        return Err(Error::Input("empty audio clip".into()));
    }
    if clip.sample_rate_hz != SAMPLE_RATE_HZ {
        return Err(Error::Input(format!(
            "expected {SAMPLE_RATE_HZ} Hz audio, got {} Hz",
            clip.sample_rate_hz
        )));
    }
    let mut samples = clip.samples.clone();
    samples.resize(REFERENCE_SAMPLES, T::zero());
    Ok(AudioClip { samples, sample_rate_hz: clip.sample_rate_hz })
}

/// `round(k·(src−1)/(dst−1))` for `k in 0..dst`, in exact integer arithmetic
/// (halves round up); all zeros when `src == 1`.
pub fn uniform_frame_indices(src: usize, dst: usize) -> Vec<usize> {
    if dst == 1 || src == 1 {
        return vec![0; dst];
    }
    let den = dst - 1;
    (0..dst).map(|k| (2 * k * (src - 1) + den) / (2 * den)).collect()
}

/// Bilinear resize of one `h×w` plane with half-pixel centres; source
/// coordinates are clamped to the image, so equal sizes give the identity.
pub fn resize_bilinear<T: Scalar>(src: &[T], h: usize, w: usize, out_h: usize, out_w: usize) -> Vec<T> {
    let axis = |out: usize, inp: usize| -> Vec<(usize, usize, T)> {
        let scale = inp as f64 / out as f64;
        (0..out)
            .map(|o| {
                let x = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (inp - 1) as f64);
                let i0 = x.floor() as usize;
                let i1 = (i0 + 1).min(inp - 1);
                (i0, i1, T::lit(x - i0 as f64))
            })
            .collect()
    };
    let (ys, xs) = (axis(out_h, h), axis(out_w, w));
    let mut out = Vec::with_capacity(out_h * out_w);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = src[y0 * w + x0] * (T::one() - fx) + src[y0 * w + x1] * fx;
            let bottom = src[y1 * w + x0] * (T::one() - fx) + src[y1 * w + x1] * fx;
            out.push(top * (T::one() - fy) + bottom * fy);
        }
    }
    out
}

/// `C×T₀×H₀×W₀` frames to `target = (C, T, H, W)`: uniform frame sampling,
/// bilinear resize, values clamped to `[0, 1]`.
pub fn preprocess_video<T: Scalar>(frames: &Tensor<T>, target: [usize; 4]) -> Result<Tensor<T>> {
    frames.expect_rank(4, "video frames")?;
    let &[c, t0, h0, w0] = frames.shape() else { unreachable!() };
    let [tc, t, h, w] = target;
    if c != tc {
        return Err(Error::dim(format!("video has {c} channels, model expects {tc}")));
    }
    if t == 0 || h == 0 || w == 0 {
        return Err(Error::dim(format!("invalid video target {target:?}")));
    }
    let indices = uniform_frame_indices(t0, t);
    let plane = h0 * w0;
    let mut data = Vec::with_capacity(c * t * h * w);
    for ch in 0..c {
        for &fi in &indices {
            let start = (ch * t0 + fi) * plane;
            let resized = resize_bilinear(&frames.data()[start..start + plane], h0, w0, h, w);
            data.extend(resized.into_iter().map(|v| v.max(T::zero()).min(T::one())));
        }
    }
    Tensor::new(target.to_vec(), data)
}
