//! Convolutional encoder inference.
//!
//! Architecture (input 1x64x64, intensities in `[0, 1]`):
//!
//! | tensor                  | shape             |
//! |-------------------------|-------------------|
//! | `enc.conv1.weight/bias` | `[16, 1, 3, 3]`, `[16]`   |
//! | `enc.conv2.weight/bias` | `[32, 16, 3, 3]`, `[32]`  |
//! | `enc.conv3.weight/bias` | `[64, 32, 3, 3]`, `[64]`  |
//! | `enc.conv4.weight/bias` | `[128, 64, 3, 3]`, `[128]`|
//! | `enc.fc_mu.weight/bias` | `[512, 2048]`, `[512]`    |
//! | `enc.fc_logvar.weight/bias` | `[512, 2048]`, `[512]` |
//!
//! Each convolution is 3x3, stride 2, zero padding 1, followed by ReLU. The
//! 128x4x4 output is flattened channel-major (`c * 16 + y * 4 + x`) and fed to
//! the mean head; the log-variance head is carried but unused at inference.

use rand_distr::{Distribution, Normal};

use super::container::{Tensor, TensorFile};
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::seed::{Stream, stream_rng};

pub const INPUT_SIZE: usize = 64;
pub const LATENT_DIM: usize = 512;
const CHANNELS: [usize; 5] = [1, 16, 32, 64, 128];
const FLAT_DIM: usize = 128 * 4 * 4;

#[derive(Debug, Clone, PartialEq)]
struct Conv {
    weight: Vec<f32>,
    bias: Vec<f32>,
    c_in: usize,
    c_out: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    weight: Vec<f32>,
    bias: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    convs: Vec<Conv>,
    mu: Dense,
    logvar: Dense,
}

fn conv_name(i: usize, part: &str) -> String {
    format!("enc.conv{}.{part}", i + 1)
}

impl EncoderWeights {
    /// Every tensor name and shape the encoder requires, in file order.
    pub fn tensor_shapes() -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for i in 0..4 {
            out.push((
                conv_name(i, "weight"),
                vec![CHANNELS[i + 1], CHANNELS[i], 3, 3],
            ));
            out.push((conv_name(i, "bias"), vec![CHANNELS[i + 1]]));
        }
        for head in ["fc_mu", "fc_logvar"] {
            out.push((format!("enc.{head}.weight"), vec![LATENT_DIM, FLAT_DIM]));
            out.push((format!("enc.{head}.bias"), vec![LATENT_DIM]));
        }
        out
    }

    fn build(mut fetch: impl FnMut(&str, &[usize]) -> Result<Vec<f32>>) -> Result<Self> {
        let mut convs = Vec::with_capacity(4);
        for i in 0..4 {
            let (c_in, c_out) = (CHANNELS[i], CHANNELS[i + 1]);
            convs.push(Conv {
                weight: fetch(&conv_name(i, "weight"), &[c_out, c_in, 3, 3])?,
                bias: fetch(&conv_name(i, "bias"), &[c_out])?,
                c_in,
                c_out,
            });
        }
        let mut dense = |head: &str| -> Result<Dense> {
            Ok(Dense {
                weight: fetch(&format!("enc.{head}.weight"), &[LATENT_DIM, FLAT_DIM])?,
                bias: fetch(&format!("enc.{head}.bias"), &[LATENT_DIM])?,
            })
        };
        let mu = dense("fc_mu")?;
        let logvar = dense("fc_logvar")?;
        Ok(Self { convs, mu, logvar })
    }

    pub fn from_tensors(file: &TensorFile) -> Result<Self> {
        Self::build(|name, dims| Ok(file.expect(name, dims)?.data.clone()))
    }

    pub fn to_tensors(&self) -> TensorFile {
        let mut f = TensorFile::default();
        for (i, c) in self.convs.iter().enumerate() {
            let w = Tensor::new(conv_name(i, "weight"), vec![c.c_out, c.c_in, 3, 3], c.weight.clone());
            f.push(w.expect("shape fixed at construction"));
            f.push(Tensor::new(conv_name(i, "bias"), vec![c.c_out], c.bias.clone()).expect("shape"));
        }
        for (head, d) in [("fc_mu", &self.mu), ("fc_logvar", &self.logvar)] {
            f.push(
                Tensor::new(format!("enc.{head}.weight"), vec![LATENT_DIM, FLAT_DIM], d.weight.clone())
                    .expect("shape"),
            );
            f.push(Tensor::new(format!("enc.{head}.bias"), vec![LATENT_DIM], d.bias.clone()).expect("shape"));
        }
        f
    }

    pub fn zeros() -> Self {
        Self::build(|_, dims| Ok(vec![0.0; dims.iter().product()])).expect("zero weights")
    }

    /// Fixed random weights for running the pipeline without a trained model:
    /// He-normal convolutions, `N(0, 1/fan_in)` dense heads, zero biases.
    pub fn stub(seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::StubWeights, 0, 0);
        Self::build(|name, dims| {
            let n: usize = dims.iter().product();
            if name.ends_with("bias") {
                return Ok(vec![0.0; n]);
            }
            let fan_in: usize = dims[1..].iter().product();
            let gain = if name.contains("conv") { 2.0 } else { 1.0 };
            let normal = Normal::new(0.0f32, (gain / fan_in as f32).sqrt())
                .map_err(|e| Error::validation(e.to_string()))?;
            Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
        })
        .expect("stub weights have valid shapes")
    }

    /// Mean-head latent of a 64x64 raster.
    pub fn encode(&self, img: &Raster) -> Result<Vec<f32>> {
        if img.width() != INPUT_SIZE || img.height() != INPUT_SIZE {
            return Err(Error::validation(format!(
                "encoder input must be {INPUT_SIZE}x{INPUT_SIZE}, got {}x{}",
                img.width(),
                img.height()
            )));
        }
        let mut act = img.to_unit_f32();
        let mut size = INPUT_SIZE;
        for conv in &self.convs {
            act = conv.forward(&act, size);
            size /= 2;
        }
        debug_assert_eq!(act.len(), FLAT_DIM);
        Ok(self.mu.forward(&act))
    }
}

impl Conv {
    fn forward(&self, input: &[f32], size: usize) -> Vec<f32> {
        let out_size = size / 2;
        let mut out = vec![0.0f32; self.c_out * out_size * out_size];
        for co in 0..self.c_out {
            let plane = &mut out[co * out_size * out_size..(co + 1) * out_size * out_size];
            for (oy, row) in plane.chunks_exact_mut(out_size).enumerate() {
                for (ox, o) in row.iter_mut().enumerate() {
                    let mut acc = self.bias[co];
                    for ci in 0..self.c_in {
                        let w = &self.weight[(co * self.c_in + ci) * 9..][..9];
                        let src = &input[ci * size * size..(ci + 1) * size * size];
                        for ky in 0..3 {
                            let iy = (2 * oy + ky) as isize - 1;
                            if iy < 0 || iy >= size as isize {
                                continue;
                            }
                            let line = &src[iy as usize * size..][..size];
                            for kx in 0..3 {
                                let ix = (2 * ox + kx) as isize - 1;
                                if ix >= 0 && ix < size as isize {
                                    acc += w[ky * 3 + kx] * line[ix as usize];
                                }
                            }
                        }
                    }
                    *o = acc.max(0.0);
                }
            }
        }
        out
    }
}

impl Dense {
    fn forward(&self, input: &[f32]) -> Vec<f32> {
        self.weight
            .chunks_exact(input.len())
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f32>())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_image(v: u8) -> Raster {
        let px = (0..64 * 64).map(|i| if i % 7 == 0 { v } else { 255 }).collect();
        Raster::new(64, 64, px).unwrap()
    }

    #[test]
    fn zero_weights_give_zero_latent() {
        let z = EncoderWeights::zeros().encode(&sample_image(0)).unwrap();
        assert_eq!(z.len(), LATENT_DIM);
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_and_input_sensitive() {
        let w = EncoderWeights::stub(1);
        let a = w.encode(&sample_image(0)).unwrap();
        assert_eq!(a, w.encode(&sample_image(0)).unwrap());
        assert_ne!(a, w.encode(&sample_image(100)).unwrap());
    }

    #[test]
    fn rejects_wrong_input_size() {
        let w = EncoderWeights::zeros();
        assert!(w.encode(&Raster::filled(32, 64, 0)).is_err());
    }

    #[test]
    fn tensor_round_trip_and_missing_tensor() {
        let w = EncoderWeights::stub(3);
        let bytes = w.to_tensors().to_bytes();
        let back = EncoderWeights::from_tensors(&TensorFile::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back, w);

        let mut f = w.to_tensors();
        f.tensors.retain(|t| t.name != "enc.conv3.bias");
        let err = EncoderWeights::from_tensors(&f).unwrap_err();
        assert!(err.to_string().contains("enc.conv3.bias"), "{err}");
    }

    #[test]
    fn single_channel_conv_matches_direct_sum() {
        // One output channel, weights = 1 on the centre tap only: stride-2
        // sampling of the input at even coordinates.
        let mut w = vec![0.0; 9];
        w[4] = 1.0;
        let conv = Conv {
            weight: w,
            bias: vec![0.5],
            c_in: 1,
            c_out: 1,
        };
        let input: Vec<f32> = (0..16).map(|i| i as f32).collect();
        let out = conv.forward(&input, 4);
        assert_eq!(out, vec![0.5, 2.5, 8.5, 10.5]);
    }
}
