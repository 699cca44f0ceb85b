//! Seeded 3-D gradient noise with analytic spatial derivatives, and the
//! curl-noise flow field built on it.

use rand::{SeedableRng, seq::SliceRandom};
use rand_chacha::ChaCha8Rng;

use super::genome::AgentParams;
use crate::seed::mix64;

/// Cube edge midpoints, padded to 16 entries so the hash can be masked.
const GRADIENTS: [[f64; 3]; 16] = [
    [1.0, 1.0, 0.0],
    [-1.0, 1.0, 0.0],
    [1.0, -1.0, 0.0],
    [-1.0, -1.0, 0.0],
    [1.0, 0.0, 1.0],
    [-1.0, 0.0, 1.0],
    [1.0, 0.0, -1.0],
    [-1.0, 0.0, -1.0],
    [0.0, 1.0, 1.0],
    [0.0, -1.0, 1.0],
    [0.0, 1.0, -1.0],
    [0.0, -1.0, -1.0],
    [1.0, 1.0, 0.0],
    [-1.0, 1.0, 0.0],
    [0.0, -1.0, 1.0],
    [0.0, -1.0, -1.0],
];

/// Perlin-style gradient noise over a permutation table drawn from a seed.
#[derive(Clone)]
pub struct GradientNoise {
    perm: [u8; 512],
}

/// Noise value with its partial derivatives in x and y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
}

/// `f64::floor` lowers to a libm call on baseline x86-64.
#[inline]
fn floor(v: f64) -> f64 {
    let t = v as i64 as f64;
    if t > v { t - 1.0 } else { t }
}

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn fade_deriv(t: f64) -> f64 {
    30.0 * t * t * (t * (t - 2.0) + 1.0)
}

impl GradientNoise {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255u8).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        Self { perm }
    }

    /// Noise at `(x, y, z)` with `d/dx` and `d/dy`; z is treated as time.
    ///
    /// Trilinear blend of the corner ramps `g . (p - corner)` under quintic
    /// fade weights, expanded into the polynomial form so the value and both
    /// derivatives share the corner terms.
    pub fn sample(&self, x: f64, y: f64, z: f64) -> NoiseSample {
        let (xf, yf, zf) = (floor(x), floor(y), floor(z));
        let (fx, fy, fz) = (x - xf, y - yf, z - zf);
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let zi = (zf as i64 & 255) as usize;

        let p = &self.perm;
        let a = usize::from(p[xi]) + yi;
        let b = usize::from(p[xi + 1]) + yi;
        let aa = usize::from(p[a]) + zi;
        let ab = usize::from(p[a + 1]) + zi;
        let ba = usize::from(p[b]) + zi;
        let bb = usize::from(p[b + 1]) + zi;
        let g = |h: u8| &GRADIENTS[usize::from(h) & 15];
        // Corner gradients, named by (x, y, z) offset.
        let g000 = g(p[aa]);
        let g100 = g(p[ba]);
        let g010 = g(p[ab]);
        let g110 = g(p[bb]);
        let g001 = g(p[aa + 1]);
        let g101 = g(p[ba + 1]);
        let g011 = g(p[ab + 1]);
        let g111 = g(p[bb + 1]);

        let (gx, gy, gz) = (fx - 1.0, fy - 1.0, fz - 1.0);
        let d = |g: &[f64; 3], ox: f64, oy: f64, oz: f64| g[0] * ox + g[1] * oy + g[2] * oz;
        let v000 = d(g000, fx, fy, fz);
        let v100 = d(g100, gx, fy, fz);
        let v010 = d(g010, fx, gy, fz);
        let v110 = d(g110, gx, gy, fz);
        let v001 = d(g001, fx, fy, gz);
        let v101 = d(g101, gx, fy, gz);
        let v011 = d(g011, fx, gy, gz);
        let v111 = d(g111, gx, gy, gz);

        let (u, v, w) = (fade(fx), fade(fy), fade(fz));
        let (du, dv) = (fade_deriv(fx), fade_deriv(fy));

        let k1 = v100 - v000;
        let k2 = v010 - v000;
        let k3 = v001 - v000;
        let k4 = v000 - v100 - v010 + v110;
        let k5 = v000 - v010 - v001 + v011;
        let k6 = v000 - v100 - v001 + v101;
        let k7 = -v000 + v100 + v010 - v110 + v001 - v101 - v011 + v111;
        let value = v000 + k1 * u + k2 * v + k3 * w + k4 * u * v + k5 * v * w + k6 * w * u + k7 * u * v * w;

        // Trilinear blend of one gradient component.
        let blend = |c: usize| {
            let a = g000[c];
            a + u * (g100[c] - a)
                + v * (g010[c] - a)
                + w * (g001[c] - a)
                + u * v * (a - g100[c] - g010[c] + g110[c])
                + v * w * (a - g010[c] - g001[c] + g011[c])
                + w * u * (a - g100[c] - g001[c] + g101[c])
                + u * v * w
                    * (-a + g100[c] + g010[c] - g110[c] + g001[c] - g101[c] - g011[c] + g111[c])
        };
        let dx = blend(0) + du * (k1 + k4 * v + k6 * w + k7 * v * w);
        let dy = blend(1) + dv * (k2 + k4 * u + k5 * w + k7 * u * w);
        NoiseSample { value, dx, dy }
    }
}

/// Divergence-free velocity field `v = (dpsi/dy, -dpsi/dx)`.
///
/// The stream function is a multi-octave sum of gradient noise,
/// `psi = curl_strength / (noise_scale * octaves) * sum_o 0.5^o n(2^o * noise_scale * p, rate * t)`,
/// so velocity magnitude is of order `curl_strength` regardless of scale.
#[derive(Clone)]
pub struct FlowField {
    noise: GradientNoise,
    scale: f64,
    octaves: u32,
    strength: f64,
    time_rate: f64,
}

/// Per-octave offsets decorrelating successive octaves.
const OCTAVE_OFFSET: [f64; 3] = [17.31, 29.17, 11.73];

impl FlowField {
    pub fn new(params: &AgentParams, seed: u64) -> Self {
        Self {
            noise: GradientNoise::new(mix64(seed ^ 0x00F1_0E1D)),
            scale: params.noise_scale,
            octaves: params.noise_octaves.max(1),
            strength: params.curl_strength,
            time_rate: params.field_time_rate,
        }
    }

    /// Stream-function value and its spatial gradient at `pos`, `time`.
    pub fn stream(&self, pos: [f64; 2], time: f64) -> NoiseSample {
        let norm = self.strength / (self.scale * f64::from(self.octaves));
        let z = self.time_rate * time;
        let mut acc = NoiseSample {
            value: 0.0,
            dx: 0.0,
            dy: 0.0,
        };
        let mut freq = self.scale;
        let mut amp = 1.0;
        for o in 0..self.octaves {
            let off = f64::from(o);
            let s = self.noise.sample(
                pos[0] * freq + off * OCTAVE_OFFSET[0],
                pos[1] * freq + off * OCTAVE_OFFSET[1],
                z + off * OCTAVE_OFFSET[2],
            );
            acc.value += amp * s.value;
            acc.dx += amp * freq * s.dx;
            acc.dy += amp * freq * s.dy;
            freq *= 2.0;
            amp *= 0.5;
        }
        NoiseSample {
            value: norm * acc.value,
            dx: norm * acc.dx,
            dy: norm * acc.dy,
        }
    }

    pub fn velocity(&self, pos: [f64; 2], time: f64) -> [f64; 2] {
        if self.strength == 0.0 {
            return [0.0, 0.0];
        }
        let s = self.stream(pos, time);
        [s.dy, -s.dx]
    }
}

/// One-shot evaluation of the flow field; builds the permutation each call.
pub fn flow_velocity(pos: [f64; 2], time: f64, params: &AgentParams, seed: u64) -> [f64; 2] {
    FlowField::new(params, seed).velocity(pos, time)
}
