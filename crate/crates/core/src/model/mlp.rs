use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GradResult, ParamVector};
use crate::error::{Error, Result};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

/// Fully connected network with LeakyReLU hidden activations and a linear
/// scalar output.
///
/// Parameters are laid out layer by layer, bottom (input side) first. Each
/// layer stores its `w_out x w_in` weight matrix row-major, followed by its
/// `w_out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpSpec {
    pub layer_widths: Vec<usize>,
    pub leaky_slope: f64,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, leaky_slope: f64) -> Result<Self> {
        if layer_widths.len() < 2 {
            return Err(Error::config(
                "an MLP needs at least an input and an output width",
            ));
        }
        if layer_widths.contains(&0) {
            return Err(Error::config(format!(
                "zero-width layer in {layer_widths:?}"
            )));
        }
        if *layer_widths.last().unwrap() != 1 {
            return Err(Error::config("MLP output width must be 1"));
        }
        if !(leaky_slope.is_finite() && (0.0..1.0).contains(&leaky_slope)) {
            return Err(Error::config(format!(
                "leaky slope {leaky_slope} outside [0, 1)"
            )));
        }
        Ok(MlpSpec {
            layer_widths,
            leaky_slope,
        })
    }

    /// `input -> hidden x depth -> 1`, the "MLP with k layers of width n_h" shape.
    pub fn uniform(
        input: usize,
        hidden: usize,
        num_layers: usize,
        leaky_slope: f64,
    ) -> Result<Self> {
        if num_layers == 0 {
            return Err(Error::config("an MLP needs at least one layer"));
        }
        let mut widths = vec![input];
        widths.extend(std::iter::repeat_n(hidden, num_layers - 1));
        widths.push(1);
        Self::new(widths, leaky_slope)
    }

    pub fn num_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }

    /// Parameter index range (weights and biases) of every layer, bottom first.
    pub fn layer_param_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.layer_widths
            .windows(2)
            .map(|w| {
                let len = (w[0] + 1) * w[1];
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }

    pub fn init_params(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(self.num_params());
        for w in self.layer_widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-bound..bound));
            }
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        ParamVector::from_vec(params)
    }

    fn activate(&self, z: f64) -> f64 {
        if z >= 0.0 {
            z
        } else {
            self.leaky_slope * z
        }
    }

    fn activate_deriv(&self, z: f64) -> f64 {
        if z >= 0.0 {
            1.0
        } else {
            self.leaky_slope
        }
    }

    /// Runs the network, returning the pre-activations of every layer.
    fn pre_activations(&self, params: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(self.num_layers());
        let mut offset = 0;
        let mut act: Vec<f64> = x.to_vec();
        for (l, w) in self.layer_widths.windows(2).enumerate() {
            let (w_in, w_out) = (w[0], w[1]);
            let weights = &params[offset..offset + w_in * w_out];
            let biases = &params[offset + w_in * w_out..offset + (w_in + 1) * w_out];
            offset += (w_in + 1) * w_out;
            let z: Vec<f64> = weights
                .chunks_exact(w_in)
                .zip(biases)
                .map(|(row, b)| b + row.iter().zip(&act).map(|(wi, ai)| wi * ai).sum::<f64>())
                .collect();
            if l + 1 < self.num_layers() {
                act = z.iter().map(|&v| self.activate(v)).collect();
            }
            zs.push(z);
        }
        zs
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> f64 {
        self.pre_activations(params, x).last().unwrap()[0]
    }

    /// Smallest hidden pre-activation magnitude at `(params, x)`; finite
    /// difference checks use it to avoid probing across a LeakyReLU kink.
    pub fn min_abs_hidden_preactivation(&self, params: &[f64], x: &[f64]) -> f64 {
        let zs = self.pre_activations(params, x);
        zs[..zs.len() - 1]
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, z| m.min(z.abs()))
    }

    pub fn grad(&self, params: &[f64], x: &[f64]) -> GradResult {
        let zs = self.pre_activations(params, x);
        let ranges = self.layer_param_ranges();
        let mut grad = vec![0.0; params.len()];
        // d(output)/d(pre-activation) of the current layer
        let mut dz = vec![1.0];
        for l in (0..self.num_layers()).rev() {
            let (w_in, w_out) = (self.layer_widths[l], self.layer_widths[l + 1]);
            let range = ranges[l].clone();
            let input: Vec<f64> = if l == 0 {
                x.to_vec()
            } else {
                zs[l - 1].iter().map(|&v| self.activate(v)).collect()
            };
            let (gw, gb) = grad[range.clone()].split_at_mut(w_in * w_out);
            for (o, d) in dz.iter().enumerate() {
                for (g, a) in gw[o * w_in..(o + 1) * w_in].iter_mut().zip(&input) {
                    *g = d * a;
                }
                gb[o] = *d;
            }
            if l > 0 {
                let weights = &params[range.start..range.start + w_in * w_out];
                let mut da = vec![0.0; w_in];
                for (row, d) in weights.chunks_exact(w_in).zip(&dz) {
                    for (acc, w) in da.iter_mut().zip(row) {
                        *acc += w * d;
                    }
                }
                dz = da
                    .iter()
                    .zip(&zs[l - 1])
                    .map(|(a, &z)| a * self.activate_deriv(z))
                    .collect();
            }
        }
        GradResult {
            value: zs.last().unwrap()[0],
            grad,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_layer_formula() {
        let spec = MlpSpec::new(vec![2, 16, 16, 16, 1], 0.01).unwrap();
        assert_eq!(
            spec.num_params(),
            2 * 16 + 16 + 16 * 16 + 16 + 16 * 16 + 16 + 16 + 1
        );
        assert_eq!(spec.num_params(), 609);
        assert_eq!(spec.init_params(3).len(), 609);
    }

    #[test]
    fn uniform_builds_four_layer_shape() {
        let spec = MlpSpec::uniform(1, 8, 4, 0.01).unwrap();
        assert_eq!(spec.layer_widths, vec![1, 8, 8, 8, 1]);
    }

    #[test]
    fn init_is_deterministic_and_respects_fan_in_bound() {
        let spec = MlpSpec::new(vec![1, 8, 8, 8, 1], 0.01).unwrap();
        let a = spec.init_params(7);
        assert_eq!(a, spec.init_params(7));
        assert_ne!(a, spec.init_params(8));
        for (l, r) in spec.layer_param_ranges().into_iter().enumerate() {
            let fan_in = spec.layer_widths[l];
            let n_w = fan_in * spec.layer_widths[l + 1];
            let bound = 1.0 / (fan_in as f64).sqrt();
            assert!(a[r.start..r.start + n_w].iter().all(|w| w.abs() <= bound));
            assert!(a[r.start + n_w..r.end].iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn zero_width_layer_is_rejected() {
        assert!(matches!(
            MlpSpec::new(vec![2, 0, 1], 0.01),
            Err(Error::Config(_))
        ));
        assert!(MlpSpec::new(vec![2], 0.01).is_err());
        assert!(MlpSpec::new(vec![2, 3, 2], 0.01).is_err());
    }

    #[test]
    fn zero_weights_route_gradient_only_to_output_bias() {
        let spec = MlpSpec::new(vec![2, 4, 4, 1], 0.01).unwrap();
        let params = vec![0.0; spec.num_params()];
        let g = spec.grad(&params, &[0.3, -0.7]);
        let ranges = spec.layer_param_ranges();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.grad[ranges[2].end - 1], 1.0);
        let first_weights = ranges[0].start..ranges[0].start + 2 * 4;
        assert!(g.grad[first_weights].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_layer_is_affine() {
        let spec = MlpSpec::new(vec![2, 1], 0.01).unwrap();
        // w = (2, -1), b = 0.5
        assert_eq!(spec.forward(&[2.0, -1.0, 0.5], &[1.0, 3.0]), -0.5);
        let g = spec.grad(&[2.0, -1.0, 0.5], &[1.0, 3.0]);
        assert_eq!(g.grad, vec![1.0, 3.0, 1.0]);
    }

    #[test]
    fn leaky_slope_applies_below_zero() {
        let spec = MlpSpec::new(vec![1, 1, 1], 0.1).unwrap();
        // hidden z = -2, activation -0.2, output = 1 * -0.2
        assert!((spec.forward(&[1.0, 0.0, 1.0, 0.0], &[-2.0]) + 0.2).abs() < 1e-15);
    }
}
