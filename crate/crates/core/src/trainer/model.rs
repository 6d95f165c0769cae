use rand::Rng;

use crate::han::{HanDims, HanParams, Strategy};
use crate::latent_space::LatentSpaceParams;
use crate::params::ParamSet;

/// Everything needed to recognize a video: the latent space, the HAN and
/// the segmentation strategy used when encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub latent: LatentSpaceParams,
    pub han: HanParams,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub feature: usize,
    pub vocab: usize,
    pub latent: usize,
    pub hidden: usize,
    pub attention: usize,
}

impl ModelDims {
    pub fn han(&self) -> HanDims {
        HanDims {
            latent: self.latent,
            hidden: self.hidden,
            attention: self.attention,
            vocab: self.vocab,
        }
    }
}

impl Model {
    pub fn init<R: Rng + ?Sized>(dims: ModelDims, strategy: Strategy, rng: &mut R) -> Self {
        let latent = LatentSpaceParams::init(dims.latent, dims.feature, dims.vocab, rng);
        let han = HanParams::init(dims.han(), rng);
        Self { latent, han, strategy }
    }

    pub fn zeros(dims: ModelDims, strategy: Strategy) -> Self {
        Self {
            latent: LatentSpaceParams::zeros(dims.latent, dims.feature, dims.vocab),
            han: HanParams::zeros(dims.han()),
            strategy,
        }
    }

    pub fn dims(&self) -> ModelDims {
        let h = self.han.dims();
        ModelDims {
            feature: self.latent.feature_dim(),
            vocab: h.vocab,
            latent: h.latent,
            hidden: h.hidden,
            attention: h.attention,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dims(), self.strategy)
    }
}

/// The group a tensor belongs to: the first segment of its dotted name.
pub fn group_of(name: &str) -> &str {
    name.split('.').next().unwrap_or(name)
}

impl ParamSet for Model {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = self.latent.tensors();
        out.extend(self.han.tensors());
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = self.latent.tensors_mut();
        out.extend(self.han.tensors_mut());
        out
    }
}
