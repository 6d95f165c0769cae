use super::model::group_of;
use crate::error::{Error, Result};
use crate::params::ParamSet;

/// `p <- p - rate * g` for every parameter. On a non-finite gradient or
/// result the parameters are left untouched and the offending group named.
pub fn sgd_step<P: ParamSet>(params: &mut P, grad: &P, rate: f64) -> Result<()> {
    if let Some(name) = grad.first_non_finite() {
        return Err(Error::NonFinite(format!("gradient of {}", group_of(&name))));
    }
    for ((name, p), (_, g)) in params.tensors().into_iter().zip(grad.tensors()) {
        if p.iter().zip(g).any(|(p, g)| !(p - rate * g).is_finite()) {
            return Err(Error::NonFinite(format!("parameters of {}", group_of(&name))));
        }
    }
    for ((_, p), (_, g)) in params.tensors_mut().into_iter().zip(grad.tensors()) {
        p.iter_mut().zip(g).for_each(|(p, g)| *p -= rate * g);
    }
    Ok(())
}

/// Rescales `grad` so its global norm is at most `max_norm` (0 disables).
/// Returns the norm before clipping.
pub fn clip_global_norm<P: ParamSet>(grad: &mut P, max_norm: f64) -> f64 {
    let norm = grad.squared_norm().sqrt();
    if max_norm > 0.0 && norm > max_norm {
        grad.scale(max_norm / norm);
    }
    norm
}
