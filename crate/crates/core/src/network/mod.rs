//! The spectral-spatial network: a 3D convolutional feature block followed by a dense
//! classification block, trained with softmax cross-entropy and Adam.

pub mod adam;
pub mod checkpoint;
pub mod config;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod params;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use config::NetworkConfig;
pub use conv::{conv3d_backward, conv3d_forward, Conv3DLayer, ConvGrads};
pub use dense::{dense_backward, dense_forward, DenseGrads, DenseLayer};
pub use gradcheck::{canonical_gradient_check, gradient_check, GradCheckReport};
pub use loss::{relu, relu_backward, softmax_cross_entropy};
pub use model::{backward, forward, forward_pass, loss_and_gradient, shape_trace, ForwardPass};
pub use params::{init_params, ModelParams};

/// Exact parameter count of a configuration.
pub fn param_count(cfg: &NetworkConfig) -> usize {
    cfg.param_count()
}
