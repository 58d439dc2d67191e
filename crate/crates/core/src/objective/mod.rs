//! Loss families, gradients, datasets, and ground-truth oracles.

mod dataset;
mod loss;
mod mlp;
mod mnist;

pub use dataset::{
    closed_form_least_squares, evaluate_accuracy_binary, evaluate_accuracy_stacked,
    load_csv, one_vs_all_labels, save_csv, synth_least_squares, PartitionedDataset,
};
pub use loss::{
    empirical_loss, finite_difference_gradient, local_empirical_gradient, Family, Objective,
    Sample,
};
pub use mlp::{mlp_loss_grad, MlpArch};
pub use mnist::{
    load_idx_labels, load_idx_vectors, load_mnist_idx, synth_class_images, write_idx_images,
    write_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
