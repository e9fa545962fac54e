"""Edge-preserving semantic segmentation toolkit.

Sobel-derived binary edge targets from label maps, a differentiable
two-channel edge head with hand-derived gradients, rare-class copy-paste
augmentation, IoU/boundary metrics, and a desk-scale training demo.
"""

from ._edgeseg import (
    CLASS_NAMES,
    IGNORE_LABEL,
    NUM_CLASSES,
    ConfusionMatrix,
    Error,
    InstancePatch,
    ablation,
    augment_sample,
    boundary_f1,
    class_histogram,
    conv3x3_backward,
    conv3x3_forward,
    edge_loss,
    edge_target,
    extract_instances,
    gradcheck_suite,
    load_label_map,
    load_rgb_image,
    paste_patch,
    save_label_map,
    save_rgb_image,
    sobel_magnitude,
    softmax_xent2d,
    synth_dataset,
    train,
    transform_patch,
)

__all__ = [
    "CLASS_NAMES",
    "IGNORE_LABEL",
    "NUM_CLASSES",
    "ConfusionMatrix",
    "Error",
    "InstancePatch",
    "ablation",
    "augment_sample",
    "boundary_f1",
    "class_histogram",
    "conv3x3_backward",
    "conv3x3_forward",
    "edge_loss",
    "edge_target",
    "extract_instances",
    "gradcheck_suite",
    "load_label_map",
    "load_rgb_image",
    "paste_patch",
    "save_label_map",
    "save_rgb_image",
    "sobel_magnitude",
    "softmax_xent2d",
    "synth_dataset",
    "train",
    "transform_patch",
]

__version__ = "0.1.0"
