//! Evaluation metrics: classification counts, box IoU and matching,
//! average precision and mask overlap scores.
