//! Model zoo: hierarchical window-attention classifier, real-time detector,
//! encoder-decoder segmenter and activation-based explanation maps.
