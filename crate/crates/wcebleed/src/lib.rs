//! Synthetic data generation, configuration, dataset management and the
//! command implementations behind the `wcebleed` binary.
