//! Learning-rate schedules: cosine annealing and linear warm-up into cosine.

#[derive(Clone, Debug)]
pub struct LrSchedule {
    pub lr_max: f64,
    pub lr_min: f64,
    pub total_steps: usize,
}

impl LrSchedule {
    pub fn new(lr_max: f64, lr_min: f64, total_steps: usize) -> Self {
        assert!(total_steps > 0, "schedule needs at least one step");
        assert!(lr_max >= lr_min, "lr_max below lr_min");
        LrSchedule { lr_max, lr_min, total_steps }
    }

    /// lr_min + (lr_max - lr_min) * (1 + cos(pi * step / total)) / 2,
    /// clamped past the end; endpoints returned exactly.
    pub fn cosine(&self, step: usize) -> f64 {
        if step == 0 {
            return self.lr_max;
        }
        if step >= self.total_steps {
            return self.lr_min;
        }
        let frac = step as f64 / self.total_steps as f64;
        self.lr_min + 0.5 * (self.lr_max - self.lr_min) * (1.0 + (std::f64::consts::PI * frac).cos())
    }

    /// Linear ramp for `warmup` steps (lr_max*(step+1)/warmup), then cosine
    /// decay over the remaining steps.
    pub fn warmup_cosine(&self, warmup: usize, step: usize) -> f64 {
        if step < warmup {
            return self.lr_max * (step + 1) as f64 / warmup as f64;
        }
        let tail = LrSchedule {
            lr_max: self.lr_max,
            lr_min: self.lr_min,
            total_steps: self.total_steps.saturating_sub(warmup).max(1),
        };
        tail.cosine(step - warmup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_endpoints_exact() {
        let s = LrSchedule::new(1e-4, 1e-6, 1000);
        assert_eq!(s.cosine(0), 1e-4);
        assert_eq!(s.cosine(1000), 1e-6);
        assert_eq!(s.cosine(2000), 1e-6);
        let mid = s.cosine(500);
        let expect = 1e-6 + 0.5 * (1e-4 - 1e-6);
        assert!((mid - expect).abs() < 1e-12);
    }

    #[test]
    fn cosine_monotone_decreasing() {
        let s = LrSchedule::new(1e-3, 0.0, 200);
        let mut prev = f64::INFINITY;
        for step in 0..=200 {
            let lr = s.cosine(step);
            assert!(lr <= prev + 1e-15, "step {step}");
            prev = lr;
        }
    }

    #[test]
    fn warmup_ramp() {
        let s = LrSchedule::new(2e-4, 0.0, 1100);
        let w = 100;
        assert!((s.warmup_cosine(w, 0) - 2e-4 / 100.0).abs() < 1e-18);
        assert_eq!(s.warmup_cosine(w, 99), 2e-4);
        assert_eq!(s.warmup_cosine(w, 100), 2e-4);
        assert_eq!(s.warmup_cosine(w, 1100), 0.0);
    }
}
