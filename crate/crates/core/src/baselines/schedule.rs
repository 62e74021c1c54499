use serde::{Deserialize, Serialize};

/// Linear ε decay from `start` to `end` over `decay_steps`, then constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }

    pub fn validate(&self) -> Result<(), String> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.start) || !unit(self.end) {
            return Err("epsilon values must lie in [0, 1]".into());
        }
        if self.end > self.start {
            return Err("epsilon end must not exceed epsilon start".into());
        }
        Ok(())
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { start: 1.0, end: 0.05, decay_steps: 200_000 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let s = EpsilonSchedule::default();
        assert_eq!(s.value(0), 1.0);
        assert!((s.value(100_000) - 0.525).abs() < 1e-12);
        assert_eq!(s.value(200_000), 0.05);
        assert_eq!(s.value(10_000_000), 0.05);
    }
}
