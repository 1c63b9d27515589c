use serde::{Deserialize, Serialize};

/// Number of bit flips per neighbor as a function of the tour counter:
/// `max(1, floor(base_fraction * m_prime / 2^counter))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeSchedule {
    pub base_fraction: f64,
}

impl Default for ChangeSchedule {
    fn default() -> Self {
        ChangeSchedule { base_fraction: 0.02 }
    }
}

impl ChangeSchedule {
    pub fn new(base_fraction: f64) -> Self {
        ChangeSchedule { base_fraction }
    }

    pub fn change_count(&self, counter: usize, m_prime: usize) -> usize {
        change_count(counter, m_prime, self)
    }
}

pub fn change_count(counter: usize, m_prime: usize, schedule: &ChangeSchedule) -> usize {
    let decay = 2f64.powi(counter.min(1023) as i32);
    let raw = (schedule.base_fraction * m_prime as f64 / decay).floor();
    if raw.is_finite() && raw >= 1.0 {
        raw as usize
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_values() {
        let s = ChangeSchedule::default();
        assert_eq!(change_count(0, 2000, &s), 40);
        assert_eq!(change_count(1, 2000, &s), 20);
        assert_eq!(change_count(6, 2000, &s), 1);
        assert_eq!(change_count(60, 2000, &s), 1);
        for c in 0..10 {
            assert_eq!(change_count(c, 1, &s), 1);
        }
    }

    proptest! {
        #[test]
        fn non_increasing_and_floored(m in 1usize..100_000, frac in 0.0f64..1.0, c in 0usize..40) {
            let s = ChangeSchedule::new(frac);
            let a = change_count(c, m, &s);
            let b = change_count(c + 1, m, &s);
            prop_assert!(a >= 1 && b >= 1);
            prop_assert!(b <= a);
        }
    }
}
