use super::real::Real;

/// Neumaier's variant of compensated summation.
///
/// The running compensation absorbs the low-order bits lost by each addition,
/// so the error stays at a few ulps of the result even when the summands are
/// much larger than the final sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<R: Real = f64> {
    sum: R,
    compensation: R,
}

impl<R: Real> Default for CompensatedSum<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        Self {
            sum: R::ZERO,
            compensation: R::ZERO,
        }
    }

    #[inline]
    pub fn add(&mut self, value: R) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> R {
        self.sum + self.compensation
    }
}

impl<R: Real> FromIterator<R> for CompensatedSum<R> {
    fn from_iter<I: IntoIterator<Item = R>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_signal_under_large_terms() {
        let acc: CompensatedSum = [1e16, 1.0, -1e16, 1e-3].into_iter().collect();
        assert_eq!(acc.value(), 1.001);
    }

    #[test]
    fn beats_naive_summation() {
        let naive: f64 = (0..10_000).map(|_| 0.1).sum();
        let acc: CompensatedSum = (0..10_000).map(|_| 0.1).collect();
        assert!((acc.value() - 1000.0).abs() < (naive - 1000.0).abs());
        assert!((acc.value() - 1000.0).abs() <= 1e-12);
    }
}
