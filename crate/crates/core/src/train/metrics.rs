use std::fmt;

/// Binary confusion counts; class 1 is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut c = Confusion::default();
        for (predicted, actual) in pairs {
            match (predicted == 1, actual == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `None` marks a zero denominator, which is not the same as a score of 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub confusion: Confusion,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl MetricsReport {
    pub fn from_confusion(c: Confusion) -> Self {
        Self {
            confusion: c,
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision: ratio(c.tp, c.tp + c.fp),
            recall: ratio(c.tp, c.tp + c.fn_),
        }
    }

    pub fn from_predictions(predicted: &[usize], actual: &[usize]) -> Self {
        Self::from_confusion(Confusion::from_pairs(predicted.iter().copied().zip(actual.iter().copied())))
    }
}

pub fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.confusion;
        write!(
            f,
            "accuracy={} precision={} recall={} tp={} fp={} fn={} tn={}",
            fmt_metric(self.accuracy),
            fmt_metric(self.precision),
            fmt_metric(self.recall),
            c.tp,
            c.fp,
            c.fn_,
            c.tn
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(tp: u64, fp: u64, fn_: u64, tn: u64) -> MetricsReport {
        MetricsReport::from_confusion(Confusion { tp, fp, fn_, tn })
    }

    #[test]
    fn hand_cases() {
        let r = report(1, 0, 0, 1);
        assert_eq!((r.accuracy, r.precision, r.recall), (Some(1.0), Some(1.0), Some(1.0)));
        let r = report(1, 1, 1, 1);
        assert_eq!((r.accuracy, r.precision, r.recall), (Some(0.5), Some(0.5), Some(0.5)));
        let r = report(97, 12, 3, 88);
        assert_eq!(r.recall, Some(0.97));
        assert_eq!(r.accuracy, Some(0.925));
        assert!((r.precision.unwrap() - 97.0 / 109.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_is_not_zero() {
        let r = report(0, 0, 0, 5);
        assert_eq!(r.accuracy, Some(1.0));
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, None);
        assert!(r.to_string().contains("precision=undefined"));
        let r = report(0, 3, 2, 0);
        assert_eq!((r.precision, r.recall), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn counts_from_predictions() {
        let r = MetricsReport::from_predictions(&[1, 1, 0, 0, 1], &[1, 0, 1, 0, 1]);
        assert_eq!(r.confusion, Confusion { tp: 2, fp: 1, fn_: 1, tn: 1 });
    }

    proptest! {
        #[test]
        fn identities(tp in 0u64..1000, fp in 0u64..1000, fn_ in 0u64..1000, tn in 0u64..1000) {
            let r = report(tp, fp, fn_, tn);
            let total = tp + fp + fn_ + tn;
            prop_assert_eq!(r.accuracy, (total > 0).then(|| (tp + tn) as f64 / total as f64));
            prop_assert_eq!(r.precision, (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64));
            prop_assert_eq!(r.recall, (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64));
            for m in [r.accuracy, r.precision, r.recall].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&m));
            }
        }
    }
}
