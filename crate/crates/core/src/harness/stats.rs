//! Student's t distribution and paired t-tests over learning curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::curves::LearningCurve;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    // The continued fraction converges fast for x < (a+1)/(a+b+2).
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b
    }
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-tailed p-value of `t`.
pub fn two_tailed_p(t: f64, df: f64) -> f64 {
    incomplete_beta(df / (df + t * t), df / 2.0, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Loss,
    Tie,
    Win,
}

/// Which curve points are compared.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonPoints {
    /// The right-most half: points `n/2 ..` of an `n`-point curve.
    #[default]
    SecondHalf,
    All,
    /// Explicit 0-based point indices.
    Indices(Vec<usize>),
}

impl ComparisonPoints {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "second-half" => Ok(ComparisonPoints::SecondHalf),
            "all" => Ok(ComparisonPoints::All),
            list => list
                .split(',')
                .map(|p| {
                    p.trim().parse::<usize>().map_err(|_| {
                        Error::Config(format!(
                            "comparison points must be `second-half`, `all` or a list of indices, got `{s}`"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(ComparisonPoints::Indices),
        }
    }

    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            ComparisonPoints::SecondHalf => Ok((n / 2..n).collect()),
            ComparisonPoints::All => Ok((0..n).collect()),
            ComparisonPoints::Indices(v) => {
                if let Some(&bad) = v.iter().find(|&&i| i >= n) {
                    return Err(Error::Config(format!("comparison point {bad} beyond {n} curve points")));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub point: usize,
    pub labeled_count: usize,
    /// Mean of `a - b` across folds.
    pub mean_difference: f64,
    /// `None` when the differences have zero variance.
    pub t: Option<f64>,
    pub p_value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub loss: usize,
    pub tie: usize,
    pub win: usize,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Loss => self.loss += 1,
            Verdict::Tie => self.tie += 1,
            Verdict::Win => self.win += 1,
        }
    }

    pub fn merge(&mut self, o: Tally) {
        self.loss += o.loss;
        self.tie += o.tie;
        self.win += o.win;
    }

    pub fn total(&self) -> usize {
        self.loss + self.tie + self.win
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: String,
    pub b: String,
    pub alpha: f64,
    pub points: Vec<PointResult>,
    pub counts: Tally,
}

/// Verdict for one set of paired differences.
pub fn paired_verdict(diffs: &[f64], alpha: f64) -> (f64, Option<f64>, f64, Verdict) {
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // Differences below this are rounding noise from averaging accuracies.
    const EPS: f64 = 1e-12;
    if var <= EPS * EPS {
        let v = if mean > EPS {
            Verdict::Win
        } else if mean < -EPS {
            Verdict::Loss
        } else {
            Verdict::Tie
        };
        let p = if v == Verdict::Tie { 1.0 } else { 0.0 };
        return (mean, None, p, v);
    }
    let t = mean / (var / n).sqrt();
    let p = two_tailed_p(t, n - 1.0);
    let v = if p < alpha {
        if t > 0.0 {
            Verdict::Win
        } else {
            Verdict::Loss
        }
    } else {
        Verdict::Tie
    };
    (mean, Some(t), p, v)
}

/// Paired two-tailed t-tests of `a` against `b` across folds, one per
/// comparison point. Both sides need the same folds and schedule.
pub fn paired_t_test(
    a: &[LearningCurve],
    b: &[LearningCurve],
    points: &ComparisonPoints,
    alpha: f64,
) -> Result<ComparisonReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let index = |curves: &[LearningCurve]| -> Result<BTreeMap<usize, LearningCurve>> {
        let mut m = BTreeMap::new();
        for c in curves {
            if m.insert(c.fold, c.clone()).is_some() {
                return Err(Error::Config(format!("fold {} appears twice for {}", c.fold, c.algorithm)));
            }
        }
        Ok(m)
    };
    let (ma, mb) = (index(a)?, index(b)?);
    if ma.keys().ne(mb.keys()) {
        return Err(Error::Config("the two curve sets cover different folds".into()));
    }
    if ma.len() < 2 {
        return Err(Error::Config(format!("a paired t-test needs at least 2 folds, got {}", ma.len())));
    }
    let name = |m: &BTreeMap<usize, LearningCurve>| m.values().next().map(|c| c.algorithm.clone()).unwrap_or_default();
    let n_points = ma.values().next().map_or(0, |c| c.points.len());
    for (f, ca) in &ma {
        let cb = &mb[f];
        let same = ca.points.len() == n_points
            && cb.points.len() == n_points
            && ca.points.iter().zip(&cb.points).all(|(p, q)| p.0 == q.0);
        if !same {
            return Err(Error::Config(format!(
                "fold {f}: curves of {} and {} follow different schedules",
                ca.algorithm, cb.algorithm
            )));
        }
    }
    let mut results = Vec::new();
    let mut counts = Tally::default();
    for p in points.resolve(n_points)? {
        let diffs: Vec<f64> = ma
            .iter()
            .map(|(f, ca)| ca.points[p].1 - mb[f].points[p].1)
            .collect();
        let (mean, t, pv, verdict) = paired_verdict(&diffs, alpha);
        counts.add(verdict);
        results.push(PointResult {
            point: p,
            labeled_count: ma.values().next().unwrap().points[p].0,
            mean_difference: mean,
            t,
            p_value: pv,
            verdict,
        });
    }
    Ok(ComparisonReport {
        a: name(&ma),
        b: name(&mb),
        alpha,
        points: results,
        counts,
    })
}

/// Sums reports per `(a, b)` pair.
pub fn summarize(reports: &[ComparisonReport]) -> Vec<((String, String), Tally)> {
    let mut m: BTreeMap<(String, String), Tally> = BTreeMap::new();
    for r in reports {
        m.entry((r.a.clone(), r.b.clone())).or_default().merge(r.counts);
    }
    m.into_iter().collect()
}

pub fn summary_csv(rows: &[((String, String), Tally)]) -> String {
    let mut out = String::from("a,b,loss,tie,win\n");
    for ((a, b), t) in rows {
        let _ = writeln!(out, "{a},{b},{},{},{}", t.loss, t.tie, t.win);
    }
    out
}

pub fn summary_text(rows: &[((String, String), Tally)]) -> String {
    let pairs: Vec<String> = rows.iter().map(|((a, b), _)| format!("{a} vs {b}")).collect();
    let w = pairs.iter().map(String::len).max().unwrap_or(0).max(4);
    let mut out = format!("{:<w$}  {:>5}  {:>5}  {:>5}\n", "pair", "Loss", "Tie", "Win");
    for (p, (_, t)) in pairs.iter().zip(rows) {
        let _ = writeln!(out, "{p:<w$}  {:>5}  {:>5}  {:>5}", t.loss, t.tie, t.win);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(alg: &str, fold: usize, acc: &[f64]) -> LearningCurve {
        LearningCurve {
            algorithm: alg.into(),
            fold,
            seed: 0,
            points: acc.iter().enumerate().map(|(i, &a)| (10 + i, a)).collect(),
        }
    }

    #[test]
    fn gamma_matches_factorials() {
        for (n, f) in [(1.0, 1.0), (5.0, 24.0f64), (11.0, 3_628_800.0)] {
            assert!((ln_gamma(n) - f.ln()).abs() < 1e-12);
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn t_table_quantiles() {
        // Published two-tailed 95% critical values.
        for (df, q) in [(9.0, 2.262), (19.0, 2.093), (1.0, 12.706), (30.0, 2.042)] {
            assert!((t_cdf(q, df) - 0.975).abs() < 5e-4, "df {df}");
        }
        assert!((t_cdf(0.0, 9.0) - 0.5).abs() < 1e-15);
        assert!((t_cdf(-1.3, 9.0) + t_cdf(1.3, 9.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identical_curves_tie_everywhere() {
        let a: Vec<_> = (0..10).map(|f| curve("a", f, &[0.5, 0.6, 0.7, 0.8])).collect();
        let mut b = a.clone();
        for c in &mut b {
            c.algorithm = "b".into();
        }
        let r = paired_t_test(&a, &b, &ComparisonPoints::All, 0.05).unwrap();
        assert_eq!(r.counts, Tally { loss: 0, tie: 4, win: 0 });
    }

    #[test]
    fn constant_offset_wins() {
        let b: Vec<_> = (0..10).map(|f| curve("b", f, &[0.5, 0.6, 0.6])).collect();
        let a: Vec<_> = (0..10).map(|f| curve("a", f, &[0.6, 0.7, 0.7])).collect();
        let r = paired_t_test(&a, &b, &ComparisonPoints::All, 0.05).unwrap();
        assert_eq!(r.counts, Tally { loss: 0, tie: 0, win: 3 });
        assert!(r.points.iter().all(|p| p.t.is_none()));
        let r = paired_t_test(&b, &a, &ComparisonPoints::All, 0.05).unwrap();
        assert_eq!(r.counts.loss, 3);
    }

    #[test]
    fn hand_computed_t_statistic() {
        // d = 0.01 * [1..10]: mean 0.055, sd 0.0302765, t = 5.7446.
        let d: Vec<f64> = (1..=10).map(|i| 0.01 * i as f64).collect();
        let (m, t, _, v) = paired_verdict(&d, 0.05);
        assert!((m - 0.055).abs() < 1e-12);
        assert!((t.unwrap() - 5.744_562_646).abs() < 1e-6);
        assert_eq!(v, Verdict::Win);
        // t = 1.48 and t = 3.16 fall on either side of t_{0.975,9} = 2.262.
        let below = [0.3, -0.1, 0.2, 0.0, 0.1, 0.25, -0.15, 0.05, 0.1, -0.05];
        let (_, t, p, v) = paired_verdict(&below, 0.05);
        assert!(t.unwrap() < 2.262 && p > 0.05 && v == Verdict::Tie, "{t:?} {p}");
        let above = [0.3, 0.1, 0.2, 0.0, 0.1, 0.25, -0.05, 0.05, 0.1, 0.05];
        let (_, t, p, v) = paired_verdict(&above, 0.05);
        assert!(t.unwrap() > 2.262 && p < 0.05 && v == Verdict::Win, "{t:?} {p}");
    }

    #[test]
    fn second_half_points() {
        assert_eq!(ComparisonPoints::SecondHalf.resolve(50).unwrap(), (25..50).collect::<Vec<_>>());
        assert_eq!(ComparisonPoints::SecondHalf.resolve(5).unwrap(), vec![2, 3, 4]);
        assert_eq!(ComparisonPoints::parse("1, 3").unwrap(), ComparisonPoints::Indices(vec![1, 3]));
        assert!(ComparisonPoints::parse("middle").is_err());
        assert!(ComparisonPoints::Indices(vec![9]).resolve(3).is_err());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a: Vec<_> = (0..3).map(|f| curve("a", f, &[0.5, 0.6])).collect();
        let short: Vec<_> = (0..3).map(|f| curve("b", f, &[0.5])).collect();
        assert!(paired_t_test(&a, &short, &ComparisonPoints::All, 0.05).is_err());
        assert!(paired_t_test(&a[..1], &a[..1], &ComparisonPoints::All, 0.05).is_err());
        assert!(paired_t_test(&a, &a[..2], &ComparisonPoints::All, 0.05).is_err());
        assert!(paired_t_test(&a, &a, &ComparisonPoints::All, 1.5).is_err());
    }

    fn report(a: &str, b: &str, t: Tally) -> ComparisonReport {
        ComparisonReport { a: a.into(), b: b.into(), alpha: 0.05, points: vec![], counts: t }
    }

    #[test]
    fn summaries_add_up() {
        let rows = summarize(&[report("n", "r", Tally { loss: 0, tie: 21, win: 0 })]);
        assert_eq!(rows[0].1, Tally { loss: 0, tie: 21, win: 0 });
        let rows = summarize(&[
            report("n", "r", Tally { loss: 0, tie: 0, win: 19 }),
            report("n", "r", Tally { loss: 0, tie: 2, win: 17 }),
            report("a", "r", Tally { loss: 1, tie: 0, win: 0 }),
        ]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].1, Tally { loss: 0, tie: 2, win: 36 });
        let csv = summary_csv(&rows);
        assert_eq!(csv.lines().nth(2), Some("n,r,0,2,36"));
        let text = summary_text(&rows);
        assert!(text.lines().next().unwrap().contains("Loss"));
        assert!(text.contains("n vs r"));
    }
}
