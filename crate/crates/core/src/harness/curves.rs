//! Learning curves and their CSV and SVG forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "algorithm,fold,labeled_count,accuracy";

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub algorithm: String,
    pub fold: usize,
    pub seed: u64,
    /// `(labeled count, accuracy)` after each episode.
    pub points: Vec<(usize, f64)>,
}

impl LearningCurve {
    /// Labeled counts strictly increase and accuracies lie in `[0, 1]`.
    pub fn check(&self) -> Result<()> {
        if self.points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Contract(format!(
                "{} fold {}: labeled counts must strictly increase",
                self.algorithm, self.fold
            )));
        }
        if self.points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(Error::Contract(format!(
                "{} fold {}: accuracy outside [0, 1]",
                self.algorithm, self.fold
            )));
        }
        Ok(())
    }
}

/// Curves as CSV, rows in the given curve order.
pub fn curves_to_csv(curves: &[LearningCurve]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for c in curves {
        for &(n, acc) in &c.points {
            let _ = writeln!(out, "{},{},{},{}", c.algorithm, c.fold, n, acc);
        }
    }
    out
}

/// Parses curve CSV; rows of one `(algorithm, fold)` keep file order.
pub fn curves_from_csv(text: &str, path: &Path) -> Result<Vec<LearningCurve>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => return Err(err(i + 1, format!("expected header `{CSV_HEADER}`"))),
        None => return Err(err(1, "empty curve file".into())),
    }
    let mut by_key: BTreeMap<(String, usize), LearningCurve> = BTreeMap::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(err(i + 1, format!("expected 4 fields, got {}", f.len())));
        }
        let fold = f[1].parse().map_err(|_| err(i + 1, format!("bad fold `{}`", f[1])))?;
        let n = f[2].parse().map_err(|_| err(i + 1, format!("bad labeled count `{}`", f[2])))?;
        let acc: f64 = f[3].parse().map_err(|_| err(i + 1, format!("bad accuracy `{}`", f[3])))?;
        by_key
            .entry((f[0].to_string(), fold))
            .or_insert_with(|| LearningCurve {
                algorithm: f[0].to_string(),
                fold,
                seed: 0,
                points: Vec::new(),
            })
            .points
            .push((n, acc));
    }
    let curves: Vec<LearningCurve> = by_key.into_values().collect();
    for c in &curves {
        c.check().map_err(|e| e.context(path.display().to_string()))?;
    }
    Ok(curves)
}

pub fn read_curves(path: &Path) -> Result<Vec<LearningCurve>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))?;
    curves_from_csv(&text, path)
}

/// Mean accuracy per point across folds, per algorithm.
pub fn mean_curves(curves: &[LearningCurve]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut by_alg: BTreeMap<&str, Vec<&LearningCurve>> = BTreeMap::new();
    for c in curves {
        by_alg.entry(&c.algorithm).or_default().push(c);
    }
    by_alg
        .into_iter()
        .map(|(alg, cs)| {
            let n = cs.iter().map(|c| c.points.len()).min().unwrap_or(0);
            let pts = (0..n)
                .map(|i| {
                    let k = cs.len() as f64;
                    let x = cs.iter().map(|c| c.points[i].0 as f64).sum::<f64>() / k;
                    let y = cs.iter().map(|c| c.points[i].1).sum::<f64>() / k;
                    (x, y)
                })
                .collect();
            (alg.to_string(), pts)
        })
        .collect()
}

/// A static SVG plot of the mean curve of every algorithm.
pub fn curves_to_svg(curves: &[LearningCurve], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    const COLORS: [&str; 8] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    ];
    let means = mean_curves(curves);
    let xs = means.iter().flat_map(|(_, p)| p.iter().map(|q| q.0));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - y * (H - 2.0 * M);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>", W / 2.0, xml_escape(title));
    let _ = writeln!(
        s,
        "<path d=\"M{M} {} V{} H{}\" stroke=\"black\" fill=\"none\"/>",
        M,
        H - M,
        W - M
    );
    for tick in 0..=4 {
        let y = tick as f64 / 4.0;
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{y:.2}</text>", M - 4.0, sy(y) + 4.0);
    }
    let _ = writeln!(s, "<text x=\"{M}\" y=\"{}\">{x0}</text>", H - M + 16.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{x1}</text>", W - M, H - M + 16.0);
    for (i, (alg, pts)) in means.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, "<polyline points=\"{}\" stroke=\"{color}\" fill=\"none\"/>", d.join(" "));
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>",
            W - M + 4.0 - 120.0,
            M + 16.0 * i as f64,
            xml_escape(alg)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
