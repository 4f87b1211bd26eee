//! SVG scatter plot of a 2-D dataset with the selected points highlighted.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::kernel::Dataset;

/// Category10 palette, indexed by `label % 10`.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const UNSELECTED: &str = "#b0b0b0";
const HIGHLIGHT: &str = "#d62728";

/// Renders every point once: unselected points first, then selected points
/// (deduplicated, in pick order) on top.
pub fn render(dataset: &Dataset, selected: &[usize], width: u32, height: u32) -> Result<String> {
    if dataset.d() != 2 {
        return Err(Error::invalid("viz requires 2-D data"));
    }
    if selected.is_empty() {
        return Err(Error::invalid("selection is empty"));
    }
    if width == 0 || height == 0 {
        return Err(Error::invalid("width and height must be positive"));
    }
    let n = dataset.n();
    let mut is_selected = vec![false; n];
    let mut order = Vec::with_capacity(selected.len());
    for &i in selected {
        if i >= n {
            return Err(Error::invalid(format!("selected index {i} out of range for n = {n}")));
        }
        if !is_selected[i] {
            is_selected[i] = true;
            order.push(i);
        }
    }

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in dataset.rows() {
        xmin = xmin.min(r[0]);
        xmax = xmax.max(r[0]);
        ymin = ymin.min(r[1]);
        ymax = ymax.max(r[1]);
    }
    // 5% margin on each side; a flat axis gets a unit span.
    let pad = |lo: f64, hi: f64| {
        let span = if hi > lo { hi - lo } else { 1.0 };
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (x0, x1) = pad(xmin, xmax);
    let (y0, y1) = pad(ymin, ymax);
    let (w, h) = (f64::from(width), f64::from(height));
    let px = |x: f64| (x - x0) / (x1 - x0) * w;
    let py = |y: f64| h - (y - y0) / (y1 - y0) * h;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        "<style>.point{{fill:{UNSELECTED};fill-opacity:0.6}} .selected{{stroke:#000000;stroke-width:1}}</style>"
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##
    );
    for i in (0..n).filter(|&i| !is_selected[i]) {
        let r = dataset.row(i);
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{:.3}" cy="{:.3}" r="2"/>"#,
            px(r[0]),
            py(r[1])
        );
    }
    for &i in &order {
        let r = dataset.row(i);
        let fill = dataset.labels().map_or(HIGHLIGHT, |l| PALETTE[l[i] as usize % PALETTE.len()]);
        let _ = writeln!(
            out,
            r#"<circle class="selected" cx="{:.3}" cy="{:.3}" r="5" fill="{fill}"/>"#,
            px(r[0]),
            py(r[1])
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_counts() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let svg = render(&ds, &[1], 200, 100).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches(r#"class="selected""#).count(), 1);
        assert_eq!(svg, render(&ds, &[1], 200, 100).unwrap());
    }

    #[test]
    fn repeats_and_labels() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
            .unwrap()
            .with_labels(vec![0, 1, 2])
            .unwrap();
        let svg = render(&ds, &[2, 2, 0], 50, 50).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains(PALETTE[2]));
    }

    #[test]
    fn rejects_bad_input() {
        let ds3 = Dataset::new(vec![0.0; 6], 2, 3, None).unwrap();
        assert!(render(&ds3, &[0], 10, 10)
            .unwrap_err()
            .to_string()
            .contains("viz requires 2-D data"));
        let ds = Dataset::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(render(&ds, &[], 10, 10).is_err());
        assert!(render(&ds, &[3], 10, 10).is_err());
    }
}
