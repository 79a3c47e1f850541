//! Step-curve figures as standalone SVG 1.1.
//!
//! Curves use the post-step convention: a horizontal run from each jump to
//! the next, then a vertical drop at the jump, matching the right-continuous
//! survival function.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::surv::StepCurve;

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
const DASHES: [&str; 3] = ["", "8 4", "2 3"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    /// Added to tick labels so the axis shows original ordinal codes.
    pub x_offset: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: "Survival curves".into(),
            x_label: "score".into(),
            y_label: "proportion".into(),
            width: 800,
            height: 600,
            x_offset: 0.0,
        }
    }
}

/// Pixel geometry of the plotting area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x_max: f64,
}

impl Frame {
    pub fn new(opts: &PlotOptions, x_max: f64) -> Self {
        let (w, h) = (f64::from(opts.width), f64::from(opts.height));
        Frame { left: 80.0, top: 50.0, width: w - 80.0 - 170.0, height: h - 50.0 - 70.0, x_max }
    }

    pub fn x(&self, t: f64) -> f64 {
        self.left + self.width * t / self.x_max
    }

    pub fn y(&self, s: f64) -> f64 {
        self.top + self.height * (1.0 - s)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    step.max(f64::MIN_POSITIVE)
}

/// Right edge of the time axis for a set of curves.
pub fn x_extent(curves: &[(String, StepCurve)]) -> f64 {
    let last = curves.iter().filter_map(|(_, c)| c.jump_times().last().copied()).fold(0.0, f64::max);
    if last > 0.0 {
        last * 1.05
    } else {
        1.0
    }
}

/// Path data for one curve inside `frame`.
pub fn step_path(curve: &StepCurve, frame: &Frame) -> String {
    let mut d = format!("M {} {}", num(frame.x(0.0)), num(frame.y(1.0)));
    for (&t, &s) in curve.jump_times().iter().zip(curve.survival()) {
        write!(d, " H {} V {}", num(frame.x(t)), num(frame.y(s))).unwrap();
    }
    write!(d, " H {}", num(frame.x(frame.x_max))).unwrap();
    d
}

pub fn render_step_svg(curves: &[(String, StepCurve)], opts: &PlotOptions) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::NothingToPlot);
    }
    let frame = Frame::new(opts, x_extent(curves));
    let (w, h) = (opts.width, opts.height);
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="13">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        num(frame.left + frame.width / 2.0),
        escape(&opts.title)
    )
    .unwrap();

    // axes
    let (x0, x1) = (frame.x(0.0), frame.x(frame.x_max));
    let (y0, y1) = (frame.y(0.0), frame.y(1.0));
    writeln!(
        out,
        r#"<path class="axes" d="M {} {} V {} H {}" fill="none" stroke="black"/>"#,
        num(x0),
        num(y1),
        num(y0),
        num(x1)
    )
    .unwrap();
    for i in 0..=4 {
        let s = f64::from(i) * 0.25;
        let y = frame.y(s);
        writeln!(
            out,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ccc"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            num(x0),
            num(x1),
            num(x0 - 6.0),
            num(y + 4.0),
            s,
            y = num(y),
        )
        .unwrap();
    }
    let step = nice_step(frame.x_max);
    let mut k = 0u32;
    loop {
        let t = f64::from(k) * step;
        if t > frame.x_max + 1e-9 {
            break;
        }
        let x = frame.x(t);
        writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            num(y0),
            num(y0 + 5.0),
            num(y0 + 20.0),
            num(t + opts.x_offset),
            x = num(x),
        )
        .unwrap();
        k += 1;
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(frame.left + frame.width / 2.0),
        num(y0 + 45.0),
        escape(&opts.x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{y}" text-anchor="middle" transform="rotate(-90 20 {y})">{}</text>"#,
        escape(&opts.y_label),
        y = num(frame.top + frame.height / 2.0),
    )
    .unwrap();

    // curves and legend
    let legend_x = x1 + 20.0;
    for (i, (label, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let dash_attr =
            if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        writeln!(
            out,
            r#"<path class="curve" d="{}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            step_path(curve, &frame)
        )
        .unwrap();
        let ly = frame.top + 10.0 + 22.0 * i as f64;
        writeln!(
            out,
            r#"<g class="legend-entry"><line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/><text x="{}" y="{}">{}</text></g>"#,
            num(legend_x),
            num(legend_x + 24.0),
            num(legend_x + 30.0),
            num(ly + 4.0),
            escape(label),
            ly = num(ly),
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surv::{km_estimate, Observation};

    fn curve(ts: &[f64]) -> StepCurve {
        km_estimate(&ts.iter().map(|&t| Observation::event(t, 0)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn nothing_to_plot() {
        assert_eq!(render_step_svg(&[], &PlotOptions::default()), Err(Error::NothingToPlot));
    }

    #[test]
    fn single_step_geometry() {
        let c = curve(&[1.0]);
        let frame = Frame::new(&PlotOptions::default(), x_extent(&[("a".into(), c.clone())]));
        let d = step_path(&c, &frame);
        let expected = format!(
            "M {} {} H {} V {}",
            num(frame.x(0.0)),
            num(frame.y(1.0)),
            num(frame.x(1.0)),
            num(frame.y(0.0))
        );
        assert!(d.starts_with(&expected), "{d}");
    }

    #[test]
    fn escapes_labels() {
        let svg = render_step_svg(&[("A<B & \"x\"".into(), curve(&[1.0]))], &PlotOptions::default()).unwrap();
        assert!(svg.contains("A&lt;B &amp; &quot;x&quot;"));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(nice_step(16.8), 5.0);
        assert_eq!(nice_step(4.2), 1.0);
        assert_eq!(nice_step(1.0), 0.2);
        assert_eq!(num(2.5000), "2.5");
        assert_eq!(num(-0.0001), "0");
    }
}
