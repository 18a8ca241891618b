//! SVG rendering of landscape profiles.
//!
//! Output is a pure function of the profile and style: numbers are printed
//! with fixed precision and elements are emitted in basin-tree preorder, so
//! identical inputs give byte-identical documents.

use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::profile::{ColorRamp, LandscapeProfile, MarkerKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthScale {
    #[default]
    Linear,
    /// Horizontal offsets from each component's minimum are square-rooted.
    Sqrt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub width: u32,
    pub height: u32,
    pub margin: f64,
    pub ramp: ColorRamp,
    pub background: String,
    pub minimum_color: String,
    pub saddle_color: String,
    pub minimum_radius: f64,
    pub saddle_radius: f64,
    pub axis: bool,
    pub width_scale: WidthScale,
    /// Rectangles thinner than this many pixels are drawn at this height.
    pub min_rect_height: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 800,
            height: 500,
            margin: 40.0,
            ramp: ColorRamp::default(),
            background: "#ffffff".into(),
            minimum_color: "#d62728".into(),
            saddle_color: "#ff7f0e".into(),
            minimum_radius: 4.0,
            saddle_radius: 3.5,
            axis: true,
            width_scale: WidthScale::Linear,
            min_rect_height: 1.0,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("canvas dimensions must be positive"));
        }
        if !(self.margin >= 0.0 && 2.0 * self.margin < self.width.min(self.height) as f64) {
            return Err(Error::param("margin must leave a positive plot area"));
        }
        if !(self.minimum_radius > 0.0 && self.saddle_radius > 0.0 && self.min_rect_height >= 0.0) {
            return Err(Error::param("marker radii must be positive"));
        }
        self.ramp.validate()?;
        for c in [&self.background, &self.minimum_color, &self.saddle_color] {
            crate::profile::color::parse_hex(c)?;
        }
        Ok(())
    }
}

struct XMap {
    /// Per component: (root center, half extent, left edge after packing).
    roots: Vec<(f64, f64, f64)>,
    scale: WidthScale,
    lo: f64,
    px_per_unit: f64,
    margin: f64,
}

impl XMap {
    fn new(profile: &LandscapeProfile, style: &RenderStyle) -> Self {
        let mut roots = Vec::new();
        let mut cursor = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in &profile.roots {
            let b = &profile.basins[r];
            let c = b.center_x;
            let half = (c - b.x0).max(b.x1 - c).max(f64::MIN_POSITIVE);
            match style.width_scale {
                WidthScale::Linear => {
                    lo = lo.min(b.x0);
                    hi = hi.max(b.x1);
                    roots.push((c, half, 0.0));
                }
                WidthScale::Sqrt => {
                    let left = (half * (c - b.x0)).sqrt();
                    let right = (half * (b.x1 - c)).sqrt();
                    roots.push((c, half, cursor + left));
                    lo = lo.min(cursor);
                    cursor += left + right;
                    hi = hi.max(cursor);
                    cursor += crate::profile::COMPONENT_GAP;
                }
            }
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        let plot = style.width as f64 - 2.0 * style.margin;
        Self {
            roots,
            scale: style.width_scale,
            lo,
            px_per_unit: plot / (hi - lo).max(f64::MIN_POSITIVE),
            margin: style.margin,
        }
    }

    fn x(&self, component: usize, x: f64) -> f64 {
        let unit = match self.scale {
            WidthScale::Linear => x,
            WidthScale::Sqrt => {
                let (c, half, anchor) = self.roots[component];
                let d = x - c;
                anchor + d.signum() * (d.abs() * half).sqrt()
            }
        };
        self.margin + (unit - self.lo) * self.px_per_unit
    }
}

pub fn to_svg(profile: &LandscapeProfile, style: &RenderStyle) -> Result<String> {
    style.validate()?;
    let (w, h) = (style.width as f64, style.height as f64);
    let (vlo, mut vhi) = profile.value_range;
    if vhi <= vlo {
        warn!("profile has a zero value range; rendering a flat band");
        vhi = vlo + 1.0;
    }
    let flat = profile.value_range.1 <= profile.value_range.0;
    let plot_h = h - 2.0 * style.margin;
    let y = |v: f64| {
        if flat {
            style.margin + plot_h / 2.0
        } else {
            style.margin + (vhi - v) / (vhi - vlo) * plot_h
        }
    };
    let xmap = XMap::new(profile, style);
    let component_of = |basin: usize| {
        let comp = profile.basins[basin].component;
        profile
            .roots
            .iter()
            .position(|&r| profile.basins[r].component == comp)
            .unwrap_or(0)
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(out, r#"<path class="background" d="M0 0H{w}V{h}H0Z" fill="{}"/>"#, style.background);

    // Preorder so nested basins paint over their parents.
    let mut stack: Vec<usize> = profile.roots.iter().rev().copied().collect();
    while let Some(b) = stack.pop() {
        let basin = &profile.basins[b];
        let comp = component_of(b);
        let fill = match basin.shade {
            Some(t) => style.ramp.at(t)?,
            None => basin.color.clone().unwrap_or_else(|| style.ramp.dark.clone()),
        };
        let _ = writeln!(out, r#"<g class="basin" data-basin="{}" fill="{fill}">"#, basin.id);
        let last = basin.rects.len().saturating_sub(1);
        for (i, r) in basin.rects.iter().enumerate() {
            // A flat slab followed by another slab of the same basin is covered by it.
            if r.y1 <= r.y0 && i < last {
                continue;
            }
            let x0 = xmap.x(comp, r.x0);
            let x1 = xmap.x(comp, r.x1);
            let top = y(r.y1);
            let height = (y(r.y0) - top).max(style.min_rect_height);
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.3}" y="{top:.3}" width="{:.3}" height="{height:.3}"/>"#,
                x1 - x0
            );
        }
        let _ = writeln!(out, "</g>");
        stack.extend(basin.children.iter().rev());
    }

    for m in &profile.markers {
        let comp = profile
            .basins
            .iter()
            .find(|b| b.min_node == m.node || b.saddle_node == Some(m.node))
            .map_or(0, |b| component_of(b.id));
        let (fill, radius, class) = match m.kind {
            MarkerKind::Minimum => (&style.minimum_color, style.minimum_radius, "minimum"),
            MarkerKind::Saddle => (&style.saddle_color, style.saddle_radius, "saddle"),
        };
        let _ = writeln!(
            out,
            r#"<circle class="{class}" cx="{:.3}" cy="{:.3}" r="{radius:.3}" fill="{fill}"/>"#,
            xmap.x(comp, m.x),
            y(m.y)
        );
    }

    if style.axis {
        let x = style.margin / 2.0;
        let _ = writeln!(
            out,
            r##"<line class="axis" x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="#333333"/>"##,
            y(vhi),
            y(vlo)
        );
        for (v, label) in [(vhi, profile.value_range.1), (vlo, profile.value_range.0)] {
            let _ = writeln!(
                out,
                r##"<text x="{:.3}" y="{:.3}" font-size="10" fill="#333333">{}</text>"##,
                x + 2.0,
                y(v) - 2.0,
                format_value(label)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn format_value(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}
