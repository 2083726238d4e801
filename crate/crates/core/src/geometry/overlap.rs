use super::Homography;
use crate::error::{Error, Result};
use crate::linalg::{Vec2, ZERO_NORM};

/// Clips `poly` to the half-plane selected by `inside`, intersecting edges
/// with the boundary through `cut`.
fn clip_edge(poly: &[Vec2], inside: impl Fn(Vec2) -> bool, cut: impl Fn(Vec2, Vec2) -> Vec2) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for (i, &cur) in poly.iter().enumerate() {
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        match (inside(prev), inside(cur)) {
            (true, true) => out.push(cur),
            (true, false) => out.push(cut(prev, cur)),
            (false, true) => {
                out.push(cut(prev, cur));
                out.push(cur);
            }
            (false, false) => {}
        }
    }
    out
}

fn cut_x(x: f64) -> impl Fn(Vec2, Vec2) -> Vec2 {
    move |a, b| {
        let t = (x - a.x) / (b.x - a.x);
        Vec2::new(x, a.y + t * (b.y - a.y))
    }
}

fn cut_y(y: f64) -> impl Fn(Vec2, Vec2) -> Vec2 {
    move |a, b| {
        let t = (y - a.y) / (b.y - a.y);
        Vec2::new(a.x + t * (b.x - a.x), y)
    }
}

/// Sutherland–Hodgman clip of a polygon against `[0, w] × [0, h]`.
pub fn clip_to_rect(poly: &[Vec2], w: f64, h: f64) -> Vec<Vec2> {
    let mut p = poly.to_vec();
    if p.is_empty() {
        return p;
    }
    p = clip_edge(&p, |v| v.x >= 0.0, cut_x(0.0));
    if p.is_empty() {
        return p;
    }
    p = clip_edge(&p, |v| v.x <= w, cut_x(w));
    if p.is_empty() {
        return p;
    }
    p = clip_edge(&p, |v| v.y >= 0.0, cut_y(0.0));
    if p.is_empty() {
        return p;
    }
    clip_edge(&p, |v| v.y <= h, cut_y(h))
}

/// Shoelace area (absolute).
pub fn polygon_area(poly: &[Vec2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let twice: f64 = poly
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let b = poly[(i + 1) % poly.len()];
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice.abs() / 2.0
}

/// Fraction of the current frame covered by the previous frame warped through `h`.
pub fn frame_overlap(h: &Homography, width: usize, height: usize) -> Result<f64> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig("frame dimensions must be positive".into()));
    }
    let (w, hh) = (width as f64, height as f64);
    let corners = [
        Vec2::new(0.0, 0.0),
        Vec2::new(w, 0.0),
        Vec2::new(w, hh),
        Vec2::new(0.0, hh),
    ];
    let mut quad = Vec::with_capacity(4);
    for c in corners {
        let [x, y, z] = h.h.apply_h(c);
        // Every corner must stay strictly in front of the projection plane.
        if z <= ZERO_NORM {
            return Err(Error::OverlapUndefined);
        }
        quad.push(Vec2::new(x / z, y / z));
    }
    let clipped = clip_to_rect(&quad, w, hh);
    Ok((polygon_area(&clipped) / (w * hh)).clamp(0.0, 1.0))
}
