//! Deterministic colors for label maps and flow fields.
//!
//! Instance colors hash the id alone, so a given instance keeps its color
//! across runs, machines, and crops. Fields render as HSV: hue is the flow
//! angle, saturation the clamped magnitude, value the foreground
//! probability.

use densflow_core::rng::mix64;

/// Color for an instance id; background (0) is black.
pub fn id_color(id: u32) -> [u8; 3] {
    if id == 0 {
        return [0, 0, 0];
    }
    let h = mix64(id as u64);
    let hue = (h % 3600) as f64 / 10.0;
    let sat = 0.55 + 0.35 * ((h >> 16) % 256) as f64 / 255.0;
    let val = 0.70 + 0.28 * ((h >> 32) % 256) as f64 / 255.0;
    hsv_to_rgb(hue, sat, val)
}

/// Field pixel color from flow direction, magnitude, and probability.
pub fn field_color(fy: f32, fx: f32, prob: f32) -> [u8; 3] {
    let angle = (fy as f64).atan2(fx as f64).to_degrees().rem_euclid(360.0);
    let mag = ((fy as f64).hypot(fx as f64)).min(1.0);
    let val = (prob as f64).clamp(0.0, 1.0);
    hsv_to_rgb(angle, mag, val)
}

pub fn hsv_to_rgb(hue: f64, sat: f64, val: f64) -> [u8; 3] {
    let c = val * sat;
    let hp = hue / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = val - c;
    [
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    ]
}
