//! Trajectory plots as standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use motassoc::motio::SequenceMeta;
use motassoc::TrackOutput;

/// A stable, well-spread color per id: golden-ratio hue steps at fixed
/// saturation and lightness.
pub fn id_color(id: u64) -> String {
    const PHI_FRAC: f64 = 0.618_033_988_749_894_9;
    let hue = ((id as f64) * PHI_FRAC).fract() * 6.0;
    let (s, l) = (0.65, 0.45);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - (hue % 2.0 - 1.0).abs());
    let (r, g, b) = match hue as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// One polyline per id through its box centers in frame order, labelled at the
/// last point, over a frame-sized arena.
pub fn render_svg(tracks: &TrackOutput, meta: &SequenceMeta) -> String {
    let (w, h) = (meta.image_width, meta.image_height);
    let mut paths: BTreeMap<u64, Vec<(u32, f64, f64)>> = BTreeMap::new();
    for r in &tracks.records {
        let (x, y) = r.bbox.center();
        paths.entry(r.id.0).or_default().push((r.frame, x, y));
    }

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(&meta.name)).unwrap();
    writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>"
    )
    .unwrap();
    for (id, mut pts) in paths {
        pts.sort_by_key(|p| p.0);
        let color = id_color(id);
        let points: Vec<String> = pts.iter().map(|(_, x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(s, "<g id=\"track-{id}\">").unwrap();
        writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            points.join(" ")
        )
        .unwrap();
        let (_, x, y) = pts[pts.len() - 1];
        writeln!(s, "<text x=\"{x:.2}\" y=\"{y:.2}\" fill=\"{color}\" font-size=\"14\">{id}</text>").unwrap();
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
