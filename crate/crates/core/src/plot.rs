//! Output writers: RFC-4180 CSV with a provenance comment line, JSON
//! reports, and static SVG renderings of spherical Voronoi diagrams
//! (front-hemisphere orthographic projection).

use nalgebra::Vector3;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// FNV-1a over the canonical config serialization; embedded in every
/// output file so runs can be traced back to their configuration.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Shortest round-trip decimal form of an f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// CSV with a leading `# config_hash=` comment, then a header row.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    hash: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "# config_hash={hash}")?;
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#59a356", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

/// Orthographic front-hemisphere (z >= 0) rendering: sample points
/// colored by assigned site, sites marked, boundary polylines drawn.
pub fn render_sphere_svg<P: AsRef<Path>>(
    path: P,
    hash: &str,
    title: &str,
    points: &[(Vector3<f64>, usize)],
    sites: &[Vector3<f64>],
    polylines: &[Vec<Vector3<f64>>],
) -> io::Result<()> {
    let size = 640.0;
    let rad = size * 0.45;
    let cx = size / 2.0;
    let cy = size / 2.0;
    let px = |v: &Vector3<f64>| (cx + rad * v.x, cy - rad * v.y);
    let mut f = fs::File::create(path)?;
    writeln!(
        f,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    )?;
    writeln!(f, "<!-- config_hash={hash} -->")?;
    writeln!(
        f,
        "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/><circle cx=\"{cx}\" cy=\"{cy}\" r=\"{rad}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>"
    )?;
    writeln!(
        f,
        "<text x=\"{cx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>"
    )?;
    for (v, site) in points {
        if v.z < 0.0 {
            continue;
        }
        let (x, y) = px(v);
        let color = PALETTE[site % PALETTE.len()];
        writeln!(
            f,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.0\" fill=\"{color}\" fill-opacity=\"0.8\"/>"
        )?;
    }
    for line in polylines {
        let mut d = String::new();
        let mut pen_down = false;
        for v in line {
            if v.z < -0.02 {
                pen_down = false;
                continue;
            }
            let (x, y) = px(v);
            if pen_down {
                d.push_str(&format!(" L {x:.2} {y:.2}"));
            } else {
                d.push_str(&format!(" M {x:.2} {y:.2}"));
                pen_down = true;
            }
        }
        if !d.is_empty() {
            writeln!(
                f,
                "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
                d.trim()
            )?;
        }
    }
    for (i, s) in sites.iter().enumerate() {
        if s.z < 0.0 {
            continue;
        }
        let (x, y) = px(s);
        let color = PALETTE[i % PALETTE.len()];
        writeln!(
            f,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\" fill=\"{color}\" stroke=\"black\" stroke-width=\"1.5\"/>"
        )?;
    }
    writeln!(f, "</svg>")?;
    Ok(())
}
