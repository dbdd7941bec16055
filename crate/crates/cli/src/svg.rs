//! SVG rendering of a landmark sample: every object's preshape is rotated to
//! best match the sample mean preshape and drawn as small circles; the mean
//! landmarks are drawn as star markers. Output carries no timestamp, so a
//! fixed input yields a byte-identical file.

use shapestat_core::{extrinsic, intrinsic, Preshape, Shape};

use crate::config::AnalysisConfig;
use crate::error::CliError;
use crate::landmarks::LandmarkFile;

const CANVAS: f64 = 640.0;
const MARGIN: f64 = 40.0;

/// Sample mean preshape under the configured method (extrinsic when the
/// method is `both`).
fn mean_shape(shapes: &[Shape], config: &AnalysisConfig) -> Result<Shape, CliError> {
    if config.method.runs_extrinsic() {
        Ok(extrinsic::extrinsic_mean(shapes)?.0)
    } else {
        let (init, _) = extrinsic::extrinsic_mean(shapes)?;
        Ok(intrinsic::karcher_mean(shapes, &init, &config.karcher)?.mean)
    }
}

fn star_points(cx: f64, cy: f64, outer: f64) -> String {
    let inner = outer * 0.4;
    let mut points = Vec::with_capacity(10);
    for i in 0..10 {
        let radius = if i % 2 == 0 { outer } else { inner };
        let angle = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 5.0;
        points.push(format!("{:.3},{:.3}", cx + radius * angle.cos(), cy + radius * angle.sin()));
    }
    points.join(" ")
}

/// Renders the aligned sample and its mean to an SVG 1.1 string.
pub fn render_shapes(file: &LandmarkFile, config: &AnalysisConfig) -> Result<String, CliError> {
    let shapes = file.shapes()?;
    let mean = mean_shape(&shapes, config)?;
    let aligned: Vec<Preshape> =
        shapes.iter().map(|s| s.rep().align_to(mean.rep())).collect();

    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for pre in aligned.iter().chain(std::iter::once(mean.rep())) {
        for z in pre.coords().iter() {
            min_x = min_x.min(z.re);
            max_x = max_x.max(z.re);
            min_y = min_y.min(z.im);
            max_y = max_y.max(z.im);
        }
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    // SVG y grows downward; flip the imaginary axis.
    let map = |z: &shapestat_core::Complex64| {
        let x = MARGIN + (z.re - min_x) * scale;
        let y = CANVAS - MARGIN - (z.im - min_y) * scale;
        (x, y)
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{CANVAS}\" height=\"{CANVAS}\" viewBox=\"0 0 {CANVAS} {CANVAS}\">\n"
    ));
    out.push_str(&format!(
        "  <title>{} (n={}, k={}, {} mean)</title>\n",
        file.label,
        file.n(),
        file.k,
        config.method.as_str()
    ));
    for pre in &aligned {
        for z in pre.coords().iter() {
            let (x, y) = map(z);
            out.push_str(&format!(
                "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"#4477aa\" fill-opacity=\"0.5\"/>\n"
            ));
        }
    }
    for z in mean.rep().coords().iter() {
        let (x, y) = map(z);
        out.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"#cc3311\"/>\n",
            star_points(x, y, 8.0)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders and writes the figure.
pub fn plot_shapes(
    file: &LandmarkFile,
    config: &AnalysisConfig,
    out_path: &std::path::Path,
) -> Result<(), CliError> {
    let svg = render_shapes(file, config)?;
    std::fs::write(out_path, svg)
        .map_err(|e| CliError::Io { path: out_path.display().to_string(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_kads_stream, SimSpec};
    use shapestat_core::KAd;

    fn sample_file(n: usize, noise: f64) -> LandmarkFile {
        let template = KAd::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let spec = SimSpec::new(template, noise, n).unwrap();
        LandmarkFile::new("svgtest", simulate_kads_stream(&spec, 21, 0)).unwrap()
    }

    /// Minimal well-formedness check: tags balance and attributes are quoted.
    fn assert_well_formed(svg: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = svg;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed tag") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name.trim()), "mismatched close");
            } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
                let name = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
            let quotes = tag.matches('"').count();
            assert_eq!(quotes % 2, 0, "unbalanced quotes in <{tag}>");
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    fn circle_centers(svg: &str) -> Vec<(f64, f64)> {
        svg.split("<circle")
            .skip(1)
            .map(|part| {
                let cx = part.split("cx=\"").nth(1).unwrap().split('"').next().unwrap();
                let cy = part.split("cy=\"").nth(1).unwrap().split('"').next().unwrap();
                (cx.parse().unwrap(), cy.parse().unwrap())
            })
            .collect()
    }

    /// Star polygons start at the top vertex (cx, cy - outer radius).
    fn star_centers(svg: &str) -> Vec<(f64, f64)> {
        svg.split("<polygon points=\"")
            .skip(1)
            .map(|part| {
                let first = part.split(' ').next().unwrap();
                let (x, y) = first.split_once(',').unwrap();
                (x.parse::<f64>().unwrap(), y.parse::<f64>().unwrap() + 8.0)
            })
            .collect()
    }

    #[test]
    fn figure_has_one_circle_per_landmark_and_one_star_per_mean_landmark() {
        let file = sample_file(7, 0.05);
        let svg = render_shapes(&file, &AnalysisConfig::default()).unwrap();
        assert_well_formed(&svg);
        assert_eq!(svg.matches("<circle").count(), 7 * 4);
        assert_eq!(svg.matches("<polygon").count(), 4);
    }

    #[test]
    fn single_object_coincides_with_mean_markers() {
        let file = sample_file(1, 0.05);
        let svg = render_shapes(&file, &AnalysisConfig::default()).unwrap();
        // With n = 1 the mean is the object itself: every circle center must
        // sit on a star center.
        let circles = circle_centers(&svg);
        let stars = star_centers(&svg);
        assert_eq!(circles.len(), 4);
        assert_eq!(stars.len(), 4);
        for (cx, cy) in circles {
            assert!(
                stars.iter().any(|(sx, sy)| (sx - cx).abs() < 0.01 && (sy - cy).abs() < 0.01),
                "circle at ({cx},{cy}) has no matching star"
            );
        }
    }

    #[test]
    fn aligned_scatter_scales_with_noise() {
        // Extract coordinates back out of the SVG and measure the worst
        // distance from a circle to its nearest mean marker; a 40x noise
        // ratio must show up clearly in the rendered clusters.
        let cluster_radius = |noise: f64| {
            let svg = render_shapes(&sample_file(12, noise), &AnalysisConfig::default()).unwrap();
            let stars = star_centers(&svg);
            circle_centers(&svg)
                .iter()
                .map(|(cx, cy)| {
                    stars
                        .iter()
                        .map(|(sx, sy)| ((sx - cx).powi(2) + (sy - cy).powi(2)).sqrt())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0f64, f64::max)
        };
        let tight = cluster_radius(0.002);
        let loose = cluster_radius(0.08);
        assert!(
            tight < 0.2 * loose,
            "tight radius {tight} not well below loose radius {loose}"
        );
    }
}
