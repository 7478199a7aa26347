use std::fmt::Write;

use num_traits::Zero;

use blackwell_core::equilibrium::{hull_2d, PayoffPoint, PayoffPolytope};
use blackwell_core::exact::{self, Rational};
use blackwell_core::model::Game;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Keeps the part of a convex polygon with coordinate `k` at least `bound`.
fn clip(poly: &[Vec<Rational>], k: usize, bound: &Rational) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    let n = poly.len();
    for j in 0..n {
        let (a, b) = (&poly[j], &poly[(j + 1) % n]);
        let (ina, inb) = (&a[k] >= bound, &b[k] >= bound);
        if ina {
            out.push(a.clone());
        }
        if ina != inb {
            let t = (bound - &a[k]) / (&b[k] - &a[k]);
            out.push(a.iter().zip(b).map(|(x, y)| x + (y - x) * &t).collect());
        }
    }
    let hull = hull_2d(&out);
    hull.into_iter().map(|i| out[i].clone()).collect()
}

/// Feasible payoffs that are individually rational at `values`, as a
/// counter-clockwise polygon.
pub fn ir_region(feasible: &[PayoffPoint], values: &[Rational]) -> Vec<Vec<Rational>> {
    let pts: Vec<Vec<Rational>> = feasible.iter().map(|p| p.payoff.clone()).collect();
    let mut poly: Vec<Vec<Rational>> = hull_2d(&pts).into_iter().map(|i| pts[i].clone()).collect();
    for (k, v) in values.iter().enumerate() {
        if poly.is_empty() {
            break;
        }
        poly = clip(&poly, k, v);
    }
    poly
}

struct Frame {
    lo: [f64; 2],
    scale: f64,
}

impl Frame {
    fn x(&self, v: &Rational) -> f64 {
        MARGIN + (exact::to_f64(v) - self.lo[0]) * self.scale
    }

    fn y(&self, v: &Rational) -> f64 {
        SIZE - MARGIN - (exact::to_f64(v) - self.lo[1]) * self.scale
    }
}

fn coords(points: &[Vec<Rational>]) -> String {
    points
        .iter()
        .map(|p| format!("{},{}", exact::format_rational(&p[0]), exact::format_rational(&p[1])))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Payoff plane of a two-player game: feasible outcomes, the individually
/// rational region and one equilibrium hull per epsilon. Exact coordinates
/// are kept in `data-*` attributes.
pub fn render_payoff_plot(
    game: &Game,
    values: &[Rational],
    hulls: &[(f64, PayoffPolytope)],
    feasible: &[PayoffPoint],
) -> String {
    let mut all: Vec<&Vec<Rational>> = feasible.iter().map(|p| &p.payoff).collect();
    all.extend(hulls.iter().flat_map(|(_, h)| h.vertices.iter().map(|v| &v.payoff)));
    let mut lo = [0.0f64, 0.0];
    let mut hi = [0.0f64, 0.0];
    for p in &all {
        for k in 0..2 {
            let v = exact::to_f64(&p[k]);
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    for k in 0..2 {
        lo[k] = lo[k].floor() - 0.5;
        hi[k] = hi[k].ceil() + 0.5;
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let f = Frame {
        lo,
        scale: (SIZE - 2.0 * MARGIN) / span,
    };
    let (x0, x1) = (MARGIN, MARGIN + span * f.scale);
    let (y0, y1) = (SIZE - MARGIN - span * f.scale, SIZE - MARGIN);
    let zero = Rational::zero();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="#999"/>"##,
        f.y(&zero),
        f.y(&zero)
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y1:.2}" stroke="#999"/>"##,
        f.x(&zero),
        f.x(&zero)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">payoff {}</text>"#,
        x1 - 70.0,
        y1 + 30.0,
        game.player_name(0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">payoff {}</text>"#,
        x0 - 40.0,
        y0 - 12.0,
        game.player_name(1)
    );

    let region = ir_region(feasible, values);
    if region.len() >= 3 {
        let pts: Vec<String> = region.iter().map(|p| format!("{:.2},{:.2}", f.x(&p[0]), f.y(&p[1]))).collect();
        let _ = writeln!(
            s,
            r##"<polygon class="ir-region" data-points="{}" points="{}" fill="#dde8f5" stroke="#6b8fbf"/>"##,
            coords(&region),
            pts.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r##"<line class="ir-line" data-player="{}" data-value="{}" x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y1:.2}" stroke="#6b8fbf" stroke-dasharray="4 3"/>"##,
        game.player_name(0),
        exact::format_rational(&values[0]),
        f.x(&values[0]),
        f.x(&values[0])
    );
    let _ = writeln!(
        s,
        r##"<line class="ir-line" data-player="{}" data-value="{}" x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="#6b8fbf" stroke-dasharray="4 3"/>"##,
        game.player_name(1),
        exact::format_rational(&values[1]),
        f.y(&values[1]),
        f.y(&values[1])
    );

    for (e, h) in hulls {
        let pts: Vec<Vec<Rational>> = h.vertices.iter().map(|v| v.payoff.clone()).collect();
        let order: Vec<Vec<Rational>> = hull_2d(&pts).into_iter().map(|i| pts[i].clone()).collect();
        match order.len() {
            0 => {}
            1 => {
                let p = &order[0];
                let _ = writeln!(
                    s,
                    r##"<circle class="hull" data-epsilon="{e}" data-x="{}" data-y="{}" cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
                    exact::format_rational(&p[0]),
                    exact::format_rational(&p[1]),
                    f.x(&p[0]),
                    f.y(&p[1])
                );
            }
            2 => {
                let (a, b) = (&order[0], &order[1]);
                let _ = writeln!(
                    s,
                    r##"<line class="hull" data-epsilon="{e}" data-x1="{}" data-y1="{}" data-x2="{}" data-y2="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="3"/>"##,
                    exact::format_rational(&a[0]),
                    exact::format_rational(&a[1]),
                    exact::format_rational(&b[0]),
                    exact::format_rational(&b[1]),
                    f.x(&a[0]),
                    f.y(&a[1]),
                    f.x(&b[0]),
                    f.y(&b[1])
                );
            }
            _ => {
                let px: Vec<String> = order.iter().map(|p| format!("{:.2},{:.2}", f.x(&p[0]), f.y(&p[1]))).collect();
                let _ = writeln!(
                    s,
                    r##"<polygon class="hull" data-epsilon="{e}" data-points="{}" points="{}" fill="#c0392b" fill-opacity="0.3" stroke="#c0392b" stroke-width="2"/>"##,
                    coords(&order),
                    px.join(" ")
                );
            }
        }
    }

    let in_hull = |p: &Vec<Rational>| hulls.iter().any(|(_, h)| h.contains(p).unwrap_or(false));
    for p in &region {
        if feasible.iter().any(|q| &q.payoff == p) || in_hull(p) {
            continue;
        }
        let _ = writeln!(
            s,
            r##"<circle class="ir-vertex" data-x="{}" data-y="{}" cx="{:.2}" cy="{:.2}" r="3" fill="#6b8fbf"/>"##,
            exact::format_rational(&p[0]),
            exact::format_rational(&p[1]),
            f.x(&p[0]),
            f.y(&p[1])
        );
    }
    for p in feasible {
        let (x, y) = (exact::format_rational(&p.payoff[0]), exact::format_rational(&p.payoff[1]));
        let label = p.witness.play().map(|w| w.describe(game)).unwrap_or_else(|| "limit of plays".into());
        let _ = writeln!(
            s,
            r#"<circle class="feasible" data-x="{x}" data-y="{y}" cx="{:.2}" cy="{:.2}" r="4" fill="black"><title>({x}, {y}) {label}</title></circle>"#,
            f.x(&p.payoff[0]),
            f.y(&p.payoff[1])
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use blackwell_core::equilibrium::Witness;
    use blackwell_core::exact::int;

    fn point(x: i64, y: i64) -> PayoffPoint {
        PayoffPoint {
            payoff: vec![int(x), int(y)],
            witness: Witness::Closure,
        }
    }

    #[test]
    fn clipped_triangle() {
        let pts = [point(-1, 4), point(0, 0), point(1, 1), point(4, -1)];
        let region = ir_region(&pts, &[int(0), int(0)]);
        assert_eq!(region, vec![vec![int(0), int(0)], vec![int(3), int(0)], vec![int(0), int(3)]]);
    }

    #[test]
    fn clipping_a_segment() {
        let pts = [point(-1, 1), point(3, 1)];
        let region = ir_region(&pts, &[int(0), int(0)]);
        assert_eq!(region, vec![vec![int(0), int(1)], vec![int(3), int(1)]]);
    }
}
