//! Minimal static SVG line charts, emitted directly with no plotting
//! dependency. Charts are cosmetic: they never feed back into numeric
//! outputs.

pub struct RateChart<'a> {
    pub title: &'a str,
    /// `(n, -log(p_n) / n)` points of the empirical rate curve.
    pub points: Vec<(f64, f64)>,
    /// Optional horizontal reference (a variational bound).
    pub reference: Option<f64>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

pub fn render_rate_chart(chart: &RateChart) -> String {
    let mut xs: Vec<f64> = chart.points.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = chart.points.iter().map(|p| p.1).collect();
    if let Some(r) = chart.reference {
        ys.push(r);
    }
    if xs.is_empty() {
        xs.push(0.0);
        ys.push(0.0);
    }
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&ys);
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y_lo) / (y_hi - y_lo) * (H - 2.0 * MARGIN);

    let mut body = String::new();
    body.push_str(&format!(
        "<rect x='0' y='0' width='{W}' height='{H}' fill='white'/>\n\
         <text x='{}' y='24' font-family='monospace' font-size='14' text-anchor='middle'>{}</text>\n",
        W / 2.0,
        xml_escape(chart.title)
    ));
    // Axes.
    body.push_str(&format!(
        "<line x1='{m}' y1='{b}' x2='{r}' y2='{b}' stroke='black'/>\n\
         <line x1='{m}' y1='{t}' x2='{m}' y2='{b}' stroke='black'/>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    ));
    // Tick labels at the extremes.
    body.push_str(&format!(
        "<text x='{m}' y='{by}' font-family='monospace' font-size='11' text-anchor='middle'>{x_lo:.0}</text>\n\
         <text x='{r}' y='{by}' font-family='monospace' font-size='11' text-anchor='middle'>{x_hi:.0}</text>\n\
         <text x='{lx}' y='{b}' font-family='monospace' font-size='11' text-anchor='end'>{y_lo:.3}</text>\n\
         <text x='{lx}' y='{t}' font-family='monospace' font-size='11' text-anchor='end'>{y_hi:.3}</text>\n",
        m = MARGIN,
        r = W - MARGIN,
        by = H - MARGIN + 16.0,
        lx = MARGIN - 6.0,
        b = H - MARGIN + 4.0,
        t = MARGIN + 4.0
    ));
    if let Some(r) = chart.reference {
        let y = sy(r);
        body.push_str(&format!(
            "<line x1='{m}' y1='{y:.2}' x2='{x}' y2='{y:.2}' stroke='crimson' stroke-dasharray='6 4'/>\n\
             <text x='{x}' y='{ty:.2}' font-family='monospace' font-size='11' fill='crimson' text-anchor='end'>bound {r:.4}</text>\n",
            m = MARGIN,
            x = W - MARGIN,
            ty = y - 6.0
        ));
    }
    if !chart.points.is_empty() {
        let path: Vec<String> = chart
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        body.push_str(&format!(
            "<polyline points='{}' fill='none' stroke='steelblue' stroke-width='1.5'/>\n",
            path.join(" ")
        ));
        for (x, y) in &chart.points {
            body.push_str(&format!(
                "<circle cx='{:.2}' cy='{:.2}' r='3' fill='steelblue'/>\n",
                sx(*x),
                sy(*y)
            ));
        }
    }
    format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{W}' height='{H}' viewBox='0 0 {W} {H}'>\n{body}</svg>\n"
    )
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-12 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
