//! Output artifacts: JSON reports, CSV tables with a `#` header of resolved
//! parameters, and SVG fringe plots. Floats are written in scientific
//! notation with 17 significant digits so reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ramsey::FringePoint;

/// `x` as a 17-significant-digit scientific string.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON object (insertion-ordered) whose floats keep their fixed formatting.
#[derive(Clone, Debug, Default)]
pub struct Record {
    map: Map<String, Value>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a float; non-finite values are an error.
    pub fn num(&mut self, key: &str, x: f64) -> Result<&mut Self> {
        self.map.insert(key.into(), float_value(key, x)?);
        Ok(self)
    }

    pub fn int(&mut self, key: &str, n: u64) -> &mut Self {
        self.map.insert(key.into(), Value::from(n));
        self
    }

    pub fn text(&mut self, key: &str, s: &str) -> &mut Self {
        self.map.insert(key.into(), Value::from(s));
        self
    }

    pub fn flag(&mut self, key: &str, b: bool) -> &mut Self {
        self.map.insert(key.into(), Value::from(b));
        self
    }

    pub fn texts(&mut self, key: &str, items: &[String]) -> &mut Self {
        self.map
            .insert(key.into(), Value::Array(items.iter().map(|s| Value::from(s.as_str())).collect()));
        self
    }

    pub fn nums(&mut self, key: &str, xs: &[f64]) -> Result<&mut Self> {
        let v = xs
            .iter()
            .map(|&x| float_value(key, x))
            .collect::<Result<Vec<_>>>()?;
        self.map.insert(key.into(), Value::Array(v));
        Ok(self)
    }

    pub fn child(&mut self, key: &str, r: Record) -> &mut Self {
        self.map.insert(key.into(), Value::Object(r.map));
        self
    }

    pub fn children(&mut self, key: &str, rs: Vec<Record>) -> &mut Self {
        self.map
            .insert(key.into(), Value::Array(rs.into_iter().map(|r| Value::Object(r.map)).collect()));
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.map)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.map).expect("plain JSON values");
        s.push('\n');
        s
    }
}

fn float_value(key: &str, x: f64) -> Result<Value> {
    if !x.is_finite() {
        return Err(Error::InvalidState(format!("report field {key} is not finite ({x})")));
    }
    let n: Number = sci(x).parse().expect("formatted float parses as JSON number");
    Ok(Value::Number(n))
}

/// Resolved parameters as a report section, in angular units plus the
/// linear-MHz copy when the config is in MHz.
pub fn params_record(cfg: &RunConfig) -> Result<Record> {
    let p = &cfg.params;
    let mut r = Record::new();
    r.text("config", &cfg.name).text("units", cfg.units.label());
    for (k, v) in [
        ("g", p.g),
        ("delta", p.delta),
        ("omega1", p.omega1),
        ("omega2", p.omega2),
        ("kappa", p.kappa),
        ("gamma_e", p.gamma),
        ("phi_dot", cfg.phi_dot),
    ] {
        r.num(k, v)?;
        if cfg.units == crate::config::Units::MHz {
            r.num(&format!("{k}_mhz"), cfg.to_config_units(v))?;
        }
    }
    r.num("phi1", p.phi1)?
        .num("phi2", p.phi2)?
        .num("theta", cfg.theta)?
        .int("cycles", u64::from(cfg.cycles));
    Ok(r)
}

/// `key = value` lines for the CSV header.
pub fn params_header(cfg: &RunConfig) -> Result<Vec<String>> {
    let rec = params_record(cfg)?;
    Ok(rec
        .map
        .iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k} = {s}"),
            other => format!("{k} = {other}"),
        })
        .collect())
}

/// CSV text with `#`-prefixed header lines followed by the table.
pub fn csv_table(header: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    for line in header {
        writeln!(out, "# {line}").expect("string write");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// P_g against θ: the analytic fringe as a polyline, numeric points as dots.
pub fn fringe_svg(points: &[FringePoint], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let x = |theta: f64| M + (W - 2.0 * M) * theta / std::f64::consts::PI;
    let y = |p: f64| H - M - (H - 2.0 * M) * p;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{M} {M} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    for (p, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"#,
            M - 6.0,
            y(p) + 4.0
        );
    }
    for (t, label) in [(0.0, "0"), (0.5, "π/2"), (1.0, "π")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"#,
            x(t * std::f64::consts::PI),
            H - M + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">θ</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">P_g</text>"#,
        H / 2.0,
        H / 2.0
    );
    let line: Vec<String> = points
        .iter()
        .map(|p| format!("{:.3},{:.3}", x(p.theta), y(p.p_g_analytic)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        line.join(" ")
    );
    for p in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="crimson"/>"#,
            x(p.theta),
            y(p.p_g_numeric)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(sci(0.1), "1.0000000000000001e-1");
        assert_eq!(sci(-2.0), "-2.0000000000000000e0");
        let mut r = Record::new();
        r.num("x", 0.1).unwrap().text("s", "a");
        assert!(r.to_json().contains("\"x\": 1.0000000000000001e-1"));
        assert!(r.num("bad", f64::NAN).is_err());
    }

    #[test]
    fn csv_has_comment_header() {
        let out = csv_table(
            &["units = MHz".into()],
            &["a", "b"],
            &[vec!["1".into(), "2".into()]],
        )
        .unwrap();
        assert_eq!(out, "# units = MHz\na,b\n1,2\n");
    }

    #[test]
    fn svg_is_wellformed_enough() {
        let pts = [FringePoint {
            theta: 1.0,
            p_g_numeric: 0.3,
            p_g_analytic: 0.31,
            p_sum: 1.0,
        }];
        let s = fringe_svg(&pts, "a<b");
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("<polyline") && s.contains("<circle") && s.contains("a&lt;b"));
    }
}
