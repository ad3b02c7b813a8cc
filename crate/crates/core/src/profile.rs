//! EER profile grids: broad-inference p-value, confidence level, and the
//! replicability-power breakdown as functions of the EER, with CSV and
//! static SVG emitters. The grid is a view over the analytic modules;
//! crossing points are located by bisection on the analytic functions, so
//! grid resolution only affects plotting.

use std::io::Write;

use crate::broad::{bi_confidence_level, bi_p_value};
use crate::error::{domain, Result};
use crate::fmt::sig6;
use crate::model::{DesignSpec, EffectContext};
use crate::power::{relative_efficiency, replicability_power_exact};

/// One profile row at a single EER value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub omega: f64,
    pub bi_p_value: f64,
    pub bi_conf_level: f64,
    pub p_rep: f64,
    pub p_wrong_direction: f64,
    pub p_nonsig: f64,
    pub relative_efficiency: Option<f64>,
}

/// Profile of inferential quantities over a uniform EER grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileGrid {
    delta_star: f64,
    design: DesignSpec,
    rows: Vec<ProfileRow>,
}

/// Columns that can be plotted or scanned for threshold crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileColumn {
    BiPValue,
    BiConfLevel,
    PRep,
    PWrongDirection,
    PNonsig,
}

impl ProfileColumn {
    pub fn name(self) -> &'static str {
        match self {
            Self::BiPValue => "bi_p_value",
            Self::BiConfLevel => "bi_conf_level",
            Self::PRep => "p_rep",
            Self::PWrongDirection => "p_wrong_direction",
            Self::PNonsig => "p_nonsig",
        }
    }

    fn of(self, row: &ProfileRow) -> f64 {
        match self {
            Self::BiPValue => row.bi_p_value,
            Self::BiConfLevel => row.bi_conf_level,
            Self::PRep => row.p_rep,
            Self::PWrongDirection => row.p_wrong_direction,
            Self::PNonsig => row.p_nonsig,
        }
    }
}

fn row_at(delta_star: f64, design: &DesignSpec, omega: f64, re_power: Option<f64>) -> Result<ProfileRow> {
    let ctx = EffectContext::new(delta_star.abs(), omega)?;
    let breakdown = replicability_power_exact(&ctx, design)?;
    let re = match re_power {
        Some(power) => Some(relative_efficiency(&ctx, design.alpha(), power)?),
        None => None,
    };
    Ok(ProfileRow {
        omega,
        bi_p_value: bi_p_value(delta_star, design, omega)?,
        bi_conf_level: bi_confidence_level(design, omega)?,
        p_rep: breakdown.p_rep,
        p_wrong_direction: breakdown.p_wrong_direction,
        p_nonsig: breakdown.p_nonsig,
        relative_efficiency: re,
    })
}

/// Build a profile on a uniform EER grid over [0, omega_max].
pub fn build_profile(
    delta_star: f64,
    design: &DesignSpec,
    omega_max: f64,
    steps: usize,
) -> Result<ProfileGrid> {
    build_profile_with_efficiency(delta_star, design, omega_max, steps, None)
}

/// Same as [`build_profile`], optionally adding relative efficiency at the
/// given target power.
pub fn build_profile_with_efficiency(
    delta_star: f64,
    design: &DesignSpec,
    omega_max: f64,
    steps: usize,
    re_power: Option<f64>,
) -> Result<ProfileGrid> {
    if steps < 2 {
        return Err(domain(format!("profile needs at least 2 grid points, got {steps}")));
    }
    if !omega_max.is_finite() || omega_max <= 0.0 {
        return Err(domain(format!("omega_max must be positive, got {omega_max}")));
    }
    let rows = (0..steps)
        .map(|i| {
            let omega = omega_max * i as f64 / (steps - 1) as f64;
            row_at(delta_star, design, omega, re_power)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileGrid {
        delta_star,
        design: *design,
        rows,
    })
}

impl ProfileGrid {
    pub fn rows(&self) -> &[ProfileRow] {
        &self.rows
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    pub fn design(&self) -> &DesignSpec {
        self.design_ref()
    }

    fn design_ref(&self) -> &DesignSpec {
        &self.design
    }

    pub fn omega_max(&self) -> f64 {
        self.rows.last().map(|r| r.omega).unwrap_or(0.0)
    }

    /// EER at which `column` crosses `threshold`, located by bisection on
    /// the analytic function (not by interpolating grid rows). Returns
    /// None when there is no crossing in [0, omega_max].
    pub fn crossing_point(&self, column: ProfileColumn, threshold: f64) -> Result<Option<f64>> {
        let eval = |omega: f64| -> Result<f64> {
            Ok(column.of(&row_at(self.delta_star, &self.design, omega, None)?))
        };
        let mut lo = 0.0;
        let mut hi = self.omega_max();
        let f_lo = eval(lo)? - threshold;
        let f_hi = eval(hi)? - threshold;
        if f_lo == 0.0 {
            return Ok(Some(lo));
        }
        if f_hi == 0.0 {
            return Ok(Some(hi));
        }
        if f_lo.signum() == f_hi.signum() {
            return Ok(None);
        }
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if (eval(mid)? - threshold).signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }

    /// Write the grid as CSV with a fixed header and 6-significant-digit
    /// values; output bytes are identical across runs and platforms.
    pub fn emit_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "omega,bi_p_value,bi_conf_level,p_rep,p_wrong_direction,p_nonsig")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                sig6(r.omega),
                sig6(r.bi_p_value),
                sig6(r.bi_conf_level),
                sig6(r.p_rep),
                sig6(r.p_wrong_direction),
                sig6(r.p_nonsig)
            )?;
        }
        Ok(())
    }

    /// Render the selected columns as a standalone SVG line chart.
    pub fn emit_svg(&self, options: &SvgOptions, mut out: impl Write) -> Result<()> {
        options.validate()?;
        let svg = render_svg(self, options);
        out.write_all(svg.as_bytes())?;
        Ok(())
    }
}

/// Styling for [`ProfileGrid::emit_svg`]. The canvas is fixed at 800x500
/// units with 10% margins.
#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub title: String,
    pub columns: Vec<ProfileColumn>,
    /// Horizontal dotted reference lines (probability units, in [0, 1]).
    pub reference_lines: Vec<f64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            title: String::new(),
            columns: vec![ProfileColumn::BiPValue, ProfileColumn::BiConfLevel],
            reference_lines: Vec::new(),
        }
    }
}

impl SvgOptions {
    fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(domain("SVG options need at least one column to plot"));
        }
        for &r in &self.reference_lines {
            if !(0.0..=1.0).contains(&r) {
                return Err(domain(format!("reference line {r} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_X: f64 = WIDTH * 0.10;
const MARGIN_Y: f64 = HEIGHT * 0.10;

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

fn render_svg(grid: &ProfileGrid, options: &SvgOptions) -> String {
    let omega_max = grid.omega_max().max(f64::MIN_POSITIVE);
    let x = |omega: f64| MARGIN_X + (WIDTH - 2.0 * MARGIN_X) * omega / omega_max;
    let y = |p: f64| HEIGHT - MARGIN_Y - (HEIGHT - 2.0 * MARGIN_Y) * p.clamp(0.0, 1.0);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    if !options.title.is_empty() {
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"18\" font-family=\"sans-serif\">{}</text>\n",
            sig6(WIDTH / 2.0),
            sig6(MARGIN_Y * 0.6),
            xml_escape(&options.title)
        ));
    }
    // axes
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        sig6(MARGIN_X),
        sig6(HEIGHT - MARGIN_Y),
        sig6(WIDTH - MARGIN_X),
        sig6(HEIGHT - MARGIN_Y)
    ));
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        sig6(MARGIN_X),
        sig6(MARGIN_Y),
        sig6(MARGIN_X),
        sig6(HEIGHT - MARGIN_Y)
    ));
    // axis labels and ticks
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">EER (omega)</text>\n",
        sig6(WIDTH / 2.0),
        sig6(HEIGHT - MARGIN_Y * 0.2)
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" transform=\"rotate(-90 {} {})\">probability</text>\n",
        sig6(MARGIN_X * 0.3),
        sig6(HEIGHT / 2.0),
        sig6(MARGIN_X * 0.3),
        sig6(HEIGHT / 2.0)
    ));
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
            sig6(x(omega_max * f)),
            sig6(HEIGHT - MARGIN_Y * 0.55),
            sig6(omega_max * f)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
            sig6(MARGIN_X * 0.85),
            sig6(y(f) + 4.0),
            sig6(f)
        ));
    }
    for &r in &options.reference_lines {
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
            sig6(MARGIN_X),
            sig6(y(r)),
            sig6(WIDTH - MARGIN_X),
            sig6(y(r))
        ));
    }
    for (i, &col) in options.columns.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = grid
            .rows()
            .iter()
            .map(|row| format!("{},{}", sig6(x(row.omega)), sig6(y(col.of(row)))))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        // legend entry
        let ly = MARGIN_Y + 18.0 * i as f64;
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            sig6(WIDTH - MARGIN_X - 140.0),
            sig6(ly),
            sig6(WIDTH - MARGIN_X - 115.0),
            sig6(ly)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n",
            sig6(WIDTH - MARGIN_X - 108.0),
            sig6(ly + 4.0),
            col.name()
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
