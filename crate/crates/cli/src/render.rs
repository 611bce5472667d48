use checkmat::Matrix;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
    Ascii,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSpec {
    pub format: Format,
    pub gray_low: u8,
    pub gray_high: u8,
    /// Values mapped linearly onto `gray_low..=gray_high`.
    pub value_range: (f64, f64),
}

impl RenderSpec {
    pub fn new(format: Format, gray_low: u8, gray_high: u8, value_range: (f64, f64)) -> Result<Self, CliError> {
        if gray_low == gray_high {
            return Err(CliError::Usage("gray levels must differ".into()));
        }
        let (lo, hi) = value_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::Usage(format!("value range must satisfy lo < hi, got ({lo}, {hi})")));
        }
        Ok(RenderSpec {
            format,
            gray_low,
            gray_high,
            value_range,
        })
    }

    fn unit(&self, v: f64) -> f64 {
        let (lo, hi) = self.value_range;
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn gray(&self, v: f64) -> u8 {
        let (g0, g1) = (self.gray_low as f64, self.gray_high as f64);
        (g0 + self.unit(v) * (g1 - g0)).round().clamp(0.0, 255.0) as u8
    }

    pub fn render(&self, m: &Matrix) -> String {
        match self.format {
            Format::Csv => m.to_csv(),
            Format::Pgm => self.pgm(m),
            Format::Ascii => self.ascii(m),
        }
    }

    /// Plain (P2) PGM, maxval 255.
    pub fn pgm(&self, m: &Matrix) -> String {
        let mut out = format!("P2\n{} {}\n255\n", m.cols(), m.rows());
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|&v| self.gray(v).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn ascii(&self, m: &Matrix) -> String {
        const RAMP: [char; 5] = ['·', '░', '▒', '▓', '█'];
        let mut out = String::new();
        for i in 0..m.rows() {
            let row: Vec<String> = m
                .row(i)
                .iter()
                .map(|&v| {
                    let level = (self.unit(v) * (RAMP.len() - 1) as f64).round() as usize;
                    RAMP[level].to_string()
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// `(min, max)` of the entries, widened to `(v, v + 1)` for a constant matrix.
pub fn data_range(m: &Matrix) -> (f64, f64) {
    let s = m.as_slice();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}
