//! CSV output for [`MetricsRow`]s.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::runner::MetricsRow;
use super::HarnessError;

pub const HEADER: [&str; 8] = [
    "seed",
    "episode",
    "return",
    "policy_value",
    "regret",
    "cum_regret",
    "delay",
    "arrivals",
];

/// Six significant digits with trailing zeros kept (like `%#.6g`, minus the
/// dangling decimal point); exponent form outside `[1e-4, 1e6)`.
pub fn format_sig6(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        format!("{:.*}", (DIGITS - 1 - exp) as usize, x)
    }
}

pub fn write_metrics_to<W: Write>(rows: &[MetricsRow], out: W) -> Result<(), HarnessError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(HEADER)?;
    for r in rows {
        writer.write_record([
            r.seed.to_string(),
            r.episode.to_string(),
            format_sig6(r.realized_return),
            format_sig6(r.policy_value),
            format_sig6(r.regret),
            format_sig6(r.cum_regret),
            r.delay.to_string(),
            r.arrivals.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_metrics(rows: &[MetricsRow], path: &Path) -> Result<(), HarnessError> {
    write_metrics_to(rows, File::create(path)?)
}

pub fn read_metrics_from<R: Read>(input: R) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(HarnessError::Config(format!("unexpected header {header:?}")));
    }
    let parse_err = |field: &str, value: &str| {
        HarnessError::Config(format!("cannot parse {field} value {value:?}"))
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or_default();
        let float = |i: usize| get(i).parse::<f64>().map_err(|_| parse_err(HEADER[i], get(i)));
        rows.push(MetricsRow {
            seed: get(0).parse().map_err(|_| parse_err(HEADER[0], get(0)))?,
            episode: get(1).parse().map_err(|_| parse_err(HEADER[1], get(1)))?,
            realized_return: float(2)?,
            policy_value: float(3)?,
            regret: float(4)?,
            cum_regret: float(5)?,
            delay: get(6).parse().map_err(|_| parse_err(HEADER[6], get(6)))?,
            arrivals: get(7).parse().map_err(|_| parse_err(HEADER[7], get(7)))?,
        });
    }
    Ok(rows)
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
    read_metrics_from(File::open(path)?)
}
