use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use clap::ValueEnum;

use crate::error::Result;
use crate::scan::{ScanReport, ScanRow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn write_csv<W: Write>(rows: &[ScanRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ScanRow>> {
    let mut input = csv::Reader::from_reader(r);
    let rows = input.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(rows)
}

/// The JSON form carries the failure list next to the rows.
pub fn write_json<W: Write>(report: &ScanReport, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

pub fn write_report<W: Write>(report: &ScanReport, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(&report.rows, &mut w)?,
        Format::Json => {
            write_json(report, &mut w)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn write_report_file(report: &ScanReport, format: Format, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_report(report, format, &mut w)?;
    w.flush()?;
    Ok(())
}
