use crate::error::{Error, Result};

/// CSV text: a `# config-sha256=<hex>` comment line, the header row, then
/// the records.
pub(crate) fn render(fingerprint: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(|e| Error::domain(format!("csv: {e}")))?;
    let body = String::from_utf8(body).expect("csv output is utf-8");
    Ok(format!("# config-sha256={fingerprint}\n{body}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::domain(format!("csv: {e}"))
}

pub(crate) fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
