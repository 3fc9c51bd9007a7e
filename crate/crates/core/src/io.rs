use std::fs::File;
use std::path::Path;

use crate::error::{GciError, Result};

pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| GciError::io(path, e))?;
    Ok(csv::Reader::from_reader(f))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| GciError::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}
