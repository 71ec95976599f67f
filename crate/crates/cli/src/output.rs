use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Writes data files into one directory and remembers their names.
pub struct Writer {
    dir: PathBuf,
    pub files: Vec<String>,
}

/// 17 significant digits, '.' decimal.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>, CliError> {
        let path = self.dir.join(name);
        let f = fs::File::create(&path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn csv<I>(&mut self, name: &str, header: &[String], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut w = self.create(name)?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(num).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Occupation label such as `0011`, dot-separated once any entry exceeds 9.
pub fn occ_label(occ: impl IntoIterator<Item = usize>) -> String {
    let v: Vec<usize> = occ.into_iter().collect();
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    if v.iter().all(|&x| x < 10) {
        parts.concat()
    } else {
        parts.join(".")
    }
}
