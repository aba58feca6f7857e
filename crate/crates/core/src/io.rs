//! On-disk formats.
//!
//! * Binary signals: a little-endian `u64` header holding `N`, followed by `N`
//!   interleaved `(re, im)` pairs of little-endian IEEE-754 doubles.
//! * CSV signals: one `re,im` pair per line, no header.
//! * Spectra: JSON `{"n": N, "coeffs": {"index": [re, im], ...}}`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result, Signal, SparseSpectrum, C64};

pub fn write_signal_binary<W: Write>(signal: &Signal, mut w: W) -> Result<()> {
    w.write_all(&(signal.len() as u64).to_le_bytes())?;
    for v in signal.samples() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_signal_binary<R: Read>(mut r: R) -> Result<Signal> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("binary header declares N = {n}")));
    }
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        samples.push(C64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::invalid("trailing bytes after the declared samples"));
    }
    Signal::new(samples)
}

pub fn write_signal_csv<W: Write>(signal: &Signal, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for v in signal.samples() {
        out.write_record([v.re.to_string(), v.im.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_signal_csv<R: Read>(r: R) -> Result<Signal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut samples = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::invalid(format!(
                "line {}: expected `re,im`, found {} fields",
                line + 1,
                rec.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::invalid(format!("line {}: {e}", line + 1)))
        };
        samples.push(C64::new(parse(&rec[0])?, parse(&rec[1])?));
    }
    Signal::new(samples)
}

/// Read a signal, choosing the format from the extension (`.csv` is CSV,
/// anything else binary).
pub fn load_signal(path: &Path) -> Result<Signal> {
    let file = BufReader::new(File::open(path)?);
    if has_extension(path, "csv") {
        read_signal_csv(file)
    } else {
        read_signal_binary(file)
    }
}

pub fn save_signal(signal: &Signal, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    if has_extension(path, "csv") {
        write_signal_csv(signal, file)
    } else {
        write_signal_binary(signal, file)
    }
}

pub fn load_spectrum(path: &Path) -> Result<SparseSpectrum> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn save_spectrum(spectrum: &SparseSpectrum, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, spectrum)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}
