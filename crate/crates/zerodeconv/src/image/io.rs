//! PGM (P2/P5) and CSV image files.
//!
//! CSV round-trips doubles losslessly (shortest round-trip formatting);
//! PGM rounds to the declared bit depth, choosing 8-bit when every rounded
//! pixel fits and 16-bit otherwise. All writes go through a temp file and
//! rename so readers never observe a partial file.

use super::Image;
use crate::error::Error;
use crate::Result;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Csv,
}

impl ImageFormat {
    /// Picks a format from the file extension (`.pgm`/`.pnm` vs `.csv`).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("pgm") | Some("pnm") => Ok(Self::Pgm),
            Some("csv") => Ok(Self::Csv),
            other => Err(Error::Unsupported(format!(
                "cannot infer image format from extension {other:?}; use .pgm or .csv"
            ))),
        }
    }
}

/// Reads a PGM (P2 or P5, 8- or 16-bit) or CSV image.
pub fn read_image(path: &Path, format: ImageFormat) -> Result<Image> {
    let bytes = fs::read(path)?;
    match format {
        ImageFormat::Pgm => parse_pgm(&bytes),
        ImageFormat::Csv => parse_csv(&bytes),
    }
}

/// Writes an image as binary PGM (P5) or CSV, atomically.
pub fn write_image(img: &Image, path: &Path, format: ImageFormat) -> Result<()> {
    let bytes = match format {
        ImageFormat::Pgm => encode_pgm(img),
        ImageFormat::Csv => encode_csv(img),
    };
    write_atomic(path, &bytes)
}

/// Writes bytes to a temp file in the target directory, then renames it
/// over the destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Malformed(format!("not a file path: {}", path.display())))?;
    let mut tmp = dir.map(|d| d.to_path_buf()).unwrap_or_default();
    tmp.push(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}

fn encode_pgm(img: &Image) -> Vec<u8> {
    let rounded: Vec<f64> = (0..img.rows())
        .flat_map(|x| (0..img.cols()).map(move |y| img.get(x, y).round().max(0.0)))
        .collect();
    let max = rounded.iter().copied().fold(0.0f64, f64::max);
    let maxval: u32 = if max <= 255.0 { 255 } else { 65535 };
    let mut out = format!("P5\n{} {}\n{}\n", img.cols(), img.rows(), maxval).into_bytes();
    for px in rounded {
        let v = px.min(maxval as f64) as u32;
        if maxval > 255 {
            out.push((v >> 8) as u8);
            out.push((v & 0xFF) as u8);
        } else {
            out.push(v as u8);
        }
    }
    out
}

fn encode_csv(img: &Image) -> Vec<u8> {
    let mut out = String::new();
    for x in 0..img.rows() {
        for y in 0..img.cols() {
            if y > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", img.get(x, y)));
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn parse_csv(bytes: &[u8]) -> Result<Image> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Malformed("CSV image is not valid UTF-8".into()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Malformed(format!("CSV line {}: bad number {cell:?}", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Image::from_rows(rows)
}

fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)
        .ok_or_else(|| Error::Malformed("PGM: missing magic number".into()))?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => {
            return Err(Error::Malformed(format!(
                "PGM: unsupported magic {other:?} (need P2 or P5)"
            )))
        }
    };
    let cols = next_usize(bytes, &mut pos, "width")?;
    let rows = next_usize(bytes, &mut pos, "height")?;
    let maxval = next_usize(bytes, &mut pos, "maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(Error::Malformed(format!("PGM: maxval {maxval} out of range")));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Malformed("PGM: zero dimension".into()));
    }
    let count = rows * cols;
    let mut data = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Malformed("PGM: missing raster separator".into()));
        }
        pos += 1;
        let wide = maxval > 255;
        let needed = count * if wide { 2 } else { 1 };
        if bytes.len() < pos + needed {
            return Err(Error::Malformed(format!(
                "PGM: raster truncated ({} bytes, need {needed})",
                bytes.len() - pos
            )));
        }
        for i in 0..count {
            let v = if wide {
                u32::from(bytes[pos + 2 * i]) << 8 | u32::from(bytes[pos + 2 * i + 1])
            } else {
                u32::from(bytes[pos + i])
            };
            data.push(v as f64);
        }
    } else {
        for _ in 0..count {
            let v = next_usize(bytes, &mut pos, "pixel")?;
            data.push(v as f64);
        }
    }
    Image::from_rows(
        data.chunks(cols)
            .map(|chunk| chunk.to_vec())
            .collect::<Vec<_>>(),
    )
}

/// Next whitespace-delimited token, skipping `#` comments to end of line.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn next_usize(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)
        .ok_or_else(|| Error::Malformed(format!("PGM: missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| Error::Malformed(format!("PGM: bad {what} {tok:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("zerodeconv-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let img = Image::from_rows(vec![
            vec![0.1, -2.5, 3.0e-7],
            vec![123456.789, 0.0, -1.0 / 3.0],
        ])
        .unwrap();
        let path = tmp_dir().join("round.csv");
        write_image(&img, &path, ImageFormat::Csv).unwrap();
        let back = read_image(&path, ImageFormat::Csv).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn csv_shape_parses() {
        let img = parse_csv(b"1,2\n3,4\n5,6\n").unwrap();
        assert_eq!((img.rows(), img.cols()), (3, 2));
        assert_eq!(img.get(2, 1), 6.0);
    }

    #[test]
    fn non_rectangular_csv_rejected() {
        assert!(matches!(parse_csv(b"1,2\n3\n"), Err(Error::Malformed(_))));
    }

    #[test]
    fn pgm_ascii_and_binary_agree() {
        let p2 = b"P2\n# a comment\n3 2\n255\n0 10 20\n30 40 255\n";
        let ascii = parse_pgm(p2).unwrap();
        let p5 = b"P5\n3 2\n255\n\x00\x0A\x14\x1E\x28\xFF";
        let binary = parse_pgm(p5).unwrap();
        assert_eq!(ascii, binary);
        assert_eq!((ascii.rows(), ascii.cols()), (2, 3));
        assert_eq!(ascii.get(1, 2), 255.0);
    }

    #[test]
    fn sixteen_bit_pgm_round_trips() {
        let img = Image::from_rows(vec![vec![0.0, 300.0], vec![65535.0, 12345.0]]).unwrap();
        let path = tmp_dir().join("wide.pgm");
        write_image(&img, &path, ImageFormat::Pgm).unwrap();
        let back = read_image(&path, ImageFormat::Pgm).unwrap();
        assert_eq!(img, back);
        // Header declares 16-bit depth and cols-before-rows.
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n65535\n"));
    }

    #[test]
    fn eight_bit_pgm_rounds_and_clamps() {
        let img = Image::from_rows(vec![vec![-3.0, 4.6, 254.5]]).unwrap();
        let path = tmp_dir().join("narrow.pgm");
        write_image(&img, &path, ImageFormat::Pgm).unwrap();
        let back = read_image(&path, ImageFormat::Pgm).unwrap();
        assert_eq!(back, Image::from_rows(vec![vec![0.0, 5.0, 255.0]]).unwrap());
    }

    #[test]
    fn truncated_pgm_rejected() {
        assert!(matches!(
            parse_pgm(b"P5\n4 4\n255\n\x00\x01"),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(parse_pgm(b"P6\n1 1\n255\n\x00"), Err(Error::Malformed(_))));
    }
}
