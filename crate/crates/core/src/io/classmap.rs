//! Class maps as 8-bit RGB PNG images.

use std::io::Cursor;
use std::path::Path;

use super::format::write_atomic;
use crate::cube::LabelRaster;
use crate::error::{HsiError, Result};

pub type Rgb = [u8; 3];

/// Index 0 (unlabeled) is black; 16 class colors follow.
pub const DEFAULT_PALETTE: [Rgb; 17] = [
    [0, 0, 0],
    [0, 0, 255],
    [0, 255, 0],
    [255, 0, 0],
    [0, 255, 255],
    [255, 0, 255],
    [255, 255, 0],
    [128, 0, 128],
    [255, 128, 0],
    [0, 128, 128],
    [128, 128, 0],
    [128, 0, 0],
    [0, 128, 0],
    [0, 0, 128],
    [255, 128, 192],
    [192, 192, 192],
    [128, 64, 0],
];

fn png_err(e: impl std::fmt::Display) -> HsiError {
    HsiError::Io(std::io::Error::other(e.to_string()))
}

pub fn encode_class_map(labels: &LabelRaster, palette: &[Rgb]) -> Result<Vec<u8>> {
    let needed = labels.classes() as usize + 1;
    if palette.len() < needed {
        return Err(HsiError::config(format!(
            "palette has {} colors, {} classes need {needed}",
            palette.len(),
            labels.classes()
        )));
    }
    let dim = |v: usize| u32::try_from(v).map_err(|_| HsiError::shape(format!("image dimension {v} exceeds u32")));
    let pixels: Vec<u8> = labels
        .labels()
        .iter()
        .flat_map(|&l| palette[l as usize])
        .collect();
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, dim(labels.width())?, dim(labels.height())?);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(png_err)?;
    writer.write_image_data(&pixels).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(out)
}

pub fn render_class_map(labels: &LabelRaster, palette: &[Rgb], path: &Path) -> Result<()> {
    write_atomic(path, &encode_class_map(labels, palette)?)
}

/// Decodes an RGB PNG into `(height, width, pixels)`.
pub fn decode_rgb(bytes: &[u8]) -> Result<(usize, usize, Vec<Rgb>)> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| HsiError::format(0, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(HsiError::format(0, "expected an 8-bit RGB image"));
    }
    let pixels = buf[..info.buffer_size()]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok((info.height as usize, info.width as usize, pixels))
}

/// Inverts [`encode_class_map`] for an injective palette.
pub fn decode_class_map(bytes: &[u8], palette: &[Rgb], classes: u16) -> Result<LabelRaster> {
    let (h, w, pixels) = decode_rgb(bytes)?;
    let labels = pixels
        .iter()
        .map(|px| {
            palette[..=classes as usize]
                .iter()
                .position(|c| c == px)
                .map(|i| i as u16)
                .ok_or_else(|| HsiError::format(0, format!("color {px:?} is not in the palette")))
        })
        .collect::<Result<Vec<_>>>()?;
    LabelRaster::new(h, w, classes, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_is_injective() {
        for i in 0..DEFAULT_PALETTE.len() {
            for j in i + 1..DEFAULT_PALETTE.len() {
                assert_ne!(DEFAULT_PALETTE[i], DEFAULT_PALETTE[j]);
            }
        }
    }

    #[test]
    fn unlabeled_is_black() {
        let raster = LabelRaster::new(3, 4, 2, vec![0; 12]).unwrap();
        let (h, w, px) = decode_rgb(&encode_class_map(&raster, &DEFAULT_PALETTE).unwrap()).unwrap();
        assert_eq!((h, w), (3, 4));
        assert!(px.iter().all(|&p| p == [0, 0, 0]));
    }

    #[test]
    fn known_colors() {
        let raster = LabelRaster::new(2, 2, 2, vec![0, 1, 2, 1]).unwrap();
        let (_, _, px) = decode_rgb(&encode_class_map(&raster, &DEFAULT_PALETTE).unwrap()).unwrap();
        assert_eq!(px, vec![[0, 0, 0], [0, 0, 255], [0, 255, 0], [0, 0, 255]]);
    }

    #[test]
    fn roundtrip_and_small_palette() {
        let labels: Vec<u16> = (0..35).map(|i| (i * 7 % 17) as u16).collect();
        let raster = LabelRaster::new(5, 7, 16, labels).unwrap();
        let bytes = encode_class_map(&raster, &DEFAULT_PALETTE).unwrap();
        assert_eq!(decode_class_map(&bytes, &DEFAULT_PALETTE, 16).unwrap(), raster);
        assert!(matches!(
            encode_class_map(&raster, &DEFAULT_PALETTE[..16]),
            Err(HsiError::Config(_))
        ));
    }
}
