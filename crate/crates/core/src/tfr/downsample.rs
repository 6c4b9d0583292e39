use super::{Tfr, TfrError};
use ndarray::Array2;

/// `round(factor · samples)`, the side of the square output.
pub fn output_side(factor: f64, samples: usize) -> usize {
    (factor * samples as f64).round() as usize
}

/// Start offsets of `parts` contiguous, non-empty blocks covering `0..len`.
fn block_edges(len: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|i| i * len / parts).collect()
}

/// Block-averages every channel to `M × M` with `M = round(factor · rows)`.
/// A factor of one returns the input unchanged.
pub fn downsample_tfr(tfr: &Tfr, factor: f64) -> Result<Tfr, TfrError> {
    if factor == 1.0 {
        return Ok(tfr.clone());
    }
    let (rows, cols) = tfr.shape();
    let side = output_side(factor, rows);
    if !(factor > 0.0 && factor < 1.0) || side < 2 || side > rows || side > cols {
        return Err(TfrError::FactorTooSmall { factor, side });
    }
    let row_edges = block_edges(rows, side);
    let col_edges = block_edges(cols, side);
    let values = tfr
        .values
        .iter()
        .map(|m| {
            if m.dim() != (rows, cols) {
                return Err(TfrError::ShapeMismatch);
            }
            Ok(Array2::from_shape_fn((side, side), |(i, j)| {
                let block = m.slice(ndarray::s![
                    row_edges[i]..row_edges[i + 1],
                    col_edges[j]..col_edges[j + 1]
                ]);
                block.sum() / block.len() as f64
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Tfr {
        values,
        time_step_s: tfr.time_step_s * rows as f64 / side as f64,
        freq_step_hz: tfr.freq_step_hz * cols as f64 / side as f64,
    })
}
