//! A minimal H x W x C tensor and the space-to-depth slicing transform used
//! at the detector input.

use serde::{Deserialize, Serialize};

use super::DistillError;

/// Dense H x W x C array in row-major layout: element `(h, w, c)` lives at
/// `(h * width + w) * channels + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, DistillError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(DistillError::InvalidTensor(format!(
                "dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(DistillError::InvalidTensor(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self, DistillError> {
        Self::new(height, width, channels, vec![0.0; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, h: usize, w: usize, c: usize) -> usize {
        (h * self.width + w) * self.channels + c
    }

    pub fn get(&self, h: usize, w: usize, c: usize) -> f64 {
        self.data[self.idx(h, w, c)]
    }

    pub fn set(&mut self, h: usize, w: usize, c: usize, value: f64) {
        let i = self.idx(h, w, c);
        self.data[i] = value;
    }
}

/// Block offsets in output-channel order: even-row/even-col,
/// odd-row/even-col, even-row/odd-col, odd-row/odd-col.
const BLOCK_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Space-to-depth slicing: an H x W x C map becomes H/2 x W/2 x 4C by
/// gathering the four spatial parities into channel blocks.
///
/// Block order is (even-row/even-col, odd-row/even-col, even-row/odd-col,
/// odd-row/odd-col), each block preserving the original channel order. The
/// rearrangement is bijective; [`focus_unslice`] inverts it exactly.
pub fn focus_slice(input: &Tensor3) -> Result<Tensor3, DistillError> {
    if input.height % 2 != 0 || input.width % 2 != 0 {
        return Err(DistillError::OddSpatialDims {
            height: input.height,
            width: input.width,
        });
    }
    let (oh, ow, c) = (input.height / 2, input.width / 2, input.channels);
    let mut out = Tensor3::zeros(oh, ow, 4 * c)?;
    for i in 0..oh {
        for j in 0..ow {
            for (k, &(di, dj)) in BLOCK_OFFSETS.iter().enumerate() {
                for ch in 0..c {
                    let v = input.get(2 * i + di, 2 * j + dj, ch);
                    out.set(i, j, k * c + ch, v);
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`focus_slice`]: H x W x C (C divisible by 4) back to
/// 2H x 2W x C/4.
pub fn focus_unslice(input: &Tensor3) -> Result<Tensor3, DistillError> {
    if input.channels % 4 != 0 {
        return Err(DistillError::ChannelsNotDivisible(input.channels));
    }
    let c = input.channels / 4;
    let mut out = Tensor3::zeros(2 * input.height, 2 * input.width, c)?;
    for i in 0..input.height {
        for j in 0..input.width {
            for (k, &(di, dj)) in BLOCK_OFFSETS.iter().enumerate() {
                for ch in 0..c {
                    let v = input.get(i, j, k * c + ch);
                    out.set(2 * i + di, 2 * j + dj, ch, v);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_checks_shape() {
        assert!(Tensor3::new(0, 2, 2, vec![]).is_err());
        assert!(Tensor3::new(2, 2, 2, vec![0.0; 7]).is_err());
        assert!(Tensor3::new(2, 2, 2, vec![0.0; 8]).is_ok());
    }

    #[test]
    fn four_by_four_by_three_slices_to_two_by_two_by_twelve() {
        let t = Tensor3::zeros(4, 4, 3).unwrap();
        let s = focus_slice(&t).unwrap();
        assert_eq!(s.shape(), (2, 2, 12));
    }

    #[test]
    fn two_by_two_single_channel_block_order() {
        // [[1, 2], [3, 4]] -> (ee, oe, eo, oo) = (1, 3, 2, 4)
        let t = Tensor3::new(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = focus_slice(&t).unwrap();
        assert_eq!(s.shape(), (1, 1, 4));
        assert_eq!(s.data(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn odd_dimensions_rejected() {
        let t = Tensor3::zeros(3, 4, 1).unwrap();
        assert!(matches!(
            focus_slice(&t),
            Err(DistillError::OddSpatialDims { .. })
        ));
        let t = Tensor3::zeros(4, 5, 1).unwrap();
        assert!(focus_slice(&t).is_err());
    }

    #[test]
    fn unslice_inverts_slice() {
        let data: Vec<f64> = (0..4 * 6 * 3).map(|i| i as f64 * 0.5 - 7.0).collect();
        let t = Tensor3::new(4, 6, 3, data).unwrap();
        let round = focus_unslice(&focus_slice(&t).unwrap()).unwrap();
        assert_eq!(round, t);
    }

    #[test]
    fn unslice_rejects_bad_channel_count() {
        let t = Tensor3::zeros(2, 2, 6).unwrap();
        assert_eq!(
            focus_unslice(&t),
            Err(DistillError::ChannelsNotDivisible(6))
        );
    }
}
