use super::ImageFrame;
use crate::error::Result;

/// Mean squared error over every channel of every pixel.
pub fn mse(a: &ImageFrame, b: &ImageFrame) -> Result<f64> {
    a.same_geometry(b)?;
    let sum: f64 = a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.pixels().len() as f64)
}

/// `10 * log10(MAX^2 / MSE)` in dB; identical images give `f64::INFINITY`.
pub fn psnr(a: &ImageFrame, b: &ImageFrame) -> Result<f64> {
    let e = mse(a, b)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    let max = a.max_value();
    Ok(10.0 * (max * max / e).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_infinite() {
        let a = ImageFrame::from_u8(&[1, 2, 3, 4], 2, 2, 1).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ten_decibels() {
        let a = ImageFrame::from_u8(&[0; 10], 2, 5, 1).unwrap();
        let mut px = [0u8; 10];
        px[3] = 255;
        let b = ImageFrame::from_u8(&px, 2, 5, 1).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 6502.5);
        assert!((psnr(&a, &b).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let a = ImageFrame::from_u8(&[0; 4], 2, 2, 1).unwrap();
        let b = ImageFrame::from_u8(&[0; 4], 1, 4, 1).unwrap();
        assert!(psnr(&a, &b).is_err());
    }
}
