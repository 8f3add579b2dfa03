//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed nodes (1, 3, 5, 7)
const GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 2000;

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs: f64,
}

fn panel<F: FnMut(f64) -> Result<f64>>(f: &mut F, lo: f64, hi: f64) -> Result<Panel> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    let mut abs = 0.0;
    for (j, (&x, &wk)) in NODES.iter().zip(&KRONROD).enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &p in pts {
            let v = f(c + h * p)?;
            if !v.is_finite() {
                return Err(Error::QuadratureFailed { lo, hi });
            }
            kron += wk * v;
            abs += wk * v.abs();
            if j % 2 == 1 {
                gauss += GAUSS[j / 2] * v;
            }
        }
    }
    Ok(Panel {
        lo,
        hi,
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
        abs: abs * h.abs(),
    })
}

/// `∫_lo^hi f` to relative tolerance `rel_tol`, bisecting the panel with the
/// largest error estimate until the summed estimate is small enough.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let fail = Error::QuadratureFailed { lo, hi };
    let mut panels = vec![panel(&mut f, lo, hi).map_err(|_| fail.clone())?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let abs: f64 = panels.iter().map(|p| p.abs).sum();
        if error <= rel_tol * value.abs() || error <= 1e-15 * abs || abs == 0.0 {
            return Ok(value);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(fail);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            return Err(fail);
        }
        panels.push(panel(&mut f, p.lo, mid).map_err(|_| fail.clone())?);
        panels.push(panel(&mut f, mid, p.hi).map_err(|_| fail.clone())?);
    }
}
