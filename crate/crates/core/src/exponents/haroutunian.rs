use crate::channel::{capacity, row_divergence, Channel};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest grid accepted by [`haroutunian_oracle`].
pub const HAROUTUNIAN_MAX_GRID: usize = 200;

/// Brute-force Haroutunian exponent for binary-input channels with at most
/// three outputs: the smallest `max_r D(G || P | r)` over channels `G` whose
/// rows lie on a uniform simplex grid with `grid_steps` steps and whose
/// capacity is strictly below `rate`.
///
/// The divergence is linear in `r`, so the max over `r` is the larger of the
/// two row divergences. Meant as a test oracle for small instances.
pub fn haroutunian_oracle<T: Real>(p: &Channel<T>, rate: T, grid_steps: usize) -> Result<T> {
    if p.inputs() != 2 || p.outputs() > 3 {
        return Err(Error::UnsupportedAlphabet { inputs: p.inputs(), outputs: p.outputs() });
    }
    if grid_steps == 0 || grid_steps > HAROUTUNIAN_MAX_GRID {
        return Err(Error::OutOfRange { what: "grid_steps", value: grid_steps as f64, range: "[1, 200]" });
    }
    if !(rate > T::zero()) {
        return Err(Error::NonPositiveRate(rate.to_f64_lossy()));
    }
    if capacity(p).value <= rate {
        return Ok(T::zero());
    }

    let rows = grid_rows::<T>(p.outputs(), grid_steps);
    let scored = |x: usize| -> Vec<(T, usize)> {
        let mut v: Vec<(T, usize)> = rows
            .iter()
            .enumerate()
            .map(|(i, g)| (row_divergence(g, p.row(x)), i))
            .filter(|(d, _)| d.is_finite())
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    };
    let (first, second) = (scored(0), scored(1));

    let mut best = T::infinity();
    for &(d0, i) in &first {
        if d0 >= best {
            break;
        }
        for &(d1, j) in &second {
            if d1 >= best {
                break;
            }
            let g = Channel::new(vec![rows[i].clone(), rows[j].clone()])?;
            if capacity(&g).value < rate {
                best = d0.max(d1);
                break;
            }
        }
    }
    Ok(best)
}

fn grid_rows<T: Real>(outputs: usize, steps: usize) -> Vec<Vec<T>> {
    let n = T::lit(steps as f64);
    let mut out = Vec::new();
    match outputs {
        2 => {
            for a in 0..=steps {
                out.push(vec![T::lit(a as f64) / n, T::lit((steps - a) as f64) / n]);
            }
        }
        _ => {
            for a in 0..=steps {
                for b in 0..=(steps - a) {
                    let c = steps - a - b;
                    out.push(vec![T::lit(a as f64) / n, T::lit(b as f64) / n, T::lit(c as f64) / n]);
                }
            }
        }
    }
    out
}
