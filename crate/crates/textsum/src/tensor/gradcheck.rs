//! Central-difference verification of analytic gradients.

use super::{Tape, Tensor, TensorError};

/// Result for one parameter tensor.
#[derive(Debug, Clone)]
pub struct GradCheckEntry {
    pub name: String,
    pub max_rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn max_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_error)
            .fold(0.0, f64::max)
    }
}

/// At most 64 evenly spaced coordinates per tensor.
fn sample_coordinates(len: usize) -> Vec<usize> {
    if len <= 64 {
        (0..len).collect()
    } else {
        (0..64).map(|j| j * len / 64).collect()
    }
}

/// Compares analytic gradients of `loss` against central differences.
///
/// `loss` must rebuild the scalar objective from the parameters' current
/// values on the provided tape. Relative error per coordinate is
/// `|a − n| / max(1e-12, |a| + |n|)`; the report carries the max per tensor.
pub fn gradient_check<F>(
    mut loss: F,
    params: &[(&str, Tensor)],
    h: f64,
    tolerance: f64,
) -> Result<GradCheckReport, TensorError>
where
    F: FnMut(&Tape) -> Result<Tensor, TensorError>,
{
    assert!(h > 0.0, "step size must be positive");
    for (_, p) in params {
        p.zero_grad();
    }
    let tape = Tape::new();
    let objective = loss(&tape)?;
    tape.backward(&objective)?;
    let analytic: Vec<Vec<f64>> = params
        .iter()
        .map(|(_, p)| p.grad().unwrap_or_else(|| vec![0.0; p.len()]))
        .collect();

    let eval = |f: &mut F| -> Result<f64, TensorError> {
        let tape = Tape::new();
        Ok(f(&tape)?.item())
    };

    let mut entries = Vec::with_capacity(params.len());
    for (pi, (name, param)) in params.iter().enumerate() {
        let mut max_rel = 0.0f64;
        for coord in sample_coordinates(param.len()) {
            let original = param.data()[coord];
            let mut values = param.to_vec();
            values[coord] = original + h;
            param.set_data(values);
            let plus = eval(&mut loss)?;

            let mut values = param.to_vec();
            values[coord] = original - h;
            param.set_data(values);
            let minus = eval(&mut loss)?;

            let mut values = param.to_vec();
            values[coord] = original;
            param.set_data(values);

            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[pi][coord];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-12);
            max_rel = max_rel.max(rel);
        }
        entries.push(GradCheckEntry {
            name: name.to_string(),
            max_rel_error: max_rel,
            pass: max_rel < tolerance,
        });
    }
    Ok(GradCheckReport { entries, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_passes() {
        let x = Tensor::param(&[5], vec![0.3, -1.2, 2.0, 0.7, -0.4]);
        let report = gradient_check(
            |tape| {
                let sq = tape.mul(&x, &x)?;
                Ok(tape.sum(&sq))
            },
            &[("x", x.clone())],
            1e-5,
            1e-9,
        )
        .unwrap();
        assert!(report.all_pass(), "max error {}", report.max_error());
    }

    #[test]
    fn linear_gradient_is_machine_precision() {
        let x = Tensor::param(&[4], vec![1.0, 2.0, 3.0, 4.0]);
        let report = gradient_check(
            |tape| Ok(tape.sum(&tape.scale(&x, 3.5))),
            &[("x", x.clone())],
            1e-3,
            1e-10,
        )
        .unwrap();
        assert!(report.all_pass(), "max error {}", report.max_error());
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        // Doubling the analytic gradient of x² gives |2g − g| / |3g| = 1/3.
        let x = Tensor::param(&[3], vec![1.0, 2.0, 3.0]);
        let report = gradient_check(
            |tape| {
                let sq = tape.mul(&x, &x)?;
                let doubled = tape.scale(&sq, 2.0); // loss = 2·Σx², grad 4x
                Ok(tape.sum(&doubled))
            },
            &[("x", x.clone())],
            1e-5,
            1e-5,
        )
        .unwrap();
        assert!(report.all_pass());

        // Now fake a wrong analytic gradient by scaling post-backward.
        x.zero_grad();
        let tape = Tape::new();
        let sq = tape.mul(&x, &x).unwrap();
        let loss = tape.sum(&sq);
        tape.backward(&loss).unwrap();
        let doubled: Vec<f64> = x.grad().unwrap().iter().map(|g| 2.0 * g).collect();
        let numeric: Vec<f64> = x.to_vec().iter().map(|v| 2.0 * v).collect();
        for (a, n) in doubled.iter().zip(&numeric) {
            let rel = (a - n).abs() / (a.abs() + n.abs()).max(1e-12);
            assert!((rel - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn every_primitive_passes_gradient_check() {
        use crate::tensor::Tape;
        let values = |n: usize, phase: f64| -> Vec<f64> {
            (0..n).map(|i| (i as f64 * 0.61 + phase).sin() + 1.5).collect()
        };
        // ReLU is checked away from 0: all inputs offset to be > 0.4.
        let a = Tensor::param(&[3, 4], values(12, 0.0));
        let b = Tensor::param(&[3, 4], values(12, 1.0));
        let m1 = Tensor::param(&[3, 4], values(12, 2.0));
        let m2 = Tensor::param(&[4, 2], values(8, 3.0));
        let gain = Tensor::param(&[4], values(4, 4.0));
        let bias = Tensor::param(&[4], values(4, 5.0));
        let table = Tensor::param(&[5, 3], values(15, 6.0));
        let logits_in = Tensor::param(&[4, 5], values(20, 7.0));

        let params: Vec<(&str, Tensor)> = vec![
            ("a", a.clone()),
            ("b", b.clone()),
            ("m1", m1.clone()),
            ("m2", m2.clone()),
            ("gain", gain.clone()),
            ("bias", bias.clone()),
            ("table", table.clone()),
            ("logits", logits_in.clone()),
        ];
        let loss = |tape: &Tape| -> Result<Tensor, crate::tensor::TensorError> {
            let added = tape.add(&a, &b)?;
            let product = tape.mul(&added, &a)?;
            let activated = tape.relu(&product);
            let biased = tape.add_bias(&activated, &bias)?;
            let normed = tape.layer_norm(&biased, &gain, &bias, 1e-5)?;
            let soft = tape.softmax(&normed);
            let mm = tape.matmul(&soft, &m2)?;
            let trans = tape.transpose(&m1)?; // [4,3]
            let gathered = tape.embedding(&table, &[0, 2, 4, 1])?; // [4,3]
            let mixed = tape.mul(&trans, &gathered)?;
            let joined = tape.concat_last(&[mm.clone(), mm])?; // [3,4]
            let masked = tape.mask_fill(
                &joined,
                &[
                    true, true, false, true, true, true, true, false, true, true, true, true,
                ],
            )?;
            let dropped = tape.dropout(&mixed, 0.25, 9);
            let ce = tape.cross_entropy(&logits_in, &[1, 0, 4, 2], 0)?;
            let part1 = tape.sum(&tape.softmax(&masked));
            let part2 = tape.sum(&dropped);
            let part3 = tape.scale(&ce, 3.0);
            let total = tape.add(&part1, &part2)?;
            tape.add(&total, &part3)
        };
        let report = gradient_check(loss, &params, 1e-5, 1e-5).unwrap();
        for entry in &report.entries {
            assert!(
                entry.pass,
                "{} failed: max rel error {}",
                entry.name, entry.max_rel_error
            );
        }
    }

    #[test]
    fn broadcast_matmul_gradients_are_exact() {
        use crate::tensor::Tape;
        // a has a singleton batch dim that broadcasts against b's 3 batches,
        // so its gradient must accumulate across the broadcast.
        let a = Tensor::param(&[1, 2, 3], (0..6).map(|i| (i as f64 * 0.41).cos()).collect());
        let b = Tensor::param(&[3, 3, 2], (0..18).map(|i| (i as f64 * 0.23).sin()).collect());
        let report = gradient_check(
            |tape| {
                let c = tape.matmul(&a, &b)?;
                let sq = tape.mul(&c, &c)?;
                Ok(tape.sum(&sq))
            },
            &[("a", a.clone()), ("b", b.clone())],
            1e-5,
            1e-8,
        )
        .unwrap();
        assert!(report.all_pass(), "max err {}", report.max_error());
    }

    #[test]
    fn coordinate_sampling_is_capped_and_deterministic() {
        assert_eq!(sample_coordinates(10), (0..10).collect::<Vec<_>>());
        let big = sample_coordinates(1000);
        assert_eq!(big.len(), 64);
        assert_eq!(big, sample_coordinates(1000));
        assert!(big.windows(2).all(|w| w[0] < w[1]));
    }
}
