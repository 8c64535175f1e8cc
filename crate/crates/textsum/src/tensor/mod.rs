//! Dense f64 tensors with reverse-mode automatic differentiation.
//!
//! Values are stored row-major. Operations run through a [`Tape`] that
//! records one backward closure per op; [`Tape::backward`] replays them in
//! reverse, accumulating exact gradients into every tensor that requires
//! them, then clears itself. A tape and its tensors form a single-threaded
//! unit of work; independent model instances on separate threads are fine.
//!
//! Everything is deterministic: identical inputs and seeds produce
//! bitwise-identical values through any sequence of operations.

mod adam;
mod gradcheck;

pub use adam::{clip_global_norm, AdamState};
pub use gradcheck::{gradient_check, GradCheckEntry, GradCheckReport};

use std::cell::{Ref, RefCell};
use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("backward called on an empty tape")]
    TapeEmpty,
    #[error("cross-entropy saw only padding positions")]
    AllPadding,
    #[error("parameter {index} has no gradient")]
    MissingGrad { index: usize },
    #[error("id {id} out of range for table of {rows} rows")]
    IdOutOfRange { id: usize, rows: usize },
}

struct TensorInner {
    shape: Vec<usize>,
    data: RefCell<Vec<f64>>,
    requires_grad: bool,
    grad: RefCell<Option<Vec<f64>>>,
}

/// A shared handle to an n-dimensional array, optionally tracked for
/// gradients. Cloning is cheap and aliases the same storage.
#[derive(Clone)]
pub struct Tensor(Rc<TensorInner>);

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.0.shape)
            .field("requires_grad", &self.0.requires_grad)
            .finish()
    }
}

impl Tensor {
    fn new(shape: Vec<usize>, data: Vec<f64>, requires_grad: bool) -> Tensor {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "shape {shape:?} does not match {} elements",
            data.len()
        );
        let grad = if requires_grad {
            Some(vec![0.0; data.len()])
        } else {
            None
        };
        Tensor(Rc::new(TensorInner {
            shape,
            data: RefCell::new(data),
            requires_grad,
            grad: RefCell::new(grad),
        }))
    }

    /// A value that does not participate in gradient computation.
    pub fn constant(shape: &[usize], data: Vec<f64>) -> Tensor {
        Tensor::new(shape.to_vec(), data, false)
    }

    /// A trainable value; its gradient starts at zero.
    pub fn param(shape: &[usize], data: Vec<f64>) -> Tensor {
        Tensor::new(shape.to_vec(), data, true)
    }

    pub fn zeros(shape: &[usize]) -> Tensor {
        Tensor::constant(shape, vec![0.0; shape.iter().product()])
    }

    pub fn scalar(value: f64) -> Tensor {
        Tensor::constant(&[1], vec![value])
    }

    /// Result tensor of an op; gradients are tracked if any input needs them.
    fn result(shape: Vec<usize>, data: Vec<f64>, track: bool) -> Tensor {
        Tensor(Rc::new(TensorInner {
            shape,
            data: RefCell::new(data),
            requires_grad: track,
            grad: RefCell::new(None),
        }))
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn len(&self) -> usize {
        self.0.data.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad
    }

    pub fn data(&self) -> Ref<'_, Vec<f64>> {
        self.0.data.borrow()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.data.borrow().clone()
    }

    /// The single element of a scalar tensor.
    pub fn item(&self) -> f64 {
        let data = self.0.data.borrow();
        assert_eq!(data.len(), 1, "item() on non-scalar of shape {:?}", self.0.shape);
        data[0]
    }

    /// Replaces the stored values; the shape must be preserved.
    pub fn set_data(&self, values: Vec<f64>) {
        let mut data = self.0.data.borrow_mut();
        assert_eq!(data.len(), values.len(), "set_data length mismatch");
        *data = values;
    }

    /// Current gradient, if one has been allocated.
    pub fn grad(&self) -> Option<Vec<f64>> {
        self.0.grad.borrow().clone()
    }

    /// Overwrites the gradient buffer (used by clipping).
    pub fn set_grad(&self, values: Vec<f64>) {
        assert_eq!(values.len(), self.len(), "set_grad length mismatch");
        *self.0.grad.borrow_mut() = Some(values);
    }

    pub fn zero_grad(&self) {
        if let Some(g) = self.0.grad.borrow_mut().as_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        } else if self.0.requires_grad {
            *self.0.grad.borrow_mut() = Some(vec![0.0; self.len()]);
        }
    }

    /// Runs `f` over the (lazily allocated) gradient buffer.
    fn with_grad_mut(&self, f: impl FnOnce(&mut [f64])) {
        let mut grad = self.0.grad.borrow_mut();
        let slot = grad.get_or_insert_with(|| vec![0.0; self.0.data.borrow().len()]);
        f(slot);
    }

    /// Gradients flow into this tensor if it is a parameter or sits between
    /// parameters and the loss.
    fn tracked(&self) -> bool {
        self.0.requires_grad
    }
}

type BackwardFn = Box<dyn FnOnce()>;

/// Records operations for one forward pass so `backward` can replay them.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<BackwardFn>>,
}

fn shape_err(op: &'static str, lhs: &[usize], rhs: &[usize]) -> TensorError {
    TensorError::ShapeMismatch {
        op,
        lhs: lhs.to_vec(),
        rhs: rhs.to_vec(),
    }
}

/// Maps a flat index in the broadcast batch shape to a flat index in an
/// operand batch shape whose dims may be 1.
fn broadcast_offset(flat: usize, out_dims: &[usize], operand_dims: &[usize]) -> usize {
    let mut rem = flat;
    let mut offset = 0;
    let mut stride = 1;
    // Build operand strides right-to-left while decomposing `flat`.
    let mut offsets = vec![0usize; out_dims.len()];
    for (i, &d) in out_dims.iter().enumerate().rev() {
        offsets[i] = rem % d;
        rem /= d;
    }
    for i in (0..out_dims.len()).rev() {
        let idx = if operand_dims[i] == 1 { 0 } else { offsets[i] };
        offset += idx * stride;
        stride *= operand_dims[i];
    }
    offset
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.borrow().is_empty()
    }

    fn record(&self, f: impl FnOnce() + 'static) {
        self.nodes.borrow_mut().push(Box::new(f));
    }

    /// Wraps externally produced values as a non-tracked tensor.
    pub fn constant(&self, shape: &[usize], data: Vec<f64>) -> Tensor {
        Tensor::constant(shape, data)
    }

    /// Batched matrix product. Leading dimensions must match or be 1.
    pub fn matmul(&self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        let (ash, bsh) = (a.shape(), b.shape());
        if ash.len() < 2 || bsh.len() < 2 || ash.len() != bsh.len() {
            return Err(shape_err("matmul", ash, bsh));
        }
        let rank = ash.len();
        let (m, k) = (ash[rank - 2], ash[rank - 1]);
        let (k2, n) = (bsh[rank - 2], bsh[rank - 1]);
        if k != k2 {
            return Err(shape_err("matmul", ash, bsh));
        }
        let a_batch = &ash[..rank - 2];
        let b_batch = &bsh[..rank - 2];
        let mut out_batch = Vec::with_capacity(a_batch.len());
        for (&da, &db) in a_batch.iter().zip(b_batch) {
            if da == db || da == 1 || db == 1 {
                out_batch.push(da.max(db));
            } else {
                return Err(shape_err("matmul", ash, bsh));
            }
        }
        let batches: usize = out_batch.iter().product();

        let a_data = a.data();
        let b_data = b.data();
        let mut out = vec![0.0; batches * m * n];
        for bi in 0..batches {
            let ao = broadcast_offset(bi, &out_batch, a_batch) * m * k;
            let bo = broadcast_offset(bi, &out_batch, b_batch) * k * n;
            let co = bi * m * n;
            for i in 0..m {
                for p in 0..k {
                    let av = a_data[ao + i * k + p];
                    if av == 0.0 {
                        continue;
                    }
                    let brow = &b_data[bo + p * n..bo + p * n + n];
                    let crow = &mut out[co + i * n..co + i * n + n];
                    for (c, &bv) in crow.iter_mut().zip(brow) {
                        *c += av * bv;
                    }
                }
            }
        }
        drop(a_data);
        drop(b_data);

        let mut shape = out_batch.clone();
        shape.push(m);
        shape.push(n);
        let track = a.tracked() || b.tracked();
        let result = Tensor::result(shape, out, track);
        if track {
            let (a, b, out_t) = (a.clone(), b.clone(), result.clone());
            let (a_batch, b_batch) = (a_batch.to_vec(), b_batch.to_vec());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                let a_data = a.data();
                let b_data = b.data();
                if a.tracked() {
                    a.with_grad_mut(|ga| {
                        for bi in 0..batches {
                            let ao = broadcast_offset(bi, &out_batch, &a_batch) * m * k;
                            let bo = broadcast_offset(bi, &out_batch, &b_batch) * k * n;
                            let co = bi * m * n;
                            // dA = dC · Bᵀ
                            for i in 0..m {
                                for p in 0..k {
                                    let mut acc = 0.0;
                                    for j in 0..n {
                                        acc += gout[co + i * n + j] * b_data[bo + p * n + j];
                                    }
                                    ga[ao + i * k + p] += acc;
                                }
                            }
                        }
                    });
                }
                if b.tracked() {
                    b.with_grad_mut(|gb| {
                        for bi in 0..batches {
                            let ao = broadcast_offset(bi, &out_batch, &a_batch) * m * k;
                            let bo = broadcast_offset(bi, &out_batch, &b_batch) * k * n;
                            let co = bi * m * n;
                            // dB = Aᵀ · dC
                            for p in 0..k {
                                for j in 0..n {
                                    let mut acc = 0.0;
                                    for i in 0..m {
                                        acc += a_data[ao + i * k + p] * gout[co + i * n + j];
                                    }
                                    gb[bo + p * n + j] += acc;
                                }
                            }
                        }
                    });
                }
            });
        }
        Ok(result)
    }

    /// Elementwise sum of two same-shape tensors.
    pub fn add(&self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        if a.shape() != b.shape() {
            return Err(shape_err("add", a.shape(), b.shape()));
        }
        let out: Vec<f64> = a.data().iter().zip(b.data().iter()).map(|(x, y)| x + y).collect();
        let track = a.tracked() || b.tracked();
        let result = Tensor::result(a.shape().to_vec(), out, track);
        if track {
            let (a, b, out_t) = (a.clone(), b.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                for t in [&a, &b] {
                    if t.tracked() {
                        t.with_grad_mut(|g| {
                            for (gi, &go) in g.iter_mut().zip(gout.iter()) {
                                *gi += go;
                            }
                        });
                    }
                }
            });
        }
        Ok(result)
    }

    /// Adds a length-d bias vector to every row of `x`'s last axis.
    pub fn add_bias(&self, x: &Tensor, bias: &Tensor) -> Result<Tensor, TensorError> {
        let d = *x.shape().last().unwrap_or(&0);
        if bias.shape() != [d] {
            return Err(shape_err("add_bias", x.shape(), bias.shape()));
        }
        let b_data = bias.to_vec();
        let out: Vec<f64> = x
            .data()
            .iter()
            .enumerate()
            .map(|(i, v)| v + b_data[i % d])
            .collect();
        let track = x.tracked() || bias.tracked();
        let result = Tensor::result(x.shape().to_vec(), out, track);
        if track {
            let (x, bias, out_t) = (x.clone(), bias.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                if x.tracked() {
                    x.with_grad_mut(|g| {
                        for (gi, &go) in g.iter_mut().zip(gout.iter()) {
                            *gi += go;
                        }
                    });
                }
                if bias.tracked() {
                    bias.with_grad_mut(|g| {
                        for (i, &go) in gout.iter().enumerate() {
                            g[i % d] += go;
                        }
                    });
                }
            });
        }
        Ok(result)
    }

    /// Hadamard product of two same-shape tensors.
    pub fn mul(&self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        if a.shape() != b.shape() {
            return Err(shape_err("mul", a.shape(), b.shape()));
        }
        let out: Vec<f64> = a.data().iter().zip(b.data().iter()).map(|(x, y)| x * y).collect();
        let track = a.tracked() || b.tracked();
        let result = Tensor::result(a.shape().to_vec(), out, track);
        if track {
            let (a, b, out_t) = (a.clone(), b.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                if a.tracked() {
                    let b_data = b.data();
                    a.with_grad_mut(|g| {
                        for i in 0..g.len() {
                            g[i] += gout[i] * b_data[i];
                        }
                    });
                }
                if b.tracked() {
                    let a_data = a.data();
                    b.with_grad_mut(|g| {
                        for i in 0..g.len() {
                            g[i] += gout[i] * a_data[i];
                        }
                    });
                }
            });
        }
        Ok(result)
    }

    /// Multiplies every element by a constant.
    pub fn scale(&self, x: &Tensor, factor: f64) -> Tensor {
        let out: Vec<f64> = x.data().iter().map(|v| v * factor).collect();
        let track = x.tracked();
        let result = Tensor::result(x.shape().to_vec(), out, track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                x.with_grad_mut(|g| {
                    for (gi, &go) in g.iter_mut().zip(gout.iter()) {
                        *gi += factor * go;
                    }
                });
            });
        }
        result
    }

    /// Rectified linear unit.
    pub fn relu(&self, x: &Tensor) -> Tensor {
        let out: Vec<f64> = x.data().iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        let track = x.tracked();
        let result = Tensor::result(x.shape().to_vec(), out, track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                let x_data = x.data();
                x.with_grad_mut(|g| {
                    for i in 0..g.len() {
                        if x_data[i] > 0.0 {
                            g[i] += gout[i];
                        }
                    }
                });
            });
        }
        result
    }

    /// Swaps the last two axes.
    pub fn transpose(&self, x: &Tensor) -> Result<Tensor, TensorError> {
        let shape = x.shape();
        if shape.len() < 2 {
            return Err(shape_err("transpose", shape, &[]));
        }
        let rank = shape.len();
        let (r, c) = (shape[rank - 2], shape[rank - 1]);
        let batches: usize = shape[..rank - 2].iter().product();
        let x_data = x.data();
        let mut out = vec![0.0; x_data.len()];
        for bi in 0..batches {
            let o = bi * r * c;
            for i in 0..r {
                for j in 0..c {
                    out[o + j * r + i] = x_data[o + i * c + j];
                }
            }
        }
        drop(x_data);
        let mut out_shape = shape.to_vec();
        out_shape.swap(rank - 2, rank - 1);
        let track = x.tracked();
        let result = Tensor::result(out_shape, out, track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                x.with_grad_mut(|g| {
                    for bi in 0..batches {
                        let o = bi * r * c;
                        for i in 0..r {
                            for j in 0..c {
                                g[o + i * c + j] += gout[o + j * r + i];
                            }
                        }
                    }
                });
            });
        }
        Ok(result)
    }

    /// Reinterprets the data under a new shape with the same element count.
    pub fn reshape(&self, x: &Tensor, new_shape: &[usize]) -> Result<Tensor, TensorError> {
        if new_shape.iter().product::<usize>() != x.len() {
            return Err(shape_err("reshape", x.shape(), new_shape));
        }
        let track = x.tracked();
        let result = Tensor::result(new_shape.to_vec(), x.to_vec(), track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                x.with_grad_mut(|g| {
                    for (gi, &go) in g.iter_mut().zip(gout.iter()) {
                        *gi += go;
                    }
                });
            });
        }
        Ok(result)
    }

    /// Concatenates tensors along the last axis; all other dims must agree.
    pub fn concat_last(&self, parts: &[Tensor]) -> Result<Tensor, TensorError> {
        assert!(!parts.is_empty(), "concat_last needs at least one tensor");
        let first = parts[0].shape();
        let rank = first.len();
        let lead = &first[..rank - 1];
        let mut widths = Vec::with_capacity(parts.len());
        for p in parts {
            if p.shape().len() != rank || &p.shape()[..rank - 1] != lead {
                return Err(shape_err("concat_last", first, p.shape()));
            }
            widths.push(p.shape()[rank - 1]);
        }
        let rows: usize = lead.iter().product();
        let total_width: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(rows * total_width);
        {
            let datas: Vec<Ref<'_, Vec<f64>>> = parts.iter().map(|p| p.data()).collect();
            for row in 0..rows {
                for (p, data) in datas.iter().enumerate() {
                    let w = widths[p];
                    out.extend_from_slice(&data[row * w..(row + 1) * w]);
                }
            }
        }
        let mut shape = lead.to_vec();
        shape.push(total_width);
        let track = parts.iter().any(Tensor::tracked);
        let result = Tensor::result(shape, out, track);
        if track {
            let parts: Vec<Tensor> = parts.to_vec();
            let out_t = result.clone();
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                let mut col = 0;
                for (p, width) in parts.iter().zip(widths.iter().copied()) {
                    if p.tracked() {
                        p.with_grad_mut(|g| {
                            for row in 0..rows {
                                let src = row * total_width + col;
                                let dst = row * width;
                                for j in 0..width {
                                    g[dst + j] += gout[src + j];
                                }
                            }
                        });
                    }
                    col += width;
                }
            });
        }
        Ok(result)
    }

    /// Gathers rows of an embedding table; gradient scatter-adds back.
    pub fn embedding(&self, table: &Tensor, ids: &[usize]) -> Result<Tensor, TensorError> {
        let shape = table.shape();
        if shape.len() != 2 {
            return Err(shape_err("embedding", shape, &[]));
        }
        let (rows, d) = (shape[0], shape[1]);
        let mut out = Vec::with_capacity(ids.len() * d);
        {
            let data = table.data();
            for &id in ids {
                if id >= rows {
                    return Err(TensorError::IdOutOfRange { id, rows });
                }
                out.extend_from_slice(&data[id * d..(id + 1) * d]);
            }
        }
        let track = table.tracked();
        let result = Tensor::result(vec![ids.len(), d], out, track);
        if track {
            let (table, out_t) = (table.clone(), result.clone());
            let ids = ids.to_vec();
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                table.with_grad_mut(|g| {
                    for (t, &id) in ids.iter().enumerate() {
                        for j in 0..d {
                            g[id * d + j] += gout[t * d + j];
                        }
                    }
                });
            });
        }
        Ok(result)
    }

    /// Numerically stable softmax along the last axis.
    pub fn softmax(&self, x: &Tensor) -> Tensor {
        let d = *x.shape().last().expect("softmax needs at least rank 1");
        let x_data = x.data();
        let mut out = vec![0.0; x_data.len()];
        for slice in 0..x_data.len() / d {
            let row = &x_data[slice * d..(slice + 1) * d];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (j, &v) in row.iter().enumerate() {
                let e = (v - max).exp();
                out[slice * d + j] = e;
                total += e;
            }
            for j in 0..d {
                out[slice * d + j] /= total;
            }
        }
        drop(x_data);
        let track = x.tracked();
        let result = Tensor::result(x.shape().to_vec(), out, track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                let s = out_t.data();
                x.with_grad_mut(|g| {
                    for slice in 0..g.len() / d {
                        let o = slice * d;
                        let dot: f64 = (0..d).map(|j| gout[o + j] * s[o + j]).sum();
                        for j in 0..d {
                            g[o + j] += s[o + j] * (gout[o + j] - dot);
                        }
                    }
                });
            });
        }
        result
    }

    /// Sets `x[.., i, j]` to -inf wherever `mask[i * s + j]` is false. The
    /// mask covers the last two axes and is broadcast over leading ones.
    pub fn mask_fill(&self, x: &Tensor, mask: &[bool]) -> Result<Tensor, TensorError> {
        let shape = x.shape();
        if shape.len() < 2 {
            return Err(shape_err("mask_fill", shape, &[]));
        }
        let tail = shape[shape.len() - 2] * shape[shape.len() - 1];
        if mask.len() != tail {
            return Err(shape_err("mask_fill", shape, &[mask.len()]));
        }
        let out: Vec<f64> = x
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| if mask[i % tail] { v } else { f64::NEG_INFINITY })
            .collect();
        let track = x.tracked();
        let result = Tensor::result(shape.to_vec(), out, track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            let mask = mask.to_vec();
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                x.with_grad_mut(|g| {
                    for i in 0..g.len() {
                        if mask[i % tail] {
                            g[i] += gout[i];
                        }
                    }
                });
            });
        }
        Ok(result)
    }

    /// Per-slice normalization over the last axis:
    /// `(x − mean) / sqrt(var + eps) * gain + bias`.
    pub fn layer_norm(
        &self,
        x: &Tensor,
        gain: &Tensor,
        bias: &Tensor,
        epsilon: f64,
    ) -> Result<Tensor, TensorError> {
        let d = *x.shape().last().unwrap_or(&0);
        if gain.shape() != [d] || bias.shape() != [d] {
            return Err(shape_err("layer_norm", x.shape(), gain.shape()));
        }
        let x_data = x.data();
        let g_data = gain.to_vec();
        let b_data = bias.to_vec();
        let slices = x_data.len() / d;
        let mut out = vec![0.0; x_data.len()];
        let mut normalized = vec![0.0; x_data.len()];
        let mut inv_std = vec![0.0; slices];
        for s in 0..slices {
            let row = &x_data[s * d..(s + 1) * d];
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + epsilon).sqrt();
            inv_std[s] = inv;
            for j in 0..d {
                let xhat = (row[j] - mean) * inv;
                normalized[s * d + j] = xhat;
                out[s * d + j] = xhat * g_data[j] + b_data[j];
            }
        }
        drop(x_data);
        let track = x.tracked() || gain.tracked() || bias.tracked();
        let result = Tensor::result(x.shape().to_vec(), out, track);
        if track {
            let (x, gain, bias, out_t) = (x.clone(), gain.clone(), bias.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                if bias.tracked() {
                    bias.with_grad_mut(|g| {
                        for s in 0..slices {
                            for j in 0..d {
                                g[j] += gout[s * d + j];
                            }
                        }
                    });
                }
                if gain.tracked() {
                    gain.with_grad_mut(|g| {
                        for s in 0..slices {
                            for j in 0..d {
                                g[j] += gout[s * d + j] * normalized[s * d + j];
                            }
                        }
                    });
                }
                if x.tracked() {
                    x.with_grad_mut(|g| {
                        for s in 0..slices {
                            let o = s * d;
                            let mut mean_dxhat = 0.0;
                            let mut mean_dxhat_xhat = 0.0;
                            for j in 0..d {
                                let dxhat = gout[o + j] * g_data[j];
                                mean_dxhat += dxhat;
                                mean_dxhat_xhat += dxhat * normalized[o + j];
                            }
                            mean_dxhat /= d as f64;
                            mean_dxhat_xhat /= d as f64;
                            for j in 0..d {
                                let dxhat = gout[o + j] * g_data[j];
                                g[o + j] += inv_std[s]
                                    * (dxhat - mean_dxhat - normalized[o + j] * mean_dxhat_xhat);
                            }
                        }
                    });
                }
            });
        }
        Ok(result)
    }

    /// Mean token-level negative log-likelihood over non-pad positions.
    pub fn cross_entropy(
        &self,
        logits: &Tensor,
        targets: &[usize],
        pad_id: usize,
    ) -> Result<Tensor, TensorError> {
        let shape = logits.shape();
        if shape.len() != 2 || shape[0] != targets.len() {
            return Err(shape_err("cross_entropy", shape, &[targets.len()]));
        }
        let (t_len, vocab) = (shape[0], shape[1]);
        for &t in targets {
            if t >= vocab && t != pad_id {
                return Err(TensorError::IdOutOfRange { id: t, rows: vocab });
            }
        }
        let active: Vec<usize> = (0..t_len).filter(|&t| targets[t] != pad_id).collect();
        if active.is_empty() {
            return Err(TensorError::AllPadding);
        }
        let count = active.len() as f64;

        let x = logits.data();
        let mut probs = vec![0.0; x.len()];
        let mut loss = 0.0;
        for &t in &active {
            let row = &x[t * vocab..(t + 1) * vocab];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_norm = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            for j in 0..vocab {
                probs[t * vocab + j] = (row[j] - log_norm).exp();
            }
            loss -= row[targets[t]] - log_norm;
        }
        loss /= count;
        drop(x);

        let track = logits.tracked();
        let result = Tensor::result(vec![1], vec![loss], track);
        if track {
            let (logits, out_t) = (logits.clone(), result.clone());
            let targets = targets.to_vec();
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                let go = gout[0] / count;
                logits.with_grad_mut(|g| {
                    for &t in &active {
                        for j in 0..vocab {
                            let indicator = if j == targets[t] { 1.0 } else { 0.0 };
                            g[t * vocab + j] += go * (probs[t * vocab + j] - indicator);
                        }
                    }
                });
            });
        }
        Ok(result)
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&self, x: &Tensor) -> Tensor {
        let total: f64 = x.data().iter().sum();
        let track = x.tracked();
        let result = Tensor::result(vec![1], vec![total], track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                let go = gout[0];
                x.with_grad_mut(|g| g.iter_mut().for_each(|v| *v += go));
            });
        }
        result
    }

    /// Inverted dropout with a per-call seed. Rate 0 is exactly the identity.
    pub fn dropout(&self, x: &Tensor, rate: f64, seed: u64) -> Tensor {
        assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
        if rate == 0.0 {
            return x.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keep = 1.0 - rate;
        let mask: Vec<f64> = (0..x.len())
            .map(|_| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    1.0 / keep
                }
            })
            .collect();
        let out: Vec<f64> = x.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let track = x.tracked();
        let result = Tensor::result(x.shape().to_vec(), out, track);
        if track {
            let (x, out_t) = (x.clone(), result.clone());
            self.record(move || {
                let gout = out_t.0.grad.borrow();
                let Some(gout) = gout.as_ref() else { return };
                x.with_grad_mut(|g| {
                    for i in 0..g.len() {
                        g[i] += gout[i] * mask[i];
                    }
                });
            });
        }
        result
    }

    /// Reverse sweep: seeds the scalar loss with gradient 1, replays every
    /// recorded op backwards, then clears the tape.
    pub fn backward(&self, loss: &Tensor) -> Result<(), TensorError> {
        if loss.len() != 1 {
            return Err(TensorError::NotScalar(loss.shape().to_vec()));
        }
        let nodes: Vec<BackwardFn> = self.nodes.borrow_mut().drain(..).collect();
        if nodes.is_empty() {
            return Err(TensorError::TapeEmpty);
        }
        loss.with_grad_mut(|g| g[0] = 1.0);
        for node in nodes.into_iter().rev() {
            node();
        }
        Ok(())
    }
}
