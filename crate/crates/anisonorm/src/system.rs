//! Finite-horizon linear discrete time-varying systems.
//!
//! A system on the interval `[0, N]` is the recursion
//!
//! ```text
//! x_{k+1} = A_k x_k + B_k w_k,      x_0 = 0,
//! z_k     = C_k x_k + D_k w_k,
//! ```
//!
//! with time-indexed real matrices. Stacking the inputs and outputs over
//! the whole interval turns the system into one block lower triangular
//! matrix, which is the object all norms are defined on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// State-space realization of a linear discrete time-varying system.
///
/// Holds `N+1` quadruples `(A_k, B_k, C_k, D_k)` with shapes
/// `n×n`, `n×m`, `r×n`, `r×m`. Construction validates all shapes and
/// finiteness, so a value of this type is always well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct LdtvSystem<T: Scalar> {
    a: Vec<DMatrix<T>>,
    b: Vec<DMatrix<T>>,
    c: Vec<DMatrix<T>>,
    d: Vec<DMatrix<T>>,
}

/// Dense stacked input-output operator `F_{s:t}` with its block metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedOperator<T: Scalar> {
    matrix: DMatrix<T>,
    block_rows: usize,
    block_cols: usize,
    start: usize,
    end: usize,
}

/// Inputs, states and outputs of one simulated run.
///
/// `states` has one more entry than `inputs` and `outputs`: it includes the
/// final state `x_{N+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Scalar> {
    pub inputs: Vec<DVector<T>>,
    pub states: Vec<DVector<T>>,
    pub outputs: Vec<DVector<T>>,
}

impl<T: Scalar> LdtvSystem<T> {
    /// Builds a system from explicit matrix sequences, validating shapes
    /// and finiteness.
    pub fn new(
        a: Vec<DMatrix<T>>,
        b: Vec<DMatrix<T>>,
        c: Vec<DMatrix<T>>,
        d: Vec<DMatrix<T>>,
    ) -> Result<Self> {
        let sys = LdtvSystem { a, b, c, d };
        sys.validate()?;
        Ok(sys)
    }

    /// Expands a single quadruple into the constant sequence of length
    /// `horizon + 1`.
    pub fn from_constant(
        a: DMatrix<T>,
        b: DMatrix<T>,
        c: DMatrix<T>,
        d: DMatrix<T>,
        horizon: usize,
    ) -> Result<Self> {
        let len = horizon + 1;
        Self::new(
            vec![a; len],
            vec![b; len],
            vec![c; len],
            vec![d; len],
        )
    }

    /// Re-checks every structural invariant of the realization.
    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::LengthMismatch {
                what: "A sequence",
                expected: 1,
                found: 0,
            });
        }
        let len = self.a.len();
        let n = self.a[0].nrows();
        let m = self.b.first().map_or(0, |b| b.ncols());
        let r = self.c.first().map_or(0, |c| c.nrows());
        if n == 0 || m == 0 || r == 0 {
            return Err(Error::InvalidArgument {
                arg: "dimensions",
                reason: format!("n={n}, m={m}, r={r} must all be positive"),
            });
        }
        for (what, seq) in [("B sequence", &self.b), ("C sequence", &self.c), ("D sequence", &self.d)] {
            if seq.len() != len {
                return Err(Error::LengthMismatch {
                    what,
                    expected: len,
                    found: seq.len(),
                });
            }
        }
        let shapes: [(&'static str, &Vec<DMatrix<T>>, (usize, usize)); 4] = [
            ("A", &self.a, (n, n)),
            ("B", &self.b, (n, m)),
            ("C", &self.c, (r, n)),
            ("D", &self.d, (r, m)),
        ];
        for (name, seq, expected) in shapes {
            for (k, mat) in seq.iter().enumerate() {
                let found = (mat.nrows(), mat.ncols());
                if found != expected {
                    return Err(Error::DimensionMismatch {
                        matrix: name,
                        index: k,
                        expected,
                        found,
                    });
                }
                if mat.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite { matrix: name, index: k });
                }
            }
        }
        Ok(())
    }

    /// State dimension n.
    pub fn state_dim(&self) -> usize {
        self.a[0].nrows()
    }

    /// Input dimension m.
    pub fn input_dim(&self) -> usize {
        self.b[0].ncols()
    }

    /// Output dimension r.
    pub fn output_dim(&self) -> usize {
        self.c[0].nrows()
    }

    /// Final time index N; the system has `N+1` steps.
    pub fn horizon(&self) -> usize {
        self.a.len() - 1
    }

    /// Dimension of the stacked input `W_{0:N}`, i.e. `m (N+1)`.
    pub fn stacked_input_dim(&self) -> usize {
        self.input_dim() * (self.horizon() + 1)
    }

    pub fn a(&self, k: usize) -> &DMatrix<T> {
        &self.a[k]
    }

    pub fn b(&self, k: usize) -> &DMatrix<T> {
        &self.b[k]
    }

    pub fn c(&self, k: usize) -> &DMatrix<T> {
        &self.c[k]
    }

    pub fn d(&self, k: usize) -> &DMatrix<T> {
        &self.d[k]
    }

    /// State transition matrix `Φ_{jk} = A_{j-1} ··· A_k`, with
    /// `Φ_{kk} = I_n`. Requires `k <= j <= N+1`.
    pub fn state_transition(&self, j: usize, k: usize) -> Result<DMatrix<T>> {
        if j < k {
            return Err(Error::IndexOrder { lo: k, hi: j });
        }
        let max = self.horizon() + 1;
        if j > max {
            return Err(Error::IndexOutOfRange { index: j, max });
        }
        let n = self.state_dim();
        let mut phi = DMatrix::identity(n, n);
        for step in k..j {
            phi = &self.a[step] * phi;
        }
        Ok(phi)
    }

    /// Assembles the block lower triangular operator `F_{s:t}` mapping
    /// stacked inputs on `[s, t]` to stacked outputs.
    ///
    /// Block `(j, k)` is `C_j Φ_{j,k+1} B_k` below the diagonal, `D_k` on
    /// it, and zero above. Each block row is filled by propagating
    /// `C_j Φ` backwards in k, so assembly costs `O((t-s)^2)` block
    /// products.
    pub fn assemble_stacked(&self, s: usize, t: usize) -> Result<StackedOperator<T>> {
        if t < s {
            return Err(Error::IndexOrder { lo: s, hi: t });
        }
        if t > self.horizon() {
            return Err(Error::IndexOutOfRange {
                index: t,
                max: self.horizon(),
            });
        }
        let r = self.output_dim();
        let m = self.input_dim();
        let steps = t - s + 1;
        let mut matrix = DMatrix::<T>::zeros(r * steps, m * steps);
        for j in s..=t {
            let row = (j - s) * r;
            matrix
                .view_mut((row, (j - s) * m), (r, m))
                .copy_from(&self.d[j]);
            // v = C_j Φ_{j,k+1}, maintained as k decreases.
            let mut v = self.c[j].clone();
            for k in (s..j).rev() {
                let block = &v * &self.b[k];
                matrix.view_mut((row, (k - s) * m), (r, m)).copy_from(&block);
                v *= &self.a[k];
            }
        }
        Ok(StackedOperator {
            matrix,
            block_rows: r,
            block_cols: m,
            start: s,
            end: t,
        })
    }

    /// Runs the state recursion from `x_0 = 0` over the full horizon.
    pub fn simulate(&self, inputs: &[DVector<T>]) -> Result<Trajectory<T>> {
        let steps = self.horizon() + 1;
        if inputs.len() != steps {
            return Err(Error::LengthMismatch {
                what: "input sequence",
                expected: steps,
                found: inputs.len(),
            });
        }
        let m = self.input_dim();
        for (k, w) in inputs.iter().enumerate() {
            if w.len() != m {
                return Err(Error::DimensionMismatch {
                    matrix: "w",
                    index: k,
                    expected: (m, 1),
                    found: (w.len(), 1),
                });
            }
        }
        let mut states = Vec::with_capacity(steps + 1);
        let mut outputs = Vec::with_capacity(steps);
        let mut x = DVector::<T>::zeros(self.state_dim());
        for k in 0..steps {
            outputs.push(&self.c[k] * &x + &self.d[k] * &inputs[k]);
            x = &self.a[k] * &x + &self.b[k] * &inputs[k];
            states.push(x.clone());
        }
        states.insert(0, DVector::zeros(self.state_dim()));
        Ok(Trajectory {
            inputs: inputs.to_vec(),
            states,
            outputs,
        })
    }
}

impl<T: Scalar> StackedOperator<T> {
    /// The dense operator matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Row block size r.
    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    /// Column block size m.
    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    /// First time index covered.
    pub fn start(&self) -> usize {
        self.start
    }

    /// Last time index covered.
    pub fn end(&self) -> usize {
        self.end
    }

    /// View of block `(j, k)` in absolute time indices.
    pub fn block(&self, j: usize, k: usize) -> DMatrix<T> {
        let row = (j - self.start) * self.block_rows;
        let col = (k - self.start) * self.block_cols;
        self.matrix
            .view((row, col), (self.block_rows, self.block_cols))
            .into()
    }
}

impl<T: Scalar> Trajectory<T> {
    /// Outputs stacked into one column vector `Z_{0:N}`.
    pub fn stacked_outputs(&self) -> DVector<T> {
        stack_vectors(&self.outputs)
    }

    /// Inputs stacked into one column vector `W_{0:N}`.
    pub fn stacked_inputs(&self) -> DVector<T> {
        stack_vectors(&self.inputs)
    }
}

/// Concatenates a sequence of vectors into one column vector.
pub fn stack_vectors<T: Scalar>(vs: &[DVector<T>]) -> DVector<T> {
    let total = vs.iter().map(DVector::len).sum();
    let mut out = DVector::zeros(total);
    let mut offset = 0;
    for v in vs {
        out.rows_mut(offset, v.len()).copy_from(v);
        offset += v.len();
    }
    out
}

/// Splits a stacked vector into chunks of equal length.
pub fn unstack_vector<T: Scalar>(v: &DVector<T>, chunk: usize) -> Vec<DVector<T>> {
    assert_eq!(v.len() % chunk, 0, "stacked length not divisible by chunk");
    (0..v.len() / chunk)
        .map(|i| v.rows(i * chunk, chunk).into())
        .collect()
}
