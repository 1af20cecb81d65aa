//! Random collocation and assembly of the compressive collocation system
//!
//! ```text
//! A_ij = L[Psi_{nu_j}](x_i) / sqrt(m),    b_i = f(x_i) / sqrt(m)
//! ```
//!
//! Columns are stored contiguously (column-major) and can be appended on the
//! same sample plan, which is what adaptive recovery needs.
//!
//! # Binary dump layout
//!
//! All integers and floats little-endian:
//!
//! | field    | type                 | count        |
//! |----------|----------------------|--------------|
//! | magic    | `b"CFCSYS01"`        | 8 bytes      |
//! | m, n, d  | u64                  | 3            |
//! | seed     | u64                  | 1            |
//! | columns  | i32, row per index   | n * d        |
//! | points   | f64, row per point   | m * d        |
//! | rhs      | (f64 re, f64 im)     | m            |
//! | matrix   | (f64 re, f64 im)     | n * m, column after column |

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{fourier_eval, ModeOperator};
use crate::multiindex::MultiIndex;
use crate::problem::{DiffusionCoefficient, ProblemSpec};
use crate::rng;
use crate::{CfcError, Result};

const DUMP_MAGIC: &[u8; 8] = b"CFCSYS01";

/// `m` i.i.d. uniform points on `[0,1)^d`, reproducible from `(seed, m, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    seed: u64,
    dim: usize,
    points: Vec<f64>,
}

impl SamplePlan {
    pub fn from_points(points: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(CfcError::InvalidArgument("empty sample plan".into()));
        }
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(CfcError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Ok(SamplePlan {
            seed,
            dim,
            points: flat,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn m(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// CSV with header `x1,...,xd`, one point per row, shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn sample_points(m: usize, d: usize, seed: u64) -> Result<SamplePlan> {
    if m == 0 || d == 0 {
        return Err(CfcError::InvalidArgument("need m >= 1 and d >= 1".into()));
    }
    SamplePlan::from_points(rng::uniform_points(m, d, seed, rng::COLLOCATION_STREAM), seed)
}

/// Evaluates columns `L[Psi_nu](x_i) / sqrt(m)` on a fixed plan, caching the
/// values `F_tau(x_i)` of the diffusion modes.
pub struct ColumnAssembler<'a> {
    a: &'a DiffusionCoefficient,
    rho: f64,
    plan: &'a SamplePlan,
    mode_values: Vec<Complex64>,
    modes_per_point: usize,
    scale: f64,
}

impl<'a> ColumnAssembler<'a> {
    pub fn new(problem: &'a ProblemSpec, plan: &'a SamplePlan) -> Result<Self> {
        if problem.dimension() != plan.dim() {
            return Err(CfcError::DimensionMismatch {
                expected: problem.dimension(),
                got: plan.dim(),
            });
        }
        let a = &problem.a;
        let modes_per_point = a.support_size();
        let mut mode_values = Vec::with_capacity(plan.m() * modes_per_point);
        for x in plan.points() {
            mode_values.extend(a.modes().map(|(tau, _)| fourier_eval(tau, x)));
        }
        Ok(ColumnAssembler {
            a,
            rho: problem.rho,
            plan,
            mode_values,
            modes_per_point,
            scale: 1.0 / (plan.m() as f64).sqrt(),
        })
    }

    pub fn column(&self, nu: &MultiIndex) -> Result<Vec<Complex64>> {
        if nu.dim() != self.plan.dim() {
            return Err(CfcError::DimensionMismatch {
                expected: self.plan.dim(),
                got: nu.dim(),
            });
        }
        let op = ModeOperator::new(self.a, self.rho, nu);
        let t = self.modes_per_point;
        Ok(self
            .plan
            .points()
            .enumerate()
            .map(|(i, x)| {
                op.eval_with(fourier_eval(nu, x), &self.mode_values[i * t..(i + 1) * t])
                    * self.scale
            })
            .collect())
    }

    /// Columns for several indices, assembled in parallel.
    pub fn columns(&self, indices: &[MultiIndex]) -> Result<Vec<Vec<Complex64>>> {
        indices.par_iter().map(|nu| self.column(nu)).collect()
    }

    pub fn rhs(&self, problem: &ProblemSpec) -> Vec<Complex64> {
        self.plan
            .points()
            .map(|x| Complex64::new(problem.forcing(x) * self.scale, 0.0))
            .collect()
    }
}

/// The collocation system `A z = b` on an ordered list of column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSystem {
    matrix: Vec<Complex64>,
    rhs: Vec<Complex64>,
    columns: Vec<MultiIndex>,
    plan: SamplePlan,
}

pub fn assemble(
    problem: &ProblemSpec,
    columns: &[MultiIndex],
    plan: &SamplePlan,
) -> Result<CollocationSystem> {
    let assembler = ColumnAssembler::new(problem, plan)?;
    let rhs = assembler.rhs(problem);
    let mut system = CollocationSystem {
        matrix: Vec::new(),
        rhs,
        columns: Vec::new(),
        plan: plan.clone(),
    };
    system.append(&assembler, columns)?;
    Ok(system)
}

impl CollocationSystem {
    /// Builds a system from raw parts; `matrix` is column-major `m x columns.len()`.
    pub fn from_parts(
        matrix: Vec<Complex64>,
        rhs: Vec<Complex64>,
        columns: Vec<MultiIndex>,
        plan: SamplePlan,
    ) -> Result<Self> {
        let m = plan.m();
        if rhs.len() != m || matrix.len() != m * columns.len() {
            return Err(CfcError::InvalidArgument(format!(
                "inconsistent system shape: m = {m}, rhs = {}, matrix = {}, columns = {}",
                rhs.len(),
                matrix.len(),
                columns.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for nu in &columns {
            if nu.dim() != plan.dim() {
                return Err(CfcError::DimensionMismatch {
                    expected: plan.dim(),
                    got: nu.dim(),
                });
            }
            if !seen.insert(nu) {
                return Err(CfcError::DuplicateColumn(nu.to_string()));
            }
        }
        Ok(CollocationSystem {
            matrix,
            rhs,
            columns,
            plan,
        })
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        let m = self.rows();
        &self.matrix[j * m..(j + 1) * m]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[j * self.rows() + i]
    }

    pub fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }

    pub fn columns(&self) -> &[MultiIndex] {
        &self.columns
    }

    pub fn column_position(&self, nu: &MultiIndex) -> Option<usize> {
        self.columns.iter().position(|c| c == nu)
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.plan
    }

    /// Appends freshly assembled columns on the same sample plan; existing
    /// entries are untouched.
    pub fn extend_columns(&mut self, problem: &ProblemSpec, new: &[MultiIndex]) -> Result<()> {
        self.check_new(new, self.plan.dim())?;
        let cols = ColumnAssembler::new(problem, &self.plan)?.columns(new)?;
        self.matrix.reserve(cols.len() * self.rows());
        for c in cols {
            self.matrix.extend(c);
        }
        self.columns.extend(new.iter().cloned());
        Ok(())
    }

    fn append(&mut self, assembler: &ColumnAssembler<'_>, new: &[MultiIndex]) -> Result<()> {
        self.check_new(new, self.plan.dim())?;
        let cols = assembler.columns(new)?;
        self.matrix.reserve(cols.len() * self.rows());
        for c in cols {
            self.matrix.extend(c);
        }
        self.columns.extend(new.iter().cloned());
        Ok(())
    }

    fn check_new(&self, new: &[MultiIndex], dim: usize) -> Result<()> {
        let mut seen: std::collections::HashSet<&MultiIndex> = self.columns.iter().collect();
        for nu in new {
            if nu.dim() != dim {
                return Err(CfcError::DimensionMismatch {
                    expected: dim,
                    got: nu.dim(),
                });
            }
            if !seen.insert(nu) {
                return Err(CfcError::DuplicateColumn(nu.to_string()));
            }
        }
        Ok(())
    }

    /// `A z` for a dense coefficient vector in column order.
    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(z.len(), self.cols());
        let mut out = vec![Complex64::default(); self.rows()];
        for (j, zj) in z.iter().enumerate() {
            if *zj == Complex64::default() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * zj;
            }
        }
        out
    }

    /// `A^* r`.
    pub fn adjoint_apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(r.len(), self.rows());
        (0..self.cols())
            .into_par_iter()
            .map(|j| crate::linalg::dot(self.column(j), r))
            .collect()
    }

    /// Euclidean norm of `b - A z`.
    pub fn residual_norm(&self, z: &[Complex64]) -> f64 {
        let az = self.apply(z);
        az.iter()
            .zip(&self.rhs)
            .map(|(a, b)| (b - a).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let (m, n, d) = (self.rows(), self.cols(), self.plan.dim());
        out.write_all(DUMP_MAGIC)?;
        for v in [m as u64, n as u64, d as u64, self.plan.seed()] {
            out.write_u64::<LittleEndian>(v)?;
        }
        for nu in &self.columns {
            for &k in nu.entries() {
                out.write_i32::<LittleEndian>(k)?;
            }
        }
        for &x in &self.plan.points {
            out.write_f64::<LittleEndian>(x)?;
        }
        for z in self.rhs.iter().chain(&self.matrix) {
            out.write_f64::<LittleEndian>(z.re)?;
            out.write_f64::<LittleEndian>(z.im)?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(CfcError::Parse("not a collocation system dump".into()));
        }
        let m = input.read_u64::<LittleEndian>()? as usize;
        let n = input.read_u64::<LittleEndian>()? as usize;
        let d = input.read_u64::<LittleEndian>()? as usize;
        let seed = input.read_u64::<LittleEndian>()?;
        if m == 0 || d == 0 {
            return Err(CfcError::Parse("dump has an empty sample plan".into()));
        }
        let mut columns = Vec::with_capacity(n);
        for _ in 0..n {
            let mut e = vec![0i32; d];
            input.read_i32_into::<LittleEndian>(&mut e)?;
            columns.push(MultiIndex::new(e));
        }
        let mut points = vec![0.0; m * d];
        input.read_f64_into::<LittleEndian>(&mut points)?;
        let mut read_complex = |count: usize| -> Result<Vec<Complex64>> {
            let mut raw = vec![0.0; 2 * count];
            input.read_f64_into::<LittleEndian>(&mut raw)?;
            Ok(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
        };
        let rhs = read_complex(m)?;
        let matrix = read_complex(m * n)?;
        let plan = SamplePlan {
            seed,
            dim: d,
            points,
        };
        CollocationSystem::from_parts(matrix, rhs, columns, plan)
    }
}
