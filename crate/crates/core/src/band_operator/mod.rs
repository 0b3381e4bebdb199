//! Finitely propagated kernels on a finite truncation Ω of the group.
//!
//! A kernel `t(x, y)` on Ω is treated as an operator on ℓ²(G) that vanishes
//! outside Ω × Ω. Its dominating vector is `f(z) = sup_{y⁻¹x = z} |t(x, y)|`
//! over the pairs of Ω realizing z.
//!
//! [`BandOperator`] stores sparse rows and enforces its propagation bound.
//! [`DenseKernel`] holds computed kernels such as powers and inverses whose
//! support is the whole of Ω × Ω. Both implement [`Kernel`], and every norm
//! in [`norms`] is written against that trait.

pub mod io;
pub mod norms;
pub mod random;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_metric::{Element, GroupKind, GroupModel};
use crate::linalg::C64;

pub use norms::{
    aux_norm_1v, aux_norm_1v_of, dominating_vector, inverse_weight_l2_on_support, largest_singular_value,
    operator_norm, schur_bound, truncate_propagation, weighted_norm, weighted_norm_of, DominatingVector, NormMethod,
    RowFilter,
};
pub use random::{random_band_operator, Decay, RandomSpec};

/// How Ω is chosen inside the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `B(e, R)`, in BFS order.
    Ball { radius: u32 },
    /// `{0, 1, …, len − 1}` ⊂ ℤ¹.
    Interval { len: usize },
}

/// The truncation Ω with precomputed pairwise differences.
#[derive(Debug)]
pub struct Domain {
    group: Arc<GroupModel>,
    spec: DomainSpec,
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
    /// Distinct differences `y⁻¹x` over Ω × Ω.
    diffs: Vec<Element>,
    diff_len: Vec<u32>,
    /// `pair_diff[i·n + j]` indexes `diffs` for the pair (elements[i], elements[j]).
    pair_diff: Vec<u32>,
    /// Graph distance from each element to the complement of Ω.
    depth: Vec<u32>,
}

impl Domain {
    pub fn new(group: Arc<GroupModel>, spec: DomainSpec) -> Result<Arc<Self>> {
        let elements: Vec<Element> = match spec {
            DomainSpec::Ball { radius } => group.ball(radius)?.to_vec(),
            DomainSpec::Interval { len } => {
                if group.kind() != GroupKind::FreeAbelian(1) {
                    return Err(Error::invalid("domain", "intervals are only defined on ℤ¹"));
                }
                (0..len as i64).map(|i| Element(vec![i])).collect()
            }
        };
        let n = elements.len();
        let index: HashMap<Element, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();

        let mut diff_ids: HashMap<Element, u32> = HashMap::new();
        let mut diffs = Vec::new();
        let mut diff_len = Vec::new();
        let mut pair_diff = vec![0u32; n * n];
        for (i, x) in elements.iter().enumerate() {
            for (j, y) in elements.iter().enumerate() {
                let z = group.difference(x, y);
                let id = match diff_ids.get(&z) {
                    Some(&id) => id,
                    None => {
                        let id = diffs.len() as u32;
                        diff_len.push(group.length(&z)?);
                        diffs.push(z.clone());
                        diff_ids.insert(z, id);
                        id
                    }
                };
                pair_diff[i * n + j] = id;
            }
        }

        let mut depth = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for (i, x) in elements.iter().enumerate() {
            let on_boundary = group.generators().iter().any(|s| !index.contains_key(&group.mul(x, s)));
            if on_boundary {
                depth[i] = 1;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for s in group.generators() {
                if let Some(&j) = index.get(&group.mul(&elements[i], s)) {
                    if depth[j] == u32::MAX {
                        depth[j] = depth[i] + 1;
                        queue.push_back(j);
                    }
                }
            }
        }

        Ok(Arc::new(Domain {
            group,
            spec,
            elements,
            index,
            diffs,
            diff_len,
            pair_diff,
            depth,
        }))
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        &self.group
    }

    pub fn spec(&self) -> DomainSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn diff_id(&self, i: usize, j: usize) -> usize {
        self.pair_diff[i * self.len() + j] as usize
    }

    /// `l(y⁻¹x)` for `x = elements[i]`, `y = elements[j]`.
    pub fn pair_length(&self, i: usize, j: usize) -> u32 {
        self.diff_len[self.diff_id(i, j)]
    }

    pub fn diffs(&self) -> &[Element] {
        &self.diffs
    }

    pub fn diff_lengths(&self) -> &[u32] {
        &self.diff_len
    }

    pub fn max_diff_length(&self) -> u32 {
        self.diff_len.iter().copied().max().unwrap_or(0)
    }

    pub fn depth(&self, i: usize) -> u32 {
        self.depth[i]
    }

    /// Rows farther than `margin` from the complement of Ω.
    pub fn interior_rows(&self, margin: u32) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.depth[i] > margin).collect()
    }

    /// The core: rows deeper than half the maximal depth (B(e, R/2) for balls).
    pub fn core_rows(&self) -> Vec<usize> {
        let max = self.depth.iter().copied().max().unwrap_or(0);
        self.interior_rows(max / 2)
    }

    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other)
    }
}

/// Read access shared by band and dense kernels.
pub trait Kernel {
    fn domain(&self) -> &Arc<Domain>;

    /// Visits every stored entry.
    fn for_each_entry<F: FnMut(usize, usize, C64)>(&self, f: F);

    fn matvec(&self, x: &[C64]) -> Vec<C64>;

    fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64>;

    fn to_matrix(&self) -> DMatrix<C64> {
        let n = self.domain().len();
        let mut m = DMatrix::zeros(n, n);
        self.for_each_entry(|i, j, v| m[(i, j)] += v);
        m
    }
}

/// A kernel with propagation bound: every stored entry has `l(y⁻¹x) ≤ propagation`.
#[derive(Debug, Clone)]
pub struct BandOperator {
    domain: Arc<Domain>,
    /// Sparse rows, sorted by column.
    rows: Vec<Vec<(usize, C64)>>,
    propagation: u32,
}

impl BandOperator {
    /// Builds from (row, col, value) triples; repeated positions are summed.
    pub fn from_entries<I>(domain: Arc<Domain>, propagation: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let n = domain.len();
        let mut acc: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::invalid("entry", format!("({i}, {j}) outside Ω of size {n}")));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            let l = domain.pair_length(i, j);
            if l > propagation {
                return Err(Error::PropagationViolation {
                    row: i,
                    col: j,
                    length: l,
                    propagation,
                });
            }
            *acc[i].entry(j).or_insert(C64::new(0.0, 0.0)) += v;
        }
        let rows = acc.into_iter().map(|r| r.into_iter().collect()).collect();
        Ok(BandOperator {
            domain,
            rows,
            propagation,
        })
    }

    pub fn identity(domain: Arc<Domain>) -> Self {
        Self::scaled_identity(domain, C64::new(1.0, 0.0))
    }

    pub fn scaled_identity(domain: Arc<Domain>, c: C64) -> Self {
        let rows = (0..domain.len()).map(|i| vec![(i, c)]).collect();
        BandOperator {
            domain,
            rows,
            propagation: 0,
        }
    }

    /// `diagonal·I + coupling·Σ_s R_s`, where `R_s` links x to `x·s` for each
    /// generator s. On ℤ¹ this is the symmetric tridiagonal Toeplitz matrix.
    pub fn stencil(domain: Arc<Domain>, diagonal: f64, coupling: f64) -> Result<Self> {
        let g = domain.group().clone();
        let mut entries = Vec::new();
        for (i, x) in domain.elements().iter().enumerate() {
            entries.push((i, i, C64::new(diagonal, 0.0)));
            for s in g.generators() {
                if let Some(j) = domain.index_of(&g.mul(x, s)) {
                    entries.push((i, j, C64::new(coupling, 0.0)));
                }
            }
        }
        Self::from_entries(domain, 1, entries)
    }

    pub fn propagation(&self) -> u32 {
        self.propagation
    }

    pub fn rows(&self) -> &[Vec<(usize, C64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Smallest propagation bound consistent with the stored entries.
    pub fn effective_propagation(&self) -> u32 {
        let mut p = 0;
        self.for_each_entry(|i, j, v| {
            if v.norm() > 0.0 {
                p = p.max(self.domain.pair_length(i, j));
            }
        });
        p
    }

    fn check_domain(&self, other: &BandOperator) -> Result<()> {
        if self.domain.same_as(&other.domain) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    /// Matrix product restricted to Ω.
    pub fn compose(&self, other: &BandOperator) -> Result<BandOperator> {
        self.check_domain(other)?;
        let n = self.domain.len();
        let mut rows = Vec::with_capacity(n);
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for row in &self.rows {
            acc.clear();
            for &(k, a) in row {
                for &(j, b) in &other.rows[k] {
                    *acc.entry(j).or_insert(C64::new(0.0, 0.0)) += a * b;
                }
            }
            rows.push(acc.iter().map(|(&j, &v)| (j, v)).collect());
        }
        Ok(BandOperator {
            domain: self.domain.clone(),
            rows,
            propagation: self.propagation + other.propagation,
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> BandOperator {
        let n = self.domain.len();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v.conj()));
            }
        }
        BandOperator {
            domain: self.domain.clone(),
            rows,
            propagation: self.propagation,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &BandOperator, b: C64) -> Result<BandOperator> {
        self.check_domain(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r1, r2)| {
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for &(j, v) in r1 {
                    *acc.entry(j).or_insert(C64::new(0.0, 0.0)) += a * v;
                }
                for &(j, v) in r2 {
                    *acc.entry(j).or_insert(C64::new(0.0, 0.0)) += b * v;
                }
                acc.into_iter().collect()
            })
            .collect();
        Ok(BandOperator {
            domain: self.domain.clone(),
            rows,
            propagation: self.propagation.max(other.propagation),
        })
    }

    pub fn add(&self, other: &BandOperator) -> Result<BandOperator> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &BandOperator) -> Result<BandOperator> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> BandOperator {
        BandOperator {
            domain: self.domain.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, c * v)).collect())
                .collect(),
            propagation: self.propagation,
        }
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> BandOperator {
        let half = C64::new(0.5, 0.0);
        self.combine(half, &self.adjoint(), half)
            .expect("adjoint shares the domain")
    }

    /// Largest `|A − A*|` entry.
    pub fn max_asymmetry(&self) -> f64 {
        let adj = self.adjoint();
        let diff = self.sub(&adj).expect("adjoint shares the domain");
        let mut m: f64 = 0.0;
        diff.for_each_entry(|_, _, v| m = m.max(v.norm()));
        m
    }

    pub fn to_dense(&self) -> DenseKernel {
        DenseKernel {
            domain: self.domain.clone(),
            matrix: self.to_matrix(),
        }
    }
}

impl Kernel for BandOperator {
    fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    fn for_each_entry<F: FnMut(usize, usize, C64)>(&self, mut f: F) {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                f(i, j, v);
            }
        }
    }

    fn matvec(&self, x: &[C64]) -> Vec<C64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                y[j] += v.conj() * x[i];
            }
        }
        y
    }
}

/// A kernel with full support on Ω × Ω.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    domain: Arc<Domain>,
    matrix: DMatrix<C64>,
}

impl DenseKernel {
    pub fn new(domain: Arc<Domain>, matrix: DMatrix<C64>) -> Result<Self> {
        let n = domain.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DomainMismatch);
        }
        Ok(DenseKernel { domain, matrix })
    }

    pub fn identity(domain: Arc<Domain>) -> Self {
        let n = domain.len();
        DenseKernel {
            domain,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    fn check_domain(&self, other: &Arc<Domain>) -> Result<()> {
        if self.domain.same_as(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn compose(&self, other: &DenseKernel) -> Result<DenseKernel> {
        self.check_domain(&other.domain)?;
        Ok(DenseKernel {
            domain: self.domain.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn adjoint(&self) -> DenseKernel {
        DenseKernel {
            domain: self.domain.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn sub(&self, other: &DenseKernel) -> Result<DenseKernel> {
        self.check_domain(&other.domain)?;
        Ok(DenseKernel {
            domain: self.domain.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, c: C64) -> DenseKernel {
        DenseKernel {
            domain: self.domain.clone(),
            matrix: &self.matrix * c,
        }
    }
}

/// Borrowed dense matrix on a domain, for norms of intermediate results.
#[derive(Debug, Clone, Copy)]
pub struct DenseView<'a> {
    pub domain: &'a Arc<Domain>,
    pub matrix: &'a DMatrix<C64>,
}

impl Kernel for DenseView<'_> {
    fn domain(&self) -> &Arc<Domain> {
        self.domain
    }

    fn for_each_entry<F: FnMut(usize, usize, C64)>(&self, mut f: F) {
        let n = self.domain.len();
        for j in 0..n {
            for i in 0..n {
                f(i, j, self.matrix[(i, j)]);
            }
        }
    }

    fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (self.matrix * v).as_slice().to_vec()
    }

    fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(x);
        self.matrix.ad_mul(&v).as_slice().to_vec()
    }

    fn to_matrix(&self) -> DMatrix<C64> {
        self.matrix.clone()
    }
}

impl Kernel for DenseKernel {
    fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    fn for_each_entry<F: FnMut(usize, usize, C64)>(&self, mut f: F) {
        let n = self.domain.len();
        for j in 0..n {
            for i in 0..n {
                f(i, j, self.matrix[(i, j)]);
            }
        }
    }

    fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(x);
        self.matrix.ad_mul(&v).as_slice().to_vec()
    }

    fn to_matrix(&self) -> DMatrix<C64> {
        self.matrix.clone()
    }
}
