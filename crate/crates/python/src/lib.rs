//! Python bindings. Vectors and matrices cross the boundary as lists of
//! ints; large bounds come back as Python ints.

use blockgraver::cones::{intersect_many, GeneratorSet};
use blockgraver::format::{parse_instance, parse_tree, serialize_instance, Instance};
use blockgraver::generate::{random_tree, random_two_stage, TreeShape, TwoStageShape};
use blockgraver::graver::{graver_basis as core_graver_basis, graver_norm_bound as core_graver_norm_bound};
use blockgraver::lowerbound::{analytic_witness, generate, min_first_coordinate, Family};
use blockgraver::multistage::{solve_multistage, tower_bound as core_tower_bound, TreeInstance as CoreTree};
use blockgraver::steinitz::{prefix_radius, steinitz_reorder as core_steinitz};
use blockgraver::subrep::{find_common_submultisets, subrep_size_bound as core_subrep_bound, VectorMultiset};
use blockgraver::twostage::{
    solve as core_solve, two_stage_graver_bound as core_two_stage_bound, HeadCap, SolveReport as CoreReport,
    SolverConfig,
};
use blockgraver::{Error, IntMatrix, IntVector, TwoStageInstance as CoreTwoStage};
use num_bigint::{BigInt, BigUint};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(blockgraver, BlockGraverError, PyValueError);
create_exception!(blockgraver, BudgetError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } | Error::BoundTooLarge { .. } => BudgetError::new_err(e.to_string()),
        other => BlockGraverError::new_err(other.to_string()),
    }
}

fn matrix(rows: &[Vec<i64>]) -> PyResult<IntMatrix> {
    IntMatrix::from_rows(rows).map_err(to_py)
}

fn vectors(vs: Vec<Vec<i64>>) -> Vec<IntVector> {
    vs.into_iter().map(IntVector::new).collect()
}

fn lists(vs: &[IntVector]) -> Vec<Vec<i64>> {
    vs.iter().map(|v| v.to_vec()).collect()
}

/// A two-stage program `max c.x  s.t.  A_i x0 + B_i x_i = b_i, l <= x <= u`.
#[pyclass(name = "TwoStageInstance", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTwoStage {
    inner: CoreTwoStage,
}

#[pymethods]
impl PyTwoStage {
    #[new]
    #[allow(clippy::too_many_arguments)]
    fn new(
        a_blocks: Vec<Vec<Vec<i64>>>,
        b_blocks: Vec<Vec<Vec<i64>>>,
        rhs: Vec<i64>,
        lower: Vec<i64>,
        upper: Vec<i64>,
        objective: Vec<i64>,
    ) -> PyResult<Self> {
        let n = a_blocks.len();
        let r = a_blocks.first().map_or(0, Vec::len);
        let s = a_blocks.first().and_then(|b| b.first()).map_or(0, Vec::len);
        let t = b_blocks.first().and_then(|b| b.first()).map_or(0, Vec::len);
        let inner = CoreTwoStage {
            n,
            r,
            s,
            t,
            a_blocks: a_blocks.iter().map(|b| matrix(b)).collect::<PyResult<_>>()?,
            b_blocks: b_blocks.iter().map(|b| matrix(b)).collect::<PyResult<_>>()?,
            rhs: rhs.into(),
            lower: lower.into(),
            upper: upper.into(),
            objective: objective.into(),
        };
        inner.ensure_valid().map_err(to_py)?;
        Ok(PyTwoStage { inner })
    }

    /// Seeded random instance, feasible by construction.
    #[staticmethod]
    #[pyo3(signature = (seed, n=2, r=1, s=1, t=2, delta=2, max_width=3, max_cost=3))]
    #[allow(clippy::too_many_arguments)]
    fn random(seed: u64, n: usize, r: usize, s: usize, t: usize, delta: i64, max_width: i64, max_cost: i64) -> PyResult<Self> {
        let shape = TwoStageShape { n, r, s, t, delta, max_width, max_cost };
        Ok(PyTwoStage { inner: random_two_stage(seed, &shape).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        match parse_instance(text).map_err(to_py)? {
            Instance::TwoStage(inner) => Ok(PyTwoStage { inner }),
            Instance::Tree(_) => Err(BlockGraverError::new_err("file holds a tree instance")),
        }
    }

    fn to_toml(&self) -> String {
        serialize_instance(&Instance::TwoStage(self.inner.clone()))
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize, usize) {
        (self.inner.n, self.inner.r, self.inner.s, self.inner.t)
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    #[getter]
    fn delta(&self) -> i64 {
        self.inner.delta()
    }

    fn matrix(&self) -> PyResult<Vec<Vec<i64>>> {
        Ok(self.inner.assemble_matrix().map_err(to_py)?.to_rows())
    }

    fn is_feasible(&self, x: Vec<i64>) -> PyResult<bool> {
        self.inner.is_feasible(&x).map_err(to_py)
    }

    fn objective_value(&self, x: Vec<i64>) -> PyResult<i64> {
        self.inner.objective_value(&x).map_err(to_py)
    }

    fn to_tree(&self) -> PyResult<PyTree> {
        Ok(PyTree { inner: CoreTree::from_two_stage(&self.inner).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        let (n, r, s, t) = self.shape();
        format!("TwoStageInstance(n={n}, r={r}, s={s}, t={t})")
    }
}

/// A multi-stage program whose blocks form a rooted tree.
#[pyclass(name = "TreeInstance", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTree {
    inner: CoreTree,
}

#[pymethods]
impl PyTree {
    /// Seeded random tree; `branching` gives children per level and `cols`
    /// the block widths from the root down.
    #[staticmethod]
    #[pyo3(signature = (seed, branching=vec![2, 2], cols=vec![1, 1, 1], leaf_rows=1, delta=2, max_width=2, max_cost=3))]
    fn random(
        seed: u64,
        branching: Vec<usize>,
        cols: Vec<usize>,
        leaf_rows: usize,
        delta: i64,
        max_width: i64,
        max_cost: i64,
    ) -> PyResult<Self> {
        let shape = TreeShape { branching, cols, leaf_rows, delta, max_width, max_cost };
        Ok(PyTree { inner: random_tree(seed, &shape).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyTree { inner: parse_tree(text).map_err(to_py)? })
    }

    fn to_toml(&self) -> String {
        serialize_instance(&Instance::Tree(self.inner.clone()))
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn num_blocks(&self) -> usize {
        self.inner.blocks.len()
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn matrix(&self) -> PyResult<Vec<Vec<i64>>> {
        Ok(self.inner.assemble_matrix().map_err(to_py)?.to_rows())
    }

    fn is_feasible(&self, x: Vec<i64>) -> PyResult<bool> {
        self.inner.is_feasible(&x).map_err(to_py)
    }

    fn objective_value(&self, x: Vec<i64>) -> PyResult<i64> {
        self.inner.objective_value(&x).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("TreeInstance(blocks={}, depth={})", self.inner.blocks.len(), self.inner.depth())
    }
}

#[pyclass(name = "SolveReport", frozen, get_all)]
struct PyReport {
    /// "optimal", "budget-stopped" or "infeasible".
    status: String,
    objective: Option<i64>,
    initial_objective: Option<i64>,
    solution: Option<Vec<i64>>,
    iterations: usize,
    phase_one_iterations: usize,
    final_head_cap: u64,
    /// `(head, lambda, gain, cycle)` per applied step.
    augmentations: Vec<(Vec<i64>, i64, i64, Vec<i64>)>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("SolveReport(status={:?}, objective={:?}, iterations={})", self.status, self.objective, self.iterations)
    }
}

impl From<CoreReport> for PyReport {
    fn from(r: CoreReport) -> Self {
        PyReport {
            status: r.status.as_str().to_string(),
            objective: r.objective_value,
            initial_objective: r.initial_value,
            solution: r.solution.map(IntVector::into_inner),
            iterations: r.iterations,
            phase_one_iterations: r.phase_one_iterations,
            final_head_cap: r.final_head_cap,
            augmentations: r
                .augmentations
                .into_iter()
                .map(|a| (a.head.into_inner(), a.lambda, a.gain, a.cycle.into_inner()))
                .collect(),
        }
    }
}

fn config(head_cap: Option<&Bound<'_, PyAny>>, max_iter: usize, parallel_width: usize) -> PyResult<SolverConfig> {
    let head_cap = match head_cap {
        None => HeadCap::Adaptive,
        Some(v) => match v.extract::<String>() {
            Ok(s) if s == "bound" => HeadCap::TheoremBound,
            Ok(s) => return Err(BlockGraverError::new_err(format!("head_cap must be an int or \"bound\", got {s:?}"))),
            Err(_) => HeadCap::Exact(v.extract::<u64>()?),
        },
    };
    Ok(SolverConfig { head_cap, max_iterations: max_iter, parallel_width, ..SolverConfig::default() })
}

/// Solves a two-stage or tree instance. `head_cap` is `None` (adaptive), an
/// int (fixed cap) or `"bound"` (explicit Graver bound).
#[pyfunction]
#[pyo3(signature = (instance, head_cap=None, max_iter=10_000, parallel_width=0))]
fn solve(
    py: Python<'_>,
    instance: &Bound<'_, PyAny>,
    head_cap: Option<&Bound<'_, PyAny>>,
    max_iter: usize,
    parallel_width: usize,
) -> PyResult<PyReport> {
    let config = config(head_cap, max_iter, parallel_width)?;
    let report = if let Ok(inst) = instance.cast::<PyTwoStage>() {
        let inner = inst.get().inner.clone();
        py.detach(|| core_solve(&inner, &config))
    } else if let Ok(tree) = instance.cast::<PyTree>() {
        let inner = tree.get().inner.clone();
        py.detach(|| solve_multistage(&inner, &config))
    } else {
        return Err(BlockGraverError::new_err("expected a TwoStageInstance or TreeInstance"));
    };
    Ok(report.map_err(to_py)?.into())
}

/// `(2mΔ+1)^m`.
#[pyfunction]
fn graver_norm_bound(rows: u64, delta: u64) -> PyResult<BigUint> {
    core_graver_norm_bound(rows, delta).map_err(to_py)
}

#[pyfunction]
fn two_stage_graver_bound(r: u64, s: u64, delta: u64) -> PyResult<BigUint> {
    core_two_stage_bound(r, s, delta).map_err(to_py)
}

#[pyfunction]
fn tower_bound(level_widths: Vec<u64>, r: u64, delta: u64) -> PyResult<BigUint> {
    core_tower_bound(&level_widths, r, delta).map_err(to_py)
}

#[pyfunction]
fn subrep_size_bound(d: u64, delta: u64) -> PyResult<BigUint> {
    core_subrep_bound(d, delta).map_err(to_py)
}

/// Graver elements of one-norm at most `cap` (default: the complete bound),
/// and whether the cap cut the basis short.
#[pyfunction]
#[pyo3(signature = (rows, cap=None))]
fn graver_basis(py: Python<'_>, rows: Vec<Vec<i64>>, cap: Option<u64>) -> PyResult<(Vec<Vec<i64>>, bool)> {
    let m = matrix(&rows)?;
    let cap = match cap {
        Some(c) => c,
        None => {
            let b = core_graver_norm_bound(m.rows().max(1) as u64, m.delta().max(1) as u64).map_err(to_py)?;
            u64::try_from(&b).map_err(|_| BudgetError::new_err("complete bound does not fit in 64 bits"))?
        }
    };
    let basis = py.detach(|| core_graver_basis(&m, cap)).map_err(to_py)?;
    Ok((lists(&basis.elements()), basis.is_truncated()))
}

/// Permutation whose prefix sums stay within `d * delta`, and the radius it
/// achieves.
#[pyfunction]
fn steinitz_reorder(vectors_in: Vec<Vec<i64>>, delta: i64) -> PyResult<(Vec<usize>, i64)> {
    let vs = vectors(vectors_in);
    let perm = core_steinitz(&vs, delta).map_err(to_py)?;
    let radius = prefix_radius(&vs, &perm).map_err(to_py)?;
    Ok((perm, radius))
}

/// Generators of the intersection of integer cones, each with one witness
/// per input cone (indexed by that cone's canonical generator order).
#[pyfunction]
fn intersect_cones(
    py: Python<'_>,
    sets: Vec<Vec<Vec<i64>>>,
    delta: i64,
) -> PyResult<(Vec<Vec<i64>>, Vec<Vec<Vec<i64>>>)> {
    let dim = sets.iter().flatten().map(Vec::len).next().unwrap_or(0);
    let sets: Vec<GeneratorSet> =
        sets.into_iter().map(|s| GeneratorSet::new(dim, vectors(s))).collect::<Result<_, _>>().map_err(to_py)?;
    let result = py.detach(|| intersect_many(&sets, delta)).map_err(to_py)?;
    let witnesses = result.witnesses.iter().map(|ws| lists(ws)).collect();
    Ok((lists(result.set.generators()), witnesses))
}

/// Nonempty submultisets with one common sum; inputs are lists of vectors
/// with repetition.
#[pyfunction]
fn common_submultisets(sets: Vec<Vec<Vec<i64>>>, delta: i64) -> PyResult<(Vec<Vec<Vec<i64>>>, Vec<i64>)> {
    let dim = sets.iter().flatten().map(Vec::len).next().unwrap_or(0);
    let sets: Vec<VectorMultiset> =
        sets.into_iter().map(|s| VectorMultiset::from_vectors(dim, vectors(s))).collect::<Result<_, _>>().map_err(to_py)?;
    let found = find_common_submultisets(&sets, delta).map_err(to_py)?;
    let subsets = found.subsets.iter().map(|s| lists(&s.to_vec())).collect();
    Ok((subsets, found.common_sum.into_inner()))
}

/// Lower-bound matrix of the given family, its minimal first coordinate and
/// the kernel witness attaining it.
#[pyfunction]
#[pyo3(signature = (family, delta, s=1))]
fn lower_bound(family: &str, delta: u64, s: u64) -> PyResult<(Vec<Vec<i64>>, BigUint, Vec<BigInt>)> {
    let family: Family = family.parse().map_err(to_py)?;
    let m = generate(family, delta, s).map_err(to_py)?;
    let min = min_first_coordinate(&m, family, delta, s).map_err(to_py)?;
    let witness = analytic_witness(family, delta, s).map_err(to_py)?;
    Ok((m.to_rows(), min, witness))
}

#[pymodule(name = "blockgraver")]
fn blockgraver_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BlockGraverError", m.py().get_type::<BlockGraverError>())?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add_class::<PyTwoStage>()?;
    m.add_class::<PyTree>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(graver_norm_bound, m)?)?;
    m.add_function(wrap_pyfunction!(two_stage_graver_bound, m)?)?;
    m.add_function(wrap_pyfunction!(tower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(subrep_size_bound, m)?)?;
    m.add_function(wrap_pyfunction!(graver_basis, m)?)?;
    m.add_function(wrap_pyfunction!(steinitz_reorder, m)?)?;
    m.add_function(wrap_pyfunction!(intersect_cones, m)?)?;
    m.add_function(wrap_pyfunction!(common_submultisets, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    Ok(())
}
