//! Python bindings for `nclp`.
//!
//! Block matrices cross the boundary as lists of square blocks, each a list
//! of rows of complex numbers. Exponents are accepted as strings (`"1.5"`,
//! `"inf"`) or numbers.

use nclp::classical::{self, FiniteMeasureSpace, PointMap};
use nclp::compop::{self, NormOptions, Verdict};
use nclp::jordan::{self, JordanMorphismSpec, Tile, TileKind};
use nclp::vnops;
use nclp::{haagerup, matcore, BlockMatrix, BlockProfile, CMatrix, Error, Exponent, C64};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(nclp, RefusalError, PyValueError, "The inputs fall outside the hypotheses of the requested operation.");

type Blocks = Vec<Vec<Vec<C64>>>;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::ExponentOrder { .. }
        | Error::NotFaithful { .. }
        | Error::NotModuleMap { .. }
        | Error::DominationFails(_)
        | Error::NotCommuting { .. }
        | Error::NotSummable { .. }
        | Error::SingularNegativePower => RefusalError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for nclp::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn exponent(p: &Bound<'_, PyAny>) -> PyResult<Exponent> {
    if let Ok(s) = p.extract::<String>() {
        return s.parse().map_err(|e: Error| PyValueError::new_err(e.to_string()));
    }
    let x: f64 = p.extract()?;
    let e = Exponent::from_f64(x).or_raise()?;
    e.check_norm_exponent().or_raise()
}

fn cmatrix(rows: &[Vec<C64>]) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("blocks must be non-empty square matrices"));
    }
    Ok(CMatrix::from_rows(rows))
}

fn block_matrix(blocks: &Blocks) -> PyResult<BlockMatrix> {
    let mats = blocks.iter().map(|b| cmatrix(b)).collect::<PyResult<Vec<_>>>()?;
    BlockMatrix::from_blocks(mats).or_raise()
}

fn blocks_of(x: &BlockMatrix) -> Blocks {
    x.blocks().iter().map(rows_of).collect()
}

fn rows_of(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn profile(dims: Vec<usize>) -> PyResult<BlockProfile> {
    BlockProfile::new(dims).or_raise()
}

/// Positive functional `a ↦ tr(h a)` given by its density `h`.
#[pyclass(name = "Weight", module = "nclp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWeight(vnops::Weight);

#[pymethods]
impl PyWeight {
    #[new]
    fn new(density: Blocks) -> PyResult<Self> {
        Ok(Self(vnops::Weight::new(block_matrix(&density)?).or_raise()?))
    }

    #[staticmethod]
    fn trace(dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self(vnops::Weight::trace(&profile(dims)?)))
    }

    #[staticmethod]
    fn diagonal(diags: Vec<Vec<f64>>) -> PyResult<Self> {
        let refs: Vec<&[f64]> = diags.iter().map(Vec::as_slice).collect();
        Ok(Self(vnops::Weight::from_diags(&refs).or_raise()?))
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.profile().dims().to_vec()
    }

    fn density(&self) -> Blocks {
        blocks_of(self.0.density())
    }

    fn is_faithful(&self) -> bool {
        self.0.is_faithful()
    }

    fn evaluate(&self, a: Blocks) -> PyResult<C64> {
        self.0.evaluate(&block_matrix(&a)?).or_raise()
    }

    fn modular_conjugate(&self, t: f64, a: Blocks) -> PyResult<Blocks> {
        Ok(blocks_of(&vnops::modular_conjugate(&self.0, t, &block_matrix(&a)?).or_raise()?))
    }

    fn commutes_with(&self, other: &PyWeight) -> PyResult<bool> {
        vnops::weights_commute(&self.0, &other.0).or_raise()
    }

    fn __repr__(&self) -> String {
        format!("Weight(dims={:?})", self.0.profile().dims())
    }
}

/// Jordan *-morphism in tile form.
#[pyclass(name = "JordanMorphism", module = "nclp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyJordan(JordanMorphismSpec);

fn tile_kind(s: &str) -> PyResult<TileKind> {
    match s {
        "H" => Ok(TileKind::H),
        "A" => Ok(TileKind::A),
        other => Err(PyValueError::new_err(format!("tile kind must be \"H\" or \"A\", got {other:?}"))),
    }
}

#[pymethods]
impl PyJordan {
    /// `tiles` holds `(src, dst, offset, kind)` tuples with kind `"H"` or `"A"`.
    #[new]
    #[pyo3(signature = (dims1, dims2, tiles, block_unitaries = None))]
    fn new(
        dims1: Vec<usize>,
        dims2: Vec<usize>,
        tiles: Vec<(usize, usize, usize, String)>,
        block_unitaries: Option<Vec<Option<Vec<Vec<C64>>>>>,
    ) -> PyResult<Self> {
        let tiles = tiles
            .into_iter()
            .map(|(src, dst, offset, kind)| Ok(Tile::new(src, dst, offset, tile_kind(&kind)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let unitaries = block_unitaries
            .unwrap_or_default()
            .iter()
            .map(|u| u.as_deref().map(cmatrix).transpose())
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self(JordanMorphismSpec::new(profile(dims1)?, profile(dims2)?, tiles, unitaries).or_raise()?))
    }

    #[staticmethod]
    fn identity(dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self(JordanMorphismSpec::identity(&profile(dims)?)))
    }

    #[staticmethod]
    fn transpose(dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self(JordanMorphismSpec::transpose(&profile(dims)?)))
    }

    fn tiles(&self) -> Vec<(usize, usize, usize, &'static str)> {
        self.0
            .tiles()
            .iter()
            .map(|t| {
                let kind = match self.0.effective_kind(t) {
                    TileKind::H => "H",
                    TileKind::A => "A",
                };
                (t.src_block, t.dst_block, t.offset, kind)
            })
            .collect()
    }

    fn apply(&self, a: Blocks) -> PyResult<Blocks> {
        Ok(blocks_of(&jordan::apply(&self.0, &block_matrix(&a)?).or_raise()?))
    }

    #[pyo3(signature = (samples = 20, seed = 0))]
    fn verify<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let r = jordan::verify_jordan(&self.0, samples, seed);
        let d = PyDict::new(py);
        d.set_item("pass", r.pass)?;
        d.set_item("max_residual", r.max_residual())?;
        d.set_item("tolerance", r.tolerance)?;
        d.set_item("probes", r.probes)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("JordanMorphism({:?} -> {:?}, {} tiles)", self.0.profile1().dims(), self.0.profile2().dims(), self.0.tiles().len())
    }
}

/// Linear map between block algebras, viewed from `L^p` to `L^q`.
#[pyclass(name = "SuperOperator", module = "nclp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySuperOperator(compop::SuperOperator);

#[pymethods]
impl PySuperOperator {
    /// Operator whose matrix has columns indexed by the domain matrix units.
    #[staticmethod]
    fn from_matrix(
        dims1: Vec<usize>,
        p: &Bound<'_, PyAny>,
        dims2: Vec<usize>,
        q: &Bound<'_, PyAny>,
        matrix: Vec<Vec<C64>>,
    ) -> PyResult<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(PyValueError::new_err("ragged matrix"));
        }
        let m = CMatrix::from_vec(rows, cols, matrix.into_iter().flatten().collect());
        let op = compop::SuperOperator::from_matrix(profile(dims1)?, exponent(p)?, profile(dims2)?, exponent(q)?, m).or_raise()?;
        Ok(Self(op))
    }

    #[getter]
    fn p(&self) -> String {
        self.0.p().to_string()
    }

    #[getter]
    fn q(&self) -> String {
        self.0.q().to_string()
    }

    fn apply(&self, x: Blocks) -> PyResult<Blocks> {
        Ok(blocks_of(&self.0.apply(&block_matrix(&x)?).or_raise()?))
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        rows_of(self.0.materialize())
    }

    #[pyo3(signature = (restarts = 16, max_iter = 200, seed = 0, exact_at_22 = true))]
    fn norm<'py>(
        &self,
        py: Python<'py>,
        restarts: usize,
        max_iter: usize,
        seed: u64,
        exact_at_22: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = NormOptions { restarts, max_iter, seed, exact_at_22, ..NormOptions::default() };
        let est = py.detach(|| compop::operator_norm_with(&self.0, &opts));
        let d = PyDict::new(py);
        d.set_item("lower_bound", est.lower_bound)?;
        d.set_item("certified", est.certified)?;
        d.set_item("iterations", est.iterations)?;
        Ok(d)
    }

    /// Decides whether the operator is `C_J` for a Jordan *-morphism `J`.
    fn classify<'py>(&self, py: Python<'py>, w1: &PyWeight, w2: &PyWeight) -> PyResult<Bound<'py, PyDict>> {
        let c = compop::classify_characteristic_preserving(&self.0, &w1.0, &w2.0, self.0.p(), self.0.q()).or_raise()?;
        let d = PyDict::new(py);
        d.set_item("accept", c.verdict == Verdict::Accept)?;
        d.set_item("projection_residual", c.projection_residual)?;
        d.set_item("morphism", c.morphism.map(PyJordan))?;
        d.set_item("witness", c.witness.as_ref().map(blocks_of))?;
        Ok(d)
    }
}

/// `C_J: h₁^{1/2p} a h₁^{1/2p} ↦ h₂^{1/2q} J(a) h₂^{1/2q}`.
#[pyfunction]
fn build_composition(
    j: &PyJordan,
    w1: &PyWeight,
    w2: &PyWeight,
    p: &Bound<'_, PyAny>,
    q: &Bound<'_, PyAny>,
) -> PyResult<PySuperOperator> {
    Ok(PySuperOperator(compop::build_composition(&j.0, &w1.0, &w2.0, exponent(p)?, exponent(q)?).or_raise()?))
}

/// Change of weights `h → k` with its operator and the bound `‖|d|²‖_r`.
#[pyfunction]
fn change_of_weights<'py>(
    py: Python<'py>,
    h: &PyWeight,
    k: &PyWeight,
    p: &Bound<'_, PyAny>,
    q: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyDict>> {
    let cw = compop::change_of_weights(&h.0, &k.0, exponent(p)?, exponent(q)?).or_raise()?;
    let d = PyDict::new(py);
    d.set_item("d", blocks_of(&cw.d))?;
    d.set_item("r", cw.r.to_string())?;
    d.set_item("bound", cw.bound)?;
    d.set_item("operator", PySuperOperator(cw.operator))?;
    Ok(d)
}

#[pyfunction]
fn schatten_norm(x: Blocks, p: &Bound<'_, PyAny>) -> PyResult<f64> {
    matcore::schatten_norm(&block_matrix(&x)?, exponent(p)?).or_raise()
}

/// Symmetric embedding `h^{1/2p} a h^{1/2p}`.
#[pyfunction]
fn embed(w: &PyWeight, a: Blocks, p: &Bound<'_, PyAny>) -> PyResult<Blocks> {
    Ok(blocks_of(&haagerup::embed(&w.0, &block_matrix(&a)?, exponent(p)?).or_raise()?.x))
}

/// `r` with `1/r = 1/q − 1/p`, or `p/(p−q)` with `ratio=True`.
#[pyfunction]
#[pyo3(signature = (p, q, ratio = false))]
fn complement(p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>, ratio: bool) -> PyResult<String> {
    let (p, q) = (exponent(p)?, exponent(q)?);
    let r = if ratio { Exponent::ratio_complement(p, q) } else { Exponent::holder_complement(p, q) };
    Ok(r.or_raise()?.to_string())
}

/// Classical composition operator for a point map `T: Y → X₁` given as a
/// list of images (`None` off `Y`).
#[pyfunction]
fn classical_operator<'py>(
    py: Python<'py>,
    masses1: Vec<f64>,
    masses2: Vec<f64>,
    images: Vec<Option<usize>>,
    p: &Bound<'_, PyAny>,
    q: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyDict>> {
    let m1 = FiniteMeasureSpace::new(masses1).or_raise()?;
    let m2 = FiniteMeasureSpace::new(masses2).or_raise()?;
    let t = PointMap::new(images, m1.len()).or_raise()?;
    let op = classical::build_classical(&t, &m1, &m2, exponent(p)?, exponent(q)?).or_raise()?;
    let d = PyDict::new(py);
    d.set_item("r", op.criterion.r.to_string())?;
    d.set_item("norm_f", op.criterion.norm_f)?;
    d.set_item("bound", op.criterion.bound)?;
    d.set_item("norm", op.exact_norm)?;
    d.set_item("rn_derivative", classical::rn_derivative(&t, &m1, &m2).or_raise()?)?;
    d.set_item("operator", PySuperOperator(op.operator))?;
    Ok(d)
}

#[pyfunction]
fn eps_delta_modulus(phi0: Vec<f64>, phi1: Vec<f64>, eps: f64) -> PyResult<f64> {
    classical::eps_delta_modulus(&phi0, &phi1, eps).or_raise()
}

#[pymodule]
#[pyo3(name = "nclp")]
fn nclp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeight>()?;
    m.add_class::<PyJordan>()?;
    m.add_class::<PySuperOperator>()?;
    m.add("RefusalError", m.py().get_type::<RefusalError>())?;
    m.add_function(wrap_pyfunction!(build_composition, m)?)?;
    m.add_function(wrap_pyfunction!(change_of_weights, m)?)?;
    m.add_function(wrap_pyfunction!(schatten_norm, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(complement, m)?)?;
    m.add_function(wrap_pyfunction!(classical_operator, m)?)?;
    m.add_function(wrap_pyfunction!(eps_delta_modulus, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
