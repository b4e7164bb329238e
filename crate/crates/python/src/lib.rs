//! Python bindings: grids, weights, N-functions, the maximal truncated Hilbert
//! transform, sparse families, rearrangement-invariant norms and the
//! experiment runner.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use sparsedom::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical { .. } | Error::NonFinite { .. } | Error::ConjugateUnbracketed { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        e => PyValueError::new_err(e.to_string()),
    }
}

#[pymodule(name = "sparsedom")]
mod bindings {
    use pyo3::prelude::*;

    use sparsedom::harness::{run, ExperimentConfig, ExperimentKind};
    use sparsedom::operators::{best_maximal, dyadic_maximal};
    use sparsedom::sparse::build_grid_families;
    use sparsedom::young::inequality_kit;
    use sparsedom::{
        carleson_check, maximal_truncated, power_weight, shifted_grids, verify_sparsity, DyadicGrid, Hilbert, SpaceSpec,
    };

    use super::py_err;

    #[pyclass(frozen, from_py_object, name = "Domain", module = "sparsedom")]
    #[derive(Clone, Copy)]
    pub struct Domain(pub sparsedom::Domain);

    #[pymethods]
    impl Domain {
        /// `[lo, lo + length)` split into `2**level` cells.
        #[new]
        fn new(lo: f64, length: f64, level: u32) -> PyResult<Self> {
            sparsedom::Domain::new(lo, length, level).map(Self).map_err(py_err)
        }

        #[getter]
        fn lo(&self) -> f64 {
            self.0.lo()
        }

        #[getter]
        fn length(&self) -> f64 {
            self.0.len()
        }

        #[getter]
        fn level(&self) -> u32 {
            self.0.level()
        }

        #[getter]
        fn cells(&self) -> usize {
            self.0.cells()
        }

        #[getter]
        fn cell_width(&self) -> f64 {
            self.0.cell_width()
        }

        fn midpoints(&self) -> Vec<f64> {
            (0..self.0.cells()).map(|i| self.0.midpoint(i)).collect()
        }

        fn cell_of(&self, x: f64) -> Option<usize> {
            self.0.cell_of(x)
        }

        fn __repr__(&self) -> String {
            format!(
                "Domain(lo={}, length={}, level={})",
                self.0.lo(),
                self.0.len(),
                self.0.level()
            )
        }
    }

    #[pyclass(frozen, skip_from_py_object, name = "GridFunction", module = "sparsedom")]
    #[derive(Clone)]
    pub struct GridFunction(pub sparsedom::GridFunction);

    #[pymethods]
    impl GridFunction {
        #[new]
        fn new(domain: Domain, values: Vec<f64>) -> PyResult<Self> {
            sparsedom::GridFunction::new(domain.0, values).map(Self).map_err(py_err)
        }

        /// Midpoint-sampled indicator of `[a, b)`.
        #[staticmethod]
        fn indicator(domain: Domain, a: f64, b: f64) -> Self {
            Self(sparsedom::GridFunction::indicator(domain.0, a, b))
        }

        #[getter]
        fn domain(&self) -> Domain {
            Domain(*self.0.domain())
        }

        fn values(&self) -> Vec<f64> {
            self.0.values().to_vec()
        }

        fn integral(&self) -> f64 {
            self.0.integral()
        }

        /// Maximal truncated Hilbert transform at every cell midpoint.
        fn maximal_truncated(&self, py: Python<'_>) -> Self {
            let f = &self.0;
            Self(py.detach(|| maximal_truncated(f, &Hilbert)))
        }

        /// Largest of the three shifted dyadic maximal functions.
        fn maximal(&self) -> Self {
            Self(best_maximal(&self.0))
        }

        /// Dyadic maximal function of the grid with the given shift (0, 1 or 2).
        fn dyadic_maximal(&self, shift: u8) -> PyResult<Self> {
            let grid = DyadicGrid::new(*self.0.domain(), shift).map_err(py_err)?;
            Ok(Self(dyadic_maximal(&self.0, &grid)))
        }

        /// Upper median over the whole domain.
        fn median(&self) -> f64 {
            let root = DyadicGrid::standard(*self.0.domain()).cube(0, 0);
            sparsedom::median(&self.0, &root)
        }

        fn __len__(&self) -> usize {
            self.0.len()
        }

        fn __repr__(&self) -> String {
            format!(
                "GridFunction(level={}, cells={})",
                self.0.domain().level(),
                self.0.len()
            )
        }
    }

    #[pyclass(frozen, name = "Weight", module = "sparsedom")]
    pub struct Weight(pub sparsedom::Weight);

    #[pymethods]
    impl Weight {
        #[new]
        fn new(domain: Domain, values: Vec<f64>) -> PyResult<Self> {
            sparsedom::Weight::from_values(domain.0, values)
                .map(Self)
                .map_err(py_err)
        }

        /// `|x|**a` with exact cell averages.
        #[staticmethod]
        fn power(a: f64, domain: Domain) -> PyResult<Self> {
            power_weight(a, domain.0).map(Self).map_err(py_err)
        }

        #[staticmethod]
        fn unit(domain: Domain) -> Self {
            Self(sparsedom::Weight::unit(domain.0))
        }

        fn values(&self) -> Vec<f64> {
            self.0.values().values().to_vec()
        }

        fn ap(&self, p: f64) -> PyResult<f64> {
            self.0.ap_characteristic(p).map_err(py_err)
        }

        fn a1(&self) -> f64 {
            self.0.a1_characteristic()
        }

        /// Fujii–Wilson characteristic, the largest over the three grids.
        fn ainf(&self) -> f64 {
            self.0.ainf_characteristic_all()
        }

        /// `(eps, lhs, rhs, ok)` of the openness step at `p`.
        fn openness_step(&self, p: f64) -> PyResult<(f64, f64, f64, bool)> {
            let s = sparsedom::openness_step(&self.0, p, 1).map_err(py_err)?;
            Ok((s.eps, s.lhs, s.rhs, s.ok))
        }
    }

    #[pyclass(frozen, skip_from_py_object, name = "NFunction", module = "sparsedom")]
    #[derive(Clone)]
    pub struct NFunction(pub sparsedom::NFunction);

    #[pymethods]
    impl NFunction {
        /// `t**p`.
        #[staticmethod]
        fn power(p: f64) -> PyResult<Self> {
            sparsedom::NFunction::power(p).map(Self).map_err(py_err)
        }

        /// `t**p / p`.
        #[staticmethod]
        fn power_over_p(p: f64) -> PyResult<Self> {
            sparsedom::NFunction::power_over_p(p).map(Self).map_err(py_err)
        }

        /// `t**lower` below `knot`, continued as a multiple of `t**upper`.
        #[staticmethod]
        #[pyo3(signature = (lower, upper, knot = 1.0))]
        fn piecewise(lower: f64, upper: f64, knot: f64) -> PyResult<Self> {
            sparsedom::NFunction::piecewise(lower, upper, knot)
                .map(Self)
                .map_err(py_err)
        }

        #[staticmethod]
        fn exponential() -> Self {
            Self(sparsedom::NFunction::exponential())
        }

        #[getter]
        fn kind(&self) -> &'static str {
            self.0.kind()
        }

        fn __call__(&self, t: f64) -> PyResult<f64> {
            self.0.try_value(t).map_err(py_err)
        }

        fn inverse(&self, u: f64) -> PyResult<f64> {
            self.0.inverse(u).map_err(py_err)
        }

        fn complementary(&self) -> Self {
            Self(self.0.complementary())
        }

        /// Lower and upper dilation indices.
        fn dilation_indices(&self) -> (f64, f64) {
            let d = self.0.dilation_indices();
            (d.lower, d.upper)
        }

        /// `(C, C')` of the doubling condition; `None` outside Δ₂.
        fn delta2(&self) -> Option<(f64, f64)> {
            let d = self.0.delta2_data();
            d.in_delta2.then_some((d.c, d.c_prime))
        }

        /// Checks of the inequality kit as `(name, worst_ratio, ok)`.
        fn inequality_kit(&self) -> PyResult<Vec<(String, f64, bool)>> {
            let kit = inequality_kit(&self.0).map_err(py_err)?;
            Ok(kit
                .checks
                .iter()
                .map(|c| (c.name.to_string(), c.worst_ratio, c.ok))
                .collect())
        }
    }

    fn space(family: &str, p: f64, q: Option<f64>, phi: Option<&NFunction>) -> PyResult<SpaceSpec> {
        let spec = match family {
            "lebesgue" => SpaceSpec::lebesgue(p),
            "lorentz" => SpaceSpec::lorentz(p, q.unwrap_or(p)),
            "orlicz" => match phi {
                Some(phi) => Ok(SpaceSpec::orlicz(phi.0.clone())),
                None => return Err(pyo3::exceptions::PyValueError::new_err("orlicz needs phi")),
            },
            other => {
                return Err(pyo3::exceptions::PyValueError::new_err(format!(
                    "unknown space family {other:?} (lebesgue, lorentz, orlicz)"
                )))
            }
        };
        spec.map_err(py_err)
    }

    /// Rearrangement-invariant norm of `f` with respect to `weight dx`.
    #[pyfunction]
    #[pyo3(signature = (f, family, p = 2.0, q = None, phi = None, weight = None))]
    fn space_norm(
        f: &GridFunction,
        family: &str,
        p: f64,
        q: Option<f64>,
        phi: Option<&NFunction>,
        weight: Option<&Weight>,
    ) -> PyResult<f64> {
        let x = space(family, p, q, phi)?;
        sparsedom::space_norm(&f.0, &x, weight.map(|w| &w.0)).map_err(py_err)
    }

    /// `∫ φ(|f|) w dx`.
    #[pyfunction]
    #[pyo3(signature = (f, phi, weight = None))]
    fn modular(f: &GridFunction, phi: &NFunction, weight: Option<&Weight>) -> PyResult<f64> {
        sparsedom::modular(&f.0, &phi.0, weight.map(|w| &w.0)).map_err(py_err)
    }

    /// Non-increasing rearrangement as `(values, ends)`: the value `values[k]`
    /// is taken on `[ends[k-1], ends[k])`.
    #[pyfunction]
    #[pyo3(signature = (f, weight = None))]
    fn rearrangement(f: &GridFunction, weight: Option<&Weight>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let r = sparsedom::rearrangement(&f.0, weight.map(|w| &w.0)).map_err(py_err)?;
        Ok((r.values().to_vec(), r.ends().to_vec()))
    }

    /// Stopping-time sparse families of `f` over the three shifted grids, one
    /// list per family of `(shift, start_cell, width)` cubes.
    #[pyfunction]
    #[pyo3(signature = (f, threshold = 2.0))]
    fn sparse_families(f: &GridFunction, threshold: f64) -> PyResult<Vec<Vec<(u8, usize, usize)>>> {
        let mut out = Vec::new();
        for g in shifted_grids(*f.0.domain()) {
            for fam in build_grid_families(&f.0, &g, threshold).map_err(py_err)? {
                out.push(fam.cubes().iter().map(|q| (g.shift(), q.start, q.width)).collect());
            }
        }
        Ok(out)
    }

    /// Sparsity certificate and worst Carleson ratio of every family of `f`:
    /// a list of `(eta, min_exceptional_fraction, sparse_ok, carleson_ok)`.
    #[pyfunction]
    #[pyo3(signature = (f, weight, threshold = 2.0))]
    fn certify(f: &GridFunction, weight: &Weight, threshold: f64) -> PyResult<Vec<(f64, f64, bool, bool)>> {
        let mut out = Vec::new();
        for g in shifted_grids(*f.0.domain()) {
            for fam in build_grid_families(&f.0, &g, threshold).map_err(py_err)? {
                let cert = verify_sparsity(&fam);
                let mut carleson = true;
                for r in g.cubes().filter(|r| fam.root().contains(r)) {
                    carleson &= carleson_check(&fam, &weight.0, &r).map_err(py_err)?.ok;
                }
                out.push((cert.eta, cert.min_exceptional_fraction, cert.ok, carleson));
            }
        }
        Ok(out)
    }

    /// Runs an experiment from TOML text and returns the report as JSON.
    #[pyfunction]
    #[pyo3(signature = (kind, config = "", seed = None, trials = None, resolution = None))]
    fn run_experiment(
        py: Python<'_>,
        kind: &str,
        config: &str,
        seed: Option<u64>,
        trials: Option<usize>,
        resolution: Option<u32>,
    ) -> PyResult<String> {
        let kind = ExperimentKind::from_name(kind)
            .ok_or_else(|| pyo3::exceptions::PyValueError::new_err(format!("kind: unknown experiment {kind:?}")))?;
        let mut cfg = ExperimentConfig::from_toml_str(config).map_err(py_err)?;
        cfg.kind.get_or_insert(kind);
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(t) = trials {
            cfg.trials = t;
        }
        if let Some(j) = resolution {
            cfg.domain.level = j;
        }
        cfg.validate().map_err(py_err)?;
        let report = py.detach(|| run(kind, &cfg)).map_err(py_err)?;
        report.to_json().map_err(py_err)
    }
}
