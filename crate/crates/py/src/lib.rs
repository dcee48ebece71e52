//! Python bindings: geometries, closures, independence and cycle certificates.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pseudospace::builder::{build_colored, build_free, BuildSchedule, WitnessBudget};
use pseudospace::closure::{Closure, VertexSet};
use pseudospace::cycles::{construct_cycle_witness, run_full_cycle, shortest_cycle};
use pseudospace::geometry::{audit_universal, validate_geometry};
use pseudospace::logic::Logic;
use pseudospace::paths::{closed_reduced_path_audit, distance_word};
use pseudospace::psg::{from_psg_str, to_psg_string};
use pseudospace::{ColorSpec, Flag, Report, VertexId};

fn err(e: pseudospace::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn set(v: Vec<VertexId>) -> VertexSet {
    v.into_iter().collect()
}

fn sorted(s: VertexSet) -> Vec<VertexId> {
    s.into_iter().collect()
}

fn spec(k: Option<usize>, pi: Option<Vec<usize>>) -> PyResult<Option<ColorSpec>> {
    match (k, pi) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("give k or pi, not both")),
        (Some(k), None) => ColorSpec::cyclic(k).map(Some).map_err(err),
        (None, Some(p)) => ColorSpec::from_successor(p).map(Some).map_err(err),
        (None, None) => Ok(None),
    }
}

fn report(r: Report) -> (bool, String) {
    (r.passed(), r.to_string())
}

/// Normal form of a dot-separated word such as `0.2.01`.
#[pyfunction]
fn reduce_word(word: &str) -> PyResult<String> {
    let w: pseudospace::Word = word.parse().map_err(err)?;
    Ok(w.nonsplitting_reduce().to_string())
}

/// Shortest cycle of a fixed-point-free successor map.
#[pyfunction]
fn shortest_pi_cycle(successor: Vec<usize>) -> PyResult<usize> {
    shortest_cycle(&successor).map_err(err)
}

/// A finite stage of the pseudospace.
#[pyclass(name = "Geometry", frozen)]
struct PyGeometry {
    g: pseudospace::Geometry,
}

#[pymethods]
impl PyGeometry {
    /// Colourless build from a seeded random schedule.
    #[staticmethod]
    fn free(stages: usize, seed: u64) -> PyResult<Self> {
        Ok(PyGeometry { g: build_free(&BuildSchedule::random(stages, seed)).map_err(err)? })
    }

    /// Colored build; `cutoff` defaults to a quarter of the stages.
    #[staticmethod]
    #[pyo3(signature = (stages, seed, k=None, pi=None, witnesses=1, cutoff=None))]
    fn colored(
        stages: usize,
        seed: u64,
        k: Option<usize>,
        pi: Option<Vec<usize>>,
        witnesses: usize,
        cutoff: Option<usize>,
    ) -> PyResult<Self> {
        let spec = spec(k, pi)?.ok_or_else(|| PyValueError::new_err("colored builds need k or pi"))?;
        let budget = WitnessBudget::new(witnesses, cutoff.unwrap_or(stages / 4)).map_err(err)?;
        let g = build_colored(&spec, &BuildSchedule::random(stages, seed), budget).map_err(err)?;
        Ok(PyGeometry { g })
    }

    #[staticmethod]
    fn from_psg(text: &str) -> PyResult<Self> {
        Ok(PyGeometry { g: from_psg_str(text).map_err(err)? })
    }

    fn to_psg(&self) -> String {
        to_psg_string(&self.g)
    }

    fn vertex_count(&self) -> usize {
        self.g.vertex_count()
    }

    /// 0 for points, 1 for lines, 2 for planes.
    fn level(&self, v: VertexId) -> Option<u8> {
        self.g.level(v).map(|l| l.index())
    }

    fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.g.neighbors(v).to_vec()
    }

    fn line_color(&self, line: VertexId) -> Option<usize> {
        self.g.line_color(line)
    }

    fn section_color(&self, plane: VertexId, point: VertexId) -> Option<usize> {
        self.g.section_color(plane, point)
    }

    /// Structural, reduced-path and coloring audits.
    #[pyo3(signature = (max_len=6))]
    fn audit(&self, max_len: usize) -> (bool, String) {
        let mut r = Report::new("audit");
        r.absorb("validate", validate_geometry(&self.g));
        r.absorb("paths", closed_reduced_path_audit(&self.g, max_len));
        if self.g.is_colored() {
            r.absorb("universal", audit_universal(&self.g));
        }
        report(r)
    }

    fn fcl(&self, ids: Vec<VertexId>) -> PyResult<Vec<VertexId>> {
        Ok(sorted(Closure::new(&self.g).fcl(&set(ids)).map_err(err)?.members))
    }

    fn acl(&self, ids: Vec<VertexId>) -> PyResult<Vec<VertexId>> {
        Ok(sorted(Closure::new(&self.g).acl(&set(ids)).map_err(err)?.members))
    }

    fn defect(&self, ids: Vec<VertexId>) -> PyResult<usize> {
        Closure::new(&self.g).defect(&set(ids)).map_err(err)
    }

    /// Distance word between flags given as (plane, line, point).
    fn distance_word(&self, f: (VertexId, VertexId, VertexId), h: (VertexId, VertexId, VertexId)) -> PyResult<String> {
        let (f, h) = (Flag::new(f.0, f.1, f.2), Flag::new(h.0, h.1, h.2));
        Ok(distance_word(&self.g, f, h).map_err(err)?.to_string())
    }

    fn types_equal(&self, u: Vec<VertexId>, v: Vec<VertexId>) -> PyResult<bool> {
        Logic::new(&self.g).types_equal(&u, &v).map_err(err)
    }

    /// Verdict and the violations found.
    fn independent(&self, x: Vec<VertexId>, y: Vec<VertexId>, z: Vec<VertexId>) -> PyResult<(bool, Vec<String>)> {
        let c = Logic::new(&self.g).independent(&set(x), &set(y), &set(z)).map_err(err)?;
        Ok((c.verdict, c.violations.iter().map(ToString::to_string).collect()))
    }

    fn kernel(&self, tuples: Vec<Vec<VertexId>>) -> PyResult<Vec<VertexId>> {
        Ok(sorted(Logic::new(&self.g).kernel_finite(&tuples).map_err(err)?))
    }

    fn pf_witness(&self, base: Vec<VertexId>, a: Vec<VertexId>, a2: Vec<VertexId>, b: Vec<VertexId>) -> PyResult<bool> {
        Logic::new(&self.g).pf_witness_check(&set(base), &a, &a2, &b).map_err(err)
    }

    /// `(a, b, c, c')` for section color `r`.
    fn cycle_witness(&self, r: usize) -> PyResult<(VertexId, VertexId, VertexId, VertexId)> {
        let w = construct_cycle_witness(&self.g, r).map_err(err)?;
        Ok((w.a, w.b, w.c, w.c_prime))
    }

    /// Full cycle certificate for the geometry's own colors.
    fn cycle_certificate(&self) -> PyResult<(bool, String)> {
        let spec = self.g.color_spec().ok_or_else(|| err(pseudospace::Error::Uncolored))?;
        Ok(report(run_full_cycle(&self.g, spec).map_err(err)?))
    }
}

#[pymodule]
fn pseudospace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_function(wrap_pyfunction!(reduce_word, m)?)?;
    m.add_function(wrap_pyfunction!(shortest_pi_cycle, m)?)?;
    Ok(())
}
