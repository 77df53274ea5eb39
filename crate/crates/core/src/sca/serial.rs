//! JSON document form of [`BeamformingSolution`]. Complex data is stored
//! as interleaved `re, im` arrays, matrices row by row.

use serde::{Deserialize, Serialize};

use super::{Anchors, BeamScalars, BeamformingSolution, Method, ScaTrace};
use crate::conic::SolverStatus;
use crate::error::{invalid_input, Error};
use crate::linalg::{CMat, CVec, C64};
use crate::ratemodel::AnBenchmarkParams;

#[derive(Serialize, Deserialize)]
pub(super) struct AnDoc {
    ell: Vec<f64>,
    f_mrt: Vec<Vec<f64>>,
    an_basis: Vec<Vec<Vec<f64>>>,
    v: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
pub(super) struct SolutionDoc {
    method: Method,
    objective: f64,
    w_mats: Vec<Vec<Vec<f64>>>,
    f_mats: Vec<Vec<Vec<f64>>>,
    w_vecs: Vec<Vec<f64>>,
    f_vecs: Vec<Vec<f64>>,
    w_rank: Vec<f64>,
    f_rank: Vec<f64>,
    scalars: Vec<BeamScalars>,
    anchors: Vec<Anchors>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    an: Option<AnDoc>,
    trace: ScaTrace,
    status: SolverStatus,
}

fn vec_doc(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn mat_doc(m: &CMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).flat_map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn vec_from(d: &[f64]) -> Result<CVec, Error> {
    if d.len() % 2 != 0 {
        return Err(invalid_input("complex array has odd length"));
    }
    Ok(CVec::from_iterator(d.len() / 2, d.chunks(2).map(|p| C64::new(p[0], p[1]))))
}

fn mat_from(d: &[Vec<f64>]) -> Result<CMat, Error> {
    let rows = d.len();
    let cols = d.first().map_or(0, |r| r.len() / 2);
    if d.iter().any(|r| r.len() != 2 * cols) {
        return Err(invalid_input("ragged complex matrix"));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| C64::new(d[i][2 * j], d[i][2 * j + 1])))
}

impl From<&BeamformingSolution> for SolutionDoc {
    fn from(s: &BeamformingSolution) -> Self {
        Self {
            method: s.method,
            objective: s.objective,
            w_mats: s.w_mats.iter().map(mat_doc).collect(),
            f_mats: s.f_mats.iter().map(mat_doc).collect(),
            w_vecs: s.w_vecs.iter().map(vec_doc).collect(),
            f_vecs: s.f_vecs.iter().map(vec_doc).collect(),
            w_rank: s.w_rank.clone(),
            f_rank: s.f_rank.clone(),
            scalars: s.scalars.clone(),
            anchors: s.anchors.clone(),
            an: s.an.as_ref().map(|a| AnDoc {
                ell: a.ell.clone(),
                f_mrt: a.f_mrt.iter().map(vec_doc).collect(),
                an_basis: a.an_basis.iter().map(mat_doc).collect(),
                v: a.v.iter().map(vec_doc).collect(),
            }),
            trace: s.trace.clone(),
            status: s.status,
        }
    }
}

impl TryFrom<SolutionDoc> for BeamformingSolution {
    type Error = Error;

    fn try_from(d: SolutionDoc) -> Result<Self, Error> {
        let mats = |v: &[Vec<Vec<f64>>]| v.iter().map(|m| mat_from(m)).collect::<Result<Vec<_>, _>>();
        let vecs = |v: &[Vec<f64>]| v.iter().map(|x| vec_from(x)).collect::<Result<Vec<_>, _>>();
        let an = match &d.an {
            Some(a) => Some(AnBenchmarkParams {
                ell: a.ell.clone(),
                f_mrt: vecs(&a.f_mrt)?,
                an_basis: mats(&a.an_basis)?,
                v: vecs(&a.v)?,
            }),
            None => None,
        };
        Ok(Self {
            method: d.method,
            w_mats: mats(&d.w_mats)?,
            f_mats: mats(&d.f_mats)?,
            w_vecs: vecs(&d.w_vecs)?,
            f_vecs: vecs(&d.f_vecs)?,
            w_rank: d.w_rank,
            f_rank: d.f_rank,
            objective: d.objective,
            scalars: d.scalars,
            anchors: d.anchors,
            an,
            trace: d.trace,
            status: d.status,
        })
    }
}
