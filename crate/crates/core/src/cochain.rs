use crate::error::{Error, Result};
use crate::mesh::SimplicialComplex;

/// Real values on the k-simplices of a complex.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(cx: &SimplicialComplex, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > cx.dim() {
            return Err(Error::InvalidDegree {
                degree,
                dim: cx.dim(),
            });
        }
        if values.len() != cx.count(degree) {
            return Err(Error::Shape(format!(
                "{degree}-cochain has {} values, complex has {} {degree}-simplices",
                values.len(),
                cx.count(degree)
            )));
        }
        Ok(Cochain { degree, values })
    }

    pub fn zeros(cx: &SimplicialComplex, degree: usize) -> Self {
        Cochain {
            degree,
            values: vec![0.0; cx.count(degree)],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
