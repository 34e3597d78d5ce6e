use std::borrow::Cow;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};
use crate::quadrature::QuadratureScheme;

use super::perturbation::Perturbation;

/// A circle-invariant function sampled at the quadrature nodes.
///
/// Functions produced from closed forms carry jets in the moment coordinate
/// `s` (`order` derivatives are exact). Plain samples have `order == 0` and
/// are differentiated panel-wise when an operator needs derivatives.
#[derive(Debug, Clone)]
pub struct GridFunction {
    name: String,
    scheme: Arc<QuadratureScheme>,
    values: Vec<f64>,
    jets: Option<Vec<Jet>>,
    order: usize,
}

impl GridFunction {
    pub fn from_values(
        scheme: Arc<QuadratureScheme>,
        name: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if values.len() != scheme.len() {
            return Err(Error::NodeMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(name));
        }
        Ok(GridFunction {
            name,
            scheme,
            values,
            jets: None,
            order: 0,
        })
    }

    pub fn from_jets(
        scheme: Arc<QuadratureScheme>,
        name: impl Into<String>,
        jets: Vec<Jet>,
        order: usize,
    ) -> Result<Self> {
        let name = name.into();
        if jets.len() != scheme.len() {
            return Err(Error::NodeMismatch);
        }
        if jets.iter().any(|j| !j.value().is_finite()) {
            return Err(Error::NonFinite(name));
        }
        let values = jets.iter().map(Jet::value).collect();
        Ok(GridFunction {
            name,
            scheme,
            values,
            jets: Some(jets),
            order: order.min(JET_ORDER),
        })
    }

    /// Samples a closed-form profile (a sum of perturbation terms).
    pub fn sample(
        scheme: Arc<QuadratureScheme>,
        name: impl Into<String>,
        profile: &Perturbation,
    ) -> Result<Self> {
        let jets = scheme
            .s()
            .iter()
            .zip(scheme.sc())
            .map(|(s, sc)| profile.jet(*s, *sc))
            .collect();
        Self::from_jets(scheme, name, jets, JET_ORDER)
    }

    pub fn constant(scheme: Arc<QuadratureScheme>, name: impl Into<String>, c: f64) -> Self {
        let jets = vec![Jet::constant(c); scheme.len()];
        Self::from_jets(scheme, name, jets, JET_ORDER).expect("constant is finite")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Log-coordinate of the nodes the values live on.
    pub fn nodes(&self) -> &[f64] {
        self.scheme.t()
    }

    pub fn scheme(&self) -> &Arc<QuadratureScheme> {
        &self.scheme
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn has_jets(&self) -> bool {
        self.jets.is_some()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Jets valid to at least `needed` derivatives. Plain samples fall back to
    /// panel-wise polynomial differentiation.
    pub fn jets_for(&self, needed: usize) -> Result<Cow<'_, [Jet]>> {
        match &self.jets {
            Some(j) if self.order >= needed => Ok(Cow::Borrowed(j.as_slice())),
            Some(_) => Err(Error::InsufficientSmoothness {
                name: self.name.clone(),
                needed,
            }),
            None => Ok(Cow::Owned(self.scheme.spectral_jets(&self.values))),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    fn combine(&self, other: &GridFunction, a: f64, b: f64, name: String) -> Result<GridFunction> {
        if !self.scheme.same_nodes(&other.scheme) {
            return Err(Error::NodeMismatch);
        }
        match (&self.jets, &other.jets) {
            (Some(x), Some(y)) => {
                let jets = x.iter().zip(y).map(|(p, q)| p.scale(a) + q.scale(b)).collect();
                GridFunction::from_jets(self.scheme.clone(), name, jets, self.order.min(other.order))
            }
            _ => {
                let values = self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(p, q)| a * p + b * q)
                    .collect();
                GridFunction::from_values(self.scheme.clone(), name, values)
            }
        }
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        let name = format!("{a}*{}+{b}*{}", self.name, other.name);
        self.combine(other, a, b, name)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        let name = format!("{}-{}", self.name, other.name);
        self.combine(other, 1.0, -1.0, name)
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        if let Some(j) = out.jets.as_mut() {
            j.iter_mut().for_each(|x| *x = x.scale(a));
        }
        out
    }

    pub fn shifted(&self, c: f64) -> GridFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v += c);
        if let Some(j) = out.jets.as_mut() {
            j.iter_mut().for_each(|x| x.0[0] += c);
        }
        out
    }

    /// Pointwise product (jets multiply when both sides carry them).
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        if !self.scheme.same_nodes(&other.scheme) {
            return Err(Error::NodeMismatch);
        }
        let name = format!("{}*{}", self.name, other.name);
        match (&self.jets, &other.jets) {
            (Some(x), Some(y)) => {
                let jets = x.iter().zip(y).map(|(p, q)| *p * *q).collect();
                GridFunction::from_jets(self.scheme.clone(), name, jets, self.order.min(other.order))
            }
            _ => {
                let values = self.values.iter().zip(&other.values).map(|(p, q)| p * q).collect();
                GridFunction::from_values(self.scheme.clone(), name, values)
            }
        }
    }
}
