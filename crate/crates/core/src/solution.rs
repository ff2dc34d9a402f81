//! Sampled free-surface solutions shared by both nonlinear solvers.

use crate::scalar::{Cx, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile<T> {
    /// `u = q^2` of the simplified model.
    Simplified { u: Vec<Cx<T>> },
    /// Speed and inclination of the full model.
    Full { q: Vec<T>, theta: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveMeta<T> {
    pub solver: &'static str,
    /// Requested tolerance (local error or Newton residual).
    pub tol: T,
    /// Largest residual found by the solver's own check.
    pub residual: T,
    pub iterations: usize,
    pub evaluations: usize,
    /// Start offset from the stagnation point.
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSurfaceSolution<T> {
    pub phi: Vec<T>,
    pub profile: Profile<T>,
    pub eps: T,
    pub meta: SolveMeta<T>,
}

impl<T: Real> FreeSurfaceSolution<T> {
    /// Speed `q` at every sample; `Re sqrt(u)` for the simplified model.
    pub fn speed(&self) -> Vec<T> {
        match &self.profile {
            Profile::Simplified { u } => u.iter().map(|z| z.sqrt().re).collect(),
            Profile::Full { q, .. } => q.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}
