use thiserror::Error;

use crate::dichotomy::DichotomyError;
use crate::model::ModelError;
use crate::onedim::OneDimError;
use crate::ratlp::LpError;
use crate::sim::SimError;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Dichotomy(#[from] DichotomyError),
    #[error(transparent)]
    OneDim(#[from] OneDimError),
    #[error(transparent)]
    Sim(#[from] SimError),
    /// The model lies outside what the decision procedures cover.
    #[error("out of scope: {0}")]
    Scope(String),
}
