//! Error-to-exit-code mapping: 0 ok, 2 usage/params, 3 I/O, 4 size guard,
//! 5 estimator/recovery failure (machine-readable code in the report).

use sbm_ident::affiliation::EstimatorError;
use sbm_ident::kruskal::KruskalError;
use sbm_ident::mixture::MixtureError;
use sbm_ident::moments::MomentsError;
use sbm_ident::oracle::OracleError;
use sbm_ident::sampler::SampleError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    SizeGuard(String),
    /// Estimator-domain failure with a stable machine-readable code.
    Estimator { code: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::SizeGuard(_) => 4,
            CliError::Estimator { .. } => 5,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "USAGE",
            CliError::Io(_) => "IO",
            CliError::SizeGuard(_) => "SIZE_GUARD",
            CliError::Estimator { code, .. } => code,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::SizeGuard(m) => m.clone(),
            CliError::Estimator { message, .. } => message.clone(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code(), self.message())
    }
}

pub fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<MomentsError> for CliError {
    fn from(e: MomentsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SizeGuard(m) => CliError::SizeGuard(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<KruskalError> for CliError {
    fn from(e: KruskalError) -> Self {
        match e {
            KruskalError::SizeGuard(m) => CliError::SizeGuard(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        let code = match &e {
            EstimatorError::DegenerateAlphaBeta => "DEGENERATE_ALPHA_BETA",
            EstimatorError::InconsistentMoments(_) => "INCONSISTENT_MOMENTS",
            EstimatorError::InfeasibleS2(_) => "INFEASIBLE_S2",
            EstimatorError::SingleGroup => "SINGLE_GROUP",
            EstimatorError::MissingMoment(_) => "MISSING_MOMENT",
            EstimatorError::MissingSubset(_) => "MISSING_SUBSET",
            EstimatorError::WrongArity { .. } => "WRONG_ARITY",
            EstimatorError::QNotInteger(_) => "Q_NOT_INTEGER",
            EstimatorError::NotBinary => "NOT_BINARY",
        };
        CliError::Estimator {
            code,
            message: e.to_string(),
        }
    }
}

impl From<MixtureError> for CliError {
    fn from(e: MixtureError) -> Self {
        let code = match &e {
            MixtureError::InvalidParams(_) => return CliError::Usage(e.to_string()),
            MixtureError::SizeGuard(m) => return CliError::SizeGuard(m.clone()),
            MixtureError::AssumptionViolated(_) => "ASSUMPTION_VIOLATED",
            MixtureError::Inconsistent(_) => "INCONSISTENT_COMPONENTS",
            MixtureError::ThetaInOutEqual => "THETA_IN_OUT_EQUAL",
            MixtureError::WrongArity { .. } => "WRONG_ARITY",
            MixtureError::InfeasiblePriors(_) => "INFEASIBLE_PRIORS",
            MixtureError::BadPowerSums(_) => "BAD_POWER_SUMS",
            MixtureError::AlphaNonPositive(_) => "ALPHA_NON_POSITIVE",
            MixtureError::TruncatedAtZero | MixtureError::BadRate(_) => "BAD_RATE",
            MixtureError::BadCutpoints => return CliError::Usage(e.to_string()),
            MixtureError::NotWeighted => return CliError::Usage(e.to_string()),
        };
        CliError::Estimator {
            code,
            message: e.to_string(),
        }
    }
}
