use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("general position violated: {0}")]
    GeneralPosition(String),
    #[error("point {point} lies on line {line}")]
    PointOnLine { point: usize, line: usize },
    #[error("point {0} lies on a cell edge")]
    PointOnCellEdge(String),
    #[error("chain vertices are not sorted by x")]
    NotSorted,
    #[error("chain is not convex")]
    NotConvex,
    #[error("chains overlap in x")]
    XOverlap,
    #[error("empty chain")]
    EmptyChain,
    #[error("oracle never answered found")]
    NotFound,
    #[error("representative segments intersect")]
    SegmentsIntersect,
    #[error("hulls intersect")]
    HullsIntersect,
    #[error("parameter out of range: {0}")]
    ParamRange(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
