pub mod evaluate;
pub mod multilabel;
pub mod regression;
pub mod text;
