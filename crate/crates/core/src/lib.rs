pub mod arbitrage;
pub mod cli;
pub mod document;
pub mod fixtures;
pub mod gains;
pub mod generate;
pub mod linalg;
pub mod lp;
pub mod market;
pub mod multicurve;
pub mod numeric;
pub mod oracle;
pub mod pricing;
pub mod report;
pub mod tree;
