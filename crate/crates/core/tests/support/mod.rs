#![allow(dead_code)]

pub mod feature_oracle;
pub mod formula_oracle;
