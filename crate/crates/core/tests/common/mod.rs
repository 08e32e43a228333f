#![allow(dead_code)]

pub mod estimation;
pub mod graphs;
pub mod oracle;
