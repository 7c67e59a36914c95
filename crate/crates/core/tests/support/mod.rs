#![allow(dead_code)]

pub mod i2c_model;
pub mod nodal;
