#![allow(dead_code)]

pub mod desk;
pub mod ucihar;
