pub mod aba;
pub mod acceptance;
pub mod acool;
pub mod bua;
pub mod ecc;
pub mod field;
pub mod hmdm;
pub mod msg;
pub mod protocol;
pub mod rs;
pub mod rba;
pub mod sim;
pub mod small_t;
