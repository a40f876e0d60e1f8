//! CODATA 2018 exact and recommended values, SI units.

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
pub const TORR: f64 = 101_325.0 / 760.0;
pub const MHZ: f64 = 2.0 * std::f64::consts::PI * 1.0e6;
