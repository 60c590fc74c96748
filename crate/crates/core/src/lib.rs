pub mod congruence;
pub mod farey;
pub mod golden;
pub mod group;
pub mod matrix;
pub mod modular;
pub mod quotient;
pub mod verify;
