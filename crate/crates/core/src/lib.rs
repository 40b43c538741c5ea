pub mod angular_momentum;
pub mod dressed_medium;
pub mod par;
pub mod pulse_transport;
pub mod carrier_tuner;
pub mod info_merit;
pub mod cli;
