pub mod bench;
pub mod calibrate;
pub mod match_cmd;
pub mod rectify;
pub mod synth;
pub mod timesync;
