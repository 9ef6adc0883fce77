// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use xbar_detect::channel::{draw_ssfc, place_uts};
use xbar_detect::circuit::{build_proposed, Converters};
use xbar_detect::{ChannelRealization, ConductanceProgram, DetectorKind, MappingConfig, RngStream, ScenarioParams};

/// A channel, a received vector and the matching proposed-circuit program.
pub struct Fixture {
    pub chan: ChannelRealization,
    pub y: Vec<f64>,
    pub program: ConductanceProgram,
    pub v_in: Vec<f64>,
}

/// `users × antennas` fixture at the given noise-to-signal ratio. `cell`
/// drops users in the cell instead of using unit large-scale fading.
pub fn fixture(seed: u64, antennas: usize, users: usize, cell: bool, rho: f64) -> Fixture {
    let params = ScenarioParams { antennas, users, ..Default::default() };
    let mut s = RngStream::new(seed, 0);
    let g = draw_ssfc(&params, &mut s).expect("fixture channel");
    let lambda = if cell { place_uts(&params, &mut s).expect("fixture drop") } else { vec![1.0; users] };
    let chan = ChannelRealization::new(&params, g, lambda, rho).expect("fixture realization");
    let x = s.gaussian_vec(2 * users, 0.0, 1.0);
    let y = chan.h.matvec(&x);
    let program = build_proposed(&chan, DetectorKind::Mmse, &MappingConfig::default()).expect("fixture program");
    let (v_in, _) = program.input_voltages(&y, &Converters::default()).expect("fixture inputs");
    Fixture { chan, y, program, v_in }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let f = fixture(1, 16, 2, false, 0.01);
        assert_eq!(f.y.len(), 32);
        assert_eq!(f.v_in.len(), f.program.inputs());
    }
}
